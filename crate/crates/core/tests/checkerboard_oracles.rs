use frechet::checkerboard_prior::{
    all_permutations, approximation_bound, dirichlet, exact_density_matrix, matrix_rect_prob_exact,
    project_coupling, random_distinct, AlphaSpec, CheckerboardMixture, CheckerboardPrior, PermSource, Permutation,
    Resolution,
};
use frechet::geometry::Rect;
use frechet::measures::{bl_distance, Grid2D};
use frechet::rng::stream;
use frechet::stats::Estimate;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use rand::{Rng, RngCore};

fn random_mixture(k: usize, m: usize, rng: &mut dyn RngCore) -> CheckerboardMixture {
    let cap = (1..=k).product::<usize>();
    let perms = random_distinct(k, m.min(cap), rng).unwrap();
    let w = dirichlet(&vec![1.0; perms.len()], rng).unwrap();
    CheckerboardMixture::new(k, perms, w).unwrap()
}

/// Midpoint rule for `int_0^a int_0^b f` on panels split at the cell edges `j/k`.
fn quadrature(mix: &CheckerboardMixture, a: f64, b: f64) -> f64 {
    let k = mix.k();
    let edges = |hi: f64| {
        let mut e = vec![0.0];
        e.extend((1..k).map(|j| j as f64 / k as f64).filter(|t| *t < hi));
        e.push(hi);
        e
    };
    let (xs, ys) = (edges(a), edges(b));
    let mut total = 0.0;
    for xw in xs.windows(2) {
        for yw in ys.windows(2) {
            let (x, y) = (0.5 * (xw[0] + xw[1]), 0.5 * (yw[0] + yw[1]));
            total += mix.density(x, y) * (xw[1] - xw[0]) * (yw[1] - yw[0]);
        }
    }
    total
}

/// A coupling of two uniform marginals on an `n x n` grid: a random mixture
/// of permutation matrices.
fn random_coupling(n: usize, terms: usize, rng: &mut dyn RngCore) -> Grid2D {
    let perms = random_distinct(n, terms, rng).unwrap();
    let w = dirichlet(&vec![0.5; terms], rng).unwrap();
    let mut mass = vec![0.0; n * n];
    for (p, wi) in perms.iter().zip(&w) {
        for r in 0..n {
            mass[r * n + p.apply(r)] += wi / n as f64;
        }
    }
    Grid2D::new(n, n, mass).unwrap()
}

#[test]
fn closed_form_matches_quadrature() {
    let mut rng = stream(40, 0);
    for _ in 0..100 {
        let k = rng.random_range(1..=7);
        let m = rng.random_range(1..=5);
        let mix = random_mixture(k, m, &mut rng);
        let (a, b): (f64, f64) = (rng.random(), rng.random());
        assert!((mix.rectangle_prob(a, b) - quadrature(&mix, a, b)).abs() < 1e-12);
    }
}

#[test]
fn integer_grid_reduces_to_counting() {
    let mut rng = stream(41, 0);
    for _ in 0..50 {
        let k = rng.random_range(1..=6);
        let mix = random_mixture(k, 4, &mut rng);
        for ka in 0..=k {
            for kb in 0..=k {
                let r = |i: usize| BigRational::new(BigInt::from(i), BigInt::from(k));
                assert_eq!(mix.lower_left_rational(&r(ka), &r(kb)), mix.lower_left_on_grid(ka, kb));
            }
        }
    }
}

#[test]
fn uniform_marginals_hold_exactly() {
    let mut rng = stream(42, 0);
    for _ in 0..50 {
        let mix = random_mixture(rng.random_range(1..=6), 3, &mut rng);
        let (a, b): (f64, f64) = (rng.random(), rng.random());
        assert_eq!(mix.lower_left_exact(a, 1.0), BigRational::from_float(a).unwrap());
        assert_eq!(mix.lower_left_exact(1.0, b), BigRational::from_float(b).unwrap());
        assert_eq!(mix.rectangle_prob(a, 1.0), a);
    }
}

#[test]
fn dirichlet_weight_mean() {
    let prior = CheckerboardPrior::fixed(2, all_permutations(2).unwrap(), vec![1.0, 1.0]).unwrap();
    let mut rng = stream(43, 0);
    let u: Vec<f64> = (0..100_000).map(|_| prior.sample_mixture(&mut rng).unwrap().weights()[0]).collect();
    let e = Estimate::from_samples(&u);
    assert!(e.covers(0.5, 3.0), "{e:?}");
    // Beta(1,1) has variance 1/12
    let var = u.iter().map(|x| (x - e.mean).powi(2)).sum::<f64>() / (u.len() - 1) as f64;
    assert!((var - 1.0 / 12.0).abs() < 0.003);
}

#[test]
fn random_resolution_mixtures_are_doubly_stochastic() {
    let prior = CheckerboardPrior::new(
        Resolution::TruncatedGeometric { p: 0.3, k_max: 6 },
        PermSource::RandomSubset { count: 4 },
        AlphaSpec::Symmetric(0.7),
    )
    .unwrap();
    let mut rng = stream(44, 0);
    for _ in 0..200 {
        let d = prior.sample_mixture(&mut rng).unwrap().to_matrix();
        let k = d.k();
        for j in 0..k {
            let row: f64 = (0..k).map(|h| d.at(j, h)).sum::<f64>() / k as f64;
            let col: f64 = (0..k).map(|h| d.at(h, j)).sum::<f64>() / k as f64;
            assert!((row - 1.0).abs() < 1e-12 && (col - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn projection_matches_block_masses_and_bound() {
    let mut rng = stream(45, 0);
    for _ in 0..3 {
        let p = random_coupling(16, 6, &mut rng);
        let mut prev = f64::INFINITY;
        for k in [2, 4, 8, 16] {
            let g = project_coupling(&p, k).unwrap();
            let pg = g.to_grid(16).unwrap();
            for j in 0..k {
                for h in 0..k {
                    let cell = Rect::new(j as f64 / k as f64, (j + 1) as f64 / k as f64, h as f64 / k as f64, (h + 1) as f64 / k as f64).unwrap();
                    assert!((p.rect_mass(&cell) - g.rect_prob(&cell)).abs() < 1e-13);
                }
            }
            let d = bl_distance(&p, &pg, 1.0).unwrap();
            assert!(d <= approximation_bound(k), "k = {k}: {d}");
            assert!(d <= prev + 1e-12, "k = {k}: {d} > {prev}");
            prev = d;
        }
        assert!(prev < 1e-12);
    }
}

#[test]
fn comonotone_at_four() {
    let p = Grid2D::comonotone(32);
    let g = project_coupling(&p, 4).unwrap();
    assert!((0..4).all(|j| (g.at(j, j) - 4.0).abs() < 1e-12));
    let d = bl_distance(&p, &g.to_grid(32).unwrap(), 1.0).unwrap();
    assert!(d <= 0.7072 && d > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matrix_form_preserves_rectangles(seed in 0u64..10_000, k in 1usize..7, m in 1usize..6,
                                        x in (0.0f64..1.0, 0.0f64..1.0), y in (0.0f64..1.0, 0.0f64..1.0)) {
        let mix = random_mixture(k, m, &mut stream(seed, 1));
        let rect = Rect::new(x.0.min(x.1), x.0.max(x.1), y.0.min(y.1), y.0.max(y.1)).unwrap();
        let d = exact_density_matrix(&mix);
        prop_assert_eq!(mix.rect_prob_exact(&rect), matrix_rect_prob_exact(k, &d, &rect));
        let float = mix.to_matrix().rect_prob(&rect);
        prop_assert!((float - mix.rect_prob_exact(&rect).to_f64().unwrap()).abs() < 1e-14);
    }

    #[test]
    fn single_permutation_has_uniform_marginals(seed in 0u64..10_000, k in 1usize..9, a in 0.0f64..1.0) {
        let sigma = Permutation::random(k, &mut stream(seed, 2));
        let mix = CheckerboardMixture::new(k, vec![sigma], vec![1.0]).unwrap();
        prop_assert_eq!(mix.lower_left_exact(a, 1.0), BigRational::from_float(a).unwrap());
        prop_assert_eq!(mix.lower_left_exact(1.0, a), BigRational::from_float(a).unwrap());
    }
}
