use std::sync::Arc;

use frechet::checkerboard_prior::{AlphaSpec, CheckerboardPrior, PermSource, Resolution};
use frechet::gamma_mu::{
    composed_cdf_law, composed_cdf_posterior, posterior_fdd, product_prior_fdd, product_prior_predictive,
    random_copula_law, section_level, CheckerboardCopulaLaw, Comonotone, Copula, CopulaSampler, DPStickBreaking,
    FiniteCopulaLaw, FixedCopula, PosteriorBaseMeasure, Product, SectionPartition, SECTION_TOL,
};
use frechet::geometry::{IntervalSet, Observation};
use frechet::measures::Grid1D;
use frechet::rng::stream;
use frechet::stats::Estimate;
use proptest::prelude::*;
use rand::Rng;

fn skewed(n: usize) -> Grid1D {
    let raw: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * (i as f64 * 1.3).cos()).collect();
    let total: f64 = raw.iter().sum();
    Grid1D::new(raw.iter().map(|r| r / total).collect()).unwrap()
}

/// `E[X^r]` for `X ~ Beta(a, b)`.
fn beta_moment(a: f64, b: f64, r: i32) -> f64 {
    (0..r).map(|i| (a + i as f64) / (a + b + i as f64)).product()
}

#[test]
fn stick_breaking_marginal_is_beta() {
    let (c, nu, y) = (2.5, skewed(16), 0.4);
    let p = nu.cdf_at(y);
    let base = PosteriorBaseMeasure::prior(c, nu).unwrap();
    let g: Vec<f64> = (0..40_000).map(|i| DPStickBreaking::sample(&base, &mut stream(50, i)).cdf_at(y)).collect();
    for r in 1..=4 {
        let powers: Vec<f64> = g.iter().map(|v| v.powi(r)).collect();
        let e = Estimate::from_samples(&powers);
        assert!(e.covers(beta_moment(c * p, c * (1.0 - p), r), 3.0), "moment {r}: {e:?}");
    }
}

#[test]
fn product_partition_is_dirichlet() {
    let (c, nu, mu) = (3.0, skewed(8), Grid1D::uniform(4));
    let part = SectionPartition::product(4, &[0, 0, 1, 2, 2, 2, 1, 0], 3).unwrap();
    let draws = product_prior_fdd(c, &nu, &mu, &part, 20_000, 51).unwrap();
    let block = |l: usize| -> f64 {
        (0..8).filter(|j| [0, 0, 1, 2, 2, 2, 1, 0][*j] == l).map(|j| nu.weights()[j]).sum()
    };
    for l in 0..3 {
        let xs: Vec<f64> = draws.iter().map(|d| d[l]).collect();
        let e = Estimate::from_samples(&xs);
        assert!(e.covers(block(l), 3.0));
        let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let (a, rest) = (c * block(l), c * (1.0 - block(l)));
        assert!(Estimate::from_samples(&sq).covers(beta_moment(a, rest, 2), 3.0));
    }
}

#[test]
fn sectioned_partition_moments() {
    // A = first x-cell (mu(A) = 0.3), B = lower half: H = A x B, A x B^c, A^c x [0,1]
    let mu = Grid1D::from_masses(&[0.3, 0.7]).unwrap();
    let nu = skewed(4);
    let part = SectionPartition::from_fn(2, 4, 3, |i, j| if i == 1 { 2 } else if j < 2 { 0 } else { 1 }).unwrap();
    let draws = product_prior_fdd(1.5, &nu, &mu, &part, 20_000, 52).unwrap();
    let nu_b = nu.interval_mass(0.0, 0.5);
    let mean: Vec<f64> = (0..3).map(|l| Estimate::from_samples(&draws.iter().map(|d| d[l]).collect::<Vec<_>>()).mean).collect();
    let e0 = Estimate::from_samples(&draws.iter().map(|d| d[0]).collect::<Vec<_>>());
    assert!(e0.covers(0.3 * nu_b, 3.0), "{e0:?}");
    assert!(draws.iter().all(|d| (d[2] - 0.7).abs() < 1e-12), "{mean:?}");
    let base = PosteriorBaseMeasure::prior(1.5, nu).unwrap();
    let second = part.second_moments(&mu, &base).unwrap();
    for l in 0..3 {
        for r in 0..3 {
            let prod: Vec<f64> = draws.iter().map(|d| d[l] * d[r]).collect();
            let e = Estimate::from_samples(&prod);
            assert!(e.covers(second[l][r], 3.0) || (e.mean - second[l][r]).abs() < 1e-12, "({l},{r}) {e:?} vs {}", second[l][r]);
        }
    }
}

#[test]
fn posterior_product_partition_is_conjugate() {
    let (c, nu, mu) = (2.0, Grid1D::uniform(4), Grid1D::uniform(2));
    let part = SectionPartition::product(2, &[0, 1, 1, 0], 2).unwrap();
    let data: Vec<Observation> = [0.1, 0.3, 0.35, 0.6, 0.9].iter().map(|y| Observation::new(0.5, *y).unwrap()).collect();
    let draws = posterior_fdd(c, &nu, &mu, &part, &data, 20_000, 53).unwrap();
    // nu_n(B_0) = 2 * 0.5 + #{y in [0,0.25) or [0.75,1]} = 1 + 2
    let (a0, a1) = (3.0, 4.0);
    let xs: Vec<f64> = draws.iter().map(|d| d[0]).collect();
    assert!(Estimate::from_samples(&xs).covers(a0 / (a0 + a1), 3.0));
    let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
    assert!(Estimate::from_samples(&sq).covers(beta_moment(a0, a1, 2), 3.0));
}

#[test]
fn predictive_by_forward_simulation() {
    let (c, nu, mu) = (2.0, skewed(8), skewed(4));
    let a = IntervalSet::new(vec![(0.0, 0.3)]).unwrap();
    let b = IntervalSet::new(vec![(0.2, 0.6)]).unwrap();
    let pattern = [true, false, true];
    let base = PosteriorBaseMeasure::prior(c, nu.clone()).unwrap();
    let mut hits = Vec::new();
    let mut rep = 0u64;
    while hits.len() < 20_000 {
        let mut rng = stream(54, rep);
        rep += 1;
        let g = DPStickBreaking::sample(&base, &mut rng).cdf();
        let ys: Vec<f64> = (0..4).map(|_| g.quantile(rng.random()).unwrap()).collect();
        if ys[..3].iter().zip(pattern).any(|(y, p)| b.contains(*y) != p) {
            continue;
        }
        let x = mu.sample(&mut rng);
        hits.push(if a.contains(x) && b.contains(ys[3]) { 1.0 } else { 0.0 });
    }
    // any Y's with this indicator pattern give the same value
    let expect = product_prior_predictive(c, &nu, &mu, &[0.3, 0.9, 0.4], &a, &b).unwrap();
    let e = Estimate::from_samples(&hits);
    assert!(e.covers(expect, 3.0), "{e:?} vs {expect}");
}

#[test]
fn composed_law_matches_simulated_g() {
    let (c, nu, mu) = (3.0, skewed(8), Grid1D::uniform(8));
    let (x, y) = (0.6, 0.45);
    let u = mu.cdf_at(x);
    let copula: Arc<dyn Copula> = Arc::new(Comonotone);
    let base = PosteriorBaseMeasure::prior(c, nu.clone()).unwrap();
    let f: Vec<f64> = (0..20_000)
        .map(|i| copula.cdf(u, DPStickBreaking::sample(&base, &mut stream(55, i)).cdf_at(y)))
        .collect();
    for a in [0.1, 0.25, 0.4, 0.55] {
        let hits: Vec<f64> = f.iter().map(|v| if *v <= a { 1.0 } else { 0.0 }).collect();
        let law = composed_cdf_law(copula.as_ref(), &mu, c, &nu, x, y, a).unwrap();
        assert!(Estimate::from_samples(&hits).covers(law, 3.0), "a = {a}: {law}");
    }
}

#[test]
fn posterior_law_concentrates_when_all_ys_are_below() {
    let (c, nu, mu) = (1.0, Grid1D::uniform(8), Grid1D::uniform(8));
    let ys = vec![0.2; 400];
    let (x, y) = (0.5, 0.5);
    // F(x,y) -> F_mu(x) = 0.5
    let p = composed_cdf_posterior(&Product, &mu, c, &nu, &ys, x, y, 0.49).unwrap();
    assert!(p < 1e-3, "{p}");
    assert_eq!(composed_cdf_posterior(&Product, &mu, c, &nu, &[], x, y, 0.3).unwrap(),
               composed_cdf_law(&Product, &mu, c, &nu, x, y, 0.3).unwrap());
}

#[test]
fn copula_mixtures() {
    let (c, nu, mu) = (2.0, skewed(8), Grid1D::uniform(8));
    let (x, y, a) = (0.55, 0.4, 0.2);
    let fixed = random_copula_law(&FixedCopula(Arc::new(Product)), &mu, c, &nu, x, y, a, 1000, 1).unwrap();
    let direct = composed_cdf_law(&Product, &mu, c, &nu, x, y, a).unwrap();
    assert!((fixed.mean - direct).abs() < 1e-12);

    let law = FiniteCopulaLaw::new(vec![(Arc::new(Product), 0.5), (Arc::new(Comonotone), 0.5)]).unwrap();
    let est = random_copula_law(&law, &mu, c, &nu, x, y, a, 20_000, 2).unwrap();
    let mean = 0.5 * (direct + composed_cdf_law(&Comonotone, &mu, c, &nu, x, y, a).unwrap());
    assert!(est.covers(mean, 3.0), "{est:?} vs {mean}");
}

#[test]
fn random_checkerboard_copula_matches_joint_simulation() {
    let (c, nu, mu) = (2.0, skewed(8), Grid1D::uniform(8));
    let (x, y, a) = (0.55, 0.4, 0.25);
    let prior = CheckerboardPrior::new(Resolution::Fixed { k: 3 }, PermSource::All, AlphaSpec::Symmetric(1.0)).unwrap();
    let law = CheckerboardCopulaLaw(prior);
    let est = random_copula_law(&law, &mu, c, &nu, x, y, a, 20_000, 3).unwrap();
    let base = PosteriorBaseMeasure::prior(c, nu.clone()).unwrap();
    let u = mu.cdf_at(x);
    let joint: Vec<f64> = (0..20_000)
        .map(|i| {
            let mut rng = stream(56, i);
            let copula = law.sample(&mut rng).unwrap();
            let g = DPStickBreaking::sample(&base, &mut rng).cdf_at(y);
            if copula.cdf(u, g) <= a { 1.0 } else { 0.0 }
        })
        .collect();
    let j = Estimate::from_samples(&joint);
    let se = (est.se.powi(2) + j.se.powi(2)).sqrt();
    assert!((est.mean - j.mean).abs() <= 3.0 * se, "{est:?} vs {j:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn section_level_is_monotone_and_hits_the_level(u in 0.05f64..0.95, s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let (a1, a2) = (u * s.min(t), u * s.max(t));
        for copula in [&Product as &dyn Copula, &Comonotone] {
            let (r1, r2) = (section_level(copula, u, a1).unwrap(), section_level(copula, u, a2).unwrap());
            prop_assert!(r1 <= r2);
            prop_assert!((copula.cdf(u, r1) - a1).abs() <= SECTION_TOL);
        }
    }

    #[test]
    fn law_is_monotone_in_a(s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let (mu, nu) = (Grid1D::uniform(8), skewed(8));
        let u = mu.cdf_at(0.7);
        let l1 = composed_cdf_law(&Product, &mu, 2.0, &nu, 0.7, 0.3, u * s.min(t)).unwrap();
        let l2 = composed_cdf_law(&Product, &mu, 2.0, &nu, 0.7, 0.3, u * s.max(t)).unwrap();
        prop_assert!(l1 <= l2 + 1e-15);
    }
}
