//! Primal network simplex for the balanced transportation problem.
//!
//! The basis is a spanning tree of `m + n - 1` arcs of the complete bipartite
//! graph. Entering arcs are chosen by block pricing; the tree, its parent
//! pointers and the node potentials are rebuilt after every pivot, which is
//! linear in the number of nodes and cheap next to pricing.

use crate::error::{Error, Result};

const PRICE_TOL: f64 = 1e-12;
pub const GAP_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct TransportSolution {
    /// Optimal primal cost.
    pub cost: f64,
    /// Dual objective at the final potentials.
    pub dual: f64,
    /// Source potentials.
    pub u: Vec<f64>,
    /// Sink potentials.
    pub v: Vec<f64>,
    /// Basic arcs `(source, sink, flow)`.
    pub flows: Vec<(usize, usize, f64)>,
    pub pivots: usize,
}

struct Tree {
    parent: Vec<usize>,
    parent_arc: Vec<usize>,
    depth: Vec<usize>,
}

const NONE: usize = usize::MAX;

/// Solves `min sum c_ij x_ij` over `x >= 0` with row sums `supply` and column sums `demand`.
///
/// `cost` is row-major, `cost[i * n + j]`. Supplies and demands must have equal totals
/// up to rounding; demands are rescaled to match.
pub fn solve(supply: &[f64], demand: &[f64], cost: &[f64]) -> Result<TransportSolution> {
    let (m, n) = (supply.len(), demand.len());
    if m == 0 || n == 0 || cost.len() != m * n {
        return Err(Error::Solver(format!("bad dimensions {m}x{n} with {} costs", cost.len())));
    }
    if supply.iter().chain(demand).any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::Solver("negative or non-finite marginal".into()));
    }
    let total_s: f64 = supply.iter().sum();
    let total_d: f64 = demand.iter().sum();
    if (total_s - total_d).abs() > 1e-9 * total_s.max(1.0) {
        return Err(Error::Solver(format!("unbalanced problem: {total_s} vs {total_d}")));
    }
    let demand: Vec<f64> = demand.iter().map(|d| d * total_s / total_d).collect();

    // Northwest-corner basis: m + n - 1 arcs forming a staircase tree.
    let mut arcs: Vec<(usize, usize)> = Vec::with_capacity(m + n - 1);
    let mut flow: Vec<f64> = Vec::with_capacity(m + n - 1);
    {
        let (mut a, mut b) = (supply.to_vec(), demand.clone());
        let (mut i, mut j) = (0, 0);
        while arcs.len() < m + n - 1 {
            let q = a[i].min(b[j]);
            arcs.push((i, j));
            flow.push(q);
            a[i] -= q;
            b[j] -= q;
            if i == m - 1 {
                j += 1;
            } else if j == n - 1 || a[i] <= b[j] {
                i += 1;
            } else {
                j += 1;
            }
        }
    }

    let nodes = m + n;
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    let mut tree = Tree {
        parent: vec![NONE; nodes],
        parent_arc: vec![NONE; nodes],
        depth: vec![0; nodes],
    };
    let mut u = vec![0.0; m];
    let mut v = vec![0.0; n];
    let mut queue = Vec::with_capacity(nodes);

    let total_arcs = m * n;
    let block = ((total_arcs as f64).sqrt().ceil() as usize).max(16).min(total_arcs);
    let mut next = 0usize;
    let max_pivots = 200 * nodes + 10_000;
    let mut pivots = 0;

    let mut path_j: Vec<usize> = Vec::new();
    let mut path_i: Vec<usize> = Vec::new();

    loop {
        rebuild(&arcs, m, &mut adjacency, &mut tree, &mut queue, &mut u, &mut v, cost, n)?;

        // Block pricing.
        let mut entering = None;
        let mut best = -PRICE_TOL;
        let mut scanned = 0;
        while scanned < total_arcs {
            let end = (scanned + block).min(total_arcs);
            for _ in scanned..end {
                let idx = next;
                next += 1;
                if next == total_arcs {
                    next = 0;
                }
                let (i, j) = (idx / n, idx % n);
                let r = cost[idx] - u[i] - v[j];
                if r < best {
                    best = r;
                    entering = Some((i, j));
                }
            }
            scanned = end;
            if entering.is_some() {
                break;
            }
        }
        let Some((ei, ej)) = entering else { break };

        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::Solver(format!("no convergence after {max_pivots} pivots")));
        }

        // Cycle: up from sink ej and source ei to their common ancestor.
        let (src, snk) = (ei, m + ej);
        path_j.clear();
        path_i.clear();
        let (mut a, mut b) = (snk, src);
        while tree.depth[a] > tree.depth[b] {
            path_j.push(a);
            a = tree.parent[a];
        }
        while tree.depth[b] > tree.depth[a] {
            path_i.push(b);
            b = tree.parent[b];
        }
        while a != b {
            path_j.push(a);
            a = tree.parent[a];
            path_i.push(b);
            b = tree.parent[b];
        }

        // Arcs losing flow: stepping up from a sink on the j-side, from a source on the i-side.
        let mut theta = f64::INFINITY;
        let mut leaving = NONE;
        for &node in &path_j {
            if node >= m {
                let k = tree.parent_arc[node];
                if flow[k] < theta {
                    theta = flow[k];
                    leaving = k;
                }
            }
        }
        for &node in &path_i {
            if node < m {
                let k = tree.parent_arc[node];
                if flow[k] < theta {
                    theta = flow[k];
                    leaving = k;
                }
            }
        }
        debug_assert!(leaving != NONE);
        for &node in &path_j {
            let k = tree.parent_arc[node];
            if node >= m {
                flow[k] = (flow[k] - theta).max(0.0);
            } else {
                flow[k] += theta;
            }
        }
        for &node in &path_i {
            let k = tree.parent_arc[node];
            if node < m {
                flow[k] = (flow[k] - theta).max(0.0);
            } else {
                flow[k] += theta;
            }
        }
        arcs[leaving] = (ei, ej);
        flow[leaving] = theta;
    }

    let primal: f64 = arcs.iter().zip(&flow).map(|(&(i, j), f)| f * cost[i * n + j]).sum();
    let dual: f64 =
        supply.iter().zip(&u).map(|(a, x)| a * x).sum::<f64>() + demand.iter().zip(&v).map(|(b, y)| b * y).sum::<f64>();
    if (primal - dual).abs() > GAP_TOL {
        return Err(Error::Solver(format!("duality gap {} exceeds {GAP_TOL}", (primal - dual).abs())));
    }
    let flows = arcs.iter().zip(&flow).map(|(&(i, j), &f)| (i, j, f)).collect();
    Ok(TransportSolution { cost: primal, dual, u, v, flows, pivots })
}

#[allow(clippy::too_many_arguments)]
fn rebuild(
    arcs: &[(usize, usize)],
    m: usize,
    adjacency: &mut [Vec<usize>],
    tree: &mut Tree,
    queue: &mut Vec<usize>,
    u: &mut [f64],
    v: &mut [f64],
    cost: &[f64],
    n: usize,
) -> Result<()> {
    for list in adjacency.iter_mut() {
        list.clear();
    }
    for (k, &(i, j)) in arcs.iter().enumerate() {
        adjacency[i].push(k);
        adjacency[m + j].push(k);
    }
    tree.parent.fill(NONE);
    queue.clear();
    queue.push(0);
    tree.parent[0] = 0;
    tree.depth[0] = 0;
    u[0] = 0.0;
    let mut head = 0;
    while head < queue.len() {
        let node = queue[head];
        head += 1;
        for &k in &adjacency[node] {
            let (i, j) = arcs[k];
            let other = if node < m { m + j } else { i };
            if tree.parent[other] != NONE {
                continue;
            }
            tree.parent[other] = node;
            tree.parent_arc[other] = k;
            tree.depth[other] = tree.depth[node] + 1;
            let c = cost[i * n + j];
            if other >= m {
                v[j] = c - u[i];
            } else {
                u[i] = c - v[j];
            }
            queue.push(other);
        }
    }
    if queue.len() != adjacency.len() {
        return Err(Error::Solver("basis is not a spanning tree".into()));
    }
    Ok(())
}
