//! Exact 1-Wasserstein distance between finitely supported measures.
//!
//! The transportation LP is solved with the primal transportation simplex
//! (MODI potentials over a spanning-tree basis). Problems here are small, so
//! the basis tree is rebuilt on every pivot instead of being updated in place.

use std::collections::VecDeque;

use crate::measure::{Coupling, FiniteMeasure, MeasureError};
use crate::metric::FiniteMetricSpace;

/// After this many consecutive degenerate pivots the entering rule switches
/// from Dantzig (most negative) to Bland (first negative).
const DEGENERATE_RUN: usize = 32;

/// Exact `d_W(μ, ν)` and one optimal coupling (rows: `supp μ`, columns: `supp ν`).
///
/// The result is exactly symmetric: the problem is always solved in a
/// canonical orientation and the plan transposed back if needed.
pub fn wasserstein(
    space: &FiniteMetricSpace,
    mu: &FiniteMeasure,
    nu: &FiniteMeasure,
) -> Result<(f64, Coupling), MeasureError> {
    mu.check_in(space)?;
    nu.check_in(space)?;
    if canonical_order(mu, nu) {
        Ok(solve(space, mu, nu))
    } else {
        let (cost, plan) = solve(space, nu, mu);
        Ok((cost, plan.transpose()))
    }
}

fn canonical_order(mu: &FiniteMeasure, nu: &FiniteMeasure) -> bool {
    match mu.support().cmp(nu.support()) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => {
            for (a, b) in mu.weights().iter().zip(nu.weights()) {
                if a != b {
                    return a < b;
                }
            }
            true
        }
    }
}

fn solve(space: &FiniteMetricSpace, mu: &FiniteMeasure, nu: &FiniteMeasure) -> (f64, Coupling) {
    let rows = mu.support().to_vec();
    let cols = nu.support().to_vec();
    let cost: Vec<f64> = rows.iter().flat_map(|&x| cols.iter().map(move |&y| space.dist(x, y))).collect();
    let flow = transportation_simplex(mu.weights(), nu.weights(), &cost);
    let plan = Coupling::from_dense(rows, cols, flow);
    let value = plan.cost(space);
    (value, plan)
}

/// Solves `min Σ c_ij x_ij` subject to row sums `supply`, column sums
/// `demand`, `x ≥ 0`. `cost` is row-major `m × n`. Returns the dense plan.
///
/// Supplies and demands must have (nearly) equal totals.
pub fn transportation_simplex(supply: &[f64], demand: &[f64], cost: &[f64]) -> Vec<f64> {
    let (m, n) = (supply.len(), demand.len());
    assert_eq!(cost.len(), m * n, "cost matrix shape");
    let mut flow = vec![0.0; m * n];
    if m == 0 || n == 0 {
        return flow;
    }
    let scale = cost.iter().fold(1.0f64, |a, &c| a.max(c.abs()));
    let eps = 1e-12 * scale;

    let mut basis = north_west_corner(supply, demand, &mut flow, n);
    let mut in_basis = vec![false; m * n];
    for &k in &basis {
        in_basis[k] = true;
    }

    let mut u = vec![0.0; m];
    let mut v = vec![0.0; n];
    let mut degenerate_run = 0usize;
    let max_iter = 50 * m * n + 1000;

    for _ in 0..max_iter {
        let adj = adjacency(&basis, m, n);
        potentials(&adj, cost, m, n, &mut u, &mut v);

        // entering cell
        let bland = degenerate_run >= DEGENERATE_RUN;
        let mut entering = None;
        let mut best = -eps;
        for i in 0..m {
            for j in 0..n {
                let k = i * n + j;
                if in_basis[k] {
                    continue;
                }
                let rc = cost[k] - u[i] - v[j];
                if rc < best {
                    entering = Some(k);
                    best = rc;
                    if bland {
                        break;
                    }
                }
            }
            if bland && entering.is_some() {
                break;
            }
        }
        let Some(enter) = entering else { break };
        let (ei, ej) = (enter / n, enter % n);

        // cycle: entering cell plus the tree path from column ej back to row ei
        let path = tree_path(&adj, m + ej, ei, m, n);
        // cells alternate -, +, -, ... starting next to column ej
        let mut theta = f64::INFINITY;
        let mut leave = usize::MAX;
        for (pos, &k) in path.iter().enumerate() {
            if pos % 2 == 0 && (flow[k] < theta || (flow[k] == theta && k < leave)) {
                theta = flow[k];
                leave = k;
            }
        }
        for (pos, &k) in path.iter().enumerate() {
            if pos % 2 == 0 {
                flow[k] = (flow[k] - theta).max(0.0);
            } else {
                flow[k] += theta;
            }
        }
        flow[enter] = theta;
        flow[leave] = 0.0;
        in_basis[leave] = false;
        in_basis[enter] = true;
        let slot = basis.iter().position(|&k| k == leave).expect("leaving cell is basic");
        basis[slot] = enter;

        degenerate_run = if theta == 0.0 { degenerate_run + 1 } else { 0 };
    }
    flow
}

/// Initial basic feasible solution: a staircase of exactly `m + n - 1` cells.
fn north_west_corner(supply: &[f64], demand: &[f64], flow: &mut [f64], n: usize) -> Vec<usize> {
    let m = supply.len();
    let mut s = supply.to_vec();
    let mut d = demand.to_vec();
    let (mut i, mut j) = (0, 0);
    let mut basis = Vec::with_capacity(m + n - 1);
    loop {
        let x = s[i].min(d[j]);
        flow[i * n + j] = x;
        basis.push(i * n + j);
        s[i] -= x;
        d[j] -= x;
        if i == m - 1 && j == n - 1 {
            break;
        }
        if j == n - 1 || (i < m - 1 && s[i] <= d[j]) {
            i += 1;
        } else {
            j += 1;
        }
    }
    // leftover rounding lands on the final cell
    let residual = s[m - 1].max(0.0).min(d[n - 1].max(0.0));
    flow[(m - 1) * n + n - 1] += residual;
    basis
}

/// Adjacency of the basis tree; nodes are rows `0..m` then columns `m..m+n`,
/// each edge labelled with its cell index.
fn adjacency(basis: &[usize], m: usize, n: usize) -> Vec<Vec<(usize, usize)>> {
    let mut adj = vec![Vec::new(); m + n];
    for &k in basis {
        let (i, j) = (k / n, k % n);
        adj[i].push((m + j, k));
        adj[m + j].push((i, k));
    }
    adj
}

fn potentials(adj: &[Vec<(usize, usize)>], cost: &[f64], m: usize, n: usize, u: &mut [f64], v: &mut [f64]) {
    let mut seen = vec![false; m + n];
    let mut queue = VecDeque::new();
    u[0] = 0.0;
    seen[0] = true;
    queue.push_back(0);
    while let Some(a) = queue.pop_front() {
        for &(b, k) in &adj[a] {
            if seen[b] {
                continue;
            }
            seen[b] = true;
            if a < m {
                v[b - m] = cost[k] - u[a];
            } else {
                u[b] = cost[k] - v[a - m];
            }
            queue.push_back(b);
        }
    }
}

/// Cells on the unique tree path from `from` to `to`, in order from `from`.
fn tree_path(adj: &[Vec<(usize, usize)>], from: usize, to: usize, m: usize, n: usize) -> Vec<usize> {
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; m + n];
    let mut seen = vec![false; m + n];
    let mut queue = VecDeque::new();
    seen[from] = true;
    queue.push_back(from);
    while let Some(a) = queue.pop_front() {
        if a == to {
            break;
        }
        for &(b, k) in &adj[a] {
            if !seen[b] {
                seen[b] = true;
                parent[b] = Some((a, k));
                queue.push_back(b);
            }
        }
    }
    let mut cells = Vec::new();
    let mut node = to;
    while node != from {
        let (p, k) = parent[node].expect("basis is a spanning tree");
        cells.push(k);
        node = p;
    }
    cells.reverse();
    cells
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::FiniteMeasure;

    fn line(xs: &[f64]) -> FiniteMetricSpace {
        FiniteMetricSpace::from_points(&xs.iter().map(|&x| vec![x]).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn dirac_pairs_are_isometric() {
        let s = line(&[0.0, 1.5, 4.0]);
        for x in 0..3 {
            for y in 0..3 {
                let (d, _) = wasserstein(&s, &FiniteMeasure::dirac(x), &FiniteMeasure::dirac(y)).unwrap();
                assert_eq!(d, s.dist(x, y));
            }
        }
    }

    #[test]
    fn split_mass_to_midpoint() {
        let s = line(&[0.0, 1.0, 2.0]);
        let mu = FiniteMeasure::new(vec![0, 2], vec![0.5, 0.5]).unwrap();
        let (d, plan) = wasserstein(&s, &mu, &FiniteMeasure::dirac(1)).unwrap();
        assert_eq!(d, 1.0);
        assert!(plan.is_feasible(&mu, &FiniteMeasure::dirac(1)));
    }

    #[test]
    fn identical_measures_cost_nothing() {
        let s = line(&[0.0, 1.0, 3.0, 7.0]);
        let mu = FiniteMeasure::new(vec![0, 1, 3], vec![0.2, 0.3, 0.5]).unwrap();
        let (d, plan) = wasserstein(&s, &mu, &mu).unwrap();
        assert_eq!(d, 0.0);
        assert_eq!(plan.off_diagonal_mass(), 0.0);
    }

    #[test]
    fn degenerate_problem_reaches_optimum() {
        // equal supplies and demands make every NW-corner step degenerate
        let s = line(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        let mu = FiniteMeasure::uniform(&[0, 1, 2]).unwrap();
        let nu = FiniteMeasure::uniform(&[3, 4, 5]).unwrap();
        let (d, plan) = wasserstein(&s, &mu, &nu).unwrap();
        assert!((d - 3.0).abs() < 1e-12);
        assert!(plan.is_feasible(&mu, &nu));
    }

    #[test]
    fn rejects_points_outside_space() {
        let s = line(&[0.0, 1.0]);
        assert!(wasserstein(&s, &FiniteMeasure::dirac(0), &FiniteMeasure::dirac(5)).is_err());
    }
}
