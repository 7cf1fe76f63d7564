//! Brute-force reference implementations.
//!
//! These are deliberately naive and share no code paths with the production
//! algorithms they check. They back the `verify` suite and the test targets.

use itertools::Itertools;

use crate::measure::FiniteMeasure;
use crate::metric::FiniteMetricSpace;

/// Minimum transport cost over every vertex of the transportation polytope.
///
/// Every basic feasible solution is supported on `m + n - 1` cells whose
/// restricted constraint system has a unique solution; all such subsets are
/// enumerated and solved by dense Gaussian elimination. Exponential: meant
/// for supports of size ≤ 4.
pub fn transport_vertex_min(space: &FiniteMetricSpace, mu: &FiniteMeasure, nu: &FiniteMeasure) -> f64 {
    let (a, b) = (mu.weights(), nu.weights());
    let (m, n) = (a.len(), b.len());
    let cells: Vec<(usize, usize)> = (0..m).cartesian_product(0..n).collect();
    let k = m + n - 1;
    let mut best = f64::INFINITY;
    for subset in cells.iter().combinations(k) {
        // rows: m supply equations then n demand equations
        let mut aug = vec![vec![0.0; k + 1]; m + n];
        for (c, &&(i, j)) in subset.iter().enumerate() {
            aug[i][c] = 1.0;
            aug[m + j][c] = 1.0;
        }
        for i in 0..m {
            aug[i][k] = a[i];
        }
        for j in 0..n {
            aug[m + j][k] = b[j];
        }
        let Some(x) = solve_unique(aug, k) else { continue };
        if x.iter().any(|&v| v < -1e-12) {
            continue;
        }
        let cost: f64 =
            subset.iter().zip(&x).map(|(&&(i, j), &v)| v.max(0.0) * space.dist(mu.support()[i], nu.support()[j])).sum();
        best = best.min(cost);
    }
    best
}

/// Solves an overdetermined consistent system with `k` unknowns; `None` when
/// the solution is not unique or the system is inconsistent.
fn solve_unique(mut aug: Vec<Vec<f64>>, k: usize) -> Option<Vec<f64>> {
    let rows = aug.len();
    let mut pivot_row = 0;
    for col in 0..k {
        let p = (pivot_row..rows).max_by(|&r, &s| aug[r][col].abs().total_cmp(&aug[s][col].abs()))?;
        if aug[p][col].abs() < 1e-12 {
            return None;
        }
        aug.swap(pivot_row, p);
        let piv = aug[pivot_row][col];
        for c in col..=k {
            aug[pivot_row][c] /= piv;
        }
        for r in 0..rows {
            if r != pivot_row && aug[r][col] != 0.0 {
                let f = aug[r][col];
                for c in col..=k {
                    aug[r][c] -= f * aug[pivot_row][c];
                }
            }
        }
        pivot_row += 1;
    }
    if aug[pivot_row..].iter().any(|r| r[k].abs() > 1e-9) {
        return None;
    }
    Some((0..k).map(|c| aug[c][k]).collect())
}

/// All subsets of at most `k_max + 1` points with diameter `< r`, with their
/// diameters, by scanning every subset.
pub fn vr_all_subsets(space: &FiniteMetricSpace, r: f64, k_max: usize) -> Vec<(Vec<usize>, f64)> {
    let mut out = Vec::new();
    for size in 1..=(k_max + 1).min(space.len()) {
        for s in (0..space.len()).combinations(size) {
            let mut d = 0.0f64;
            for (x, y) in s.iter().tuple_combinations() {
                d = d.max(space.dist(*x, *y));
            }
            if d < r {
                out.push((s, d));
            }
        }
    }
    out
}

/// All subsets of at most `k_max + 1` points with a witness `z` in the space
/// strictly within `r` of every member, with their min-max radii.
pub fn cech_all_subsets(space: &FiniteMetricSpace, r: f64, k_max: usize) -> Vec<(Vec<usize>, f64)> {
    let mut out = Vec::new();
    for size in 1..=(k_max + 1).min(space.len()) {
        for s in (0..space.len()).combinations(size) {
            let radius = (0..space.len())
                .map(|z| s.iter().map(|&x| space.dist(z, x)).fold(0.0, f64::max))
                .fold(f64::INFINITY, f64::min);
            if radius < r {
                out.push((s, radius));
            }
        }
    }
    out
}

/// Number of Freudenthal–Kuhn cells `σ(x, π)` at resolution `p` having the
/// lattice point `v` as a vertex, by enumerating every `(x, π)`.
pub fn fk_star_by_enumeration(n: usize, p: usize, v: &[usize]) -> usize {
    let mut count = 0;
    let bases = (0..n).map(|_| 0..p).multi_cartesian_product();
    for x in bases {
        for perm in (0..n).permutations(n) {
            let mut cur = x.clone();
            let mut hit = cur == v;
            for &axis in &perm {
                cur[axis] += 1;
                hit |= cur == v;
            }
            if hit {
                count += 1;
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertex_oracle_on_line() {
        let s = FiniteMetricSpace::from_points(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let mu = FiniteMeasure::new(vec![0, 2], vec![0.5, 0.5]).unwrap();
        assert_eq!(transport_vertex_min(&s, &mu, &FiniteMeasure::dirac(1)), 1.0);
    }

    #[test]
    fn star_enumeration_small_cases() {
        assert_eq!(fk_star_by_enumeration(2, 2, &[1, 1]), 6);
        assert_eq!(fk_star_by_enumeration(1, 2, &[1]), 2);
        assert_eq!(fk_star_by_enumeration(2, 2, &[0, 0]), 2);
    }
}
