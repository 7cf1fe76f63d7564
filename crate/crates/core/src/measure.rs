//! Finitely supported probability measures, couplings and the barycentric
//! ℓ¹ distance.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{FiniteMetricSpace, PointSet};

/// Sums within this distance of 1 are accepted as-is.
pub const WEIGHT_TOL: f64 = 1e-12;
/// Sums within this distance of 1 are renormalized; anything further is rejected.
pub const RENORMALIZE_TOL: f64 = 1e-9;
/// Marginal tolerance for couplings.
pub const COUPLING_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("support has {support} points but {weights} weights were given")]
    LengthMismatch { support: usize, weights: usize },
    #[error("measure has empty support")]
    EmptySupport,
    #[error("support point {0} is repeated")]
    DuplicateSupport(usize),
    #[error("weight {weight} at point {point} is negative or not finite")]
    BadWeight { point: usize, weight: f64 },
    #[error("weights sum to {0}, which is not 1")]
    NotNormalized(f64),
    #[error("support point {0} is outside a space of {1} points")]
    OutOfSpace(usize, usize),
    #[error("interpolation parameter {0} is outside [0, 1]")]
    BadParameter(f64),
}

/// A probability measure `Σ aᵢ δ_{xᵢ}` with finitely many atoms.
///
/// The representation is canonical: support sorted ascending, every weight
/// strictly positive. Two measures are equal iff they have the same atoms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteMeasure {
    support: Vec<usize>,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct RawMeasure {
    support: Vec<usize>,
    weights: Vec<f64>,
}

impl<'de> Deserialize<'de> for FiniteMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let raw = RawMeasure::deserialize(de)?;
        FiniteMeasure::new(raw.support, raw.weights).map_err(serde::de::Error::custom)
    }
}

impl FiniteMeasure {
    pub fn new(support: Vec<usize>, weights: Vec<f64>) -> Result<Self, MeasureError> {
        if support.len() != weights.len() {
            return Err(MeasureError::LengthMismatch { support: support.len(), weights: weights.len() });
        }
        let mut atoms: Vec<(usize, f64)> = support.into_iter().zip(weights).collect();
        atoms.sort_by_key(|a| a.0);
        for w in atoms.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(MeasureError::DuplicateSupport(w[0].0));
            }
        }
        for &(point, weight) in &atoms {
            if !(weight >= 0.0) || !weight.is_finite() {
                return Err(MeasureError::BadWeight { point, weight });
            }
        }
        atoms.retain(|a| a.1 > 0.0);
        if atoms.is_empty() {
            return Err(MeasureError::EmptySupport);
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        let gap = (total - 1.0).abs();
        if gap > RENORMALIZE_TOL {
            return Err(MeasureError::NotNormalized(total));
        }
        if gap > WEIGHT_TOL {
            for a in &mut atoms {
                a.1 /= total;
            }
        }
        let (support, weights) = atoms.into_iter().unzip();
        Ok(Self { support, weights })
    }

    /// Checks that every atom lies in `space`.
    pub fn new_in(space: &FiniteMetricSpace, support: Vec<usize>, weights: Vec<f64>) -> Result<Self, MeasureError> {
        let m = Self::new(support, weights)?;
        m.check_in(space)?;
        Ok(m)
    }

    /// Builds from atoms already known to be sorted with positive weights
    /// summing to one up to rounding.
    pub(crate) fn from_atoms_unchecked(support: Vec<usize>, weights: Vec<f64>) -> Self {
        debug_assert!(support.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(weights.iter().all(|&w| w > 0.0));
        Self { support, weights }
    }

    pub fn dirac(x: usize) -> Self {
        Self { support: vec![x], weights: vec![1.0] }
    }

    /// Uniform measure on the given distinct points.
    pub fn uniform(points: &[usize]) -> Result<Self, MeasureError> {
        let w = 1.0 / points.len() as f64;
        Self::new(points.to_vec(), vec![w; points.len()])
    }

    pub fn check_in(&self, space: &FiniteMetricSpace) -> Result<(), MeasureError> {
        match self.support.iter().find(|&&x| x >= space.len()) {
            Some(&x) => Err(MeasureError::OutOfSpace(x, space.len())),
            None => Ok(()),
        }
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn support_set(&self) -> PointSet {
        PointSet::from_sorted_unchecked(self.support.clone())
    }

    pub fn atoms(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.support.iter().copied().zip(self.weights.iter().copied())
    }

    /// Barycentric coordinate: the weight of `x`, zero off the support.
    pub fn psi(&self, x: usize) -> f64 {
        match self.support.binary_search(&x) {
            Ok(i) => self.weights[i],
            Err(_) => 0.0,
        }
    }

    /// `μ(U)`.
    pub fn mass(&self, u: &PointSet) -> f64 {
        self.atoms().filter(|(x, _)| u.contains(*x)).map(|(_, w)| w).sum()
    }

    /// Total weight (1 up to rounding).
    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Pointwise `(1 - t)·μ + t·ν` on the union of supports; atoms with zero
/// combined weight are dropped.
pub fn convex_combine(mu: &FiniteMeasure, nu: &FiniteMeasure, t: f64) -> Result<FiniteMeasure, MeasureError> {
    if !(0.0..=1.0).contains(&t) {
        return Err(MeasureError::BadParameter(t));
    }
    if t == 0.0 {
        return Ok(mu.clone());
    }
    if t == 1.0 {
        return Ok(nu.clone());
    }
    let mut support = Vec::with_capacity(mu.support.len() + nu.support.len());
    let mut weights = Vec::with_capacity(support.capacity());
    merge_atoms(mu, nu, |x, a, b| {
        let w = (1.0 - t) * a + t * b;
        if w > 0.0 {
            support.push(x);
            weights.push(w);
        }
    });
    Ok(FiniteMeasure::from_atoms_unchecked(support, weights))
}

/// Convex combination `Σ λᵢ μᵢ` of several measures. Weights must be
/// nonnegative and sum to one up to rounding.
pub fn convex_sum(terms: &[(f64, &FiniteMeasure)]) -> Result<FiniteMeasure, MeasureError> {
    let mut acc: std::collections::BTreeMap<usize, f64> = std::collections::BTreeMap::new();
    for &(lambda, mu) in terms {
        if !(lambda >= 0.0) {
            return Err(MeasureError::BadParameter(lambda));
        }
        if lambda == 0.0 {
            continue;
        }
        for (x, w) in mu.atoms() {
            *acc.entry(x).or_insert(0.0) += lambda * w;
        }
    }
    let (support, weights): (Vec<usize>, Vec<f64>) = acc.into_iter().filter(|a| a.1 > 0.0).unzip();
    FiniteMeasure::new(support, weights)
}

/// Walks the union of two supports in ascending order.
pub(crate) fn merge_atoms(mu: &FiniteMeasure, nu: &FiniteMeasure, mut f: impl FnMut(usize, f64, f64)) {
    let (mut i, mut j) = (0, 0);
    let (a, b) = (&mu.support, &nu.support);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i] < b[j]) {
            f(a[i], mu.weights[i], 0.0);
            i += 1;
        } else if i == a.len() || b[j] < a[i] {
            f(b[j], 0.0, nu.weights[j]);
            j += 1;
        } else {
            f(a[i], mu.weights[i], nu.weights[j]);
            i += 1;
            j += 1;
        }
    }
}

/// `d_m(μ, ν) = Σ_x |ψ_x(μ) − ψ_x(ν)|`, a value in `[0, 2]`.
pub fn barycentric_distance(mu: &FiniteMeasure, nu: &FiniteMeasure) -> f64 {
    let mut d = 0.0;
    merge_atoms(mu, nu, |_, a, b| d += (a - b).abs());
    d
}

/// A transport plan between two measures.
///
/// Rows are indexed by the support of the source measure and columns by the
/// support of the target, both in ascending order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coupling {
    rows: Vec<usize>,
    cols: Vec<usize>,
    mass: Vec<f64>,
}

impl Coupling {
    pub(crate) fn from_dense(rows: Vec<usize>, cols: Vec<usize>, mass: Vec<f64>) -> Self {
        debug_assert_eq!(rows.len() * cols.len(), mass.len());
        Self { rows, cols, mass }
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn cols(&self) -> &[usize] {
        &self.cols
    }

    /// Mass moved from the `i`-th source atom to the `j`-th target atom.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.mass[i * self.cols.len() + j]
    }

    /// Nonzero entries as `(source point, target point, mass)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let nc = self.cols.len();
        self.mass
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0.0)
            .map(move |(k, &m)| (self.rows[k / nc], self.cols[k % nc], m))
    }

    /// `Σ γᵢⱼ d(xᵢ, yⱼ)`.
    pub fn cost(&self, space: &FiniteMetricSpace) -> f64 {
        self.entries().map(|(x, y, m)| m * space.dist(x, y)).sum()
    }

    /// Mass not kept in place.
    pub fn off_diagonal_mass(&self) -> f64 {
        self.entries().filter(|(x, y, _)| x != y).map(|e| e.2).sum()
    }

    /// Largest marginal error against `mu` (rows) and `nu` (columns).
    pub fn marginal_error(&self, mu: &FiniteMeasure, nu: &FiniteMeasure) -> f64 {
        let nc = self.cols.len();
        let mut err = 0.0f64;
        for (i, &x) in self.rows.iter().enumerate() {
            let s: f64 = self.mass[i * nc..(i + 1) * nc].iter().sum();
            err = err.max((s - mu.psi(x)).abs());
        }
        for (j, &y) in self.cols.iter().enumerate() {
            let s: f64 = (0..self.rows.len()).map(|i| self.mass[i * nc + j]).sum();
            err = err.max((s - nu.psi(y)).abs());
        }
        // atoms of mu / nu that are missing from the plan
        for (x, w) in mu.atoms() {
            if !self.rows.contains(&x) {
                err = err.max(w);
            }
        }
        for (y, w) in nu.atoms() {
            if !self.cols.contains(&y) {
                err = err.max(w);
            }
        }
        err
    }

    pub fn is_feasible(&self, mu: &FiniteMeasure, nu: &FiniteMeasure) -> bool {
        self.mass.iter().all(|&m| m >= 0.0) && self.marginal_error(mu, nu) <= COUPLING_TOL
    }

    pub fn transpose(&self) -> Coupling {
        let (nr, nc) = (self.rows.len(), self.cols.len());
        let mut mass = vec![0.0; nr * nc];
        for i in 0..nr {
            for j in 0..nc {
                mass[j * nr + i] = self.mass[i * nc + j];
            }
        }
        Coupling { rows: self.cols.clone(), cols: self.rows.clone(), mass }
    }
}

/// A coupling that keeps `min(μ(x), ν(x))` in place at every `x` and moves
/// the remaining `d_m(μ, ν)/2` of mass greedily (north-west corner over the
/// leftover excesses and deficits).
pub fn common_mass_coupling(mu: &FiniteMeasure, nu: &FiniteMeasure) -> Coupling {
    let rows = mu.support.clone();
    let cols = nu.support.clone();
    let nc = cols.len();
    let mut mass = vec![0.0; rows.len() * nc];

    let mut excess = Vec::new();
    let mut deficit = Vec::new();
    for (i, &x) in rows.iter().enumerate() {
        let a = mu.weights[i];
        match cols.binary_search(&x) {
            Ok(j) => {
                let keep = a.min(nu.weights[j]);
                mass[i * nc + j] = keep;
                if a > keep {
                    excess.push((i, a - keep));
                }
            }
            Err(_) => excess.push((i, a)),
        }
    }
    for (j, &y) in cols.iter().enumerate() {
        let b = nu.weights[j];
        let kept = rows.binary_search(&y).map(|i| mu.weights[i].min(b)).unwrap_or(0.0);
        if b > kept {
            deficit.push((j, b - kept));
        }
    }

    let (mut p, mut q) = (0, 0);
    while p < excess.len() && q < deficit.len() {
        let moved = excess[p].1.min(deficit[q].1);
        mass[excess[p].0 * nc + deficit[q].0] += moved;
        excess[p].1 -= moved;
        deficit[q].1 -= moved;
        if excess[p].1 <= deficit[q].1 {
            p += 1;
        } else {
            q += 1;
        }
    }
    Coupling { rows, cols, mass }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(support: &[usize], weights: &[f64]) -> FiniteMeasure {
        FiniteMeasure::new(support.to_vec(), weights.to_vec()).unwrap()
    }

    #[test]
    fn canonical_form_prunes_zero_and_sorts() {
        let a = m(&[3, 1, 2], &[0.5, 0.5, 0.0]);
        assert_eq!(a.support(), &[1, 3]);
        assert_eq!(a.weights(), &[0.5, 0.5]);
        assert_eq!(a.psi(2), 0.0);
    }

    #[test]
    fn rejects_malformed_measures() {
        assert_eq!(FiniteMeasure::new(vec![0, 0], vec![0.5, 0.5]), Err(MeasureError::DuplicateSupport(0)));
        assert!(matches!(FiniteMeasure::new(vec![0], vec![0.9]), Err(MeasureError::NotNormalized(_))));
        assert!(matches!(FiniteMeasure::new(vec![0, 1], vec![1.5, -0.5]), Err(MeasureError::BadWeight { .. })));
        assert_eq!(FiniteMeasure::new(vec![0], vec![0.0]), Err(MeasureError::EmptySupport));
    }

    #[test]
    fn renormalizes_small_drift() {
        let a = m(&[0, 1], &[0.5, 0.5 + 5e-10]);
        assert!((a.total() - 1.0).abs() <= WEIGHT_TOL);
    }

    #[test]
    fn combine_endpoints_and_midpoints() {
        let (a, b) = (FiniteMeasure::dirac(0), FiniteMeasure::dirac(1));
        assert_eq!(convex_combine(&a, &b, 0.0).unwrap(), a);
        assert_eq!(convex_combine(&a, &b, 1.0).unwrap(), b);
        assert_eq!(convex_combine(&a, &b, 0.25).unwrap(), m(&[0, 1], &[0.75, 0.25]));
        assert!(convex_combine(&a, &b, 1.5).is_err());
    }

    #[test]
    fn barycentric_distance_examples() {
        let a = m(&[0, 1], &[0.5, 0.5]);
        assert_eq!(barycentric_distance(&a, &a), 0.0);
        assert_eq!(barycentric_distance(&FiniteMeasure::dirac(0), &FiniteMeasure::dirac(1)), 2.0);
        assert_eq!(barycentric_distance(&a, &FiniteMeasure::dirac(0)), 1.0);
    }

    #[test]
    fn common_mass_coupling_examples() {
        let a = m(&[0, 1], &[0.5, 0.5]);
        let g = common_mass_coupling(&a, &a);
        assert_eq!(g.off_diagonal_mass(), 0.0);
        assert!(g.is_feasible(&a, &a));

        let (da, db) = (FiniteMeasure::dirac(0), FiniteMeasure::dirac(1));
        let g = common_mass_coupling(&da, &db);
        assert_eq!(g.entries().collect::<Vec<_>>(), vec![(0, 1, 1.0)]);

        let g = common_mass_coupling(&a, &da);
        assert_eq!(g.entries().collect::<Vec<_>>(), vec![(0, 0, 0.5), (1, 0, 0.5)]);
        assert_eq!(g.off_diagonal_mass(), barycentric_distance(&a, &da) / 2.0);
    }

    #[test]
    fn deserializes_and_validates_json() {
        let mu: FiniteMeasure = serde_json::from_str(r#"{"support":[2,0],"weights":[0.25,0.75]}"#).unwrap();
        assert_eq!(mu, m(&[0, 2], &[0.75, 0.25]));
        assert!(serde_json::from_str::<FiniteMeasure>(r#"{"support":[0],"weights":[0.5]}"#).is_err());
    }
}
