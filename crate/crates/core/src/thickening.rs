//! Metric-thickening machinery: support and mass-concentration predicates,
//! Lipschitz bump functions, the pumping map and the comparison between the
//! barycentric and Wasserstein metrics.

use thiserror::Error;

use crate::measure::{barycentric_distance, convex_combine, FiniteMeasure, MeasureError};
use crate::metric::{distance_to_complement, FiniteMetricSpace, PointSet};
use crate::transport::wasserstein;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThickeningError {
    #[error("plateau set is not contained in the support set")]
    NotNested,
    #[error("plateau and complement of the support set are at distance zero")]
    DegenerateGap,
    #[error("bump function vanishes on the whole support of the measure")]
    ZeroMass,
    #[error("measure set does not have the mass concentration property for threshold {0}")]
    NoMcp(f64),
    #[error("bump function has {got} values, space has {expected} points")]
    WrongLength { got: usize, expected: usize },
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// `supp(μ) ⊆ U`, i.e. `μ ∈ M_U`.
pub fn in_m_u(mu: &FiniteMeasure, u: &PointSet) -> bool {
    mu.support().iter().all(|&x| u.contains(x))
}

/// Mass concentration: `μ(U) > p` for every `μ` in `set` (strict).
pub fn has_mcp<'a>(set: impl IntoIterator<Item = &'a FiniteMeasure>, p: f64, u: &PointSet) -> bool {
    set.into_iter().all(|mu| mu.mass(u) > p)
}

/// The thickened cover element `{μ : μ(U) > p}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThickenedElement {
    pub base: PointSet,
    pub p: f64,
}

impl ThickenedElement {
    pub fn new(base: PointSet, p: f64) -> Self {
        Self { base, p }
    }

    pub fn contains(&self, mu: &FiniteMeasure) -> bool {
        mu.mass(&self.base) > self.p
    }
}

/// A Lipschitz function `φ: X → [0, 1]` that is 1 on a plateau `V` and
/// vanishes exactly off a support set `V′ ⊇ V`.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpFunction {
    plateau: PointSet,
    support: PointSet,
    lipschitz: f64,
    values: Vec<f64>,
}

impl BumpFunction {
    /// `φ(x) = min(1, d(x, V′ᶜ) / δ)` with `δ = d(V, V′ᶜ)`.
    ///
    /// When `V′` is everything, `φ ≡ 1` and `L = 0`. An empty plateau has no
    /// gap to measure against; the ramp then reaches 1 at the point of `V′`
    /// farthest from `V′ᶜ`.
    pub fn build(space: &FiniteMetricSpace, plateau: &PointSet, support: &PointSet) -> Result<Self, ThickeningError> {
        if !plateau.is_subset(support) {
            return Err(ThickeningError::NotNested);
        }
        let n = space.len();
        let outside = support.complement(n);
        if outside.is_empty() {
            return Ok(Self {
                plateau: plateau.clone(),
                support: support.clone(),
                lipschitz: 0.0,
                values: vec![1.0; n],
            });
        }
        let gap = if plateau.is_empty() {
            support.iter().map(|&x| space.dist_to_set(x, outside.iter().copied())).fold(0.0, f64::max)
        } else {
            space.set_distance(plateau, &outside)
        };
        if !(gap > 0.0) {
            return Err(ThickeningError::DegenerateGap);
        }
        let values =
            (0..n)
                .map(|x| {
                    if outside.contains(x) {
                        0.0
                    } else {
                        (space.dist_to_set(x, outside.iter().copied()) / gap).min(1.0)
                    }
                })
                .collect();
        Ok(Self { plateau: plateau.clone(), support: support.clone(), lipschitz: 1.0 / gap, values })
    }

    /// A bump given by explicit values (no plateau/support bookkeeping beyond
    /// what the values imply). The Lipschitz constant is computed exactly.
    pub fn from_values(space: &FiniteMetricSpace, values: Vec<f64>) -> Result<Self, ThickeningError> {
        if values.len() != space.len() {
            return Err(ThickeningError::WrongLength { got: values.len(), expected: space.len() });
        }
        let plateau = (0..values.len()).filter(|&i| values[i] >= 1.0).collect();
        let support = (0..values.len()).filter(|&i| values[i] > 0.0).collect();
        let mut lipschitz = 0.0f64;
        for i in 0..values.len() {
            for j in (i + 1)..values.len() {
                let d = space.dist(i, j);
                let dv = (values[i] - values[j]).abs();
                if dv > 0.0 {
                    lipschitz = lipschitz.max(if d > 0.0 { dv / d } else { f64::INFINITY });
                }
            }
        }
        Ok(Self { plateau, support, lipschitz, values })
    }

    #[inline]
    pub fn value(&self, x: usize) -> f64 {
        self.values[x]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn plateau(&self) -> &PointSet {
        &self.plateau
    }

    pub fn support(&self) -> &PointSet {
        &self.support
    }
}

/// `Σⱼ aⱼ φ(xⱼ)`.
fn pumped_total(mu: &FiniteMeasure, phi: &BumpFunction) -> Result<f64, ThickeningError> {
    let total: f64 = mu.atoms().map(|(x, a)| a * phi.value(x)).sum();
    if total > 0.0 {
        Ok(total)
    } else {
        Err(ThickeningError::ZeroMass)
    }
}

/// The pumping map: reweights each atom by `φ` and renormalizes,
/// `Σ (aᵢ φ(xᵢ) / Σⱼ aⱼ φ(xⱼ)) δ_{xᵢ}`.
pub fn pump(mu: &FiniteMeasure, phi: &BumpFunction) -> Result<FiniteMeasure, ThickeningError> {
    if mu.support().iter().all(|&x| phi.value(x) == 1.0) {
        return Ok(mu.clone());
    }
    let total = pumped_total(mu, phi)?;
    let (mut support, mut weights) = (Vec::new(), Vec::new());
    for (x, a) in mu.atoms() {
        let w = a * phi.value(x) / total;
        if w > 0.0 {
            support.push(x);
            weights.push(w);
        }
    }
    Ok(FiniteMeasure::from_atoms_unchecked(support, weights))
}

/// The `v`-th barycentric coordinate of `pump(μ, φ)`, evaluated directly as
/// `ψ_v(μ) φ(v) / Σ_y ψ_y(μ) φ(y)`.
pub fn pump_coordinate(mu: &FiniteMeasure, phi: &BumpFunction, v: usize) -> Result<f64, ThickeningError> {
    if mu.support().iter().all(|&x| phi.value(x) == 1.0) {
        return Ok(mu.psi(v));
    }
    let total = pumped_total(mu, phi)?;
    Ok(mu.psi(v) * phi.value(v) / total)
}

/// `(1 − t) μ + t · pump(μ, φ)`.
pub fn pump_homotopy(mu: &FiniteMeasure, phi: &BumpFunction, t: f64) -> Result<FiniteMeasure, ThickeningError> {
    let pumped = pump(mu, phi)?;
    Ok(convex_combine(mu, &pumped, t)?)
}

/// Smallest `i ≥ 1` such that every measure in `set` puts mass `> p` on
/// `Vᵢ = {x ∈ U : d(x, Uᶜ) > 1/i}`, together with `Vᵢ`.
///
/// For a finite set of finitely supported measures the sequence `Vᵢ`
/// stabilizes once `1/i` drops below the smallest positive distance from a
/// support point in `U` to `Uᶜ`, so the scan is bounded.
pub fn shrink_to_inner(
    space: &FiniteMetricSpace,
    set: &[FiniteMeasure],
    p: f64,
    u: &PointSet,
) -> Result<(usize, PointSet), ThickeningError> {
    if !has_mcp(set, p, u) {
        return Err(ThickeningError::NoMcp(p));
    }
    let depth = |x: usize| distance_to_complement(space, u, x);
    let min_gap = set
        .iter()
        .flat_map(|mu| mu.support().iter().copied())
        .filter(|&x| u.contains(x))
        .map(depth)
        .filter(|&d| d > 0.0)
        .fold(f64::INFINITY, f64::min);
    let last = if min_gap.is_finite() { (1.0 / min_gap).floor() as usize + 1 } else { 1 };
    let depths: Vec<(usize, f64)> = u.iter().map(|&x| (x, depth(x))).collect();
    for i in 1..=last.max(1) {
        let inv = 1.0 / i as f64;
        let inner: PointSet = depths.iter().filter(|(_, d)| *d > inv).map(|(x, _)| *x).collect();
        if has_mcp(set, p, &inner) {
            return Ok((i, inner));
        }
    }
    Err(ThickeningError::NoMcp(p))
}

/// Both metrics on a pair of measures and the comparison bound
/// `½ · diam(supp μ ∪ supp ν) · d_m(μ, ν)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricComparison {
    pub d_m: f64,
    pub d_w: f64,
    pub bound: f64,
    pub holds: bool,
}

pub fn compare_metrics(
    space: &FiniteMetricSpace,
    mu: &FiniteMeasure,
    nu: &FiniteMeasure,
) -> Result<MetricComparison, ThickeningError> {
    let d_m = barycentric_distance(mu, nu);
    let (d_w, _) = wasserstein(space, mu, nu)?;
    let union = mu.support_set().union(&nu.support_set());
    let bound = 0.5 * space.diameter(union.as_slice()) * d_m;
    Ok(MetricComparison { d_m, d_w, bound, holds: d_w <= bound + 1e-9 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> FiniteMetricSpace {
        FiniteMetricSpace::from_points(&xs.iter().map(|&x| vec![x]).collect::<Vec<_>>()).unwrap()
    }

    fn m(support: &[usize], weights: &[f64]) -> FiniteMeasure {
        FiniteMeasure::new(support.to_vec(), weights.to_vec()).unwrap()
    }

    fn set(pts: &[usize]) -> PointSet {
        PointSet::new(pts.to_vec())
    }

    #[test]
    fn support_and_mass_predicates() {
        let u = set(&[0]);
        assert!(in_m_u(&FiniteMeasure::dirac(0), &u));
        assert!(!in_m_u(&FiniteMeasure::dirac(1), &u));
        assert!(!in_m_u(&m(&[0, 1], &[0.5, 0.5]), &u));

        assert!(has_mcp(&[FiniteMeasure::dirac(0)], 0.999, &u));
        assert!(!has_mcp(&[m(&[0, 1], &[0.5, 0.5])], 0.5, &u));
        assert!(has_mcp(&[m(&[0, 1], &[0.9, 0.1])], 0.85, &u));
        assert!(ThickenedElement::new(u, 0.85).contains(&m(&[0, 1], &[0.9, 0.1])));
    }

    #[test]
    fn bump_on_line() {
        let s = line(&[0.0, 1.0, 2.0]);
        let phi = BumpFunction::build(&s, &set(&[0]), &set(&[0, 1])).unwrap();
        assert_eq!(phi.values(), &[1.0, 0.5, 0.0]);
        assert_eq!(phi.lipschitz(), 0.5);

        let all = PointSet::full(3);
        let one = BumpFunction::build(&s, &all, &all).unwrap();
        assert_eq!(one.values(), &[1.0; 3]);
        assert_eq!(one.lipschitz(), 0.0);

        assert_eq!(BumpFunction::build(&s, &set(&[2]), &set(&[0])), Err(ThickeningError::NotNested));
    }

    #[test]
    fn bump_rejects_zero_gap() {
        let s = FiniteMetricSpace::from_matrix(&[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(BumpFunction::build(&s, &set(&[0]), &set(&[0])), Err(ThickeningError::DegenerateGap));
    }

    #[test]
    fn pump_examples() {
        let s = line(&[0.0, 1.0]);
        let phi = BumpFunction::from_values(&s, vec![1.0, 0.0]).unwrap();
        assert_eq!(pump(&m(&[0, 1], &[0.5, 0.5]), &phi).unwrap(), FiniteMeasure::dirac(0));

        let phi = BumpFunction::from_values(&s, vec![1.0, 0.5]).unwrap();
        let mu = m(&[0, 1], &[0.6, 0.4]);
        let out = pump(&mu, &phi).unwrap();
        assert!((out.psi(0) - 0.75).abs() < 1e-15 && (out.psi(1) - 0.25).abs() < 1e-15);
        assert_eq!(pump_coordinate(&mu, &phi, 0).unwrap(), out.psi(0));

        let ones = BumpFunction::from_values(&s, vec![1.0, 1.0]).unwrap();
        assert_eq!(pump(&mu, &ones).unwrap(), mu);

        let zero = BumpFunction::from_values(&s, vec![0.0, 0.0]).unwrap();
        assert_eq!(pump(&mu, &zero), Err(ThickeningError::ZeroMass));
    }

    #[test]
    fn pump_coordinate_off_support_and_constant_bump() {
        let s = line(&[0.0, 1.0, 2.0]);
        let mu = m(&[0, 1], &[0.3, 0.7]);
        let c = BumpFunction::from_values(&s, vec![0.4; 3]).unwrap();
        assert_eq!(pump_coordinate(&mu, &c, 2).unwrap(), 0.0);
        assert!((pump_coordinate(&mu, &c, 1).unwrap() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn homotopy_endpoints_and_midpoint() {
        let s = line(&[0.0, 1.0]);
        let phi = BumpFunction::from_values(&s, vec![1.0, 0.0]).unwrap();
        let mu = m(&[0, 1], &[0.5, 0.5]);
        assert_eq!(pump_homotopy(&mu, &phi, 0.0).unwrap(), mu);
        assert_eq!(pump_homotopy(&mu, &phi, 1.0).unwrap(), FiniteMeasure::dirac(0));
        assert_eq!(pump_homotopy(&mu, &phi, 0.5).unwrap(), m(&[0, 1], &[0.75, 0.25]));
    }

    #[test]
    fn shrink_scans_for_first_index() {
        // d(x, Uᶜ) = 0.5 for x = 0
        let s = line(&[0.0, 0.5]);
        let (i, v) = shrink_to_inner(&s, &[FiniteMeasure::dirac(0)], 0.5, &set(&[0])).unwrap();
        assert_eq!((i, v), (3, set(&[0])));

        let (i, v) = shrink_to_inner(&s, &[FiniteMeasure::dirac(0)], 0.5, &PointSet::full(2)).unwrap();
        assert_eq!((i, v), (1, PointSet::full(2)));

        // d(a, Uᶜ) = 1, d(b, Uᶜ) = 0.1
        let s = line(&[0.0, 0.9, 1.0]);
        let mu = m(&[0, 1], &[0.9, 0.1]);
        let (i, v) = shrink_to_inner(&s, std::slice::from_ref(&mu), 0.85, &set(&[0, 1])).unwrap();
        assert_eq!((i, v), (2, set(&[0])));

        let (i, _) = shrink_to_inner(&s, std::slice::from_ref(&mu), 0.95, &set(&[0, 1])).unwrap();
        assert_eq!(i, 11);
        assert_eq!(shrink_to_inner(&s, &[mu], 0.95, &set(&[0])), Err(ThickeningError::NoMcp(0.95)));
    }

    #[test]
    fn comparison_examples() {
        let s = line(&[0.0, 3.0]);
        let mu = m(&[0, 1], &[0.4, 0.6]);
        let c = compare_metrics(&s, &mu, &mu).unwrap();
        assert_eq!((c.d_m, c.d_w, c.bound, c.holds), (0.0, 0.0, 0.0, true));
        let c = compare_metrics(&s, &FiniteMeasure::dirac(0), &FiniteMeasure::dirac(1)).unwrap();
        assert_eq!((c.d_m, c.d_w, c.bound, c.holds), (2.0, 3.0, 3.0, true));
    }
}
