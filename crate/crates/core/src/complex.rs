//! Filtered simplicial complexes: open Vietoris–Rips, intrinsic Čech and
//! Vietoris complexes of covers.
//!
//! Each simplex carries the threshold at which it enters. Under the open
//! convention a simplex with value `v` belongs to the complex at scale `r`
//! iff `v < r`; the same stored complex therefore serves every threshold up
//! to the one it was built at.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::measure::FiniteMeasure;
use crate::metric::{Cover, FiniteMetricSpace, MetricError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ComplexError {
    #[error("cover has no finite diameter bound")]
    UnboundedCover,
    #[error("support {0:?} is not a simplex of the complex")]
    NotASimplex(Vec<usize>),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// A simplex: sorted vertex indices plus its entry value.
#[derive(Debug, Clone, PartialEq)]
pub struct Simplex {
    pub vertices: Vec<usize>,
    pub value: f64,
}

impl Simplex {
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }
}

/// A face-closed simplicial complex with per-simplex filtration values.
///
/// Simplices are stored in canonical order: by dimension, then
/// lexicographically by vertex list.
#[derive(Debug, Clone)]
pub struct FilteredComplex {
    n_vertices: usize,
    k_max: usize,
    simplices: Vec<Simplex>,
    index: HashMap<Vec<usize>, usize>,
}

impl FilteredComplex {
    fn from_simplices(n_vertices: usize, k_max: usize, mut simplices: Vec<Simplex>) -> Self {
        simplices.sort_by(|a, b| a.vertices.len().cmp(&b.vertices.len()).then_with(|| a.vertices.cmp(&b.vertices)));
        let index = simplices.iter().enumerate().map(|(i, s)| (s.vertices.clone(), i)).collect();
        Self { n_vertices, k_max, simplices, index }
    }

    /// Number of points of the underlying space (not all need be vertices).
    pub fn n_points(&self) -> usize {
        self.n_vertices
    }

    /// Largest simplex dimension the complex was built with.
    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn count_dim(&self, dim: usize) -> usize {
        self.simplices.iter().filter(|s| s.vertices.len() == dim + 1).count()
    }

    /// Filtration value of a stored simplex.
    pub fn value_of(&self, vertices: &[usize]) -> Option<f64> {
        let mut key = vertices.to_vec();
        key.sort_unstable();
        self.index.get(&key).map(|&i| self.simplices[i].value)
    }

    /// Position of a sorted vertex list in [`FilteredComplex::simplices`].
    pub fn position(&self, sorted_vertices: &[usize]) -> Option<usize> {
        self.index.get(sorted_vertices).copied()
    }

    /// Membership test. The empty set is always a simplex.
    pub fn is_simplex(&self, s: &[usize]) -> bool {
        if s.is_empty() {
            return true;
        }
        let mut key = s.to_vec();
        key.sort_unstable();
        key.dedup();
        self.index.contains_key(&key)
    }

    /// Simplices present at threshold `r` under the open convention.
    pub fn sublevel(&self, r: f64) -> impl Iterator<Item = &Simplex> {
        self.simplices.iter().filter(move |s| s.value < r)
    }

    /// Sorted distinct filtration values.
    pub fn critical_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.simplices.iter().map(|s| s.value).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// Text export: one simplex per line, `v0 v1 ... vk ; value`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.simplices {
            let verts = s.vertices.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
            let _ = writeln!(out, "{verts} ; {}", s.value);
        }
        out
    }
}

/// Grows simplices by appending larger vertices while `admit` accepts the
/// extended vertex list; returns the admitted value for each. `admit` must be
/// monotone (a rejected set has no admitted superset).
fn grow_downward_closed<F>(n: usize, k_max: usize, admit: F) -> Vec<Simplex>
where
    F: Fn(&[usize], f64) -> Option<f64> + Sync,
{
    let per_root: Vec<Vec<Simplex>> = (0..n)
        .into_par_iter()
        .map(|root| {
            let mut out = Vec::new();
            let Some(v0) = admit(&[root], 0.0) else { return out };
            let mut stack = vec![(vec![root], v0)];
            while let Some((verts, value)) = stack.pop() {
                if verts.len() <= k_max {
                    let last = *verts.last().unwrap();
                    for next in ((last + 1)..n).rev() {
                        let mut ext = verts.clone();
                        ext.push(next);
                        if let Some(v) = admit(&ext, value) {
                            stack.push((ext, v));
                        }
                    }
                }
                out.push(Simplex { vertices: verts, value });
            }
            out
        })
        .collect();
    per_root.into_iter().flatten().collect()
}

/// Open Vietoris–Rips complex: every set of at most `k_max + 1` points with
/// diameter `< r`, valued by its diameter. Empty for `r ≤ 0`.
pub fn build_vr(space: &FiniteMetricSpace, r: f64, k_max: usize) -> FilteredComplex {
    let simplices = grow_downward_closed(space.len(), k_max, |verts, parent_value| {
        let (&new, rest) = verts.split_last().unwrap();
        let d = rest.iter().map(|&x| space.dist(x, new)).fold(parent_value, f64::max);
        (d < r).then_some(d)
    });
    FilteredComplex::from_simplices(space.len(), k_max, simplices)
}

/// Intrinsic Čech complex: a set enters at `min_{z ∈ X} max_{x ∈ σ} d(z, x)`,
/// and is present at `r` iff that value is `< r`.
pub fn build_cech(space: &FiniteMetricSpace, r: f64, k_max: usize) -> FilteredComplex {
    let simplices = grow_downward_closed(space.len(), k_max, |verts, _| {
        let (radius, _) = space.witness_radius(verts);
        (radius < r).then_some(radius)
    });
    FilteredComplex::from_simplices(space.len(), k_max, simplices)
}

/// Vietoris complex of a cover: every set of at most `k_max + 1` points lying
/// in some element. All values are 0.
pub fn build_vietoris(space: &FiniteMetricSpace, cover: &Cover, k_max: usize) -> Result<FilteredComplex, ComplexError> {
    if !cover.bound().is_finite() {
        return Err(ComplexError::UnboundedCover);
    }
    let simplices =
        grow_downward_closed(space.len(), k_max, |verts, _| match cover.elements_containing(space, verts) {
            Ok(found) if !found.is_empty() => Some(0.0),
            _ => None,
        });
    Ok(FilteredComplex::from_simplices(space.len(), k_max, simplices))
}

/// A point of the geometric realization: a measure supported on a simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizationPoint(FiniteMeasure);

impl RealizationPoint {
    pub fn new(complex: &FilteredComplex, mu: FiniteMeasure) -> Result<Self, ComplexError> {
        if complex.is_simplex(mu.support()) {
            Ok(Self(mu))
        } else {
            Err(ComplexError::NotASimplex(mu.support().to_vec()))
        }
    }

    /// Like [`RealizationPoint::new`], but only counting simplices present at `r`.
    pub fn at_scale(complex: &FilteredComplex, r: f64, mu: FiniteMeasure) -> Result<Self, ComplexError> {
        match complex.value_of(mu.support()) {
            Some(v) if v < r => Ok(Self(mu)),
            _ => Err(ComplexError::NotASimplex(mu.support().to_vec())),
        }
    }

    pub fn measure(&self) -> &FiniteMeasure {
        &self.0
    }

    /// Barycentric coordinate at vertex `v`.
    pub fn coordinate(&self, v: usize) -> f64 {
        self.0.psi(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::PointSet;

    fn equilateral() -> FiniteMetricSpace {
        FiniteMetricSpace::from_matrix(&[vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]]).unwrap()
    }

    fn square() -> FiniteMetricSpace {
        FiniteMetricSpace::from_points(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap()
    }

    #[test]
    fn vr_strict_boundary() {
        let k = build_vr(&equilateral(), 1.0, 2);
        assert_eq!((k.count_dim(0), k.count_dim(1)), (3, 0));
        let k = build_vr(&equilateral(), 1.01, 2);
        assert_eq!((k.count_dim(0), k.count_dim(1), k.count_dim(2)), (3, 3, 1));
        assert_eq!(k.value_of(&[0, 1]), Some(1.0));
        assert!(build_vr(&equilateral(), 0.0, 2).is_empty());
    }

    #[test]
    fn vr_square_has_no_triangles_below_diagonal() {
        let k = build_vr(&square(), 1.2, 2);
        assert_eq!((k.count_dim(0), k.count_dim(1), k.count_dim(2)), (4, 4, 0));
    }

    #[test]
    fn cech_values() {
        let k = build_cech(&square(), f64::INFINITY, 3);
        assert_eq!(k.value_of(&[0]), Some(0.0));
        assert_eq!(k.value_of(&[0, 1, 2, 3]), Some(2f64.sqrt()));

        let with_mid = FiniteMetricSpace::from_points(&[vec![0.0], vec![2.0], vec![1.0]]).unwrap();
        let without = FiniteMetricSpace::from_points(&[vec![0.0], vec![2.0]]).unwrap();
        assert_eq!(build_cech(&with_mid, 10.0, 1).value_of(&[0, 1]), Some(1.0));
        assert_eq!(build_cech(&without, 10.0, 1).value_of(&[0, 1]), Some(2.0));
    }

    #[test]
    fn vietoris_complexes() {
        let s = equilateral();
        let whole = Cover::explicit(&s, vec![PointSet::full(3)]).unwrap();
        assert_eq!(build_vietoris(&s, &whole, 2).unwrap().len(), 7);
        let singles = Cover::explicit(&s, (0..3).map(|i| PointSet::new(vec![i])).collect()).unwrap();
        assert_eq!(build_vietoris(&s, &singles, 2).unwrap().len(), 3);
        let two = Cover::explicit(&s, vec![PointSet::new(vec![0, 1]), PointSet::new(vec![1, 2])]).unwrap();
        let k = build_vietoris(&s, &two, 2).unwrap();
        assert!(k.is_simplex(&[0, 1]) && k.is_simplex(&[1, 2]));
        assert!(!k.is_simplex(&[0, 2]) && !k.is_simplex(&[0, 1, 2]));
    }

    #[test]
    fn membership_conventions() {
        let k = build_vr(&equilateral(), 2.0, 2);
        assert!(k.is_simplex(&[]));
        assert!(k.is_simplex(&[2, 0]));
        let k1 = build_vr(&equilateral(), 2.0, 1);
        assert!(!k1.is_simplex(&[0, 1, 2]));
    }

    #[test]
    fn text_export() {
        let s = FiniteMetricSpace::from_points(&[vec![0.0], vec![1.0]]).unwrap();
        assert_eq!(build_vr(&s, 2.0, 1).to_text(), "0 ; 0\n1 ; 0\n0 1 ; 1\n");
    }

    #[test]
    fn realization_points_live_on_simplices() {
        let k = build_vr(&equilateral(), 1.0, 2);
        let mu = FiniteMeasure::new(vec![0, 1], vec![0.5, 0.5]).unwrap();
        assert!(RealizationPoint::new(&k, mu.clone()).is_err());
        let k = build_vr(&equilateral(), 1.5, 2);
        let p = RealizationPoint::new(&k, mu.clone()).unwrap();
        assert_eq!(p.coordinate(0), 0.5);
        assert!(RealizationPoint::at_scale(&k, 1.0, mu).is_err());
    }
}
