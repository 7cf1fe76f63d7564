//! Finite metric spaces, point sets and covers.
//!
//! Every other module works over a [`FiniteMetricSpace`]; points are referred
//! to by their index into the distance matrix.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative slack allowed on the triangle inequality. Distances derived from
/// coordinates can exceed the sum of the other two sides by a few ulps for
/// collinear points.
const TRIANGLE_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("distance matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("distance matrix is empty")]
    Empty,
    #[error("distance d({0},{1}) is not finite")]
    NonFinite(usize, usize),
    #[error("distance matrix is not symmetric at ({0},{1})")]
    NonSymmetric(usize, usize),
    #[error("negative distance at ({0},{1})")]
    NegativeDistance(usize, usize),
    #[error("nonzero diagonal entry at index {0}")]
    NonzeroDiagonal(usize),
    #[error("triangle inequality violated: d({0},{1}) > d({0},{2}) + d({2},{1})")]
    TriangleViolation(usize, usize, usize),
    #[error("points have inconsistent dimensions (row {0})")]
    RaggedPoints(usize),
    #[error("point index {0} out of range for a space with {1} points")]
    IndexOutOfRange(usize, usize),
    #[error("point set is empty")]
    EmptySet,
    #[error("cover does not contain point {0}")]
    Uncovered(usize),
    #[error("cover radius must be positive, got {0}")]
    BadRadius(f64),
    #[error("cover elements are not enumerable for a diameter cover")]
    NotEnumerable,
}

/// A finite (pseudo)metric space given by a validated distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricSpace {
    dist: Vec<f64>,
    n: usize,
    coords: Option<Vec<Vec<f64>>>,
    coincident: bool,
}

impl FiniteMetricSpace {
    /// Validates a full distance matrix.
    ///
    /// Axioms are checked in the order: shape, finiteness, diagonal,
    /// nonnegativity, symmetry, triangle inequality. The first violation is
    /// reported. Distinct points at distance zero are accepted and flagged
    /// through [`FiniteMetricSpace::is_pseudometric`].
    pub fn from_matrix(rows: &[Vec<f64>]) -> Result<Self, MetricError> {
        let n = rows.len();
        if n == 0 {
            return Err(MetricError::Empty);
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(MetricError::NotSquare { row: i, len: row.len(), expected: n });
            }
        }
        for i in 0..n {
            for j in 0..n {
                if !rows[i][j].is_finite() {
                    return Err(MetricError::NonFinite(i, j));
                }
            }
        }
        for (i, row) in rows.iter().enumerate() {
            if row[i] != 0.0 {
                return Err(MetricError::NonzeroDiagonal(i));
            }
        }
        for i in 0..n {
            for j in 0..n {
                if rows[i][j] < 0.0 {
                    return Err(MetricError::NegativeDistance(i, j));
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if rows[i][j] != rows[j][i] {
                    return Err(MetricError::NonSymmetric(i, j));
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let dij = rows[i][j];
                for k in 0..n {
                    let via = rows[i][k] + rows[k][j];
                    if dij > via + TRIANGLE_RTOL * via {
                        return Err(MetricError::TriangleViolation(i, j, k));
                    }
                }
            }
        }
        let dist: Vec<f64> = rows.iter().flatten().copied().collect();
        Ok(Self::assemble(dist, n, None))
    }

    /// Euclidean metric on a point cloud. Every row must have the same length.
    pub fn from_points(points: &[Vec<f64>]) -> Result<Self, MetricError> {
        let n = points.len();
        if n == 0 {
            return Err(MetricError::Empty);
        }
        let d = points[0].len();
        for (i, p) in points.iter().enumerate() {
            if p.len() != d {
                return Err(MetricError::RaggedPoints(i));
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(MetricError::NonFinite(i, i));
            }
        }
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = points[i].iter().zip(&points[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                dist[i * n + j] = v;
                dist[j * n + i] = v;
            }
        }
        Ok(Self::assemble(dist, n, Some(points.to_vec())))
    }

    fn assemble(dist: Vec<f64>, n: usize, coords: Option<Vec<Vec<f64>>>) -> Self {
        let coincident = (0..n).any(|i| ((i + 1)..n).any(|j| dist[i * n + j] == 0.0));
        Self { dist, n, coords, coincident }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    /// Coordinates, when the space was built from a point cloud.
    pub fn coords(&self) -> Option<&[Vec<f64>]> {
        self.coords.as_deref()
    }

    /// True when two distinct points are at distance zero.
    pub fn is_pseudometric(&self) -> bool {
        self.coincident
    }

    pub fn to_matrix(&self) -> Vec<Vec<f64>> {
        self.dist.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn check_index(&self, i: usize) -> Result<(), MetricError> {
        if i < self.n {
            Ok(())
        } else {
            Err(MetricError::IndexOutOfRange(i, self.n))
        }
    }

    /// Diameter of a set of points; 0 for sets with fewer than two points.
    pub fn diameter(&self, pts: &[usize]) -> f64 {
        let mut d = 0.0f64;
        for (a, &i) in pts.iter().enumerate() {
            for &j in &pts[a + 1..] {
                d = d.max(self.dist(i, j));
            }
        }
        d
    }

    /// `min_z max_{x in pts} d(z, x)` over witnesses `z` in the space, with the
    /// minimizing witness.
    pub fn witness_radius(&self, pts: &[usize]) -> (f64, usize) {
        let mut best = (f64::INFINITY, 0);
        for z in 0..self.n {
            let r = pts.iter().map(|&x| self.dist(z, x)).fold(0.0, f64::max);
            if r < best.0 {
                best = (r, z);
            }
        }
        best
    }

    /// `d(x, A) = min_{a in A} d(x, a)`, or +inf for empty `A`.
    pub fn dist_to_set(&self, x: usize, set: impl IntoIterator<Item = usize>) -> f64 {
        set.into_iter().map(|a| self.dist(x, a)).fold(f64::INFINITY, f64::min)
    }

    /// `d(A, B)` between two point sets, +inf if either is empty.
    pub fn set_distance(&self, a: &PointSet, b: &PointSet) -> f64 {
        let mut d = f64::INFINITY;
        for &x in a.iter() {
            for &y in b.iter() {
                d = d.min(self.dist(x, y));
            }
        }
        d
    }

    /// Open ball `{y : d(center, y) < r}`.
    pub fn open_ball(&self, center: usize, r: f64) -> PointSet {
        PointSet::from_sorted_unchecked((0..self.n).filter(|&y| self.dist(center, y) < r).collect())
    }
}

/// Distance from `x` to the complement of `u`; +inf when `u` is the whole space.
pub fn distance_to_complement(space: &FiniteMetricSpace, u: &PointSet, x: usize) -> f64 {
    space.dist_to_set(x, (0..space.len()).filter(|y| !u.contains(*y)))
}

/// A sorted set of point indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointSet(Vec<usize>);

impl PointSet {
    pub fn new(mut pts: Vec<usize>) -> Self {
        pts.sort_unstable();
        pts.dedup();
        Self(pts)
    }

    pub fn full(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub(crate) fn from_sorted_unchecked(pts: Vec<usize>) -> Self {
        debug_assert!(pts.windows(2).all(|w| w[0] < w[1]));
        Self(pts)
    }

    #[inline]
    pub fn contains(&self, x: usize) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.0.iter().all(|&x| other.contains(x))
    }

    pub fn intersection(&self, other: &PointSet) -> PointSet {
        Self(self.0.iter().copied().filter(|&x| other.contains(x)).collect())
    }

    pub fn union(&self, other: &PointSet) -> PointSet {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Self::new(v)
    }

    pub fn complement(&self, n: usize) -> PointSet {
        Self((0..n).filter(|&x| !self.contains(x)).collect())
    }

    pub fn iter(&self) -> std::slice::Iter<'_, usize> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<usize> for PointSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

impl fmt::Display for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CoverKind {
    /// All subsets of diameter `< r`. Never enumerated.
    Diameter(f64),
    /// Open balls `B(z, r)` for every `z` in the space.
    Ball(f64),
    Explicit(Vec<PointSet>),
}

/// Identifies a cover element that contains a queried set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CoverElementId {
    /// The queried set itself, as a member of a diameter cover.
    DiameterWitness,
    /// The ball centred at this point.
    Ball(usize),
    Explicit(usize),
}

/// A cover of a finite metric space with a reported bound on element diameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Cover {
    kind: CoverKind,
    bound: f64,
    n: usize,
}

impl Cover {
    pub fn diameter(space: &FiniteMetricSpace, r: f64) -> Result<Self, MetricError> {
        if !(r > 0.0) {
            return Err(MetricError::BadRadius(r));
        }
        Ok(Self { kind: CoverKind::Diameter(r), bound: r, n: space.len() })
    }

    pub fn ball(space: &FiniteMetricSpace, r: f64) -> Result<Self, MetricError> {
        if !(r > 0.0) {
            return Err(MetricError::BadRadius(r));
        }
        Ok(Self { kind: CoverKind::Ball(r), bound: 2.0 * r, n: space.len() })
    }

    /// An explicit cover; every point must lie in some element.
    pub fn explicit(space: &FiniteMetricSpace, elements: Vec<PointSet>) -> Result<Self, MetricError> {
        let n = space.len();
        let mut covered = vec![false; n];
        for el in &elements {
            for &x in el.iter() {
                space.check_index(x)?;
                covered[x] = true;
            }
        }
        if let Some(x) = covered.iter().position(|c| !c) {
            return Err(MetricError::Uncovered(x));
        }
        let bound = elements.iter().map(|e| space.diameter(e.as_slice())).fold(0.0, f64::max);
        Ok(Self { kind: CoverKind::Explicit(elements), bound, n })
    }

    pub fn kind(&self) -> &CoverKind {
        &self.kind
    }

    /// Supremum of element diameters (an upper bound for ball and diameter covers).
    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// Materializes the elements as point sets, in identifier order.
    pub fn elements(&self, space: &FiniteMetricSpace) -> Result<Vec<PointSet>, MetricError> {
        match &self.kind {
            CoverKind::Diameter(_) => Err(MetricError::NotEnumerable),
            CoverKind::Ball(r) => Ok((0..space.len()).map(|z| space.open_ball(z, *r)).collect()),
            CoverKind::Explicit(els) => Ok(els.clone()),
        }
    }

    /// Every element containing the nonempty set `s`.
    ///
    /// Diameter covers answer with a single synthetic witness iff
    /// `diam(s) < r`; ball covers list every centre `z` with
    /// `max_{x in s} d(z, x) < r`. Both comparisons are strict.
    pub fn elements_containing(
        &self,
        space: &FiniteMetricSpace,
        s: &[usize],
    ) -> Result<Vec<CoverElementId>, MetricError> {
        if s.is_empty() {
            return Err(MetricError::EmptySet);
        }
        for &x in s {
            space.check_index(x)?;
        }
        Ok(match &self.kind {
            CoverKind::Diameter(r) => {
                if space.diameter(s) < *r {
                    vec![CoverElementId::DiameterWitness]
                } else {
                    vec![]
                }
            }
            CoverKind::Ball(r) => (0..space.len())
                .filter(|&z| s.iter().all(|&x| space.dist(z, x) < *r))
                .map(CoverElementId::Ball)
                .collect(),
            CoverKind::Explicit(els) => els
                .iter()
                .enumerate()
                .filter(|(_, e)| s.iter().all(|&x| e.contains(x)))
                .map(|(i, _)| CoverElementId::Explicit(i))
                .collect(),
        })
    }

    /// Number of points in the space the cover was built for.
    pub fn space_len(&self) -> usize {
        self.n
    }
}
