//! The Freudenthal–Kuhn triangulation of the unit cube.
//!
//! At resolution `p` the cube `[0, 1]ⁿ` is cut into `pⁿ` cells of side `1/p`,
//! and each cell with lattice corner `x` into the `n!` simplices
//! `σ(x, π) = conv{v₀, …, vₙ}` with `v₀ = x`, `vᵢ = vᵢ₋₁ + e_{π(i)}`.
//! Simplices are generated on demand; nothing of size `n!·pⁿ` is stored.

use std::collections::HashMap;
use std::fmt::Write as _;

use itertools::Itertools;
use nalgebra::DMatrix;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FkError {
    #[error("dimension and resolution must be at least 1 (got n = {n}, p = {p})")]
    BadShape { n: usize, p: usize },
    #[error("point {0:?} is outside the unit cube")]
    OutOfDomain(Vec<f64>),
    #[error("expected a point of dimension {expected}, got {got}")]
    WrongDimension { expected: usize, got: usize },
    #[error("lattice point {0:?} is not a vertex of the triangulation")]
    NotAVertex(Vec<usize>),
    #[error("triangulation has more than {limit} simplices")]
    TooLarge { limit: usize },
}

/// `2ⁿ · n!`, the bound on the number of top simplices sharing a vertex.
pub fn alpha(n: usize) -> usize {
    (1usize << n) * factorial(n)
}

pub fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// `σ(x, π)`: lattice base corner and axis order (0-based axes).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FkSimplex {
    pub base: Vec<usize>,
    pub perm: Vec<usize>,
}

impl FkSimplex {
    /// The `n + 1` lattice vertices `v₀, …, vₙ`.
    pub fn lattice_vertices(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::with_capacity(self.perm.len() + 1);
        let mut cur = self.base.clone();
        out.push(cur.clone());
        for &axis in &self.perm {
            cur[axis] += 1;
            out.push(cur.clone());
        }
        out
    }
}

impl std::fmt::Display for FkSimplex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "σ(base {:?}, axes {:?})", self.base, self.perm)
    }
}

/// A located point: the containing simplex and barycentric coordinates
/// with respect to `v₀, …, vₙ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Location {
    pub simplex: FkSimplex,
    pub bary: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FkTriangulation {
    n: usize,
    p: usize,
}

impl FkTriangulation {
    pub fn new(n: usize, p: usize) -> Result<Self, FkError> {
        if n == 0 || p == 0 {
            return Err(FkError::BadShape { n, p });
        }
        Ok(Self { n, p })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn resolution(&self) -> usize {
        self.p
    }

    /// `n! · pⁿ`, or `None` on overflow.
    pub fn simplex_count(&self) -> Option<usize> {
        let cells = self.p.checked_pow(self.n as u32)?;
        cells.checked_mul(factorial(self.n))
    }

    pub fn vertex_count(&self) -> usize {
        (self.p + 1).pow(self.n as u32)
    }

    /// Simplex diameter `√n / p` (the main diagonal `v₀ → vₙ`).
    pub fn mesh_diameter(&self) -> f64 {
        (self.n as f64).sqrt() / self.p as f64
    }

    /// Base corners in lexicographic order.
    pub fn bases(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.n).map(|_| 0..self.p).multi_cartesian_product()
    }

    /// Every top simplex: bases in lexicographic order, permutations in
    /// lexicographic order within each base.
    pub fn simplices(&self) -> impl Iterator<Item = FkSimplex> + '_ {
        let n = self.n;
        self.bases()
            .flat_map(move |base| (0..n).permutations(n).map(move |perm| FkSimplex { base: base.clone(), perm }))
    }

    /// Position of a simplex in [`FkTriangulation::simplices`] order.
    pub fn simplex_id(&self, s: &FkSimplex) -> usize {
        let base_rank = s.base.iter().fold(0, |acc, &b| acc * self.p + b);
        base_rank * factorial(self.n) + perm_rank(&s.perm)
    }

    /// Inverse of [`FkTriangulation::simplex_id`].
    pub fn simplex_from_id(&self, id: usize) -> FkSimplex {
        let f = factorial(self.n);
        let (mut base_rank, perm_rank) = (id / f, id % f);
        let mut base = vec![0; self.n];
        for c in base.iter_mut().rev() {
            *c = base_rank % self.p;
            base_rank /= self.p;
        }
        FkSimplex { base, perm: perm_unrank(self.n, perm_rank) }
    }

    /// Every lattice vertex in lexicographic order.
    pub fn lattice_vertices(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.n).map(|_| 0..=self.p).multi_cartesian_product()
    }

    /// Lexicographic index of a lattice vertex.
    pub fn vertex_id(&self, v: &[usize]) -> usize {
        v.iter().fold(0, |acc, &c| acc * (self.p + 1) + c)
    }

    pub fn vertex_from_id(&self, mut id: usize) -> Vec<usize> {
        let mut v = vec![0; self.n];
        for c in v.iter_mut().rev() {
            *c = id % (self.p + 1);
            id /= self.p + 1;
        }
        v
    }

    /// Cube coordinates `v / p` of a lattice vertex.
    pub fn coords(&self, v: &[usize]) -> Vec<f64> {
        v.iter().map(|&c| c as f64 / self.p as f64).collect()
    }

    pub fn is_vertex(&self, v: &[usize]) -> bool {
        v.len() == self.n && v.iter().all(|&c| c <= self.p)
    }

    pub fn is_boundary_vertex(&self, v: &[usize]) -> bool {
        v.iter().any(|&c| c == 0 || c == self.p)
    }

    /// Finds a simplex containing `y ∈ [0, 1]ⁿ`.
    ///
    /// The base corner is `⌊p·y⌋` (clamped to `p − 1` on the upper faces)
    /// and the axis order sorts the fractional parts descending, ties broken
    /// by ascending axis index.
    pub fn locate(&self, y: &[f64]) -> Result<Location, FkError> {
        if y.len() != self.n {
            return Err(FkError::WrongDimension { expected: self.n, got: y.len() });
        }
        if y.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(FkError::OutOfDomain(y.to_vec()));
        }
        let p = self.p as f64;
        let mut base = Vec::with_capacity(self.n);
        let mut frac = Vec::with_capacity(self.n);
        for &c in y {
            let z = c * p;
            let b = (z.floor() as usize).min(self.p - 1);
            base.push(b);
            frac.push((z - b as f64).clamp(0.0, 1.0));
        }
        let mut perm: Vec<usize> = (0..self.n).collect();
        perm.sort_by(|&a, &b| frac[b].total_cmp(&frac[a]).then(a.cmp(&b)));
        let mut bary = Vec::with_capacity(self.n + 1);
        bary.push(1.0 - frac[perm[0]]);
        for k in 1..self.n {
            bary.push(frac[perm[k - 1]] - frac[perm[k]]);
        }
        bary.push(frac[perm[self.n - 1]]);
        Ok(Location { simplex: FkSimplex { base, perm }, bary })
    }

    /// Cube coordinates of `Σ λᵢ vᵢ`.
    pub fn point_from_bary(&self, s: &FkSimplex, bary: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (v, &l) in s.lattice_vertices().iter().zip(bary) {
            for (yc, &vc) in y.iter_mut().zip(v) {
                *yc += l * vc as f64;
            }
        }
        y.iter().map(|c| c / self.p as f64).collect()
    }

    /// Every top simplex having `v` as a vertex, in canonical order.
    pub fn vertex_star(&self, v: &[usize]) -> Result<Vec<FkSimplex>, FkError> {
        if !self.is_vertex(v) {
            return Err(FkError::NotAVertex(v.to_vec()));
        }
        let n = self.n;
        let mut out = Vec::new();
        // v = x + c for a corner offset c ∈ {0,1}ⁿ; v is vertex k = |c| of
        // σ(x, π) iff the first k axes of π are exactly the support of c.
        for c in (0..n).map(|_| 0..=1usize).multi_cartesian_product() {
            if (0..n).any(|i| v[i] < c[i] || v[i] - c[i] >= self.p) {
                continue;
            }
            let base: Vec<usize> = (0..n).map(|i| v[i] - c[i]).collect();
            let k = c.iter().sum::<usize>();
            for perm in (0..n).permutations(n) {
                if perm[..k].iter().all(|&a| c[a] == 1) {
                    out.push(FkSimplex { base: base.clone(), perm });
                }
            }
        }
        out.sort();
        Ok(out)
    }

    /// Number of top simplices incident to `v`, by the corner-offset count
    /// `Σ_c |c|! (n − |c|)!` over admissible offsets `c`.
    pub fn vertex_star_size(&self, v: &[usize]) -> Result<usize, FkError> {
        if !self.is_vertex(v) {
            return Err(FkError::NotAVertex(v.to_vec()));
        }
        let n = self.n;
        let mut count = 0;
        for c in (0..n).map(|_| 0..=1usize).multi_cartesian_product() {
            if (0..n).all(|i| v[i] >= c[i] && v[i] - c[i] < self.p) {
                let k = c.iter().sum::<usize>();
                count += factorial(k) * factorial(n - k);
            }
        }
        Ok(count)
    }

    /// Largest Euclidean distance between vertices of `s`, in cube units.
    pub fn diameter(&self, s: &FkSimplex) -> f64 {
        let verts: Vec<Vec<f64>> = s.lattice_vertices().iter().map(|v| self.coords(v)).collect();
        let mut d = 0.0f64;
        for (a, b) in verts.iter().tuple_combinations() {
            let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
            d = d.max(sq.sqrt());
        }
        d
    }

    /// `|det(v₁ − v₀, …, vₙ − v₀)| / n!` in cube units.
    pub fn volume(&self, s: &FkSimplex) -> f64 {
        let verts = s.lattice_vertices();
        let n = self.n;
        let m = DMatrix::from_fn(n, n, |r, c| (verts[c + 1][r] as f64 - verts[0][r] as f64) / self.p as f64);
        m.determinant().abs() / factorial(n) as f64
    }

    /// For every codimension-1 face (as a sorted list of vertex ids), the
    /// number of top simplices containing it.
    pub fn facet_incidence(&self) -> HashMap<Vec<usize>, usize> {
        let mut counts = HashMap::new();
        for s in self.simplices() {
            let ids: Vec<usize> = s.lattice_vertices().iter().map(|v| self.vertex_id(v)).collect();
            for skip in 0..ids.len() {
                let mut face: Vec<usize> =
                    ids.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, &v)| v).collect();
                face.sort_unstable();
                *counts.entry(face).or_insert(0) += 1;
            }
        }
        counts
    }

    /// True when every vertex of the face lies on a common boundary
    /// hyperplane `xᵢ = 0` or `xᵢ = p`.
    pub fn is_boundary_face(&self, vertex_ids: &[usize]) -> bool {
        let verts: Vec<Vec<usize>> = vertex_ids.iter().map(|&id| self.vertex_from_id(id)).collect();
        (0..self.n).any(|i| verts.iter().all(|v| v[i] == 0) || verts.iter().all(|v| v[i] == self.p))
    }

    /// OFF mesh: vertices in lexicographic lattice order, then one line per
    /// simplex. Dimensions up to 3 use plain `OFF` with zero-padded 3D
    /// coordinates; higher dimensions use the `nOFF` header.
    pub fn to_off(&self, limit: usize) -> Result<String, FkError> {
        let count = self.simplex_count().filter(|&c| c <= limit).ok_or(FkError::TooLarge { limit })?;
        let mut out = String::new();
        let width = self.n.max(3);
        if self.n <= 3 {
            out.push_str("OFF\n");
        } else {
            let _ = writeln!(out, "nOFF\n{}", self.n);
        }
        let _ = writeln!(out, "{} {} 0", self.vertex_count(), count);
        for v in self.lattice_vertices() {
            let mut c = self.coords(&v);
            c.resize(width, 0.0);
            let _ = writeln!(out, "{}", c.iter().map(|x| x.to_string()).join(" "));
        }
        for s in self.simplices() {
            let ids = s.lattice_vertices().iter().map(|v| self.vertex_id(v).to_string()).join(" ");
            let _ = writeln!(out, "{} {}", self.n + 1, ids);
        }
        Ok(out)
    }
}

/// Lexicographic rank of a permutation of `0..n`.
fn perm_rank(perm: &[usize]) -> usize {
    let n = perm.len();
    let mut rank = 0;
    for i in 0..n {
        let smaller = perm[i + 1..].iter().filter(|&&x| x < perm[i]).count();
        rank += smaller * factorial(n - 1 - i);
    }
    rank
}

fn perm_unrank(n: usize, mut rank: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let f = factorial(n - 1 - i);
        out.push(pool.remove(rank / f));
        rank %= f;
    }
    out
}

/// True iff every top simplex is assigned a valid element id
/// (`assignment` is indexed by simplex id).
pub fn subordinate_to(tri: &FkTriangulation, assignment: &[Option<usize>], n_elements: usize) -> bool {
    Some(assignment.len()) == tri.simplex_count()
        && assignment.iter().all(|a| matches!(a, Some(id) if *id < n_elements))
}

/// Which cover elements contain the image of each point of a regular grid on
/// `[0, 1]ⁿ`. Grid point `k` sits at `k / (points_per_axis − 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipGrid {
    n: usize,
    points_per_axis: usize,
    words: usize,
    bits: Vec<u64>,
}

impl MembershipGrid {
    pub fn new(n: usize, points_per_axis: usize, n_elements: usize) -> Self {
        assert!(points_per_axis >= 2, "grid needs at least 2 points per axis");
        let words = n_elements.div_ceil(64).max(1);
        Self { n, points_per_axis, words, bits: vec![0; points_per_axis.pow(n as u32) * words] }
    }

    /// Builds a grid by evaluating a membership predicate at every point.
    pub fn from_fn(
        n: usize,
        points_per_axis: usize,
        n_elements: usize,
        mut member: impl FnMut(&[f64], usize) -> bool,
    ) -> Self {
        let mut g = Self::new(n, points_per_axis, n_elements);
        let denom = (points_per_axis - 1) as f64;
        for (idx, k) in (0..n).map(|_| 0..points_per_axis).multi_cartesian_product().enumerate() {
            let y: Vec<f64> = k.iter().map(|&c| c as f64 / denom).collect();
            for e in 0..n_elements {
                if member(&y, e) {
                    g.bits[idx * g.words + e / 64] |= 1 << (e % 64);
                }
            }
        }
        g
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn set(&mut self, k: &[usize], element: usize) {
        let idx = k.iter().fold(0, |acc, &c| acc * self.points_per_axis + c);
        self.bits[idx * self.words + element / 64] |= 1 << (element % 64);
    }

    fn row(&self, idx: usize) -> &[u64] {
        &self.bits[idx * self.words..(idx + 1) * self.words]
    }

    /// Simplex ids at resolution `p` whose closed simplex contains grid point `k`.
    fn containing_simplices(&self, tri: &FkTriangulation, k: &[usize]) -> Vec<usize> {
        let p = tri.resolution();
        let denom = self.points_per_axis - 1;
        // per axis: candidate (base, fractional numerator over denom)
        let options: Vec<Vec<(usize, usize)>> = k
            .iter()
            .map(|&kc| {
                let num = p * kc;
                let (q, r) = (num / denom, num % denom);
                let mut opts = Vec::with_capacity(2);
                if q < p {
                    opts.push((q, r));
                }
                if r == 0 && q >= 1 {
                    opts.push((q - 1, denom));
                }
                opts
            })
            .collect();
        let mut out = Vec::new();
        for choice in options.iter().map(|o| o.iter().copied()).multi_cartesian_product() {
            let base: Vec<usize> = choice.iter().map(|c| c.0).collect();
            let frac: Vec<usize> = choice.iter().map(|c| c.1).collect();
            for perm in (0..self.n).permutations(self.n) {
                if perm.windows(2).all(|w| frac[w[0]] >= frac[w[1]]) {
                    out.push(tri.simplex_id(&FkSimplex { base: base.clone(), perm }));
                }
            }
        }
        out
    }
}

/// Sampled Lebesgue-number surrogate.
///
/// Tries resolutions `p = 1, 2, 4, …, p_max` and returns `√n / p` for the
/// first one at which the grid samples inside every simplex share a common
/// cover element, or 0 if none does.
pub fn estimate_lebesgue(grid: &MembershipGrid, p_max: usize) -> f64 {
    let n = grid.dim();
    let mut p = 1;
    while p <= p_max.max(1) {
        let tri = FkTriangulation::new(n, p).expect("n, p >= 1");
        let mut common: HashMap<usize, Vec<u64>> = HashMap::new();
        for (idx, k) in (0..n).map(|_| 0..grid.points_per_axis).multi_cartesian_product().enumerate() {
            let row = grid.row(idx);
            for sid in grid.containing_simplices(&tri, &k) {
                common
                    .entry(sid)
                    .and_modify(|acc| acc.iter_mut().zip(row).for_each(|(a, b)| *a &= b))
                    .or_insert_with(|| row.to_vec());
            }
        }
        if common.values().all(|acc| acc.iter().any(|&w| w != 0)) {
            return tri.mesh_diameter();
        }
        p *= 2;
    }
    0.0
}
