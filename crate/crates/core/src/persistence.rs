//! Persistent homology over ℤ/2.
//!
//! Intervals follow the open convention of the filtrations: a class with
//! interval `(b, d)` is present in the sublevel `{σ : value(σ) < r}` exactly
//! when `b < r ≤ d`. Diagrams are reported undecorated.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt::Write as _;

use petgraph::algo::maximum_matching;
use petgraph::graph::UnGraph;
use serde::Serialize;
use thiserror::Error;

use crate::complex::FilteredComplex;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PersistenceError {
    #[error("homology in dimension {max_dim} needs simplices up to dimension {needed}, complex stops at {available}")]
    SkeletonTooShallow { max_dim: usize, needed: usize, available: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub dim: usize,
    pub birth: f64,
    /// `f64::INFINITY` for essential classes.
    pub death: f64,
}

impl Interval {
    pub fn is_essential(&self) -> bool {
        self.death == f64::INFINITY
    }

    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    /// Open-convention liveness: `b < r ≤ d`.
    pub fn alive_at(&self, r: f64) -> bool {
        self.birth < r && r <= self.death
    }

    fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.dim.cmp(&other.dim).then(self.birth.total_cmp(&other.birth)).then(self.death.total_cmp(&other.death))
    }
}

/// A multiset of intervals in canonical order (dimension, birth, death).
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct PersistenceDiagram {
    intervals: Vec<Interval>,
}

impl PersistenceDiagram {
    pub fn new(mut intervals: Vec<Interval>) -> Self {
        intervals.sort_by(Interval::canonical_cmp);
        Self { intervals }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn in_dim(&self, dim: usize) -> impl Iterator<Item = &Interval> {
        self.intervals.iter().filter(move |i| i.dim == dim)
    }

    pub fn max_dim(&self) -> Option<usize> {
        self.intervals.iter().map(|i| i.dim).max()
    }

    /// Rank of homology in `dim` at threshold `r` read off the diagram.
    pub fn rank_at(&self, dim: usize, r: f64) -> usize {
        self.in_dim(dim).filter(|i| i.alive_at(r)).count()
    }

    /// CSV with header `dim,birth,death`; `inf` marks essential classes.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dim,birth,death\n");
        for i in &self.intervals {
            let death = if i.is_essential() { "inf".to_string() } else { i.death.to_string() };
            let _ = writeln!(out, "{},{},{}", i.dim, i.birth, death);
        }
        out
    }
}

/// ℤ/2 boundary matrix with columns in filtration order: value, then
/// dimension, then lexicographic vertex order.
#[derive(Debug, Clone)]
pub struct BoundaryMatrix {
    /// Index into the complex's simplex list for each column.
    order: Vec<usize>,
    dims: Vec<usize>,
    values: Vec<f64>,
    /// Row indices (filtration positions) of the codimension-1 faces, ascending.
    columns: Vec<Vec<usize>>,
}

impl BoundaryMatrix {
    /// Builds the matrix over all simplices of dimension at most `top_dim`.
    pub fn new(complex: &FilteredComplex, top_dim: usize) -> Self {
        let simplices = complex.simplices();
        let mut order: Vec<usize> = (0..simplices.len()).filter(|&i| simplices[i].dim() <= top_dim).collect();
        order.sort_by(|&a, &b| {
            let (sa, sb) = (&simplices[a], &simplices[b]);
            sa.value
                .total_cmp(&sb.value)
                .then(sa.vertices.len().cmp(&sb.vertices.len()))
                .then_with(|| sa.vertices.cmp(&sb.vertices))
        });
        let mut filtration_pos = vec![usize::MAX; simplices.len()];
        for (pos, &i) in order.iter().enumerate() {
            filtration_pos[i] = pos;
        }
        let mut columns = Vec::with_capacity(order.len());
        for &i in &order {
            let verts = &simplices[i].vertices;
            let mut col = Vec::with_capacity(verts.len());
            if verts.len() > 1 {
                for skip in 0..verts.len() {
                    let face: Vec<usize> =
                        verts.iter().enumerate().filter(|(k, _)| *k != skip).map(|(_, &v)| v).collect();
                    let idx = complex.position(&face).expect("complex is closed under faces");
                    col.push(filtration_pos[idx]);
                }
                col.sort_unstable();
            }
            columns.push(col);
        }
        let dims = order.iter().map(|&i| simplices[i].dim()).collect();
        let values = order.iter().map(|&i| simplices[i].value).collect();
        Self { order, dims, values, columns }
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn column(&self, j: usize) -> &[usize] {
        &self.columns[j]
    }

    pub fn dim(&self, j: usize) -> usize {
        self.dims[j]
    }

    pub fn value(&self, j: usize) -> f64 {
        self.values[j]
    }

    /// Index of column `j`'s simplex in the complex.
    pub fn simplex_index(&self, j: usize) -> usize {
        self.order[j]
    }

    /// Standard left-to-right column reduction. Returns `(birth, death)`
    /// column pairs and the unpaired columns.
    pub fn reduce(&self) -> (Vec<(usize, usize)>, Vec<usize>) {
        let mut reduced: Vec<Vec<usize>> = self.columns.clone();
        let mut owner_of_low: HashMap<usize, usize> = HashMap::new();
        let mut pairs = Vec::new();
        for j in 0..reduced.len() {
            let mut col = std::mem::take(&mut reduced[j]);
            while let Some(&low) = col.last() {
                match owner_of_low.get(&low) {
                    Some(&k) => col = symmetric_difference(&col, &reduced[k]),
                    None => break,
                }
            }
            if let Some(&low) = col.last() {
                owner_of_low.insert(low, j);
                pairs.push((low, j));
            }
            reduced[j] = col;
        }
        let mut paired = vec![false; reduced.len()];
        for &(b, d) in &pairs {
            paired[b] = true;
            paired[d] = true;
        }
        let unpaired = (0..reduced.len()).filter(|&j| !paired[j]).collect();
        (pairs, unpaired)
    }
}

fn symmetric_difference(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Persistence diagram of the filtration in dimensions `0..=max_dim`.
///
/// The complex must contain simplices up to dimension `max_dim + 1` (its
/// build cap); zero-length intervals are dropped.
pub fn compute_diagram(complex: &FilteredComplex, max_dim: usize) -> Result<PersistenceDiagram, PersistenceError> {
    if complex.k_max() < max_dim + 1 {
        return Err(PersistenceError::SkeletonTooShallow { max_dim, needed: max_dim + 1, available: complex.k_max() });
    }
    let matrix = BoundaryMatrix::new(complex, max_dim + 1);
    let (pairs, unpaired) = matrix.reduce();
    let mut intervals = Vec::new();
    for (b, d) in pairs {
        let (birth, death) = (matrix.value(b), matrix.value(d));
        if birth < death {
            intervals.push(Interval { dim: matrix.dim(b), birth, death });
        }
    }
    for j in unpaired {
        if matrix.dim(j) <= max_dim {
            intervals.push(Interval { dim: matrix.dim(j), birth: matrix.value(j), death: f64::INFINITY });
        }
    }
    Ok(PersistenceDiagram::new(intervals))
}

/// Betti number of the strict sublevel `{σ : value(σ) < r}` in `dim`, by
/// Gaussian elimination of the boundary maps `∂_dim` and `∂_{dim+1}`.
///
/// Counts homology of the stored complex; for the true answer the complex
/// must contain the `(dim + 1)`-skeleton.
pub fn betti_at(complex: &FilteredComplex, r: f64, dim: usize) -> usize {
    let level: Vec<&[usize]> = complex.sublevel(r).map(|s| s.vertices.as_slice()).collect();
    let of_dim = |k: usize| -> Vec<&[usize]> { level.iter().copied().filter(|v| v.len() == k + 1).collect() };
    let chains = of_dim(dim);
    if chains.is_empty() {
        return 0;
    }
    let rank_out = if dim == 0 { 0 } else { boundary_rank(&of_dim(dim - 1), &chains) };
    let rank_in = boundary_rank(&chains, &of_dim(dim + 1));
    chains.len() - rank_out - rank_in
}

/// Rank over ℤ/2 of the boundary map from `cols` to `rows` (faces).
fn boundary_rank(rows: &[&[usize]], cols: &[&[usize]]) -> usize {
    if rows.is_empty() || cols.is_empty() {
        return 0;
    }
    let row_index: HashMap<&[usize], usize> = rows.iter().enumerate().map(|(i, &r)| (r, i)).collect();
    let words = rows.len().div_ceil(64);
    let mut matrix: Vec<Vec<u64>> = cols
        .iter()
        .map(|c| {
            let mut bits = vec![0u64; words];
            for skip in 0..c.len() {
                let face: Vec<usize> = c.iter().enumerate().filter(|(k, _)| *k != skip).map(|(_, &v)| v).collect();
                if let Some(&i) = row_index.get(face.as_slice()) {
                    bits[i / 64] ^= 1 << (i % 64);
                }
            }
            bits
        })
        .collect();
    let mut rank = 0;
    for bit in 0..rows.len() {
        let (w, mask) = (bit / 64, 1u64 << (bit % 64));
        let Some(p) = (rank..matrix.len()).find(|&k| matrix[k][w] & mask != 0) else { continue };
        matrix.swap(rank, p);
        let pivot = matrix[rank].clone();
        for (k, row) in matrix.iter_mut().enumerate() {
            if k != rank && row[w] & mask != 0 {
                row.iter_mut().zip(&pivot).for_each(|(a, b)| *a ^= b);
            }
        }
        rank += 1;
    }
    rank
}

/// Bottleneck distance over all dimensions.
///
/// Finite points may be matched to the diagonal at cost `(d − b) / 2`;
/// essential classes are matched by birth within each dimension, and a
/// mismatch in their counts gives `∞`.
pub fn diagram_distance(a: &PersistenceDiagram, b: &PersistenceDiagram) -> f64 {
    let dims = a.max_dim().max(b.max_dim()).map_or(0, |d| d + 1);
    let mut worst = 0.0f64;
    for dim in 0..dims {
        let split = |d: &PersistenceDiagram| {
            let (ess, fin): (Vec<Interval>, Vec<Interval>) = d.in_dim(dim).copied().partition(Interval::is_essential);
            (ess.into_iter().map(|i| i.birth).collect::<Vec<_>>(), fin)
        };
        let (mut ea, fa) = split(a);
        let (mut eb, fb) = split(b);
        if ea.len() != eb.len() {
            return f64::INFINITY;
        }
        ea.sort_by(f64::total_cmp);
        eb.sort_by(f64::total_cmp);
        for (x, y) in ea.iter().zip(&eb) {
            worst = worst.max((x - y).abs());
        }
        worst = worst.max(finite_bottleneck(&fa, &fb));
    }
    worst
}

fn finite_bottleneck(a: &[Interval], b: &[Interval]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let pair_cost = |x: &Interval, y: &Interval| (x.birth - y.birth).abs().max((x.death - y.death).abs());
    let diag_cost = |x: &Interval| x.persistence() / 2.0;
    let mut candidates: Vec<f64> = a.iter().chain(b).map(diag_cost).collect();
    for x in a {
        for y in b {
            candidates.push(pair_cost(x, y));
        }
    }
    candidates.push(0.0);
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    // left: a then diagonal copies of b; right: b then diagonal copies of a
    let (na, nb) = (a.len(), b.len());
    let feasible = |eps: f64| {
        let mut g = UnGraph::<(), ()>::with_capacity(2 * (na + nb), 0);
        let left: Vec<_> = (0..na + nb).map(|_| g.add_node(())).collect();
        let right: Vec<_> = (0..na + nb).map(|_| g.add_node(())).collect();
        for i in 0..na {
            for j in 0..nb {
                if pair_cost(&a[i], &b[j]) <= eps {
                    g.add_edge(left[i], right[j], ());
                }
            }
            if diag_cost(&a[i]) <= eps {
                g.add_edge(left[i], right[nb + i], ());
            }
        }
        for j in 0..nb {
            if diag_cost(&b[j]) <= eps {
                g.add_edge(left[na + j], right[j], ());
            }
            for i in 0..na {
                g.add_edge(left[na + j], right[nb + i], ());
            }
        }
        maximum_matching(&g).is_perfect()
    };
    let (mut lo, mut hi) = (0, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo]
}
