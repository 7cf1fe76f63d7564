//! Straightening sampled maps `Iⁿ → {probability measures on X}` into
//! simplexwise-affine maps whose simplices land in the Vietoris complex of a
//! cover.
//!
//! Pipeline: pick a concentration threshold, estimate a subordinate
//! resolution from grid samples, triangulate, label every top simplex by a
//! cover element, pump each vertex measure into the intersection of its
//! star's labels, then interpolate linearly. Every stage appends checks to a
//! [`CertificationLog`].

use std::fmt;

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::fk::{alpha, estimate_lebesgue, FkError, FkSimplex, FkTriangulation, MembershipGrid};
use crate::measure::{barycentric_distance, convex_sum, FiniteMeasure, MeasureError};
use crate::metric::{Cover, FiniteMetricSpace, MetricError, PointSet};
use crate::thickening::{in_m_u, pump, pump_homotopy, shrink_to_inner, BumpFunction, ThickeningError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StraightenError {
    #[error("no cover element holds mass > {p} on every sample of simplex {simplex} (resolution {resolution})")]
    NoLabel { simplex: FkSimplex, resolution: usize, p: f64 },
    #[error("vertex supports of simplex {simplex_id} leave its label at points {outside:?}")]
    NotSubordinate { simplex_id: usize, outside: Vec<usize> },
    #[error("intersection mass {mass} does not exceed the bound {bound}")]
    BoundViolated { mass: f64, bound: f64 },
    #[error("vertex {vertex} has no mass on the intersection of its labels")]
    ZeroMass { vertex: usize },
    #[error("map values must live on a space with {expected} points, found index {found}")]
    ForeignMeasure { expected: usize, found: usize },
    #[error("map dimension {map} does not match requested dimension {requested}")]
    DimensionMismatch { map: usize, requested: usize },
    #[error("expected {expected} lattice values, got {got}")]
    WrongValueCount { expected: usize, got: usize },
    #[error("unknown generator {0:?}")]
    UnknownGenerator(String),
    #[error(transparent)]
    Thickening(#[from] ThickeningError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Fk(#[from] FkError),
}

impl StraightenError {
    /// Name of the pipeline stage that raised the error.
    pub fn stage(&self) -> &'static str {
        match self {
            Self::NoLabel { .. } => "label",
            Self::NotSubordinate { .. } => "linearize",
            Self::BoundViolated { .. } => "intersection_bound",
            Self::ZeroMass { .. } | Self::Thickening(_) => "pump",
            Self::Metric(_) => "cover",
            Self::Fk(_) => "triangulate",
            Self::ForeignMeasure { .. }
            | Self::DimensionMismatch { .. }
            | Self::WrongValueCount { .. }
            | Self::UnknownGenerator(_)
            | Self::Measure(_) => "input",
        }
    }
}

/// A map from the unit cube into probability measures on a fixed space.
pub trait SourceMap: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, y: &[f64]) -> FiniteMeasure;
}

/// A map given by measures at the vertices of a Freudenthal–Kuhn lattice and
/// interpolated linearly on each simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearMap {
    tri: FkTriangulation,
    values: Vec<FiniteMeasure>,
}

impl PiecewiseLinearMap {
    /// `values` are in lexicographic lattice order, `(resolution + 1)ⁿ` of them.
    pub fn new(dim: usize, resolution: usize, values: Vec<FiniteMeasure>) -> Result<Self, StraightenError> {
        let tri = FkTriangulation::new(dim, resolution)?;
        if values.len() != tri.vertex_count() {
            return Err(StraightenError::WrongValueCount { expected: tri.vertex_count(), got: values.len() });
        }
        Ok(Self { tri, values })
    }

    /// Samples `f` at every lattice vertex.
    pub fn from_fn(
        dim: usize,
        resolution: usize,
        f: impl Fn(&[f64]) -> FiniteMeasure,
    ) -> Result<Self, StraightenError> {
        let tri = FkTriangulation::new(dim, resolution)?;
        let values = tri.lattice_vertices().map(|v| f(&tri.coords(&v))).collect();
        Ok(Self { tri, values })
    }

    pub fn triangulation(&self) -> &FkTriangulation {
        &self.tri
    }

    pub fn values(&self) -> &[FiniteMeasure] {
        &self.values
    }

    pub fn check_in(&self, space: &FiniteMetricSpace) -> Result<(), StraightenError> {
        for mu in &self.values {
            if let Some(&x) = mu.support().iter().find(|&&x| x >= space.len()) {
                return Err(StraightenError::ForeignMeasure { expected: space.len(), found: x });
            }
        }
        Ok(())
    }
}

impl SourceMap for PiecewiseLinearMap {
    fn dim(&self) -> usize {
        self.tri.dim()
    }

    fn eval(&self, y: &[f64]) -> FiniteMeasure {
        let loc = self.tri.locate(y).expect("evaluation point inside the unit cube");
        let verts = loc.simplex.lattice_vertices();
        let terms: Vec<(f64, &FiniteMeasure)> =
            verts.iter().zip(&loc.bary).map(|(v, &l)| (l, &self.values[self.tri.vertex_id(v)])).collect();
        convex_sum(&terms).expect("convex weights")
    }
}

/// A source map sampled on a triangulation: exact values at the vertices,
/// plus dense samples on demand at the barycentric lattice of depth `depth`.
pub struct SampledMap<'a> {
    source: &'a dyn SourceMap,
    tri: FkTriangulation,
    values: Vec<FiniteMeasure>,
    depth: usize,
}

impl<'a> SampledMap<'a> {
    pub fn new(source: &'a dyn SourceMap, tri: FkTriangulation, depth: usize) -> Self {
        let verts: Vec<Vec<usize>> = tri.lattice_vertices().collect();
        let values = verts.par_iter().map(|v| source.eval(&tri.coords(v))).collect();
        Self { source, tri, values, depth: depth.max(1) }
    }

    pub fn triangulation(&self) -> &FkTriangulation {
        &self.tri
    }

    pub fn values(&self) -> &[FiniteMeasure] {
        &self.values
    }

    pub fn value(&self, vertex_id: usize) -> &FiniteMeasure {
        &self.values[vertex_id]
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Source values at every point `Σ (kᵢ / depth) vᵢ` of `s`. Vertex samples
    /// reuse the stored vertex values.
    pub fn samples(&self, s: &FkSimplex) -> Vec<(Vec<f64>, FiniteMeasure)> {
        let verts = s.lattice_vertices();
        barycentric_lattice(self.tri.dim(), self.depth)
            .into_iter()
            .map(|bary| {
                let value = match bary.iter().position(|&l| l == 1.0) {
                    Some(k) => self.values[self.tri.vertex_id(&verts[k])].clone(),
                    None => self.source.eval(&self.tri.point_from_bary(s, &bary)),
                };
                (bary, value)
            })
            .collect()
    }
}

/// All barycentric coordinate vectors `k / depth` with `Σ k = depth`, for an
/// `n`-simplex, in lexicographic order of `k`.
pub fn barycentric_lattice(n: usize, depth: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for k in (0..=n).map(|_| 0..=depth).multi_cartesian_product() {
        if k.iter().sum::<usize>() == depth {
            out.push(k.iter().map(|&c| c as f64 / depth as f64).collect());
        }
    }
    out
}

/// `1 − 1/(2 α(n))`, strictly between `1 − 1/α(n)` and 1.
pub fn choose_p(n: usize) -> f64 {
    1.0 - 1.0 / (2.0 * alpha(n) as f64)
}

/// A cover element id for every top simplex (indexed by simplex id).
#[derive(Debug, Clone, PartialEq)]
pub struct Labeling {
    labels: Vec<usize>,
    /// Smallest labelled-element mass over the samples of each simplex.
    margins: Vec<f64>,
}

impl Labeling {
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, simplex_id: usize) -> usize {
        self.labels[simplex_id]
    }

    pub fn margin(&self, simplex_id: usize) -> f64 {
        self.margins[simplex_id]
    }

    /// Distinct labels over the star of a vertex, ascending.
    pub fn star_labels(&self, tri: &FkTriangulation, vertex: &[usize]) -> Result<Vec<usize>, FkError> {
        let star = tri.vertex_star(vertex)?;
        Ok(star.iter().map(|s| self.labels[tri.simplex_id(s)]).sorted().dedup().collect())
    }

    /// Distinct labels over the top simplices containing every vertex of `face`.
    pub fn face_star_labels(&self, tri: &FkTriangulation, face: &[Vec<usize>]) -> Result<Vec<usize>, FkError> {
        let Some(first) = face.first() else { return Ok(self.labels.iter().copied().sorted().dedup().collect()) };
        let star = tri.vertex_star(first)?;
        Ok(star
            .iter()
            .filter(|s| {
                let verts = s.lattice_vertices();
                face.iter().all(|v| verts.contains(v))
            })
            .map(|s| self.labels[tri.simplex_id(s)])
            .sorted()
            .dedup()
            .collect())
    }
}

/// Labels each top simplex by the smallest element id on which every sample
/// carries mass `> p`.
pub fn label_simplices(map: &SampledMap<'_>, elements: &[PointSet], p: f64) -> Result<Labeling, StraightenError> {
    let tri = *map.triangulation();
    let count = tri.simplex_count().ok_or(FkError::TooLarge { limit: usize::MAX })?;
    let results: Vec<Result<(usize, f64), FkSimplex>> = (0..count)
        .into_par_iter()
        .map(|id| {
            let s = tri.simplex_from_id(id);
            let samples = map.samples(&s);
            for (e, u) in elements.iter().enumerate() {
                let margin = samples.iter().map(|(_, mu)| mu.mass(u)).fold(f64::INFINITY, f64::min);
                if margin > p {
                    return Ok((e, margin));
                }
            }
            Err(s)
        })
        .collect();
    let mut labels = Vec::with_capacity(count);
    let mut margins = Vec::with_capacity(count);
    for r in results {
        match r {
            Ok((e, m)) => {
                labels.push(e);
                margins.push(m);
            }
            Err(simplex) => return Err(StraightenError::NoLabel { simplex, resolution: tri.resolution(), p }),
        }
    }
    Ok(Labeling { labels, margins })
}

/// `μ(⋂ labels)`, checked against `1 − N(1 − p)` with `N = labels.len()`.
pub fn intersection_mass_bound(mu: &FiniteMeasure, labels: &[PointSet], p: f64) -> Result<f64, StraightenError> {
    let bound = 1.0 - labels.len() as f64 * (1.0 - p);
    let mass = match labels.split_first() {
        None => 1.0,
        Some((first, rest)) => mu.mass(&rest.iter().fold(first.clone(), |acc, u| acc.intersection(u))),
    };
    if mass > bound {
        Ok(mass)
    } else {
        Err(StraightenError::BoundViolated { mass, bound })
    }
}

/// Track times for pumping homotopies.
pub const TRACK_TIMES: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Result of pumping one vertex measure into the intersection of its labels.
#[derive(Debug, Clone, PartialEq)]
pub struct PumpedVertex {
    pub original: FiniteMeasure,
    pub pumped: FiniteMeasure,
    pub target: PointSet,
    /// `μ(target)` before pumping.
    pub intersection_mass: f64,
    pub mass_bound: f64,
    /// `(t, (1 − t) μ + t · pump(μ))` at each track time.
    pub track: Vec<(f64, FiniteMeasure)>,
    /// Smallest mass any track point puts on any label.
    pub track_min: f64,
    /// Shrink index `i` of the plateau, 0 when no pumping was needed.
    pub shrink_index: usize,
}

impl PumpedVertex {
    pub fn unchanged(&self) -> bool {
        self.pumped == self.original
    }
}

/// Pumps `mu` into `U = ⋂ labels`.
///
/// A measure already supported in `U` is returned as is. Otherwise the
/// plateau is the inner set `Vᵢ ⊆ U` carrying mass above the intersection
/// bound, and the bump vanishes exactly off `U`.
pub fn pump_vertex(
    space: &FiniteMetricSpace,
    mu: &FiniteMeasure,
    labels: &[PointSet],
    p: f64,
) -> Result<PumpedVertex, StraightenError> {
    let target = match labels.split_first() {
        None => PointSet::full(space.len()),
        Some((first, rest)) => rest.iter().fold(first.clone(), |acc, u| acc.intersection(u)),
    };
    let mass_bound = 1.0 - labels.len() as f64 * (1.0 - p);
    let intersection_mass = mu.mass(&target);
    let (pumped, shrink_index) = if in_m_u(mu, &target) {
        (mu.clone(), 0)
    } else {
        if !(intersection_mass > 0.0) {
            return Err(ThickeningError::ZeroMass.into());
        }
        let q = mass_bound.clamp(0.0, intersection_mass * (1.0 - f64::EPSILON));
        let (i, inner) = shrink_to_inner(space, std::slice::from_ref(mu), q, &target)?;
        let phi = BumpFunction::build(space, &inner, &target)?;
        (pump(mu, &phi)?, i)
    };
    let mut track = Vec::with_capacity(TRACK_TIMES.len());
    for &t in &TRACK_TIMES {
        let point = if pumped == *mu { mu.clone() } else { crate::measure::convex_combine(mu, &pumped, t)? };
        track.push((t, point));
    }
    let track_min = track
        .iter()
        .flat_map(|(_, m)| labels.iter().map(move |u| m.mass(u)))
        .fold(if labels.is_empty() { 1.0 } else { f64::INFINITY }, f64::min);
    Ok(PumpedVertex {
        original: mu.clone(),
        pumped,
        target,
        intersection_mass,
        mass_bound,
        track,
        track_min,
        shrink_index,
    })
}

/// Track of the pumping homotopy for an explicit bump, at [`TRACK_TIMES`].
pub fn pump_track(mu: &FiniteMeasure, phi: &BumpFunction) -> Result<Vec<FiniteMeasure>, ThickeningError> {
    TRACK_TIMES.iter().map(|&t| pump_homotopy(mu, phi, t)).collect()
}

/// The map `Σ xᵢ vᵢ ↦ Σ xᵢ · value(vᵢ)` on each simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexwiseAffineMap {
    tri: FkTriangulation,
    values: Vec<FiniteMeasure>,
}

impl SimplexwiseAffineMap {
    pub fn triangulation(&self) -> &FkTriangulation {
        &self.tri
    }

    pub fn vertex_values(&self) -> &[FiniteMeasure] {
        &self.values
    }

    pub fn eval_in(&self, s: &FkSimplex, bary: &[f64]) -> FiniteMeasure {
        let verts = s.lattice_vertices();
        if let Some(k) = bary.iter().position(|&l| l == 1.0) {
            return self.values[self.tri.vertex_id(&verts[k])].clone();
        }
        let terms: Vec<(f64, &FiniteMeasure)> =
            verts.iter().zip(bary).map(|(v, &l)| (l, &self.values[self.tri.vertex_id(v)])).collect();
        convex_sum(&terms).expect("convex weights")
    }

    pub fn eval(&self, y: &[f64]) -> Result<FiniteMeasure, FkError> {
        let loc = self.tri.locate(y)?;
        Ok(self.eval_in(&loc.simplex, &loc.bary))
    }

    /// Union of vertex supports over a simplex.
    pub fn simplex_support(&self, s: &FkSimplex) -> PointSet {
        s.lattice_vertices().iter().flat_map(|v| self.values[self.tri.vertex_id(v)].support().to_vec()).collect()
    }
}

/// Builds the simplexwise-affine map, requiring every simplex's vertex
/// supports to lie in its label.
pub fn linearize(
    tri: FkTriangulation,
    values: Vec<FiniteMeasure>,
    labeling: &Labeling,
    elements: &[PointSet],
) -> Result<SimplexwiseAffineMap, StraightenError> {
    let map = SimplexwiseAffineMap { tri, values };
    for (id, s) in tri.simplices().enumerate() {
        let label = &elements[labeling.label(id)];
        let outside: Vec<usize> = map.simplex_support(&s).iter().copied().filter(|&x| !label.contains(x)).collect();
        if !outside.is_empty() {
            return Err(StraightenError::NotSubordinate { simplex_id: id, outside });
        }
    }
    Ok(map)
}

/// Central projection of `Δⁿ × I` onto `Δⁿ × {0} ∪ ∂Δⁿ × I` from the point
/// `(barycenter, 2)`. `x` is barycentric.
pub fn prism_retract(x: &[f64], t: f64) -> (Vec<f64>, f64) {
    let b = 1.0 / x.len() as f64;
    let mut s_star = 2.0 / (2.0 - t);
    let mut hit: Option<usize> = None;
    for (i, &xi) in x.iter().enumerate() {
        if xi < b {
            let s = b / (b - xi);
            if s <= s_star {
                s_star = s;
                hit = Some(i);
            }
        }
    }
    let mut y: Vec<f64> = x.iter().map(|&xi| (b + s_star * (xi - b)).max(0.0)).collect();
    let time = match hit {
        Some(i) => {
            y[i] = 0.0;
            (2.0 + s_star * (t - 2.0)).max(0.0)
        }
        None => 0.0,
    };
    let total: f64 = y.iter().sum();
    if total > 0.0 && total != 1.0 {
        y.iter_mut().for_each(|c| *c /= total);
    }
    (y, time)
}

/// One certification check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub stage: &'static str,
    pub id: usize,
    pub quantity: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Ordered list of checks, one JSON object per line when serialized.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CertificationLog {
    records: Vec<CheckRecord>,
}

impl CertificationLog {
    pub fn push(&mut self, stage: &'static str, id: usize, quantity: f64, threshold: f64, pass: bool) {
        self.records.push(CheckRecord { stage, id, quantity, threshold, pass });
    }

    pub fn records(&self) -> &[CheckRecord] {
        &self.records
    }

    pub fn passed(&self) -> usize {
        self.records.iter().filter(|r| r.pass).count()
    }

    pub fn failed(&self) -> usize {
        self.records.len() - self.passed()
    }

    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn stage(&self, stage: &str) -> impl Iterator<Item = &CheckRecord> + '_ {
        let stage = stage.to_string();
        self.records.iter().filter(move |r| r.stage == stage)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("plain record"));
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for CertificationLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} checks, {} passed, {} failed", self.records.len(), self.passed(), self.failed())
    }
}

#[derive(Debug, Clone)]
pub struct StraightenConfig {
    /// Concentration threshold; defaults to [`choose_p`].
    pub p_mass: Option<f64>,
    /// Grid points per axis for the Lebesgue estimate; defaults by dimension.
    pub grid_points: Option<usize>,
    /// Finest resolution tried by the Lebesgue estimate.
    pub lebesgue_max: usize,
    /// Finest resolution tried when labeling fails.
    pub max_resolution: usize,
    /// Dense sample depth per simplex.
    pub depth: usize,
    /// Upper bound on the number of top simplices.
    pub simplex_limit: usize,
}

impl Default for StraightenConfig {
    fn default() -> Self {
        Self {
            p_mass: None,
            grid_points: None,
            lebesgue_max: 1024,
            max_resolution: 64,
            depth: 3,
            simplex_limit: 1_000_000,
        }
    }
}

fn default_grid_points(n: usize) -> usize {
    match n {
        1 => 65,
        2 => 33,
        3 => 9,
        _ => 5,
    }
}

/// Everything the pipeline produces on success.
#[derive(Debug, Clone)]
pub struct Straightened {
    pub map: SimplexwiseAffineMap,
    pub labeling: Labeling,
    pub pumped: Vec<PumpedVertex>,
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub dim: usize,
    pub p_mass: f64,
    pub epsilon: f64,
    pub resolutions_tried: Vec<usize>,
    pub resolution: Option<usize>,
    pub simplices: usize,
    pub vertices: usize,
    pub unchanged_vertices: usize,
    pub checks: usize,
    pub passed: usize,
    pub failed: usize,
    pub status: &'static str,
    pub failed_stage: Option<&'static str>,
    pub message: Option<String>,
}

/// Pipeline output: the log is always available, the map only on success.
#[derive(Debug, Clone)]
pub struct StraightenReport {
    pub log: CertificationLog,
    pub summary: Summary,
    pub outcome: Result<Straightened, StraightenError>,
}

/// Runs the full pipeline.
pub fn straighten(
    space: &FiniteMetricSpace,
    cover: &Cover,
    source: &dyn SourceMap,
    config: &StraightenConfig,
) -> StraightenReport {
    let n = source.dim();
    let p = config.p_mass.unwrap_or_else(|| choose_p(n));
    let mut log = CertificationLog::default();
    let mut summary = Summary {
        dim: n,
        p_mass: p,
        epsilon: 0.0,
        resolutions_tried: Vec::new(),
        resolution: None,
        simplices: 0,
        vertices: 0,
        unchanged_vertices: 0,
        checks: 0,
        passed: 0,
        failed: 0,
        status: "ok",
        failed_stage: None,
        message: None,
    };
    let outcome = run(space, cover, source, config, p, &mut log, &mut summary);
    summary.checks = log.records().len();
    summary.passed = log.passed();
    summary.failed = log.failed();
    let outcome = match outcome {
        Ok(mut s) if log.all_pass() => {
            s.summary = summary.clone();
            Ok(s)
        }
        Ok(s) => {
            summary.status = "failed";
            let stage = log.records().iter().find(|r| !r.pass).map(|r| r.stage).unwrap_or("certify");
            summary.failed_stage = Some(stage);
            summary.message = Some(format!("check failed in stage {stage}"));
            let mut s = s;
            s.summary = summary.clone();
            Ok(s)
        }
        Err(e) => {
            summary.status = "failed";
            summary.failed_stage = Some(e.stage());
            summary.message = Some(e.to_string());
            Err(e)
        }
    };
    StraightenReport { log, summary, outcome }
}

fn run(
    space: &FiniteMetricSpace,
    cover: &Cover,
    source: &dyn SourceMap,
    config: &StraightenConfig,
    p: f64,
    log: &mut CertificationLog,
    summary: &mut Summary,
) -> Result<Straightened, StraightenError> {
    let n = source.dim();
    let lower = 1.0 - 1.0 / alpha(n) as f64;
    log.push("choose_p", 0, p, lower, p > lower && p < 1.0);

    let elements = cover.elements(space)?;

    let g = config.grid_points.unwrap_or_else(|| default_grid_points(n)).max(2);
    let grid = {
        let pts: Vec<Vec<usize>> = (0..n).map(|_| 0..g).multi_cartesian_product().collect();
        let rows: Vec<Vec<bool>> = pts
            .par_iter()
            .map(|k| {
                let y: Vec<f64> = k.iter().map(|&c| c as f64 / (g - 1) as f64).collect();
                let mu = source.eval(&y);
                elements.iter().map(|u| mu.mass(u) > p).collect()
            })
            .collect();
        let mut grid = MembershipGrid::new(n, g, elements.len());
        for (k, row) in pts.iter().zip(&rows) {
            for (e, &hit) in row.iter().enumerate() {
                if hit {
                    grid.set(k, e);
                }
            }
        }
        grid
    };
    let epsilon = estimate_lebesgue(&grid, config.lebesgue_max);
    summary.epsilon = epsilon;
    log.push("estimate_lebesgue", 0, epsilon, 0.0, epsilon > 0.0);

    let start = if epsilon > 0.0 { ((n as f64).sqrt() / epsilon).round() as usize } else { config.max_resolution };
    let mut res = start.clamp(1, config.max_resolution.max(1));
    let (sampled, labeling) = loop {
        let tri = FkTriangulation::new(n, res)?;
        if tri.simplex_count().is_none_or(|c| c > config.simplex_limit) {
            return Err(FkError::TooLarge { limit: config.simplex_limit }.into());
        }
        summary.resolutions_tried.push(res);
        let sampled = SampledMap::new(source, tri, config.depth);
        match label_simplices(&sampled, &elements, p) {
            Ok(l) => break (sampled, l),
            Err(_) if res * 2 <= config.max_resolution => res *= 2,
            Err(e) => return Err(e),
        }
    };
    let tri = *sampled.triangulation();
    summary.resolution = Some(res);
    summary.simplices = labeling.labels().len();
    summary.vertices = tri.vertex_count();
    for id in 0..labeling.labels().len() {
        log.push("label", id, labeling.margin(id), p, labeling.margin(id) > p);
    }

    let vertices: Vec<Vec<usize>> = tri.lattice_vertices().collect();
    let pumped: Vec<Result<PumpedVertex, StraightenError>> = vertices
        .par_iter()
        .enumerate()
        .map(|(id, v)| {
            let labels: Vec<PointSet> =
                labeling.star_labels(&tri, v)?.into_iter().map(|e| elements[e].clone()).collect();
            pump_vertex(space, sampled.value(id), &labels, p).map_err(|e| match e {
                StraightenError::Thickening(ThickeningError::ZeroMass) => StraightenError::ZeroMass { vertex: id },
                other => other,
            })
        })
        .collect();
    let pumped: Vec<PumpedVertex> = pumped.into_iter().collect::<Result<_, _>>()?;
    for (id, pv) in pumped.iter().enumerate() {
        log.push("intersection_bound", id, pv.intersection_mass, pv.mass_bound, pv.intersection_mass > pv.mass_bound);
    }
    for (id, pv) in pumped.iter().enumerate() {
        log.push("pump_support", id, pv.pumped.mass(&pv.target), 1.0, in_m_u(&pv.pumped, &pv.target));
    }
    for (id, pv) in pumped.iter().enumerate() {
        log.push("pump_track", id, pv.track_min, p, pv.track_min > p);
    }
    for (id, (v, pv)) in vertices.iter().zip(&pumped).enumerate() {
        if tri.is_boundary_vertex(v) && in_m_u(&pv.original, &pv.target) {
            let moved = barycentric_distance(&pv.original, &pv.pumped);
            log.push("boundary_fixed", id, moved, 0.0, pv.unchanged());
        }
    }
    summary.unchanged_vertices = pumped.iter().filter(|pv| pv.unchanged()).count();

    let values = pumped.iter().map(|pv| pv.pumped.clone()).collect();
    let map = linearize(tri, values, &labeling, &elements)?;
    for (id, s) in tri.simplices().enumerate() {
        let label = &elements[labeling.label(id)];
        let outside = map.simplex_support(&s).iter().filter(|&&x| !label.contains(x)).count();
        log.push("linearize", id, outside as f64, 0.0, outside == 0);
    }

    // straight-line homotopy from the source to the linearized map, sampled
    let simplices: Vec<FkSimplex> = tri.simplices().collect();
    let track_mins: Vec<f64> = simplices
        .par_iter()
        .enumerate()
        .map(|(id, s)| {
            let label = &elements[labeling.label(id)];
            let mut worst = f64::INFINITY;
            for (bary, f_val) in sampled.samples(s) {
                let g_val = map.eval_in(s, &bary);
                for &t in &TRACK_TIMES {
                    let h = crate::measure::convex_combine(&f_val, &g_val, t).expect("t in [0, 1]");
                    worst = worst.min(h.mass(label));
                }
            }
            worst
        })
        .collect();
    for (id, &m) in track_mins.iter().enumerate() {
        log.push("straight_line_track", id, m, p, m > p);
    }

    Ok(Straightened { map, labeling, pumped, summary: summary.clone() })
}

/// Benchmark inputs: a space, a cover and a source map.
pub struct Benchmark {
    pub space: FiniteMetricSpace,
    pub cover: Cover,
    pub map: PiecewiseLinearMap,
}

/// Names accepted by [`generator`].
pub const GENERATORS: [&str; 4] = ["constant", "sliding-dirac", "two-ball", "spread"];

/// Built-in source maps on the cube of dimension `n`.
///
/// * `constant`: `f ≡ δ₁` on the line `{0, 1, 2}`, balls of radius `r` (default 1.5).
/// * `sliding-dirac`: a Dirac moving along `{0, 1, 2}` with the mean coordinate,
///   sampled at 9 vertices per axis, balls of radius `r` (default 1.5).
/// * `two-ball`: mass sliding inside a cluster near 0 with up to 3% leaking
///   to a far cluster near 5, balls of radius `r` (default 0.5).
/// * `spread`: half the mass at each of two far points, balls of radius `r`
///   (default 0.1); no cover element can be labelled.
pub fn generator(name: &str, n: usize, r: Option<f64>) -> Result<Benchmark, StraightenError> {
    let line = |xs: &[f64]| FiniteMetricSpace::from_points(&xs.iter().map(|&x| vec![x]).collect::<Vec<_>>());
    let mean = |y: &[f64]| y.iter().sum::<f64>() / y.len() as f64;
    let (space, radius, map) = match name {
        "constant" => {
            let space = line(&[0.0, 1.0, 2.0])?;
            (space, r.unwrap_or(1.5), PiecewiseLinearMap::from_fn(n, 2, |_| FiniteMeasure::dirac(1))?)
        }
        "sliding-dirac" => {
            let space = line(&[0.0, 1.0, 2.0])?;
            let map = PiecewiseLinearMap::from_fn(n, 8, |y| FiniteMeasure::dirac((2.0 * mean(y)).round() as usize))?;
            (space, r.unwrap_or(1.5), map)
        }
        "two-ball" => {
            let space = line(&[0.0, 0.1, 0.2, 5.0, 5.1, 5.2])?;
            let map = PiecewiseLinearMap::from_fn(n, 4, |y| {
                let s = mean(y);
                let leak = 0.03 * s;
                let near = (2.0 * s).round() as usize;
                let far = 3 + (2.0 * (1.0 - s)).round() as usize;
                if leak > 0.0 {
                    FiniteMeasure::new(vec![near, far], vec![1.0 - leak, leak]).expect("valid weights")
                } else {
                    FiniteMeasure::dirac(near)
                }
            })?;
            (space, r.unwrap_or(0.5), map)
        }
        "spread" => {
            let space = line(&[0.0, 10.0])?;
            let map = PiecewiseLinearMap::from_fn(n, 2, |_| FiniteMeasure::uniform(&[0, 1]).expect("two points"))?;
            (space, r.unwrap_or(0.1), map)
        }
        other => return Err(StraightenError::UnknownGenerator(other.to_string())),
    };
    let cover = Cover::ball(&space, radius)?;
    Ok(Benchmark { space, cover, map })
}
