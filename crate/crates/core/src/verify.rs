//! Randomized property suites behind `vkit verify`, plus the random
//! instance generators they share with the test targets.

use itertools::Itertools;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::complex::{build_cech, build_vr};
use crate::fk::{alpha, FkTriangulation};
use crate::measure::FiniteMeasure;
use crate::metric::{FiniteMetricSpace, PointSet};
use crate::oracle;
use crate::persistence::{betti_at, compute_diagram};
use crate::straighten::{intersection_mass_bound, prism_retract};
use crate::thickening::{compare_metrics, pump, pump_coordinate, BumpFunction};
use crate::transport::wasserstein;

pub const DEFAULT_SEED: u64 = 0x5EED_2024;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` uniform points in `[0, 1]^dim` with the Euclidean metric.
pub fn random_space(rng: &mut impl Rng, n: usize, dim: usize) -> FiniteMetricSpace {
    let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.random::<f64>()).collect()).collect();
    FiniteMetricSpace::from_points(&pts).expect("finite coordinates")
}

/// A measure on `support` with random positive weights.
pub fn random_measure_on(rng: &mut impl Rng, support: &[usize]) -> FiniteMeasure {
    let raw: Vec<f64> = support.iter().map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    FiniteMeasure::new(support.to_vec(), raw.iter().map(|w| w / total).collect()).expect("normalized weights")
}

/// A measure on a random support of size `1..=max_support` within `0..n`.
pub fn random_measure(rng: &mut impl Rng, n: usize, max_support: usize) -> FiniteMeasure {
    let k = rng.random_range(1..=max_support.min(n));
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    idx.truncate(k);
    random_measure_on(rng, &idx)
}

/// Two random measures whose supports share at least one point.
pub fn random_overlapping_pair(rng: &mut impl Rng, n: usize, max_support: usize) -> (FiniteMeasure, FiniteMeasure) {
    let common = rng.random_range(0..n);
    let pick = |rng: &mut dyn rand::RngCore| {
        let k = rng.random_range(1..=max_support.min(n));
        let mut others: Vec<usize> = (0..n).filter(|&x| x != common).collect();
        others.shuffle(rng);
        let mut s: Vec<usize> = others.into_iter().take(k - 1).collect();
        s.push(common);
        s
    };
    let (a, b) = (pick(rng), pick(rng));
    (random_measure_on(rng, &a), random_measure_on(rng, &b))
}

/// A random bump function with a few zeros, positive somewhere on `mu`.
pub fn random_bump(rng: &mut impl Rng, space: &FiniteMetricSpace, mu: &FiniteMeasure) -> BumpFunction {
    let mut values: Vec<f64> = (0..space.len())
        .map(|_| match rng.random_range(0..4) {
            0 => 0.0,
            1 => 1.0,
            _ => rng.random::<f64>(),
        })
        .collect();
    let anchor = *mu.support().choose(rng).expect("nonempty support");
    if values[anchor] == 0.0 {
        values[anchor] = 0.5;
    }
    BumpFunction::from_values(space, values).expect("length matches")
}

/// A measure together with sets `U₁, …, U_k` each carrying mass `> p`.
pub fn random_concentrated_instance(
    rng: &mut impl Rng,
    n_points: usize,
    k: usize,
    p: f64,
) -> (FiniteMeasure, Vec<PointSet>) {
    let mu = random_measure(rng, n_points, n_points);
    let sets = (0..k)
        .map(|_| {
            let mut order: Vec<usize> = (0..n_points).collect();
            order.shuffle(rng);
            let mut chosen = Vec::new();
            for x in order {
                chosen.push(x);
                if mu.mass(&PointSet::new(chosen.clone())) > p {
                    break;
                }
            }
            PointSet::new(chosen)
        })
        .collect();
    (mu, sets)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub trials: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
}

impl SuiteResult {
    fn new(name: &'static str) -> Self {
        Self { name, trials: 0, failures: 0, first_failure: None }
    }

    fn check(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.trials += 1;
        if !ok {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(detail());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

pub fn wasserstein_axioms(rng: &mut impl Rng, trials: usize) -> SuiteResult {
    let mut r = SuiteResult::new("wasserstein symmetry + triangle");
    for _ in 0..trials {
        let n = rng.random_range(2..=10);
        let space = random_space(rng, n, 2);
        let [a, b, c] = [0; 3].map(|_| random_measure(rng, n, 6));
        let ab = wasserstein(&space, &a, &b).expect("same space").0;
        let ba = wasserstein(&space, &b, &a).expect("same space").0;
        let bc = wasserstein(&space, &b, &c).expect("same space").0;
        let ac = wasserstein(&space, &a, &c).expect("same space").0;
        r.check(ab == ba && ac <= ab + bc + 1e-9, || {
            format!("d(a,b)={ab} d(b,a)={ba} d(a,c)={ac} d(a,b)+d(b,c)={}", ab + bc)
        });
    }
    r
}

pub fn wasserstein_oracle(rng: &mut impl Rng, trials: usize) -> SuiteResult {
    let mut r = SuiteResult::new("wasserstein vs vertex enumeration");
    for _ in 0..trials {
        let n = rng.random_range(2..=8);
        let space = random_space(rng, n, 2);
        let a = random_measure(rng, n, 4);
        let b = random_measure(rng, n, 4);
        let (lp, plan) = wasserstein(&space, &a, &b).expect("same space");
        let brute = oracle::transport_vertex_min(&space, &a, &b);
        r.check((lp - brute).abs() <= 1e-9 && plan.is_feasible(&a, &b), || format!("lp={lp} brute={brute}"));
    }
    r
}

pub fn isometric_embedding(rng: &mut impl Rng, trials: usize) -> SuiteResult {
    let mut r = SuiteResult::new("dirac isometry");
    for _ in 0..trials {
        let n = rng.random_range(2..=10);
        let space = random_space(rng, n, 3);
        for (x, y) in (0..n).tuple_combinations() {
            let d = wasserstein(&space, &FiniteMeasure::dirac(x), &FiniteMeasure::dirac(y)).expect("in range").0;
            r.check((d - space.dist(x, y)).abs() <= 1e-12, || format!("x={x} y={y} d_W={d} d={}", space.dist(x, y)));
        }
    }
    r
}

pub fn comparison_bound(rng: &mut impl Rng, trials: usize) -> SuiteResult {
    let mut r = SuiteResult::new("d_W <= diam/2 * d_m");
    for _ in 0..trials {
        let n = rng.random_range(2..=10);
        let space = random_space(rng, n, 2);
        let (a, b) = random_overlapping_pair(rng, n, 5);
        let cmp = compare_metrics(&space, &a, &b).expect("same space");
        r.check(cmp.holds, || format!("{cmp:?}"));
    }
    r
}

pub fn pump_formula(rng: &mut impl Rng, trials: usize) -> SuiteResult {
    let mut r = SuiteResult::new("pump formula + support");
    for _ in 0..trials {
        let n = rng.random_range(2..=10);
        let space = random_space(rng, n, 2);
        let mu = random_measure(rng, n, 6);
        let phi = random_bump(rng, &space, &mu);
        let pumped = pump(&mu, &phi).expect("positive somewhere");
        let coords_ok = (0..n).all(|v| pump_coordinate(&mu, &phi, v).expect("positive") == pumped.psi(v));
        let support_ok = pumped.support().iter().all(|&x| mu.psi(x) > 0.0 && phi.value(x) > 0.0);
        let fixed_ok = !mu.support().iter().all(|&x| phi.plateau().contains(x)) || pumped == mu;
        r.check(coords_ok && support_ok && fixed_ok, || format!("mu={mu:?} phi={:?}", phi.values()));
    }
    r
}

pub fn mass_bound(rng: &mut impl Rng, trials: usize) -> SuiteResult {
    let mut r = SuiteResult::new("intersection mass bound");
    for _ in 0..trials {
        let cap = rng.random_range(1..=4usize);
        let k = rng.random_range(1..=cap);
        let p = 1.0 - rng.random_range(0.01..0.99) / cap as f64;
        let n = rng.random_range(3..=10);
        let (mu, sets) = random_concentrated_instance(rng, n, k, p);
        let inter = sets.iter().skip(1).fold(sets[0].clone(), |acc, u| acc.intersection(u));
        let mass = mu.mass(&inter);
        let ok = mass > 1.0 - cap as f64 * (1.0 - p) && intersection_mass_bound(&mu, &sets, p).is_ok();
        r.check(ok, || format!("p={p} cap={cap} k={k} mass={mass}"));
    }
    r
}

pub fn fk_certificates(rng: &mut impl Rng, trials: usize) -> SuiteResult {
    let mut r = SuiteResult::new("freudenthal-kuhn certificates");
    for n in 1..=3 {
        for p in 1..=3 {
            let tri = FkTriangulation::new(n, p).expect("positive");
            let count = tri.simplices().count();
            let diam_ok = tri.simplices().all(|s| (tri.diameter(&s) - tri.mesh_diameter()).abs() <= 1e-12);
            let volume: f64 = tri.simplices().map(|s| tri.volume(&s)).sum();
            let star_ok = tri.lattice_vertices().all(|v| tri.vertex_star_size(&v).expect("vertex") <= alpha(n));
            let facets_ok =
                tri.facet_incidence().iter().all(|(f, &c)| c == if tri.is_boundary_face(f) { 1 } else { 2 });
            r.check(
                Some(count) == tri.simplex_count() && diam_ok && (volume - 1.0).abs() <= 1e-9 && star_ok && facets_ok,
                || format!("n={n} p={p}"),
            );
        }
    }
    for _ in 0..trials {
        let n = rng.random_range(1..=4);
        let tri = FkTriangulation::new(n, rng.random_range(1..=5)).expect("positive");
        let y: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let loc = tri.locate(&y).expect("inside");
        let back = tri.point_from_bary(&loc.simplex, &loc.bary);
        let ok = loc.bary.iter().all(|&b| b >= 0.0)
            && (loc.bary.iter().sum::<f64>() - 1.0).abs() <= 1e-12
            && back.iter().zip(&y).all(|(a, b)| (a - b).abs() <= 1e-10);
        r.check(ok, || format!("y={y:?} located {:?}", loc.simplex));
    }
    r
}

pub fn complexes_vs_oracle(rng: &mut impl Rng, trials: usize) -> SuiteResult {
    let mut r = SuiteResult::new("VR/Cech vs subset scan");
    for _ in 0..trials {
        let n = rng.random_range(1..=8);
        let space = random_space(rng, n, 2);
        let radius = rng.random_range(0.0..1.2);
        let k_max = rng.random_range(0..=3);
        let vr = build_vr(&space, radius, k_max);
        let brute = oracle::vr_all_subsets(&space, radius, k_max);
        let vr_ok = vr.len() == brute.len() && brute.iter().all(|(s, d)| vr.value_of(s) == Some(*d));
        let cech = build_cech(&space, radius, k_max);
        let brute_c = oracle::cech_all_subsets(&space, radius, k_max);
        let cech_ok = cech.len() == brute_c.len() && brute_c.iter().all(|(s, d)| cech.value_of(s) == Some(*d));
        let vr2 = build_vr(&space, 2.0 * radius, k_max);
        let nested = cech.simplices().iter().all(|s| vr2.is_simplex(&s.vertices));
        r.check(vr_ok && cech_ok && nested, || format!("n={n} r={radius} k_max={k_max}"));
    }
    r
}

pub fn persistence_vs_betti(rng: &mut impl Rng, trials: usize) -> SuiteResult {
    let mut r = SuiteResult::new("diagram vs betti ranks");
    for _ in 0..trials {
        let n = rng.random_range(1..=8);
        let space = random_space(rng, n, 2);
        let k = build_vr(&space, f64::INFINITY, 2);
        let diagram = compute_diagram(&k, 1).expect("2-skeleton");
        let crit = k.critical_values();
        let mut probes: Vec<f64> = crit.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        probes.push(crit.last().copied().unwrap_or(0.0) + 1.0);
        let ok = probes.iter().all(|&t| (0..=1).all(|d| diagram.rank_at(d, t) == betti_at(&k, t, d)));
        r.check(ok, || format!("n={n} diagram={:?}", diagram.intervals()));
    }
    r
}

pub fn prism_idempotent(rng: &mut impl Rng, trials: usize) -> SuiteResult {
    let mut r = SuiteResult::new("prism retraction idempotent");
    for _ in 0..trials {
        let n = rng.random_range(1..=4);
        let raw: Vec<f64> = (0..=n).map(|_| rng.random::<f64>()).collect();
        let total: f64 = raw.iter().sum();
        let x: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let t = rng.random::<f64>();
        let (y, s) = prism_retract(&x, t);
        let (z, u) = prism_retract(&y, s);
        let in_target = s == 0.0 || y.contains(&0.0);
        let ok = in_target && (s - u).abs() <= 1e-12 && y.iter().zip(&z).all(|(a, b)| (a - b).abs() <= 1e-12);
        r.check(ok, || format!("x={x:?} t={t}"));
    }
    r
}

/// Every suite with `trials` random instances each, seeded deterministically.
pub fn run_all(seed: u64, trials: usize) -> Vec<SuiteResult> {
    type Suite = fn(&mut ChaCha8Rng, usize) -> SuiteResult;
    let suites: [Suite; 10] = [
        wasserstein_axioms,
        wasserstein_oracle,
        isometric_embedding,
        comparison_bound,
        pump_formula,
        mass_bound,
        fk_certificates,
        complexes_vs_oracle,
        persistence_vs_betti,
        prism_idempotent,
    ];
    suites
        .iter()
        .enumerate()
        .map(|(i, suite)| {
            let mut rng = rng(seed.wrapping_add(i as u64));
            suite(&mut rng, trials)
        })
        .collect()
}

/// Fixed-width table of suite results.
pub fn format_table(results: &[SuiteResult]) -> String {
    let mut out = format!("{:<36} {:>8} {:>9}  status\n", "suite", "checks", "failures");
    for r in results {
        out.push_str(&format!(
            "{:<36} {:>8} {:>9}  {}\n",
            r.name,
            r.trials,
            r.failures,
            if r.passed() { "pass" } else { "FAIL" }
        ));
        if let Some(f) = &r.first_failure {
            out.push_str(&format!("    first failure: {f}\n"));
        }
    }
    out
}
