use proptest::prelude::*;

use vkit::complex::{build_cech, build_vr};
use vkit::fk::FkTriangulation;
use vkit::measure::{barycentric_distance, convex_combine, FiniteMeasure};
use vkit::metric::FiniteMetricSpace;
use vkit::persistence::{betti_at, compute_diagram};
use vkit::straighten::prism_retract;
use vkit::thickening::{pump, BumpFunction};
use vkit::transport::wasserstein;

fn planar_space(max: usize) -> impl Strategy<Value = FiniteMetricSpace> {
    prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 1..=max).prop_map(|pts| {
        FiniteMetricSpace::from_points(&pts.iter().map(|&(x, y)| vec![x, y]).collect::<Vec<_>>()).unwrap()
    })
}

fn measure_on(n: usize) -> impl Strategy<Value = FiniteMeasure> {
    prop::collection::btree_map(0..n, 0.05..1.0f64, 1..=n.min(6)).prop_map(|m| {
        let total: f64 = m.values().sum();
        FiniteMeasure::new(m.keys().copied().collect(), m.values().map(|w| w / total).collect()).unwrap()
    })
}

fn space_with_measures(k: usize) -> impl Strategy<Value = (FiniteMetricSpace, Vec<FiniteMeasure>)> {
    planar_space(8).prop_flat_map(move |s| {
        let n = s.len();
        (Just(s), prop::collection::vec(measure_on(n), k))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn wasserstein_is_a_metric((space, ms) in space_with_measures(3)) {
        let d = |a: &FiniteMeasure, b: &FiniteMeasure| wasserstein(&space, a, b).unwrap().0;
        let (a, b, c) = (&ms[0], &ms[1], &ms[2]);
        prop_assert_eq!(d(a, a), 0.0);
        prop_assert!(d(a, b) >= 0.0);
        prop_assert_eq!(d(a, b), d(b, a));
        prop_assert!(d(a, c) <= d(a, b) + d(b, c) + 1e-9);
    }

    #[test]
    fn optimal_plan_is_feasible((space, ms) in space_with_measures(2)) {
        let (cost, plan) = wasserstein(&space, &ms[0], &ms[1]).unwrap();
        prop_assert!(plan.is_feasible(&ms[0], &ms[1]));
        prop_assert!((plan.cost(&space) - cost).abs() <= 1e-12);
    }

    #[test]
    fn wasserstein_is_bounded_by_barycentric((space, ms) in space_with_measures(2)) {
        let (a, b) = (&ms[0], &ms[1]);
        let dw = wasserstein(&space, a, b).unwrap().0;
        let union: Vec<usize> = (0..space.len()).filter(|&x| a.psi(x) > 0.0 || b.psi(x) > 0.0).collect();
        let diam = space.diameter(&union);
        prop_assert!(dw <= 0.5 * diam * barycentric_distance(a, b) + 1e-12);
    }

    #[test]
    fn convex_path_is_lipschitz((space, ms) in space_with_measures(2), t in 0.0..=1.0f64) {
        let (a, b) = (&ms[0], &ms[1]);
        let mid = convex_combine(a, b, t).unwrap();
        let total = wasserstein(&space, a, b).unwrap().0;
        let part = wasserstein(&space, a, &mid).unwrap().0;
        prop_assert!(part <= t * total + 1e-9);
    }

    #[test]
    fn pumping_stays_in_support((space, ms) in space_with_measures(1), seed in any::<u64>()) {
        let mu = &ms[0];
        let n = space.len();
        let values: Vec<f64> = (0..n).map(|x| ((seed.rotate_left(x as u32 * 7) % 5) as f64) / 4.0).collect();
        prop_assume!(mu.support().iter().any(|&x| values[x] > 0.0));
        let phi = BumpFunction::from_values(&space, values).unwrap();
        let pumped = pump(mu, &phi).unwrap();
        prop_assert!((pumped.total() - 1.0).abs() <= 1e-12);
        for &x in pumped.support() {
            prop_assert!(mu.psi(x) > 0.0 && phi.value(x) > 0.0);
        }
    }

    #[test]
    fn locate_round_trips(n in 1usize..=4, p in 1usize..=6, raw in prop::collection::vec(0.0..=1.0f64, 4)) {
        let tri = FkTriangulation::new(n, p).unwrap();
        let y = &raw[..n];
        let loc = tri.locate(y).unwrap();
        prop_assert!(loc.bary.iter().all(|&b| b >= 0.0));
        prop_assert!((loc.bary.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        let back = tri.point_from_bary(&loc.simplex, &loc.bary);
        for (a, b) in back.iter().zip(y) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
        let id = tri.simplex_id(&loc.simplex);
        prop_assert_eq!(tri.simplex_from_id(id), loc.simplex);
    }

    #[test]
    fn filtrations_are_nested(space in planar_space(7), r1 in 0.0..1.5f64, dr in 0.0..1.0f64) {
        let r2 = r1 + dr;
        let small = build_vr(&space, r1, 3);
        let big = build_vr(&space, r2, 3);
        prop_assert!(small.simplices().iter().all(|s| big.is_simplex(&s.vertices)));
        let cech = build_cech(&space, r1, 3);
        let doubled = build_vr(&space, 2.0 * r1, 3);
        prop_assert!(cech.simplices().iter().all(|s| doubled.is_simplex(&s.vertices)));
        prop_assert!(small.simplices().iter().all(|s| cech.is_simplex(&s.vertices)));
    }

    #[test]
    fn h0_counts_points(space in planar_space(8)) {
        let k = build_vr(&space, f64::INFINITY, 2);
        let d = compute_diagram(&k, 1).unwrap();
        prop_assert_eq!(d.in_dim(0).count(), space.len());
        prop_assert_eq!(d.in_dim(0).filter(|i| i.is_essential()).count(), 1);
        prop_assert!(d.intervals().iter().all(|i| i.birth < i.death));
        prop_assert_eq!(betti_at(&k, f64::INFINITY, 0), 1);
    }

    #[test]
    fn prism_retraction_is_idempotent(raw in prop::collection::vec(0.01..1.0f64, 2..=5), t in 0.0..=1.0f64) {
        let total: f64 = raw.iter().sum();
        let x: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let (y, s) = prism_retract(&x, t);
        prop_assert!(s == 0.0 || y.contains(&0.0));
        let (z, u) = prism_retract(&y, s);
        prop_assert!((s - u).abs() <= 1e-12);
        for (a, b) in y.iter().zip(&z) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }
}
