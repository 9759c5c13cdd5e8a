use halftheta::degree_bounded::{build_g12, build_g9, route_g12, route_g9, G12_FACTOR, G9_FACTOR};
use halftheta::geometry::{negative_bound, positive_bound, union_bound};
use halftheta::graph::{build_half_theta6, format_graph, parse_graph, random_general_position};
use halftheta::harness::{audit_potential, oracle_shortest_path};
use halftheta::router::{format_trace, parse_trace, route_stateful, route_stateless};
use proptest::prelude::*;

#[test]
fn headline_constants() {
    // Values quoted for the worst-case bounds.
    assert!((positive_bound(0.0) - 3f64.sqrt()).abs() < 1e-12);
    assert!((positive_bound(std::f64::consts::FRAC_PI_6) - 2.0).abs() < 1e-12);
    assert!((negative_bound(0.0) - 2.886_751_345_948_129).abs() < 1e-12);
    assert!((union_bound(2) - 1.931_851_652_578_136_6).abs() < 1e-12);
    assert!((G12_FACTOR as f64 * 2.0 - 38.0).abs() < 1e-12);
    assert!(G12_FACTOR as f64 * negative_bound(0.0) <= 54.849);
    assert!((G9_FACTOR as f64 * 2.0 - 6.0).abs() < 1e-12);
    assert!(G9_FACTOR as f64 * negative_bound(0.0) <= 8.6603);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn graph_file_round_trip(n in 3usize..40, seed in any::<u64>()) {
        let g = build_half_theta6(&random_general_position(n, seed, &[0.0])).unwrap();
        let back = parse_graph(&format_graph(&g)).unwrap();
        prop_assert_eq!(back.edges(), g.edges());
        prop_assert_eq!(back.flavor(), g.flavor());
    }

    #[test]
    fn routes_are_bounded_and_never_beat_the_oracle(n in 3usize..40, seed in any::<u64>(), a in 0usize..40, b in 0usize..40) {
        let (s, t) = (a % n, b % n);
        prop_assume!(s != t);
        let g = build_half_theta6(&random_general_position(n, seed, &[0.0])).unwrap();
        let (best, _) = oracle_shortest_path(&g, s, t, None).unwrap();
        for trace in [route_stateless(&g, s, t).unwrap(), route_stateful(&g, s, t).unwrap()] {
            prop_assert!(trace.within_bound(1e-9));
            prop_assert!(trace.total_length >= best - 1e-12);
            prop_assert!(audit_potential(&trace, &g).is_clean());
            let file = parse_trace(&format_trace(&trace)).unwrap();
            prop_assert_eq!(file.steps.len(), trace.steps.len());
            prop_assert!((file.total - trace.total_length).abs() <= 1e-12 * trace.total_length.max(1.0));
        }
    }

    #[test]
    fn bounded_degree_routes_reach_the_target(n in 3usize..40, seed in any::<u64>(), a in 0usize..40, b in 0usize..40) {
        let (s, t) = (a % n, b % n);
        prop_assume!(s != t);
        let half = build_half_theta6(&random_general_position(n, seed, &[0.0])).unwrap();
        let g12 = build_g12(&half).unwrap();
        let r = route_g12(&g12, s, t).unwrap();
        prop_assert_eq!(r.trace.target, t);
        prop_assert!(r.trace.within_bound(1e-9));
        let (g9, hints) = build_g9(&half).unwrap();
        let r = route_g9(&g9, &hints, s, t).unwrap();
        prop_assert!(r.trace.within_bound(1e-9));
        prop_assert!(r.probe_failures.len() <= 1);
    }
}
