use minorfind::engine::{
    compute_params_with, find_minor, verify_partition, verify_witness, MinorWitness, Mode, Outcome, Overrides,
    RunOptions,
};
use minorfind::generators::{gnp, random_regular};
use minorfind::harness::ENGINE_STREAM;
use minorfind::{build_graph, Graph, RngStream};
use proptest::prelude::*;

fn regular(n: usize, d: usize, seed: u64) -> Graph {
    random_regular(n, d, &mut RngStream::new(seed, 2)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn constant_degree_runs_are_sound(half in 10usize..120, d in 3usize..6, seed in any::<u64>(), r in 1usize..4) {
        let n = 2 * half;
        let g = regular(n, d, seed);
        prop_assume!(g.is_connected());
        let t = (n as f64).sqrt().ceil() as usize;
        let ov = Overrides { t: Some(t), r: Some(r), ..Overrides::default() };
        let params = compute_params_with(n, d, 0.3, Mode::ConstantDegree, &ov).unwrap();
        let opts = RunOptions { verify_each_iteration: true, ..RunOptions::default() };
        let report = find_minor(&g, &params, &RngStream::new(seed, ENGINE_STREAM), opts).unwrap();
        prop_assert!(report.iterations <= 2 * n);
        prop_assert_eq!(report.achieved_order, report.partition.q());
        if let Some(w) = &report.witness {
            prop_assert!(verify_witness(&g, w).valid);
            prop_assert_eq!(w.order(), report.achieved_order);
        }
        if report.outcome == Outcome::Success {
            prop_assert_eq!(report.achieved_order, r);
            let check = verify_partition(&g, &report.partition, &params);
            prop_assert!(check.is_valid(), "{:?}", check.violations);
        }
    }

    #[test]
    fn runs_are_reproducible(half in 10usize..60, seed in any::<u64>()) {
        let g = regular(2 * half, 3, seed);
        prop_assume!(g.is_connected());
        let params = compute_params_with(g.n(), 3, 0.3, Mode::ConstantDegree, &Overrides::default()).unwrap();
        let a = find_minor(&g, &params, &RngStream::new(seed, ENGINE_STREAM), RunOptions::default()).unwrap();
        let b = find_minor(&g, &params, &RngStream::new(seed, ENGINE_STREAM), RunOptions::default()).unwrap();
        prop_assert_eq!(a.history, b.history);
        prop_assert_eq!(a.witness, b.witness);
    }

    #[test]
    fn edge_list_round_trip(n in 1usize..60, p in 0.0f64..1.0, seed in any::<u64>()) {
        let g = gnp(n, p, &mut RngStream::new(seed, 3)).unwrap();
        let back = Graph::parse_edge_list(&g.to_edge_list()).unwrap();
        prop_assert_eq!(back.n(), g.n());
        prop_assert_eq!(back.edges().collect::<Vec<_>>(), g.edges().collect::<Vec<_>>());
    }

    #[test]
    fn witness_json_round_trip(sets in prop::collection::vec(prop::collection::vec(0usize..50, 1..5), 0..6)) {
        let w = MinorWitness::complete(sets);
        prop_assert_eq!(MinorWitness::from_json(&w.to_json()).unwrap(), w);
    }
}

#[test]
fn single_vertex_witnesses_of_a_clique() {
    let edges: Vec<(usize, usize)> = (0..6).flat_map(|u| (u + 1..6).map(move |v| (u, v))).collect();
    let g = build_graph(6, &edges).unwrap();
    let w = MinorWitness::complete((0..6).map(|v| vec![v]).collect());
    assert!(verify_witness(&g, &w).valid);
}
