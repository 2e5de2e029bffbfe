use std::collections::BTreeSet;

use coopbandit::gen;
use coopbandit::partition::{
    centers_to_components, compute_centers_informed, compute_centers_uninformed, theta,
    validate_partition, Partition, PartitionDump,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn informed_sweep_passes_every_check() {
    for (i, g) in gen::graph_sweep(60, 2, 40, 1_000).iter().enumerate() {
        for k in [2, 5, 10] {
            let informed = compute_centers_informed(g, k).unwrap();
            assert!(informed.components.check_invariants(g).is_empty(), "graph {i}, K={k}");
            let p = informed.components.to_partition().unwrap();
            let report = validate_partition(g, &p, k);
            assert!(report.all_passed(), "graph {i}, K={k}\n{report}");
        }
    }
}

#[test]
fn uninformed_centers_are_always_two_independent() {
    for (i, g) in gen::graph_sweep(30, 2, 30, 2_000).iter().enumerate() {
        for k in [2, 5] {
            let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
            let r = compute_centers_uninformed(g, k, 2 * g.node_count(), 10_000, &mut rng).unwrap();
            assert!(g.is_r_independent(&r.centers, 2));
            for call in &r.luby_calls {
                assert!(call.transcript.joined.is_subset(&call.universe));
            }
            if let Ok(p) = r.components.to_partition() {
                let report = validate_partition(g, &p, k);
                assert!(report.get("centers_2_independent").unwrap().passed);
                assert!(report.get("disjoint_cover").unwrap().passed);
            }
        }
    }
}

#[test]
fn component_rounds_match_theta() {
    let g = gen::path(6);
    for (k, expected) in [(2, 8), (5, 19), (10, 27)] {
        assert_eq!(theta(k), expected);
        let t = centers_to_components(&g, &BTreeSet::from([0]), k).unwrap();
        assert_eq!(t.rounds(), expected + 1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn informed_partition_is_valid(seed in any::<u64>(), n in 2usize..30, density in 0.0f64..0.6, k in 2usize..12) {
        let g = gen::random_connected(n, density, &mut ChaCha8Rng::seed_from_u64(seed));
        let p = compute_centers_informed(&g, k).unwrap().components.to_partition().unwrap();
        let report = validate_partition(&g, &p, k);
        prop_assert!(report.all_passed(), "{}", report);
    }

    #[test]
    fn dump_round_trips(seed in any::<u64>(), n in 2usize..25, k in 2usize..8) {
        let g = gen::random_connected(n, 0.15, &mut ChaCha8Rng::seed_from_u64(seed));
        let p = compute_centers_informed(&g, k).unwrap().components.to_partition().unwrap();
        let json = serde_json::to_string(&p.to_dump()).unwrap();
        let dump: PartitionDump = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(Partition::from_dump(&dump, Some(&g)).unwrap(), p);
    }
}
