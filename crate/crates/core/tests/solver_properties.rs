use proptest::prelude::*;

use softquota::axioms::DeficitVector;
use softquota::generator::{random_instance, sampled_params};
use softquota::oracle::{self, DEFAULT_CAP};
use softquota::solver::{
    solve, solve_single_pass, stage1_greedy_fill, stage2_dominance_swaps, stage3_envy_swaps,
    TieBreakPolicy, TraceEvent,
};
use softquota::{find_dominating_swap, io, Committee, Instance, Swap};

fn fixture(name: &str) -> Instance {
    let path = format!("{}/examples/{name}", env!("CARGO_MANIFEST_DIR"));
    io::parse_instance(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn total_deficit(inst: &Instance, w: &Committee) -> u64 {
    DeficitVector::new(&inst.type_distribution(w).unwrap(), inst.lower_quotas())
        .unwrap()
        .total()
}

fn rank_positions(inst: &Instance, w: &Committee) -> Vec<usize> {
    let mut tiers: Vec<usize> = w.iter().map(|c| inst.tier_of(c)).collect();
    tiers.sort_unstable();
    tiers
}

#[test]
fn single_pass_can_end_without_type_optimality() {
    let inst = fixture("single_pass_counterexample.json");
    let ids = |w: &Committee| inst.committee_ids(w);

    let (w1, _) = stage1_greedy_fill(&inst, &TieBreakPolicy::default());
    assert_eq!(ids(&w1), ["c3", "c4", "c5"]);
    let (w2, events) = stage2_dominance_swaps(&inst, &w1).unwrap();
    assert!(events.is_empty());
    assert_eq!(find_dominating_swap(&inst, &w2).unwrap(), None);

    let (w3, events) = stage3_envy_swaps(&inst, &w2).unwrap();
    assert_eq!(
        events,
        vec![TraceEvent::EnvySwap {
            out: 3,
            incoming: 5
        }]
    );
    assert_eq!(ids(&w3), ["c3", "c5", "c6"]);
    // Same deficits as before the envy swap, yet now c5 -> c7 dominates.
    assert_eq!(total_deficit(&inst, &w3), total_deficit(&inst, &w2));
    assert_eq!(
        find_dominating_swap(&inst, &w3).unwrap(),
        Some(Swap {
            out: 4,
            incoming: 6
        })
    );

    let literal = solve_single_pass(&inst, &TieBreakPolicy::default());
    assert_eq!(literal.committee, w3);
    assert!(!literal.report.type_optimal);
    assert!(literal.report.jef);

    let solution = solve(&inst, &TieBreakPolicy::default());
    assert!(solution.report.holds());
    assert!(solution.trace.counters.rounds >= 2);
    assert!(solution.trace.stages_in_order());
    let cert = oracle::certify_solver(&inst, &TieBreakPolicy::default(), DEFAULT_CAP).unwrap();
    assert!(cert.passed, "{:?}", cert);
}

#[test]
fn local_optimum_can_be_globally_dominated() {
    // Found by seeded search (seed 313, m = 5, k = 2).
    let text = r#"{"types":["t1","t2","t3"],
        "candidates":[{"id":"c1","types":["t1","t3"]},{"id":"c2","types":["t1"]},
                      {"id":"c3","types":["t3"]},{"id":"c4","types":["t1","t3"]},
                      {"id":"c5","types":["t2"]}],
        "priority":[["c4"],["c2"],["c5"],["c1"],["c3"]],
        "quotas":{"t1":1,"t2":1,"t3":1},"k":2}"#;
    let inst = io::parse_instance(text).unwrap();
    let w = inst.committee_from_ids(&["c2", "c3"]).unwrap();
    assert!(oracle::oracle_type_optimal(&inst, &w));
    assert!(oracle::global_type_optimality_check(&inst, &w, 1, DEFAULT_CAP).unwrap());
    assert!(!oracle::global_type_optimality_check(&inst, &w, 2, DEFAULT_CAP).unwrap());
}

#[test]
fn global_check_respects_cap() {
    let inst = random_instance(&softquota::GenParams {
        m: 30,
        k: 15,
        ..Default::default()
    })
    .unwrap();
    assert!(matches!(
        oracle::global_type_optimality_check(&inst, &inst.top_k(), 3, 1000),
        Err(oracle::OracleError::InstanceTooLarge { .. })
    ));
    assert!(matches!(
        oracle::oracle_axiom_sets(&inst, 1000),
        Err(oracle::OracleError::InstanceTooLarge { .. })
    ));
}

#[test]
fn global_check_with_limit_one_matches_local_check() {
    for seed in 0..150 {
        let inst = random_instance(&sampled_params(seed, 8, 4)).unwrap();
        let sets = oracle::oracle_axiom_sets(&inst, DEFAULT_CAP).unwrap();
        for (i, w) in sets.committees.iter().enumerate() {
            assert_eq!(
                oracle::global_type_optimality_check(&inst, w, 1, DEFAULT_CAP).unwrap(),
                sets.type_optimal[i],
                "seed {seed}"
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn solver_invariants(seed in any::<u64>(), largest_deficit in any::<bool>()) {
        let inst = random_instance(&sampled_params(seed, 14, 5)).unwrap();
        let policy = if largest_deficit {
            TieBreakPolicy::largest_deficit()
        } else {
            TieBreakPolicy::default()
        };
        let solution = solve(&inst, &policy);
        let w = &solution.committee;

        prop_assert_eq!(w.len(), inst.committee_size());
        prop_assert!(solution.report.holds());
        prop_assert_eq!(&solution.trace.replay(), w);
        prop_assert!(solution.trace.stages_in_order());
        prop_assert_eq!(&solve(&inst, &policy), &solution);

        let quota_sum: u64 = inst.lower_quotas().iter().map(|&q| u64::from(q)).sum();
        prop_assert!(solution.trace.counters.dominance_swaps as u64 <= quota_sum);

        let mut deficit = None;
        for (before, event, after) in solution.trace.steps() {
            match event {
                TraceEvent::DominanceSwap { before: b, after: a, .. } => {
                    let (x, y) = (inst.type_distribution(&before).unwrap(), inst.type_distribution(&after).unwrap());
                    prop_assert_eq!(b.as_slice(), x.counts());
                    prop_assert_eq!(a.as_slice(), y.counts());
                    prop_assert!(total_deficit(&inst, &after) < total_deficit(&inst, &before));
                }
                TraceEvent::EnvySwap { out, incoming } => {
                    prop_assert!(inst.strictly_prefers(*incoming, *out));
                    prop_assert!(rank_positions(&inst, &after) < rank_positions(&inst, &before));
                    prop_assert!(total_deficit(&inst, &after) <= total_deficit(&inst, &before));
                }
                _ => {}
            }
            if !matches!(event, TraceEvent::GreedyAdd { .. } | TraceEvent::TopUpAdd { .. }) {
                let d = total_deficit(&inst, &after);
                if let Some(prev) = deficit {
                    prop_assert!(d <= prev);
                }
                deficit = Some(d);
            }
        }
    }

    #[test]
    fn typed_distribution_identities(seed in any::<u64>()) {
        let inst = random_instance(&sampled_params(seed, 12, 5)).unwrap();
        let w = inst.top_k();
        let dist = inst.type_distribution(&w).unwrap();
        let total: u32 = dist.counts().iter().sum();
        let per_member: usize = w.iter().map(|c| inst.types_of(c).count()).sum();
        prop_assert_eq!(total as usize, per_member);

        if let Some(c) = (0..inst.num_candidates()).find(|&c| !w.contains(c)) {
            let mut bigger = w.clone();
            bigger.insert(c);
            let grown = inst.type_distribution(&bigger).unwrap();
            for t in 0..inst.num_types() {
                prop_assert_eq!(grown.get(t) - dist.get(t), u32::from(inst.has_type(c, t)));
            }
        }

        if inst.num_types() >= 2 {
            let expanded = inst.expand_group_quota(&[inst.type_id(0), inst.type_id(1)], 1).unwrap();
            let after = expanded.type_distribution(&w).unwrap();
            prop_assert_eq!(&after.counts()[..inst.num_types()], dist.counts());
        }
    }

    #[test]
    fn instance_documents_round_trip(seed in any::<u64>()) {
        let inst = random_instance(&sampled_params(seed, 12, 5)).unwrap();
        let text = io::serialize_instance(&inst);
        prop_assert_eq!(&io::parse_instance(&text).unwrap(), &inst);

        let solution = solve(&inst, &TieBreakPolicy::default());
        let doc = io::serialize_result(&inst, &solution.committee, Some(&solution.trace), &solution.report);
        let parsed = io::parse_result(&doc).unwrap();
        prop_assert_eq!(parsed.committee(&inst).unwrap(), solution.committee);
    }
}
