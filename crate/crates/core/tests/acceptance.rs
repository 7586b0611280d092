//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::{Duration, Instant};

use softquota::axioms::{self, DeficitVector};
use softquota::generator::{random_instance, sampled_params, GenParams, SplitMix64};
use softquota::oracle::{self, DEFAULT_CAP};
use softquota::solver::{
    solve, solve_single_pass, stage3_envy_swaps, Solution, TieBreakPolicy, TraceEvent,
};
use softquota::{dominates, io, Committee, Instance, TypeDistribution};

const RANDOM_INSTANCES: u64 = 5000;
const MAX_M: usize = 10;
const MAX_TYPES: usize = 4;
const TRIPLES: usize = 100_000;
const PROPERTY_SUITE_BUDGET: Duration = Duration::from_secs(60);
const LARGE_SOLVE_BUDGET: Duration = Duration::from_secs(10);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn running_example() -> Instance {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/paper_example.json");
    io::parse_instance(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn criterion_1_running_example() -> Outcome {
    let inst = running_example();
    let solution = solve(&inst, &TieBreakPolicy::default());
    let id = |c| inst.candidate_id(c).to_owned();
    let ty = |t| inst.type_id(t).to_owned();
    let trace: Vec<String> = solution
        .trace
        .events
        .iter()
        .map(|e| match *e {
            TraceEvent::GreedyAdd {
                type_index,
                candidate,
            } => format!("GreedyAdd({},{})", ty(type_index), id(candidate)),
            TraceEvent::TopUpAdd { candidate } => format!("TopUpAdd({})", id(candidate)),
            TraceEvent::DominanceSwap { out, incoming, .. } => {
                format!("DominanceSwap({},{})", id(out), id(incoming))
            }
            TraceEvent::EnvySwap { out, incoming } => {
                format!("EnvySwap({},{})", id(out), id(incoming))
            }
        })
        .collect();
    let members = inst.committee_ids(&solution.committee);
    let expected = [
        "GreedyAdd(t2,c2)",
        "GreedyAdd(t3,c3)",
        "DominanceSwap(c2,c4)",
    ];
    let passed = members == ["c3", "c4"]
        && trace == expected
        && solution.report.type_optimal
        && solution.report.jef;
    outcome(
        passed,
        format!(
            "members={members:?} trace=[{}] type_optimal={} jef={}",
            trace.join(", "),
            solution.report.type_optimal,
            solution.report.jef
        ),
    )
}

struct RandomRun {
    instance: Instance,
    solution: Solution,
    sets: oracle::OracleResult,
}

fn random_runs() -> (Vec<RandomRun>, Duration) {
    let start = Instant::now();
    let runs = (0..RANDOM_INSTANCES)
        .map(|seed| {
            let instance = random_instance(&sampled_params(seed, MAX_M, MAX_TYPES)).unwrap();
            let solution = solve(&instance, &TieBreakPolicy::default());
            let sets = oracle::oracle_axiom_sets(&instance, DEFAULT_CAP).unwrap();
            RandomRun {
                instance,
                solution,
                sets,
            }
        })
        .collect();
    (runs, start.elapsed())
}

fn criterion_2_solver_vs_oracle(runs: &[RandomRun], elapsed: Duration) -> Outcome {
    let mut failures = Vec::new();
    for (seed, run) in runs.iter().enumerate() {
        let w = &run.solution.committee;
        let ok = w.len() == run.instance.committee_size()
            && oracle::oracle_type_optimal(&run.instance, w)
            && oracle::oracle_jef(&run.instance, w)
            && run.sets.intersection().next().is_some();
        if !ok {
            failures.push(seed);
        }
    }
    let single_pass_failures = runs
        .iter()
        .filter(|r| {
            !solve_single_pass(&r.instance, &TieBreakPolicy::default())
                .report
                .holds()
        })
        .count();
    let nontrivial = runs
        .iter()
        .filter(|r| {
            r.solution.trace.counters.dominance_swaps + r.solution.trace.counters.envy_swaps > 0
        })
        .count();
    outcome(
        failures.is_empty() && elapsed <= PROPERTY_SUITE_BUDGET,
        format!(
            "{} instances, {} failures {:?}, {} with stage-2/3 swaps, \
             {} where a single stage-2/3 pass would fall short, {:.2?} (budget {:?})",
            runs.len(),
            failures.len(),
            &failures[..failures.len().min(10)],
            nontrivial,
            single_pass_failures,
            elapsed,
            PROPERTY_SUITE_BUDGET
        ),
    )
}

fn criterion_3_dominance_order() -> Outcome {
    let mut rng = SplitMix64::new(0xACCE_97A0);
    let mut draw =
        |len: usize| -> Vec<u32> { (0..len).map(|_| rng.next_below(9) as u32).collect() };
    let (mut chains, mut violations) = (0usize, 0usize);
    let (mut reflexive, mut symmetric) = (0usize, 0usize);
    for i in 0..TRIPLES {
        let len = 1 + i % 5;
        let q = draw(len);
        let (x, y, z) = (
            TypeDistribution::new(draw(len)),
            TypeDistribution::new(draw(len)),
            TypeDistribution::new(draw(len)),
        );
        let xy = dominates(&x, &y, &q).unwrap();
        let yz = dominates(&y, &z, &q).unwrap();
        if xy && yz {
            chains += 1;
            if !dominates(&x, &z, &q).unwrap() {
                violations += 1;
            }
        }
        if dominates(&x, &x, &q).unwrap() {
            reflexive += 1;
        }
        if xy && dominates(&y, &x, &q).unwrap() {
            symmetric += 1;
        }
    }
    outcome(
        chains > 0 && violations == 0 && reflexive == 0 && symmetric == 0,
        format!(
            "{TRIPLES} triples, {chains} chains x>y>z, {violations} transitivity violations, \
             {reflexive} reflexive, {symmetric} symmetric pairs"
        ),
    )
}

fn criterion_4_degenerate() -> Outcome {
    let mut failures = Vec::new();
    let base = running_example();
    let zero = base.with_quotas(vec![0; base.num_types()]).unwrap();
    if solve(&zero, &TieBreakPolicy::default()).committee != zero.top_k() {
        failures.push("running example, zero quotas".to_owned());
    }
    let full = base.with_committee_size(base.num_candidates()).unwrap();
    if solve(&full, &TieBreakPolicy::default()).committee != (0..full.num_candidates()).collect() {
        failures.push("running example, k = m".to_owned());
    }
    for seed in 0..200 {
        let params = sampled_params(seed, 12, 5);
        let inst = random_instance(&GenParams {
            tightness: 0.0,
            ..params.clone()
        })
        .unwrap();
        if solve(&inst, &TieBreakPolicy::default()).committee != inst.top_k() {
            failures.push(format!("seed {seed}, zero quotas"));
        }
        let inst = random_instance(&GenParams {
            k: params.m,
            ..params
        })
        .unwrap();
        let all: Committee = (0..inst.num_candidates()).collect();
        if solve(&inst, &TieBreakPolicy::default()).committee != all {
            failures.push(format!("seed {seed}, k = m"));
        }
    }
    outcome(
        failures.is_empty(),
        format!("402 instances, failures: {failures:?}"),
    )
}

fn criterion_5_large_instances() -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    for (i, (k, density, tightness)) in [
        (100, 0.1, 0.5),
        (250, 0.2, 0.3),
        (500, 0.1, 0.2),
        (500, 0.3, 0.1),
        (900, 0.05, 0.05),
    ]
    .into_iter()
    .enumerate()
    {
        let inst = random_instance(&GenParams {
            m: 1000,
            types: 20,
            k,
            density,
            tightness,
            tie_probability: 0.1,
            seed: 5000 + i as u64,
        })
        .unwrap();
        let start = Instant::now();
        let solution = solve(&inst, &TieBreakPolicy::default());
        let elapsed = start.elapsed();
        let c = solution.trace.counters;
        let quota_sum: u64 = inst.lower_quotas().iter().map(|&q| u64::from(q)).sum();
        let m = inst.num_candidates();
        let run_ok = c.dominance_swaps as u64 <= quota_sum
            && c.envy_swaps <= k * m
            && elapsed <= LARGE_SOLVE_BUDGET
            && solution.committee.len() == k;
        ok &= run_ok;
        lines.push(format!(
            "k={k}: stage2={} (<= {quota_sum}; exceeds |C|: {}), stage3={} (<= {}), {:.2?}",
            c.dominance_swaps,
            solution.dominance_swaps_exceed_candidates(&inst),
            c.envy_swaps,
            k * m,
            elapsed
        ));
    }
    outcome(ok, format!("m=1000, 20 types: {}", lines.join("; ")))
}

fn envy_swap_violates_preservation(inst: &Instance, before: &Committee, after: &Committee) -> bool {
    let q = inst.lower_quotas();
    let x = inst.type_distribution(before).unwrap();
    let y = inst.type_distribution(after).unwrap();
    let dx = DeficitVector::new(&x, q).unwrap();
    let dy = DeficitVector::new(&y, q).unwrap();
    let broke_quota = (0..q.len()).any(|t| x.get(t) >= q[t] && y.get(t) < q[t]);
    let deeper = dx.as_slice().iter().zip(dy.as_slice()).any(|(a, b)| b > a);
    broke_quota || deeper
}

/// Replays every envy swap of every solver trace, plus stage 3 started from
/// every type-optimal committee the oracle found.
fn criterion_6_stage3_preservation(runs: &[RandomRun]) -> Outcome {
    let (mut traced, mut extra, mut violations) = (0usize, 0usize, 0usize);
    for run in runs {
        let inst = &run.instance;
        for (before, event, after) in run.solution.trace.steps() {
            if matches!(event, TraceEvent::EnvySwap { .. }) {
                traced += 1;
                violations += usize::from(envy_swap_violates_preservation(inst, &before, &after));
            }
        }
        for start in run.sets.type_optimal_set() {
            let (_, events) = stage3_envy_swaps(inst, start).unwrap();
            let mut current = start.clone();
            for event in &events {
                let before = current.clone();
                event.apply(&mut current);
                extra += 1;
                violations += usize::from(envy_swap_violates_preservation(inst, &before, &current));
            }
        }
    }
    outcome(
        violations == 0,
        format!(
            "{traced} solver envy swaps and {extra} envy swaps from type-optimal starts replayed, \
             {violations} violations"
        ),
    )
}

fn criterion_7_oracle_agreement(runs: &[RandomRun]) -> Outcome {
    let (mut checked, mut disagreements) = (0usize, Vec::new());
    for (seed, run) in runs.iter().enumerate() {
        for (i, w) in run.sets.committees.iter().enumerate() {
            checked += 1;
            let fast_opt = axioms::is_type_optimal(&run.instance, w).unwrap();
            let fast_jef = axioms::find_jef_violation(&run.instance, w)
                .unwrap()
                .is_none();
            if fast_opt != run.sets.type_optimal[i] || fast_jef != run.sets.jef[i] {
                disagreements.push((seed, i));
            }
        }
    }
    outcome(
        disagreements.is_empty(),
        format!(
            "{checked} committees cross-checked, {} disagreements {:?}",
            disagreements.len(),
            &disagreements[..disagreements.len().min(10)]
        ),
    )
}

fn main() {
    let mut results = Vec::new();
    results.push((
        "1 running example reproduction",
        criterion_1_running_example(),
    ));
    let (runs, elapsed) = random_runs();
    results.push((
        "2 solver output passes oracle checks",
        criterion_2_solver_vs_oracle(&runs, elapsed),
    ));
    results.push((
        "3 dominance transitivity/irreflexivity/antisymmetry",
        criterion_3_dominance_order(),
    ));
    results.push(("4 degenerate reductions", criterion_4_degenerate()));
    results.push((
        "5 termination and swap-count bounds at m=1000",
        criterion_5_large_instances(),
    ));
    results.push((
        "6 stage-3 preservation",
        criterion_6_stage3_preservation(&runs),
    ));
    results.push((
        "7 fast checkers agree with oracle",
        criterion_7_oracle_agreement(&runs),
    ));

    let mut failed = 0;
    for (name, result) in &results {
        let tag = if result.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {name}: {}", result.detail);
        failed += usize::from(!result.passed);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all {} acceptance criteria passed", results.len());
}
