//! The three-stage committee rule: greedy quota fill, dominance swaps,
//! then justified-envy swaps.

use serde::{Deserialize, Serialize};

use crate::axioms::{self, AxiomError, AxiomReport, ScanState, Swap};
use crate::model::{Committee, Instance};

/// How stage 1 picks among several under-represented types.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TypeSelection {
    /// First eligible type in the policy's type order.
    #[default]
    Lexicographic,
    /// Largest remaining deficit; ties go to the earlier type in the order.
    LargestDeficit,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TieBreakPolicy {
    pub type_selection: TypeSelection,
    /// Type indices in priority order. `None` means input order. Types left
    /// out of a partial order rank after the listed ones, in input order.
    pub type_order: Option<Vec<usize>>,
}

impl TieBreakPolicy {
    pub fn largest_deficit() -> Self {
        Self {
            type_selection: TypeSelection::LargestDeficit,
            type_order: None,
        }
    }

    fn resolved_order(&self, num_types: usize) -> Vec<usize> {
        let mut order = Vec::with_capacity(num_types);
        let mut seen = vec![false; num_types];
        for &t in self.type_order.iter().flatten() {
            if t < num_types && !seen[t] {
                seen[t] = true;
                order.push(t);
            }
        }
        order.extend((0..num_types).filter(|&t| !seen[t]));
        order
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    GreedyAdd {
        type_index: usize,
        candidate: usize,
    },
    TopUpAdd {
        candidate: usize,
    },
    DominanceSwap {
        out: usize,
        incoming: usize,
        before: Vec<u32>,
        after: Vec<u32>,
    },
    EnvySwap {
        out: usize,
        incoming: usize,
    },
}

impl TraceEvent {
    fn stage(&self) -> u8 {
        match self {
            TraceEvent::GreedyAdd { .. } | TraceEvent::TopUpAdd { .. } => 1,
            TraceEvent::DominanceSwap { .. } => 2,
            TraceEvent::EnvySwap { .. } => 3,
        }
    }

    /// Applies the event to a committee under construction.
    pub fn apply(&self, committee: &mut Committee) {
        match *self {
            TraceEvent::GreedyAdd { candidate, .. } | TraceEvent::TopUpAdd { candidate } => {
                committee.insert(candidate);
            }
            TraceEvent::DominanceSwap { out, incoming, .. }
            | TraceEvent::EnvySwap { out, incoming } => {
                committee.remove(out);
                committee.insert(incoming);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCounters {
    pub greedy_adds: usize,
    pub top_up_adds: usize,
    pub dominance_swaps: usize,
    pub envy_swaps: usize,
    /// Stage-2/stage-3 rounds run after stage 1.
    pub rounds: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolveTrace {
    pub events: Vec<TraceEvent>,
    pub counters: StageCounters,
}

impl SolveTrace {
    fn push(&mut self, event: TraceEvent) {
        match event {
            TraceEvent::GreedyAdd { .. } => self.counters.greedy_adds += 1,
            TraceEvent::TopUpAdd { .. } => self.counters.top_up_adds += 1,
            TraceEvent::DominanceSwap { .. } => self.counters.dominance_swaps += 1,
            TraceEvent::EnvySwap { .. } => self.counters.envy_swaps += 1,
        }
        self.events.push(event);
    }

    fn extend(&mut self, events: Vec<TraceEvent>) {
        for event in events {
            self.push(event);
        }
    }

    /// Committee obtained by replaying every event from the empty set.
    pub fn replay(&self) -> Committee {
        let mut committee = Committee::new();
        for event in &self.events {
            event.apply(&mut committee);
        }
        committee
    }

    /// Committees before and after each event, in order.
    pub fn steps(&self) -> impl Iterator<Item = (Committee, &TraceEvent, Committee)> + '_ {
        let mut current = Committee::new();
        self.events.iter().map(move |event| {
            let before = current.clone();
            event.apply(&mut current);
            (before, event, current.clone())
        })
    }

    /// Stage-1 events come first; after that, within each round, stage-2
    /// events precede stage-3 events.
    pub fn stages_in_order(&self) -> bool {
        self.events
            .windows(2)
            .all(|w| w[0].stage() <= w[1].stage() || (w[0].stage() == 3 && w[1].stage() == 2))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub committee: Committee,
    pub trace: SolveTrace,
    pub report: AxiomReport,
}

impl Solution {
    /// Stage-2 swaps beyond the number of candidates. The swap count is only
    /// guaranteed to stay within the total initial deficit.
    pub fn dominance_swaps_exceed_candidates(&self, instance: &Instance) -> bool {
        self.trace.counters.dominance_swaps > instance.num_candidates()
    }
}

/// Stage 1: repeatedly add the best unselected candidate of an
/// under-represented type, then fill the remaining seats by rank.
///
/// A type qualifies only while some unselected candidate holds it, so types
/// nobody can satisfy are skipped.
pub fn stage1_greedy_fill(
    instance: &Instance,
    policy: &TieBreakPolicy,
) -> (Committee, Vec<TraceEvent>) {
    let k = instance.committee_size();
    let order = policy.resolved_order(instance.num_types());
    let mut state = ScanState::new(instance, &Committee::new());
    let mut events = Vec::new();

    while events.len() < k {
        let best_unselected_of = |t: usize| {
            instance
                .ranking()
                .iter()
                .copied()
                .find(|&c| !state.contains(c) && instance.has_type(c, t))
        };
        let eligible = order
            .iter()
            .copied()
            .filter(|&t| state.is_under_represented(t))
            .filter_map(|t| best_unselected_of(t).map(|c| (t, c)));
        let pick = match policy.type_selection {
            TypeSelection::Lexicographic => eligible.into_iter().next(),
            TypeSelection::LargestDeficit => eligible
                .enumerate()
                .max_by_key(|&(pos, (t, _))| {
                    (instance.quota(t) - state.counts[t], std::cmp::Reverse(pos))
                })
                .map(|(_, pick)| pick),
        };
        let Some((type_index, candidate)) = pick else {
            break;
        };
        state.add(instance, candidate);
        events.push(TraceEvent::GreedyAdd {
            type_index,
            candidate,
        });
    }

    let missing = k - events.len();
    let top_up: Vec<usize> = instance
        .ranking()
        .iter()
        .copied()
        .filter(|&c| !state.contains(c))
        .take(missing)
        .collect();
    for candidate in top_up {
        state.add(instance, candidate);
        events.push(TraceEvent::TopUpAdd { candidate });
    }

    (state.committee(), events)
}

fn check_size(instance: &Instance, committee: &Committee) -> Result<(), AxiomError> {
    instance.check_committee(committee)?;
    if committee.len() != instance.committee_size() {
        return Err(AxiomError::WrongCommitteeSize {
            expected: instance.committee_size(),
            actual: committee.len(),
        });
    }
    Ok(())
}

/// Stage 2: apply dominating swaps until the committee is type optimal.
pub fn stage2_dominance_swaps(
    instance: &Instance,
    committee: &Committee,
) -> Result<(Committee, Vec<TraceEvent>), AxiomError> {
    check_size(instance, committee)?;
    let mut state = ScanState::new(instance, committee);
    let mut events = Vec::new();
    while let Some(swap) = state.find_dominating_swap(instance) {
        let before = state.counts.clone();
        state.apply(instance, swap);
        events.push(TraceEvent::DominanceSwap {
            out: swap.out,
            incoming: swap.incoming,
            before,
            after: state.counts.clone(),
        });
    }
    Ok((state.committee(), events))
}

/// Stage 3: swap out envied members for their enviers until no justified
/// envy remains.
pub fn stage3_envy_swaps(
    instance: &Instance,
    committee: &Committee,
) -> Result<(Committee, Vec<TraceEvent>), AxiomError> {
    check_size(instance, committee)?;
    let mut state = ScanState::new(instance, committee);
    let mut events = Vec::new();
    while let Some(pair) = state.find_jef_violation(instance) {
        state.apply(
            instance,
            Swap {
                out: pair.envied,
                incoming: pair.envier,
            },
        );
        events.push(TraceEvent::EnvySwap {
            out: pair.envied,
            incoming: pair.envier,
        });
    }
    Ok((state.committee(), events))
}

/// Runs the three stages once, exactly in order.
///
/// Envy swaps never deepen a shortfall, but they can open up a dominating
/// swap that did not exist before, so the result is not always type optimal.
/// [`solve`] repeats stages 2 and 3 until both axioms hold.
pub fn solve_single_pass(instance: &Instance, policy: &TieBreakPolicy) -> Solution {
    let mut trace = SolveTrace::default();
    let (committee, events) = stage1_greedy_fill(instance, policy);
    trace.extend(events);
    // Stage 1 always yields exactly k members, so the size checks cannot fail.
    let (committee, events) =
        stage2_dominance_swaps(instance, &committee).expect("stage 1 yields k members");
    trace.extend(events);
    let (committee, events) =
        stage3_envy_swaps(instance, &committee).expect("stage 2 preserves size");
    trace.extend(events);
    trace.counters.rounds = 1;
    finish(instance, committee, trace)
}

/// Stage 1, then alternating rounds of stage 2 and stage 3 until a round ends
/// with a committee that is both type optimal and free of justified envy.
///
/// Every round terminates, and rounds cannot cycle: no swap increases any
/// per-type deficit, dominance swaps strictly lower the total deficit, and
/// envy swaps strictly improve the members' ranks.
pub fn solve(instance: &Instance, policy: &TieBreakPolicy) -> Solution {
    let mut trace = SolveTrace::default();
    let (mut committee, events) = stage1_greedy_fill(instance, policy);
    trace.extend(events);
    loop {
        trace.counters.rounds += 1;
        let (next, events) =
            stage2_dominance_swaps(instance, &committee).expect("stage 1 yields k members");
        trace.extend(events);
        let (next, events) = stage3_envy_swaps(instance, &next).expect("stage 2 preserves size");
        let settled = events.is_empty()
            || ScanState::new(instance, &next)
                .find_dominating_swap(instance)
                .is_none();
        trace.extend(events);
        committee = next;
        if settled {
            break;
        }
    }
    finish(instance, committee, trace)
}

fn finish(instance: &Instance, committee: Committee, trace: SolveTrace) -> Solution {
    let report = axioms::audit(instance, &committee).expect("solver output has k members");
    Solution {
        committee,
        trace,
        report,
    }
}
