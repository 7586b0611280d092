//! Brute-force reference checks for small instances.
//!
//! Everything here is written directly from the definitions over full type
//! distributions and does not reuse the fast checkers in [`crate::axioms`],
//! so agreement between the two is a meaningful cross-check.

use itertools::Itertools;
use thiserror::Error;

use crate::model::{Committee, Instance};
use crate::solver::{self, TieBreakPolicy};

/// Default ceiling on the number of committees (or exchanges) an oracle run
/// may enumerate.
pub const DEFAULT_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance too large for the oracle: {required} enumerations exceed cap {cap}")]
    InstanceTooLarge { required: u128, cap: u64 },
    #[error("committee has {actual} members, expected {expected}")]
    WrongCommitteeSize { expected: usize, actual: usize },
}

/// `n choose r`, saturating at `u128::MAX`.
pub fn binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

fn within_cap(required: u128, cap: u64) -> Result<(), OracleError> {
    if required > u128::from(cap) {
        Err(OracleError::InstanceTooLarge { required, cap })
    } else {
        Ok(())
    }
}

/// Every size-`k` committee exactly once, in lexicographic order of member
/// indices.
pub fn enumerate_committees(
    instance: &Instance,
    cap: u64,
) -> Result<impl Iterator<Item = Committee>, OracleError> {
    let m = instance.num_candidates();
    let k = instance.committee_size();
    within_cap(binomial(m, k), cap)?;
    Ok((0..m).combinations(k).map(Committee::from_iter))
}

fn distribution(instance: &Instance, members: impl IntoIterator<Item = usize>) -> Vec<i64> {
    let mut counts = vec![0i64; instance.num_types()];
    for c in members {
        for (t, slot) in counts.iter_mut().enumerate() {
            if instance.has_type(c, t) {
                *slot += 1;
            }
        }
    }
    counts
}

/// The three dominance conditions, checked one by one.
fn literal_dominates(x: &[i64], y: &[i64], q: &[i64]) -> bool {
    let n = q.len();
    let cond1 = (0..n).filter(|&i| y[i] >= q[i]).all(|i| x[i] >= q[i]);
    let cond2 = (0..n)
        .filter(|&i| y[i] < q[i])
        .all(|i| x[i] >= q[i] || (x[i] - q[i]).abs() <= (y[i] - q[i]).abs());
    let cond3 = (0..n).any(|i| {
        (y[i] < q[i] && x[i] >= q[i])
            || (x[i] < q[i] && y[i] < q[i] && (x[i] - q[i]).abs() < (y[i] - q[i]).abs())
    });
    cond1 && cond2 && cond3
}

fn quotas(instance: &Instance) -> Vec<i64> {
    instance
        .lower_quotas()
        .iter()
        .map(|&q| i64::from(q))
        .collect()
}

/// No single exchange of a member for a non-member yields a dominating
/// distribution.
pub fn oracle_type_optimal(instance: &Instance, committee: &Committee) -> bool {
    let q = quotas(instance);
    let current = distribution(instance, committee.iter());
    let outsiders: Vec<usize> = (0..instance.num_candidates())
        .filter(|&c| !committee.contains(c))
        .collect();
    committee.iter().all(|out| {
        outsiders.iter().all(|&incoming| {
            let next = distribution(instance, committee.swapped(out, incoming).iter());
            !literal_dominates(&next, &current, &q)
        })
    })
}

/// No outsider strictly outranks a member without some type of the member
/// (and not of the outsider) sitting at or below its quota.
pub fn oracle_jef(instance: &Instance, committee: &Committee) -> bool {
    let q = quotas(instance);
    let current = distribution(instance, committee.iter());
    let tier = |c: usize| instance.tier_of(c);
    for envier in (0..instance.num_candidates()).filter(|&c| !committee.contains(c)) {
        for envied in committee.iter() {
            if tier(envier) >= tier(envied) {
                continue;
            }
            let blocked = (0..instance.num_types()).any(|t| {
                instance.has_type(envied, t) && !instance.has_type(envier, t) && current[t] <= q[t]
            });
            if !blocked {
                return false;
            }
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub committees: Vec<Committee>,
    pub type_optimal: Vec<bool>,
    pub jef: Vec<bool>,
}

impl OracleResult {
    pub fn type_optimal_set(&self) -> impl Iterator<Item = &Committee> {
        self.select(|i| self.type_optimal[i])
    }

    pub fn jef_set(&self) -> impl Iterator<Item = &Committee> {
        self.select(|i| self.jef[i])
    }

    pub fn intersection(&self) -> impl Iterator<Item = &Committee> {
        self.select(|i| self.type_optimal[i] && self.jef[i])
    }

    /// Verdicts `(type_optimal, jef)` for a committee, if it was enumerated.
    pub fn verdicts(&self, committee: &Committee) -> Option<(bool, bool)> {
        let i = self.committees.binary_search(committee).ok()?;
        Some((self.type_optimal[i], self.jef[i]))
    }

    fn select(&self, keep: impl Fn(usize) -> bool) -> impl Iterator<Item = &Committee> {
        self.committees
            .iter()
            .enumerate()
            .filter(move |&(i, _)| keep(i))
            .map(|(_, c)| c)
    }
}

/// Classifies every size-`k` committee under both axioms.
pub fn oracle_axiom_sets(instance: &Instance, cap: u64) -> Result<OracleResult, OracleError> {
    let committees: Vec<Committee> = enumerate_committees(instance, cap)?.collect();
    let type_optimal = committees
        .iter()
        .map(|w| oracle_type_optimal(instance, w))
        .collect();
    let jef = committees.iter().map(|w| oracle_jef(instance, w)).collect();
    Ok(OracleResult {
        committees,
        type_optimal,
        jef,
    })
}

/// Whether no simultaneous exchange of up to `swap_size_limit` members for
/// equally many non-members yields a dominating distribution.
pub fn global_type_optimality_check(
    instance: &Instance,
    committee: &Committee,
    swap_size_limit: usize,
    cap: u64,
) -> Result<bool, OracleError> {
    if committee.len() != instance.committee_size() {
        return Err(OracleError::WrongCommitteeSize {
            expected: instance.committee_size(),
            actual: committee.len(),
        });
    }
    let members: Vec<usize> = committee.iter().collect();
    let outsiders: Vec<usize> = (0..instance.num_candidates())
        .filter(|&c| !committee.contains(c))
        .collect();
    let limit = swap_size_limit.min(members.len()).min(outsiders.len());
    let required = (1..=limit)
        .map(|s| binomial(members.len(), s).saturating_mul(binomial(outsiders.len(), s)))
        .fold(0u128, u128::saturating_add);
    within_cap(required, cap)?;

    let q = quotas(instance);
    let current = distribution(instance, members.iter().copied());
    for size in 1..=limit {
        for leaving in members.iter().copied().combinations(size) {
            for joining in outsiders.iter().copied().combinations(size) {
                let next = members
                    .iter()
                    .copied()
                    .filter(|c| !leaving.contains(c))
                    .chain(joining.iter().copied());
                if literal_dominates(&distribution(instance, next), &current, &q) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certification {
    pub output: Committee,
    pub passed: bool,
    pub intersection: Vec<Committee>,
}

/// Runs the solver and checks its output against the oracle's classification.
pub fn certify_solver(
    instance: &Instance,
    policy: &TieBreakPolicy,
    cap: u64,
) -> Result<Certification, OracleError> {
    let sets = oracle_axiom_sets(instance, cap)?;
    let output = solver::solve(instance, policy).committee;
    let passed = sets.verdicts(&output) == Some((true, true));
    Ok(Certification {
        output,
        passed,
        intersection: sets.intersection().cloned().collect(),
    })
}
