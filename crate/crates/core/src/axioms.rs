//! Dominance between type distributions, type optimality and justified
//! envy-freeness, each with a checker that returns a witness on failure.

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Committee, Instance, ModelError, TypeDistribution};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AxiomError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("unknown type index {0}")]
    UnknownType(usize),
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("committee has {actual} members, expected {expected}")]
    WrongCommitteeSize { expected: usize, actual: usize },
    #[error("membership violation: {0}")]
    MembershipViolation(String),
}

/// Per-type shortfall `max(0, q̲(t) − τ(W)(t))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeficitVector(Vec<u32>);

impl DeficitVector {
    pub fn new(dist: &TypeDistribution, quotas: &[u32]) -> Result<Self, AxiomError> {
        check_lengths(dist, quotas)?;
        Ok(Self(
            dist.counts()
                .iter()
                .zip(quotas)
                .map(|(&x, &q)| q.saturating_sub(x))
                .collect(),
        ))
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&d| u64::from(d)).sum()
    }
}

/// An exchange of one committee member for one non-member.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Swap {
    pub out: usize,
    pub incoming: usize,
}

/// An outsider (`envier`) with justified envy towards a member (`envied`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EnvyPair {
    pub envier: usize,
    pub envied: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomReport {
    pub type_optimal: bool,
    pub jef: bool,
    pub optimality_witness: Option<Swap>,
    pub envy_witness: Option<EnvyPair>,
}

impl AxiomReport {
    pub fn holds(&self) -> bool {
        self.type_optimal && self.jef
    }
}

fn check_lengths(dist: &TypeDistribution, quotas: &[u32]) -> Result<(), AxiomError> {
    if dist.len() != quotas.len() {
        return Err(AxiomError::LengthMismatch(format!(
            "distribution has {} types, quota vector has {}",
            dist.len(),
            quotas.len()
        )));
    }
    Ok(())
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

pub fn is_under_represented(
    dist: &TypeDistribution,
    quotas: &[u32],
    t: usize,
) -> Result<bool, AxiomError> {
    check_lengths(dist, quotas)?;
    if t >= quotas.len() {
        return Err(AxiomError::UnknownType(t));
    }
    Ok(dist.get(t) < quotas[t])
}

/// Whether distribution `x` dominates `y` under lower quotas `quotas`.
///
/// `x` dominates `y` when every type satisfied in `y` stays satisfied in `x`,
/// no under-represented type of `y` has a larger shortfall in `x`, and at least
/// one type of `y` that is under-represented is either satisfied in `x` or has a
/// strictly smaller shortfall there. The last clause is strict: no distribution
/// dominates itself.
pub fn dominates(
    x: &TypeDistribution,
    y: &TypeDistribution,
    quotas: &[u32],
) -> Result<bool, AxiomError> {
    check_lengths(x, quotas)?;
    check_lengths(y, quotas)?;

    let mut improved = false;
    for ((&xi, &yi), &q) in x.counts().iter().zip(y.counts()).zip(quotas) {
        if yi >= q {
            if xi < q {
                return Ok(false);
            }
        } else if xi >= q {
            improved = true;
        } else {
            let (dx, dy) = (q - xi, q - yi);
            if dx > dy {
                return Ok(false);
            }
            improved |= dx < dy;
        }
    }
    Ok(improved)
}

/// Working view of a committee used by the swap and envy scans.
///
/// Both scans reduce to two masks over types:
/// `improving` holds types with count below quota, `fragile` holds types whose
/// count is at most the quota. Removing a member with a fragile type that the
/// replacement lacks either breaks a satisfied quota or deepens a shortfall,
/// and the same condition is what blocks justified envy.
#[derive(Debug, Clone)]
pub(crate) struct ScanState {
    pub(crate) members: FixedBitSet,
    pub(crate) counts: Vec<u32>,
    improving: FixedBitSet,
    fragile: FixedBitSet,
}

impl ScanState {
    pub(crate) fn new(instance: &Instance, committee: &Committee) -> Self {
        let mut members = FixedBitSet::with_capacity(instance.num_candidates());
        let mut counts = vec![0u32; instance.num_types()];
        for c in committee.iter() {
            members.insert(c);
            for t in instance.types_of(c) {
                counts[t] += 1;
            }
        }
        let mut state = Self {
            members,
            counts,
            improving: FixedBitSet::with_capacity(instance.num_types()),
            fragile: FixedBitSet::with_capacity(instance.num_types()),
        };
        state.refresh_masks(instance);
        state
    }

    fn refresh_masks(&mut self, instance: &Instance) {
        for (t, (&count, &q)) in self.counts.iter().zip(instance.lower_quotas()).enumerate() {
            self.improving.set(t, count < q);
            self.fragile.set(t, count <= q);
        }
    }

    pub(crate) fn contains(&self, c: usize) -> bool {
        self.members.contains(c)
    }

    pub(crate) fn add(&mut self, instance: &Instance, c: usize) {
        self.members.insert(c);
        for t in instance.types_of(c) {
            self.counts[t] += 1;
        }
        self.refresh_masks(instance);
    }

    pub(crate) fn apply(&mut self, instance: &Instance, swap: Swap) {
        self.members.set(swap.out, false);
        self.members.insert(swap.incoming);
        for t in instance.types_of(swap.out) {
            self.counts[t] -= 1;
        }
        for t in instance.types_of(swap.incoming) {
            self.counts[t] += 1;
        }
        self.refresh_masks(instance);
    }

    pub(crate) fn is_under_represented(&self, t: usize) -> bool {
        self.improving.contains(t)
    }

    pub(crate) fn committee(&self) -> Committee {
        self.members.ones().collect()
    }

    /// Whether every fragile type of `out` is also held by `incoming`.
    fn removal_is_safe(&self, instance: &Instance, out: usize, incoming: usize) -> bool {
        let tau_in = instance.type_mask(incoming);
        instance
            .type_mask(out)
            .intersection(&self.fragile)
            .all(|t| tau_in.contains(t))
    }

    pub(crate) fn swap_dominates(&self, instance: &Instance, out: usize, incoming: usize) -> bool {
        let tau_out = instance.type_mask(out);
        instance
            .type_mask(incoming)
            .intersection(&self.improving)
            .any(|t| !tau_out.contains(t))
            && self.removal_is_safe(instance, out, incoming)
    }

    pub(crate) fn has_justified_envy(
        &self,
        instance: &Instance,
        envier: usize,
        envied: usize,
    ) -> bool {
        instance.strictly_prefers(envier, envied) && self.removal_is_safe(instance, envied, envier)
    }

    /// First dominating swap: incoming candidates best first, outgoing members
    /// worst first.
    pub(crate) fn find_dominating_swap(&self, instance: &Instance) -> Option<Swap> {
        let ranking = instance.ranking();
        for &incoming in ranking.iter().filter(|&&c| !self.contains(c)) {
            if instance.type_mask(incoming).is_disjoint(&self.improving) {
                continue;
            }
            for &out in ranking.iter().rev().filter(|&&c| self.contains(c)) {
                if self.swap_dominates(instance, out, incoming) {
                    return Some(Swap { out, incoming });
                }
            }
        }
        None
    }

    /// First justified-envy pair: enviers best first, envied members worst first.
    pub(crate) fn find_jef_violation(&self, instance: &Instance) -> Option<EnvyPair> {
        let ranking = instance.ranking();
        for &envier in ranking.iter().filter(|&&c| !self.contains(c)) {
            for &envied in ranking.iter().rev().filter(|&&c| self.contains(c)) {
                if !instance.strictly_prefers(envier, envied) {
                    break;
                }
                if self.removal_is_safe(instance, envied, envier) {
                    return Some(EnvyPair { envier, envied });
                }
            }
        }
        None
    }
}

/// A swap `(out, incoming)` whose result dominates the committee's type
/// distribution, or `None` when the committee is type optimal.
pub fn find_dominating_swap(
    instance: &Instance,
    committee: &Committee,
) -> Result<Option<Swap>, AxiomError> {
    check_size(instance, committee)?;
    Ok(ScanState::new(instance, committee).find_dominating_swap(instance))
}

pub fn is_type_optimal(instance: &Instance, committee: &Committee) -> Result<bool, AxiomError> {
    Ok(find_dominating_swap(instance, committee)?.is_none())
}

/// Whether outsider `envier` has justified envy towards member `envied`.
pub fn has_justified_envy(
    instance: &Instance,
    committee: &Committee,
    envier: usize,
    envied: usize,
) -> Result<bool, AxiomError> {
    instance.check_committee(committee)?;
    for c in [envier, envied] {
        if c >= instance.num_candidates() {
            return Err(ModelError::UnknownCandidate(format!("#{c}")).into());
        }
    }
    if committee.contains(envier) {
        return Err(AxiomError::MembershipViolation(format!(
            "envier `{}` is already in the committee",
            instance.candidate_id(envier)
        )));
    }
    if !committee.contains(envied) {
        return Err(AxiomError::MembershipViolation(format!(
            "envied `{}` is not in the committee",
            instance.candidate_id(envied)
        )));
    }
    Ok(ScanState::new(instance, committee).has_justified_envy(instance, envier, envied))
}

pub fn find_jef_violation(
    instance: &Instance,
    committee: &Committee,
) -> Result<Option<EnvyPair>, AxiomError> {
    check_size(instance, committee)?;
    Ok(ScanState::new(instance, committee).find_jef_violation(instance))
}

pub fn audit(instance: &Instance, committee: &Committee) -> Result<AxiomReport, AxiomError> {
    check_size(instance, committee)?;
    let state = ScanState::new(instance, committee);
    let optimality_witness = state.find_dominating_swap(instance);
    let envy_witness = state.find_jef_violation(instance);
    Ok(AxiomReport {
        type_optimal: optimality_witness.is_none(),
        jef: envy_witness.is_none(),
        optimality_witness,
        envy_witness,
    })
}
