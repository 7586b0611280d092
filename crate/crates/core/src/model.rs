//! Instance model: candidates ranked by a weak order, binary type membership,
//! soft lower quotas and a target committee size.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use fixedbitset::FixedBitSet;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("duplicate {kind} identifier `{id}`")]
    DuplicateId { kind: &'static str, id: String },
    #[error("membership matrix shape mismatch: {detail}")]
    MatrixShapeMismatch { detail: String },
    #[error("membership entry ({candidate}, {type_id}) is {value}, expected 0 or 1")]
    NonBinaryEntry {
        candidate: String,
        type_id: String,
        value: i64,
    },
    #[error("lower quota of type `{type_id}` is negative ({value})")]
    NegativeQuota { type_id: String, value: i64 },
    #[error("committee size {k} out of range 0..={m}")]
    KOutOfRange { k: i64, m: usize },
    #[error("priority tiers do not partition the candidates: {detail}")]
    TierNotPartition { detail: String },
    #[error("unknown candidate `{0}`")]
    UnknownCandidate(String),
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("type subset is empty")]
    EmptySubset,
}

/// Unvalidated instance data, as it arrives from a caller or a document.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawInstance {
    pub candidates: Vec<String>,
    pub priority_tiers: Vec<Vec<String>>,
    pub types: Vec<String>,
    /// One row per candidate, one column per type.
    pub membership: Vec<Vec<i64>>,
    pub lower_quotas: Vec<i64>,
    pub committee_size: i64,
}

/// A validated committee selection instance.
///
/// Candidates and types are addressed by their position in the input lists.
/// The weak order is stored as tiers; tier 0 is the most preferred and
/// candidates sharing a tier are tied.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    candidates: Vec<String>,
    types: Vec<String>,
    membership: Vec<FixedBitSet>,
    tiers: Vec<Vec<usize>>,
    tier_of: Vec<usize>,
    quotas: Vec<u32>,
    k: usize,
    /// Candidates sorted best first: by tier, then by input order.
    ranking: Vec<usize>,
    candidate_index: HashMap<String, usize>,
    type_index: HashMap<String, usize>,
}

impl Instance {
    pub fn validate(raw: RawInstance) -> Result<Self, ModelError> {
        let RawInstance {
            candidates,
            priority_tiers,
            types,
            membership,
            lower_quotas,
            committee_size,
        } = raw;

        let candidate_index = index_ids("candidate", &candidates)?;
        let type_index = index_ids("type", &types)?;
        let m = candidates.len();
        let ell = types.len();

        if membership.len() != m {
            return Err(ModelError::MatrixShapeMismatch {
                detail: format!("{} rows for {} candidates", membership.len(), m),
            });
        }
        let mut rows = Vec::with_capacity(m);
        for (c, row) in membership.iter().enumerate() {
            if row.len() != ell {
                return Err(ModelError::MatrixShapeMismatch {
                    detail: format!(
                        "row of `{}` has {} entries for {} types",
                        candidates[c],
                        row.len(),
                        ell
                    ),
                });
            }
            let mut bits = FixedBitSet::with_capacity(ell);
            for (t, &value) in row.iter().enumerate() {
                match value {
                    0 => {}
                    1 => bits.insert(t),
                    _ => {
                        return Err(ModelError::NonBinaryEntry {
                            candidate: candidates[c].clone(),
                            type_id: types[t].clone(),
                            value,
                        })
                    }
                }
            }
            rows.push(bits);
        }

        if lower_quotas.len() != ell {
            return Err(ModelError::MatrixShapeMismatch {
                detail: format!("{} quotas for {} types", lower_quotas.len(), ell),
            });
        }
        let mut quotas = Vec::with_capacity(ell);
        for (t, &q) in lower_quotas.iter().enumerate() {
            let q = u32::try_from(q).map_err(|_| ModelError::NegativeQuota {
                type_id: types[t].clone(),
                value: q,
            })?;
            quotas.push(q);
        }

        if committee_size < 0 || committee_size as u64 > m as u64 {
            return Err(ModelError::KOutOfRange {
                k: committee_size,
                m,
            });
        }

        let mut tier_of = vec![usize::MAX; m];
        let mut tiers = Vec::with_capacity(priority_tiers.len());
        for (tier, group) in priority_tiers.iter().enumerate() {
            if group.is_empty() {
                return Err(ModelError::TierNotPartition {
                    detail: format!("tier {tier} is empty"),
                });
            }
            let mut members = Vec::with_capacity(group.len());
            for id in group {
                let &c = candidate_index
                    .get(id)
                    .ok_or_else(|| ModelError::TierNotPartition {
                        detail: format!("tier {tier} names unknown candidate `{id}`"),
                    })?;
                if tier_of[c] != usize::MAX {
                    return Err(ModelError::TierNotPartition {
                        detail: format!("candidate `{id}` appears in more than one place"),
                    });
                }
                tier_of[c] = tier;
                members.push(c);
            }
            members.sort_unstable();
            tiers.push(members);
        }
        if let Some(c) = tier_of.iter().position(|&t| t == usize::MAX) {
            return Err(ModelError::TierNotPartition {
                detail: format!("candidate `{}` is not ranked", candidates[c]),
            });
        }

        let ranking = tiers.iter().flatten().copied().collect();

        Ok(Self {
            candidates,
            types,
            membership: rows,
            tiers,
            tier_of,
            quotas,
            k: committee_size as usize,
            ranking,
            candidate_index,
            type_index,
        })
    }

    pub fn num_candidates(&self) -> usize {
        self.candidates.len()
    }

    pub fn num_types(&self) -> usize {
        self.types.len()
    }

    pub fn committee_size(&self) -> usize {
        self.k
    }

    pub fn candidates(&self) -> &[String] {
        &self.candidates
    }

    pub fn types(&self) -> &[String] {
        &self.types
    }

    pub fn candidate_id(&self, c: usize) -> &str {
        &self.candidates[c]
    }

    pub fn type_id(&self, t: usize) -> &str {
        &self.types[t]
    }

    pub fn candidate_index(&self, id: &str) -> Result<usize, ModelError> {
        self.candidate_index
            .get(id)
            .copied()
            .ok_or_else(|| ModelError::UnknownCandidate(id.to_owned()))
    }

    pub fn type_index(&self, id: &str) -> Result<usize, ModelError> {
        self.type_index
            .get(id)
            .copied()
            .ok_or_else(|| ModelError::UnknownType(id.to_owned()))
    }

    pub fn lower_quotas(&self) -> &[u32] {
        &self.quotas
    }

    pub fn quota(&self, t: usize) -> u32 {
        self.quotas[t]
    }

    pub fn tiers(&self) -> &[Vec<usize>] {
        &self.tiers
    }

    pub fn tier_of(&self, c: usize) -> usize {
        self.tier_of[c]
    }

    /// All candidates, best first. Ties within a tier keep input order.
    pub fn ranking(&self) -> &[usize] {
        &self.ranking
    }

    /// `a ≻ b`: `a` sits in a strictly better tier than `b`.
    pub fn strictly_prefers(&self, a: usize, b: usize) -> bool {
        self.tier_of[a] < self.tier_of[b]
    }

    pub fn has_type(&self, c: usize, t: usize) -> bool {
        self.membership[c].contains(t)
    }

    pub fn type_mask(&self, c: usize) -> &FixedBitSet {
        &self.membership[c]
    }

    /// Indices of the types candidate `c` belongs to.
    pub fn types_of(&self, c: usize) -> impl Iterator<Item = usize> + '_ {
        self.membership[c].ones()
    }

    pub fn candidate_types(&self, id: &str) -> Result<BTreeSet<&str>, ModelError> {
        let c = self.candidate_index(id)?;
        Ok(self.types_of(c).map(|t| self.types[t].as_str()).collect())
    }

    pub fn membership_row(&self, c: usize) -> Vec<i64> {
        (0..self.num_types())
            .map(|t| i64::from(self.has_type(c, t)))
            .collect()
    }

    pub fn type_distribution(&self, committee: &Committee) -> Result<TypeDistribution, ModelError> {
        self.check_committee(committee)?;
        let mut counts = vec![0u32; self.num_types()];
        for c in committee.iter() {
            for t in self.types_of(c) {
                counts[t] += 1;
            }
        }
        Ok(TypeDistribution::new(counts))
    }

    pub fn check_committee(&self, committee: &Committee) -> Result<(), ModelError> {
        match committee.iter().find(|&c| c >= self.num_candidates()) {
            Some(c) => Err(ModelError::UnknownCandidate(format!("#{c}"))),
            None => Ok(()),
        }
    }

    pub fn committee_from_ids<S: AsRef<str>>(&self, ids: &[S]) -> Result<Committee, ModelError> {
        ids.iter()
            .map(|id| self.candidate_index(id.as_ref()))
            .collect()
    }

    pub fn committee_ids(&self, committee: &Committee) -> Vec<String> {
        committee
            .iter()
            .map(|c| self.candidates[c].clone())
            .collect()
    }

    /// Top-`k` candidates of the ranking; ties broken by input order.
    pub fn top_k(&self) -> Committee {
        self.ranking[..self.k].iter().copied().collect()
    }

    /// Adds an artificial type marking candidates that hold at least one
    /// type of `type_subset`, with lower quota `bound`.
    ///
    /// The new type is named `any(a|b|…)` after the subset, in input type order.
    pub fn expand_group_quota<S: AsRef<str>>(
        &self,
        type_subset: &[S],
        bound: u32,
    ) -> Result<Instance, ModelError> {
        if type_subset.is_empty() {
            return Err(ModelError::EmptySubset);
        }
        let mut subset = type_subset
            .iter()
            .map(|t| self.type_index(t.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        subset.sort_unstable();
        subset.dedup();

        let name = format!(
            "any({})",
            subset
                .iter()
                .map(|&t| self.types[t].as_str())
                .collect::<Vec<_>>()
                .join("|")
        );
        self.with_extra_type(name, bound, |c| subset.iter().any(|&t| self.has_type(c, t)))
    }

    /// Same as [`Instance::expand_group_quota`] but with a caller-chosen name for
    /// the artificial type.
    pub fn expand_group_quota_named<S: AsRef<str>>(
        &self,
        name: &str,
        type_subset: &[S],
        bound: u32,
    ) -> Result<Instance, ModelError> {
        if type_subset.is_empty() {
            return Err(ModelError::EmptySubset);
        }
        let subset = type_subset
            .iter()
            .map(|t| self.type_index(t.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        self.with_extra_type(name.to_owned(), bound, |c| {
            subset.iter().any(|&t| self.has_type(c, t))
        })
    }

    fn with_extra_type(
        &self,
        name: String,
        bound: u32,
        member: impl Fn(usize) -> bool,
    ) -> Result<Instance, ModelError> {
        let mut raw = self.to_raw();
        raw.types.push(name);
        for (c, row) in raw.membership.iter_mut().enumerate() {
            row.push(i64::from(member(c)));
        }
        raw.lower_quotas.push(i64::from(bound));
        Instance::validate(raw)
    }

    pub fn to_raw(&self) -> RawInstance {
        RawInstance {
            candidates: self.candidates.clone(),
            priority_tiers: self
                .tiers
                .iter()
                .map(|tier| tier.iter().map(|&c| self.candidates[c].clone()).collect())
                .collect(),
            types: self.types.clone(),
            membership: (0..self.num_candidates())
                .map(|c| self.membership_row(c))
                .collect(),
            lower_quotas: self.quotas.iter().map(|&q| i64::from(q)).collect(),
            committee_size: self.k as i64,
        }
    }

    /// Copy of this instance with different lower quotas.
    pub fn with_quotas(&self, quotas: Vec<u32>) -> Result<Instance, ModelError> {
        let mut raw = self.to_raw();
        raw.lower_quotas = quotas.into_iter().map(i64::from).collect();
        Instance::validate(raw)
    }

    /// Copy of this instance with a different committee size.
    pub fn with_committee_size(&self, k: usize) -> Result<Instance, ModelError> {
        let mut raw = self.to_raw();
        raw.committee_size = k as i64;
        Instance::validate(raw)
    }
}

fn index_ids(kind: &'static str, ids: &[String]) -> Result<HashMap<String, usize>, ModelError> {
    let mut seen = HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(ModelError::DuplicateId {
                kind,
                id: id.clone(),
            });
        }
    }
    Ok(ids
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, id)| (id, i))
        .collect())
}

/// A set of candidates, addressed by index into [`Instance::candidates`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Committee {
    members: BTreeSet<usize>,
}

impl Committee {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, c: usize) -> bool {
        self.members.contains(&c)
    }

    pub fn insert(&mut self, c: usize) -> bool {
        self.members.insert(c)
    }

    pub fn remove(&mut self, c: usize) -> bool {
        self.members.remove(&c)
    }

    /// `self ∖ {out} ∪ {incoming}`.
    pub fn swapped(&self, out: usize, incoming: usize) -> Committee {
        let mut next = self.clone();
        next.remove(out);
        next.insert(incoming);
        next
    }

    /// Members in increasing index order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }
}

impl FromIterator<usize> for Committee {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Self {
            members: iter.into_iter().collect(),
        }
    }
}

/// Per-type member counts `τ(W)` of a committee.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TypeDistribution {
    counts: Vec<u32>,
}

impl TypeDistribution {
    pub fn new(counts: Vec<u32>) -> Self {
        Self { counts }
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn get(&self, t: usize) -> u32 {
        self.counts[t]
    }
}

impl From<Vec<u32>> for TypeDistribution {
    fn from(counts: Vec<u32>) -> Self {
        Self::new(counts)
    }
}

impl fmt::Display for TypeDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.counts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}
