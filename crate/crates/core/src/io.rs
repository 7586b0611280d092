//! JSON documents for instances and solver results.
//!
//! Instance document:
//!
//! ```json
//! {
//!   "types": ["t1", "t2"],
//!   "candidates": [{"id": "c1", "types": ["t1"]}, {"id": "c2", "types": []}],
//!   "priority": [["c1"], ["c2"]],
//!   "quotas": {"t1": 1},
//!   "k": 1,
//!   "group_quotas": [{"types": ["t1", "t2"], "bound": 1}]
//! }
//! ```
//!
//! Types missing from `quotas` get quota 0. `group_quotas` is optional; each
//! entry adds an artificial type covering the listed types (named `any(…)`
//! unless `name` is given). Unknown keys are rejected.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::axioms::{AxiomReport, EnvyPair, Swap};
use crate::model::{Committee, Instance, ModelError, RawInstance};
use crate::solver::{SolveTrace, StageCounters, TraceEvent};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("missing required key `priority`")]
    PriorityMissing,
    #[error("{location}: unknown type `{id}`")]
    UnknownType { location: String, id: String },
    #[error("{location}: unknown candidate `{id}`")]
    UnknownCandidate { location: String, id: String },
    #[error("{location}: {source}")]
    Invalid {
        location: String,
        #[source]
        source: ModelError,
    },
}

impl From<serde_json::Error> for ParseError {
    fn from(e: serde_json::Error) -> Self {
        ParseError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateEntry {
    pub id: String,
    #[serde(default)]
    pub types: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupQuota {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub types: Vec<String>,
    pub bound: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub types: Vec<String>,
    pub candidates: Vec<CandidateEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub priority: Option<Vec<Vec<String>>>,
    #[serde(default)]
    pub quotas: IndexMap<String, i64>,
    pub k: i64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub group_quotas: Vec<GroupQuota>,
}

impl InstanceDocument {
    pub fn from_instance(instance: &Instance) -> Self {
        let raw = instance.to_raw();
        let candidates = (0..instance.num_candidates())
            .map(|c| CandidateEntry {
                id: instance.candidate_id(c).to_owned(),
                types: instance
                    .types_of(c)
                    .map(|t| instance.type_id(t).to_owned())
                    .collect(),
            })
            .collect();
        Self {
            types: raw.types.clone(),
            candidates,
            priority: Some(raw.priority_tiers),
            quotas: raw.types.into_iter().zip(raw.lower_quotas).collect(),
            k: raw.committee_size,
            group_quotas: Vec::new(),
        }
    }

    pub fn into_instance(self) -> Result<Instance, ParseError> {
        let priority = self.priority.ok_or(ParseError::PriorityMissing)?;
        let type_pos: IndexMap<&str, usize> = self
            .types
            .iter()
            .enumerate()
            .map(|(i, t)| (t.as_str(), i))
            .collect();

        let mut membership = Vec::with_capacity(self.candidates.len());
        for (i, entry) in self.candidates.iter().enumerate() {
            let mut row = vec![0i64; self.types.len()];
            for t in &entry.types {
                let &pos = type_pos
                    .get(t.as_str())
                    .ok_or_else(|| ParseError::UnknownType {
                        location: format!("candidates[{i}].types"),
                        id: t.clone(),
                    })?;
                row[pos] = 1;
            }
            membership.push(row);
        }

        let mut lower_quotas = vec![0i64; self.types.len()];
        for (t, &q) in &self.quotas {
            let &pos = type_pos
                .get(t.as_str())
                .ok_or_else(|| ParseError::UnknownType {
                    location: "quotas".into(),
                    id: t.clone(),
                })?;
            lower_quotas[pos] = q;
        }

        let candidate_ids: Vec<String> = self.candidates.into_iter().map(|c| c.id).collect();
        for (tier, group) in priority.iter().enumerate() {
            if let Some(id) = group.iter().find(|id| !candidate_ids.contains(id)) {
                return Err(ParseError::UnknownCandidate {
                    location: format!("priority[{tier}]"),
                    id: id.clone(),
                });
            }
        }

        let mut instance = Instance::validate(RawInstance {
            candidates: candidate_ids,
            priority_tiers: priority,
            types: self.types,
            membership,
            lower_quotas,
            committee_size: self.k,
        })
        .map_err(|source| ParseError::Invalid {
            location: locate(&source).into(),
            source,
        })?;

        for (i, group) in self.group_quotas.iter().enumerate() {
            let location = format!("group_quotas[{i}]");
            let bound = u32::try_from(group.bound).map_err(|_| ParseError::Invalid {
                location: location.clone(),
                source: ModelError::NegativeQuota {
                    type_id: group.name.clone().unwrap_or_default(),
                    value: group.bound,
                },
            })?;
            let expanded = match &group.name {
                Some(name) => instance.expand_group_quota_named(name, &group.types, bound),
                None => instance.expand_group_quota(&group.types, bound),
            };
            instance = expanded.map_err(|source| match source {
                ModelError::UnknownType(id) => ParseError::UnknownType { location, id },
                source => ParseError::Invalid { location, source },
            })?;
        }
        Ok(instance)
    }
}

fn locate(e: &ModelError) -> &'static str {
    match e {
        ModelError::DuplicateId { kind: "type", .. } => "types",
        ModelError::DuplicateId { .. } => "candidates",
        ModelError::MatrixShapeMismatch { .. } | ModelError::NonBinaryEntry { .. } => "candidates",
        ModelError::NegativeQuota { .. } => "quotas",
        ModelError::KOutOfRange { .. } => "k",
        ModelError::TierNotPartition { .. } => "priority",
        ModelError::UnknownCandidate(_) => "priority",
        ModelError::UnknownType(_) | ModelError::EmptySubset => "group_quotas",
    }
}

pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    serde_json::from_str::<InstanceDocument>(text)?.into_instance()
}

pub fn serialize_instance(instance: &Instance) -> String {
    to_pretty(&InstanceDocument::from_instance(instance))
}

fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("documents serialize");
    text.push('\n');
    text
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwapDocument {
    pub out: String,
    #[serde(rename = "in")]
    pub incoming: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvyDocument {
    pub envier: String,
    pub envied: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDocument {
    pub type_optimal: bool,
    pub jef: bool,
    pub optimality_witness: Option<SwapDocument>,
    pub envy_witness: Option<EnvyDocument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case", deny_unknown_fields)]
pub enum EventDocument {
    GreedyAdd {
        #[serde(rename = "type")]
        type_id: String,
        candidate: String,
    },
    TopUpAdd {
        candidate: String,
    },
    DominanceSwap {
        out: String,
        #[serde(rename = "in")]
        incoming: String,
        before: Vec<u32>,
        after: Vec<u32>,
    },
    EnvySwap {
        out: String,
        #[serde(rename = "in")]
        incoming: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceDocument {
    pub events: Vec<EventDocument>,
    pub counters: StageCounters,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultDocument {
    /// Member ids in candidate input order.
    pub members: Vec<String>,
    pub report: ReportDocument,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<TraceDocument>,
}

impl ResultDocument {
    pub fn new(
        instance: &Instance,
        committee: &Committee,
        trace: Option<&SolveTrace>,
        report: &AxiomReport,
    ) -> Self {
        let id = |c: usize| instance.candidate_id(c).to_owned();
        let swap = |s: &Swap| SwapDocument {
            out: id(s.out),
            incoming: id(s.incoming),
        };
        let envy = |p: &EnvyPair| EnvyDocument {
            envier: id(p.envier),
            envied: id(p.envied),
        };
        let event = |e: &TraceEvent| match e {
            TraceEvent::GreedyAdd {
                type_index,
                candidate,
            } => EventDocument::GreedyAdd {
                type_id: instance.type_id(*type_index).to_owned(),
                candidate: id(*candidate),
            },
            TraceEvent::TopUpAdd { candidate } => EventDocument::TopUpAdd {
                candidate: id(*candidate),
            },
            TraceEvent::DominanceSwap {
                out,
                incoming,
                before,
                after,
            } => EventDocument::DominanceSwap {
                out: id(*out),
                incoming: id(*incoming),
                before: before.clone(),
                after: after.clone(),
            },
            TraceEvent::EnvySwap { out, incoming } => EventDocument::EnvySwap {
                out: id(*out),
                incoming: id(*incoming),
            },
        };
        Self {
            members: instance.committee_ids(committee),
            report: ReportDocument {
                type_optimal: report.type_optimal,
                jef: report.jef,
                optimality_witness: report.optimality_witness.as_ref().map(swap),
                envy_witness: report.envy_witness.as_ref().map(envy),
            },
            trace: trace.map(|t| TraceDocument {
                events: t.events.iter().map(event).collect(),
                counters: t.counters,
            }),
        }
    }

    pub fn committee(&self, instance: &Instance) -> Result<Committee, ModelError> {
        instance.committee_from_ids(&self.members)
    }
}

pub fn serialize_result(
    instance: &Instance,
    committee: &Committee,
    trace: Option<&SolveTrace>,
    report: &AxiomReport,
) -> String {
    to_pretty(&ResultDocument::new(instance, committee, trace, report))
}

pub fn parse_result(text: &str) -> Result<ResultDocument, ParseError> {
    Ok(serde_json::from_str(text)?)
}
