//! Seeded random instances.
//!
//! The generator is fully specified so that the same seed yields the same
//! instance in any implementation. See `docs/generator.md` for the normative
//! description of the PRNG and draw order.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Instance, RawInstance};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
}

/// SplitMix64 (Steele, Lea and Flood), 64-bit state.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// `next_u64() % bound`. `bound` must be positive.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        self.next_u64() % bound
    }

    /// Bernoulli draw: `next_f64() < p`.
    pub fn chance(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub m: usize,
    pub types: usize,
    pub k: usize,
    /// Probability that a candidate holds a given type.
    pub density: f64,
    /// Quotas are drawn uniformly from `0..=floor(tightness * k)`.
    pub tightness: f64,
    /// Probability that a candidate joins the tier of the one ranked just above.
    pub tie_probability: f64,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            m: 6,
            types: 3,
            k: 3,
            density: 0.5,
            tightness: 0.5,
            tie_probability: 0.0,
            seed: 1,
        }
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<(), GenError> {
        if self.k > self.m {
            return Err(GenError::InvalidParams(format!(
                "k = {} exceeds m = {}",
                self.k, self.m
            )));
        }
        for (name, p) in [
            ("density", self.density),
            ("tightness", self.tightness),
            ("tie_probability", self.tie_probability),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(GenError::InvalidParams(format!(
                    "{name} = {p} not in [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

pub fn random_instance(params: &GenParams) -> Result<Instance, GenError> {
    params.validate()?;
    let mut rng = SplitMix64::new(params.seed);
    let candidates: Vec<String> = (1..=params.m).map(|i| format!("c{i}")).collect();
    let types: Vec<String> = (1..=params.types).map(|i| format!("t{i}")).collect();

    // 1. membership, row-major
    let membership = (0..params.m)
        .map(|_| {
            (0..params.types)
                .map(|_| i64::from(rng.chance(params.density)))
                .collect()
        })
        .collect();

    // 2. ranking: Fisher-Yates from the back, then tie flags for positions 1..m
    let mut order: Vec<usize> = (0..params.m).collect();
    for i in (1..params.m).rev() {
        let j = rng.next_below(i as u64 + 1) as usize;
        order.swap(i, j);
    }
    let mut priority_tiers: Vec<Vec<String>> = Vec::new();
    for (pos, &c) in order.iter().enumerate() {
        let tie = pos > 0 && rng.chance(params.tie_probability);
        match priority_tiers.last_mut() {
            Some(tier) if tie => tier.push(candidates[c].clone()),
            _ => priority_tiers.push(vec![candidates[c].clone()]),
        }
    }

    // 3. quotas
    let max_quota = (params.tightness * params.k as f64).floor() as u64;
    let lower_quotas = (0..params.types)
        .map(|_| rng.next_below(max_quota + 1) as i64)
        .collect();

    Instance::validate(RawInstance {
        candidates,
        priority_tiers,
        types,
        membership,
        lower_quotas,
        committee_size: params.k as i64,
    })
    .map_err(|e| GenError::InvalidParams(e.to_string()))
}

/// Parameters for one instance of a seeded batch: `1 ≤ m ≤ max_m`,
/// `1 ≤ k ≤ m`, between 1 and `max_types` types, density in `[0.1, 0.7)`,
/// tightness in `[0.2, 1)` and tie probability in `[0, 0.5)`, all drawn from
/// `SplitMix64(seed)` in that order. The instance itself uses the same `seed`.
pub fn sampled_params(seed: u64, max_m: usize, max_types: usize) -> GenParams {
    let mut rng = SplitMix64::new(seed);
    let m = 1 + rng.next_below(max_m.max(1) as u64) as usize;
    let k = 1 + rng.next_below(m as u64) as usize;
    let types = 1 + rng.next_below(max_types.max(1) as u64) as usize;
    GenParams {
        m,
        types,
        k,
        density: 0.1 + 0.6 * rng.next_f64(),
        tightness: 0.2 + 0.8 * rng.next_f64(),
        tie_probability: 0.5 * rng.next_f64(),
        seed,
    }
}
