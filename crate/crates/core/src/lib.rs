//! Committee selection with soft type-based lower quotas.
//!
//! A committee of size `k` is chosen from candidates ranked by a weak order.
//! Each candidate holds zero or more binary types, and each type has a lower
//! quota that is treated as a target rather than a hard constraint. The
//! [`solver`] returns committees that are type optimal (no single swap improves
//! the quota situation) and free of justified envy (no outsider outranks a
//! member whose removal would leave the quotas intact).

pub mod axioms;
pub mod generator;
pub mod io;
pub mod model;
pub mod oracle;
pub mod solver;

pub use axioms::{
    audit, dominates, find_dominating_swap, find_jef_violation, has_justified_envy,
    is_type_optimal, is_under_represented, AxiomError, AxiomReport, DeficitVector, EnvyPair, Swap,
};
pub use generator::{random_instance, GenError, GenParams};
pub use io::{parse_instance, parse_result, serialize_instance, serialize_result, ParseError};
pub use model::{Committee, Instance, ModelError, RawInstance, TypeDistribution};
pub use solver::{
    solve, solve_single_pass, stage1_greedy_fill, stage2_dominance_swaps, stage3_envy_swaps,
    Solution, SolveTrace, TieBreakPolicy, TraceEvent, TypeSelection,
};
