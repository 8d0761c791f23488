//! Stopping rules and their simulators.

pub mod baseline;
pub mod decompose;
pub(crate) mod engine;
pub mod imperfect;
pub mod tightness;
pub mod time;

pub use baseline::{median_of_max, single_threshold_baseline};
pub use decompose::{critical_value, decompose, DecompositionResult, SmallnessMode};
pub use imperfect::{
    frequent_guarantee, imperfect_prophet_policy, kth_order_guarantee, removal_budget, strong_imperfect_policy,
    FrequentOutcome, ImperfectOutcome, KthOutcome, StrongOutcome,
};
pub use tightness::{iid_opt_ratio, tightness_instance};
pub use time::{
    restricted_small_policy, run_restricted_small, run_time_policy, small_prophets_policy, RestrictedRun,
    TimePolicy,
};
