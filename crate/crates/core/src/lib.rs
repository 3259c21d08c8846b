//! Joint limit laws of extremes and sums for i.i.d. samples with finite
//! variance: the limiting distributions, samplers for the base laws and the
//! limiting point process, a Monte Carlo engine and an almost-sure
//! (logarithmic-average) estimator.

pub mod aslt;
pub mod dist;
pub mod engine;
pub mod error;
pub mod limits;
mod params;
pub mod point_process;
pub mod rng;
pub mod scenarios;
pub mod stats;
pub mod topk;

pub use dist::{catalog, BaseDistribution, NormingConstants, StandardizedDistribution};
pub use error::{Error, Result};
pub use limits::{
    count_constraint_prob, kth_max_joint_cdf, std_normal_cdf, top_k_joint_cdf, two_level_joint_cdf,
    EvLimit, LevelVector,
};
pub use point_process::{exceedance_counts, simulate_limit_process, IntervalSet, PointPattern};
pub use rng::{child_rng, DEFAULT_SEED};
