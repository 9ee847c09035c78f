//! Shared instance builders for the benchmarks.

use loglift::{random_joint, DistributionSpec, JointDistribution};

/// A generated joint of the figure-experiment size.
pub fn figure_sized_joint(seed: u64) -> JointDistribution {
    random_joint(&DistributionSpec::new(15, 20, seed).unwrap())
}

/// A generated joint small enough for exhaustive search.
pub fn oracle_sized_joint(seed: u64) -> JointDistribution {
    random_joint(&DistributionSpec::new(6, 10, seed).unwrap())
}
