//! Log-lift privacy analysis for finite joint distributions.
//!
//! Given a joint distribution p(s, x) over a sensitive variable S and a
//! useful variable X, this crate measures per-pair and per-subset log-lift,
//! splits X into symbols safe to publish and symbols to randomize, builds
//! the block-structured release channels that realize the tightest possible
//! post-randomization lift bound, and evaluates the resulting
//! privacy-utility tradeoff. A probabilistic relaxation trades a bounded
//! breach probability for utility via a greedy partitioning pass, checked
//! against an exhaustive oracle, and a Monte Carlo harness collects
//! empirical CDFs of all of it over seeded random instances.
//!
//! All logarithms are natural (nats). Lifts are extended reals: zero joint
//! cells produce -inf lifts and +inf per-symbol maxima; NaN never appears.
//!
//! ```
//! use loglift::{epsilon_c, greedy_partition, watchdog_partition, RelaxationParams};
//!
//! let joint = loglift::JointDistribution::from_probs(vec![
//!     vec![0.25, 0.05, 0.08, 0.12],
//!     vec![0.05, 0.20, 0.15, 0.10],
//! ])
//! .unwrap();
//!
//! let partition = watchdog_partition(&joint, 0.5);
//! assert_eq!(partition.randomized(), &[0, 1]);
//! assert!((epsilon_c(&joint, 0.5) - 0.09531).abs() < 1e-5);
//!
//! let params = RelaxationParams::new(0.5, 0.40, 1.2).unwrap();
//! let outcome = greedy_partition(&joint, &params).unwrap();
//! assert_eq!(outcome.report.partition.randomized(), &[0]);
//! ```

pub mod distributions;
pub mod error;
pub mod format;
pub mod lift;
pub mod mechanism;
pub mod relaxation;
pub mod simulation;
pub mod utility;

pub use distributions::{
    derive_seed, load_joint, random_joint, read_joint_csv, read_joint_json, sample_simplex,
    save_joint, write_joint_csv, write_joint_json, DistributionSpec, JointDistribution,
};
pub use error::{Error, Result};
pub use lift::{
    critical_epsilons, epsilon_eff, epsilon_of_subset, lift_table, subset_lift, watchdog_partition,
    CriticalLadder, CriticalValue, LiftTable, Partition,
};
pub use mechanism::{
    attainable, epsilon_c, falsify_optimality, ChannelMatrix, ChannelSampler, Mechanism,
    OutputStats, RandomizationMode,
};
pub use relaxation::{
    brute_force_partition, delta0, delta_of_subset, delta_total, greedy_partition,
    refine_candidates, BruteForceOptions, GreedyMove, GreedyOutcome, MoveDecision, PrivacyReport,
    RelaxationParams,
};
pub use simulation::{
    cdf_quantile, run_experiment, write_cdf_csv, write_summary_json, EmpiricalCdf,
    ExperimentConfig, ExperimentResult, Metric, Scenario, ScenarioResult, Summary, TrialRecord,
};
pub use utility::{entropy, mutual_information, nmil, UtilityReport};
