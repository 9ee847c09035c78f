//! Monte Carlo harness: draws seeded random joints, evaluates each scenario
//! per trial, and collects empirical CDFs of the pre-randomization worst
//! magnitude, the realized block magnitude, and the normalized loss.
//!
//! Trials are independent; each derives its own generator seed from the
//! master seed and trial index, so parallel and serial runs produce
//! bit-identical results.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{derive_seed, random_joint, DistributionSpec, JointDistribution};
use crate::error::{Error, Result};
use crate::format::{ext_real, sig12};
use crate::lift::{self, LiftTable};
use crate::relaxation::{self, RelaxationParams};

/// One experiment scenario. `delta = 0` means the strict watchdog partition
/// with no relaxation; a positive delta runs the greedy pass with the given
/// budgets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub eps: f64,
    pub delta: f64,
    #[serde(with = "ext_real")]
    pub eps_bar: f64,
}

impl Scenario {
    /// Strict watchdog scenario.
    pub fn watchdog(eps: f64) -> Self {
        Self {
            eps,
            delta: 0.0,
            eps_bar: f64::INFINITY,
        }
    }

    pub fn relaxed(eps: f64, delta: f64, eps_bar: f64) -> Self {
        Self {
            eps,
            delta,
            eps_bar,
        }
    }

    pub fn is_relaxed(&self) -> bool {
        self.delta > 0.0
    }

    fn validate(&self) -> Result<()> {
        if self.eps.is_nan() || self.eps <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "scenario eps must be positive, got {}",
                self.eps
            )));
        }
        if self.is_relaxed() {
            RelaxationParams::new(self.eps, self.delta, self.eps_bar)?;
        }
        Ok(())
    }

    /// Compact identifier used in exported files.
    pub fn id(&self) -> String {
        if self.is_relaxed() {
            let ebar = if self.eps_bar.is_finite() {
                format!("{}", self.eps_bar)
            } else {
                "inf".to_string()
            };
            format!("eps{}_delta{}_ebar{}", self.eps, self.delta, ebar)
        } else {
            format!("eps{}_delta0", self.eps)
        }
    }
}

/// Metrics the harness can record per trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Worst magnitude over the watchdog randomized block, before any
    /// randomization is applied.
    MaxLiftBefore,
    /// Realized block magnitude of the scenario's final partition.
    EpsCAfter,
    /// Normalized loss of the scenario's final partition.
    Nmil,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::MaxLiftBefore, Metric::EpsCAfter, Metric::Nmil];

    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::MaxLiftBefore => "max_lift_before",
            Metric::EpsCAfter => "eps_c_after",
            Metric::Nmil => "nmil",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "max_lift_before" => Ok(Metric::MaxLiftBefore),
            "eps_c_after" => Ok(Metric::EpsCAfter),
            "nmil" => Ok(Metric::Nmil),
            other => Err(Error::Parse(format!("unknown metric {other:?}"))),
        }
    }
}

/// Full experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n_trials: usize,
    pub dist_spec: DistributionSpec,
    pub scenarios: Vec<Scenario>,
    pub metrics: Vec<Metric>,
}

impl ExperimentConfig {
    pub fn new(
        n_trials: usize,
        dist_spec: DistributionSpec,
        scenarios: Vec<Scenario>,
        metrics: Vec<Metric>,
    ) -> Result<Self> {
        if n_trials == 0 {
            return Err(Error::InvalidParams("n_trials must be >= 1".to_string()));
        }
        if scenarios.is_empty() {
            return Err(Error::InvalidParams("no scenarios given".to_string()));
        }
        for sc in &scenarios {
            sc.validate()?;
        }
        if metrics.is_empty() {
            return Err(Error::InvalidParams("no metrics requested".to_string()));
        }
        let mut dedup = Vec::new();
        for m in metrics {
            if !dedup.contains(&m) {
                dedup.push(m);
            }
        }
        Ok(Self {
            n_trials,
            dist_spec,
            scenarios,
            metrics: dedup,
        })
    }

    fn wants(&self, metric: Metric) -> bool {
        self.metrics.contains(&metric)
    }
}

/// Per-trial values for one scenario. `None` means the metric was not
/// requested, except for `max_lift_before`, which is also `None` when the
/// watchdog randomized set is empty (flagged by `randomized_empty`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub randomized_empty: bool,
    pub max_lift_before: Option<f64>,
    pub eps_c: Option<f64>,
    pub nmil: Option<f64>,
}

/// All trial records for one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub scenario: Scenario,
    pub records: Vec<TrialRecord>,
}

impl ScenarioResult {
    fn values(&self, metric: Metric) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().filter_map(move |r| match metric {
            Metric::MaxLiftBefore => r.max_lift_before,
            Metric::EpsCAfter => r.eps_c,
            Metric::Nmil => r.nmil,
        })
    }

    /// Empirical CDF of the finite samples of `metric`.
    pub fn cdf(&self, metric: Metric) -> EmpiricalCdf {
        EmpiricalCdf::new(self.values(metric).filter(|v| v.is_finite()).collect())
    }

    /// Trials whose recorded value overflowed to +inf (possible only for
    /// joints with zero cells, never for generated ones).
    pub fn n_infinite(&self, metric: Metric) -> usize {
        self.values(metric).filter(|v| v.is_infinite()).count()
    }

    /// Trials whose watchdog randomized set was empty.
    pub fn n_empty(&self) -> usize {
        self.records.iter().filter(|r| r.randomized_empty).count()
    }

    /// Fraction of trials with a recorded block magnitude strictly below `t`.
    pub fn fraction_eps_c_below(&self, t: f64) -> Option<f64> {
        let values: Vec<f64> = self.values(Metric::EpsCAfter).collect();
        if values.is_empty() {
            return None;
        }
        Some(values.iter().filter(|&&v| v < t).count() as f64 / values.len() as f64)
    }

    pub fn mean(&self, metric: Metric) -> Option<f64> {
        let values: Vec<f64> = self.values(metric).filter(|v| v.is_finite()).collect();
        if values.is_empty() {
            return None;
        }
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Results of a full experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub scenarios: Vec<ScenarioResult>,
}

/// Runs the experiment: trial `t` generates a joint from the seed derived
/// from `(master seed, t)` and evaluates every scenario on it.
/// Per-trial failures abort the run, tagged with the trial index.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    for sc in &config.scenarios {
        sc.validate()?;
    }
    let per_trial: Vec<Vec<TrialRecord>> = (0..config.n_trials)
        .into_par_iter()
        .map(|t| {
            run_trial(config, t).map_err(|e| Error::Trial {
                index: t,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;

    let scenarios = config
        .scenarios
        .iter()
        .enumerate()
        .map(|(k, &scenario)| ScenarioResult {
            scenario,
            records: per_trial.iter().map(|trial| trial[k]).collect(),
        })
        .collect();
    Ok(ExperimentResult {
        config: config.clone(),
        scenarios,
    })
}

fn run_trial(config: &ExperimentConfig, t: usize) -> Result<Vec<TrialRecord>> {
    let spec = DistributionSpec {
        seed: derive_seed(config.dist_spec.seed, t as u64),
        ..config.dist_spec
    };
    let joint = random_joint(&spec);
    let table = LiftTable::from_joint(&joint);

    config
        .scenarios
        .iter()
        .map(|sc| evaluate_scenario(config, &joint, &table, sc, t))
        .collect()
}

fn evaluate_scenario(
    config: &ExperimentConfig,
    joint: &JointDistribution,
    table: &LiftTable,
    scenario: &Scenario,
    trial: usize,
) -> Result<TrialRecord> {
    let watchdog = table.watchdog_partition(scenario.eps);
    let randomized_empty = watchdog.randomized().is_empty();

    let max_lift_before = if config.wants(Metric::MaxLiftBefore) && !randomized_empty {
        Some(
            watchdog
                .randomized()
                .iter()
                .flat_map(|&x| table.lifts().iter().map(move |row| row[x].abs()))
                .fold(0.0_f64, f64::max),
        )
    } else {
        None
    };

    let final_partition = if scenario.is_relaxed() {
        let params = RelaxationParams::new(scenario.eps, scenario.delta, scenario.eps_bar)?;
        relaxation::greedy_partition(joint, &params)?
            .report
            .partition
    } else {
        watchdog
    };

    let eps_c = if config.wants(Metric::EpsCAfter) {
        Some(if final_partition.randomized().is_empty() {
            0.0
        } else {
            lift::epsilon_of_subset(joint, final_partition.randomized())?
        })
    } else {
        None
    };

    let nmil = if config.wants(Metric::Nmil) {
        Some(crate::utility::nmil(joint, final_partition.randomized())?)
    } else {
        None
    };

    Ok(TrialRecord {
        trial,
        randomized_empty,
        max_lift_before,
        eps_c,
        nmil,
    })
}

/// Sorted empirical sample with CDF evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    samples: Vec<f64>,
}

impl EmpiricalCdf {
    /// Sorts the samples; NaN inputs are not supported anywhere upstream.
    pub fn new(mut samples: Vec<f64>) -> Self {
        samples.sort_by(f64::total_cmp);
        Self { samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Fraction of samples <= t; 0 for an empty sample.
    pub fn fraction_le(&self, t: f64) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        let count = self.samples.partition_point(|&v| v <= t);
        count as f64 / self.samples.len() as f64
    }

    /// Lower empirical quantile: the smallest sample value v with
    /// fraction_le(v) >= q.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if self.samples.is_empty() {
            return Err(Error::EmptySample);
        }
        let n = self.samples.len();
        let k = ((q * n as f64).ceil() as usize).clamp(1, n);
        Ok(self.samples[k - 1])
    }
}

/// Lower empirical quantile of a CDF; method form is [`EmpiricalCdf::quantile`].
pub fn cdf_quantile(cdf: &EmpiricalCdf, q: f64) -> Result<f64> {
    cdf.quantile(q)
}

/// Writes all CDFs as delimited rows (scenario_id, value,
/// cumulative_fraction), one block per scenario and metric, each block
/// sorted by value. The scenario id carries the metric name.
pub fn write_cdf_csv<W: Write>(result: &ExperimentResult, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for sr in &result.scenarios {
        for &metric in &result.config.metrics {
            let id = format!("{}:{}", sr.scenario.id(), metric.as_str());
            let cdf = sr.cdf(metric);
            let n = cdf.len();
            for (i, &v) in cdf.samples().iter().enumerate() {
                wtr.write_record([id.as_str(), &sig12(v), &sig12((i + 1) as f64 / n as f64)])
                    .map_err(|e| Error::Parse(e.to_string()))?;
            }
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Per-scenario quantile digest of one metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub metric: String,
    pub n: usize,
    pub n_infinite: usize,
    pub q01: Option<f64>,
    pub q05: Option<f64>,
    pub q50: Option<f64>,
    pub q95: Option<f64>,
    pub q99: Option<f64>,
    pub mean: Option<f64>,
}

/// Per-scenario digest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub scenario_id: String,
    pub scenario: Scenario,
    pub n_trials: usize,
    pub n_empty: usize,
    pub metrics: Vec<MetricSummary>,
    /// Fraction of trials whose realized block magnitude stayed below eps.
    pub frac_eps_c_below_eps: Option<f64>,
    pub mean_nmil: Option<f64>,
}

/// Whole-experiment digest: the structured summary file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n_trials: usize,
    pub n_s: usize,
    pub n_x: usize,
    pub seed: u64,
    pub scenarios: Vec<ScenarioSummary>,
}

impl Summary {
    pub fn from_result(result: &ExperimentResult) -> Self {
        let scenarios = result
            .scenarios
            .iter()
            .map(|sr| {
                let metrics = result
                    .config
                    .metrics
                    .iter()
                    .map(|&m| {
                        let cdf = sr.cdf(m);
                        let q = |p: f64| cdf.quantile(p).ok();
                        MetricSummary {
                            metric: m.as_str().to_string(),
                            n: cdf.len(),
                            n_infinite: sr.n_infinite(m),
                            q01: q(0.01),
                            q05: q(0.05),
                            q50: q(0.50),
                            q95: q(0.95),
                            q99: q(0.99),
                            mean: sr.mean(m),
                        }
                    })
                    .collect();
                ScenarioSummary {
                    scenario_id: sr.scenario.id(),
                    scenario: sr.scenario,
                    n_trials: sr.records.len(),
                    n_empty: sr.n_empty(),
                    metrics,
                    frac_eps_c_below_eps: sr.fraction_eps_c_below(sr.scenario.eps),
                    mean_nmil: sr.mean(Metric::Nmil),
                }
            })
            .collect();
        Summary {
            n_trials: result.config.n_trials,
            n_s: result.config.dist_spec.n_s,
            n_x: result.config.dist_spec.n_x,
            seed: result.config.dist_spec.seed,
            scenarios,
        }
    }
}

/// Writes the structured summary as JSON.
pub fn write_summary_json<W: Write>(result: &ExperimentResult, writer: W) -> Result<()> {
    serde_json::to_writer_pretty(writer, &Summary::from_result(result))
        .map_err(|e| Error::Parse(e.to_string()))
}
