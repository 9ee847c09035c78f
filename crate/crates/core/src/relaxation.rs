//! Probabilistic relaxation of the strict lift bound: breach-probability
//! accounting, the greedy partitioning algorithm that exempts low-risk
//! symbols from randomization, and the exhaustive oracle it is benchmarked
//! against.
//!
//! A bi-partition is feasible for a budget pair (eps, delta) when the total
//! probability of the lift magnitude breaching eps — per kept symbol, plus
//! the randomized block as a whole — stays within delta. The extra cap
//! eps_bar bounds the magnitude that even the exempted events may reach.

use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::JointDistribution;
use crate::error::{Error, Result};
use crate::format::ext_real;
use crate::lift::{
    self, epsilon_of_subset_normalized, subset_lift_normalized, LiftTable, Partition, BOUNDARY_TOL,
};
use crate::utility::UtilityReport;

/// Budget parameters of the relaxed guarantee.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelaxationParams {
    /// Lift-magnitude threshold in nats.
    pub eps: f64,
    /// Allowed breach probability, in (0, 1).
    pub delta: f64,
    /// Hard cap on the magnitude, > eps; may be infinite.
    #[serde(with = "ext_real")]
    pub eps_bar: f64,
}

impl RelaxationParams {
    pub fn new(eps: f64, delta: f64, eps_bar: f64) -> Result<Self> {
        if !eps.is_finite() || eps < 0.0 {
            return Err(Error::InvalidParams(format!(
                "eps must be a nonnegative real, got {eps}"
            )));
        }
        if delta.is_nan() || delta <= 0.0 || delta >= 1.0 {
            return Err(Error::InvalidParams(format!(
                "delta must lie in (0, 1), got {delta}"
            )));
        }
        if eps_bar.is_nan() || eps_bar <= eps {
            return Err(Error::InvalidParams(format!(
                "eps_bar ({eps_bar}) must exceed eps ({eps})"
            )));
        }
        Ok(Self {
            eps,
            delta,
            eps_bar,
        })
    }
}

/// Probability mass of the subset's lift magnitude breaching `eps`:
/// the sum of p(s, Q) over sensitive symbols with |i(s, Q)| > eps.
///
/// On a singleton this sums exactly the joint cells whose per-pair
/// magnitude exceeds eps; on larger subsets the block lift is what counts.
pub fn delta_of_subset(joint: &JointDistribution, eps: f64, subset: &[usize]) -> Result<f64> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let mut member = vec![false; joint.n_x()];
    for &x in subset {
        if x >= joint.n_x() {
            return Err(Error::IndexOutOfRange {
                index: x,
                size: joint.n_x(),
            });
        }
        member[x] = true;
    }
    let sorted: Vec<usize> = (0..joint.n_x()).filter(|&x| member[x]).collect();
    Ok(delta_of_subset_normalized(joint, eps, &sorted))
}

fn delta_of_subset_normalized(joint: &JointDistribution, eps: f64, subset: &[usize]) -> f64 {
    // The leading 0.0 keeps an empty sum at +0.0.
    0.0 + (0..joint.n_s())
        .filter(|&s| subset_lift_normalized(joint, subset, s).abs() > eps + BOUNDARY_TOL)
        .map(|s| subset.iter().map(|&x| joint.prob(s, x)).sum::<f64>())
        .sum::<f64>()
}

/// Overall breach probability of a bi-partition: per-symbol contributions
/// for the kept side plus the randomized block's contribution (zero when
/// that block is empty).
pub fn delta_total(joint: &JointDistribution, eps: f64, partition: &Partition) -> f64 {
    let kept: f64 = 0.0
        + partition
            .kept()
            .iter()
            .map(|&x| delta_of_subset_normalized(joint, eps, std::slice::from_ref(&x)))
            .sum::<f64>();
    let randomized = if partition.randomized().is_empty() {
        0.0
    } else {
        delta_of_subset_normalized(joint, eps, partition.randomized())
    };
    kept + randomized
}

/// Breach probability of the pure watchdog partition at `eps` — the floor
/// below which no delta buys any relaxation. The kept side contributes
/// nothing by construction, so this equals the randomized block's term.
pub fn delta0(joint: &JointDistribution, eps: f64) -> f64 {
    delta_total(joint, eps, &lift::watchdog_partition(joint, eps))
}

/// The candidate list for the greedy pass: watchdog-randomized symbols that
/// could be exempted without immediately breaking either budget, sorted by
/// ascending per-symbol breach probability (ties by ascending index).
pub fn refine_candidates(joint: &JointDistribution, params: &RelaxationParams) -> Vec<usize> {
    let table = LiftTable::from_joint(joint);
    refine_candidates_with_table(joint, &table, params)
}

fn refine_candidates_with_table(
    joint: &JointDistribution,
    table: &LiftTable,
    params: &RelaxationParams,
) -> Vec<usize> {
    let watchdog = table.watchdog_partition(params.eps);
    let mut scored: Vec<(usize, f64)> = watchdog
        .randomized()
        .iter()
        .copied()
        .filter(|&x| table.eps_x()[x] <= params.eps_bar + BOUNDARY_TOL)
        .map(|x| {
            let d = delta_of_subset_normalized(joint, params.eps, std::slice::from_ref(&x));
            (x, d)
        })
        .filter(|&(_, d)| d <= params.delta + BOUNDARY_TOL)
        .collect();
    // Ascending breach probability; the sort is stable, so equal scores keep
    // ascending index order.
    scored.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("breach masses are finite"));
    scored.into_iter().map(|(x, _)| x).collect()
}

/// Why a greedy candidate move was or was not taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveDecision {
    Accepted,
    NoUtilityGain,
    DeltaBudgetExceeded,
    EpsBarExceeded,
}

/// One entry of the greedy move trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GreedyMove {
    /// Candidate symbol index.
    pub candidate: usize,
    /// Candidate symbol label.
    pub label: String,
    pub accepted: bool,
    pub reason: MoveDecision,
}

/// Result of the greedy pass: the final report plus the per-move trace.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyOutcome {
    pub report: PrivacyReport,
    pub trace: Vec<GreedyMove>,
}

/// Greedy relaxed partitioning. Starting from the watchdog bi-partition,
/// walks the refined candidate list in order of ascending breach mass and
/// moves a symbol to the kept side whenever that strictly lowers the
/// normalized loss while keeping the breach total within delta and the
/// effective magnitude within eps_bar.
///
/// Requires delta > the watchdog floor [`delta0`]; below it the relaxation
/// buys nothing and the input is rejected with the floor in the error.
pub fn greedy_partition(
    joint: &JointDistribution,
    params: &RelaxationParams,
) -> Result<GreedyOutcome> {
    let table = LiftTable::from_joint(joint);
    let mut partition = table.watchdog_partition(params.eps);
    let floor = delta_total(joint, params.eps, &partition);
    if params.delta <= floor {
        return Err(Error::DeltaNotAboveDelta0 {
            delta: params.delta,
            delta0: floor,
        });
    }

    let candidates = refine_candidates_with_table(joint, &table, params);
    let mut current_nmil = crate::utility::nmil(joint, partition.randomized())?;
    let mut trace = Vec::with_capacity(candidates.len());

    for x in candidates {
        let moved = partition.move_to_kept(x)?;
        let new_nmil = crate::utility::nmil(joint, moved.randomized())?;
        let decision = if new_nmil >= current_nmil - BOUNDARY_TOL {
            MoveDecision::NoUtilityGain
        } else if delta_total(joint, params.eps, &moved) > params.delta + BOUNDARY_TOL {
            MoveDecision::DeltaBudgetExceeded
        } else if lift::epsilon_eff_with_table(joint, &table, &moved)
            > params.eps_bar + BOUNDARY_TOL
        {
            MoveDecision::EpsBarExceeded
        } else {
            MoveDecision::Accepted
        };
        let accepted = decision == MoveDecision::Accepted;
        trace.push(GreedyMove {
            candidate: x,
            label: joint.x_labels()[x].clone(),
            accepted,
            reason: decision,
        });
        if accepted {
            partition = moved;
            current_nmil = new_nmil;
        }
    }

    let report =
        PrivacyReport::evaluate(joint, partition, params.eps, params.delta, params.eps_bar)?;
    debug_assert!(report.feasible);
    Ok(GreedyOutcome { report, trace })
}

/// Options for the exhaustive search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteForceOptions {
    /// Largest |X| accepted; the enumeration visits 2^|X| bi-partitions, so
    /// anything above 16 is noticeably slow and above ~24 impractical.
    pub max_alphabet: usize,
    /// Whether the eps_bar cap participates in feasibility. On by default so
    /// the oracle optimizes over the same family as the greedy pass; off, it
    /// matches the plain breach-budget definition of feasibility.
    pub enforce_eps_bar: bool,
}

impl Default for BruteForceOptions {
    fn default() -> Self {
        Self {
            max_alphabet: 20,
            enforce_eps_bar: true,
        }
    }
}

/// Exhaustive minimization of the normalized loss over every feasible
/// bi-partition. Ties are broken toward fewer randomized symbols, then by
/// lexicographically smaller randomized index sets, so the optimum is
/// unique and the parallel enumeration is deterministic.
pub fn brute_force_partition(
    joint: &JointDistribution,
    params: &RelaxationParams,
    options: &BruteForceOptions,
) -> Result<PrivacyReport> {
    let n = joint.n_x();
    if n > options.max_alphabet || n >= 64 {
        return Err(Error::AlphabetTooLarge {
            size: n,
            cap: options.max_alphabet.min(63),
        });
    }
    let table = LiftTable::from_joint(joint);
    let single_delta: Vec<f64> = (0..n)
        .map(|x| delta_of_subset_normalized(joint, params.eps, std::slice::from_ref(&x)))
        .collect();
    // Verify H(X) > 0 once so the per-mask evaluation can unwrap.
    crate::utility::nmil(joint, &[])?;

    let ctx = BruteCtx {
        joint,
        table: &table,
        single_delta: &single_delta,
        params,
        enforce_eps_bar: options.enforce_eps_bar,
    };

    let best = (0u64..(1u64 << n))
        .into_par_iter()
        .fold(
            || None::<Candidate>,
            |acc, mask| match ctx.evaluate(mask) {
                Some(c) => Some(match acc {
                    Some(best) => best.min(c),
                    None => c,
                }),
                None => acc,
            },
        )
        .reduce(
            || None,
            |a, b| match (a, b) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, None) => a,
                (None, b) => b,
            },
        );

    let best = best.ok_or(Error::Infeasible)?;
    let randomized: Vec<usize> = (0..n).filter(|&x| best.mask & (1 << x) != 0).collect();
    let partition = Partition::from_randomized(&randomized, n)?;
    PrivacyReport::evaluate(joint, partition, params.eps, params.delta, params.eps_bar)
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    nmil: f64,
    popcount: u32,
    mask: u64,
}

impl Candidate {
    /// Total order: loss, then fewer randomized symbols, then the set whose
    /// smallest differing symbol index is smaller.
    fn min(self, other: Candidate) -> Candidate {
        if self.nmil != other.nmil {
            return if self.nmil < other.nmil { self } else { other };
        }
        if self.popcount != other.popcount {
            return if self.popcount < other.popcount {
                self
            } else {
                other
            };
        }
        if self.mask == other.mask {
            return self;
        }
        let lowest_diff = (self.mask ^ other.mask).trailing_zeros();
        if self.mask & (1 << lowest_diff) != 0 {
            self
        } else {
            other
        }
    }
}

struct BruteCtx<'a> {
    joint: &'a JointDistribution,
    table: &'a LiftTable,
    single_delta: &'a [f64],
    params: &'a RelaxationParams,
    enforce_eps_bar: bool,
}

impl BruteCtx<'_> {
    fn evaluate(&self, mask: u64) -> Option<Candidate> {
        let n = self.joint.n_x();
        let mut randomized = [0usize; 64];
        let mut m = 0;
        let mut kept_delta = 0.0;
        let mut kept_eps = 0.0_f64;
        for x in 0..n {
            if mask & (1 << x) != 0 {
                randomized[m] = x;
                m += 1;
            } else {
                kept_delta += self.single_delta[x];
                kept_eps = kept_eps.max(self.table.eps_x()[x]);
            }
        }
        let subset = &randomized[..m];
        let block_delta = if m == 0 {
            0.0
        } else {
            delta_of_subset_normalized(self.joint, self.params.eps, subset)
        };
        if kept_delta + block_delta > self.params.delta + BOUNDARY_TOL {
            return None;
        }
        if self.enforce_eps_bar {
            let block_eps = if m == 0 {
                0.0
            } else {
                epsilon_of_subset_normalized(self.joint, subset)
            };
            if kept_eps.max(block_eps) > self.params.eps_bar + BOUNDARY_TOL {
                return None;
            }
        }
        let nmil = crate::utility::nmil(self.joint, subset).expect("H(X) > 0 checked upfront");
        Some(Candidate {
            nmil,
            popcount: m as u32,
            mask,
        })
    }
}

/// Full privacy / utility summary of a bi-partition under budgets
/// (eps, delta, eps_bar).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrivacyReport {
    #[serde(skip)]
    pub partition: Partition,
    /// Kept-side labels, ascending index order.
    pub kept: Vec<String>,
    /// Randomized-side labels, ascending index order.
    pub randomized: Vec<String>,
    pub eps: f64,
    pub delta: f64,
    #[serde(with = "ext_real")]
    pub eps_bar: f64,
    /// Effective worst-case magnitude of the partition.
    #[serde(with = "ext_real")]
    pub eps_eff: f64,
    /// Realized worst-case magnitude on the randomized block.
    #[serde(with = "ext_real")]
    pub eps_c: f64,
    /// Breach probability of this partition at eps.
    pub delta_total: f64,
    /// Breach probability of the pure watchdog partition at eps.
    pub delta0: f64,
    #[serde(flatten)]
    pub utility: UtilityReport,
    /// Whether delta_total stays within delta.
    pub feasible: bool,
}

impl PrivacyReport {
    /// Evaluates every report field for an explicit partition. `delta` may
    /// be 0 here to describe a strict (unrelaxed) release.
    pub fn evaluate(
        joint: &JointDistribution,
        partition: Partition,
        eps: f64,
        delta: f64,
        eps_bar: f64,
    ) -> Result<Self> {
        let utility = UtilityReport::for_partition(joint, &partition)?;
        let eps_eff = lift::epsilon_eff(joint, &partition);
        let eps_c = if partition.randomized().is_empty() {
            0.0
        } else {
            epsilon_of_subset_normalized(joint, partition.randomized())
        };
        let dt = delta_total(joint, eps, &partition);
        let kept = partition
            .kept()
            .iter()
            .map(|&x| joint.x_labels()[x].clone())
            .collect();
        let randomized = partition
            .randomized()
            .iter()
            .map(|&x| joint.x_labels()[x].clone())
            .collect();
        Ok(Self {
            partition,
            kept,
            randomized,
            eps,
            delta,
            eps_bar,
            eps_eff,
            eps_c,
            delta_total: dt,
            delta0: delta0(joint, eps),
            utility,
            feasible: dt <= delta + BOUNDARY_TOL,
        })
    }
}
