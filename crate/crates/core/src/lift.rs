//! Log-lift analysis: per-pair lifts i(s, x), subset lifts, per-symbol and
//! per-subset worst-case magnitudes, the critical threshold ladder, and the
//! watchdog bi-partition of X.
//!
//! All lifts are natural logarithms (nats). Lifts are extended reals: a zero
//! joint cell gives i = -inf and a per-symbol magnitude of +inf; no operation
//! here ever produces NaN.

use serde::Serialize;

use crate::distributions::JointDistribution;
use crate::error::{Error, Result};
use crate::format::sig12;

/// Slack used when comparing a lift magnitude against a threshold, so
/// partitions are stable for symbols sitting exactly on a boundary.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Per-pair log-lift table with cached per-symbol maxima.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftTable {
    i_sx: Vec<Vec<f64>>,
    eps_x: Vec<f64>,
}

impl LiftTable {
    /// Computes i(s, x) = ln(p(x|s) / p(x)) for every pair, and
    /// eps(x) = max over s of |i(s, x)|.
    pub fn from_joint(joint: &JointDistribution) -> Self {
        let i_sx: Vec<Vec<f64>> = (0..joint.n_s())
            .map(|s| {
                let ps = joint.p_s()[s];
                (0..joint.n_x())
                    .map(|x| ((joint.prob(s, x) / ps) / joint.p_x()[x]).ln())
                    .collect()
            })
            .collect();
        let eps_x = (0..joint.n_x())
            .map(|x| i_sx.iter().map(|row| row[x].abs()).fold(0.0_f64, f64::max))
            .collect();
        Self { i_sx, eps_x }
    }

    /// Log-lift i(s, x) in nats; -inf where p(s, x) = 0.
    pub fn lift(&self, s: usize, x: usize) -> f64 {
        self.i_sx[s][x]
    }

    /// All lifts, indexed `[s][x]`.
    pub fn lifts(&self) -> &[Vec<f64>] {
        &self.i_sx
    }

    /// Per-symbol worst-case magnitudes eps(x); +inf where some cell is zero.
    pub fn eps_x(&self) -> &[f64] {
        &self.eps_x
    }

    /// Splits X into the symbols published unchanged (eps(x) <= eps, up to
    /// [`BOUNDARY_TOL`]) and the complement slated for randomization.
    pub fn watchdog_partition(&self, eps: f64) -> Partition {
        let mut kept = Vec::new();
        let mut randomized = Vec::new();
        for (x, &e) in self.eps_x.iter().enumerate() {
            if e <= eps + BOUNDARY_TOL {
                kept.push(x);
            } else {
                randomized.push(x);
            }
        }
        Partition {
            kept,
            randomized,
            n_x: self.eps_x.len(),
        }
    }

    /// Sorts the per-symbol maxima into the non-increasing critical ladder.
    pub fn critical_epsilons(&self) -> CriticalLadder {
        let mut entries: Vec<CriticalValue> = self
            .eps_x
            .iter()
            .enumerate()
            .map(|(x, &eps)| CriticalValue { x, eps })
            .collect();
        // Stable sort: ties keep ascending original index.
        entries.sort_by(|a, b| {
            b.eps
                .partial_cmp(&a.eps)
                .expect("lift maxima are never NaN")
        });
        CriticalLadder { entries }
    }

    /// Writes the table as delimited text rows (s label, x label, lift).
    pub fn write_csv<W: std::io::Write>(&self, joint: &JointDistribution, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        for (s, row) in self.i_sx.iter().enumerate() {
            for (x, &v) in row.iter().enumerate() {
                wtr.write_record([
                    joint.s_labels()[s].as_str(),
                    joint.x_labels()[x].as_str(),
                    &sig12(v),
                ])
                .map_err(|e| Error::Parse(e.to_string()))?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

/// One rung of the critical ladder: symbol index and its eps(x).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalValue {
    pub x: usize,
    pub eps: f64,
}

/// Per-symbol maxima sorted non-increasing; the thresholds at which the
/// watchdog partition changes. Ties are ordered by ascending symbol index.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalLadder {
    entries: Vec<CriticalValue>,
}

impl CriticalLadder {
    pub fn entries(&self) -> &[CriticalValue] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Rung `j` (0-based), so `get(0)` is the largest critical value.
    pub fn get(&self, j: usize) -> Option<CriticalValue> {
        self.entries.get(j).copied()
    }

    /// Number of ladder entries whose eps(x) exceeds `eps`: the size of the
    /// randomized set the watchdog produces at that threshold.
    pub fn prefix_len(&self, eps: f64) -> usize {
        self.entries
            .iter()
            .take_while(|e| e.eps > eps + BOUNDARY_TOL)
            .count()
    }

    /// Writes the ladder as delimited text rows (rank, x label, eps value).
    pub fn write_csv<W: std::io::Write>(&self, joint: &JointDistribution, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        for (rank, e) in self.entries.iter().enumerate() {
            wtr.write_record([
                &(rank + 1).to_string(),
                joint.x_labels()[e.x].as_str(),
                &sig12(e.eps),
            ])
            .map_err(|e| Error::Parse(e.to_string()))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// An ordered bi-partition of X: symbols published unchanged and symbols
/// slated for randomization. Both sides are kept in ascending index order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partition {
    kept: Vec<usize>,
    randomized: Vec<usize>,
    n_x: usize,
}

impl Partition {
    /// Builds a partition from both sides, checking that they form a
    /// disjoint cover of `0..n_x`.
    pub fn new(mut kept: Vec<usize>, mut randomized: Vec<usize>, n_x: usize) -> Result<Self> {
        kept.sort_unstable();
        randomized.sort_unstable();
        let mut seen = vec![false; n_x];
        for &x in kept.iter().chain(randomized.iter()) {
            if x >= n_x {
                return Err(Error::IndexOutOfRange {
                    index: x,
                    size: n_x,
                });
            }
            if seen[x] {
                return Err(Error::InvalidPartition(format!(
                    "symbol {x} appears more than once"
                )));
            }
            seen[x] = true;
        }
        if kept.len() + randomized.len() != n_x {
            return Err(Error::InvalidPartition(format!(
                "{} symbols covered out of {n_x}",
                kept.len() + randomized.len()
            )));
        }
        Ok(Self {
            kept,
            randomized,
            n_x,
        })
    }

    /// Partition given only the kept side; the rest is randomized.
    pub fn from_kept(kept: &[usize], n_x: usize) -> Result<Self> {
        let complement = complement_of(kept, n_x)?;
        Self::new(kept.to_vec(), complement, n_x)
    }

    /// Partition given only the randomized side; the rest is kept.
    pub fn from_randomized(randomized: &[usize], n_x: usize) -> Result<Self> {
        let complement = complement_of(randomized, n_x)?;
        Self::new(complement, randomized.to_vec(), n_x)
    }

    pub fn kept(&self) -> &[usize] {
        &self.kept
    }

    pub fn randomized(&self) -> &[usize] {
        &self.randomized
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn is_kept(&self, x: usize) -> bool {
        self.kept.binary_search(&x).is_ok()
    }

    /// Moves one symbol from the randomized side to the kept side.
    pub fn move_to_kept(&self, x: usize) -> Result<Self> {
        let pos = self
            .randomized
            .binary_search(&x)
            .map_err(|_| Error::InvalidPartition(format!("symbol {x} is not randomized")))?;
        let mut randomized = self.randomized.clone();
        randomized.remove(pos);
        let mut kept = self.kept.clone();
        let at = kept.partition_point(|&k| k < x);
        kept.insert(at, x);
        Ok(Self {
            kept,
            randomized,
            n_x: self.n_x,
        })
    }
}

fn complement_of(side: &[usize], n_x: usize) -> Result<Vec<usize>> {
    let mut member = vec![false; n_x];
    for &x in side {
        if x >= n_x {
            return Err(Error::IndexOutOfRange {
                index: x,
                size: n_x,
            });
        }
        member[x] = true;
    }
    Ok((0..n_x).filter(|&x| !member[x]).collect())
}

/// Validates a subset of X: non-empty, in range, returned as sorted unique
/// indices (inputs are treated as sets).
fn normalize_subset(subset: &[usize], n_x: usize) -> Result<Vec<usize>> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let mut member = vec![false; n_x];
    for &x in subset {
        if x >= n_x {
            return Err(Error::IndexOutOfRange {
                index: x,
                size: n_x,
            });
        }
        member[x] = true;
    }
    Ok((0..n_x).filter(|&x| member[x]).collect())
}

/// Per-pair lift table; alias for [`LiftTable::from_joint`].
pub fn lift_table(joint: &JointDistribution) -> LiftTable {
    LiftTable::from_joint(joint)
}

/// Subset log-lift i(s, Q) = ln(p(Q|s) / p(Q)) in nats; -inf when
/// p(Q|s) = 0. The full alphabet has lift exactly 0 for every s.
pub fn subset_lift(joint: &JointDistribution, subset: &[usize], s: usize) -> Result<f64> {
    if s >= joint.n_s() {
        return Err(Error::IndexOutOfRange {
            index: s,
            size: joint.n_s(),
        });
    }
    let subset = normalize_subset(subset, joint.n_x())?;
    Ok(subset_lift_normalized(joint, &subset, s))
}

/// Subset lift over an already-validated sorted unique subset.
pub(crate) fn subset_lift_normalized(joint: &JointDistribution, subset: &[usize], s: usize) -> f64 {
    if subset.len() == joint.n_x() {
        // p(X|s) = p(X) = 1 by definition.
        return 0.0;
    }
    let joint_mass: f64 = subset.iter().map(|&x| joint.prob(s, x)).sum();
    let p_q_given_s = joint_mass / joint.p_s()[s];
    let p_q: f64 = subset.iter().map(|&x| joint.p_x()[x]).sum();
    (p_q_given_s / p_q).ln()
}

/// Worst-case subset lift magnitude eps(Q) = max over s of |i(s, Q)|.
/// Coincides with the per-symbol eps(x) on singletons.
pub fn epsilon_of_subset(joint: &JointDistribution, subset: &[usize]) -> Result<f64> {
    let subset = normalize_subset(subset, joint.n_x())?;
    Ok(epsilon_of_subset_normalized(joint, &subset))
}

pub(crate) fn epsilon_of_subset_normalized(joint: &JointDistribution, subset: &[usize]) -> f64 {
    (0..joint.n_s())
        .map(|s| subset_lift_normalized(joint, subset, s).abs())
        .fold(0.0_f64, f64::max)
}

/// Watchdog bi-partition of X at threshold `eps`.
pub fn watchdog_partition(joint: &JointDistribution, eps: f64) -> Partition {
    LiftTable::from_joint(joint).watchdog_partition(eps)
}

/// Critical ladder of per-symbol maxima for `joint`.
pub fn critical_epsilons(joint: &JointDistribution) -> CriticalLadder {
    LiftTable::from_joint(joint).critical_epsilons()
}

/// Effective worst-case magnitude of a bi-partition: the larger of the
/// kept-side per-symbol maxima and the randomized block's subset magnitude
/// (0 when the respective side is empty).
pub fn epsilon_eff(joint: &JointDistribution, partition: &Partition) -> f64 {
    let table = LiftTable::from_joint(joint);
    epsilon_eff_with_table(joint, &table, partition)
}

pub(crate) fn epsilon_eff_with_table(
    joint: &JointDistribution,
    table: &LiftTable,
    partition: &Partition,
) -> f64 {
    let kept_max = partition
        .kept()
        .iter()
        .map(|&x| table.eps_x()[x])
        .fold(0.0_f64, f64::max);
    let randomized_eps = if partition.randomized().is_empty() {
        0.0
    } else {
        epsilon_of_subset_normalized(joint, partition.randomized())
    };
    kept_max.max(randomized_eps)
}
