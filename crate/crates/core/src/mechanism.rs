//! Release channels p(y|x) built from a bi-partition of X: kept symbols
//! pass through unchanged, randomized symbols share one block distribution
//! R(y) supported on the randomized set (an X-invariant randomization).
//!
//! The output alphabet equals the input alphabet. Any valid X-invariant
//! block attains the minimum possible worst-case lift magnitude on the
//! randomized side, which equals the randomized set's subset magnitude;
//! [`falsify_optimality`] probes that lower bound with random channels.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::distributions::{derive_seed, sample_simplex, JointDistribution};
use crate::error::{Error, Result};
use crate::format::sig12;
use crate::lift::{self, Partition, BOUNDARY_TOL};

/// Choice of the shared block distribution R(y) over the randomized set.
#[derive(Debug, Clone, PartialEq)]
pub enum RandomizationMode {
    /// R(y) = 1/|randomized| for every randomized y.
    Uniform,
    /// All randomized mass on the lowest-index randomized symbol.
    Merge,
    /// Caller-supplied R over the randomized set (in ascending index order).
    Custom(Vec<f64>),
}

/// A row-stochastic release channel realizing the kept/randomized block
/// structure, together with the partition and block distribution that
/// produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Mechanism {
    channel: Vec<Vec<f64>>,
    partition: Partition,
    r: Vec<f64>,
}

impl Mechanism {
    /// Builds the channel for `partition`: kept rows are one-hot on
    /// themselves, randomized rows all equal R(y) on the randomized columns,
    /// and every cross-block entry is zero.
    ///
    /// A custom R must be a distribution over the randomized set (length,
    /// nonnegativity, and sum within 1e-9 are checked; the stored R is
    /// renormalized to machine precision).
    pub fn build(
        joint: &JointDistribution,
        partition: Partition,
        mode: RandomizationMode,
    ) -> Result<Self> {
        if partition.n_x() != joint.n_x() {
            return Err(Error::InvalidPartition(format!(
                "partition covers {} symbols but the joint has {}",
                partition.n_x(),
                joint.n_x()
            )));
        }
        let m = partition.randomized().len();
        let r = match mode {
            RandomizationMode::Uniform => vec![1.0 / m as f64; m],
            RandomizationMode::Merge => {
                let mut r = vec![0.0; m];
                if m > 0 {
                    r[0] = 1.0;
                }
                r
            }
            RandomizationMode::Custom(r) => {
                if r.len() != m {
                    return Err(Error::InvalidR(format!(
                        "custom R has length {} for a randomized set of {m}",
                        r.len()
                    )));
                }
                if let Some(&bad) = r.iter().find(|v| !v.is_finite() || **v < 0.0) {
                    return Err(Error::InvalidR(format!("entry {bad} is not a probability")));
                }
                let sum: f64 = r.iter().sum();
                if (sum - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidR(format!("R sums to {sum}, expected 1")));
                }
                r.iter().map(|v| v / sum).collect()
            }
        };

        let n = joint.n_x();
        let mut channel = vec![vec![0.0; n]; n];
        for &x in partition.kept() {
            channel[x][x] = 1.0;
        }
        for &x in partition.randomized() {
            for (k, &y) in partition.randomized().iter().enumerate() {
                channel[x][y] = r[k];
            }
        }
        Ok(Self {
            channel,
            partition,
            r,
        })
    }

    /// The full |X| x |Y| row-stochastic matrix, indexed `[x][y]`.
    pub fn channel(&self) -> &[Vec<f64>] {
        &self.channel
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.channel[x]
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    /// The block distribution over the randomized set, ascending index order.
    pub fn r(&self) -> &[f64] {
        &self.r
    }

    /// Labeled export form of the channel.
    pub fn to_channel_matrix(&self, joint: &JointDistribution) -> ChannelMatrix {
        ChannelMatrix {
            x_labels: joint.x_labels().to_vec(),
            y_labels: joint.x_labels().to_vec(),
            rows: self.channel.clone(),
        }
    }
}

/// Output-side statistics of a mechanism under the source joint: the output
/// marginal, realized lifts i(s, y) on reachable outputs, and the worst
/// magnitude over the randomized block.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputStats {
    p_y: Vec<f64>,
    i_sy: Vec<Vec<f64>>,
    reachable: Vec<bool>,
    max_abs_lift_randomized: f64,
}

impl OutputStats {
    /// Pushes the joint through the channel: p(y) = sum_x p(y|x) p(x) and
    /// p(y|s) = sum_x p(y|x) p(x|s). Outputs with p(y) = 0 are unreachable;
    /// their lift entries are stored as 0 and excluded from all maxima.
    pub fn evaluate(joint: &JointDistribution, mech: &Mechanism) -> Result<Self> {
        let n = joint.n_x();
        if mech.partition.n_x() != n {
            return Err(Error::InvalidPartition(format!(
                "mechanism built for {} symbols, joint has {n}",
                mech.partition.n_x()
            )));
        }
        let mut p_y = vec![0.0; n];
        for x in 0..n {
            let px = joint.p_x()[x];
            for (y, &c) in mech.channel[x].iter().enumerate() {
                p_y[y] += c * px;
            }
        }
        let reachable: Vec<bool> = p_y.iter().map(|&v| v > 0.0).collect();

        let mut i_sy = vec![vec![0.0; n]; joint.n_s()];
        for (s, lifts) in i_sy.iter_mut().enumerate() {
            let ps = joint.p_s()[s];
            let mut p_y_given_s = vec![0.0; n];
            for x in 0..n {
                let pxs = joint.prob(s, x) / ps;
                for (y, &c) in mech.channel[x].iter().enumerate() {
                    p_y_given_s[y] += c * pxs;
                }
            }
            for (y, lift) in lifts.iter_mut().enumerate() {
                if reachable[y] {
                    *lift = (p_y_given_s[y] / p_y[y]).ln();
                }
            }
        }

        let max_abs_lift_randomized = mech
            .partition
            .randomized()
            .iter()
            .filter(|&&y| reachable[y])
            .flat_map(|&y| i_sy.iter().map(move |row| row[y].abs()))
            .fold(0.0_f64, f64::max);

        Ok(Self {
            p_y,
            i_sy,
            reachable,
            max_abs_lift_randomized,
        })
    }

    pub fn p_y(&self) -> &[f64] {
        &self.p_y
    }

    /// Realized lift i(s, y); meaningful only where [`Self::is_reachable`].
    pub fn lift(&self, s: usize, y: usize) -> f64 {
        self.i_sy[s][y]
    }

    pub fn lifts(&self) -> &[Vec<f64>] {
        &self.i_sy
    }

    pub fn is_reachable(&self, y: usize) -> bool {
        self.reachable[y]
    }

    /// Worst realized magnitude over reachable randomized outputs; 0 when
    /// there are none.
    pub fn max_abs_lift_randomized(&self) -> f64 {
        self.max_abs_lift_randomized
    }

    /// Worst realized magnitude over all reachable outputs.
    pub fn max_abs_lift(&self) -> f64 {
        (0..self.p_y.len())
            .filter(|&y| self.reachable[y])
            .flat_map(|y| self.i_sy.iter().map(move |row| row[y].abs()))
            .fold(0.0_f64, f64::max)
    }
}

/// Whether randomizing `subset` can realize a worst-case magnitude of at
/// most `eps_prime` on that block: true iff the subset's lift magnitude
/// for every s stays within `eps_prime` (up to [`BOUNDARY_TOL`]).
pub fn attainable(joint: &JointDistribution, subset: &[usize], eps_prime: f64) -> Result<bool> {
    let worst = lift::epsilon_of_subset(joint, subset)?;
    Ok(worst <= eps_prime + BOUNDARY_TOL)
}

/// The minimum worst-case magnitude realizable on the watchdog randomized
/// block at threshold `eps`; 0 when that block is empty.
pub fn epsilon_c(joint: &JointDistribution, eps: f64) -> f64 {
    let partition = lift::watchdog_partition(joint, eps);
    if partition.randomized().is_empty() {
        0.0
    } else {
        lift::epsilon_of_subset_normalized(joint, partition.randomized())
    }
}

/// Random search for a channel beating the X-invariant optimum: samples
/// `n_channels` random row-stochastic blocks over the watchdog randomized
/// set (each row drawn flat on the simplex), evaluates the realized worst
/// magnitude of each, and returns the minimum found.
///
/// The randomized set must have at least two symbols, otherwise no
/// non-trivial block exists. Trials use seeds derived from `seed` per index,
/// so the result does not depend on evaluation order.
pub fn falsify_optimality(
    joint: &JointDistribution,
    eps: f64,
    n_channels: usize,
    seed: u64,
) -> Result<f64> {
    let partition = lift::watchdog_partition(joint, eps);
    let m = partition.randomized().len();
    if m < 2 {
        return Err(Error::SingletonOrEmptyRandomizedSet(m));
    }
    let min = (0..n_channels)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, trial as u64));
            let rows: Vec<Vec<f64>> = (0..m).map(|_| sample_simplex(&mut rng, m)).collect();
            let mech = block_channel(joint, &partition, &rows);
            OutputStats::evaluate(joint, &mech)
                .expect("dimensions match by construction")
                .max_abs_lift_randomized()
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(min)
}

/// Channel with kept rows one-hot and the randomized block given row by row.
/// Unlike [`Mechanism::build`] the block need not be X-invariant; this is
/// the probe shape used by the random-search falsifier and feasibility tests.
pub(crate) fn block_channel(
    joint: &JointDistribution,
    partition: &Partition,
    block_rows: &[Vec<f64>],
) -> Mechanism {
    let n = joint.n_x();
    let mut channel = vec![vec![0.0; n]; n];
    for &x in partition.kept() {
        channel[x][x] = 1.0;
    }
    for (i, &x) in partition.randomized().iter().enumerate() {
        for (k, &y) in partition.randomized().iter().enumerate() {
            channel[x][y] = block_rows[i][k];
        }
    }
    Mechanism {
        channel,
        partition: partition.clone(),
        r: Vec::new(),
    }
}

/// A labeled row-stochastic channel matrix, the stored form used by the
/// sanitize pipeline. Serialized as delimited rows (x label, y label,
/// probability) covering the full matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    pub x_labels: Vec<String>,
    pub y_labels: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl ChannelMatrix {
    pub fn row_for(&self, x_label: &str) -> Option<&[f64]> {
        self.x_labels
            .iter()
            .position(|l| l == x_label)
            .map(|i| self.rows[i].as_slice())
    }

    /// Writes the full matrix as (x label, y label, probability) triples.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        for (x, row) in self.rows.iter().enumerate() {
            for (y, &p) in row.iter().enumerate() {
                wtr.write_record([
                    self.x_labels[x].as_str(),
                    self.y_labels[y].as_str(),
                    &sig12(p),
                ])
                .map_err(|e| Error::Parse(e.to_string()))?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    /// Reads a matrix written by [`Self::write_csv`]: rows grouped by x in
    /// order of first appearance, each group listing the same y sequence.
    /// Every row must be a distribution (sum within 1e-9 of 1).
    pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut x_labels: Vec<String> = Vec::new();
        let mut y_labels: Vec<String> = Vec::new();
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut first_row_done = false;
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            if rec.len() != 3 {
                return Err(Error::Parse(format!(
                    "expected 3 fields (x, y, probability), found {}",
                    rec.len()
                )));
            }
            let (x, y) = (&rec[0], &rec[1]);
            let p: f64 = rec[2]
                .parse()
                .map_err(|_| Error::Parse(format!("bad probability {:?}", &rec[2])))?;
            if x_labels.last().map(String::as_str) != Some(x) {
                x_labels.push(x.to_string());
                rows.push(Vec::new());
                first_row_done = !y_labels.is_empty();
            }
            let row = rows.last_mut().expect("pushed above");
            if !first_row_done {
                y_labels.push(y.to_string());
            } else {
                let expect = y_labels.get(row.len()).map(String::as_str);
                if expect != Some(y) {
                    return Err(Error::Parse(format!(
                        "row {x:?} lists output {y:?} where {expect:?} was expected"
                    )));
                }
            }
            row.push(p);
        }
        if rows.is_empty() {
            return Err(Error::Parse("empty channel file".to_string()));
        }
        for (x, row) in rows.iter().enumerate() {
            if row.len() != y_labels.len() {
                return Err(Error::Parse(format!(
                    "row {:?} has {} entries, expected {}",
                    x_labels[x],
                    row.len(),
                    y_labels.len()
                )));
            }
            if row.iter().any(|&p| !p.is_finite() || p < 0.0) {
                return Err(Error::Parse(format!(
                    "row {:?} has invalid entries",
                    x_labels[x]
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::Parse(format!(
                    "row {:?} sums to {sum}, expected 1",
                    x_labels[x]
                )));
            }
        }
        Ok(Self {
            x_labels,
            y_labels,
            rows,
        })
    }
}

/// Seeded sampler applying a stored channel to a stream of input labels.
#[derive(Debug)]
pub struct ChannelSampler<'a> {
    matrix: &'a ChannelMatrix,
    rng: ChaCha8Rng,
}

impl<'a> ChannelSampler<'a> {
    pub fn new(matrix: &'a ChannelMatrix, seed: u64) -> Self {
        Self {
            matrix,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Draws one output label for the given input label.
    pub fn sanitize(&mut self, x_label: &str) -> Result<&'a str> {
        use rand::Rng;
        let row = self
            .matrix
            .row_for(x_label)
            .ok_or_else(|| Error::Parse(format!("unknown input symbol {x_label:?}")))?;
        let u: f64 = self.rng.random();
        let mut acc = 0.0;
        let mut last_positive = None;
        for (y, &p) in row.iter().enumerate() {
            if p > 0.0 {
                last_positive = Some(y);
                acc += p;
                if u < acc {
                    return Ok(&self.matrix.y_labels[y]);
                }
            }
        }
        // Float shortfall at the top of the CDF; emit the last viable output.
        let y =
            last_positive.ok_or_else(|| Error::Parse(format!("row {x_label:?} is all zero")))?;
        Ok(&self.matrix.y_labels[y])
    }
}
