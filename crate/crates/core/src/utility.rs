//! Entropy, mutual information, and the normalized mutual information loss
//! of a randomized release. All values are in nats; 0 ln 0 is taken as 0.

use serde::Serialize;

use crate::distributions::JointDistribution;
use crate::error::{Error, Result};
use crate::lift::Partition;
use crate::mechanism::Mechanism;

/// Shannon entropy of a probability vector in nats.
pub fn entropy(dist: &[f64]) -> Result<f64> {
    if dist.is_empty() {
        return Err(Error::InvalidDistribution("empty vector".to_string()));
    }
    if let Some(&bad) = dist.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::InvalidDistribution(format!(
            "entry {bad} is not a probability"
        )));
    }
    let sum: f64 = dist.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDistribution(format!(
            "entries sum to {sum}, expected 1"
        )));
    }
    Ok(entropy_unchecked(dist))
}

fn entropy_unchecked(dist: &[f64]) -> f64 {
    // 0.0 - s rather than -s, so degenerate entropies come out as +0.0.
    0.0 - dist
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

/// Mutual information I(X;Y) in nats between the source X and the channel
/// output Y, evaluated directly from the explicit channel. Works for any
/// row-stochastic channel, not only the kept/randomized block shape.
pub fn mutual_information(joint: &JointDistribution, mech: &Mechanism) -> f64 {
    let n = joint.n_x();
    let mut p_y = vec![0.0; n];
    for x in 0..n {
        let px = joint.p_x()[x];
        for (y, &c) in mech.row(x).iter().enumerate() {
            p_y[y] += c * px;
        }
    }
    let mut mi = 0.0;
    for x in 0..n {
        let px = joint.p_x()[x];
        for (y, &c) in mech.row(x).iter().enumerate() {
            let pxy = c * px;
            if pxy > 0.0 {
                mi += pxy * (pxy / (px * p_y[y])).ln();
            }
        }
    }
    mi
}

/// Normalized mutual information loss of randomizing `subset`: the share of
/// H(X) destroyed, p(Q) H(q) / H(X) with q the renormalized distribution of
/// X on Q. Zero for an empty or singleton subset; always in [0, 1].
pub fn nmil(joint: &JointDistribution, subset: &[usize]) -> Result<f64> {
    let h_x = entropy_unchecked(joint.p_x());
    if h_x <= 0.0 {
        return Err(Error::DegenerateX);
    }
    let (p_qc, h_q) = renormalized_entropy(joint, subset)?;
    Ok(p_qc * h_q / h_x)
}

/// Mass p(Q) and entropy H(q) of the renormalized distribution on `subset`.
fn renormalized_entropy(joint: &JointDistribution, subset: &[usize]) -> Result<(f64, f64)> {
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
    let picked: Vec<f64> = (0..joint.n_x())
        .filter(|&x| member[x])
        .map(|x| joint.p_x()[x])
        .collect();
    if picked.is_empty() {
        return Ok((0.0, 0.0));
    }
    let p_qc: f64 = picked.iter().sum();
    let h_q = 0.0
        - picked
            .iter()
            .map(|&p| {
                let q = p / p_qc;
                q * q.ln()
            })
            .sum::<f64>();
    Ok((p_qc, h_q))
}

/// Utility summary of a bi-partition under the block randomization scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UtilityReport {
    /// Source entropy H(X) in nats.
    pub h_x: f64,
    /// I(X;Y) in nats; for the block scheme this is H(X) - p(Q) H(q)
    /// independently of the block distribution.
    pub mi_xy: f64,
    /// Mass of the randomized set.
    pub p_qc: f64,
    /// Entropy of the renormalized distribution on the randomized set.
    pub h_q: f64,
    /// Normalized mutual information loss, in [0, 1].
    pub nmil: f64,
}

impl UtilityReport {
    pub fn for_partition(joint: &JointDistribution, partition: &Partition) -> Result<Self> {
        let h_x = entropy_unchecked(joint.p_x());
        if h_x <= 0.0 {
            return Err(Error::DegenerateX);
        }
        let (p_qc, h_q) = renormalized_entropy(joint, partition.randomized())?;
        Ok(Self {
            h_x,
            mi_xy: h_x - p_qc * h_q,
            p_qc,
            h_q,
            nmil: p_qc * h_q / h_x,
        })
    }
}
