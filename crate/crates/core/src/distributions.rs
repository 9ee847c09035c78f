//! Finite joint distributions p(s, x) over a sensitive alphabet S and a
//! useful alphabet X: validation, file ingestion, and seeded random
//! generation.
//!
//! A [`JointDistribution`] is immutable after construction and caches both
//! marginals. Zero cells p(s, x) = 0 are allowed (they surface as infinite
//! lifts downstream), but zero marginals are rejected because the log-lift
//! is undefined there.

use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::sig17;

/// Tolerance on the total probability mass at validation time.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// A validated joint distribution over labeled finite alphabets, with
/// cached marginals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointDistribution {
    s_labels: Vec<String>,
    x_labels: Vec<String>,
    probs: Vec<Vec<f64>>,
    #[serde(skip)]
    p_s: Vec<f64>,
    #[serde(skip)]
    p_x: Vec<f64>,
}

impl JointDistribution {
    /// Validates and builds a joint distribution from labeled rows.
    ///
    /// Requires at least one S symbol and two X symbols, unique labels per
    /// axis, nonnegative entries summing to 1 within [`SUM_TOLERANCE`], and
    /// strictly positive marginals on both axes.
    pub fn new(s_labels: Vec<String>, x_labels: Vec<String>, probs: Vec<Vec<f64>>) -> Result<Self> {
        let n_s = s_labels.len();
        let n_x = x_labels.len();
        if n_s < 1 || n_x < 2 {
            return Err(Error::InvalidShape(format!(
                "need at least 1 S symbol and 2 X symbols, got {n_s}x{n_x}"
            )));
        }
        if probs.len() != n_s {
            return Err(Error::InvalidShape(format!(
                "{} probability rows for {n_s} S labels",
                probs.len()
            )));
        }
        for (s, row) in probs.iter().enumerate() {
            if row.len() != n_x {
                return Err(Error::InvalidShape(format!(
                    "row {s} has {} entries for {n_x} X labels",
                    row.len()
                )));
            }
        }
        check_unique_labels("S", &s_labels)?;
        check_unique_labels("X", &x_labels)?;

        for (s, row) in probs.iter().enumerate() {
            for (x, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::InvalidShape(format!(
                        "non-finite probability {v} at ({}, {})",
                        s_labels[s], x_labels[x]
                    )));
                }
                if v < 0.0 {
                    return Err(Error::NegativeEntry {
                        s_label: s_labels[s].clone(),
                        x_label: x_labels[x].clone(),
                        value: v,
                    });
                }
            }
        }

        let sum: f64 = probs.iter().flatten().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::SumNotOne {
                sum,
                tol: SUM_TOLERANCE,
            });
        }

        let p_s: Vec<f64> = probs.iter().map(|row| row.iter().sum()).collect();
        let mut p_x = vec![0.0; n_x];
        for row in &probs {
            for (x, &v) in row.iter().enumerate() {
                p_x[x] += v;
            }
        }
        if let Some(s) = p_s.iter().position(|&v| v <= 0.0) {
            return Err(Error::ZeroMarginal {
                axis: "S",
                label: s_labels[s].clone(),
            });
        }
        if let Some(x) = p_x.iter().position(|&v| v <= 0.0) {
            return Err(Error::ZeroMarginal {
                axis: "X",
                label: x_labels[x].clone(),
            });
        }

        Ok(Self {
            s_labels,
            x_labels,
            probs,
            p_s,
            p_x,
        })
    }

    /// Builds a joint distribution with generated labels `s0..`, `x0..`.
    pub fn from_probs(probs: Vec<Vec<f64>>) -> Result<Self> {
        let n_s = probs.len();
        let n_x = probs.first().map_or(0, Vec::len);
        Self::new(default_labels("s", n_s), default_labels("x", n_x), probs)
    }

    pub fn n_s(&self) -> usize {
        self.s_labels.len()
    }

    pub fn n_x(&self) -> usize {
        self.x_labels.len()
    }

    pub fn s_labels(&self) -> &[String] {
        &self.s_labels
    }

    pub fn x_labels(&self) -> &[String] {
        &self.x_labels
    }

    /// Joint probability p(s, x).
    pub fn prob(&self, s: usize, x: usize) -> f64 {
        self.probs[s][x]
    }

    /// All joint rows, indexed `[s][x]`.
    pub fn probs(&self) -> &[Vec<f64>] {
        &self.probs
    }

    /// Marginal p(s), strictly positive by construction.
    pub fn p_s(&self) -> &[f64] {
        &self.p_s
    }

    /// Marginal p(x), strictly positive by construction.
    pub fn p_x(&self) -> &[f64] {
        &self.p_x
    }

    pub fn x_index(&self, label: &str) -> Option<usize> {
        self.x_labels.iter().position(|l| l == label)
    }

    pub fn s_index(&self, label: &str) -> Option<usize> {
        self.s_labels.iter().position(|l| l == label)
    }

    /// Conditional distribution p(x | s) as a vector over X.
    pub fn conditional_x_given_s(&self, s: usize) -> Result<Vec<f64>> {
        if s >= self.n_s() {
            return Err(Error::IndexOutOfRange {
                index: s,
                size: self.n_s(),
            });
        }
        let ps = self.p_s[s];
        Ok(self.probs[s].iter().map(|&v| v / ps).collect())
    }
}

fn check_unique_labels(axis: &'static str, labels: &[String]) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for label in labels {
        if !seen.insert(label.as_str()) {
            return Err(Error::DuplicateLabel {
                axis,
                label: label.clone(),
            });
        }
    }
    Ok(())
}

fn default_labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

impl<'de> Deserialize<'de> for JointDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            s_labels: Vec<String>,
            x_labels: Vec<String>,
            probs: Vec<Vec<f64>>,
        }
        let raw = Raw::deserialize(de)?;
        JointDistribution::new(raw.s_labels, raw.x_labels, raw.probs)
            .map_err(serde::de::Error::custom)
    }
}

/// Parameters for seeded random generation of a joint distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistributionSpec {
    pub n_s: usize,
    pub n_x: usize,
    pub seed: u64,
}

impl DistributionSpec {
    pub fn new(n_s: usize, n_x: usize, seed: u64) -> Result<Self> {
        if n_s < 1 || n_x < 2 {
            return Err(Error::InvalidParams(format!(
                "need n_s >= 1 and n_x >= 2, got {n_s}x{n_x}"
            )));
        }
        Ok(Self { n_s, n_x, seed })
    }
}

/// Generates a strictly positive random joint distribution: i.i.d.
/// uniform(0, 1] entries over the grid, normalized to total mass 1
/// (equivalent to a flat Dirichlet draw).
///
/// The generator is ChaCha8 seeded with `spec.seed`, so the output is a
/// pure, platform-stable function of the spec.
pub fn random_joint(spec: &DistributionSpec) -> JointDistribution {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut probs: Vec<Vec<f64>> = (0..spec.n_s)
        .map(|_| (0..spec.n_x).map(|_| 1.0 - rng.random::<f64>()).collect())
        .collect();
    let total: f64 = probs.iter().flatten().sum();
    for row in &mut probs {
        for v in row.iter_mut() {
            *v /= total;
        }
    }
    JointDistribution::from_probs(probs).expect("normalized positive table is always valid")
}

/// Derives a per-trial seed from a master seed via one SplitMix64 step keyed
/// by the trial index. Stable across platforms and independent of the order
/// in which trials are evaluated, so serial and parallel runs agree.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws a point uniformly from the probability simplex of the given
/// dimension (normalized i.i.d. exponentials).
pub fn sample_simplex<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..len)
        .map(|_| -(1.0 - rng.random::<f64>()).ln())
        .collect();
    let total: f64 = v.iter().sum();
    if total <= 0.0 {
        // All draws hit exactly zero; fall back to uniform.
        return vec![1.0 / len as f64; len];
    }
    for e in &mut v {
        *e /= total;
    }
    v
}

// ---------------------------------------------------------------------------
// File formats
//
// Delimited text: first row is a blank cell followed by the X labels; each
// following row is an S label followed by that row's probabilities.
// Structured object (JSON): { s_labels, x_labels, probs }.
// Both round-trip probabilities through 17 significant digits, which is
// exact for f64.
// ---------------------------------------------------------------------------

/// Reads a joint distribution from delimited text.
pub fn read_joint_csv<R: Read>(reader: R) -> Result<JointDistribution> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut records = rdr.records();
    let header = match records.next() {
        Some(rec) => rec.map_err(|e| Error::Parse(e.to_string()))?,
        None => return Err(Error::Parse("empty input".to_string())),
    };
    if header.len() < 2 {
        return Err(Error::Parse("header row has no X labels".to_string()));
    }
    let x_labels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();

    let mut s_labels = Vec::new();
    let mut probs = Vec::new();
    for (line, rec) in records.enumerate() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        if rec.len() == 1 && rec[0].is_empty() {
            continue; // ignore trailing blank lines
        }
        if rec.len() != x_labels.len() + 1 {
            return Err(Error::Parse(format!(
                "row {} has {} fields, expected {}",
                line + 2,
                rec.len(),
                x_labels.len() + 1
            )));
        }
        s_labels.push(rec[0].to_string());
        let row: Vec<f64> = rec
            .iter()
            .skip(1)
            .map(|field| {
                field
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad probability {field:?}")))
            })
            .collect::<Result<_>>()?;
        probs.push(row);
    }
    JointDistribution::new(s_labels, x_labels, probs)
}

/// Writes a joint distribution as delimited text with 17-digit entries.
pub fn write_joint_csv<W: Write>(joint: &JointDistribution, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec![String::new()];
    header.extend(joint.x_labels().iter().cloned());
    wtr.write_record(&header).map_err(csv_io)?;
    for (s, row) in joint.probs().iter().enumerate() {
        let mut rec = vec![joint.s_labels()[s].clone()];
        rec.extend(row.iter().map(|&v| sig17(v)));
        wtr.write_record(&rec).map_err(csv_io)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads the structured-object (JSON) form.
pub fn read_joint_json<R: Read>(reader: R) -> Result<JointDistribution> {
    serde_json::from_reader(reader).map_err(|e| Error::Parse(e.to_string()))
}

/// Writes the structured-object (JSON) form.
pub fn write_joint_json<W: Write>(joint: &JointDistribution, writer: W) -> Result<()> {
    serde_json::to_writer_pretty(writer, joint).map_err(|e| Error::Parse(e.to_string()))
}

/// Loads a joint distribution from a file, `.json` as a structured object
/// and anything else as delimited text.
pub fn load_joint(path: &Path) -> Result<JointDistribution> {
    let file = std::fs::File::open(path)?;
    if path.extension().is_some_and(|e| e == "json") {
        read_joint_json(file)
    } else {
        read_joint_csv(file)
    }
}

/// Saves a joint distribution, choosing the format by extension as in
/// [`load_joint`].
pub fn save_joint(joint: &JointDistribution, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    if path.extension().is_some_and(|e| e == "json") {
        write_joint_json(joint, file)
    } else {
        write_joint_csv(joint, file)
    }
}

fn csv_io(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}
