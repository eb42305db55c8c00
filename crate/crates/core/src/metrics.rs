//! Selectivity, expected depth, iteration-count formulas and experiment records.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::noise::ShotHistogram;

/// Target frequency over the largest non-target frequency. Infinite when
/// every shot landed on the target.
pub fn selectivity(hist: &ShotHistogram, target: &BitString) -> Result<f64> {
    if hist.shots == 0 {
        return Err(Error::Argument("selectivity of an empty histogram".into()));
    }
    if let Some(b) = hist.counts.keys().find(|b| b.len() != target.len()) {
        return Err(Error::Argument(format!("outcome `{b}` and target `{target}` differ in length")));
    }
    let on = hist.count(target) as f64;
    let off = hist.counts.iter().filter(|(b, _)| *b != target).map(|(_, &c)| c).max().unwrap_or(0) as f64;
    Ok(if off == 0.0 { f64::INFINITY } else { on / off })
}

/// Same ratio for an exact outcome distribution indexed MSB-first.
pub fn selectivity_of_distribution(dist: &[f64], target: usize) -> Result<f64> {
    if target >= dist.len() {
        return Err(Error::Index(format!("target {target} outside {} outcomes", dist.len())));
    }
    let off = dist.iter().enumerate().filter(|&(i, _)| i != target).map(|(_, &p)| p).fold(0.0, f64::max);
    Ok(if off == 0.0 { f64::INFINITY } else { dist[target] / off })
}

/// Summed stage depths divided by the overall success probability.
pub fn expected_depth(depths: &[f64], p_total: f64) -> Result<f64> {
    if p_total.is_nan() || p_total <= 0.0 {
        return Err(Error::Domain(format!("expected depth needs a positive probability, got {p_total}")));
    }
    Ok(depths.iter().sum::<f64>() / p_total)
}

/// Iteration count maximizing standard Grover success, `floor(pi sqrt(N) / 4)`.
pub fn j_max(n: usize) -> usize {
    (std::f64::consts::PI * 2f64.powf(n as f64 / 2.0) / 4.0).floor() as usize
}

/// Iteration count minimizing expected oracle calls, `floor(0.583 sqrt(N))`.
pub fn j_exp(n: usize) -> usize {
    (0.583 * 2f64.powf(n as f64 / 2.0)).floor() as usize
}

/// One summarized run of a plan. Depths and CNOT counts are averages over
/// trials because routing depends on the target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub circuit_name: String,
    pub n: usize,
    pub backend: String,
    pub mode: String,
    pub trials: usize,
    pub shots: u64,
    pub p_theo: f64,
    pub p_sim: f64,
    pub p_sim_std: f64,
    pub selectivity: f64,
    pub depth: f64,
    pub depth_stage2: f64,
    pub expected_depth_theo: f64,
    pub expected_depth_sim: f64,
    pub cx_count: f64,
    pub degraded_ratio: f64,
}

pub const RECORD_COLUMNS: [&str; 16] = [
    "circuit_name",
    "n",
    "backend",
    "mode",
    "trials",
    "shots",
    "p_theo",
    "p_sim",
    "p_sim_std",
    "selectivity",
    "depth",
    "depth_stage2",
    "expected_depth_theo",
    "expected_depth_sim",
    "cx_count",
    "degraded_ratio",
];

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

pub fn read_csv<T: for<'de> Deserialize<'de>, R: Read>(input: R) -> Result<Vec<T>> {
    csv::Reader::from_reader(input).deserialize().map(|r| r.map_err(csv_error)).collect()
}
