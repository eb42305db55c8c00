//! Trial protocol: per-target noisy runs of a plan, summarized into an
//! [`ExperimentRecord`], and catalog sweeps with a logistic fit.
//!
//! In product mode every stage is prepared with the true target prefix and
//! the trial success is the product of stage successes times the guess
//! factor. Chained mode feeds each stage the majority outcome of the
//! previous ones; a wrong prefix makes the remaining stages count as failed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::catalog::{catalog_plans, fixture_targets};
use crate::error::{Error, Result};
use crate::logistic::{fit_logistic, LogisticFit};
use crate::metrics::{expected_depth, selectivity, ExperimentRecord};
use crate::noise::{degraded_ratio, run_shots, NoiseModel, ShotHistogram};
use crate::plan::SearchPlan;
use crate::search::{build_stage_circuit, plan_success_probability};
use crate::stats::{mean, spearman, std_dev};
use crate::transpile::{lower_with, Backend, LowerOptions};

#[derive(Clone, Debug, PartialEq)]
pub enum TargetSource {
    /// The fixed thirty-target lists of the catalog.
    Fixture,
    /// Uniformly drawn from the protocol seed.
    Random,
    Explicit(Vec<BitString>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialProtocol {
    pub trials: usize,
    pub shots: u64,
    pub targets: TargetSource,
    pub seed: u64,
    pub chained: bool,
    pub noise: NoiseModel,
}

impl TrialProtocol {
    /// 30 fixture trials of 8192 shots under the backend's default noise.
    pub fn new(backend: &Backend) -> TrialProtocol {
        TrialProtocol {
            trials: 30,
            shots: 8192,
            targets: TargetSource::Fixture,
            seed: 0,
            chained: false,
            noise: NoiseModel::from_backend(backend),
        }
    }

    pub fn targets(&self, n: usize) -> Result<Vec<BitString>> {
        if self.trials == 0 {
            return Err(Error::Argument("at least one trial is required".into()));
        }
        let list = match &self.targets {
            TargetSource::Fixture => {
                let all = fixture_targets(n)?;
                if self.trials > all.len() {
                    return Err(Error::Argument(format!("the fixture has {} targets, {} trials requested", all.len(), self.trials)));
                }
                all[..self.trials].to_vec()
            }
            TargetSource::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(u64::MAX);
                (0..self.trials).map(|_| BitString::from_index(rng.random_range(0..1usize << n), n)).collect()
            }
            TargetSource::Explicit(list) => {
                if list.len() != self.trials {
                    return Err(Error::Argument(format!("{} targets given for {} trials", list.len(), self.trials)));
                }
                list.clone()
            }
        };
        if let Some(t) = list.iter().find(|t| t.len() != n) {
            return Err(Error::Argument(format!("target `{t}` is not {n} bits")));
        }
        Ok(list)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: usize,
    pub target: String,
    pub p_sim: f64,
    pub selectivity: f64,
    pub stage1_success: f64,
    pub stage2_success: f64,
    pub depth: usize,
    pub depth_stage2: usize,
    pub cx_count: usize,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub record: ExperimentRecord,
    pub trials: Vec<TrialRow>,
}

fn trial_seed(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn bits_at(t: &BitString, qubits: &[usize]) -> BitString {
    BitString::new(qubits.iter().map(|&q| t.bit(q)).collect())
}

fn majority(h: &ShotHistogram) -> BitString {
    let mut best: Option<(&BitString, u64)> = None;
    for (b, &c) in &h.counts {
        if best.is_none_or(|(_, bc)| c > bc) {
            best = Some((b, c));
        }
    }
    best.map(|(b, _)| b.clone()).unwrap_or_default()
}

fn run_trial(
    plan: &SearchPlan,
    backend: &Backend,
    protocol: &TrialProtocol,
    index: usize,
    t: &BitString,
) -> Result<TrialRow> {
    let mut rng = trial_seed(protocol.seed, index);
    let stages = plan.stages().len();
    let mut success = vec![0.0; stages];
    let mut depth = vec![0usize; stages];
    let mut cx = 0;
    let mut sel = f64::INFINITY;
    let mut known = t.slice(0..plan.stage_layout(0).determined.len());
    let mut on_track = true;
    for (k, s) in success.iter_mut().enumerate() {
        let layout = plan.stage_layout(k);
        let prior = if protocol.chained { known.clone() } else { t.slice(0..layout.determined.len()) };
        let c = build_stage_circuit(plan, k, t, &prior)?;
        let tc = lower_with(&c, backend, None, protocol.seed, &LowerOptions::for_execution())?;
        depth[k] = tc.depth();
        cx += tc.cx_count();
        let hist = run_shots(&tc, &layout.measured, &protocol.noise, protocol.shots, rng.random())?;
        let want = bits_at(t, &layout.measured);
        *s = if on_track { hist.probability(&want) } else { 0.0 };
        sel = sel.min(selectivity(&hist, &want)?);
        if protocol.chained {
            let got = majority(&hist);
            on_track &= got == want;
            if k + 1 < stages {
                let next_det = plan.stage_layout(k + 1).determined.len();
                known = known.concat(&got).concat(&t.slice(prior.len() + got.len()..next_det));
            }
        }
    }
    let p_sim = 0.5f64.powi(plan.guessed() as i32) * success.iter().product::<f64>();
    Ok(TrialRow {
        trial: index,
        target: t.to_string(),
        p_sim,
        selectivity: sel,
        stage1_success: success[0],
        stage2_success: success.get(1).copied().unwrap_or(f64::NAN),
        depth: depth[0],
        depth_stage2: depth.get(1).copied().unwrap_or(0),
        cx_count: cx,
    })
}

/// Runs every trial of `protocol` for `plan` and summarizes them. Trials run
/// in parallel with per-trial seeds; results do not depend on scheduling.
pub fn run_plan(plan: &SearchPlan, backend: &Backend, protocol: &TrialProtocol) -> Result<RunReport> {
    if plan.stages().len() > 2 {
        return Err(Error::Unsupported("plans with more than two stages".into()));
    }
    protocol.noise.validate()?;
    let targets = protocol.targets(plan.n())?;
    let rows: Vec<TrialRow> = targets
        .par_iter()
        .enumerate()
        .map(|(i, t)| run_trial(plan, backend, protocol, i, t))
        .collect::<Result<_>>()?;

    let ps: Vec<f64> = rows.iter().map(|r| r.p_sim).collect();
    let p_sim = mean(&ps);
    let p_theo = plan_success_probability(plan)?;
    let depth = mean(&rows.iter().map(|r| r.depth as f64).collect::<Vec<_>>());
    let depth_stage2 = mean(&rows.iter().map(|r| r.depth_stage2 as f64).collect::<Vec<_>>());
    let total = [depth, depth_stage2];
    let record = ExperimentRecord {
        circuit_name: plan.to_string(),
        n: plan.n(),
        backend: backend.name.clone(),
        mode: if protocol.chained { "chained" } else { "product" }.into(),
        trials: rows.len(),
        shots: protocol.shots,
        p_theo,
        p_sim,
        p_sim_std: std_dev(&ps),
        selectivity: mean(&rows.iter().map(|r| r.selectivity).collect::<Vec<_>>()),
        depth,
        depth_stage2,
        expected_depth_theo: expected_depth(&total, p_theo).unwrap_or(f64::INFINITY),
        expected_depth_sim: expected_depth(&total, p_sim).unwrap_or(f64::INFINITY),
        cx_count: mean(&rows.iter().map(|r| r.cx_count as f64).collect::<Vec<_>>()),
        degraded_ratio: degraded_ratio(p_sim, p_theo)?,
    };
    Ok(RunReport { record, trials: rows })
}

#[derive(Clone, Debug)]
pub struct SweepReport {
    pub records: Vec<ExperimentRecord>,
    /// Logistic fit of degraded ratio against CNOT count; `None` when the
    /// points are degenerate.
    pub fit: Option<LogisticFit>,
    pub spearman: Option<f64>,
}

/// Runs the whole `n`-qubit catalog once per noise scale (CNOT error
/// probabilities multiplied by the factor, capped at 1).
pub fn sweep(n: usize, backend: &Backend, protocol: &TrialProtocol, scales: &[f64]) -> Result<SweepReport> {
    if scales.is_empty() {
        return Err(Error::Argument("empty noise grid".into()));
    }
    let plans = catalog_plans(n)?;
    let mut records = Vec::new();
    for &s in scales {
        if s.is_nan() || s < 0.0 {
            return Err(Error::Argument(format!("noise scale {s} must be non-negative")));
        }
        let mut p = protocol.clone();
        p.noise.cx_depolarizing.values_mut().for_each(|v| *v = (*v * s).min(1.0));
        for plan in &plans {
            records.push(run_plan(plan, backend, &p)?.record);
        }
    }
    let xs: Vec<f64> = records.iter().map(|r| r.cx_count).collect();
    let ys: Vec<f64> = records.iter().map(|r| r.degraded_ratio).collect();
    let points: Vec<(f64, f64)> = xs.iter().copied().zip(ys.iter().copied()).collect();
    Ok(SweepReport { fit: fit_logistic(&points).ok(), spearman: spearman(&xs, &ys).ok(), records })
}
