//! Transpiled-depth cost model and exhaustive expected-depth minimization.

use std::collections::HashMap;
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::metrics::expected_depth;
use crate::plan::{SearchPlan, Stage, SupportRule};
use crate::search::{build_stage_circuit, plan_success_probability};
use crate::transpile::{lower_with, Backend, LowerOptions};

/// Widest register whose every target is used when averaging depths.
const ALL_TARGETS_UP_TO: usize = 5;
const SAMPLED_TARGETS: usize = 32;
const MAX_RUNS: usize = 3;
pub const MAX_ORACLES: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StageCost {
    pub depth: f64,
    pub cx: f64,
}

/// Targets over which lowered depths are averaged: all of them for small
/// registers, a seeded sample otherwise.
pub fn depth_targets(n: usize, seed: u64) -> Vec<BitString> {
    if n <= ALL_TARGETS_UP_TO {
        return (0..1usize << n).map(|i| BitString::from_index(i, n)).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..SAMPLED_TARGETS).map(|_| BitString::from_index(rng.random_range(0..1usize << n), n)).collect()
}

/// Mean lowered depth and CNOT count per stage, memoized by stage shape.
/// Number of qubits, determined prefix length and diffusion supports.
type CostKey = (usize, usize, Vec<Vec<usize>>);

pub struct CostModel<'a> {
    backend: &'a Backend,
    seed: u64,
    targets: Vec<BitString>,
    cache: Mutex<HashMap<CostKey, StageCost>>,
}

impl<'a> CostModel<'a> {
    pub fn new(backend: &'a Backend, n: usize, seed: u64) -> CostModel<'a> {
        CostModel::with_targets(backend, depth_targets(n, seed), seed)
    }

    pub fn with_targets(backend: &'a Backend, targets: Vec<BitString>, seed: u64) -> CostModel<'a> {
        CostModel { backend, seed, targets, cache: Mutex::new(HashMap::new()) }
    }

    pub fn stage_cost(&self, plan: &SearchPlan, k: usize) -> Result<StageCost> {
        let layout = plan.stage_layout(k);
        let key = (plan.n(), layout.determined.len(), layout.supports.clone());
        if let Some(c) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(*c);
        }
        let mut depth = 0.0;
        let mut cx = 0.0;
        for t in &self.targets {
            let c = build_stage_circuit(plan, k, t, &t.slice(0..layout.determined.len()))?;
            let tc = lower_with(&c, self.backend, None, self.seed, &LowerOptions::for_execution())?;
            depth += tc.depth() as f64;
            cx += tc.cx_count() as f64;
        }
        let cost = StageCost { depth: depth / self.targets.len() as f64, cx: cx / self.targets.len() as f64 };
        self.cache.lock().expect("cache lock").insert(key, cost);
        Ok(cost)
    }

    pub fn evaluate(&self, plan: &SearchPlan) -> Result<PlanEvaluation> {
        let costs = (0..plan.stages().len()).map(|k| self.stage_cost(plan, k)).collect::<Result<Vec<_>>>()?;
        let p_theo = plan_success_probability(plan)?;
        let depths: Vec<f64> = costs.iter().map(|c| c.depth).collect();
        Ok(PlanEvaluation {
            name: plan.to_string(),
            expected_depth: expected_depth(&depths, p_theo).unwrap_or(f64::INFINITY),
            p_theo,
            stage_depths: depths,
            stage_cx: costs.iter().map(|c| c.cx).collect(),
            plan: plan.clone(),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanEvaluation {
    pub plan: SearchPlan,
    pub name: String,
    pub p_theo: f64,
    pub stage_depths: Vec<f64>,
    pub stage_cx: Vec<f64>,
    pub expected_depth: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OptimizeBounds {
    pub max_oracles: usize,
    pub max_stages: usize,
    /// Only full-width diffusions and no guessing.
    pub force_global: bool,
}

#[derive(Clone, Debug)]
pub struct OptimizeReport {
    pub best: PlanEvaluation,
    /// Every feasible plan, best first.
    pub ranking: Vec<PlanEvaluation>,
}

/// Diffusion-size sequences of `len` entries from `1..=active` with at most
/// `MAX_RUNS` runs of equal sizes.
fn sequences(active: usize, len: usize, global: bool) -> Vec<Vec<usize>> {
    let sizes: Vec<usize> = if global { vec![active] } else { (1..=active).collect() };
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|s: Vec<usize>| sizes.iter().map(move |&m| [s.clone(), vec![m]].concat()))
            .filter(|s| s.windows(2).filter(|w| w[0] != w[1]).count() < MAX_RUNS)
            .collect();
    }
    out
}

fn stage_options(active: usize, max_len: usize, global: bool) -> Vec<Vec<usize>> {
    (1..=max_len).flat_map(|len| sequences(active, len, global)).collect()
}

/// All complete plans (every bit guessed or measured) within the bounds.
pub fn candidate_plans(n: usize, bounds: &OptimizeBounds) -> Result<Vec<SearchPlan>> {
    check_bounds(n, bounds)?;
    let mut plans = Vec::new();
    let max_guess = if bounds.force_global { 0 } else { n - 1 };
    let stage = |guessed, iterations, measured| Stage { guessed, iterations, measured };
    for g in 0..=max_guess {
        let active = n - g;
        for its in stage_options(active, bounds.max_oracles, bounds.force_global) {
            plans.push(vec![stage(g, its, active)]);
        }
        if bounds.max_stages < 2 {
            continue;
        }
        for first in stage_options(active, bounds.max_oracles - 1, bounds.force_global) {
            for p1 in 1..active {
                let rest = active - p1;
                for second in stage_options(rest, bounds.max_oracles - first.len(), bounds.force_global) {
                    plans.push(vec![stage(g, first.clone(), p1), stage(0, second, rest)]);
                }
            }
        }
    }
    Ok(plans.into_iter().filter_map(|s| SearchPlan::from_stages(n, s, SupportRule::Inside).ok()).collect())
}

fn check_bounds(n: usize, bounds: &OptimizeBounds) -> Result<()> {
    if n == 0 {
        return Err(Error::Argument("optimization needs at least one qubit".into()));
    }
    if bounds.max_oracles == 0 || bounds.max_oracles > MAX_ORACLES {
        return Err(Error::Argument(format!("max oracles must be in 1..={MAX_ORACLES}, got {}", bounds.max_oracles)));
    }
    if !(1..=2).contains(&bounds.max_stages) {
        return Err(Error::Argument(format!("stages must be 1 or 2, got {}", bounds.max_stages)));
    }
    if bounds.max_stages == 2 && bounds.max_oracles < 2 {
        return Err(Error::Argument("two stages need at least two oracles".into()));
    }
    Ok(())
}

fn tie_key(e: &PlanEvaluation) -> (usize, Vec<usize>, String) {
    let seq = e.plan.stages().iter().flat_map(|s| s.iterations.iter().copied()).collect();
    (e.plan.oracle_count(), seq, e.name.clone())
}

/// Orders evaluations by expected depth, then fewer oracles, then the
/// diffusion sizes lexicographically.
pub fn rank(evals: &mut [PlanEvaluation]) {
    evals.sort_by(|a, b| a.expected_depth.total_cmp(&b.expected_depth).then_with(|| tie_key(a).cmp(&tie_key(b))));
}

/// Exhaustive minimization of the theoretical expected depth over all
/// plans within `bounds`, using lowered depths on `backend`.
pub fn minimize_expected_depth(
    n: usize,
    backend: &Backend,
    bounds: &OptimizeBounds,
    seed: u64,
) -> Result<OptimizeReport> {
    let plans = candidate_plans(n, bounds)?;
    let model = CostModel::new(backend, n, seed);
    let evals: Vec<PlanEvaluation> = plans.par_iter().map(|p| model.evaluate(p)).collect::<Result<_>>()?;
    let mut ranking: Vec<PlanEvaluation> = evals.into_iter().filter(|e| e.p_theo > 0.0).collect();
    rank(&mut ranking);
    let best = ranking.first().cloned().ok_or_else(|| Error::Argument("no feasible plan within bounds".into()))?;
    Ok(OptimizeReport { best, ranking })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_limit() {
        assert_eq!(sequences(2, 2, false), vec![vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 2]]);
        assert!(!sequences(2, 4, false).contains(&vec![1, 2, 1, 2]));
        assert!(sequences(2, 4, false).contains(&vec![1, 2, 1, 1]));
    }

    #[test]
    fn candidates_are_complete_and_bounded() {
        let b = OptimizeBounds { max_oracles: 2, max_stages: 2, force_global: false };
        let plans = candidate_plans(3, &b).unwrap();
        assert!(plans.iter().all(|p| p.resolved_bits() == 3 && p.oracle_count() <= 2));
        let names: Vec<String> = plans.iter().map(|p| p.to_string()).collect();
        for want in ["D3M3", "G1D2M2", "D3D3M3", "D3M1|D2M2", "D2M1|D2M2"] {
            assert!(names.contains(&want.to_string()), "{want}");
        }
    }

    #[test]
    fn forced_global_singleton() {
        let b = OptimizeBounds { max_oracles: 1, max_stages: 1, force_global: true };
        let r = minimize_expected_depth(4, &Backend::builtin("vigo").unwrap(), &b, 0).unwrap();
        assert_eq!(r.best.name, "D4M4");
        assert_eq!(r.ranking.len(), 1);
    }

    #[test]
    fn invalid_bounds() {
        let vigo = Backend::builtin("vigo").unwrap();
        for b in [
            OptimizeBounds { max_oracles: 0, max_stages: 1, force_global: false },
            OptimizeBounds { max_oracles: 7, max_stages: 1, force_global: false },
            OptimizeBounds { max_oracles: 2, max_stages: 3, force_global: false },
        ] {
            assert!(matches!(minimize_expected_depth(3, &vigo, &b, 0), Err(Error::Argument(_))));
        }
    }

    #[test]
    fn never_worse_than_standard_grover() {
        let vigo = Backend::builtin("vigo").unwrap();
        let b = OptimizeBounds { max_oracles: 2, max_stages: 2, force_global: false };
        let r = minimize_expected_depth(3, &vigo, &b, 0).unwrap();
        let grover = r.ranking.iter().find(|e| e.name == "D3M3").unwrap();
        assert!(r.best.expected_depth <= grover.expected_depth);
        assert!(r.ranking.windows(2).all(|w| w[0].expected_depth <= w[1].expected_depth));
    }
}
