//! Oracle, diffusion and Grover operators, and success probabilities.

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::gates::{Circuit, Gate, GateKind};
use crate::plan::SearchPlan;
use crate::statevector::StateVector;

/// Z-type gate over all of `qubits`: Z, CZ, or MCZ by width.
fn phase_flip_all_ones(qubits: Vec<usize>) -> Gate {
    match qubits.len() {
        1 => Gate::one(GateKind::Z, qubits[0]),
        2 => Gate::cz(qubits[0], qubits[1]),
        _ => Gate::mcz(qubits),
    }
}

/// Whether search circuits over `n` data qubits carry a clean ancilla
/// (qubit index `n`), which the lowering of four- and five-qubit
/// controlled phases needs.
pub fn needs_ancilla(n: usize) -> bool {
    n >= 4
}

fn search_circuit_shell(n: usize) -> Circuit {
    if needs_ancilla(n) {
        Circuit::with_ancillas(n + 1, [n]).expect("ancilla in range")
    } else {
        Circuit::new(n)
    }
}

fn push_oracle(c: &mut Circuit, t: &BitString) -> Result<()> {
    let n = t.len();
    let zeros: Vec<usize> = (0..n).filter(|&q| !t.bit(q)).collect();
    for &q in &zeros {
        c.push(Gate::one(GateKind::X, q))?;
    }
    c.push(phase_flip_all_ones((0..n).collect()))?;
    for &q in &zeros {
        c.push(Gate::one(GateKind::X, q))?;
    }
    Ok(())
}

/// Reflection about |s_m> on `support`, implemented as H and X layers
/// around a controlled phase. The circuit equals `2|s_m><s_m| - 1` up to a
/// global phase of -1.
fn push_diffusion(c: &mut Circuit, support: &[usize]) -> Result<()> {
    for &q in support {
        c.push(Gate::one(GateKind::H, q))?;
    }
    for &q in support {
        c.push(Gate::one(GateKind::X, q))?;
    }
    c.push(phase_flip_all_ones(support.to_vec()))?;
    for &q in support {
        c.push(Gate::one(GateKind::X, q))?;
    }
    for &q in support {
        c.push(Gate::one(GateKind::H, q))?;
    }
    Ok(())
}

/// Phase oracle `1 - 2|t><t|` on `n` qubits.
pub fn oracle_circuit(n: usize, t: &BitString) -> Result<Circuit> {
    if t.len() != n || n == 0 {
        return Err(Error::Argument(format!("target {t} has length {}, expected {n}", t.len())));
    }
    let mut c = Circuit::new(n);
    push_oracle(&mut c, t)?;
    Ok(c)
}

/// Diffusion restricted to `support`; global when the support is every qubit.
pub fn diffusion_circuit(n: usize, support: &[usize]) -> Result<Circuit> {
    if support.is_empty() {
        return Err(Error::Argument("empty diffusion support".into()));
    }
    let mut c = Circuit::new(n);
    push_diffusion(&mut c, support)?;
    Ok(c)
}

/// `sin^2((2j+1)θ)` with `sin θ = 2^{-n/2}`.
pub fn closed_form_success(n: usize, j: usize) -> f64 {
    let theta = (1.0 / (2f64.powi(n as i32)).sqrt()).asin();
    ((2 * j + 1) as f64 * theta).sin().powi(2)
}

/// Hybrid search: guess `n - m` bits, then `j` iterations of G_m on the rest.
pub fn hybrid_closed_form(n: usize, m: usize, j: usize) -> f64 {
    closed_form_success(m, j) / 2f64.powi((n - m) as i32)
}

fn check_target(plan: &SearchPlan, t: &BitString) -> Result<()> {
    if t.len() != plan.n() {
        return Err(Error::Argument(format!("target {t} has length {}, plan has {} qubits", t.len(), plan.n())));
    }
    Ok(())
}

/// State of stage `k` just before measurement, with the determined qubits
/// set from `prior`.
pub fn stage_state(plan: &SearchPlan, k: usize, t: &BitString, prior: &BitString) -> Result<StateVector> {
    check_target(plan, t)?;
    let layout = plan.stage_layout(k);
    if prior.len() != layout.determined.len() {
        return Err(Error::Argument(format!(
            "stage {k} needs {} prior bits, got {}",
            layout.determined.len(),
            prior.len()
        )));
    }
    let n = plan.n();
    let mut sv = StateVector::uniform(layout.active.len())?;
    if !layout.determined.is_empty() {
        // |prior> ⊗ |s_active>: place the uniform block at the prior prefix.
        let dim = 1usize << n;
        let shift = layout.active.len();
        let base = prior.to_index() << shift;
        let mut amps = vec![num_complex::Complex64::new(0.0, 0.0); dim];
        amps[base..base + (1 << shift)].copy_from_slice(sv.amplitudes());
        sv = StateVector::from_amplitudes(amps)?;
    }
    for support in &layout.supports {
        sv.flip_sign(t);
        sv.reflect_about_uniform(support)?;
    }
    Ok(sv)
}

/// Probability that stage `k` reads the target's bits on its measured
/// qubits, given the true target prefix as prior.
pub fn stage_success(plan: &SearchPlan, k: usize, t: &BitString) -> Result<f64> {
    let layout = plan.stage_layout(k);
    let prior = t.slice(0..layout.determined.len());
    let sv = stage_state(plan, k, t, &prior)?;
    let marginal = sv.marginal(&layout.measured)?;
    let want: BitString = layout.measured.iter().map(|&q| t.bit(q)).collect::<Vec<_>>().into();
    Ok(marginal[want.to_index()])
}

/// Success probability for a specific target: product of stage successes
/// times `2^-g` for the guessed bits.
pub fn plan_success_for_target(plan: &SearchPlan, t: &BitString) -> Result<f64> {
    let mut p = 0.5f64.powi(plan.guessed() as i32);
    for k in 0..plan.stages().len() {
        p *= stage_success(plan, k, t)?;
    }
    Ok(p)
}

/// Target-independent success probability of a plan (evaluated at the
/// all-zeros target; every target gives the same value).
pub fn plan_success_probability(plan: &SearchPlan) -> Result<f64> {
    plan_success_for_target(plan, &BitString::zeros(plan.n()))
}

/// Circuit for stage `k`: determined qubits prepared from `prior`,
/// Hadamards on the active qubits, then the stage's Grover iterations with
/// the oracle spanning all `n` qubits. For `n >= 4` the circuit has one
/// extra ancilla qubit at index `n`.
pub fn build_stage_circuit(plan: &SearchPlan, k: usize, t: &BitString, prior: &BitString) -> Result<Circuit> {
    check_target(plan, t)?;
    if k >= plan.stages().len() {
        return Err(Error::Argument(format!("stage {k} out of range")));
    }
    let layout = plan.stage_layout(k);
    if prior.len() != layout.determined.len() {
        return Err(Error::Argument(format!(
            "stage {k} needs {} prior bits, got {}",
            layout.determined.len(),
            prior.len()
        )));
    }
    let mut c = search_circuit_shell(plan.n());
    for (i, &q) in layout.determined.iter().enumerate() {
        if prior.bit(i) {
            c.push(Gate::one(GateKind::X, q))?;
        }
    }
    for &q in &layout.active {
        c.push(Gate::one(GateKind::H, q))?;
    }
    for support in &layout.supports {
        push_oracle(&mut c, t)?;
        push_diffusion(&mut c, support)?;
    }
    Ok(c)
}

/// Standard Grover circuit: `j` global iterations on `n` qubits.
pub fn grover_circuit(n: usize, t: &BitString, j: usize) -> Result<Circuit> {
    let mut c = Circuit::new(n);
    for q in 0..n {
        c.push(Gate::one(GateKind::H, q))?;
    }
    let all: Vec<usize> = (0..n).collect();
    for _ in 0..j {
        push_oracle(&mut c, t)?;
        push_diffusion(&mut c, &all)?;
    }
    Ok(c)
}
