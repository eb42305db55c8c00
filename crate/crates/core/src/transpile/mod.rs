//! Lowering to the `{Rz, X, SX, CX}` basis on a coupling map.
//!
//! Pipeline: optional basis-state propagation, expansion of multi-controlled
//! gates through the ancilla constructions in [`crate::decompose`], layout
//! selection, SWAP routing, then peephole cleanup (CX pair cancellation and
//! single-qubit run fusion) until nothing changes.

pub mod backend;
pub mod euler;
pub mod layout;
mod route;
pub mod simplify;

use std::collections::BTreeSet;

use num_complex::Complex64;

use crate::decompose::{c4z_with_ancilla_using, cccz_with_ancilla_using, phase_aligned_deviation, InnerCcz};
use crate::error::{Error, Result};
use crate::gates::{CMatrix, Circuit, Gate, GateKind};
use crate::statevector::StateVector;

pub use backend::{builtin_backends, Backend};
pub use simplify::simplify_known_basis;

use euler::{basis_sequence, identity2, mat2_of, mul2, Mat2};
use route::Router;

/// Routing-level instruction over logical qubits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Step {
    One(GateKind, usize),
    Cx(usize, usize),
    Cz(usize, usize),
    Ccz([usize; 3]),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LowerOptions {
    /// Assume the circuit starts from |0...0> and resolve controls on
    /// qubits in known basis states. The result then matches the input
    /// only on that initial state.
    pub propagate_input_state: bool,
    /// Number of best-estimated layouts that are routed in full.
    pub layout_candidates: usize,
}

impl Default for LowerOptions {
    fn default() -> Self {
        LowerOptions { propagate_input_state: false, layout_candidates: 12 }
    }
}

impl LowerOptions {
    /// Settings for circuits that are run from |0...0> and measured.
    pub fn for_execution() -> Self {
        LowerOptions { propagate_input_state: true, ..Default::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TranspiledCircuit {
    pub backend: String,
    pub num_physical: usize,
    /// Basis gates on physical qubits.
    pub ops: Vec<Gate>,
    /// Logical qubit -> physical qubit before the first gate.
    pub initial_layout: Vec<usize>,
    /// Logical qubit -> physical qubit after the last gate.
    pub final_layout: Vec<usize>,
    pub ancillas: BTreeSet<usize>,
}

pub fn is_basis_gate(g: &Gate) -> bool {
    matches!(g.kind, GateKind::Rz(_) | GateKind::X | GateKind::SX | GateKind::CX)
}

/// ASAP layering: each gate sits one layer after the latest gate on any of its qubits.
pub fn depth(ops: &[Gate], num_qubits: usize) -> usize {
    let mut level = vec![0usize; num_qubits];
    let mut d = 0;
    for g in ops {
        let l = g.qubits.iter().map(|&q| level[q]).max().unwrap_or(0) + 1;
        for &q in &g.qubits {
            level[q] = l;
        }
        d = d.max(l);
    }
    d
}

pub fn count_cx(ops: &[Gate]) -> usize {
    ops.iter().filter(|g| g.kind == GateKind::CX).count()
}

impl TranspiledCircuit {
    pub fn depth(&self) -> usize {
        depth(&self.ops, self.num_physical)
    }

    pub fn cx_count(&self) -> usize {
        count_cx(&self.ops)
    }

    pub fn logical_width(&self) -> usize {
        self.initial_layout.len()
    }

    /// Sum of two-qubit error rates over the emitted CNOTs.
    pub fn summed_cx_error(&self, backend: &Backend) -> f64 {
        self.ops
            .iter()
            .filter(|g| g.kind == GateKind::CX)
            .map(|g| backend.edge_error(g.qubits[0], g.qubits[1]).unwrap_or(1.0))
            .sum()
    }

    /// Physical qubits that hold a logical qubit or are touched by a gate, ascending.
    pub fn used_physical(&self) -> Vec<usize> {
        let mut s: BTreeSet<usize> = self.initial_layout.iter().copied().collect();
        s.extend(self.ops.iter().flat_map(|g| g.qubits.iter().copied()));
        s.into_iter().collect()
    }

    /// The circuit restricted to [`Self::used_physical`], renumbered densely.
    /// Returns the circuit and the physical index of each compact qubit.
    pub fn compact(&self) -> (Circuit, Vec<usize>) {
        let used = self.used_physical();
        let mut index = vec![usize::MAX; self.num_physical];
        for (i, &p) in used.iter().enumerate() {
            index[p] = i;
        }
        let mut c = Circuit::new(used.len());
        for g in &self.ops {
            let qs = g.qubits.iter().map(|&q| index[q]).collect();
            c.push(Gate { kind: g.kind, qubits: qs }).expect("indices in range");
        }
        (c, used)
    }

    /// Compact-qubit positions of the logical qubits before and after the circuit.
    pub fn compact_layouts(&self) -> (Vec<usize>, Vec<usize>) {
        let used = self.used_physical();
        let pos = |p: &usize| used.binary_search(p).expect("layout qubits are used");
        (self.initial_layout.iter().map(pos).collect(), self.final_layout.iter().map(pos).collect())
    }

    fn run_from_logical(&self, compact: &Circuit, init: &[usize], logical_index: usize) -> Result<StateVector> {
        let w = self.logical_width();
        let mut idx = 0usize;
        for (l, &p) in init.iter().enumerate() {
            if logical_index >> (w - 1 - l) & 1 == 1 {
                idx |= 1 << (compact.num_qubits() - 1 - p);
            }
        }
        let mut sv = StateVector::basis(compact.num_qubits(), idx)?;
        sv.apply_circuit(compact)?;
        Ok(sv)
    }

    /// Logical amplitudes read through `fin`, plus the norm left outside
    /// the logical subspace.
    fn read_logical(&self, sv: &StateVector, fin: &[usize]) -> (Vec<Complex64>, f64) {
        let w = self.logical_width();
        let cw = sv.num_qubits();
        let mut inside = vec![false; sv.amplitudes().len()];
        let out = (0..1usize << w)
            .map(|y| {
                let mut idx = 0usize;
                for (l, &p) in fin.iter().enumerate() {
                    if y >> (w - 1 - l) & 1 == 1 {
                        idx |= 1 << (cw - 1 - p);
                    }
                }
                inside[idx] = true;
                sv.amplitudes()[idx]
            })
            .collect();
        let leak: f64 =
            sv.amplitudes().iter().zip(&inside).filter(|(_, &i)| !i).map(|(a, _)| a.norm_sqr()).sum();
        (out, leak.sqrt())
    }

    /// Worst deviation from `original` on every input with ancillas at |0>,
    /// up to one global phase. Amplitude left outside the logical subspace
    /// (ancillas or spare qubits not back at |0>) counts as deviation.
    pub fn unitary_deviation(&self, original: &Circuit) -> Result<f64> {
        self.deviation_over(original, false)
    }

    /// Same check, for the input |0...0> only.
    pub fn state_deviation(&self, original: &Circuit) -> Result<f64> {
        self.deviation_over(original, true)
    }

    fn deviation_over(&self, original: &Circuit, zero_only: bool) -> Result<f64> {
        let w = self.logical_width();
        if original.num_qubits() != w {
            return Err(Error::Argument(format!("logical width {w} vs original {}", original.num_qubits())));
        }
        let (compact, _) = self.compact();
        let (init, fin) = self.compact_layouts();
        let anc_mask: usize = original.ancillas().iter().map(|&a| 1usize << (w - 1 - a)).sum();
        let inputs: Vec<usize> =
            if zero_only { vec![0] } else { (0..1usize << w).filter(|x| x & anc_mask == 0).collect() };
        let dim = 1usize << w;
        let mut got = CMatrix::zeros(dim, inputs.len());
        let mut want = CMatrix::zeros(dim, inputs.len());
        let mut leak: f64 = 0.0;
        for (col, &x) in inputs.iter().enumerate() {
            let sv = self.run_from_logical(&compact, &init, x)?;
            let (out, outside) = self.read_logical(&sv, &fin);
            leak = leak.max(outside);
            let mut reference = StateVector::basis(w, x)?;
            reference.apply_circuit(original)?;
            for y in 0..dim {
                got[(y, col)] = out[y];
                want[(y, col)] = reference.amplitudes()[y];
            }
        }
        Ok(phase_aligned_deviation(&got, &want).max(leak))
    }
}

fn one_steps(kind: GateKind, q: usize) -> Step {
    Step::One(kind, q)
}

/// Expands a circuit into routing steps over its logical qubits.
pub(crate) fn expand(circuit: &Circuit) -> Result<Vec<Step>> {
    let mut out = Vec::new();
    for g in circuit.gates() {
        expand_gate(g, circuit.ancillas(), &mut out)?;
    }
    Ok(out)
}

fn expand_gate(g: &Gate, ancillas: &BTreeSet<usize>, out: &mut Vec<Step>) -> Result<()> {
    let q = &g.qubits;
    match g.kind {
        GateKind::CX => out.push(Step::Cx(q[0], q[1])),
        GateKind::CZ => out.push(Step::Cz(q[0], q[1])),
        GateKind::MCX => {
            let t = *q.last().expect("target");
            if q.len() == 2 {
                out.push(Step::Cx(q[0], t));
            } else {
                out.push(one_steps(GateKind::H, t));
                expand_gate(&Gate::mcz(q.clone()), ancillas, out)?;
                out.push(one_steps(GateKind::H, t));
            }
        }
        GateKind::MCZ => match q.len() {
            1 => out.push(one_steps(GateKind::Z, q[0])),
            2 => out.push(Step::Cz(q[0], q[1])),
            3 => out.push(Step::Ccz([q[0], q[1], q[2]])),
            4 | 5 => {
                let anc = ancillas.iter().copied().find(|a| !q.contains(a)).ok_or_else(|| {
                    Error::Unsupported(format!("{}-qubit controlled phase needs a clean ancilla", q.len()))
                })?;
                let sub = if q.len() == 4 {
                    cccz_with_ancilla_using(q[0], q[1], q[2], q[3], anc, InnerCcz::Abstract)?
                } else {
                    c4z_with_ancilla_using(q[0], q[1], q[2], q[3], q[4], anc, InnerCcz::Abstract)?
                };
                for h in sub.gates() {
                    expand_gate(h, ancillas, out)?;
                }
            }
            k => return Err(Error::Unsupported(format!("{k}-qubit controlled phase"))),
        },
        kind => out.push(one_steps(kind, q[0])),
    }
    Ok(())
}

/// Removes back-to-back identical CNOTs.
fn cancel_cx_pairs(ops: Vec<Gate>, num_qubits: usize) -> Vec<Gate> {
    let mut keep: Vec<Option<Gate>> = Vec::with_capacity(ops.len());
    let mut stacks: Vec<Vec<usize>> = vec![Vec::new(); num_qubits];
    for g in ops {
        if g.kind == GateKind::CX {
            let (a, b) = (g.qubits[0], g.qubits[1]);
            if let (Some(&i), Some(&j)) = (stacks[a].last(), stacks[b].last()) {
                if i == j && keep[i].as_ref() == Some(&g) {
                    keep[i] = None;
                    stacks[a].pop();
                    stacks[b].pop();
                    continue;
                }
            }
        }
        let idx = keep.len();
        for &q in &g.qubits {
            stacks[q].push(idx);
        }
        keep.push(Some(g));
    }
    keep.into_iter().flatten().collect()
}

/// Merges each maximal single-qubit run into its basis-gate form.
fn fuse_single_qubit_runs(ops: Vec<Gate>, num_qubits: usize) -> Vec<Gate> {
    let mut pending: Vec<Option<Mat2>> = vec![None; num_qubits];
    let mut out = Vec::with_capacity(ops.len());
    let flush = |q: usize, pending: &mut Vec<Option<Mat2>>, out: &mut Vec<Gate>| {
        if let Some(u) = pending[q].take() {
            out.extend(basis_sequence(&u).into_iter().map(|k| Gate::one(k, q)));
        }
    };
    for g in ops {
        if g.qubits.len() == 1 {
            let q = g.qubits[0];
            let acc = pending[q].unwrap_or_else(identity2);
            pending[q] = Some(mul2(&mat2_of(&g.kind), &acc));
        } else {
            for &q in &g.qubits {
                flush(q, &mut pending, &mut out);
            }
            out.push(g);
        }
    }
    for q in 0..num_qubits {
        flush(q, &mut pending, &mut out);
    }
    out
}

fn optimize(mut ops: Vec<Gate>, num_qubits: usize) -> Vec<Gate> {
    ops = fuse_single_qubit_runs(ops, num_qubits);
    loop {
        let before = ops.clone();
        ops = cancel_cx_pairs(ops, num_qubits);
        ops = fuse_single_qubit_runs(ops, num_qubits);
        if ops == before {
            return ops;
        }
    }
}

fn route(steps: &[Step], backend: &Backend, layout: &[usize], ancillas: &BTreeSet<usize>) -> Result<TranspiledCircuit> {
    let mut r = Router::new(backend, layout)?;
    for s in steps {
        match *s {
            Step::One(k, q) => r.one_qubit(k, q),
            Step::Cx(c, t) => r.cx(c, t)?,
            Step::Cz(a, b) => r.cz(a, b)?,
            Step::Ccz(qs) => r.ccz(qs)?,
        }
    }
    let final_layout = r.layout().to_vec();
    let ops = optimize(std::mem::take(&mut r.ops), backend.num_qubits);
    Ok(TranspiledCircuit {
        backend: backend.name.clone(),
        num_physical: backend.num_qubits,
        ops,
        initial_layout: layout.to_vec(),
        final_layout,
        ancillas: ancillas.clone(),
    })
}

fn check_fits(circuit: &Circuit, backend: &Backend) -> Result<()> {
    if circuit.num_qubits() > backend.num_qubits {
        return Err(Error::WidthOverflow {
            needed: circuit.num_qubits(),
            available: backend.num_qubits,
            backend: backend.name.clone(),
        });
    }
    if !backend.is_connected() {
        return Err(Error::Disconnected(backend.name.clone()));
    }
    Ok(())
}

fn lower_expanded(
    circuit: &Circuit,
    backend: &Backend,
    layout: Option<&[usize]>,
    seed: u64,
    opts: &LowerOptions,
) -> Result<TranspiledCircuit> {
    check_fits(circuit, backend)?;
    let source;
    let circuit = if opts.propagate_input_state {
        source = simplify_known_basis(circuit);
        &source
    } else {
        circuit
    };
    let steps = expand(circuit)?;
    if let Some(l) = layout {
        if l.len() != circuit.num_qubits() {
            return Err(Error::Layout(format!("layout has {} entries for {} qubits", l.len(), circuit.num_qubits())));
        }
        return route(&steps, backend, l, circuit.ancillas());
    }
    let candidates = layout::ranked_layouts(&steps, circuit.num_qubits(), backend, seed, opts.layout_candidates)?;
    let mut best: Option<((usize, f64, usize), TranspiledCircuit)> = None;
    for cand in candidates {
        let tc = route(&steps, backend, &cand, circuit.ancillas())?;
        let key = (tc.cx_count(), tc.summed_cx_error(backend), tc.depth());
        if best.as_ref().is_none_or(|(k, _)| key < *k) {
            best = Some((key, tc));
        }
    }
    Ok(best.expect("at least one candidate").1)
}

/// Lowers `circuit` onto `backend`, preserving its unitary (ancilla-|0>
/// block) up to global phase. Without a layout one is chosen by
/// [`choose_layout`].
pub fn lower(circuit: &Circuit, backend: &Backend, layout: Option<&[usize]>, seed: u64) -> Result<TranspiledCircuit> {
    lower_expanded(circuit, backend, layout, seed, &LowerOptions::default())
}

pub fn lower_with(
    circuit: &Circuit,
    backend: &Backend,
    layout: Option<&[usize]>,
    seed: u64,
    opts: &LowerOptions,
) -> Result<TranspiledCircuit> {
    lower_expanded(circuit, backend, layout, seed, opts)
}

/// Logical -> physical placement that [`lower`] would pick: the
/// best-estimated connected placements are routed in full and the one with
/// the fewest CNOTs, then lowest summed CNOT error, then smallest depth wins.
pub fn choose_layout(circuit: &Circuit, backend: &Backend, seed: u64) -> Result<Vec<usize>> {
    Ok(lower(circuit, backend, None, seed)?.initial_layout)
}
