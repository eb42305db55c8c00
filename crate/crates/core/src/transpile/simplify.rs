//! Constant propagation of computational-basis states from an all-zeros input.
//!
//! Qubits start in |0> and stay classically known until a non-diagonal,
//! non-X gate touches them. Controls on known qubits are resolved: a
//! known |0> control removes the gate, a known |1> control is dropped from
//! the control set, and diagonal gates acting only on known qubits become
//! global phases. The result prepares the same state from |0...0> (up to
//! global phase) but is not unitarily equivalent to the input.

use crate::gates::{Circuit, Gate, GateKind};

fn z_family(qubits: Vec<usize>) -> Option<Gate> {
    match qubits.len() {
        0 => None,
        1 => Some(Gate::one(GateKind::Z, qubits[0])),
        2 => Some(Gate::cz(qubits[0], qubits[1])),
        _ => Some(Gate::mcz(qubits)),
    }
}

pub fn simplify_known_basis(circuit: &Circuit) -> Circuit {
    let mut known: Vec<Option<bool>> = vec![Some(false); circuit.num_qubits()];
    let mut out = Vec::with_capacity(circuit.len());
    for g in circuit.gates() {
        use GateKind::*;
        match g.kind {
            X => {
                let q = g.qubits[0];
                known[q] = known[q].map(|b| !b);
                out.push(g.clone());
            }
            Z | S | Sdg | T | Tdg | Rz(_) => {
                if known[g.qubits[0]].is_none() {
                    out.push(g.clone());
                }
            }
            CZ | MCZ => {
                if g.qubits.iter().any(|&q| known[q] == Some(false)) {
                    continue;
                }
                let rest: Vec<usize> = g.qubits.iter().copied().filter(|&q| known[q].is_none()).collect();
                out.extend(z_family(rest));
            }
            CX | MCX => {
                let (&t, controls) = g.qubits.split_last().expect("controlled gate has a target");
                if controls.iter().any(|&q| known[q] == Some(false)) {
                    continue;
                }
                let rest: Vec<usize> = controls.iter().copied().filter(|&q| known[q].is_none()).collect();
                match rest.len() {
                    0 => {
                        known[t] = known[t].map(|b| !b);
                        out.push(Gate::one(X, t));
                    }
                    1 => {
                        known[t] = None;
                        out.push(Gate::cx(rest[0], t));
                    }
                    _ => {
                        known[t] = None;
                        out.push(Gate::mcx(&rest, t));
                    }
                }
            }
            H | Y | SX | SXdg | Ry(_) => {
                known[g.qubits[0]] = None;
                out.push(g.clone());
            }
        }
    }
    let mut c = Circuit::with_ancillas(circuit.num_qubits(), circuit.ancillas().iter().copied())
        .expect("ancillas already validated");
    for g in out {
        c.push(g).expect("qubits already validated");
    }
    c
}
