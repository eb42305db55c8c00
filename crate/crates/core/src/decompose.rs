//! Multi-controlled gate constructions and unitary equivalence checks.
//!
//! Throughout, the controlled "Y" of the constructions is the real matrix
//! `Y = Z·X = [[0, 1], [-1, 0]]`, not the Pauli `Y` of [`GateKind::Y`]
//! (they differ by a factor of `i`, which matters once controlled).

use std::collections::BTreeSet;
use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gates::{CMatrix, Circuit, Gate, GateKind};

fn distinct(qubits: &[usize]) -> Result<()> {
    let set: BTreeSet<_> = qubits.iter().collect();
    if set.len() != qubits.len() {
        return Err(Error::Argument(format!("duplicate qubit indices in {qubits:?}")));
    }
    Ok(())
}

fn width(qubits: &[usize]) -> usize {
    qubits.iter().max().map_or(0, |m| m + 1)
}

fn build(qubits: &[usize], ancilla: Option<usize>, gates: Vec<Gate>) -> Circuit {
    let mut c = Circuit::with_ancillas(width(qubits), ancilla).expect("ancilla within width");
    for g in gates {
        c.push(g).expect("construction emits valid gates");
    }
    c
}

fn one(kind: GateKind, q: usize) -> Gate {
    Gate::one(kind, q)
}

/// Λ2(Z) from eight nearest-neighbour CNOTs on the chain `q0 - q1 - q2`.
pub fn ccz_linear(q0: usize, q1: usize, q2: usize) -> Result<Circuit> {
    distinct(&[q0, q1, q2])?;
    Ok(build(&[q0, q1, q2], None, ccz_linear_gates(q0, q1, q2)))
}

pub(crate) fn ccz_linear_gates(q0: usize, q1: usize, q2: usize) -> Vec<Gate> {
    use GateKind::{Tdg, T};
    vec![
        one(Tdg, q0),
        one(Tdg, q1),
        one(Tdg, q2),
        Gate::cx(q0, q1),
        Gate::cx(q1, q2),
        Gate::cx(q0, q1),
        one(Tdg, q2),
        Gate::cx(q1, q2),
        Gate::cx(q0, q1),
        one(T, q2),
        one(T, q1),
        Gate::cx(q1, q2),
        Gate::cx(q0, q1),
        one(T, q2),
        Gate::cx(q1, q2),
    ]
}

/// Λ2(Z) from six CNOTs; needs all three pairs coupled.
pub fn ccz_full(a: usize, b: usize, c: usize) -> Result<Circuit> {
    distinct(&[a, b, c])?;
    Ok(build(&[a, b, c], None, ccz_full_gates(a, b, c)))
}

pub(crate) fn ccz_full_gates(a: usize, b: usize, c: usize) -> Vec<Gate> {
    use GateKind::{Tdg, T};
    vec![
        Gate::cx(b, c),
        one(Tdg, c),
        Gate::cx(a, c),
        one(T, c),
        Gate::cx(b, c),
        one(Tdg, c),
        Gate::cx(a, c),
        one(T, b),
        one(T, c),
        Gate::cx(a, b),
        one(T, a),
        one(Tdg, b),
        Gate::cx(a, b),
    ]
}

/// Λ2(Y) with `Y = ZX`: Ry(π/4) rotations around two CNOTs from `q1` and
/// one from `q0`, closed by `CZ(q0, target)`. With `with_cz = false` the
/// trailing CZ is left out, giving Λ2(Y)·CZ(q0, target).
pub fn ccy(q0: usize, q1: usize, target: usize, with_cz: bool) -> Result<Circuit> {
    distinct(&[q0, q1, target])?;
    Ok(build(&[q0, q1, target], None, ccy_gates(q0, q1, target, with_cz)))
}

pub(crate) fn ccy_gates(q0: usize, q1: usize, target: usize, with_cz: bool) -> Vec<Gate> {
    let g = GateKind::Ry(FRAC_PI_4);
    let gd = GateKind::Ry(-FRAC_PI_4);
    let mut v = vec![
        one(g, target),
        Gate::cx(q1, target),
        one(g, target),
        Gate::cx(q0, target),
        one(gd, target),
        Gate::cx(q1, target),
        one(gd, target),
    ];
    if with_cz {
        v.push(Gate::cz(q0, target));
    }
    v
}

/// How the Λ2(Z) in the middle of an ancilla construction is emitted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InnerCcz {
    /// Eight-CNOT chain with the ancilla in the middle.
    Linear,
    /// A single abstract `MCZ` gate, left for later lowering.
    Abstract,
}

fn inner_ccz(ctrl: usize, ancilla: usize, target: usize, how: InnerCcz) -> Vec<Gate> {
    match how {
        InnerCcz::Linear => ccz_linear_gates(ctrl, ancilla, target),
        InnerCcz::Abstract => vec![Gate::mcz(vec![ancilla, ctrl, target])],
    }
}

/// Λ3(Z) on `(c1, c2, c3, target)` using a clean ancilla:
/// Λ2(Y) onto the ancilla, Λ2(Z) on (ancilla, c3, target), then Λ2(Y)†.
/// The CZ of the first Λ2(Y) and the one of its inverse cancel.
pub fn cccz_with_ancilla(c1: usize, c2: usize, c3: usize, target: usize, ancilla: usize) -> Result<Circuit> {
    cccz_with_ancilla_using(c1, c2, c3, target, ancilla, InnerCcz::Linear)
}

pub fn cccz_with_ancilla_using(
    c1: usize,
    c2: usize,
    c3: usize,
    target: usize,
    ancilla: usize,
    how: InnerCcz,
) -> Result<Circuit> {
    let qs = [c1, c2, c3, target, ancilla];
    distinct(&qs)?;
    let half = ccy_gates(c1, c2, ancilla, false);
    let mut gates = half.clone();
    gates.extend(inner_ccz(c3, ancilla, target, how));
    gates.extend(half.iter().rev().map(Gate::inverse));
    Ok(build(&qs, Some(ancilla), gates))
}

/// Λ3(Y) up to a diagonal relative phase: six CNOTs, all targeting
/// `target`, which must be coupled to every control.
///
/// Following the emitted circuit with [`c3y_correction`] gives exactly
/// Λ3(Y); the correction multiplies |1100> by -i and |1101> by +i and is
/// never emitted.
pub fn c3y_relative_phase(c1: usize, c2: usize, c3: usize, target: usize) -> Result<Circuit> {
    let qs = [c1, c2, c3, target];
    distinct(&qs)?;
    Ok(build(&qs, None, c3y_gates(c1, c2, c3, target)))
}

pub(crate) fn c3y_gates(c1: usize, c2: usize, c3: usize, t: usize) -> Vec<Gate> {
    use GateKind::{Tdg, H, T};
    vec![
        one(H, t),
        one(T, t),
        Gate::cx(c3, t),
        one(Tdg, t),
        one(H, t),
        Gate::cx(c1, t),
        one(T, t),
        Gate::cx(c2, t),
        one(Tdg, t),
        Gate::cx(c1, t),
        one(T, t),
        Gate::cx(c2, t),
        one(Tdg, t),
        one(H, t),
        one(T, t),
        Gate::cx(c3, t),
        one(Tdg, t),
        one(H, t),
    ]
}

/// Diagonal phase that completes [`c3y_relative_phase`], as a 16x16 matrix
/// over `(c1, c2, c3, target)`.
pub fn c3y_correction() -> CMatrix {
    let mut m = CMatrix::identity(16, 16);
    m[(0b1100, 0b1100)] = Complex64::new(0.0, -1.0);
    m[(0b1101, 0b1101)] = Complex64::new(0.0, 1.0);
    m
}

/// Λ4(Z) on `(c1..c4, target)` with a clean ancilla: relative-phase Λ3(Y)
/// onto the ancilla, Λ2(Z) on (ancilla, c4, target), then the inverse
/// Λ3(Y); the relative phases cancel.
pub fn c4z_with_ancilla(
    c1: usize,
    c2: usize,
    c3: usize,
    c4: usize,
    target: usize,
    ancilla: usize,
) -> Result<Circuit> {
    c4z_with_ancilla_using(c1, c2, c3, c4, target, ancilla, InnerCcz::Linear)
}

pub fn c4z_with_ancilla_using(
    c1: usize,
    c2: usize,
    c3: usize,
    c4: usize,
    target: usize,
    ancilla: usize,
    how: InnerCcz,
) -> Result<Circuit> {
    let qs = [c1, c2, c3, c4, target, ancilla];
    distinct(&qs)?;
    let half = c3y_gates(c1, c2, c3, ancilla);
    let mut gates = half.clone();
    gates.extend(inner_ccz(c4, ancilla, target, how));
    gates.extend(half.iter().rev().map(Gate::inverse));
    Ok(build(&qs, Some(ancilla), gates))
}

/// Dense matrix of a gate `u` on `target` controlled by all `controls`
/// being 1, over `n` qubits (qubit 0 = MSB).
pub fn controlled_matrix(n: usize, controls: &[usize], target: usize, u: &CMatrix) -> CMatrix {
    let dim = 1usize << n;
    let bit = |i: usize, q: usize| (i >> (n - 1 - q)) & 1;
    let mut m = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        if controls.iter().all(|&c| bit(col, c) == 1) {
            let tb = bit(col, target);
            let tmask = 1 << (n - 1 - target);
            let base = col & !tmask;
            m[(base, col)] += u[(0, tb)];
            m[(base | tmask, col)] += u[(1, tb)];
        } else {
            m[(col, col)] = Complex64::new(1.0, 0.0);
        }
    }
    m
}

/// The `Y = ZX` matrix used by the controlled-Y constructions.
pub fn y_zx() -> CMatrix {
    let o = Complex64::new(1.0, 0.0);
    let z = Complex64::new(0.0, 0.0);
    CMatrix::from_row_slice(2, 2, &[z, o, -o, z])
}

/// diag(1, ..., 1, -1) on `n` qubits.
pub fn mcz_matrix(n: usize) -> CMatrix {
    let dim = 1usize << n;
    let mut m = CMatrix::identity(dim, dim);
    m[(dim - 1, dim - 1)] = Complex64::new(-1.0, 0.0);
    m
}

/// Outcome of [`verify_equivalence`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Equivalence {
    /// Max elementwise |U - e^{iφ} R| after phase alignment.
    pub deviation: f64,
    /// Largest amplitude left on a nonzero ancilla value, over all inputs
    /// with the ancilla at |0>. Zero when no ancilla is given.
    pub leakage: f64,
}

pub const MAX_VERIFY_WIDTH: usize = 7;

/// Compares `circuit` with `reference` up to a global phase.
///
/// Without an ancilla the reference must be the full `2^w x 2^w` unitary.
/// With one, the reference acts on the remaining qubits in ascending order,
/// and the circuit is compared on its ancilla-|0> block. The phase
/// reference is the largest-magnitude entry of `reference`.
pub fn verify_equivalence(circuit: &Circuit, reference: &CMatrix, ancilla: Option<usize>) -> Result<Equivalence> {
    let w = circuit.num_qubits();
    if w > MAX_VERIFY_WIDTH {
        return Err(Error::Argument(format!("verification limited to {MAX_VERIFY_WIDTH} qubits, got {w}")));
    }
    let u = circuit.unitary();
    let (block, leakage) = match ancilla {
        None => (u, 0.0),
        Some(a) => {
            if a >= w {
                return Err(Error::Index(format!("ancilla {a} outside {w} qubits")));
            }
            project_ancilla(&u, w, a)
        }
    };
    if block.nrows() != reference.nrows() || block.ncols() != reference.ncols() {
        return Err(Error::Argument(format!(
            "dimension mismatch: circuit block {}x{}, reference {}x{}",
            block.nrows(),
            block.ncols(),
            reference.nrows(),
            reference.ncols()
        )));
    }
    Ok(Equivalence { deviation: phase_aligned_deviation(&block, reference), leakage })
}

/// Max elementwise |a - e^{iφ} b| with φ fixed by b's largest entry.
pub fn phase_aligned_deviation(a: &CMatrix, b: &CMatrix) -> f64 {
    let (mut k, mut best) = ((0, 0), -1.0);
    for r in 0..b.nrows() {
        for c in 0..b.ncols() {
            let m = b[(r, c)].norm();
            if m > best {
                best = m;
                k = (r, c);
            }
        }
    }
    let phase = if a[k].norm() > 0.0 && b[k].norm() > 0.0 {
        Complex64::from_polar(1.0, a[k].arg() - b[k].arg())
    } else {
        Complex64::new(1.0, 0.0)
    };
    (a - b * phase).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Splits a `w`-qubit unitary into its ancilla-|0> block over the other
/// qubits and the max amplitude that leaks to ancilla |1>.
pub fn project_ancilla(u: &CMatrix, w: usize, ancilla: usize) -> (CMatrix, f64) {
    let amask = 1usize << (w - 1 - ancilla);
    let data: Vec<usize> = (0..1usize << w).filter(|i| i & amask == 0).collect();
    let d = data.len();
    let mut block = CMatrix::zeros(d, d);
    let mut leak = 0.0f64;
    for (cj, &col) in data.iter().enumerate() {
        for (ri, &row) in data.iter().enumerate() {
            block[(ri, cj)] = u[(row, col)];
        }
        for row in 0..1usize << w {
            if row & amask != 0 {
                leak = leak.max(u[(row, col)].norm());
            }
        }
    }
    (block, leak)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevector::StateVector;

    fn dev(c: &Circuit, r: &CMatrix) -> f64 {
        verify_equivalence(c, r, None).unwrap().deviation
    }

    #[test]
    fn ccz_linear_matches_and_uses_eight_cnots() {
        let c = ccz_linear(0, 1, 2).unwrap();
        assert_eq!(c.cx_count(), 8);
        assert!(dev(&c, &mcz_matrix(3)) < 1e-10);
        // nearest-neighbour only on the chain 0-1-2
        for g in c.gates().iter().filter(|g| g.is_two_qubit()) {
            let (a, b) = (g.qubits[0], g.qubits[1]);
            assert_eq!(a.abs_diff(b), 1);
        }
    }

    #[test]
    fn ccz_linear_squared_is_identity() {
        let mut c = ccz_linear(0, 1, 2).unwrap();
        let again = c.clone();
        c.append(&again).unwrap();
        assert!(dev(&c, &CMatrix::identity(8, 8)) < 1e-10);
    }

    #[test]
    fn ccz_linear_is_not_toffoli() {
        let c = ccz_linear(0, 1, 2).unwrap();
        let x = crate::gates::matrix_of(&Gate::one(GateKind::X, 0));
        let toffoli = controlled_matrix(3, &[0, 1], 2, &x);
        assert!(dev(&c, &toffoli) > 0.5);
    }

    #[test]
    fn ccz_full_matches() {
        let c = ccz_full(0, 1, 2).unwrap();
        assert_eq!(c.cx_count(), 6);
        assert!(dev(&c, &mcz_matrix(3)) < 1e-10);
    }

    #[test]
    fn ccy_variants() {
        let full = ccy(0, 1, 2, true).unwrap();
        let reference = controlled_matrix(3, &[0, 1], 2, &y_zx());
        assert!(dev(&full, &reference) < 1e-10);

        let mut no_cz = ccy(0, 1, 2, false).unwrap();
        assert_eq!(no_cz.count(GateKind::CZ), 0);
        no_cz.push(Gate::cz(0, 2)).unwrap();
        assert!(dev(&no_cz, &reference) < 1e-10);
    }

    #[test]
    fn ccy_is_identity_when_controls_off() {
        let full = ccy(0, 1, 2, true).unwrap();
        let mut s = StateVector::zero(3).unwrap();
        s.apply_gate(&Gate::one(GateKind::Ry(0.7), 2)).unwrap();
        let before = s.clone();
        s.apply_circuit(&full).unwrap();
        for (a, b) in s.amplitudes().iter().zip(before.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn cccz_projects_to_ccc_z() {
        // data order (c1, c2, c3, target) = qubits 0, 1, 2, 3; ancilla 4
        let c = cccz_with_ancilla(0, 1, 2, 3, 4).unwrap();
        let e = verify_equivalence(&c, &mcz_matrix(4), Some(4)).unwrap();
        assert!(e.deviation < 1e-10, "{e:?}");
        assert!(e.leakage < 1e-10, "{e:?}");
        assert_eq!(c.ancillas().iter().copied().collect::<Vec<_>>(), vec![4]);
    }

    #[test]
    fn cccz_identity_on_one_control_off() {
        let c = cccz_with_ancilla(0, 1, 2, 3, 4).unwrap();
        // |0111> ⊗ |0>_a
        let mut s = StateVector::basis(5, 0b01110).unwrap();
        s.apply_circuit(&c).unwrap();
        assert!((s.amplitudes()[0b01110] - Complex64::new(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn c3y_with_correction_is_ccc_y() {
        let c = c3y_relative_phase(0, 1, 2, 3).unwrap();
        assert_eq!(c.cx_count(), 6);
        let completed = c3y_correction() * c.unitary();
        let reference = controlled_matrix(4, &[0, 1, 2], 3, &y_zx());
        assert!(phase_aligned_deviation(&completed, &reference) < 1e-10);
    }

    #[test]
    fn c3y_controls_off_is_identity() {
        let u = c3y_relative_phase(0, 1, 2, 3).unwrap().unitary();
        // inputs |000 b>: columns 0 and 1
        for col in 0..2 {
            for row in 0..16 {
                let expect = if row == col { 1.0 } else { 0.0 };
                assert!((u[(row, col)].norm() - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn c4z_projects_to_cccc_z() {
        let c = c4z_with_ancilla(0, 1, 2, 3, 4, 5).unwrap();
        let e = verify_equivalence(&c, &mcz_matrix(5), Some(5)).unwrap();
        assert!(e.deviation < 1e-10 && e.leakage < 1e-10, "{e:?}");
        // no residual relative phase: diagonal is exactly (1,...,1,-1) after alignment
        let (block, _) = project_ancilla(&c.unitary(), 6, 5);
        let phase = block[(0, 0)];
        for i in 0..32 {
            let expect = if i == 31 { -phase } else { phase };
            assert!((block[(i, i)] - expect).norm() < 1e-10);
        }
    }

    #[test]
    fn abstract_inner_variants_match() {
        let c = cccz_with_ancilla_using(0, 1, 2, 3, 4, InnerCcz::Abstract).unwrap();
        assert!(verify_equivalence(&c, &mcz_matrix(4), Some(4)).unwrap().deviation < 1e-10);
        let c = c4z_with_ancilla_using(0, 1, 2, 3, 4, 5, InnerCcz::Abstract).unwrap();
        assert!(verify_equivalence(&c, &mcz_matrix(5), Some(5)).unwrap().deviation < 1e-10);
    }

    #[test]
    fn permuted_indices_still_work() {
        // ancilla and target interleaved with controls
        let c = cccz_with_ancilla(4, 0, 3, 1, 2).unwrap();
        let e = verify_equivalence(&c, &mcz_matrix(4), Some(2)).unwrap();
        assert!(e.deviation < 1e-10 && e.leakage < 1e-10);
    }

    #[test]
    fn duplicates_rejected() {
        assert!(matches!(ccz_linear(0, 0, 1), Err(Error::Argument(_))));
        assert!(matches!(ccy(1, 2, 1, true), Err(Error::Argument(_))));
        assert!(matches!(cccz_with_ancilla(0, 1, 2, 3, 3), Err(Error::Argument(_))));
        assert!(matches!(c4z_with_ancilla(0, 1, 2, 3, 4, 0), Err(Error::Argument(_))));
        assert!(matches!(c3y_relative_phase(0, 1, 1, 3), Err(Error::Argument(_))));
    }

    #[test]
    fn verify_basics() {
        let c = Circuit::new(2);
        assert_eq!(dev(&c, &CMatrix::identity(4, 4)), 0.0);
        assert!(matches!(
            verify_equivalence(&c, &CMatrix::identity(8, 8), None),
            Err(Error::Argument(_))
        ));
        assert!(matches!(verify_equivalence(&Circuit::new(8), &CMatrix::identity(2, 2), None), Err(Error::Argument(_))));
    }

    #[test]
    fn constructions_followed_by_inverse_are_identity() {
        let cs = [
            ccz_linear(0, 1, 2).unwrap(),
            ccy(0, 1, 2, true).unwrap(),
            cccz_with_ancilla(0, 1, 2, 3, 4).unwrap(),
            c3y_relative_phase(0, 1, 2, 3).unwrap(),
            c4z_with_ancilla(0, 1, 2, 3, 4, 5).unwrap(),
        ];
        for c in cs {
            let mut both = c.clone();
            both.append(&c.inverse()).unwrap();
            let dim = 1 << c.num_qubits();
            assert!(dev(&both, &CMatrix::identity(dim, dim)) < 1e-10);
            assert!(c.gates().iter().all(|g| g.validate().is_ok()));
        }
    }
}
