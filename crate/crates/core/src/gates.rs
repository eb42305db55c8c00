//! Gate vocabulary and the circuit container.

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    T,
    Tdg,
    SX,
    SXdg,
    Rz(f64),
    Ry(f64),
    CX,
    CZ,
    /// Multi-controlled Z over all listed qubits (symmetric in its qubits).
    MCZ,
    /// Multi-controlled X; the last listed qubit is the target.
    MCX,
}

impl GateKind {
    /// Fixed arity, or `None` for the multi-controlled kinds.
    pub fn arity(&self) -> Option<usize> {
        use GateKind::*;
        match self {
            H | X | Y | Z | S | Sdg | T | Tdg | SX | SXdg | Rz(_) | Ry(_) => Some(1),
            CX | CZ => Some(2),
            MCZ | MCX => None,
        }
    }

    pub fn name(&self) -> &'static str {
        use GateKind::*;
        match self {
            H => "H",
            X => "X",
            Y => "Y",
            Z => "Z",
            S => "S",
            Sdg => "SDG",
            T => "T",
            Tdg => "TDG",
            SX => "SX",
            SXdg => "SXDG",
            Rz(_) => "RZ",
            Ry(_) => "RY",
            CX => "CX",
            CZ => "CZ",
            MCZ => "MCZ",
            MCX => "MCX",
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match self {
            GateKind::Rz(a) | GateKind::Ry(a) => Some(*a),
            _ => None,
        }
    }

    pub fn inverse(&self) -> GateKind {
        use GateKind::*;
        match *self {
            S => Sdg,
            Sdg => S,
            T => Tdg,
            Tdg => T,
            SX => SXdg,
            SXdg => SX,
            Rz(a) => Rz(-a),
            Ry(a) => Ry(-a),
            k => k,
        }
    }

    pub fn is_diagonal(&self) -> bool {
        use GateKind::*;
        matches!(self, Z | S | Sdg | T | Tdg | Rz(_) | CZ | MCZ)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: Vec<usize>) -> Result<Gate> {
        let g = Gate { kind, qubits };
        g.validate()?;
        Ok(g)
    }

    pub fn one(kind: GateKind, q: usize) -> Gate {
        debug_assert_eq!(kind.arity(), Some(1));
        Gate { kind, qubits: vec![q] }
    }

    pub fn cx(control: usize, target: usize) -> Gate {
        Gate { kind: GateKind::CX, qubits: vec![control, target] }
    }

    pub fn cz(a: usize, b: usize) -> Gate {
        Gate { kind: GateKind::CZ, qubits: vec![a, b] }
    }

    pub fn mcz(qubits: Vec<usize>) -> Gate {
        Gate { kind: GateKind::MCZ, qubits }
    }

    pub fn mcx(controls: &[usize], target: usize) -> Gate {
        let mut qubits = controls.to_vec();
        qubits.push(target);
        Gate { kind: GateKind::MCX, qubits }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind.arity() {
            Some(k) if k != self.qubits.len() => {
                return Err(Error::Argument(format!(
                    "{} expects {k} qubit(s), got {}",
                    self.kind.name(),
                    self.qubits.len()
                )))
            }
            None if self.qubits.is_empty() => {
                return Err(Error::Argument(format!("{} needs at least one qubit", self.kind.name())))
            }
            _ => {}
        }
        if let Some(a) = self.kind.angle() {
            if !a.is_finite() {
                return Err(Error::Argument(format!("non-finite angle {a}")));
            }
        }
        let distinct: BTreeSet<_> = self.qubits.iter().collect();
        if distinct.len() != self.qubits.len() {
            return Err(Error::Index(format!("repeated qubit in {:?}", self.qubits)));
        }
        Ok(())
    }

    pub fn inverse(&self) -> Gate {
        Gate { kind: self.kind.inverse(), qubits: self.qubits.clone() }
    }

    pub fn is_two_qubit(&self) -> bool {
        self.qubits.len() == 2
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind.name())?;
        for q in &self.qubits {
            write!(f, " {q}")?;
        }
        if let Some(a) = self.kind.angle() {
            write!(f, " {a:?}")?;
        }
        Ok(())
    }
}

fn m2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[a, b, c, d])
}

/// Dense unitary of a gate, in the gate's own qubit order (first listed
/// qubit is the most significant bit of the local index).
pub fn matrix_of(gate: &Gate) -> CMatrix {
    use GateKind::*;
    let r = |x: f64| Complex64::new(x, 0.0);
    match gate.kind {
        H => m2(r(FRAC_1_SQRT_2), r(FRAC_1_SQRT_2), r(FRAC_1_SQRT_2), r(-FRAC_1_SQRT_2)),
        X => m2(ZERO, ONE, ONE, ZERO),
        Y => m2(ZERO, -I, I, ZERO),
        Z => m2(ONE, ZERO, ZERO, -ONE),
        S => m2(ONE, ZERO, ZERO, I),
        Sdg => m2(ONE, ZERO, ZERO, -I),
        T => m2(ONE, ZERO, ZERO, Complex64::from_polar(1.0, FRAC_PI_4)),
        Tdg => m2(ONE, ZERO, ZERO, Complex64::from_polar(1.0, -FRAC_PI_4)),
        SX => {
            let p = Complex64::new(0.5, 0.5);
            let m = Complex64::new(0.5, -0.5);
            m2(p, m, m, p)
        }
        SXdg => {
            let p = Complex64::new(0.5, -0.5);
            let m = Complex64::new(0.5, 0.5);
            m2(p, m, m, p)
        }
        Rz(l) => m2(Complex64::from_polar(1.0, -l / 2.0), ZERO, ZERO, Complex64::from_polar(1.0, l / 2.0)),
        Ry(t) => {
            let (s, c) = (t / 2.0).sin_cos();
            m2(r(c), r(-s), r(s), r(c))
        }
        CX => {
            let mut m = CMatrix::zeros(4, 4);
            m[(0, 0)] = ONE;
            m[(1, 1)] = ONE;
            m[(2, 3)] = ONE;
            m[(3, 2)] = ONE;
            m
        }
        CZ => CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![ONE, ONE, ONE, -ONE])),
        MCZ => {
            let dim = 1 << gate.qubits.len();
            let mut m = CMatrix::identity(dim, dim);
            m[(dim - 1, dim - 1)] = -ONE;
            m
        }
        MCX => {
            let dim = 1 << gate.qubits.len();
            let mut m = CMatrix::identity(dim, dim);
            m[(dim - 2, dim - 2)] = ZERO;
            m[(dim - 1, dim - 1)] = ZERO;
            m[(dim - 2, dim - 1)] = ONE;
            m[(dim - 1, dim - 2)] = ONE;
            m
        }
    }
}

/// Ordered gate list over `num_qubits` qubits, some of which may be ancillas
/// assumed to start (and, for the constructions here, end) in |0>.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
    ancillas: BTreeSet<usize>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Circuit {
        Circuit { num_qubits, gates: Vec::new(), ancillas: BTreeSet::new() }
    }

    pub fn with_ancillas(num_qubits: usize, ancillas: impl IntoIterator<Item = usize>) -> Result<Circuit> {
        let ancillas: BTreeSet<usize> = ancillas.into_iter().collect();
        if let Some(&a) = ancillas.iter().find(|&&a| a >= num_qubits) {
            return Err(Error::Index(format!("ancilla {a} outside {num_qubits} qubits")));
        }
        Ok(Circuit { num_qubits, gates: Vec::new(), ancillas })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn ancillas(&self) -> &BTreeSet<usize> {
        &self.ancillas
    }

    /// Non-ancilla qubits in ascending order.
    pub fn data_qubits(&self) -> Vec<usize> {
        (0..self.num_qubits).filter(|q| !self.ancillas.contains(q)).collect()
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate()?;
        if let Some(&q) = gate.qubits.iter().find(|&&q| q >= self.num_qubits) {
            return Err(Error::Index(format!(
                "qubit {q} out of range for {}-qubit circuit",
                self.num_qubits
            )));
        }
        self.gates.push(gate);
        Ok(())
    }

    /// Appends all gates of `other`, which must not be wider than `self`.
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        for g in &other.gates {
            self.push(g.clone())?;
        }
        Ok(())
    }

    /// Gate-by-gate inverse: reversed order, each gate inverted.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            num_qubits: self.num_qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
            ancillas: self.ancillas.clone(),
        }
    }

    pub fn count(&self, kind: GateKind) -> usize {
        self.gates.iter().filter(|g| g.kind.name() == kind.name()).count()
    }

    pub fn cx_count(&self) -> usize {
        self.count(GateKind::CX)
    }

    /// Full unitary over all qubits (MSB = qubit 0).
    pub fn unitary(&self) -> CMatrix {
        let n = self.num_qubits;
        let dim = 1usize << n;
        let mut u = CMatrix::zeros(dim, dim);
        for col in 0..dim {
            let mut sv = crate::statevector::StateVector::basis(n, col).expect("width checked");
            sv.apply_circuit(self).expect("gates validated on push");
            for (row, a) in sv.amplitudes().iter().enumerate() {
                u[(row, col)] = *a;
            }
        }
        u
    }

    /// Serializes to the line format: a `qubits N` header, an optional
    /// `ancilla i j ...` line, then one `KIND q0 q1 ... [angle]` per gate.
    pub fn to_text(&self) -> String {
        let mut out = format!("qubits {}\n", self.num_qubits);
        if !self.ancillas.is_empty() {
            out.push_str("ancilla");
            for a in &self.ancillas {
                out.push_str(&format!(" {a}"));
            }
            out.push('\n');
        }
        for g in &self.gates {
            out.push_str(&g.to_string());
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Circuit> {
        let mut circuit: Option<Circuit> = None;
        let mut offset = 0;
        for raw in text.lines() {
            let line_start = offset;
            offset += raw.len() + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let perr = |message: String| Error::Parse { position: line_start, message };
            let mut tokens = line.split_whitespace();
            let head = tokens.next().unwrap_or_default().to_ascii_uppercase();
            let rest: Vec<&str> = tokens.collect();
            match (head.as_str(), circuit.as_mut()) {
                ("QUBITS", None) => {
                    let n = rest
                        .first()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| perr("expected `qubits N`".into()))?;
                    circuit = Some(Circuit::new(n));
                }
                ("QUBITS", Some(_)) => return Err(perr("duplicate `qubits` header".into())),
                (_, None) => return Err(perr("missing `qubits N` header".into())),
                ("ANCILLA", Some(c)) => {
                    for t in rest {
                        let a: usize = t.parse().map_err(|_| perr(format!("bad ancilla index {t:?}")))?;
                        if a >= c.num_qubits {
                            return Err(perr(format!("ancilla {a} out of range")));
                        }
                        c.ancillas.insert(a);
                    }
                }
                (kind, Some(c)) => {
                    let angle_kind = matches!(kind, "RZ" | "RY");
                    let (qtoks, angle) = if angle_kind {
                        let (last, qs) = rest
                            .split_last()
                            .ok_or_else(|| perr(format!("{kind} needs an angle")))?;
                        let a: f64 = last.parse().map_err(|_| perr(format!("bad angle {last:?}")))?;
                        (qs, Some(a))
                    } else {
                        (&rest[..], None)
                    };
                    let qubits = qtoks
                        .iter()
                        .map(|t| t.parse::<usize>().map_err(|_| perr(format!("bad qubit {t:?}"))))
                        .collect::<Result<Vec<_>>>()?;
                    let gk = match (kind, angle) {
                        ("H", _) => GateKind::H,
                        ("X", _) => GateKind::X,
                        ("Y", _) => GateKind::Y,
                        ("Z", _) => GateKind::Z,
                        ("S", _) => GateKind::S,
                        ("SDG", _) => GateKind::Sdg,
                        ("T", _) => GateKind::T,
                        ("TDG", _) => GateKind::Tdg,
                        ("SX", _) => GateKind::SX,
                        ("SXDG", _) => GateKind::SXdg,
                        ("RZ", Some(a)) => GateKind::Rz(a),
                        ("RY", Some(a)) => GateKind::Ry(a),
                        ("CX", _) => GateKind::CX,
                        ("CZ", _) => GateKind::CZ,
                        ("MCZ", _) => GateKind::MCZ,
                        ("MCX", _) => GateKind::MCX,
                        _ => return Err(perr(format!("unknown gate kind {kind:?}"))),
                    };
                    c.push(Gate { kind: gk, qubits }).map_err(|e| perr(e.to_string()))?;
                }
            }
        }
        circuit.ok_or(Error::Parse { position: 0, message: "empty circuit text".into() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn max_dev(a: &CMatrix, b: &CMatrix) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn t_gate_is_pi_over_eight() {
        let m = matrix_of(&Gate::one(GateKind::T, 0));
        assert!((m[(1, 1)] - Complex64::from_polar(1.0, PI / 4.0)).norm() < 1e-15);
        assert_eq!(m[(0, 0)], ONE);
    }

    #[test]
    fn ry_quarter_pi_matches_rotation_form() {
        let m = matrix_of(&Gate::one(GateKind::Ry(PI / 4.0), 0));
        let y = matrix_of(&Gate::one(GateKind::Y, 0));
        let expect = CMatrix::identity(2, 2) * Complex64::new((PI / 8.0).cos(), 0.0)
            - y * (I * (PI / 8.0).sin());
        assert!(max_dev(&m, &expect) < 1e-15);
    }

    #[test]
    fn cz_is_diag() {
        let m = matrix_of(&Gate::cz(0, 1));
        let d: Vec<_> = (0..4).map(|i| m[(i, i)]).collect();
        assert_eq!(d, vec![ONE, ONE, ONE, -ONE]);
    }

    #[test]
    fn every_fixed_gate_is_unitary() {
        use GateKind::*;
        for k in [H, X, Y, Z, S, Sdg, T, Tdg, SX, SXdg, Rz(0.37), Ry(-1.2), CX, CZ] {
            let qs: Vec<usize> = (0..k.arity().unwrap()).collect();
            let m = matrix_of(&Gate { kind: k, qubits: qs });
            let dim = m.nrows();
            assert!(max_dev(&(m.adjoint() * &m), &CMatrix::identity(dim, dim)) < 1e-12, "{k:?}");
            let inv = matrix_of(&Gate { kind: k.inverse(), qubits: (0..k.arity().unwrap()).collect() });
            assert!(max_dev(&(inv * m), &CMatrix::identity(dim, dim)) < 1e-12, "{k:?}");
        }
    }

    #[test]
    fn sx_squares_to_x() {
        let sx = matrix_of(&Gate::one(GateKind::SX, 0));
        assert!(max_dev(&(&sx * &sx), &matrix_of(&Gate::one(GateKind::X, 0))) < 1e-15);
    }

    #[test]
    fn push_rejects_bad_indices() {
        let mut c = Circuit::new(2);
        assert!(matches!(c.push(Gate::cx(0, 2)), Err(Error::Index(_))));
        assert!(matches!(c.push(Gate::cx(1, 1)), Err(Error::Index(_))));
        assert!(matches!(
            c.push(Gate { kind: GateKind::H, qubits: vec![0, 1] }),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn text_round_trip() {
        let mut c = Circuit::with_ancillas(4, [3]).unwrap();
        c.push(Gate::one(GateKind::H, 0)).unwrap();
        c.push(Gate::one(GateKind::Rz(0.1 + 0.2), 1)).unwrap();
        c.push(Gate::mcz(vec![0, 1, 2])).unwrap();
        c.push(Gate::mcx(&[0, 1], 3)).unwrap();
        c.push(Gate::one(GateKind::Ry(-PI / 4.0), 2)).unwrap();
        let text = c.to_text();
        assert_eq!(Circuit::from_text(&text).unwrap(), c);
    }

    #[test]
    fn text_rejects_unknown_kind() {
        let err = Circuit::from_text("qubits 2\nFOO 0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { position: 9, .. }), "{err:?}");
    }
}
