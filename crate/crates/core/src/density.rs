//! Dense density matrices for small registers.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gates::{matrix_of, Gate, GateKind};

pub const MAX_DENSITY_QUBITS: usize = 6;

type M2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    dim: usize,
    /// Row-major `dim x dim`.
    data: Vec<Complex64>,
}

fn pauli(k: u8) -> M2 {
    let o = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match k {
        0 => [[o, ZERO], [ZERO, o]],
        1 => [[ZERO, o], [o, ZERO]],
        2 => [[ZERO, -i], [i, ZERO]],
        _ => [[o, ZERO], [ZERO, -o]],
    }
}

impl DensityMatrix {
    /// |0...0><0...0|.
    pub fn zero(n: usize) -> Result<DensityMatrix> {
        if n == 0 || n > MAX_DENSITY_QUBITS {
            return Err(Error::Size(n));
        }
        let dim = 1 << n;
        let mut data = vec![ZERO; dim * dim];
        data[0] = Complex64::new(1.0, 0.0);
        Ok(DensityMatrix { num_qubits: n, dim, data })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.data[i * self.dim + i].re).collect()
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim + c]
    }

    fn mask(&self, q: usize) -> usize {
        1 << (self.num_qubits - 1 - q)
    }

    /// `rho <- A rho B^dagger` for single-qubit `A`, `B` on `q`.
    fn sandwich(&self, q: usize, a: &M2, b: &M2) -> Vec<Complex64> {
        let m = self.mask(q);
        let d = self.dim;
        let mut tmp = vec![ZERO; d * d];
        // rows: tmp = A rho
        for r in 0..d {
            let (r0, bit) = (r & !m, (r & m != 0) as usize);
            for c in 0..d {
                tmp[r * d + c] = a[bit][0] * self.data[r0 * d + c] + a[bit][1] * self.data[(r0 | m) * d + c];
            }
        }
        // columns: out = tmp B^dagger
        let mut out = vec![ZERO; d * d];
        for r in 0..d {
            for c in 0..d {
                let (c0, bit) = (c & !m, (c & m != 0) as usize);
                out[r * d + c] = tmp[r * d + c0] * b[bit][0].conj() + tmp[r * d + (c0 | m)] * b[bit][1].conj();
            }
        }
        out
    }

    pub fn apply_1q(&mut self, q: usize, u: &M2) {
        self.data = self.sandwich(q, u, u);
    }

    /// Applies a CPTP map given by single-qubit Kraus operators.
    pub fn apply_kraus_1q(&mut self, q: usize, ops: &[M2]) {
        let mut acc = vec![ZERO; self.dim * self.dim];
        for k in ops {
            for (a, b) in acc.iter_mut().zip(self.sandwich(q, k, k)) {
                *a += b;
            }
        }
        self.data = acc;
    }

    fn permute(&mut self, f: impl Fn(usize) -> usize) {
        let d = self.dim;
        let mut out = vec![ZERO; d * d];
        for r in 0..d {
            for c in 0..d {
                out[f(r) * d + f(c)] = self.data[r * d + c];
            }
        }
        self.data = out;
    }

    pub fn apply_gate(&mut self, g: &Gate) -> Result<()> {
        match g.kind {
            GateKind::CX => {
                let (mc, mt) = (self.mask(g.qubits[0]), self.mask(g.qubits[1]));
                self.permute(|i| if i & mc != 0 { i ^ mt } else { i });
            }
            k if k.arity() == Some(1) => {
                let m = matrix_of(g);
                self.apply_1q(g.qubits[0], &[[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]);
            }
            _ => return Err(Error::Unsupported(format!("{} in density simulation", g.kind.name()))),
        }
        Ok(())
    }

    /// Conjugation by `P_a ⊗ P_b` with Pauli indices 0..4 (I, X, Y, Z).
    pub fn apply_pauli_pair(&mut self, a: usize, b: usize, pa: u8, pb: u8) {
        if pa != 0 {
            self.apply_1q(a, &pauli(pa));
        }
        if pb != 0 {
            self.apply_1q(b, &pauli(pb));
        }
    }

    /// Two-qubit depolarizing channel: with probability `p` one of the 15
    /// non-identity Paulis, uniformly.
    pub fn depolarize_2q(&mut self, a: usize, b: usize, p: f64) {
        if p <= 0.0 {
            return;
        }
        let original = self.data.clone();
        let mut acc: Vec<Complex64> = original.iter().map(|x| x * (1.0 - p)).collect();
        for k in 1..16u8 {
            self.data = original.clone();
            self.apply_pauli_pair(a, b, k / 4, k % 4);
            for (x, y) in acc.iter_mut().zip(&self.data) {
                *x += y * (p / 15.0);
            }
        }
        self.data = acc;
    }

    pub fn amplitude_damp(&mut self, q: usize, gamma: f64) {
        if gamma <= 0.0 {
            return;
        }
        let k0 = [[Complex64::new(1.0, 0.0), ZERO], [ZERO, Complex64::new((1.0 - gamma).sqrt(), 0.0)]];
        let k1 = [[ZERO, Complex64::new(gamma.sqrt(), 0.0)], [ZERO, ZERO]];
        self.apply_kraus_1q(q, &[k0, k1]);
    }

    /// Phase flip with probability `p`.
    pub fn dephase(&mut self, q: usize, p: f64) {
        if p <= 0.0 {
            return;
        }
        let s = Complex64::new((1.0 - p).sqrt(), 0.0);
        let z = pauli(3).map(|row| row.map(|x| x * p.sqrt()));
        self.apply_kraus_1q(q, &[[[s, ZERO], [ZERO, s]], z]);
    }

    /// Outcome probabilities over `qubits` (first listed = MSB).
    pub fn marginal(&self, qubits: &[usize]) -> Vec<f64> {
        let masks: Vec<usize> = qubits.iter().map(|&q| self.mask(q)).collect();
        let mut out = vec![0.0; 1 << qubits.len()];
        for (i, p) in self.diagonal().into_iter().enumerate() {
            let key = masks.iter().fold(0, |acc, &m| (acc << 1) | ((i & m != 0) as usize));
            out[key] += p;
        }
        out
    }
}
