//! Dense statevector simulation.
//!
//! Index convention: basis index `i` of an `n`-qubit state encodes the
//! bitstring `b1 b2 ... bn` with qubit 0 (`b1`) as the most significant bit,
//! so |011> on three qubits lives at index 3. Targets `t1 t2 ... tn` follow
//! the same order.

use num_complex::Complex64;
use rand::Rng;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::gates::{matrix_of, Circuit, Gate, GateKind};

pub const MAX_QUBITS: usize = 24;
/// Largest block handled by the general dense kernel.
pub const MAX_DENSE_ARITY: usize = 5;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

/// Result of measuring a subset of qubits.
#[derive(Clone, Debug)]
pub struct MeasurementOutcome {
    pub bits: BitString,
    pub probability: f64,
    pub collapsed: StateVector,
}

fn check_width(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        Err(Error::Size(n))
    } else {
        Ok(())
    }
}

impl StateVector {
    /// |0...0>.
    pub fn zero(n: usize) -> Result<StateVector> {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Result<StateVector> {
        check_width(n)?;
        let dim = 1usize << n;
        if index >= dim {
            return Err(Error::Index(format!("basis index {index} >= {dim}")));
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { num_qubits: n, amps })
    }

    pub fn from_bits(bits: &BitString) -> Result<StateVector> {
        Self::basis(bits.len(), bits.to_index())
    }

    /// Uniform superposition H^n |0>^n.
    pub fn uniform(n: usize) -> Result<StateVector> {
        check_width(n)?;
        let dim = 1usize << n;
        let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Ok(StateVector { num_qubits: n, amps: vec![a; dim] })
    }

    /// Wraps raw amplitudes; the caller guarantees unit norm within 1e-10.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<StateVector> {
        let dim = amps.len();
        if !dim.is_power_of_two() {
            return Err(Error::Argument(format!("amplitude count {dim} is not a power of two")));
        }
        let n = dim.trailing_zeros() as usize;
        check_width(n)?;
        let sv = StateVector { num_qubits: n, amps };
        let norm = sv.norm_sqr();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Argument(format!("state norm {norm} is not 1")));
        }
        Ok(sv)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, bits: &BitString) -> Complex64 {
        self.amps[bits.to_index()]
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub(crate) fn renormalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            self.amps.iter_mut().for_each(|a| *a /= n);
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    #[inline]
    fn mask(&self, q: usize) -> usize {
        1 << (self.num_qubits - 1 - q)
    }

    fn check_qubits(&self, qubits: &[usize]) -> Result<()> {
        for (i, &q) in qubits.iter().enumerate() {
            if q >= self.num_qubits {
                return Err(Error::Index(format!("qubit {q} >= {}", self.num_qubits)));
            }
            if qubits[..i].contains(&q) {
                return Err(Error::Index(format!("qubit {q} repeated")));
            }
        }
        Ok(())
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        gate.validate()?;
        self.check_qubits(&gate.qubits)?;
        let q = &gate.qubits;
        match gate.kind {
            GateKind::X => self.apply_x(q[0]),
            GateKind::CX => self.apply_mcx(&q[..1], q[1]),
            GateKind::MCX => {
                let (t, c) = q.split_last().expect("validated non-empty");
                self.apply_mcx(c, *t)
            }
            GateKind::CZ | GateKind::MCZ => self.apply_mcz(q),
            k if k.arity() == Some(1) => {
                let m = matrix_of(gate);
                self.apply_1q(q[0], [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]);
            }
            _ => unreachable!("all kinds covered"),
        }
        Ok(())
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.num_qubits() != self.num_qubits {
            return Err(Error::Argument(format!(
                "circuit width {} != state width {}",
                circuit.num_qubits(),
                self.num_qubits
            )));
        }
        for g in circuit.gates() {
            self.apply_gate(g)?;
        }
        Ok(())
    }

    /// 2x2 kernel with a stride loop over amplitude pairs.
    pub fn apply_1q(&mut self, q: usize, m: [[Complex64; 2]; 2]) {
        let stride = self.mask(q);
        let dim = self.amps.len();
        let mut base = 0;
        while base < dim {
            for i in base..base + stride {
                let a0 = self.amps[i];
                let a1 = self.amps[i + stride];
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i + stride] = m[1][0] * a0 + m[1][1] * a1;
            }
            base += 2 * stride;
        }
    }

    /// 4x4 kernel; `q0` is the high bit of the local index.
    pub fn apply_2q(&mut self, q0: usize, q1: usize, m: &[[Complex64; 4]; 4]) -> Result<()> {
        self.check_qubits(&[q0, q1])?;
        let (m0, m1) = (self.mask(q0), self.mask(q1));
        for i in 0..self.amps.len() {
            if i & (m0 | m1) != 0 {
                continue;
            }
            let idx = [i, i | m1, i | m0, i | m0 | m1];
            let v = idx.map(|k| self.amps[k]);
            for (r, &k) in idx.iter().enumerate() {
                self.amps[k] = (0..4).map(|c| m[r][c] * v[c]).sum();
            }
        }
        Ok(())
    }

    /// General dense kernel for up to [`MAX_DENSE_ARITY`] qubits; `qubits[0]`
    /// is the most significant bit of the matrix index.
    pub fn apply_dense(&mut self, qubits: &[usize], m: &crate::gates::CMatrix) -> Result<()> {
        self.check_qubits(qubits)?;
        let k = qubits.len();
        if k == 0 || k > MAX_DENSE_ARITY {
            return Err(Error::Argument(format!("dense kernel supports 1..={MAX_DENSE_ARITY} qubits, got {k}")));
        }
        let local = 1usize << k;
        if m.nrows() != local || m.ncols() != local {
            return Err(Error::Argument(format!("matrix is {}x{}, expected {local}x{local}", m.nrows(), m.ncols())));
        }
        let masks: Vec<usize> = qubits.iter().map(|&q| self.mask(q)).collect();
        let all: usize = masks.iter().sum();
        let offsets: Vec<usize> = (0..local)
            .map(|l| {
                (0..k)
                    .filter(|&b| (l >> (k - 1 - b)) & 1 == 1)
                    .map(|b| masks[b])
                    .sum()
            })
            .collect();
        let mut buf = vec![ZERO; local];
        for base in 0..self.amps.len() {
            if base & all != 0 {
                continue;
            }
            for (l, off) in offsets.iter().enumerate() {
                buf[l] = self.amps[base + off];
            }
            for (r, off) in offsets.iter().enumerate() {
                self.amps[base + off] = (0..local).map(|c| m[(r, c)] * buf[c]).sum();
            }
        }
        Ok(())
    }

    fn apply_x(&mut self, q: usize) {
        let m = self.mask(q);
        for i in 0..self.amps.len() {
            if i & m == 0 {
                self.amps.swap(i, i | m);
            }
        }
    }

    fn apply_mcx(&mut self, controls: &[usize], target: usize) {
        let cm: usize = controls.iter().map(|&c| self.mask(c)).sum();
        let tm = self.mask(target);
        for i in 0..self.amps.len() {
            if i & cm == cm && i & tm == 0 {
                self.amps.swap(i, i | tm);
            }
        }
    }

    fn apply_mcz(&mut self, qubits: &[usize]) {
        let m: usize = qubits.iter().map(|&c| self.mask(c)).sum();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & m == m {
                *a = -*a;
            }
        }
    }

    /// Multiplies the amplitude of one basis state by -1 (phase oracle).
    pub fn flip_sign(&mut self, bits: &BitString) {
        let i = bits.to_index();
        self.amps[i] = -self.amps[i];
    }

    /// Reflection `2|s_m><s_m| - 1` on the listed qubits, identity elsewhere.
    pub fn reflect_about_uniform(&mut self, support: &[usize]) -> Result<()> {
        if support.is_empty() {
            return Err(Error::Argument("empty diffusion support".into()));
        }
        self.check_qubits(support)?;
        let sm: usize = support.iter().map(|&q| self.mask(q)).sum();
        let block = 1usize << support.len();
        let offsets: Vec<usize> = (0..block)
            .map(|l| {
                support
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| (l >> (support.len() - 1 - b)) & 1 == 1)
                    .map(|(_, &q)| self.mask(q))
                    .sum()
            })
            .collect();
        for base in 0..self.amps.len() {
            if base & sm != 0 {
                continue;
            }
            let mean: Complex64 = offsets.iter().map(|o| self.amps[base + o]).sum::<Complex64>() / block as f64;
            for o in &offsets {
                let a = &mut self.amps[base + o];
                *a = 2.0 * mean - *a;
            }
        }
        Ok(())
    }

    /// Probability of each outcome over `qubits`, indexed by the outcome's
    /// bits read in the listed order (first listed qubit = MSB).
    pub fn marginal(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        if qubits.is_empty() {
            return Err(Error::Argument("marginal over an empty qubit list".into()));
        }
        self.check_qubits(qubits)?;
        let masks: Vec<usize> = qubits.iter().map(|&q| self.mask(q)).collect();
        let mut out = vec![0.0; 1 << qubits.len()];
        for (i, a) in self.amps.iter().enumerate() {
            let key = masks.iter().fold(0, |acc, &m| (acc << 1) | ((i & m != 0) as usize));
            out[key] += a.norm_sqr();
        }
        Ok(out)
    }

    /// Marginal as (bitstring, probability) pairs in lexicographic order.
    pub fn marginal_distribution(&self, qubits: &[usize]) -> Result<Vec<(BitString, f64)>> {
        let k = qubits.len();
        Ok(self
            .marginal(qubits)?
            .into_iter()
            .enumerate()
            .map(|(i, p)| (BitString::from_index(i, k), p))
            .collect())
    }

    /// Projects onto `bits` for `qubits` and renormalizes. Returns the
    /// pre-measurement probability of that outcome.
    pub fn collapse(&mut self, qubits: &[usize], bits: &BitString) -> Result<f64> {
        self.check_qubits(qubits)?;
        if bits.len() != qubits.len() {
            return Err(Error::Argument("outcome length differs from qubit list".into()));
        }
        let mut want = 0;
        let mut all = 0;
        for (k, &q) in qubits.iter().enumerate() {
            all |= self.mask(q);
            if bits.bit(k) {
                want |= self.mask(q);
            }
        }
        let mut p = 0.0;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & all == want {
                p += a.norm_sqr();
            } else {
                *a = ZERO;
            }
        }
        if p <= 0.0 {
            return Err(Error::Domain(format!("outcome {bits} has zero probability")));
        }
        let s = 1.0 / p.sqrt();
        self.amps.iter_mut().for_each(|a| *a *= s);
        Ok(p)
    }

    pub fn measure_subset<R: Rng + ?Sized>(&self, qubits: &[usize], rng: &mut R) -> Result<MeasurementOutcome> {
        let probs = self.marginal(qubits)?;
        let idx = sample_index(&probs, rng.random::<f64>());
        let bits = BitString::from_index(idx, qubits.len());
        let mut collapsed = self.clone();
        let probability = collapsed.collapse(qubits, &bits)?;
        Ok(MeasurementOutcome { bits, probability, collapsed })
    }
}

/// Inverse-CDF sampling; `u` in [0, 1). Skips zero-probability entries.
pub(crate) fn sample_index(probs: &[f64], u: f64) -> usize {
    let total: f64 = probs.iter().sum();
    let mut acc = 0.0;
    let x = u * total;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        last = i;
        acc += p;
        if x < acc {
            return i;
        }
    }
    last
}
