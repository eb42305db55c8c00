//! Shot-level simulation of transpiled circuits under two-qubit depolarizing,
//! symmetric readout and optional T1/T2 relaxation noise.
//!
//! Without relaxation, each shot draws an error pattern (which CNOTs are
//! followed by which two-qubit Pauli) by geometric skipping with thinning;
//! shots sharing a pattern share one statevector run. With relaxation every
//! shot is an independent quantum-jump trajectory.
//!
//! Noise override files use the backend file syntax:
//!
//! ```text
//! cx_depolarizing = 0.01   # every edge
//! edge = 0 1 0.02          # one edge
//! readout_flip = 0.03      # every qubit
//! readout.2 = 0.05
//! relaxation = on
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::BitString;
use crate::density::{DensityMatrix, MAX_DENSITY_QUBITS};
use crate::error::{Error, Result};
use crate::gates::{Circuit, Gate, GateKind};
use crate::statevector::{sample_index, StateVector};
use crate::transpile::{Backend, TranspiledCircuit};

#[derive(Clone, Debug, PartialEq)]
pub struct Relaxation {
    pub t1_us: Vec<f64>,
    pub t2_us: Vec<f64>,
    /// Nanoseconds keyed by lower-case basis gate name.
    pub durations_ns: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct NoiseModel {
    /// Depolarizing probability after a CNOT on each (sorted) physical edge.
    pub cx_depolarizing: BTreeMap<(usize, usize), f64>,
    /// Symmetric flip probability per physical qubit.
    pub readout_flip: Vec<f64>,
    pub relaxation: Option<Relaxation>,
}

impl NoiseModel {
    pub fn noiseless() -> NoiseModel {
        NoiseModel::default()
    }

    /// Depolarizing and readout noise at the backend's calibrated rates.
    pub fn from_backend(b: &Backend) -> NoiseModel {
        NoiseModel {
            cx_depolarizing: b.edges.iter().copied().zip(b.cx_error.iter().copied()).collect(),
            readout_flip: b.readout_error.clone(),
            relaxation: None,
        }
    }

    pub fn with_relaxation(mut self, b: &Backend) -> NoiseModel {
        self.relaxation =
            Some(Relaxation { t1_us: b.t1_us.clone(), t2_us: b.t2_us.clone(), durations_ns: b.gate_durations.clone() });
        self
    }

    /// Same edge set, every edge at probability `p`.
    pub fn with_uniform_cx(mut self, p: f64) -> NoiseModel {
        self.cx_depolarizing.values_mut().for_each(|v| *v = p);
        self
    }

    pub fn without_readout(mut self) -> NoiseModel {
        self.readout_flip.clear();
        self
    }

    pub fn cx_probability(&self, a: usize, b: usize) -> f64 {
        self.cx_depolarizing.get(&(a.min(b), a.max(b))).copied().unwrap_or(0.0)
    }

    pub fn readout(&self, q: usize) -> f64 {
        self.readout_flip.get(q).copied().unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let probs = self.cx_depolarizing.values().chain(&self.readout_flip);
        if let Some(p) = probs.into_iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Domain(format!("noise probability {p} outside [0, 1]")));
        }
        Ok(())
    }

    /// Backend defaults with the overrides from a noise file applied.
    pub fn from_text(text: &str, backend: &Backend) -> Result<NoiseModel> {
        let mut m = NoiseModel::from_backend(backend);
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let fail = |message: String| Error::BackendFile { line: line_no, message };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| fail("expected `key = value`".into()))?;
            let (key, value) = (key.trim(), value.trim());
            let float = |v: &str| v.parse::<f64>().map_err(|_| fail(format!("`{v}` is not a number")));
            let int = |v: &str| v.parse::<usize>().map_err(|_| fail(format!("`{v}` is not a qubit index")));
            match key {
                "cx_depolarizing" => {
                    let p = float(value)?;
                    m.cx_depolarizing.values_mut().for_each(|v| *v = p);
                }
                "readout_flip" => {
                    let p = float(value)?;
                    m.readout_flip.iter_mut().for_each(|v| *v = p);
                }
                "relaxation" => match value {
                    "on" | "true" => m = m.with_relaxation(backend),
                    "off" | "false" => m.relaxation = None,
                    _ => return Err(fail(format!("relaxation must be on/off, got `{value}`"))),
                },
                "edge" => {
                    let parts: Vec<&str> = value.split_whitespace().collect();
                    if parts.len() != 3 {
                        return Err(fail("edge override needs two qubits and a probability".into()));
                    }
                    let (a, b) = (int(parts[0])?, int(parts[1])?);
                    if !backend.are_adjacent(a, b) {
                        return Err(fail(format!("{a}-{b} is not an edge of `{}`", backend.name)));
                    }
                    m.cx_depolarizing.insert((a.min(b), a.max(b)), float(parts[2])?);
                }
                _ => match key.strip_prefix("readout.") {
                    Some(idx) => {
                        let q = int(idx)?;
                        if q >= m.readout_flip.len() {
                            return Err(fail(format!("qubit {q} out of range")));
                        }
                        m.readout_flip[q] = float(value)?;
                    }
                    None => return Err(fail(format!("unknown key `{key}`"))),
                },
            }
        }
        m.validate()?;
        Ok(m)
    }

    pub fn load(path: impl AsRef<Path>, backend: &Backend) -> Result<NoiseModel> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        NoiseModel::from_text(&text, backend)
    }
}

/// Outcome counts over the measured bits.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ShotHistogram {
    pub counts: BTreeMap<BitString, u64>,
    pub shots: u64,
}

impl ShotHistogram {
    pub fn record(&mut self, bits: BitString) {
        *self.counts.entry(bits).or_default() += 1;
        self.shots += 1;
    }

    pub fn count(&self, bits: &BitString) -> u64 {
        self.counts.get(bits).copied().unwrap_or(0)
    }

    pub fn probability(&self, bits: &BitString) -> f64 {
        if self.shots == 0 {
            0.0
        } else {
            self.count(bits) as f64 / self.shots as f64
        }
    }

    /// One `bits count` line per observed outcome, in lexicographic order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (b, c) in &self.counts {
            let _ = writeln!(s, "{b} {c}");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<ShotHistogram> {
        let mut h = ShotHistogram::default();
        let mut offset = 0;
        for line in text.lines() {
            let trimmed = line.trim();
            if !trimmed.is_empty() {
                let err = || Error::Parse { position: offset, message: format!("bad histogram line `{trimmed}`") };
                let (b, c) = trimmed.split_once(' ').ok_or_else(err)?;
                let bits: BitString = b.parse().map_err(|_| err())?;
                let c: u64 = c.trim().parse().map_err(|_| err())?;
                *h.counts.entry(bits).or_default() += c;
                h.shots += c;
            }
            offset += line.len() + 1;
        }
        Ok(h)
    }
}

pub fn degraded_ratio(p_sim: f64, p_theo: f64) -> Result<f64> {
    if p_theo <= 0.0 {
        return Err(Error::Domain("theoretical probability must be positive".into()));
    }
    Ok(p_sim / p_theo)
}

/// A transpiled circuit prepared for repeated noisy execution.
struct Prepared {
    circuit: Circuit,
    measured: Vec<usize>,
    /// (op index, compact a, compact b, probability) for each CNOT.
    cx: Vec<(usize, usize, usize, f64)>,
    readout: Vec<f64>,
    /// Relaxation applied after each op: (compact qubit, gamma, phase-flip probability).
    relax_after: Vec<Vec<(usize, f64, f64)>>,
    relax_final: Vec<(usize, f64, f64)>,
}

fn relaxation_params(dt_ns: f64, t1_us: f64, t2_us: f64) -> (f64, f64) {
    if dt_ns <= 0.0 {
        return (0.0, 0.0);
    }
    let dt = dt_ns / 1000.0;
    let gamma = 1.0 - (-dt / t1_us).exp();
    let rate_phi = 1.0 / t2_us - 0.5 / t1_us;
    let p_phase = if rate_phi > 0.0 { 0.5 * (1.0 - (-dt * rate_phi).exp()) } else { 0.0 };
    (gamma, p_phase)
}

fn prepare(tc: &TranspiledCircuit, measured_logical: &[usize], model: &NoiseModel) -> Result<Prepared> {
    model.validate()?;
    if measured_logical.is_empty() {
        return Err(Error::Argument("no measured qubits".into()));
    }
    if let Some(&q) = measured_logical.iter().find(|&&q| q >= tc.logical_width()) {
        return Err(Error::Index(format!("measured qubit {q} outside {} logical qubits", tc.logical_width())));
    }
    let (circuit, used) = tc.compact();
    let (_, fin) = tc.compact_layouts();
    let measured: Vec<usize> = measured_logical.iter().map(|&l| fin[l]).collect();
    let cx = circuit
        .gates()
        .iter()
        .enumerate()
        .filter(|(_, g)| g.kind == GateKind::CX)
        .map(|(i, g)| (i, g.qubits[0], g.qubits[1], model.cx_probability(used[g.qubits[0]], used[g.qubits[1]])))
        .collect();
    let readout = measured.iter().map(|&c| model.readout(used[c])).collect();

    let w = circuit.num_qubits();
    let mut relax_after = vec![Vec::new(); circuit.len()];
    let mut relax_final = Vec::new();
    if let Some(r) = &model.relaxation {
        let mut clock = vec![0.0f64; w];
        for (i, g) in circuit.gates().iter().enumerate() {
            let dur = r.durations_ns.get(&g.kind.name().to_ascii_lowercase()).copied().unwrap_or(0.0);
            let start = g.qubits.iter().map(|&q| clock[q]).fold(0.0, f64::max);
            for &q in &g.qubits {
                let p = used[q];
                let (gamma, pz) = relaxation_params(start + dur - clock[q], r.t1_us[p], r.t2_us[p]);
                relax_after[i].push((q, gamma, pz));
                clock[q] = start + dur;
            }
        }
        let end = clock.iter().copied().fold(0.0, f64::max);
        for &q in &measured {
            let p = used[q];
            let (gamma, pz) = relaxation_params(end - clock[q], r.t1_us[p], r.t2_us[p]);
            relax_final.push((q, gamma, pz));
        }
    }
    Ok(Prepared { circuit, measured, cx, readout, relax_after, relax_final })
}

const PAULI_KINDS: [Option<GateKind>; 4] = [None, Some(GateKind::X), Some(GateKind::Y), Some(GateKind::Z)];

fn apply_pauli_pair(sv: &mut StateVector, a: usize, b: usize, code: u8) -> Result<()> {
    for (q, k) in [(a, code / 4), (b, code % 4)] {
        if let Some(kind) = PAULI_KINDS[k as usize] {
            sv.apply_gate(&Gate::one(kind, q))?;
        }
    }
    Ok(())
}

fn jump_amplitude_damp<R: Rng>(sv: &mut StateVector, q: usize, gamma: f64, rng: &mut R) {
    if gamma <= 0.0 {
        return;
    }
    let m = 1usize << (sv.num_qubits() - 1 - q);
    let p_excited: f64 = sv.amplitudes().iter().enumerate().filter(|(i, _)| i & m != 0).map(|(_, a)| a.norm_sqr()).sum();
    let amps = sv.amplitudes_mut();
    if rng.random::<f64>() < gamma * p_excited {
        for i in 0..amps.len() {
            if i & m == 0 {
                amps[i] = amps[i | m];
                amps[i | m] = Complex64::new(0.0, 0.0);
            }
        }
    } else {
        let s = (1.0 - gamma).sqrt();
        for (i, a) in amps.iter_mut().enumerate() {
            if i & m != 0 {
                *a *= s;
            }
        }
    }
    sv.renormalize();
}

fn sample_pattern<R: Rng>(cx: &[(usize, usize, usize, f64)], p_max: f64, rng: &mut R) -> Vec<(u32, u8)> {
    let mut pattern = Vec::new();
    if p_max <= 0.0 {
        return pattern;
    }
    let log_q = (1.0 - p_max).ln();
    let mut pos: isize = -1;
    loop {
        let skip = if p_max >= 1.0 {
            0
        } else {
            let u: f64 = 1.0 - rng.random::<f64>();
            (u.ln() / log_q).floor() as isize
        };
        pos += skip + 1;
        if pos as usize >= cx.len() {
            return pattern;
        }
        let p = cx[pos as usize].3;
        if p >= p_max || rng.random::<f64>() < p / p_max {
            pattern.push((pos as u32, rng.random_range(1..16u8)));
        }
    }
}

fn flip_readout<R: Rng>(idx: usize, readout: &[f64], rng: &mut R) -> BitString {
    let k = readout.len();
    let mut bits = BitString::from_index(idx, k).bits().to_vec();
    for (b, &r) in bits.iter_mut().zip(readout) {
        if r > 0.0 && rng.random::<f64>() < r {
            *b = !*b;
        }
    }
    BitString::new(bits)
}

/// Runs `shots` noisy executions of `tc` and histograms the bits of the
/// `measured` logical qubits (in the listed order). Deterministic in `seed`.
pub fn run_shots(
    tc: &TranspiledCircuit,
    measured: &[usize],
    model: &NoiseModel,
    shots: u64,
    seed: u64,
) -> Result<ShotHistogram> {
    if shots == 0 {
        return Err(Error::Argument("shots must be at least 1".into()));
    }
    let prep = prepare(tc, measured, model)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hist = ShotHistogram::default();
    if model.relaxation.is_some() {
        for _ in 0..shots {
            let sv = trajectory(&prep, &mut rng)?;
            let probs = sv.marginal(&prep.measured)?;
            let idx = sample_index(&probs, rng.random::<f64>());
            hist.record(flip_readout(idx, &prep.readout, &mut rng));
        }
        return Ok(hist);
    }
    let p_max = prep.cx.iter().map(|c| c.3).fold(0.0, f64::max);
    let mut groups: BTreeMap<Vec<(u32, u8)>, u64> = BTreeMap::new();
    for _ in 0..shots {
        *groups.entry(sample_pattern(&prep.cx, p_max, &mut rng)).or_default() += 1;
    }
    for (pattern, count) in groups {
        let probs = run_pattern(&prep, &pattern)?.marginal(&prep.measured)?;
        for _ in 0..count {
            let idx = sample_index(&probs, rng.random::<f64>());
            hist.record(flip_readout(idx, &prep.readout, &mut rng));
        }
    }
    Ok(hist)
}

fn run_pattern(prep: &Prepared, pattern: &[(u32, u8)]) -> Result<StateVector> {
    let mut sv = StateVector::zero(prep.circuit.num_qubits())?;
    let mut next = pattern.iter().peekable();
    let mut cx_seen = 0u32;
    for g in prep.circuit.gates() {
        sv.apply_gate(g)?;
        if g.kind == GateKind::CX {
            while let Some(&&(pos, code)) = next.peek() {
                if pos != cx_seen {
                    break;
                }
                apply_pauli_pair(&mut sv, g.qubits[0], g.qubits[1], code)?;
                next.next();
            }
            cx_seen += 1;
        }
    }
    Ok(sv)
}

fn trajectory<R: Rng>(prep: &Prepared, rng: &mut R) -> Result<StateVector> {
    let mut sv = StateVector::zero(prep.circuit.num_qubits())?;
    let mut cx_iter = prep.cx.iter();
    let relax = |sv: &mut StateVector, list: &[(usize, f64, f64)], rng: &mut R| -> Result<()> {
        for &(q, gamma, pz) in list {
            jump_amplitude_damp(sv, q, gamma, rng);
            if pz > 0.0 && rng.random::<f64>() < pz {
                sv.apply_gate(&Gate::one(GateKind::Z, q))?;
            }
        }
        Ok(())
    };
    for (i, g) in prep.circuit.gates().iter().enumerate() {
        sv.apply_gate(g)?;
        if g.kind == GateKind::CX {
            let &(_, a, b, p) = cx_iter.next().expect("one entry per CNOT");
            if p > 0.0 && rng.random::<f64>() < p {
                apply_pauli_pair(&mut sv, a, b, rng.random_range(1..16u8))?;
            }
        }
        relax(&mut sv, &prep.relax_after[i], rng)?;
    }
    relax(&mut sv, &prep.relax_final, rng)?;
    Ok(sv)
}

/// Exact outcome distribution over the measured bits (readout noise
/// included) by density-matrix propagation with the same channels.
pub fn exact_density_distribution(tc: &TranspiledCircuit, measured: &[usize], model: &NoiseModel) -> Result<Vec<f64>> {
    let prep = prepare(tc, measured, model)?;
    let w = prep.circuit.num_qubits();
    if w > MAX_DENSITY_QUBITS {
        return Err(Error::WidthOverflow { needed: w, available: MAX_DENSITY_QUBITS, backend: tc.backend.clone() });
    }
    let mut rho = DensityMatrix::zero(w)?;
    let mut cx_iter = prep.cx.iter();
    let relax = |rho: &mut DensityMatrix, list: &[(usize, f64, f64)]| {
        for &(q, gamma, pz) in list {
            rho.amplitude_damp(q, gamma);
            rho.dephase(q, pz);
        }
    };
    for (i, g) in prep.circuit.gates().iter().enumerate() {
        rho.apply_gate(g)?;
        if g.kind == GateKind::CX {
            let &(_, a, b, p) = cx_iter.next().expect("one entry per CNOT");
            rho.depolarize_2q(a, b, p);
        }
        relax(&mut rho, &prep.relax_after[i]);
    }
    relax(&mut rho, &prep.relax_final);
    let ideal = rho.marginal(&prep.measured);
    Ok(apply_readout(&ideal, &prep.readout))
}

/// Probability of reading `target` on the measured bits, exactly.
pub fn exact_density_success(
    tc: &TranspiledCircuit,
    measured: &[usize],
    target: &BitString,
    model: &NoiseModel,
) -> Result<f64> {
    if target.len() != measured.len() {
        return Err(Error::Argument("target length differs from measured qubit count".into()));
    }
    Ok(exact_density_distribution(tc, measured, model)?[target.to_index()])
}

/// Pushes an outcome distribution through independent symmetric bit flips.
pub fn apply_readout(dist: &[f64], flips: &[f64]) -> Vec<f64> {
    let k = flips.len();
    let mut out = dist.to_vec();
    for (i, &r) in flips.iter().enumerate() {
        if r <= 0.0 {
            continue;
        }
        let m = 1usize << (k - 1 - i);
        let prev = out.clone();
        for (x, v) in out.iter_mut().enumerate() {
            *v = (1.0 - r) * prev[x] + r * prev[x ^ m];
        }
    }
    out
}
