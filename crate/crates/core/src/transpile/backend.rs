//! Device descriptions: coupling map, error rates and coherence times.
//!
//! Backend files are line-oriented `key = value` text:
//!
//! ```text
//! # comment
//! name = vigo
//! num_qubits = 5
//! cx_error = 8.627e-3        # default for every edge
//! readout_error = 3.222e-2   # default for every qubit
//! t1_us = 98.13
//! t2_us = 66.88
//! duration.cx = 400          # nanoseconds, keyed by basis gate
//! edge = 0 1                 # uses cx_error
//! edge = 1 2 9.1e-3          # explicit per-edge error
//! readout.3 = 0.05           # per-qubit overrides
//! t1_us.3 = 80
//! t2_us.3 = 70
//! ```
//!
//! Edges are undirected. Unknown keys are rejected.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Backend {
    pub name: String,
    pub num_qubits: usize,
    /// Undirected edges, stored with the smaller index first.
    pub edges: Vec<(usize, usize)>,
    /// Two-qubit gate error, parallel to `edges`.
    pub cx_error: Vec<f64>,
    pub readout_error: Vec<f64>,
    pub t1_us: Vec<f64>,
    pub t2_us: Vec<f64>,
    /// Gate durations in nanoseconds keyed by lower-case gate name.
    pub gate_durations: BTreeMap<String, f64>,
}

const VIGO: &str = include_str!("../../backends/vigo.conf");
const ATHENS: &str = include_str!("../../backends/athens.conf");
const GUADALUPE: &str = include_str!("../../backends/guadalupe.conf");

pub const BUILTIN_NAMES: [&str; 3] = ["vigo", "athens", "guadalupe"];

pub fn builtin_backends() -> Vec<Backend> {
    BUILTIN_NAMES.iter().map(|n| Backend::builtin(n).expect("shipped backend parses")).collect()
}

impl Backend {
    pub fn builtin(name: &str) -> Result<Backend> {
        let text = match name {
            "vigo" => VIGO,
            "athens" => ATHENS,
            "guadalupe" => GUADALUPE,
            _ => return Err(Error::Argument(format!("unknown builtin backend `{name}`"))),
        };
        Backend::from_text(text)
    }

    /// A builtin name or a path to a backend file.
    pub fn resolve(name_or_path: &str) -> Result<Backend> {
        if BUILTIN_NAMES.contains(&name_or_path) {
            Backend::builtin(name_or_path)
        } else {
            Backend::load(name_or_path)
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Backend> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Backend::from_text(&text)
    }

    pub fn from_text(text: &str) -> Result<Backend> {
        let mut name = None;
        let mut num_qubits = None;
        let mut cx_default = None;
        let mut readout_default = None;
        let mut t1_default = None;
        let mut t2_default = None;
        let mut durations = BTreeMap::new();
        let mut edges: Vec<(usize, usize, Option<f64>, usize)> = Vec::new();
        let mut overrides: Vec<(&str, usize, f64, usize)> = Vec::new();

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
            let int = |v: &str| v.parse::<usize>().map_err(|_| fail(format!("`{v}` is not a qubit count/index")));
            match key {
                "name" => name = Some(value.to_string()),
                "num_qubits" => num_qubits = Some(int(value)?),
                "cx_error" => cx_default = Some(float(value)?),
                "readout_error" => readout_default = Some(float(value)?),
                "t1_us" => t1_default = Some(float(value)?),
                "t2_us" => t2_default = Some(float(value)?),
                "edge" => {
                    let parts: Vec<&str> = value.split_whitespace().collect();
                    if parts.len() != 2 && parts.len() != 3 {
                        return Err(fail("edge needs two qubits and an optional error".into()));
                    }
                    let err = if parts.len() == 3 { Some(float(parts[2])?) } else { None };
                    edges.push((int(parts[0])?, int(parts[1])?, err, line_no));
                }
                _ => {
                    if let Some(kind) = key.strip_prefix("duration.") {
                        durations.insert(kind.to_ascii_lowercase(), float(value)?);
                    } else if let Some((field, idx)) = key.split_once('.') {
                        if !matches!(field, "readout" | "t1_us" | "t2_us") {
                            return Err(fail(format!("unknown key `{key}`")));
                        }
                        overrides.push((field, int(idx)?, float(value)?, line_no));
                    } else {
                        return Err(fail(format!("unknown key `{key}`")));
                    }
                }
            }
        }

        let missing = |k: &str| Error::BackendFile { line: 0, message: format!("missing `{k}`") };
        let name = name.ok_or_else(|| missing("name"))?;
        let nq = num_qubits.ok_or_else(|| missing("num_qubits"))?;
        let cx_default = cx_default.ok_or_else(|| missing("cx_error"))?;
        let mut readout_error = vec![readout_default.ok_or_else(|| missing("readout_error"))?; nq];
        let mut t1_us = vec![t1_default.ok_or_else(|| missing("t1_us"))?; nq];
        let mut t2_us = vec![t2_default.ok_or_else(|| missing("t2_us"))?; nq];
        for (field, q, v, line) in overrides {
            if q >= nq {
                return Err(Error::BackendFile { line, message: format!("qubit {q} out of range") });
            }
            match field {
                "readout" => readout_error[q] = v,
                "t1_us" => t1_us[q] = v,
                _ => t2_us[q] = v,
            }
        }
        let mut edge_list = Vec::new();
        let mut cx_error = Vec::new();
        for (a, b, err, line) in edges {
            if a >= nq || b >= nq || a == b {
                return Err(Error::BackendFile { line, message: format!("invalid edge {a}-{b}") });
            }
            let e = (a.min(b), a.max(b));
            if edge_list.contains(&e) {
                return Err(Error::BackendFile { line, message: format!("duplicate edge {a}-{b}") });
            }
            edge_list.push(e);
            cx_error.push(err.unwrap_or(cx_default));
        }
        let backend = Backend {
            name,
            num_qubits: nq,
            edges: edge_list,
            cx_error,
            readout_error,
            t1_us,
            t2_us,
            gate_durations: durations,
        };
        backend.validate()?;
        Ok(backend)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "name = {}", self.name);
        let _ = writeln!(s, "num_qubits = {}", self.num_qubits);
        let _ = writeln!(s, "cx_error = {:?}", self.cx_error.first().copied().unwrap_or(0.0));
        let _ = writeln!(s, "readout_error = {:?}", self.readout_error.first().copied().unwrap_or(0.0));
        let _ = writeln!(s, "t1_us = {:?}", self.t1_us.first().copied().unwrap_or(0.0));
        let _ = writeln!(s, "t2_us = {:?}", self.t2_us.first().copied().unwrap_or(0.0));
        for (k, v) in &self.gate_durations {
            let _ = writeln!(s, "duration.{k} = {v:?}");
        }
        for (&(a, b), e) in self.edges.iter().zip(&self.cx_error) {
            let _ = writeln!(s, "edge = {a} {b} {e:?}");
        }
        for q in 0..self.num_qubits {
            let _ = writeln!(s, "readout.{q} = {:?}", self.readout_error[q]);
            let _ = writeln!(s, "t1_us.{q} = {:?}", self.t1_us[q]);
            let _ = writeln!(s, "t2_us.{q} = {:?}", self.t2_us[q]);
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |message: String| Error::BackendFile { line: 0, message };
        if self.num_qubits == 0 {
            return Err(bad("backend has no qubits".into()));
        }
        let probs = self.cx_error.iter().chain(&self.readout_error);
        if let Some(p) = probs.into_iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(bad(format!("probability {p} outside [0, 1]")));
        }
        for q in 0..self.num_qubits {
            if !(self.t1_us[q] > 0.0 && self.t2_us[q] > 0.0) {
                return Err(bad(format!("qubit {q}: coherence times must be positive")));
            }
            if self.t2_us[q] > 2.0 * self.t1_us[q] {
                return Err(bad(format!("qubit {q}: t2 exceeds 2*t1")));
            }
        }
        Ok(())
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.edge_index(a, b).is_some()
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        let e = (a.min(b), a.max(b));
        self.edges.iter().position(|&x| x == e)
    }

    pub fn edge_error(&self, a: usize, b: usize) -> Option<f64> {
        self.edge_index(a, b).map(|i| self.cx_error[i])
    }

    pub fn neighbors(&self, q: usize) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| if a == q { Some(b) } else if b == q { Some(a) } else { None })
            .collect();
        v.sort_unstable();
        v
    }

    /// All-pairs hop distances; `usize::MAX` marks unreachable pairs.
    pub fn distances(&self) -> Vec<Vec<usize>> {
        let adj: Vec<Vec<usize>> = (0..self.num_qubits).map(|q| self.neighbors(q)).collect();
        (0..self.num_qubits)
            .map(|s| {
                let mut d = vec![usize::MAX; self.num_qubits];
                d[s] = 0;
                let mut queue = VecDeque::from([s]);
                while let Some(u) = queue.pop_front() {
                    for &v in &adj[u] {
                        if d[v] == usize::MAX {
                            d[v] = d[u] + 1;
                            queue.push_back(v);
                        }
                    }
                }
                d
            })
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        self.distances()[0].iter().all(|&d| d != usize::MAX)
    }

    pub fn duration_ns(&self, kind: &str) -> f64 {
        self.gate_durations.get(kind).copied().unwrap_or(0.0)
    }

    /// Same device with every edge error and readout error replaced.
    pub fn with_uniform_errors(&self, cx_error: f64, readout_error: f64) -> Backend {
        let mut b = self.clone();
        b.cx_error.iter_mut().for_each(|e| *e = cx_error);
        b.readout_error.iter_mut().for_each(|e| *e = readout_error);
        b
    }
}
