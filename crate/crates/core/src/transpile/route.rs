//! Greedy shortest-path SWAP routing.

use std::collections::VecDeque;

use crate::decompose::{ccz_full_gates, ccz_linear_gates};
use crate::error::{Error, Result};
use crate::gates::{Gate, GateKind};

use super::backend::Backend;

pub(crate) struct Router<'a> {
    backend: &'a Backend,
    adj: Vec<Vec<usize>>,
    dist: Vec<Vec<usize>>,
    l2p: Vec<usize>,
    p2l: Vec<Option<usize>>,
    pub ops: Vec<Gate>,
}

impl<'a> Router<'a> {
    pub fn new(backend: &'a Backend, layout: &[usize]) -> Result<Router<'a>> {
        let mut p2l = vec![None; backend.num_qubits];
        for (l, &p) in layout.iter().enumerate() {
            if p >= backend.num_qubits || p2l[p].is_some() {
                return Err(Error::Layout(format!("invalid layout {layout:?}")));
            }
            p2l[p] = Some(l);
        }
        Ok(Router {
            backend,
            adj: (0..backend.num_qubits).map(|q| backend.neighbors(q)).collect(),
            dist: backend.distances(),
            l2p: layout.to_vec(),
            p2l,
            ops: Vec::new(),
        })
    }

    pub fn layout(&self) -> &[usize] {
        &self.l2p
    }

    fn swap(&mut self, p: usize, q: usize) {
        self.ops.push(Gate::cx(p, q));
        self.ops.push(Gate::cx(q, p));
        self.ops.push(Gate::cx(p, q));
        let (lp, lq) = (self.p2l[p], self.p2l[q]);
        self.p2l[p] = lq;
        self.p2l[q] = lp;
        if let Some(l) = lp {
            self.l2p[l] = q;
        }
        if let Some(l) = lq {
            self.l2p[l] = p;
        }
    }

    /// Shortest path from `src` to any node in `goals`, never entering `blocked`.
    fn path_to(&self, src: usize, goals: &[usize], blocked: &[usize]) -> Option<Vec<usize>> {
        let n = self.backend.num_qubits;
        let mut prev = vec![usize::MAX; n];
        let mut seen = vec![false; n];
        seen[src] = true;
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            if goals.contains(&u) {
                let mut path = vec![u];
                let mut v = u;
                while v != src {
                    v = prev[v];
                    path.push(v);
                }
                path.reverse();
                return Some(path);
            }
            for &v in &self.adj[u] {
                if !seen[v] && !blocked.contains(&v) {
                    seen[v] = true;
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        None
    }

    /// Moves logical `l` next to physical `anchor`, avoiding the physical
    /// positions in `keep` when possible.
    fn bring_next_to(&mut self, l: usize, anchor: usize, keep: &[usize]) -> Result<()> {
        let src = self.l2p[l];
        if self.backend.are_adjacent(src, anchor) {
            return Ok(());
        }
        let mut blocked = keep.to_vec();
        blocked.push(anchor);
        let free_goals: Vec<usize> = self.adj[anchor].iter().copied().filter(|g| !blocked.contains(g)).collect();
        let path = self
            .path_to(src, &free_goals, &blocked)
            .or_else(|| self.path_to(src, &self.adj[anchor].clone(), &[anchor]))
            .ok_or_else(|| Error::Disconnected(self.backend.name.clone()))?;
        for w in path.windows(2) {
            self.swap(w[0], w[1]);
        }
        Ok(())
    }

    pub fn one_qubit(&mut self, kind: GateKind, l: usize) {
        self.ops.push(Gate::one(kind, self.l2p[l]));
    }

    pub fn cx(&mut self, c: usize, t: usize) -> Result<()> {
        self.bring_next_to(c, self.l2p[t], &[])?;
        self.ops.push(Gate::cx(self.l2p[c], self.l2p[t]));
        Ok(())
    }

    pub fn cz(&mut self, a: usize, b: usize) -> Result<()> {
        self.bring_next_to(a, self.l2p[b], &[])?;
        let (pa, pb) = (self.l2p[a], self.l2p[b]);
        self.ops.push(Gate::one(GateKind::H, pb));
        self.ops.push(Gate::cx(pa, pb));
        self.ops.push(Gate::one(GateKind::H, pb));
        Ok(())
    }

    fn adjacent(&self, a: usize, b: usize) -> bool {
        self.backend.are_adjacent(self.l2p[a], self.l2p[b])
    }

    /// Λ2(Z) on three logical qubits: SWAPs until one of them neighbours
    /// the other two, then the 8-CNOT chain (or the 6-CNOT form on a
    /// triangle).
    pub fn ccz(&mut self, qs: [usize; 3]) -> Result<()> {
        for _ in 0..4 {
            let [a, b, c] = qs;
            if self.adjacent(a, b) && self.adjacent(b, c) && self.adjacent(a, c) {
                let p = [self.l2p[a], self.l2p[b], self.l2p[c]];
                self.ops.extend(ccz_full_gates(p[0], p[1], p[2]));
                return Ok(());
            }
            for (i, &m) in qs.iter().enumerate() {
                let (x, y) = (qs[(i + 1) % 3], qs[(i + 2) % 3]);
                if self.adjacent(m, x) && self.adjacent(m, y) {
                    let (px, pm, py) = (self.l2p[x], self.l2p[m], self.l2p[y]);
                    self.ops.extend(ccz_linear_gates(px, pm, py));
                    return Ok(());
                }
            }
            let d = |u: usize, v: usize| self.dist[self.l2p[u]][self.l2p[v]];
            let (mi, _) = (0..3)
                .map(|i| {
                    let (m, x, y) = (qs[i], qs[(i + 1) % 3], qs[(i + 2) % 3]);
                    (i, d(m, x) + d(m, y))
                })
                .min_by_key(|&(i, cost)| (cost, i))
                .expect("three candidates");
            let m = qs[mi];
            let mut others = [qs[(mi + 1) % 3], qs[(mi + 2) % 3]];
            others.sort_by_key(|&o| std::cmp::Reverse(d(m, o)));
            for (k, &o) in others.iter().enumerate() {
                let other = others[1 - k];
                let keep = [self.l2p[other]];
                self.bring_next_to(o, self.l2p[m], &keep)?;
            }
        }
        Err(Error::Layout("could not bring three qubits into a path".into()))
    }
}
