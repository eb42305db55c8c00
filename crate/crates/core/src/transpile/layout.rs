//! Initial placement of logical qubits on a coupling map.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

use super::backend::Backend;
use super::Step;

/// Widest circuit for which every permutation of every connected subset is scored.
const EXHAUSTIVE_WIDTH: usize = 8;

/// Connected physical subsets of the given size, as sorted qubit lists.
pub fn connected_subsets(backend: &Backend, size: usize) -> Vec<Vec<usize>> {
    if size == 0 || size > backend.num_qubits {
        return Vec::new();
    }
    let adj: Vec<Vec<usize>> = (0..backend.num_qubits).map(|q| backend.neighbors(q)).collect();
    let mut level: BTreeSet<u64> = (0..backend.num_qubits).map(|q| 1u64 << q).collect();
    for _ in 1..size {
        let mut next = BTreeSet::new();
        for &mask in &level {
            for q in (0..backend.num_qubits).filter(|q| mask >> q & 1 == 1) {
                for &v in &adj[q] {
                    if mask >> v & 1 == 0 {
                        next.insert(mask | 1 << v);
                    }
                }
            }
        }
        level = next;
    }
    level
        .into_iter()
        .map(|m| (0..backend.num_qubits).filter(|q| m >> q & 1 == 1).collect())
        .collect()
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

#[derive(Default)]
struct Interactions {
    pairs: BTreeMap<(usize, usize), usize>,
    triples: BTreeMap<[usize; 3], usize>,
}

fn interactions(steps: &[Step]) -> Interactions {
    let mut it = Interactions::default();
    for s in steps {
        match *s {
            Step::Cx(a, b) | Step::Cz(a, b) => *it.pairs.entry((a.min(b), a.max(b))).or_default() += 1,
            Step::Ccz(mut q) => {
                q.sort_unstable();
                *it.triples.entry(q).or_default() += 1;
            }
            Step::One(..) => {}
        }
    }
    it
}

/// Ranked candidate layouts (best first): estimated extra CNOTs from
/// SWAPs, then summed two-qubit error over the interactions, then a
/// seeded random key.
pub(crate) fn ranked_layouts(
    steps: &[Step],
    width: usize,
    backend: &Backend,
    seed: u64,
    keep: usize,
) -> Result<Vec<Vec<usize>>> {
    if width > backend.num_qubits {
        return Err(Error::Layout(format!(
            "{width} qubits requested on `{}` with {}",
            backend.name, backend.num_qubits
        )));
    }
    let subsets = connected_subsets(backend, width);
    if subsets.is_empty() {
        return Err(Error::Layout(format!("no connected {width}-qubit subgraph on `{}`", backend.name)));
    }
    let dist = backend.distances();
    let max_err = backend.cx_error.iter().copied().fold(0.0, f64::max);
    let err = |p: usize, q: usize| backend.edge_error(p, q).unwrap_or(max_err * dist[p][q] as f64);
    let it = interactions(steps);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let score = |perm: &[usize]| -> (usize, f64) {
        let mut swaps = 0;
        let mut e = 0.0;
        for (&(a, b), &w) in &it.pairs {
            let (p, q) = (perm[a], perm[b]);
            swaps += w * (dist[p][q] - 1);
            e += w as f64 * err(p, q);
        }
        for (q, &w) in &it.triples {
            let p = q.map(|l| perm[l]);
            let (best, bi) = (0..3)
                .map(|i| {
                    let (m, x, y) = (p[i], p[(i + 1) % 3], p[(i + 2) % 3]);
                    (dist[m][x] + dist[m][y] - 2, i)
                })
                .min()
                .expect("three candidates");
            let (m, x, y) = (p[bi], p[(bi + 1) % 3], p[(bi + 2) % 3]);
            swaps += w * best;
            e += w as f64 * (err(m, x) + err(m, y));
        }
        (3 * swaps, e)
    };

    let mut scored: Vec<(usize, f64, u64, Vec<usize>)> = Vec::new();
    if width <= EXHAUSTIVE_WIDTH {
        for subset in &subsets {
            for perm in permutations(subset) {
                let (s, e) = score(&perm);
                scored.push((s, e, rng.random(), perm));
            }
        }
    } else {
        for subset in &subsets {
            let (s, e) = score(subset);
            scored.push((s, e, rng.random(), subset.clone()));
        }
    }
    scored.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));
    Ok(scored.into_iter().take(keep.max(1)).map(|(.., p)| p).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_of_vigo() {
        let v = Backend::builtin("vigo").unwrap();
        let threes = connected_subsets(&v, 3);
        assert_eq!(threes, vec![vec![0, 1, 2], vec![0, 1, 3], vec![1, 2, 3], vec![1, 3, 4]]);
        assert_eq!(connected_subsets(&v, 5).len(), 1);
        assert!(connected_subsets(&v, 6).is_empty());
    }

    #[test]
    fn permutation_count() {
        assert_eq!(permutations(&[1, 2, 3, 4]).len(), 24);
    }
}
