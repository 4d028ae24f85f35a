//! Walk enumeration and sampling, anonymization, and walk feature encodings.
//!
//! A walk of length `l` has `l` nodes (`l - 1` steps). Consecutive nodes are
//! adjacent; nodes may repeat and a walk may step straight back.
//!
//! Anonymous-walk labels are 1-based: the first node is `1`, each new node gets
//! the next unused label. Its encoding `R(φ)` has `l` blocks of width `l`; label
//! `j` sets offset `l - j` of its block, so `(1, 2, 3, 1)` with `l = 4` encodes
//! as `0001 0010 0100 0001`.

use rand::Rng as _;
use thiserror::Error;

use crate::graph::Graph;
use crate::rng::{rng_from, Rng};

/// Default per-node enumeration cap.
pub const DEFAULT_ENUMERATION_CAP: usize = 200_000;

#[derive(Debug, Error, PartialEq)]
pub enum WalkError {
    #[error("{projected} walks of length {l} from node {node} exceed the cap of {cap}; sample instead")]
    Overflow {
        node: usize,
        l: usize,
        projected: f64,
        cap: usize,
    },
    #[error("anonymous walk label {label} exceeds walk length {l}")]
    LabelTooLarge { label: u32, l: usize },
    #[error("anonymous walk has {got} positions, expected {l}")]
    LengthMismatch { got: usize, l: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Walk {
    pub nodes: Vec<usize>,
}

impl Walk {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// True if consecutive nodes are adjacent in `g`.
    pub fn is_valid_in(&self, g: &Graph) -> bool {
        !self.nodes.is_empty()
            && self.nodes.iter().all(|&u| u < g.node_count())
            && self.nodes.windows(2).all(|p| g.has_edge(p[0], p[1]))
    }

    /// No node appears twice.
    pub fn is_path(&self) -> bool {
        let mut seen = self.nodes.clone();
        seen.sort_unstable();
        seen.windows(2).all(|p| p[0] != p[1])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AnonymousWalk {
    pub labels: Vec<u32>,
}

impl AnonymousWalk {
    pub fn new(labels: Vec<u32>) -> Self {
        AnonymousWalk { labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn max_label(&self) -> u32 {
        self.labels.iter().copied().max().unwrap_or(0)
    }

    /// First label is 1 and each label is either seen before or one past the running max.
    pub fn is_well_formed(&self) -> bool {
        let mut max = 0;
        for &x in &self.labels {
            if x == 0 || x > max + 1 {
                return false;
            }
            max = max.max(x);
        }
        true
    }
}

/// Number of walks with `l` nodes starting at each node, as `f64` (exact up to 2^53).
pub fn walk_counts(g: &Graph, l: usize) -> Vec<f64> {
    let n = g.node_count();
    let mut counts = vec![1.0; n];
    for _ in 1..l {
        counts = (0..n)
            .map(|v| g.neighbors(v).iter().map(|&w| counts[w]).sum())
            .collect();
    }
    if l == 0 {
        return vec![0.0; n];
    }
    counts
}

/// All walks with `l` nodes starting at `u`, in lexicographic order.
pub fn enumerate_walks(g: &Graph, u: usize, l: usize, cap: usize) -> Result<Vec<Walk>, WalkError> {
    let projected = walk_counts(g, l)[u];
    if projected > cap as f64 {
        return Err(WalkError::Overflow {
            node: u,
            l,
            projected,
            cap,
        });
    }
    let mut out = Vec::with_capacity(projected as usize);
    if l == 0 {
        return Ok(out);
    }
    let mut path = vec![u];
    // stack of (depth, next neighbor index)
    let mut cursor = vec![0usize];
    while let Some(&depth_next) = cursor.last() {
        let depth = cursor.len();
        let tail = *path.last().unwrap();
        if depth == l {
            out.push(Walk { nodes: path.clone() });
            cursor.pop();
            path.pop();
            continue;
        }
        let nbrs = g.neighbors(tail);
        if depth_next < nbrs.len() {
            *cursor.last_mut().unwrap() += 1;
            path.push(nbrs[depth_next]);
            cursor.push(0);
        } else {
            cursor.pop();
            path.pop();
        }
    }
    Ok(out)
}

/// `m` uniform random walks with `l` nodes from `u`. Empty when `u` is isolated and `l >= 2`.
pub fn sample_walks(g: &Graph, u: usize, l: usize, m: usize, seed: u64) -> Vec<Walk> {
    let mut rng = rng_from(seed, &[u as u64]);
    sample_walks_with(g, u, l, m, &mut rng)
}

pub fn sample_walks_with(g: &Graph, u: usize, l: usize, m: usize, rng: &mut Rng) -> Vec<Walk> {
    if l == 0 || (l >= 2 && g.degree(u) == 0) {
        return Vec::new();
    }
    (0..m)
        .map(|_| {
            let mut nodes = Vec::with_capacity(l);
            nodes.push(u);
            let mut cur = u;
            for _ in 1..l {
                let nbrs = g.neighbors(cur);
                cur = nbrs[rng.gen_range(0..nbrs.len())];
                nodes.push(cur);
            }
            Walk { nodes }
        })
        .collect()
}

/// Replaces each node by the 1-based rank of its first occurrence.
pub fn anonymize(w: &Walk) -> AnonymousWalk {
    let mut seen: Vec<usize> = Vec::with_capacity(w.len());
    let labels = w
        .nodes
        .iter()
        .map(|&x| match seen.iter().position(|&y| y == x) {
            Some(i) => i as u32 + 1,
            None => {
                seen.push(x);
                seen.len() as u32
            }
        })
        .collect();
    AnonymousWalk { labels }
}

pub fn sample_anonymous_walks(g: &Graph, u: usize, l: usize, m: usize, seed: u64) -> Vec<AnonymousWalk> {
    sample_walks(g, u, l, m, seed).iter().map(anonymize).collect()
}

/// `R(φ)`: `l` one-hot blocks of width `l`, label `j` at block offset `l - j`.
pub fn encode_aw(aw: &AnonymousWalk, l: usize) -> Result<Vec<f64>, WalkError> {
    if aw.len() != l {
        return Err(WalkError::LengthMismatch { got: aw.len(), l });
    }
    let mut v = vec![0.0; l * l];
    for (i, &label) in aw.labels.iter().enumerate() {
        if label == 0 || label as usize > l {
            return Err(WalkError::LabelTooLarge { label, l });
        }
        v[i * l + (l - label as usize)] = 1.0;
    }
    Ok(v)
}

/// Index of the single 1 in block `i` of `R(φ)`.
pub(crate) fn aw_offsets(aw: &AnonymousWalk, l: usize) -> impl Iterator<Item = usize> + '_ {
    aw.labels
        .iter()
        .enumerate()
        .map(move |(i, &label)| i * l + (l - label as usize))
}

/// Scales `v` to unit Euclidean norm; zero vectors stay zero.
pub fn unit(v: &[f64]) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter().map(|x| x / norm).collect()
    } else {
        v.to_vec()
    }
}

/// `X(w)`: node attributes along `w`, each normalized to unit length, concatenated.
pub fn encode_walk(w: &Walk, attributes: &[Vec<f64>]) -> Vec<f64> {
    let mut out = Vec::with_capacity(w.len() * attributes.first().map_or(0, Vec::len));
    for &u in &w.nodes {
        out.extend(unit(&attributes[u]));
    }
    out
}

/// Like [`encode_walk`] but for attributes that are already unit-normalized.
pub(crate) fn concat_rows(w: &Walk, unit_rows: &[Vec<f64>]) -> Vec<f64> {
    let mut out = Vec::with_capacity(w.len() * unit_rows.first().map_or(0, Vec::len));
    for &u in &w.nodes {
        out.extend_from_slice(&unit_rows[u]);
    }
    out
}

/// Every anonymous walk of length `l` that some graph can produce: well-formed
/// and never repeating a label at consecutive positions. Lexicographic order.
pub fn aw_universe(l: usize) -> Vec<AnonymousWalk> {
    fn grow(cur: &mut Vec<u32>, max: u32, l: usize, out: &mut Vec<AnonymousWalk>) {
        if cur.len() == l {
            out.push(AnonymousWalk::new(cur.clone()));
            return;
        }
        let last = *cur.last().unwrap();
        for next in 1..=max + 1 {
            if next != last {
                cur.push(next);
                grow(cur, max.max(next), l, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    if l == 0 {
        return out;
    }
    grow(&mut vec![1], 1, l, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthgen::{gen_basic, gen_ring_pair, BasicFamily};
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn triangle() -> Graph {
        Graph::unattributed(3, [(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    fn edge() -> Graph {
        Graph::unattributed(2, [(0, 1)]).unwrap()
    }

    fn aw(labels: &[u32]) -> AnonymousWalk {
        AnonymousWalk::new(labels.to_vec())
    }

    #[test]
    fn enumerate_small_cases() {
        let e = enumerate_walks(&edge(), 0, 2, 100).unwrap();
        assert_eq!(e, vec![Walk { nodes: vec![0, 1] }]);
        let t = enumerate_walks(&triangle(), 0, 3, 100).unwrap();
        let expected: Vec<Vec<usize>> = vec![vec![0, 1, 0], vec![0, 1, 2], vec![0, 2, 0], vec![0, 2, 1]];
        assert_eq!(t.iter().map(|w| w.nodes.clone()).collect::<Vec<_>>(), expected);
        let iso = Graph::unattributed(2, []).unwrap();
        assert!(enumerate_walks(&iso, 0, 2, 100).unwrap().is_empty());
        assert_eq!(enumerate_walks(&iso, 0, 1, 100).unwrap().len(), 1);
    }

    #[test]
    fn enumerate_overflow() {
        let g = gen_basic(BasicFamily::Cycle, 10).unwrap();
        assert!(matches!(
            enumerate_walks(&g, 0, 12, 1000),
            Err(WalkError::Overflow { cap: 1000, .. })
        ));
    }

    #[test]
    fn regular_graph_count_is_exact() {
        let g = gen_basic(BasicFamily::Cycle, 7).unwrap();
        for l in 1..8 {
            assert_eq!(enumerate_walks(&g, 3, l, 1 << 20).unwrap().len(), 1 << (l - 1));
        }
    }

    #[test]
    fn sampling_on_single_edge_alternates() {
        let walks = sample_walks(&edge(), 0, 6, 20, 9);
        assert_eq!(walks.len(), 20);
        for w in &walks {
            assert_eq!(w.nodes, vec![0, 1, 0, 1, 0, 1]);
        }
        assert_eq!(walks, sample_walks(&edge(), 0, 6, 20, 9));
        let iso = Graph::unattributed(1, []).unwrap();
        assert!(sample_walks(&iso, 0, 3, 5, 0).is_empty());
    }

    #[test]
    fn sample_count_and_length() {
        let g = gen_basic(BasicFamily::Wheel, 9).unwrap();
        let walks = sample_walks(&g, 4, 6, 30, 1);
        assert_eq!(walks.len(), 30);
        assert!(walks.iter().all(|w| w.len() == 6 && w.is_valid_in(&g)));
    }

    #[test]
    fn anonymize_examples() {
        let a = anonymize(&Walk { nodes: vec![0, 9, 8, 11, 9] });
        let b = anonymize(&Walk { nodes: vec![3, 2, 9, 7, 2] });
        assert_eq!(a, aw(&[1, 2, 3, 4, 2]));
        assert_eq!(a, b);
        assert_eq!(anonymize(&Walk { nodes: vec![5, 6, 5] }), aw(&[1, 2, 1]));
    }

    #[test]
    fn triangle_aws_of_length_four() {
        let allowed: BTreeSet<_> = [aw(&[1, 2, 1, 2]), aw(&[1, 2, 1, 3]), aw(&[1, 2, 3, 1]), aw(&[1, 2, 3, 2])]
            .into_iter()
            .collect();
        // enumeration: all four appear
        let enumerated: BTreeSet<_> = enumerate_walks(&triangle(), 1, 4, 100)
            .unwrap()
            .iter()
            .map(anonymize)
            .collect();
        assert_eq!(enumerated, allowed);
        for a in sample_anonymous_walks(&triangle(), 2, 4, 50, 3) {
            assert!(allowed.contains(&a));
        }
        assert!(sample_anonymous_walks(&edge(), 0, 3, 10, 0)
            .iter()
            .all(|a| *a == aw(&[1, 2, 1])));
    }

    #[test]
    fn encode_aw_pattern() {
        let v = encode_aw(&aw(&[1, 2, 3, 1]), 4).unwrap();
        let bits: String = v.iter().map(|&x| if x == 1.0 { '1' } else { '0' }).collect();
        assert_eq!(bits, "0001001001000001");
        assert_eq!(
            encode_aw(&aw(&[1, 5]), 2),
            Err(WalkError::LabelTooLarge { label: 5, l: 2 })
        );
        assert!(encode_aw(&aw(&[1, 2]), 3).is_err());
    }

    #[test]
    fn encode_aw_inner_products_count_matches() {
        let u = aw_universe(5);
        for a in &u {
            let ra = encode_aw(a, 5).unwrap();
            assert_eq!(ra.iter().map(|x| x * x).sum::<f64>(), 5.0);
            for b in &u {
                let rb = encode_aw(b, 5).unwrap();
                let dot: f64 = ra.iter().zip(&rb).map(|(x, y)| x * y).sum();
                let same = a.labels.iter().zip(&b.labels).filter(|(x, y)| x == y).count();
                assert_eq!(dot, same as f64);
            }
        }
    }

    #[test]
    fn encode_walk_blocks() {
        let attrs = vec![vec![2.0, 0.0], vec![0.0, 0.0], vec![3.0, 4.0]];
        let f = encode_walk(&Walk { nodes: vec![0, 1, 2] }, &attrs);
        assert_eq!(f, vec![1.0, 0.0, 0.0, 0.0, 0.6, 0.8]);
        let same = vec![vec![1.0]; 3];
        let a = encode_walk(&Walk { nodes: vec![0, 1, 0] }, &same);
        let b = encode_walk(&Walk { nodes: vec![2, 1, 2] }, &same);
        assert_eq!(a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>(), 3.0);
    }

    #[test]
    fn universe_sizes() {
        // restricted growth strings without immediate repeats
        let sizes: Vec<usize> = (1..=6).map(|l| aw_universe(l).len()).collect();
        assert_eq!(sizes, vec![1, 1, 2, 5, 15, 52]);
        assert!(aw_universe(6).iter().all(AnonymousWalk::is_well_formed));
    }

    #[test]
    fn ring_label_support() {
        for k in 3..=6 {
            let (big, two) = gen_ring_pair(k).unwrap();
            let l = k + 2;
            let max_two = (0..two.node_count())
                .flat_map(|u| enumerate_walks(&two, u, l, 1 << 20).unwrap())
                .map(|w| anonymize(&w).max_label())
                .max()
                .unwrap();
            let max_big = enumerate_walks(&big, 0, l, 1 << 20)
                .unwrap()
                .iter()
                .map(|w| anonymize(w).max_label())
                .max()
                .unwrap();
            assert!(max_two as usize <= k);
            assert!(max_big as usize > k);
        }
    }

    proptest! {
        #[test]
        fn anonymize_is_permutation_invariant(
            nodes in proptest::collection::vec(0usize..8, 1..12),
            shift in 1usize..50,
        ) {
            let w = Walk { nodes: nodes.clone() };
            let relabeled = Walk { nodes: nodes.iter().map(|&x| (x * 7 + shift) % 97).collect() };
            let a = anonymize(&w);
            prop_assert_eq!(&a, &anonymize(&relabeled));
            prop_assert!(a.is_well_formed());
            prop_assert!(a.max_label() as usize <= a.len());
        }

        #[test]
        fn enumeration_bounded_by_max_degree(n in 4usize..9, extra in proptest::collection::vec((0usize..9, 0usize..9), 0..10), l in 1usize..5) {
            let edges: Vec<_> = (1..n).map(|v| (v - 1, v))
                .chain(extra.into_iter().filter(|&(a, b)| a < n && b < n && a != b))
                .collect();
            let g = Graph::unattributed(n, edges).unwrap();
            let bound = (g.max_degree() as f64).powi(l as i32 - 1);
            for u in 0..n {
                let walks = enumerate_walks(&g, u, l, 1 << 20).unwrap();
                prop_assert!(walks.len() as f64 <= bound);
                prop_assert_eq!(walks.len() as f64, walk_counts(&g, l)[u]);
                prop_assert!(walks.iter().all(|w| w.is_valid_in(&g) && w.nodes[0] == u));
            }
        }
    }
}
