//! Brute-force kernels and 1-WL colour refinement, used as ground truth.
//!
//! Every walk kernel here is a double sum over node pairs and walk pairs. Since
//! the sum runs over all pairs, it equals a sum over the pooled walk multisets
//! of the two graphs; features are grouped by value before pairing.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

use crate::graph::Graph;
use crate::nystrom::{FeatureError, LandmarkSet};
use crate::walks::{anonymize, encode_aw, encode_walk, enumerate_walks, sample_walks, Walk, WalkError};

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error("attribute dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

/// How two walk features are compared.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Match {
    /// Exact equality of `X(w)`.
    Delta,
    /// `exp(-alpha/2 |X(w1) - X(w2)|^2)`.
    Gaussian { alpha: f64 },
}

impl Match {
    pub fn as_str(&self) -> &'static str {
        match self {
            Match::Delta => "delta",
            Match::Gaussian { .. } => "gaussian",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AwMode {
    Enumerate { cap: usize },
    Sampled { m: usize, seed: u64 },
}

type Multiset = BTreeMap<Vec<u64>, (Vec<f64>, f64)>;

fn push(set: &mut Multiset, f: Vec<f64>) {
    let key = f.iter().map(|x| x.to_bits()).collect();
    set.entry(key).or_insert((f, 0.0)).1 += 1.0;
}

fn walk_multiset(g: &Graph, l: usize, cap: usize, paths_only: bool) -> Result<Multiset, WalkError> {
    let mut set = Multiset::new();
    for u in 0..g.node_count() {
        for w in enumerate_walks(g, u, l, cap)? {
            if !paths_only || w.is_path() {
                push(&mut set, encode_walk(&w, g.attributes()));
            }
        }
    }
    Ok(set)
}

fn aw_multiset(g: &Graph, l: usize, mode: AwMode) -> Result<Multiset, WalkError> {
    let mut set = Multiset::new();
    for u in 0..g.node_count() {
        let walks: Vec<Walk> = match mode {
            AwMode::Enumerate { cap } => enumerate_walks(g, u, l, cap)?,
            AwMode::Sampled { m, seed } => sample_walks(g, u, l, m, seed),
        };
        for w in &walks {
            push(&mut set, encode_aw(&anonymize(w), l)?);
        }
    }
    Ok(set)
}

fn pair_sum(a: &Multiset, b: &Multiset, matching: Match) -> f64 {
    match matching {
        Match::Delta => a
            .iter()
            .filter_map(|(k, (_, ca))| b.get(k).map(|(_, cb)| ca * cb))
            .sum(),
        Match::Gaussian { alpha } => {
            let mut total = 0.0;
            for (xa, ca) in a.values() {
                for (xb, cb) in b.values() {
                    let d2: f64 = xa.iter().zip(xb).map(|(p, q)| (p - q) * (p - q)).sum();
                    total += ca * cb * (-0.5 * alpha * d2).exp();
                }
            }
            total
        }
    }
}

fn check_dims(g1: &Graph, g2: &Graph) -> Result<(), OracleError> {
    if g1.node_count() > 0 && g2.node_count() > 0 && g1.attribute_dim() != g2.attribute_dim() {
        return Err(OracleError::DimensionMismatch(g1.attribute_dim(), g2.attribute_dim()));
    }
    Ok(())
}

/// Random-walk graph kernel over all walks of `l` nodes.
pub fn exact_rwgk(g1: &Graph, g2: &Graph, l: usize, matching: Match, cap: usize) -> Result<f64, OracleError> {
    check_dims(g1, g2)?;
    Ok(pair_sum(
        &walk_multiset(g1, l, cap, false)?,
        &walk_multiset(g2, l, cap, false)?,
        matching,
    ))
}

/// As [`exact_rwgk`], restricted to walks without repeated nodes.
pub fn exact_path_kernel(g1: &Graph, g2: &Graph, l: usize, matching: Match, cap: usize) -> Result<f64, OracleError> {
    check_dims(g1, g2)?;
    Ok(pair_sum(
        &walk_multiset(g1, l, cap, true)?,
        &walk_multiset(g2, l, cap, true)?,
        matching,
    ))
}

/// Anonymous-walk graph kernel: Gaussian kernel summed over pairs of `R(φ)`.
pub fn exact_awgk(g1: &Graph, g2: &Graph, l: usize, alpha: f64, mode: AwMode) -> Result<f64, OracleError> {
    Ok(pair_sum(
        &aw_multiset(g1, l, mode)?,
        &aw_multiset(g2, l, mode)?,
        Match::Gaussian { alpha },
    ))
}

/// Sum of the random-walk and anonymous-walk kernels.
pub fn exact_argk(
    g1: &Graph,
    g2: &Graph,
    l_rw: usize,
    l_aw: usize,
    alpha: f64,
    matching: Match,
    mode: AwMode,
    cap: usize,
) -> Result<f64, OracleError> {
    Ok(exact_rwgk(g1, g2, l_rw, matching, cap)? + exact_awgk(g1, g2, l_aw, alpha, mode)?)
}

/// Symmetric matrix `K[i][j] = kernel(graphs[i], graphs[j])`.
pub fn kernel_matrix<F>(graphs: &[Graph], kernel: F) -> Result<DMatrix<f64>, OracleError>
where
    F: Fn(&Graph, &Graph) -> Result<f64, OracleError> + Sync,
{
    let n = graphs.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    #[cfg(feature = "parallel")]
    let values: Vec<Result<f64, OracleError>> = {
        use rayon::prelude::*;
        pairs.par_iter().map(|&(i, j)| kernel(&graphs[i], &graphs[j])).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let values: Vec<Result<f64, OracleError>> = pairs.iter().map(|&(i, j)| kernel(&graphs[i], &graphs[j])).collect();
    let mut k = DMatrix::zeros(n, n);
    for (&(i, j), v) in pairs.iter().zip(values) {
        let v = v?;
        k[(i, j)] = v;
        k[(j, i)] = v;
    }
    Ok(k)
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(k: &DMatrix<f64>) -> f64 {
    if k.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(k.clone()).eigenvalues.min()
}

/// Per-iteration node colours from 1-WL refinement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WlColoring {
    /// `colors[i][u]`: colour of node `u` after `i` rounds.
    pub colors: Vec<Vec<usize>>,
}

impl WlColoring {
    pub fn iterations(&self) -> usize {
        self.colors.len() - 1
    }

    /// Colour multiset after `i` rounds.
    pub fn histogram(&self, i: usize) -> BTreeMap<usize, usize> {
        let mut h = BTreeMap::new();
        for &c in &self.colors[i] {
            *h.entry(c).or_insert(0) += 1;
        }
        h
    }

    pub fn class_count(&self, i: usize) -> usize {
        self.histogram(i).len()
    }
}

/// Assigns ids to signatures in sorted order, so equal signature sets get equal ids.
fn canonical_ids<K: Ord + Clone>(sigs: &[Vec<K>]) -> Vec<Vec<usize>> {
    let dict: BTreeMap<&K, usize> = {
        let mut all: Vec<&K> = sigs.iter().flatten().collect();
        all.sort();
        all.dedup();
        all.into_iter().enumerate().map(|(i, k)| (k, i)).collect()
    };
    sigs.iter().map(|s| s.iter().map(|k| dict[k]).collect()).collect()
}

/// Refines all graphs against one shared colour dictionary, so colours are
/// comparable across graphs.
pub fn wl_refine_joint(graphs: &[&Graph], iterations: usize) -> Vec<WlColoring> {
    let initial: Vec<Vec<Vec<u64>>> = graphs
        .iter()
        .map(|g| g.attributes().iter().map(|a| a.iter().map(|x| x.to_bits()).collect()).collect())
        .collect();
    let mut current = canonical_ids(&initial);
    let mut out: Vec<WlColoring> = current.iter().map(|c| WlColoring { colors: vec![c.clone()] }).collect();
    for _ in 0..iterations {
        let sigs: Vec<Vec<(usize, Vec<usize>)>> = graphs
            .iter()
            .zip(&current)
            .map(|(g, colors)| {
                (0..g.node_count())
                    .map(|u| {
                        let mut nb: Vec<usize> = g.neighbors(u).iter().map(|&v| colors[v]).collect();
                        nb.sort_unstable();
                        (colors[u], nb)
                    })
                    .collect()
            })
            .collect();
        current = canonical_ids(&sigs);
        for (o, c) in out.iter_mut().zip(&current) {
            o.colors.push(c.clone());
        }
    }
    out
}

pub fn wl_refine(g: &Graph, iterations: usize) -> WlColoring {
    wl_refine_joint(&[g], iterations).pop().unwrap()
}

/// True if the two graphs have equal colour histograms after every round up to `iterations`.
pub fn wl_equivalent(g1: &Graph, g2: &Graph, iterations: usize) -> bool {
    let c = wl_refine_joint(&[g1, g2], iterations);
    (0..=iterations).all(|i| c[0].histogram(i) == c[1].histogram(i))
}

/// WL subtree kernel: matching colour pairs summed over rounds `0..=depth`.
pub fn wl_subtree_kernel(g1: &Graph, g2: &Graph, depth: usize) -> f64 {
    let c = wl_refine_joint(&[g1, g2], depth);
    let mut total = 0.0;
    for i in 0..=depth {
        let h2 = c[1].histogram(i);
        for (color, n1) in c[0].histogram(i) {
            if let Some(n2) = h2.get(&color) {
                total += (n1 * n2) as f64;
            }
        }
    }
    total
}

/// Largest `|<psi(x_i), psi(x_j)> - k_gauss(x_i, x_j)|` over all pairs.
pub fn nystrom_gap(features: &[Vec<f64>], lm: &LandmarkSet) -> Result<f64, OracleError> {
    let projected = features.iter().map(|x| lm.project(x)).collect::<Result<Vec<_>, _>>()?;
    let mut gap: f64 = 0.0;
    for i in 0..features.len() {
        for j in i..features.len() {
            let ip: f64 = projected[i].iter().zip(&projected[j]).map(|(a, b)| a * b).sum();
            let d2: f64 = features[i].iter().zip(&features[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            gap = gap.max((ip - (-0.5 * lm.alpha * d2).exp()).abs());
        }
    }
    Ok(gap)
}

/// Distinct `R(φ)` features of every enumerated anonymous walk in `graphs`.
pub fn distinct_aw_features(graphs: &[Graph], l: usize, cap: usize) -> Result<Vec<Vec<f64>>, OracleError> {
    let mut all = Multiset::new();
    for g in graphs {
        all.extend(aw_multiset(g, l, AwMode::Enumerate { cap })?);
    }
    Ok(all.into_values().map(|(f, _)| f).collect())
}

/// Distinct `X(w)` features of every enumerated walk in `graphs`.
pub fn distinct_walk_features(graphs: &[Graph], l: usize, cap: usize) -> Result<Vec<Vec<f64>>, OracleError> {
    let mut all = Multiset::new();
    for g in graphs {
        all.extend(walk_multiset(g, l, cap, false)?);
    }
    Ok(all.into_values().map(|(f, _)| f).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::degree_attributes;
    use crate::nystrom::Branch;
    use crate::synthgen::{gen_basic, gen_ring_pair, BasicFamily};
    use crate::walks::{aw_universe, DEFAULT_ENUMERATION_CAP as CAP};

    fn edge() -> Graph {
        Graph::unattributed(2, [(0, 1)]).unwrap()
    }

    fn triangle() -> Graph {
        Graph::unattributed(3, [(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    fn path3() -> Graph {
        Graph::unattributed(3, [(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn rwgk_examples() {
        assert_eq!(exact_rwgk(&edge(), &edge(), 2, Match::Delta, CAP).unwrap(), 4.0);
        let a = edge();
        let b = a.with_attributes(vec![vec![-1.0], vec![-1.0]]);
        assert_eq!(exact_rwgk(&a, &b, 2, Match::Delta, CAP).unwrap(), 0.0);
        let t = degree_attributes(&triangle(), 2);
        let p = degree_attributes(&path3(), 2);
        for m in [Match::Delta, Match::Gaussian { alpha: 1.5 }] {
            let ab = exact_rwgk(&t, &p, 3, m, CAP).unwrap();
            let ba = exact_rwgk(&p, &t, 3, m, CAP).unwrap();
            assert_eq!(ab, ba);
        }
    }

    #[test]
    fn awgk_examples() {
        let mode = AwMode::Enumerate { cap: CAP };
        assert!((exact_awgk(&edge(), &edge(), 3, 1.5, mode).unwrap() - 4.0).abs() < 1e-12);
        let (big, two) = gen_ring_pair(8).unwrap();
        let same = exact_awgk(&big, &big, 10, 1.5, mode).unwrap();
        let cross = exact_awgk(&big, &two, 10, 1.5, mode).unwrap();
        assert_ne!(same, cross);
        let back = exact_awgk(&two, &big, 10, 1.5, mode).unwrap();
        assert!((cross - back).abs() <= 1e-12 * cross);
    }

    #[test]
    fn path_kernel_examples() {
        // each triangle node starts two 3-node paths: 6 paths per graph, all features equal
        assert_eq!(exact_path_kernel(&triangle(), &triangle(), 3, Match::Delta, CAP).unwrap(), 36.0);
        assert_eq!(exact_path_kernel(&edge(), &edge(), 3, Match::Delta, CAP).unwrap(), 0.0);
        let w = gen_basic(BasicFamily::Wheel, 6).unwrap();
        let c = gen_basic(BasicFamily::Cycle, 5).unwrap();
        for (a, b) in [(&w, &c), (&w, &w), (&c, &c)] {
            let pk = exact_path_kernel(a, b, 3, Match::Delta, CAP).unwrap();
            let wk = exact_rwgk(a, b, 3, Match::Delta, CAP).unwrap();
            assert!(pk <= wk);
        }
    }

    #[test]
    fn argk_is_sum() {
        let a = degree_attributes(&triangle(), 2);
        let b = degree_attributes(&path3(), 2);
        let mode = AwMode::Enumerate { cap: CAP };
        let m = Match::Gaussian { alpha: 1.5 };
        let s = exact_argk(&a, &b, 3, 4, 1.5, m, mode, CAP).unwrap();
        let parts = exact_rwgk(&a, &b, 3, m, CAP).unwrap() + exact_awgk(&a, &b, 4, 1.5, mode).unwrap();
        assert_eq!(s, parts);
    }

    #[test]
    fn gram_matrices_are_psd() {
        let graphs: Vec<Graph> = vec![
            degree_attributes(&triangle(), 4),
            degree_attributes(&path3(), 4),
            degree_attributes(&gen_basic(BasicFamily::Cycle, 5).unwrap(), 4),
            degree_attributes(&gen_basic(BasicFamily::Wheel, 5).unwrap(), 4),
            degree_attributes(&gen_basic(BasicFamily::Ladder, 3).unwrap(), 4),
        ];
        let mode = AwMode::Enumerate { cap: CAP };
        let kernels: Vec<Box<dyn Fn(&Graph, &Graph) -> Result<f64, OracleError> + Sync>> = vec![
            Box::new(|a, b| exact_rwgk(a, b, 3, Match::Delta, CAP)),
            Box::new(|a, b| exact_rwgk(a, b, 3, Match::Gaussian { alpha: 1.5 }, CAP)),
            Box::new(|a, b| exact_path_kernel(a, b, 3, Match::Delta, CAP)),
            Box::new(move |a, b| exact_awgk(a, b, 4, 1.5, mode)),
            Box::new(|a, b| Ok(wl_subtree_kernel(a, b, 3))),
        ];
        for k in &kernels {
            let m = kernel_matrix(&graphs, k).unwrap();
            assert_eq!(m, m.transpose());
            assert!(min_eigenvalue(&m) >= -1e-8 * m.amax().max(1.0));
        }
        let delta = kernel_matrix(&graphs, &kernels[0]).unwrap();
        assert!(delta.iter().all(|x| x.fract() == 0.0 && *x >= 0.0));
    }

    #[test]
    fn wl_ring_pairs_are_blind() {
        for k in [3, 4, 6, 8] {
            let (big, two) = gen_ring_pair(k).unwrap();
            let (big, two) = (degree_attributes(&big, 2), degree_attributes(&two, 2));
            assert!(wl_equivalent(&big, &two, 2 * k));
            for d in 0..4 {
                assert_eq!(wl_subtree_kernel(&big, &big, d), wl_subtree_kernel(&big, &two, d));
            }
        }
    }

    #[test]
    fn wl_triangle_vs_path() {
        let c = wl_refine_joint(&[&triangle(), &path3()], 1);
        assert_eq!(c[0].histogram(0), c[1].histogram(0));
        assert_ne!(c[0].histogram(1), c[1].histogram(1));
        let w = wl_refine(&triangle(), 0);
        assert_eq!(w.histogram(0).values().copied().collect::<Vec<_>>(), vec![3]);
        assert_eq!(wl_subtree_kernel(&triangle(), &triangle(), 0), 9.0);
        let b = edge().with_attributes(vec![vec![2.0], vec![2.0]]);
        assert_eq!(wl_subtree_kernel(&edge(), &b, 0), 0.0);
    }

    #[test]
    fn wl_stabilizes() {
        let g = gen_basic(BasicFamily::Path, 9).unwrap();
        let c = wl_refine(&g, 10);
        let counts: Vec<usize> = (0..=10).map(|i| c.class_count(i)).collect();
        let stable = counts.windows(2).position(|p| p[0] == p[1]).unwrap();
        assert!(counts[stable..].iter().all(|&x| x == counts[stable]));
        assert_eq!(counts[10], 5);
    }

    #[test]
    fn nystrom_gap_examples() {
        let feats: Vec<Vec<f64>> = aw_universe(4).iter().map(|a| encode_aw(a, 4).unwrap()).collect();
        let full = LandmarkSet::from_landmarks(&feats, 1.5, 4, 0.0, Branch::Aw, feats.len()).unwrap();
        assert!(nystrom_gap(&feats, &full).unwrap() < 1e-6);
        let two = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let one = LandmarkSet::from_landmarks(&two[..1], 1.5, 1, 0.0, Branch::Walk, 1).unwrap();
        assert!(nystrom_gap(&two, &one).unwrap() > 0.0);
    }

    #[test]
    fn distinct_features_cover_universe() {
        let (big, _) = gen_ring_pair(4).unwrap();
        let w = gen_basic(BasicFamily::Wheel, 6).unwrap();
        let f = distinct_aw_features(&[big, w], 4, CAP).unwrap();
        assert!(f.len() <= aw_universe(4).len());
        assert!(!f.is_empty());
    }
}
