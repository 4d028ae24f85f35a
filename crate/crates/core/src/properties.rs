//! Property checks shared by the command-line driver and the browser demo.
//! Each returns the measured margin; callers decide what to print.

use crate::graph::degree_attributes;
use crate::model::{BranchSelection, EmbeddingConfig, EmbeddingModel};
use crate::nystrom::{Branch, LandmarkSet};
use crate::oracle::{
    distinct_aw_features, distinct_walk_features, exact_awgk, exact_rwgk, nystrom_gap, wl_refine_joint, AwMode, Match,
    OracleError,
};
use crate::synthgen::{gen_basic, gen_ring_pair, BasicFamily};
use crate::walks::{aw_universe, encode_aw, DEFAULT_ENUMERATION_CAP};
use crate::Graph;

#[derive(Debug, Clone, PartialEq)]
pub struct RingCheck {
    pub k: usize,
    /// Colour histograms of `R_2k` and `R_{k,k}` agree at every iteration up to `2k`.
    pub wl_equal: bool,
    /// `||Psi_AW(R_2k) - Psi_AW(R_{k,k})||` with enumerated walks of `k + 2` nodes.
    pub aw_distance: f64,
}

pub fn ring_check(k: usize, alpha: f64) -> Result<RingCheck, OracleError> {
    let (big, two) = gen_ring_pair(k).map_err(|e| OracleError::Feature(crate::FeatureError::Config(e.to_string())))?;
    let graphs = vec![degree_attributes(&big, 2), degree_attributes(&two, 2)];
    let iters = 2 * k;
    let c = wl_refine_joint(&[&graphs[0], &graphs[1]], iters);
    let wl_equal = (0..=iters).all(|i| c[0].histogram(i) == c[1].histogram(i));
    let cfg = EmbeddingConfig {
        branches: BranchSelection::Aw,
        l_aw: k + 2,
        alpha,
        aw_enumerate: true,
        ..EmbeddingConfig::default()
    };
    let model = EmbeddingModel::fit(&graphs, &[0, 1], &cfg)?;
    let a = model.embed_graph(&graphs[0], 0)?;
    let b = model.embed_graph(&graphs[1], 1)?;
    let aw_distance = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    Ok(RingCheck { k, wl_equal, aw_distance })
}

/// Worst kernel error of the Nystrom map whose landmarks are the whole AW universe of length `l`.
pub fn universe_gap(l: usize, alpha: f64) -> Result<f64, OracleError> {
    let feats: Vec<Vec<f64>> = aw_universe(l).iter().map(|a| encode_aw(a, l)).collect::<Result<_, _>>()?;
    let lm = LandmarkSet::from_landmarks(&feats, alpha, l, 0.0, Branch::Aw, feats.len())?;
    nystrom_gap(&feats, &lm)
}

/// Nystrom gap when the landmarks are the first `q` elements of the length-`l`
/// universe, measured over the whole universe.
pub fn truncated_universe_gap(l: usize, q: usize, alpha: f64, epsilon: f64) -> Result<f64, OracleError> {
    let feats: Vec<Vec<f64>> = aw_universe(l).iter().map(|a| encode_aw(a, l)).collect::<Result<_, _>>()?;
    let q = q.clamp(1, feats.len());
    let lm = LandmarkSet::from_landmarks(&feats[..q], alpha, l, epsilon, Branch::Aw, q)?;
    nystrom_gap(&feats, &lm)
}

/// Cycles, paths and wheels of at most 10 nodes with one-hot degree attributes.
pub fn small_corpus() -> Vec<Graph> {
    let mut out = Vec::new();
    for n in [3, 5, 8, 10] {
        out.push(gen_basic(BasicFamily::Cycle, n).expect("valid size"));
    }
    for n in [2, 4, 7, 10] {
        out.push(gen_basic(BasicFamily::Path, n).expect("valid size"));
    }
    for n in [4, 6, 10] {
        out.push(gen_basic(BasicFamily::Wheel, n).expect("valid size"));
    }
    let cap = out.iter().map(Graph::max_degree).max().unwrap_or(0);
    out.iter().map(|g| degree_attributes(g, cap)).collect()
}

/// Largest relative error between embedding inner products under
/// full-landmark Nystrom and the exact kernels, as `(aw, walk)`.
pub fn kernel_consistency(graphs: &[Graph], l_aw: usize, l_rw: usize, alpha: f64) -> Result<(f64, f64), OracleError> {
    let cap = DEFAULT_ENUMERATION_CAP;
    let aw_feats = distinct_aw_features(graphs, l_aw, cap)?;
    let walk_feats = distinct_walk_features(graphs, l_rw, cap)?;
    let config = EmbeddingConfig {
        branches: BranchSelection::Both,
        l_aw,
        l_rw,
        alpha,
        epsilon: 0.0,
        aw_enumerate: true,
        q_aw: aw_feats.len(),
        q_walk: walk_feats.len(),
        ..EmbeddingConfig::default()
    };
    let model = EmbeddingModel {
        walk_layers: vec![LandmarkSet::from_landmarks(&walk_feats, alpha, l_rw, 0.0, Branch::Walk, walk_feats.len())?],
        aw_layers: vec![LandmarkSet::from_landmarks(&aw_feats, alpha, l_aw, 0.0, Branch::Aw, aw_feats.len())?],
        fitted_on: (0..graphs.len()).collect(),
        config,
    };
    let mut aw = Vec::new();
    let mut walk = Vec::new();
    for (i, g) in graphs.iter().enumerate() {
        let n = model.embed_nodes(g, i)?;
        aw.push(sum_rows(n.aw.as_deref().unwrap_or_default(), aw_feats.len()));
        walk.push(sum_rows(n.walk.as_deref().unwrap_or_default(), walk_feats.len()));
    }
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let rel = |approx: f64, exact: f64| (approx - exact).abs() / exact.abs().max(1e-12);
    let (mut worst_aw, mut worst_walk) = (0.0f64, 0.0f64);
    for i in 0..graphs.len() {
        for j in i..graphs.len() {
            let exact = exact_awgk(&graphs[i], &graphs[j], l_aw, alpha, AwMode::Enumerate { cap })?;
            worst_aw = worst_aw.max(rel(dot(&aw[i], &aw[j]), exact));
            let exact = exact_rwgk(&graphs[i], &graphs[j], l_rw, Match::Gaussian { alpha }, cap)?;
            worst_walk = worst_walk.max(rel(dot(&walk[i], &walk[j]), exact));
        }
    }
    Ok((worst_aw, worst_walk))
}

fn sum_rows(rows: &[Vec<f64>], dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    for r in rows {
        for (o, x) in out.iter_mut().zip(r) {
            *o += x;
        }
    }
    out
}
