//! The layered embedding model: a walk branch over node attributes and an
//! anonymous-walk branch over walk shapes, each a stack of Nyström layers,
//! concatenated per node and sum-pooled per graph.
//!
//! Layer 1 of the walk branch projects `X(w)` for the walks `w` leaving a node
//! and sums the projections. Layer `k >= 2` repeats this with the unit-normalized
//! layer `k - 1` node embeddings standing in for the attributes. The AW branch
//! projects `R(φ)` for the anonymous walks leaving a node; by default it has a
//! single layer, and with `stack_aw` its later layers are walk layers over the
//! AW embeddings.

use std::collections::BTreeMap;

use nalgebra::DVector;

use crate::graph::Graph;
use crate::nystrom::{
    fit_landmarks_from_pool, Branch, FeatureError, FitOptions, LandmarkSet, WeightedPool,
};
use crate::rng::derive_seed;
use crate::walks::{
    anonymize, concat_rows, enumerate_walks, encode_aw, sample_walks, unit, walk_counts,
    AnonymousWalk, Walk, DEFAULT_ENUMERATION_CAP,
};

const TAG_RW: u64 = 0x7277;
const TAG_AW: u64 = 0x6177;
const TAG_FIT: u64 = 0x666974;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchSelection {
    Walk,
    Aw,
    Both,
}

impl BranchSelection {
    pub fn walk(self) -> bool {
        matches!(self, BranchSelection::Walk | BranchSelection::Both)
    }

    pub fn aw(self) -> bool {
        matches!(self, BranchSelection::Aw | BranchSelection::Both)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BranchSelection::Walk => "walk",
            BranchSelection::Aw => "aw",
            BranchSelection::Both => "both",
        }
    }
}

impl std::str::FromStr for BranchSelection {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "walk" | "walk-only" => Ok(BranchSelection::Walk),
            "aw" | "aw-only" => Ok(BranchSelection::Aw),
            "both" => Ok(BranchSelection::Both),
            _ => Err(format!("unknown branch {s:?} (walk, aw, both)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingConfig {
    pub branches: BranchSelection,
    /// Anonymous-walk length in nodes.
    pub l_aw: usize,
    /// Attributed-walk length in nodes.
    pub l_rw: usize,
    /// Sampled walks per node (AW branch, and the walk branch on overflow).
    pub m: usize,
    pub q_aw: usize,
    pub q_walk: usize,
    pub alpha: f64,
    pub epsilon: f64,
    pub layers: usize,
    pub stack_aw: bool,
    /// Enumerate every anonymous walk instead of sampling `m`.
    pub aw_enumerate: bool,
    pub enumeration_cap: usize,
    /// Sample `m` walks where enumeration would pass the cap; off, that is an error.
    pub sampling_fallback: bool,
    pub fit: FitOptions,
    pub seed: u64,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig {
            branches: BranchSelection::Both,
            l_aw: 6,
            l_rw: 3,
            m: 30,
            q_aw: 32,
            q_walk: 32,
            alpha: 1.5,
            epsilon: 1e-7,
            layers: 1,
            stack_aw: false,
            aw_enumerate: false,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            sampling_fallback: true,
            fit: FitOptions::default(),
            seed: 0,
        }
    }
}

impl EmbeddingConfig {
    pub fn check(&self) -> Result<(), FeatureError> {
        let bad = |m: &str| Err(FeatureError::Config(m.to_owned()));
        if self.l_aw < 2 || self.l_rw < 2 {
            return bad("walk lengths must be >= 2");
        }
        if self.q_aw == 0 || self.q_walk == 0 {
            return bad("q must be >= 1");
        }
        if !(self.alpha > 0.0) {
            return bad("alpha must be > 0");
        }
        if !(self.epsilon >= 0.0) {
            return bad("epsilon must be >= 0");
        }
        if self.layers == 0 {
            return bad("layers must be >= 1");
        }
        if self.m == 0 {
            return bad("m must be >= 1");
        }
        Ok(())
    }

    /// Flat `key = value` view. Floats use the shortest round-trip form, so
    /// feeding the pairs back through [`EmbeddingConfig::set`] is lossless.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let pairs = vec![
            ("branch", self.branches.as_str().to_owned()),
            ("l_aw", self.l_aw.to_string()),
            ("l_rw", self.l_rw.to_string()),
            ("m", self.m.to_string()),
            ("q_aw", self.q_aw.to_string()),
            ("q_walk", self.q_walk.to_string()),
            ("alpha", format!("{:?}", self.alpha)),
            ("epsilon", format!("{:?}", self.epsilon)),
            ("layers", self.layers.to_string()),
            ("stack_aw", self.stack_aw.to_string()),
            ("aw_enumerate", self.aw_enumerate.to_string()),
            ("enumeration_cap", self.enumeration_cap.to_string()),
            ("sampling_fallback", self.sampling_fallback.to_string()),
            ("kmeans_max_iters", self.fit.max_iters.to_string()),
            ("kmeans_tol", format!("{:?}", self.fit.tol)),
            ("subsample_cap", self.fit.subsample_cap.to_string()),
            ("seed", self.seed.to_string()),
        ];
        pairs.into_iter().map(|(k, v)| (k.to_owned(), v)).collect()
    }

    /// Sets one key from [`EmbeddingConfig::to_pairs`]. `Ok(false)` for unknown keys.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool, String> {
        fn p<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
            v.trim().parse().map_err(|_| format!("bad value {v:?} for {key}"))
        }
        match key {
            "branch" => self.branches = value.trim().parse()?,
            "l_aw" => self.l_aw = p(key, value)?,
            "l_rw" => self.l_rw = p(key, value)?,
            "m" => self.m = p(key, value)?,
            "q" => {
                self.q_aw = p(key, value)?;
                self.q_walk = self.q_aw;
            }
            "q_aw" => self.q_aw = p(key, value)?,
            "q_walk" => self.q_walk = p(key, value)?,
            "alpha" => self.alpha = p(key, value)?,
            "epsilon" => self.epsilon = p(key, value)?,
            "layers" => self.layers = p(key, value)?,
            "stack_aw" => self.stack_aw = p(key, value)?,
            "aw_enumerate" => self.aw_enumerate = p(key, value)?,
            "enumeration_cap" => self.enumeration_cap = p(key, value)?,
            "sampling_fallback" => self.sampling_fallback = p(key, value)?,
            "kmeans_max_iters" => self.fit.max_iters = p(key, value)?,
            "kmeans_tol" => self.fit.tol = p(key, value)?,
            "subsample_cap" => self.fit.subsample_cap = p(key, value)?,
            "seed" => self.seed = p(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    pub fn q_walk_out(&self) -> usize {
        if self.branches.walk() {
            self.q_walk
        } else {
            0
        }
    }

    pub fn q_aw_out(&self) -> usize {
        if self.branches.aw() {
            self.q_aw
        } else {
            0
        }
    }

    pub fn output_dim(&self) -> usize {
        self.q_walk_out() + self.q_aw_out()
    }
}

/// Where the walks leaving a node come from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WalkSource {
    Sample { m: usize, seed: u64 },
    Enumerate { cap: usize },
    /// Enumerate when the count fits under `cap`, else sample `m`.
    EnumerateOrSample { cap: usize, m: usize, seed: u64 },
}

pub fn node_walks(g: &Graph, u: usize, l: usize, source: WalkSource) -> Result<Vec<Walk>, FeatureError> {
    Ok(match source {
        WalkSource::Sample { m, seed } => sample_walks(g, u, l, m, seed),
        WalkSource::Enumerate { cap } => enumerate_walks(g, u, l, cap)?,
        WalkSource::EnumerateOrSample { cap, m, seed } => match enumerate_walks(g, u, l, cap) {
            Ok(w) => w,
            Err(e) => {
                log::warn!("{e}; sampling {m} walks");
                sample_walks(g, u, l, m, seed)
            }
        },
    })
}

fn aw_groups(walks: &[Walk]) -> BTreeMap<AnonymousWalk, f64> {
    let mut out = BTreeMap::new();
    for w in walks {
        *out.entry(anonymize(w)).or_insert(0.0) += 1.0;
    }
    out
}

/// Distinct walk features with multiplicities, ordered by bit pattern.
fn feature_groups(walks: &[Walk], unit_rows: &[Vec<f64>]) -> BTreeMap<Vec<u64>, (Vec<f64>, f64)> {
    let mut out: BTreeMap<Vec<u64>, (Vec<f64>, f64)> = BTreeMap::new();
    for w in walks {
        let f = concat_rows(w, unit_rows);
        let key = f.iter().map(|x| x.to_bits()).collect();
        out.entry(key).or_insert((f, 0.0)).1 += 1.0;
    }
    out
}

fn aw_node(groups: &BTreeMap<AnonymousWalk, f64>, lm: &LandmarkSet) -> Result<Vec<f64>, FeatureError> {
    let mut acc = DVector::zeros(lm.q());
    for (aw, &count) in groups {
        acc += lm.aw_activations(aw)? * count;
    }
    Ok(if groups.is_empty() {
        vec![0.0; lm.output_dim]
    } else {
        lm.finish(&acc)
    })
}

fn walk_node(walks: &[Walk], unit_rows: &[Vec<f64>], lm: &LandmarkSet) -> Result<Vec<f64>, FeatureError> {
    if walks.is_empty() {
        return Ok(vec![0.0; lm.output_dim]);
    }
    let mut acc = DVector::zeros(lm.q());
    for (_, (f, count)) in feature_groups(walks, unit_rows) {
        acc += lm.activations(&f)? * count;
    }
    Ok(lm.finish(&acc))
}

/// `psi_AW(u)`: sum of projected `R(φ)` over the anonymous walks from `u`.
pub fn psi_aw_node(g: &Graph, u: usize, lm: &LandmarkSet, source: WalkSource) -> Result<Vec<f64>, FeatureError> {
    aw_node(&aw_groups(&node_walks(g, u, lm.l, source)?), lm)
}

/// `psi_walk(u)`: sum of projected `X(w)` over the attributed walks from `u`.
pub fn psi_walk_node(g: &Graph, u: usize, lm: &LandmarkSet, source: WalkSource) -> Result<Vec<f64>, FeatureError> {
    let rows: Vec<Vec<f64>> = g.attributes().iter().map(|a| unit(a)).collect();
    walk_node(&node_walks(g, u, lm.l, source)?, &rows, lm)
}

/// Elementwise sum of node embeddings. An empty graph pools to zeros of width `dim`.
pub fn graph_pool(node_embeddings: &[Vec<f64>], dim: usize) -> Vec<f64> {
    if node_embeddings.is_empty() {
        log::warn!("pooling an empty graph");
        return vec![0.0; dim];
    }
    let mut out = vec![0.0; node_embeddings[0].len()];
    for row in node_embeddings {
        for (o, x) in out.iter_mut().zip(row) {
            *o += x;
        }
    }
    out
}

fn concat(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(a.len() + b.len());
    v.extend_from_slice(a);
    v.extend_from_slice(b);
    v
}

#[derive(Debug, Clone)]
struct GraphWalks {
    rw: Option<Vec<Vec<Walk>>>,
    /// Anonymous-walk multiplicities per node; enough for the first AW layer.
    aw_counts: Option<Vec<BTreeMap<AnonymousWalk, f64>>>,
    /// Raw AW-branch walks, kept only when AW layers are stacked.
    aw: Option<Vec<Vec<Walk>>>,
}

/// Node embeddings of one graph, per branch.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeEmbeddings {
    pub walk: Option<Vec<Vec<f64>>>,
    pub aw: Option<Vec<Vec<f64>>>,
}

impl NodeEmbeddings {
    /// `[psi_walk(u) || psi_AW(u)]` for every node.
    pub fn combined(&self) -> Vec<Vec<f64>> {
        let n = self
            .walk
            .as_ref()
            .or(self.aw.as_ref())
            .map_or(0, Vec::len);
        (0..n)
            .map(|u| {
                concat(
                    self.walk.as_ref().map_or(&[][..], |w| &w[u]),
                    self.aw.as_ref().map_or(&[][..], |a| &a[u]),
                )
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Node,
    Graph,
}

/// Dense embeddings, one row per node or per graph.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    pub level: Level,
    pub ids: Vec<usize>,
    pub rows: Vec<Vec<f64>>,
    pub q_walk: usize,
    pub q_aw: usize,
}

impl EmbeddingMatrix {
    pub fn dim(&self) -> usize {
        self.q_walk + self.q_aw
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.rows.iter().flatten().all(|x| x.is_finite())
    }
}

/// Fitted landmarks for every layer of both branches.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    pub config: EmbeddingConfig,
    pub walk_layers: Vec<LandmarkSet>,
    pub aw_layers: Vec<LandmarkSet>,
    /// Indices of the graphs whose walks the landmarks were fitted on.
    pub fitted_on: Vec<usize>,
}

#[cfg(feature = "parallel")]
fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(usize, &T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    items.par_iter().enumerate().map(|(i, x)| f(i, x)).collect()
}

#[cfg(not(feature = "parallel"))]
fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(usize, &T) -> R + Sync + Send) -> Vec<R> {
    items.iter().enumerate().map(|(i, x)| f(i, x)).collect()
}

fn collect<R, E>(v: Vec<Result<R, E>>) -> Result<Vec<R>, E> {
    v.into_iter().collect()
}

impl EmbeddingModel {
    fn walks_for(&self, g: &Graph, graph_index: usize) -> Result<GraphWalks, FeatureError> {
        walks_for(&self.config, g, graph_index)
    }

    /// Fits every layer's landmarks on the walks of `graphs[i]` for `i` in `pool`.
    pub fn fit(graphs: &[Graph], pool: &[usize], config: &EmbeddingConfig) -> Result<Self, FeatureError> {
        config.check()?;
        let members: Vec<(usize, &Graph)> = pool.iter().map(|&i| (i, &graphs[i])).collect();
        let walks = collect(par_map(&members, |_, &(i, g)| walks_for(config, g, i)))?;
        let fit_seed = |branch: u64, layer: usize| derive_seed(config.seed, &[TAG_FIT, branch, layer as u64]);
        let fit_layer = |pool: &WeightedPool, q, l, branch, tag, layer| {
            fit_landmarks_from_pool(
                pool,
                q,
                config.alpha,
                l,
                config.epsilon,
                fit_seed(tag, layer),
                branch,
                config.fit,
            )
        };

        let mut walk_layers = Vec::new();
        if config.branches.walk() {
            let mut rows: Vec<Vec<Vec<f64>>> = members
                .iter()
                .map(|(_, g)| g.attributes().iter().map(|a| unit(a)).collect())
                .collect();
            for layer in 0..config.layers {
                let mut fp = WeightedPool::new();
                for (gw, r) in walks.iter().zip(&rows) {
                    for node in gw.rw.as_ref().unwrap() {
                        for (_, (f, c)) in feature_groups(node, r) {
                            fp.add(&f, c);
                        }
                    }
                }
                if fp.is_empty() {
                    return Err(FeatureError::EmptyPool);
                }
                let lm = fit_layer(&fp, config.q_walk, config.l_rw, Branch::Walk, TAG_RW, layer)?;
                if layer + 1 < config.layers {
                    rows = collect(par_map(&walks, |gi, gw| {
                        gw.rw.as_ref().unwrap()
                            .iter()
                            .map(|w| walk_node(w, &rows[gi], &lm).map(|e| unit(&e)))
                            .collect::<Result<Vec<_>, _>>()
                    }))?;
                }
                walk_layers.push(lm);
            }
        }

        let mut aw_layers = Vec::new();
        if config.branches.aw() {
            let mut fp = WeightedPool::new();
            for gw in &walks {
                for node in gw.aw_counts.as_ref().unwrap() {
                    for (aw, &c) in node {
                        fp.add(&encode_aw(aw, config.l_aw)?, c);
                    }
                }
            }
            if fp.is_empty() {
                return Err(FeatureError::EmptyPool);
            }
            let first = fit_layer(&fp, config.q_aw, config.l_aw, Branch::Aw, TAG_AW, 0)?;
            let aw_depth = if config.stack_aw { config.layers } else { 1 };
            if aw_depth > 1 {
                let mut rows = collect(par_map(&walks, |_, gw| {
                    gw.aw_counts.as_ref().unwrap()
                        .iter()
                        .map(|c| aw_node(c, &first).map(|e| unit(&e)))
                        .collect::<Result<Vec<_>, _>>()
                }))?;
                aw_layers.push(first);
                for layer in 1..aw_depth {
                    let mut fp = WeightedPool::new();
                    for (gw, r) in walks.iter().zip(&rows) {
                        for node in gw.aw.as_ref().unwrap() {
                            for (_, (f, c)) in feature_groups(node, r) {
                                fp.add(&f, c);
                            }
                        }
                    }
                    let lm = fit_layer(&fp, config.q_aw, config.l_aw, Branch::Walk, TAG_AW, layer)?;
                    if layer + 1 < aw_depth {
                        rows = collect(par_map(&walks, |gi, gw| {
                            gw.aw.as_ref().unwrap()
                                .iter()
                                .map(|w| walk_node(w, &rows[gi], &lm).map(|e| unit(&e)))
                                .collect::<Result<Vec<_>, _>>()
                        }))?;
                    }
                    aw_layers.push(lm);
                }
            } else {
                aw_layers.push(first);
            }
        }

        Ok(EmbeddingModel {
            config: config.clone(),
            walk_layers,
            aw_layers,
            fitted_on: pool.to_vec(),
        })
    }

    /// Node embeddings of `g` through every layer. `graph_index` keys the sampling streams.
    pub fn embed_nodes(&self, g: &Graph, graph_index: usize) -> Result<NodeEmbeddings, FeatureError> {
        let gw = self.walks_for(g, graph_index)?;
        let walk = match (&gw.rw, self.walk_layers.is_empty()) {
            (Some(walks), false) => {
                let mut rows: Vec<Vec<f64>> = g.attributes().iter().map(|a| unit(a)).collect();
                let mut out = Vec::new();
                for (k, lm) in self.walk_layers.iter().enumerate() {
                    out = walks
                        .iter()
                        .map(|w| walk_node(w, &rows, lm))
                        .collect::<Result<Vec<_>, _>>()?;
                    if k + 1 < self.walk_layers.len() {
                        rows = out.iter().map(|e| unit(e)).collect();
                    }
                }
                Some(out)
            }
            _ => None,
        };
        let aw = match (&gw.aw_counts, self.aw_layers.split_first()) {
            (Some(counts), Some((first, rest))) => {
                let mut out = counts
                    .iter()
                    .map(|c| aw_node(c, first))
                    .collect::<Result<Vec<_>, _>>()?;
                for lm in rest {
                    let rows: Vec<Vec<f64>> = out.iter().map(|e| unit(e)).collect();
                    out = gw
                        .aw
                        .as_ref()
                        .expect("stacked AW layers need raw walks")
                        .iter()
                        .map(|w| walk_node(w, &rows, lm))
                        .collect::<Result<Vec<_>, _>>()?;
                }
                Some(out)
            }
            _ => None,
        };
        Ok(NodeEmbeddings { walk, aw })
    }

    /// `Psi_AR(G)`: node embeddings concatenated per node, summed over nodes.
    pub fn embed_graph(&self, g: &Graph, graph_index: usize) -> Result<Vec<f64>, FeatureError> {
        Ok(graph_pool(&self.embed_nodes(g, graph_index)?.combined(), self.config.output_dim()))
    }

    /// Graph-level embeddings of `graphs`, row `i` keyed by graph index `i`.
    pub fn embed_collection(&self, graphs: &[Graph]) -> Result<EmbeddingMatrix, FeatureError> {
        let rows = collect(par_map(graphs, |i, g| self.embed_graph(g, i)))?;
        Ok(EmbeddingMatrix {
            level: Level::Graph,
            ids: (0..graphs.len()).collect(),
            rows,
            q_walk: self.config.q_walk_out(),
            q_aw: self.config.q_aw_out(),
        })
    }

    /// Node-level embeddings of one graph.
    pub fn embed_node_matrix(&self, g: &Graph, graph_index: usize) -> Result<EmbeddingMatrix, FeatureError> {
        let rows = self.embed_nodes(g, graph_index)?.combined();
        Ok(EmbeddingMatrix {
            level: Level::Node,
            ids: (0..g.node_count()).collect(),
            rows,
            q_walk: self.config.q_walk_out(),
            q_aw: self.config.q_aw_out(),
        })
    }
}

/// Enumerates every walk of `l` nodes from each node of `g`, sampling `m` walks
/// instead at nodes past the cap when the fallback is on.
fn enumerate_or_sample<T>(
    config: &EmbeddingConfig,
    g: &Graph,
    graph_index: usize,
    l: usize,
    seed: u64,
    per_node: impl Fn(Vec<Walk>) -> T,
) -> Result<Vec<T>, FeatureError> {
    let cap = config.enumeration_cap;
    let counts = walk_counts(g, l);
    let overflow = counts.iter().filter(|&&c| c > cap as f64).count();
    if overflow > 0 && config.sampling_fallback {
        log::warn!(
            "graph {graph_index}: {overflow} node(s) exceed {cap} walks of length {l}; sampling {} walks there",
            config.m
        );
    }
    (0..g.node_count())
        .map(|u| {
            if counts[u] > cap as f64 && config.sampling_fallback {
                Ok(per_node(sample_walks(g, u, l, config.m, seed)))
            } else {
                enumerate_walks(g, u, l, cap).map(&per_node).map_err(FeatureError::from)
            }
        })
        .collect()
}

fn walks_for(config: &EmbeddingConfig, g: &Graph, graph_index: usize) -> Result<GraphWalks, FeatureError> {
    let rw = if config.branches.walk() {
        let seed = derive_seed(config.seed, &[TAG_RW, graph_index as u64]);
        Some(enumerate_or_sample(config, g, graph_index, config.l_rw, seed, |w| w)?)
    } else {
        None
    };
    let (mut aw_counts, mut aw) = (None, None);
    if config.branches.aw() {
        let seed = derive_seed(config.seed, &[TAG_AW, graph_index as u64]);
        let keep = config.stack_aw && config.layers > 1;
        let per_node = |w: Vec<Walk>| {
            let c = aw_groups(&w);
            (c, if keep { Some(w) } else { None })
        };
        let nodes: Vec<_> = if config.aw_enumerate {
            enumerate_or_sample(config, g, graph_index, config.l_aw, seed, per_node)?
        } else {
            (0..g.node_count()).map(|u| per_node(sample_walks(g, u, config.l_aw, config.m, seed))).collect()
        };
        let (c, w): (Vec<_>, Vec<_>) = nodes.into_iter().unzip();
        aw_counts = Some(c);
        if keep {
            aw = Some(w.into_iter().map(Option::unwrap).collect());
        }
    }
    Ok(GraphWalks { rw, aw_counts, aw })
}

/// Node-level output of every layer for `g` (the stacked GNN view).
pub fn stack_layers(g: &Graph, graph_index: usize, model: &EmbeddingModel) -> Result<EmbeddingMatrix, FeatureError> {
    model.embed_node_matrix(g, graph_index)
}

/// `[psi_walk(u) || psi_AW(u)]` for a single node.
pub fn psi_ar_node(g: &Graph, graph_index: usize, u: usize, model: &EmbeddingModel) -> Result<Vec<f64>, FeatureError> {
    Ok(model.embed_nodes(g, graph_index)?.combined().swap_remove(u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::degree_attributes;
    use crate::linalg::dot;
    use crate::nystrom::LandmarkSet;
    use crate::synthgen::{gen_basic, gen_ring_pair, BasicFamily};
    use crate::walks::{aw_universe, encode_aw};

    fn enumerate_config(branches: BranchSelection, l_aw: usize) -> EmbeddingConfig {
        EmbeddingConfig {
            branches,
            l_aw,
            aw_enumerate: true,
            q_aw: 8,
            q_walk: 8,
            ..EmbeddingConfig::default()
        }
    }

    #[test]
    fn single_aw_single_landmark() {
        let g = Graph::unattributed(2, [(0, 1)]).unwrap();
        let x = encode_aw(&AnonymousWalk::new(vec![1, 2, 1]), 3).unwrap();
        let lm = LandmarkSet::from_landmarks(&[x], 1.5, 3, 0.0, Branch::Aw, 1).unwrap();
        let psi = psi_aw_node(&g, 0, &lm, WalkSource::Sample { m: 1, seed: 0 }).unwrap();
        assert!((psi[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn isolated_nodes_embed_to_zero() {
        let g = Graph::unattributed(3, [(0, 1)]).unwrap();
        let feats: Vec<Vec<f64>> = aw_universe(3).iter().map(|a| encode_aw(a, 3).unwrap()).collect();
        let lm = LandmarkSet::from_landmarks(&feats, 1.5, 3, 1e-7, Branch::Aw, 2).unwrap();
        let psi = psi_aw_node(&g, 2, &lm, WalkSource::Sample { m: 5, seed: 0 }).unwrap();
        assert_eq!(psi, vec![0.0, 0.0]);
        let wl = LandmarkSet::from_landmarks(&[vec![1.0, 1.0]], 1.5, 2, 1e-7, Branch::Walk, 1).unwrap();
        assert_eq!(psi_walk_node(&g, 2, &wl, WalkSource::Enumerate { cap: 10 }).unwrap(), vec![0.0]);
    }

    #[test]
    fn symmetric_edge_endpoints_match() {
        let g = Graph::unattributed(2, [(0, 1)]).unwrap();
        let lm = LandmarkSet::from_landmarks(&[vec![1.0, 1.0], vec![1.0, 0.5]], 1.5, 2, 1e-7, Branch::Walk, 2).unwrap();
        let src = WalkSource::Enumerate { cap: 10 };
        assert_eq!(psi_walk_node(&g, 0, &lm, src).unwrap(), psi_walk_node(&g, 1, &lm, src).unwrap());
    }

    #[test]
    fn twin_nodes_share_embeddings() {
        // leaves 3 and 4 hang off node 2 of the path 0-1-2: twins
        let g = degree_attributes(&Graph::unattributed(5, [(0, 1), (1, 2), (2, 3), (2, 4)]).unwrap(), 3);
        let model = EmbeddingModel::fit(std::slice::from_ref(&g), &[0], &enumerate_config(BranchSelection::Both, 4)).unwrap();
        let e = model.embed_nodes(&g, 0).unwrap().combined();
        assert_eq!(e[3], e[4]);
        assert_ne!(e[0], e[3]);
    }

    #[test]
    fn output_dimensions() {
        let g = degree_attributes(&gen_basic(BasicFamily::Wheel, 7).unwrap(), 6);
        let graphs = vec![g];
        let cfg = EmbeddingConfig {
            q_aw: 5,
            q_walk: 4,
            ..EmbeddingConfig::default()
        };
        let m = EmbeddingModel::fit(&graphs, &[0], &cfg).unwrap();
        let emb = m.embed_collection(&graphs).unwrap();
        assert_eq!(emb.rows[0].len(), 9);
        assert_eq!(emb.dim(), 9);
        let two = EmbeddingConfig { layers: 2, ..cfg.clone() };
        let m2 = EmbeddingModel::fit(&graphs, &[0], &two).unwrap();
        assert_eq!(m2.walk_layers.len(), 2);
        assert_eq!(m2.walk_layers[1].feature_dim(), 3 * 4);
        assert_eq!(m2.aw_layers.len(), 1);
        let nodes = stack_layers(&graphs[0], 0, &m2).unwrap();
        assert_eq!(nodes.rows.len(), 7);
        assert!(nodes.rows.iter().all(|r| r.len() == 9));
        let stacked = EmbeddingConfig { stack_aw: true, ..two };
        assert_eq!(EmbeddingModel::fit(&graphs, &[0], &stacked).unwrap().aw_layers.len(), 2);
    }

    #[test]
    fn single_layer_matches_psi_functions() {
        let g = degree_attributes(&gen_basic(BasicFamily::Ladder, 4).unwrap(), 3);
        let cfg = enumerate_config(BranchSelection::Both, 5);
        let m = EmbeddingModel::fit(std::slice::from_ref(&g), &[0], &cfg).unwrap();
        let nodes = m.embed_nodes(&g, 0).unwrap();
        let src = WalkSource::Enumerate { cap: cfg.enumeration_cap };
        for u in 0..g.node_count() {
            let aw = psi_aw_node(&g, u, &m.aw_layers[0], src).unwrap();
            let wk = psi_walk_node(&g, u, &m.walk_layers[0], src).unwrap();
            assert_eq!(nodes.aw.as_ref().unwrap()[u], aw);
            assert_eq!(nodes.walk.as_ref().unwrap()[u], wk);
            let ar = psi_ar_node(&g, 0, u, &m).unwrap();
            assert_eq!(ar, concat(&wk, &aw));
        }
    }

    #[test]
    fn pool_is_sum_and_additive() {
        assert_eq!(graph_pool(&[vec![1.0, 2.0]], 2), vec![1.0, 2.0]);
        assert_eq!(graph_pool(&[], 3), vec![0.0; 3]);
        let (big, _) = gen_ring_pair(4).unwrap();
        let small = gen_basic(BasicFamily::Path, 4).unwrap();
        let union = big.disjoint_union(&small);
        let cfg = enumerate_config(BranchSelection::Aw, 5);
        let m = EmbeddingModel::fit(&[big.clone(), small.clone()], &[0, 1], &cfg).unwrap();
        let a = m.embed_graph(&big, 0).unwrap();
        let b = m.embed_graph(&small, 1).unwrap();
        let u = m.embed_graph(&union, 2).unwrap();
        for i in 0..a.len() {
            assert!((a[i] + b[i] - u[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn ring_pair_separated_by_aw_branch() {
        let (big, two) = gen_ring_pair(8).unwrap();
        let graphs = vec![big, two];
        let m = EmbeddingModel::fit(&graphs, &[0, 1], &enumerate_config(BranchSelection::Aw, 10)).unwrap();
        let a = m.embed_graph(&graphs[0], 0).unwrap();
        let b = m.embed_graph(&graphs[1], 1).unwrap();
        let d: f64 = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        assert!(d > 1e-3, "{d}");
        // node-level: u on R16 vs u on R8
        let na = &m.embed_nodes(&graphs[0], 0).unwrap().aw.unwrap()[0];
        let nb = &m.embed_nodes(&graphs[1], 1).unwrap().aw.unwrap()[0];
        assert!(na.iter().zip(nb).any(|(x, y)| (x - y).abs() > 1e-6));
    }

    #[test]
    fn concatenation_inner_product_is_sum() {
        let g = degree_attributes(&gen_basic(BasicFamily::Wheel, 6).unwrap(), 5);
        let h = degree_attributes(&gen_basic(BasicFamily::Cycle, 6).unwrap(), 5);
        let graphs = vec![g, h];
        let m = EmbeddingModel::fit(&graphs, &[0, 1], &enumerate_config(BranchSelection::Both, 4)).unwrap();
        let e0 = m.embed_nodes(&graphs[0], 0).unwrap();
        let e1 = m.embed_nodes(&graphs[1], 1).unwrap();
        let c0 = e0.combined();
        let c1 = e1.combined();
        let lhs = dot(&c0[0], &c1[0]);
        let rhs = dot(&e0.walk.as_ref().unwrap()[0], &e1.walk.as_ref().unwrap()[0])
            + dot(&e0.aw.as_ref().unwrap()[0], &e1.aw.as_ref().unwrap()[0]);
        assert!((lhs - rhs).abs() < 1e-9);
    }

    #[test]
    fn config_pairs_round_trip() {
        let cfg = EmbeddingConfig {
            alpha: 0.1 + 0.2,
            epsilon: 1e-7,
            branches: BranchSelection::Aw,
            seed: u64::MAX,
            ..EmbeddingConfig::default()
        };
        let mut back = EmbeddingConfig::default();
        for (k, v) in cfg.to_pairs() {
            assert!(back.set(&k, &v).unwrap());
        }
        assert_eq!(back, cfg);
        assert!(!back.set("nope", "1").unwrap());
        assert!(back.set("alpha", "x").is_err());
    }

    #[test]
    fn bad_config_rejected() {
        let g = gen_basic(BasicFamily::Cycle, 4).unwrap();
        let cfg = EmbeddingConfig { alpha: 0.0, ..EmbeddingConfig::default() };
        assert!(matches!(EmbeddingModel::fit(&[g], &[0], &cfg), Err(FeatureError::Config(_))));
    }
}
