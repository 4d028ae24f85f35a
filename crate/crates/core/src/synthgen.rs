//! Deterministic generators for the synthetic benchmark collections.
//!
//! * `Structure`: cycles, wheels, paths and ladders of 20..=80 nodes with 10%
//!   extra random edges, 100 graphs per family.
//! * `Regular`: 5-regular graphs on 20 nodes, either connected or two disjoint
//!   10-node components, 50 of each.
//! * Ring pairs `R_{2k}` / `R_{k,k}`, which colour refinement cannot tell apart.
//!
//! Synthetic graphs carry no native attributes; collections attach one-hot
//! degrees the same way the dataset loader does.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng as _;
use thiserror::Error;

use crate::graph::{AttributeKind, Graph, GraphCollection};
use crate::rng::{rng_from, Rng};

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("{family} needs size >= {min}, got {got}")]
    TooSmall {
        family: &'static str,
        min: usize,
        got: usize,
    },
    #[error("no {d}-regular graph on {n} nodes: need n*d even and d < n")]
    BadRegular { n: usize, d: usize },
    #[error("pairing model gave up after {0} attempts")]
    RetriesExhausted(usize),
    #[error("negative noise fraction {0}")]
    BadFraction(f64),
}

/// Retry cap for the pairing-model sampler.
pub const REGULAR_RETRY_CAP: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasicFamily {
    Cycle,
    Wheel,
    Path,
    Ladder,
}

impl BasicFamily {
    pub const ALL: [BasicFamily; 4] = [
        BasicFamily::Cycle,
        BasicFamily::Wheel,
        BasicFamily::Path,
        BasicFamily::Ladder,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BasicFamily::Cycle => "cycle",
            BasicFamily::Wheel => "wheel",
            BasicFamily::Path => "path",
            BasicFamily::Ladder => "ladder",
        }
    }
}

/// Builds one basic structure. `size` is the node count, except for ladders
/// where it is the number of rungs (`2 * size` nodes).
pub fn gen_basic(family: BasicFamily, size: usize) -> Result<Graph, SynthError> {
    let min = match family {
        BasicFamily::Cycle | BasicFamily::Wheel => 3,
        BasicFamily::Path | BasicFamily::Ladder => 2,
    };
    if size < min {
        return Err(SynthError::TooSmall {
            family: family.name(),
            min,
            got: size,
        });
    }
    let (n, edges): (usize, Vec<(usize, usize)>) = match family {
        BasicFamily::Cycle => (size, cycle_edges(0, size).collect()),
        BasicFamily::Wheel => {
            let rim = size - 1;
            let mut e: Vec<_> = cycle_edges(1, rim).collect();
            e.extend((1..size).map(|v| (0, v)));
            (size, e)
        }
        BasicFamily::Path => (size, (1..size).map(|v| (v - 1, v)).collect()),
        BasicFamily::Ladder => {
            let r = size;
            let mut e = Vec::with_capacity(3 * r - 2);
            for i in 0..r {
                e.push((i, r + i));
                if i + 1 < r {
                    e.push((i, i + 1));
                    e.push((r + i, r + i + 1));
                }
            }
            (2 * r, e)
        }
    };
    Ok(Graph::unattributed(n, edges).expect("generator emits valid graphs"))
}

fn cycle_edges(start: usize, n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).map(move |i| (start + i, start + (i + 1) % n))
}

/// Result of [`add_noise_edges`].
#[derive(Debug, Clone)]
pub struct NoisyGraph {
    pub graph: Graph,
    pub added: usize,
    /// Requested edges that could not be placed because the graph became complete.
    pub shortfall: usize,
}

/// Adds `ceil(fraction * |E|)` uniformly chosen new edges (no self-loops, no duplicates).
pub fn add_noise_edges(g: &Graph, fraction: f64, seed: u64) -> Result<NoisyGraph, SynthError> {
    if !(fraction >= 0.0) {
        return Err(SynthError::BadFraction(fraction));
    }
    let wanted = (fraction * g.edge_count() as f64).ceil() as usize;
    if wanted == 0 {
        return Ok(NoisyGraph {
            graph: g.clone(),
            added: 0,
            shortfall: 0,
        });
    }
    let n = g.node_count();
    let mut free: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter(|&(u, v)| !g.has_edge(u, v))
        .collect();
    let mut rng = rng_from(seed, &[0x6e6f_6973_65]);
    let added = wanted.min(free.len());
    let (chosen, _) = free.partial_shuffle(&mut rng, added);
    let graph = Graph::new(
        n,
        g.edges().iter().copied().chain(chosen.iter().copied()),
        g.attributes().to_vec(),
        g.label(),
    )
    .expect("noise keeps graph valid");
    if added < wanted {
        log::warn!("graph is complete: added {added} of {wanted} noise edges");
    }
    Ok(NoisyGraph {
        graph,
        added,
        shortfall: wanted - added,
    })
}

/// Samples a simple `d`-regular graph on `n` nodes with the pairing model,
/// rejecting pairings with loops or multi-edges (and disconnected ones when
/// `connected` is set).
pub fn random_regular(n: usize, d: usize, connected: bool, rng: &mut Rng) -> Result<Graph, SynthError> {
    if d >= n || (n * d) % 2 != 0 {
        return Err(SynthError::BadRegular { n, d });
    }
    let mut stubs: Vec<usize> = (0..n).flat_map(|u| std::iter::repeat(u).take(d)).collect();
    'attempt: for _ in 0..REGULAR_RETRY_CAP {
        stubs.shuffle(rng);
        let mut seen = HashSet::with_capacity(n * d / 2);
        for pair in stubs.chunks_exact(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v || !seen.insert((u, v)) {
                continue 'attempt;
            }
        }
        let g = Graph::unattributed(n, seen).expect("simple pairing");
        if connected && g.component_count() != 1 {
            continue;
        }
        return Ok(g);
    }
    Err(SynthError::RetriesExhausted(REGULAR_RETRY_CAP))
}

/// `(R_{2k}, R_{k,k})`: one ring of `2k` nodes and two disjoint rings of `k` nodes.
pub fn gen_ring_pair(k: usize) -> Result<(Graph, Graph), SynthError> {
    if k < 3 {
        return Err(SynthError::TooSmall {
            family: "ring",
            min: 3,
            got: k,
        });
    }
    let big = gen_basic(BasicFamily::Cycle, 2 * k)?;
    let small = gen_basic(BasicFamily::Cycle, k)?;
    Ok((big, small.disjoint_union(&small)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthFamily {
    Basic(BasicFamily),
    RegularConnected,
    RegularTwoComponents,
    Ring,
    TwoRings,
}

/// Parameters for one synthetic graph.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub family: SynthFamily,
    /// Node count (rungs for ladders, ring length for rings, component size for
    /// `RegularTwoComponents` and `TwoRings`).
    pub size: usize,
    /// Degree for the regular families; ignored otherwise.
    pub degree: usize,
    pub noise_fraction: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn generate(&self) -> Result<Graph, SynthError> {
        let mut rng = rng_from(self.seed, &[0x7265_6775_6c61_72]);
        let g = match self.family {
            SynthFamily::Basic(f) => gen_basic(f, self.size)?,
            SynthFamily::Ring => gen_basic(BasicFamily::Cycle, self.size)?,
            SynthFamily::TwoRings => gen_ring_pair(self.size)?.1,
            SynthFamily::RegularConnected => random_regular(self.size, self.degree, true, &mut rng)?,
            SynthFamily::RegularTwoComponents => {
                let a = random_regular(self.size, self.degree, false, &mut rng)?;
                let b = random_regular(self.size, self.degree, false, &mut rng)?;
                a.disjoint_union(&b)
            }
        };
        Ok(add_noise_edges(&g, self.noise_fraction, self.seed)?.graph)
    }
}

/// 400 graphs: 100 each of cycle, wheel, path, ladder (class = family index),
/// node counts uniform on `[20, 80]`, plus 10% noise edges.
pub fn gen_structure_dataset(seed: u64) -> GraphCollection {
    gen_structure_sized(seed, 100)
}

/// [`gen_structure_dataset`] with `per_class` graphs per family.
pub fn gen_structure_sized(seed: u64, per_class: usize) -> GraphCollection {
    let mut graphs = Vec::with_capacity(4 * per_class);
    for (class, family) in BasicFamily::ALL.into_iter().enumerate() {
        for i in 0..per_class {
            let gseed = crate::rng::derive_seed(seed, &[class as u64, i as u64]);
            let mut rng = rng_from(gseed, &[]);
            let n: usize = rng.gen_range(20..=80);
            let size = if family == BasicFamily::Ladder { n / 2 } else { n };
            let g = gen_basic(family, size).expect("sizes are >= 20");
            let noisy = add_noise_edges(&g, 0.1, gseed).expect("valid fraction");
            graphs.push(noisy.graph.with_label(Some(class)));
        }
    }
    GraphCollection::new(graphs, 4, AttributeKind::None)
        .expect("uniform attributes")
        .with_degree_attributes()
}

/// 100 graphs: 50 connected 5-regular graphs on 20 nodes (class 0), 50 unions
/// of two 5-regular graphs on 10 nodes (class 1). No noise edges.
pub fn gen_regular_dataset(seed: u64) -> Result<GraphCollection, SynthError> {
    let mut graphs = Vec::with_capacity(100);
    for class in 0..2usize {
        for i in 0..50u64 {
            let spec = SynthSpec {
                family: if class == 0 {
                    SynthFamily::RegularConnected
                } else {
                    SynthFamily::RegularTwoComponents
                },
                size: if class == 0 { 20 } else { 10 },
                degree: 5,
                noise_fraction: 0.0,
                seed: crate::rng::derive_seed(seed, &[class as u64, i]),
            };
            graphs.push(spec.generate()?.with_label(Some(class)));
        }
    }
    Ok(GraphCollection::new(graphs, 2, AttributeKind::None)
        .expect("uniform attributes")
        .with_degree_attributes())
}
