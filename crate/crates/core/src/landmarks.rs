//! q-means (k-means) used to pick Nyström landmarks without supervision.

use std::collections::HashMap;

use rand::seq::index::sample;
use rand::Rng as _;

use crate::linalg::squared_distance;
use crate::rng::rng_from;

pub const DEFAULT_MAX_ITERS: usize = 100;
pub const DEFAULT_TOL: f64 = 1e-6;
/// Features kept per layer before clustering.
pub const DEFAULT_SUBSAMPLE_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    /// Weighted sum of squared distances to the assigned centroid.
    pub inertia: f64,
    pub iterations_run: usize,
    /// Inertia after initialization and after every accepted Lloyd step.
    pub inertia_history: Vec<f64>,
}

/// Unweighted k-means with k-means++ seeding.
pub fn kmeans(points: &[Vec<f64>], q: usize, max_iters: usize, tol: f64, seed: u64) -> KMeansResult {
    kmeans_weighted(points, &vec![1.0; points.len()], q, max_iters, tol, seed)
}

/// Collapses bitwise-equal points into one with a multiplicity weight,
/// keeping first-occurrence order.
pub fn dedupe_weighted(points: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut uniq = Vec::new();
    let mut weights = Vec::new();
    for p in points {
        let key: Vec<u64> = p.iter().map(|x| x.to_bits()).collect();
        match index.get(&key) {
            Some(&i) => weights[i] += 1.0,
            None => {
                index.insert(key, uniq.len());
                uniq.push(p.clone());
                weights.push(1.0);
            }
        }
    }
    (uniq, weights)
}

/// Points plus, when mostly zero, their nonzero entries and squared norms, so
/// distances cost `O(nnz)` through `|p|^2 + |c|^2 - 2 p.c`.
struct Indexed<'a> {
    points: &'a [Vec<f64>],
    sparse: Option<Vec<Vec<(usize, f64)>>>,
    norms: Vec<f64>,
}

impl<'a> Indexed<'a> {
    fn new(points: &'a [Vec<f64>]) -> Self {
        let dim = points[0].len();
        let nnz: usize = points.iter().map(|p| p.iter().filter(|x| **x != 0.0).count()).sum();
        let sparse = (nnz * 4 < dim * points.len()).then(|| {
            points
                .iter()
                .map(|p| p.iter().copied().enumerate().filter(|(_, x)| *x != 0.0).collect())
                .collect()
        });
        let norms = points.iter().map(|p| p.iter().map(|x| x * x).sum()).collect();
        Indexed { points, sparse, norms }
    }

    fn distance(&self, i: usize, c: &[f64], c_norm: f64) -> f64 {
        match &self.sparse {
            Some(nz) => {
                let dot: f64 = nz[i].iter().map(|&(j, x)| x * c[j]).sum();
                (self.norms[i] + c_norm - 2.0 * dot).max(0.0)
            }
            None => squared_distance(&self.points[i], c),
        }
    }

    fn nearest(&self, i: usize, centroids: &[Vec<f64>], c_norms: &[f64]) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (j, c) in centroids.iter().enumerate() {
            let d = self.distance(i, c, c_norms[j]);
            if d < best.1 {
                best = (j, d);
            }
        }
        best
    }

    fn add_to(&self, i: usize, w: f64, sum: &mut [f64]) {
        match &self.sparse {
            Some(nz) => {
                for &(j, x) in &nz[i] {
                    sum[j] += w * x;
                }
            }
            None => {
                for (s, x) in sum.iter_mut().zip(&self.points[i]) {
                    *s += w * x;
                }
            }
        }
    }
}

fn norm2(c: &[f64]) -> f64 {
    c.iter().map(|x| x * x).sum()
}

fn distinct_count(points: &[Vec<f64>]) -> usize {
    let mut keys: Vec<Vec<u64>> = points
        .iter()
        .map(|p| p.iter().map(|x| x.to_bits()).collect())
        .collect();
    keys.sort_unstable();
    keys.dedup();
    keys.len()
}

/// k-means over points with positive weights. Equivalent to clustering the
/// multiset where each point is repeated `weight` times.
///
/// Ties between equidistant centroids go to the lowest index. Empty clusters
/// are re-seeded with the point farthest from its centroid. A Lloyd step that
/// would raise the inertia (floating-point noise at convergence) is rejected
/// and iteration stops, so `inertia_history` never increases.
pub fn kmeans_weighted(
    points: &[Vec<f64>],
    weights: &[f64],
    q: usize,
    max_iters: usize,
    tol: f64,
    seed: u64,
) -> KMeansResult {
    assert!(!points.is_empty(), "kmeans needs at least one point");
    assert_eq!(points.len(), weights.len());
    let distinct = distinct_count(points);
    let q = if q > distinct {
        log::warn!("q = {q} exceeds {distinct} distinct points; using q = {distinct}");
        distinct
    } else {
        q.max(1)
    };
    let mut rng = rng_from(seed, &[0x6b6d_6561_6e73]);
    let ix = Indexed::new(points);

    // k-means++
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(q);
    let total: f64 = weights.iter().sum();
    centroids.push(points[pick(weights, total, rng.gen::<f64>())].clone());
    let c0 = norm2(&centroids[0]);
    let mut best: Vec<f64> = (0..points.len()).map(|i| ix.distance(i, &centroids[0], c0)).collect();
    while centroids.len() < q {
        let scores: Vec<f64> = best.iter().zip(weights).map(|(d, w)| d * w).collect();
        let sum: f64 = scores.iter().sum();
        let next = if sum > 0.0 {
            pick(&scores, sum, rng.gen::<f64>())
        } else {
            // all remaining mass sits on chosen centroids
            (0..points.len()).max_by(|&a, &b| best[a].total_cmp(&best[b])).unwrap()
        };
        let c = points[next].clone();
        let cn = norm2(&c);
        for (i, b) in best.iter_mut().enumerate() {
            *b = b.min(ix.distance(i, &c, cn));
        }
        centroids.push(c);
    }

    let (mut assignments, mut dists) = assign(&ix, &centroids);
    let mut inertia = weighted_sum(&dists, weights);
    let mut history = vec![inertia];
    let mut iterations_run = 0;
    for it in 1..=max_iters {
        let updated = update(&ix, weights, &assignments, &dists, &centroids);
        let shift = centroids
            .iter()
            .zip(&updated)
            .map(|(a, b)| squared_distance(a, b).sqrt())
            .fold(0.0, f64::max);
        let (next_assign, next_dists) = assign(&ix, &updated);
        let next_inertia = weighted_sum(&next_dists, weights);
        if next_inertia > inertia {
            break;
        }
        centroids = updated;
        assignments = next_assign;
        dists = next_dists;
        inertia = next_inertia;
        history.push(inertia);
        iterations_run = it;
        if shift < tol {
            break;
        }
    }
    KMeansResult {
        centroids,
        assignments,
        inertia,
        iterations_run,
        inertia_history: history,
    }
}

fn pick(scores: &[f64], total: f64, u: f64) -> usize {
    let target = u * total;
    let mut acc = 0.0;
    for (i, s) in scores.iter().enumerate() {
        acc += s;
        if acc > target && *s > 0.0 {
            return i;
        }
    }
    scores.iter().rposition(|&s| s > 0.0).unwrap_or(0)
}

fn weighted_sum(d: &[f64], w: &[f64]) -> f64 {
    d.iter().zip(w).map(|(a, b)| a * b).sum()
}

#[cfg(feature = "parallel")]
fn assign(ix: &Indexed, centroids: &[Vec<f64>]) -> (Vec<usize>, Vec<f64>) {
    use rayon::prelude::*;
    let norms: Vec<f64> = centroids.iter().map(|c| norm2(c)).collect();
    (0..ix.points.len()).into_par_iter().map(|i| ix.nearest(i, centroids, &norms)).unzip()
}

#[cfg(not(feature = "parallel"))]
fn assign(ix: &Indexed, centroids: &[Vec<f64>]) -> (Vec<usize>, Vec<f64>) {
    let norms: Vec<f64> = centroids.iter().map(|c| norm2(c)).collect();
    (0..ix.points.len()).map(|i| ix.nearest(i, centroids, &norms)).unzip()
}

fn update(
    ix: &Indexed,
    weights: &[f64],
    assignments: &[usize],
    dists: &[f64],
    old: &[Vec<f64>],
) -> Vec<Vec<f64>> {
    let points = ix.points;
    let dim = points[0].len();
    let q = old.len();
    let mut sums = vec![vec![0.0; dim]; q];
    let mut mass = vec![0.0; q];
    for (i, (&w, &a)) in weights.iter().zip(assignments).enumerate() {
        mass[a] += w;
        ix.add_to(i, w, &mut sums[a]);
    }
    let mut taken = vec![false; points.len()];
    let mut order: Vec<usize> = Vec::new();
    if mass.iter().any(|&m| m <= 0.0) {
        order = (0..points.len()).collect();
        order.sort_by(|&a, &b| dists[b].total_cmp(&dists[a]).then(a.cmp(&b)));
    }
    let mut far = order.into_iter();
    (0..q)
        .map(|j| {
            if mass[j] > 0.0 {
                sums[j].iter().map(|s| s / mass[j]).collect()
            } else {
                match far.find(|&i| !taken[i]) {
                    Some(i) => {
                        taken[i] = true;
                        points[i].clone()
                    }
                    None => old[j].clone(),
                }
            }
        })
        .collect()
}

/// Uniform sample of `cap` items without replacement (original order kept);
/// the input unchanged when it has at most `cap` items.
pub fn subsample<T: Clone>(points: &[T], cap: usize, seed: u64) -> Vec<T> {
    if points.len() <= cap {
        return points.to_vec();
    }
    let mut rng = rng_from(seed, &[0x7375_6273]);
    let mut idx = sample(&mut rng, points.len(), cap).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| points[i].clone()).collect()
}
