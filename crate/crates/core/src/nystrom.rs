//! Nyström projection onto a landmark subspace of the Gaussian kernel.
//!
//! For landmarks `Z` (one per row) and a feature `x` with `|x|^2 = l`,
//! `k_gauss(z, x) = sigma(z . x)` with `sigma(t) = exp(alpha t - alpha l)`, so
//! the projection is `(sigma(Z Z^T) + eps I)^{-1/2} sigma(Z x)`.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use thiserror::Error;

use crate::landmarks::{kmeans_weighted, DEFAULT_MAX_ITERS, DEFAULT_SUBSAMPLE_CAP, DEFAULT_TOL};
use crate::linalg::{inv_sqrt_psd, sigma, LinalgError};
use crate::rng::rng_from;
use crate::walks::{aw_offsets, AnonymousWalk, WalkError};

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("feature has dimension {got}, landmarks expect {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("no features to fit landmarks on")]
    EmptyPool,
    #[error("{0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Walk,
    Aw,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Walk => "walk",
            Branch::Aw => "aw",
        }
    }
}

/// Fitted landmarks plus the precomputed `(sigma(Z Z^T) + eps I)^{-1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkSet {
    /// One landmark per row.
    pub z: DMatrix<f64>,
    pub alpha: f64,
    /// Walk length; also the squared norm `sigma` is centred on.
    pub l: usize,
    pub epsilon: f64,
    pub inv_sqrt_gram: DMatrix<f64>,
    pub branch: Branch,
    /// Length of projected vectors. At least `z.nrows()`; any extra trailing
    /// entries are zero (too few distinct features to fill every landmark).
    pub output_dim: usize,
}

impl LandmarkSet {
    pub fn from_landmarks(
        rows: &[Vec<f64>],
        alpha: f64,
        l: usize,
        epsilon: f64,
        branch: Branch,
        output_dim: usize,
    ) -> Result<Self, FeatureError> {
        if rows.is_empty() {
            return Err(FeatureError::EmptyPool);
        }
        let p = rows[0].len();
        if let Some(bad) = rows.iter().find(|r| r.len() != p) {
            return Err(FeatureError::DimensionMismatch {
                expected: p,
                got: bad.len(),
            });
        }
        let z = DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]);
        let gram = &z * z.transpose();
        let k = gram.map(|t| sigma(t, alpha, l as f64));
        let inv_sqrt_gram = inv_sqrt_psd(&k, epsilon)?;
        Ok(LandmarkSet {
            z,
            alpha,
            l,
            epsilon,
            inv_sqrt_gram,
            branch,
            output_dim: output_dim.max(rows.len()),
        })
    }

    /// Number of landmarks actually fitted.
    pub fn q(&self) -> usize {
        self.z.nrows()
    }

    pub fn feature_dim(&self) -> usize {
        self.z.ncols()
    }

    fn check_dim(&self, x: &[f64]) -> Result<(), FeatureError> {
        if x.len() != self.feature_dim() {
            return Err(FeatureError::DimensionMismatch {
                expected: self.feature_dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `sigma(Z x)` without the Gram correction.
    pub fn activations(&self, x: &[f64]) -> Result<DVector<f64>, FeatureError> {
        self.check_dim(x)?;
        let l = self.l as f64;
        Ok(DVector::from_fn(self.q(), |i, _| {
            let t: f64 = self.z.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
            sigma(t, self.alpha, l)
        }))
    }

    /// `sigma(Z R(aw))` using the one-hot structure of `R(aw)`.
    pub fn aw_activations(&self, aw: &AnonymousWalk) -> Result<DVector<f64>, FeatureError> {
        let l = self.l;
        if aw.len() != l {
            return Err(WalkError::LengthMismatch { got: aw.len(), l }.into());
        }
        if let Some(&label) = aw.labels.iter().find(|&&x| x == 0 || x as usize > l) {
            return Err(WalkError::LabelTooLarge { label, l }.into());
        }
        if self.feature_dim() != l * l {
            return Err(FeatureError::DimensionMismatch {
                expected: self.feature_dim(),
                got: l * l,
            });
        }
        let offsets: Vec<usize> = aw_offsets(aw, l).collect();
        Ok(DVector::from_fn(self.q(), |i, _| {
            let t: f64 = offsets.iter().map(|&o| self.z[(i, o)]).sum();
            sigma(t, self.alpha, l as f64)
        }))
    }

    /// Applies the Gram correction to (a sum of) activations and pads to `output_dim`.
    pub fn finish(&self, activations: &DVector<f64>) -> Vec<f64> {
        let mut out: Vec<f64> = (&self.inv_sqrt_gram * activations).iter().copied().collect();
        out.resize(self.output_dim, 0.0);
        out
    }

    /// `psi(x) = (sigma(Z Z^T) + eps I)^{-1/2} sigma(Z x)`.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>, FeatureError> {
        Ok(self.finish(&self.activations(x)?))
    }

    pub fn project_aw(&self, aw: &AnonymousWalk) -> Result<Vec<f64>, FeatureError> {
        Ok(self.finish(&self.aw_activations(aw)?))
    }
}

/// Features with multiplicities, keyed by bit pattern. Insertion order is kept.
#[derive(Debug, Clone, Default)]
pub struct WeightedPool {
    index: HashMap<Vec<u64>, usize>,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl WeightedPool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: &[f64], weight: f64) {
        let key: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
        match self.index.get(&key) {
            Some(&i) => self.weights[i] += weight,
            None => {
                self.index.insert(key, self.points.len());
                self.points.push(x.to_vec());
                self.weights.push(weight);
            }
        }
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Uniform subsample of `cap` items from the expanded multiset (integer
    /// weights assumed), regrouped. Unchanged when the multiset fits.
    pub fn subsampled(&self, cap: usize, seed: u64) -> WeightedPool {
        let total = self.total_weight().round() as usize;
        if total <= cap {
            return self.clone();
        }
        let mut bounds = Vec::with_capacity(self.weights.len());
        let mut acc = 0usize;
        for w in &self.weights {
            acc += w.round() as usize;
            bounds.push(acc);
        }
        let mut rng = rng_from(seed, &[0x706f_6f6c]);
        let mut counts = vec![0.0; self.points.len()];
        for i in sample(&mut rng, total, cap) {
            let g = bounds.partition_point(|&b| b <= i);
            counts[g] += 1.0;
        }
        let mut out = WeightedPool::new();
        for (p, c) in self.points.iter().zip(counts) {
            if c > 0.0 {
                out.add(p, c);
            }
        }
        out
    }
}

/// Clustering settings for landmark fitting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iters: usize,
    pub tol: f64,
    pub subsample_cap: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iters: DEFAULT_MAX_ITERS,
            tol: DEFAULT_TOL,
            subsample_cap: DEFAULT_SUBSAMPLE_CAP,
        }
    }
}

/// Fits `q` landmarks by q-means over `features` and precomputes the Gram correction.
pub fn fit_landmark_set(
    features: &[Vec<f64>],
    q: usize,
    alpha: f64,
    l: usize,
    epsilon: f64,
    seed: u64,
    branch: Branch,
) -> Result<LandmarkSet, FeatureError> {
    let mut pool = WeightedPool::new();
    for f in features {
        pool.add(f, 1.0);
    }
    fit_landmarks_from_pool(&pool, q, alpha, l, epsilon, seed, branch, FitOptions::default())
}

#[allow(clippy::too_many_arguments)]
pub fn fit_landmarks_from_pool(
    pool: &WeightedPool,
    q: usize,
    alpha: f64,
    l: usize,
    epsilon: f64,
    seed: u64,
    branch: Branch,
    opts: FitOptions,
) -> Result<LandmarkSet, FeatureError> {
    if pool.is_empty() {
        return Err(FeatureError::EmptyPool);
    }
    let p = pool.points[0].len();
    if let Some(bad) = pool.points.iter().find(|x| x.len() != p) {
        return Err(FeatureError::DimensionMismatch {
            expected: p,
            got: bad.len(),
        });
    }
    let pool = pool.subsampled(opts.subsample_cap, seed);
    let km = kmeans_weighted(&pool.points, &pool.weights, q, opts.max_iters, opts.tol, seed);
    LandmarkSet::from_landmarks(&km.centroids, alpha, l, epsilon, branch, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, gaussian_kernel};
    use crate::walks::{aw_universe, encode_aw};
    use approx::assert_abs_diff_eq;

    fn universe_features(l: usize) -> Vec<Vec<f64>> {
        aw_universe(l).iter().map(|a| encode_aw(a, l).unwrap()).collect()
    }

    #[test]
    fn single_landmark_projects_to_one() {
        let x = encode_aw(&AnonymousWalk::new(vec![1, 2, 1, 3]), 4).unwrap();
        let lm = LandmarkSet::from_landmarks(&[x.clone()], 1.5, 4, 0.0, Branch::Aw, 1).unwrap();
        let p = lm.project(&x).unwrap();
        assert_abs_diff_eq!(p[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(dot(&p, &p), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn full_universe_is_exact() {
        let feats = universe_features(4);
        let lm = LandmarkSet::from_landmarks(&feats, 1.5, 4, 0.0, Branch::Aw, feats.len()).unwrap();
        let proj: Vec<_> = feats.iter().map(|x| lm.project(x).unwrap()).collect();
        for (i, xi) in feats.iter().enumerate() {
            for (j, xj) in feats.iter().enumerate() {
                let k = gaussian_kernel(xi, xj, 1.5).unwrap();
                assert_abs_diff_eq!(dot(&proj[i], &proj[j]), k, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn aw_fast_path_matches_dense() {
        let feats = universe_features(5);
        let lm = fit_landmark_set(&feats, 6, 1.5, 5, 1e-7, 3, Branch::Aw).unwrap();
        for a in aw_universe(5) {
            let dense = lm.project(&encode_aw(&a, 5).unwrap()).unwrap();
            let sparse = lm.project_aw(&a).unwrap();
            for (x, y) in dense.iter().zip(&sparse) {
                assert_abs_diff_eq!(x, y, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn identical_features_collapse_to_one_landmark() {
        let x = encode_aw(&AnonymousWalk::new(vec![1, 2, 1]), 3).unwrap();
        let lm = fit_landmark_set(&vec![x.clone(); 20], 4, 1.5, 3, 1e-7, 0, Branch::Aw).unwrap();
        assert_eq!(lm.q(), 1);
        let p = lm.project(&x).unwrap();
        assert_eq!(p.len(), 4);
        assert!(p.iter().all(|v| v.is_finite()));
        assert_eq!(&p[1..], &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn q_one_is_mean() {
        let feats = universe_features(4);
        let lm = fit_landmark_set(&feats, 1, 1.5, 4, 1e-7, 0, Branch::Aw).unwrap();
        for j in 0..16 {
            let mean = feats.iter().map(|f| f[j]).sum::<f64>() / feats.len() as f64;
            assert_abs_diff_eq!(lm.z[(0, j)], mean, epsilon = 1e-12);
        }
    }

    #[test]
    fn fitting_is_deterministic_and_checks_dims() {
        let feats = universe_features(5);
        let a = fit_landmark_set(&feats, 8, 1.5, 5, 1e-7, 11, Branch::Aw).unwrap();
        let b = fit_landmark_set(&feats, 8, 1.5, 5, 1e-7, 11, Branch::Aw).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            a.project(&[1.0, 2.0]),
            Err(FeatureError::DimensionMismatch { expected: 25, got: 2 })
        ));
        assert_eq!(
            fit_landmark_set(&[], 3, 1.5, 5, 1e-7, 0, Branch::Aw),
            Err(FeatureError::EmptyPool)
        );
    }

    #[test]
    fn gram_entries_in_unit_interval() {
        let feats = universe_features(5);
        let lm = fit_landmark_set(&feats, 10, 1.5, 5, 1e-7, 2, Branch::Aw).unwrap();
        let g = (&lm.z * lm.z.transpose()).map(|t| sigma(t, 1.5, 5.0));
        assert!(g.iter().all(|&v| v > 0.0 && v <= 1.0 + 1e-12));
    }

    #[test]
    fn pool_subsample_preserves_total() {
        let mut pool = WeightedPool::new();
        pool.add(&[1.0], 500.0);
        pool.add(&[2.0], 300.0);
        pool.add(&[1.0], 200.0);
        assert_eq!(pool.points.len(), 2);
        let s = pool.subsampled(100, 9);
        assert_eq!(s.total_weight(), 100.0);
        assert_eq!(pool.subsampled(5000, 9).weights, pool.weights);
    }
}
