//! Linear probes on fixed embeddings: stratified folds, standardization,
//! L2-regularized one-vs-rest logistic or squared-hinge models trained by
//! Newton's method, and the graph- and node-level evaluation protocols.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;

use crate::graph::GraphCollection;
use crate::model::{BranchSelection, EmbeddingConfig, EmbeddingModel};
use crate::nystrom::FeatureError;
use crate::rng::rng_from;

const TAG_FOLDS: u64 = 0x666f6c64;
const TAG_INNER: u64 = 0x696e6e;
const TAG_SPLIT: u64 = 0x73706c;

/// Default regularization grid.
pub const REG_GRID: [f64; 6] = [1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    Logistic,
    SquaredHinge,
}

impl LossKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LossKind::Logistic => "logistic",
            LossKind::SquaredHinge => "squared-hinge",
        }
    }
}

impl std::str::FromStr for LossKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "logistic" => Ok(LossKind::Logistic),
            "squared-hinge" | "svm" => Ok(LossKind::SquaredHinge),
            _ => Err(format!("unknown classifier {s:?} (logistic, squared-hinge)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierConfig {
    pub kind: LossKind,
    /// Candidates for the inner validation split; a single entry skips selection.
    pub reg_grid: Vec<f64>,
    pub max_iters: usize,
    pub grad_tol: f64,
    /// Stratified folds inside each training fold used to pick the regularization.
    pub inner_folds: usize,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            kind: LossKind::Logistic,
            reg_grid: REG_GRID.to_vec(),
            max_iters: 100,
            grad_tol: 1e-5,
            inner_folds: 5,
        }
    }
}

impl ClassifierConfig {
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let grid: Vec<String> = self.reg_grid.iter().map(|r| format!("{r:?}")).collect();
        vec![
            ("classifier".to_owned(), self.kind.as_str().to_owned()),
            ("reg_grid".to_owned(), grid.join(",")),
            ("classifier_max_iters".to_owned(), self.max_iters.to_string()),
            ("grad_tol".to_owned(), format!("{:?}", self.grad_tol)),
            ("inner_folds".to_owned(), self.inner_folds.to_string()),
        ]
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<bool, String> {
        let bad = || format!("bad value {value:?} for {key}");
        let v = value.trim();
        match key {
            "classifier" => self.kind = v.parse()?,
            "reg_grid" => {
                self.reg_grid = v
                    .split(',')
                    .map(|x| x.trim().parse::<f64>().map_err(|_| bad()))
                    .collect::<Result<_, _>>()?
            }
            "classifier_max_iters" => self.max_iters = v.parse().map_err(|_| bad())?,
            "grad_tol" => self.grad_tol = v.parse().map_err(|_| bad())?,
            "inner_folds" => self.inner_folds = v.parse().map_err(|_| bad())?,
            _ => return Ok(false),
        }
        Ok(true)
    }
}

/// Per-dimension affine map to zero mean and unit variance. Constant
/// dimensions map to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[&[f64]]) -> Self {
        let d = rows.first().map_or(0, |r| r.len());
        let n = rows.len().max(1) as f64;
        let mut mean = vec![0.0; d];
        for r in rows {
            for (m, x) in mean.iter_mut().zip(r.iter()) {
                *m += x / n;
            }
        }
        let mut var = vec![0.0; d];
        for r in rows {
            for ((v, x), m) in var.iter_mut().zip(r.iter()).zip(&mean) {
                *v += (x - m) * (x - m) / n;
            }
        }
        let scale = var
            .iter()
            .zip(&mean)
            .map(|(v, m)| {
                let sd = v.sqrt();
                if sd > 1e-12 * m.abs().max(1.0) {
                    1.0 / sd
                } else {
                    0.0
                }
            })
            .collect();
        Standardizer { mean, scale }
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((x, m), s)| (x - m) * s)
            .collect()
    }
}

/// One-vs-rest linear model; each head holds `d` weights then a bias.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub kind: LossKind,
    pub reg: f64,
    pub heads: Vec<Vec<f64>>,
    /// Set when training saw a single class.
    pub constant: Option<usize>,
}

impl LinearModel {
    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        self.heads
            .iter()
            .map(|w| {
                let (b, ws) = w.split_last().unwrap();
                ws.iter().zip(x).map(|(a, c)| a * c).sum::<f64>() + b
            })
            .collect()
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        if let Some(c) = self.constant {
            return c;
        }
        let s = self.scores(x);
        let mut best = 0;
        for (i, v) in s.iter().enumerate() {
            if *v > s[best] {
                best = i;
            }
        }
        best
    }
}

fn objective(kind: LossKind, w: &DVector<f64>, x: &DMatrix<f64>, y: &DVector<f64>, reg: f64, bias_reg: f64) -> f64 {
    let margins = (x * w).component_mul(y);
    let n = y.len() as f64;
    let loss: f64 = match kind {
        LossKind::Logistic => margins.iter().map(|&m| softplus(-m)).sum(),
        LossKind::SquaredHinge => margins.iter().map(|&m| (1.0 - m).max(0.0).powi(2)).sum(),
    };
    let d = w.len() - 1;
    let penalty = w.rows(0, d).norm_squared() * reg + w[d] * w[d] * bias_reg;
    loss / n + 0.5 * penalty
}

fn softplus(t: f64) -> f64 {
    if t > 30.0 {
        t
    } else {
        t.exp().ln_1p()
    }
}

fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Trains one binary head with `y` in {-1, +1}. `x` carries a trailing column of ones.
fn fit_head(x: &DMatrix<f64>, y: &DVector<f64>, reg: f64, cfg: &ClassifierConfig) -> DVector<f64> {
    let (n, p) = x.shape();
    let nf = n as f64;
    let bias_reg = reg * 1e-6;
    let mut reg_diag = DVector::from_element(p, reg);
    reg_diag[p - 1] = bias_reg;
    let mut w = DVector::zeros(p);
    let mut f = objective(cfg.kind, &w, x, y, reg, bias_reg);
    for _ in 0..cfg.max_iters {
        let margins = (x * &w).component_mul(y);
        // per-sample derivative of the loss wrt the score, and curvature weight
        let (dscore, curv): (Vec<f64>, Vec<f64>) = match cfg.kind {
            LossKind::Logistic => margins
                .iter()
                .zip(y.iter())
                .map(|(&m, &yi)| {
                    let s = logistic(-m);
                    (-yi * s, s * (1.0 - s))
                })
                .unzip(),
            LossKind::SquaredHinge => margins
                .iter()
                .zip(y.iter())
                .map(|(&m, &yi)| {
                    if m < 1.0 {
                        (-2.0 * yi * (1.0 - m), 2.0)
                    } else {
                        (0.0, 0.0)
                    }
                })
                .unzip(),
        };
        let grad = x.transpose() * DVector::from_vec(dscore) / nf + reg_diag.component_mul(&w);
        if grad.norm() < cfg.grad_tol {
            break;
        }
        let weighted = DMatrix::from_fn(n, p, |i, j| x[(i, j)] * curv[i]);
        let mut hess = x.transpose() * weighted / nf;
        for j in 0..p {
            hess[(j, j)] += reg_diag[j];
        }
        let step = match hess.cholesky() {
            Some(ch) => -ch.solve(&grad),
            None => -grad.clone(),
        };
        let slope = grad.dot(&step);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand = &w + &step * t;
            let fc = objective(cfg.kind, &cand, x, y, reg, bias_reg);
            if fc <= f + 1e-4 * t * slope {
                w = cand;
                f = fc;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    w
}

fn design(x: &[Vec<f64>]) -> DMatrix<f64> {
    let d = x.first().map_or(0, Vec::len);
    DMatrix::from_fn(x.len(), d + 1, |i, j| if j < d { x[i][j] } else { 1.0 })
}

/// L2-regularized one-vs-rest linear classifier over `class_count` classes.
/// Rows should already be standardized.
pub fn fit_linear(x: &[Vec<f64>], y: &[usize], class_count: usize, reg: f64, cfg: &ClassifierConfig) -> LinearModel {
    let mut present: Vec<usize> = y.to_vec();
    present.sort_unstable();
    present.dedup();
    let d = x.first().map_or(0, Vec::len);
    if present.len() <= 1 {
        let c = present.first().copied().unwrap_or(0);
        log::warn!("training data holds a single class ({c}); predicting it everywhere");
        return LinearModel {
            kind: cfg.kind,
            reg,
            heads: vec![vec![0.0; d + 1]; class_count],
            constant: Some(c),
        };
    }
    let xm = design(x);
    let heads = (0..class_count)
        .map(|c| {
            if !present.contains(&c) {
                let mut w = vec![0.0; d + 1];
                w[d] = f64::NEG_INFINITY;
                return w;
            }
            let yc = DVector::from_iterator(y.len(), y.iter().map(|&t| if t == c { 1.0 } else { -1.0 }));
            fit_head(&xm, &yc, reg, cfg).iter().copied().collect()
        })
        .collect();
    LinearModel {
        kind: cfg.kind,
        reg,
        heads,
        constant: None,
    }
}

/// Independent binary heads, one per label column.
pub fn fit_multilabel(x: &[Vec<f64>], y: &[Vec<bool>], reg: f64, cfg: &ClassifierConfig) -> Vec<Vec<f64>> {
    let xm = design(x);
    let labels = y.first().map_or(0, Vec::len);
    (0..labels)
        .map(|j| {
            let yj = DVector::from_iterator(y.len(), y.iter().map(|r| if r[j] { 1.0 } else { -1.0 }));
            fit_head(&xm, &yj, reg, cfg).iter().copied().collect()
        })
        .collect()
}

/// Stratified assignment of samples to folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub assignment: Vec<usize>,
    pub folds: usize,
    pub seed: u64,
}

impl FoldPlan {
    /// Shuffles each class, then deals the classes in turn round-robin across
    /// folds, so fold sizes differ by at most one and classes spread evenly.
    pub fn stratified(labels: &[usize], folds: usize, seed: u64) -> Self {
        let folds = folds.max(1);
        let classes = labels.iter().copied().max().map_or(0, |m| m + 1);
        let mut rng = rng_from(seed, &[TAG_FOLDS]);
        let mut assignment = vec![0; labels.len()];
        let mut next = 0;
        for c in 0..classes {
            let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
            members.shuffle(&mut rng);
            if !members.is_empty() && members.len() < folds {
                log::warn!("class {c} has {} samples for {folds} folds; some training folds lack it", members.len());
            }
            for i in members {
                assignment[i] = next % folds;
                next += 1;
            }
        }
        FoldPlan { assignment, folds, seed }
    }

    pub fn test(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&i| self.assignment[i] == fold).collect()
    }

    pub fn train(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&i| self.assignment[i] != fold).collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.folds];
        for &a in &self.assignment {
            s[a] += 1;
        }
        s
    }
}

/// Stratified random split: returns (train, test) with about `fraction` of each class in train.
pub fn stratified_split(labels: &[usize], fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut rng = rng_from(seed, &[TAG_SPLIT]);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for c in 0..classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        members.shuffle(&mut rng);
        let mut k = (fraction * members.len() as f64).round() as usize;
        if members.len() >= 2 {
            k = k.clamp(1, members.len() - 1);
        }
        train.extend_from_slice(&members[..k.min(members.len())]);
        test.extend_from_slice(&members[k.min(members.len())..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

fn accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    pred.iter().zip(truth).filter(|(a, b)| a == b).count() as f64 / truth.len() as f64
}

/// (macro-F1, micro-F1). Macro averages over classes present in truth or predictions.
pub fn f1_scores(pred: &[usize], truth: &[usize], class_count: usize) -> (f64, f64) {
    let mut tp = vec![0usize; class_count];
    let mut fp = vec![0usize; class_count];
    let mut fn_ = vec![0usize; class_count];
    for (&p, &t) in pred.iter().zip(truth) {
        if p == t {
            tp[t] += 1;
        } else {
            fp[p] += 1;
            fn_[t] += 1;
        }
    }
    let mut sum = 0.0;
    let mut count = 0;
    for c in 0..class_count {
        if tp[c] + fp[c] + fn_[c] == 0 {
            continue;
        }
        sum += 2.0 * tp[c] as f64 / (2 * tp[c] + fp[c] + fn_[c]) as f64;
        count += 1;
    }
    let macro_f1 = if count == 0 { 0.0 } else { sum / count as f64 };
    let (t, f, n) = (tp.iter().sum::<usize>(), fp.iter().sum::<usize>(), fn_.iter().sum::<usize>());
    let micro = if t + f + n == 0 {
        0.0
    } else {
        2.0 * t as f64 / (2 * t + f + n) as f64
    };
    (macro_f1, micro)
}

/// Recall per class; `NaN` for classes absent from `truth`.
pub fn per_class_accuracy(pred: &[usize], truth: &[usize], class_count: usize) -> Vec<f64> {
    (0..class_count)
        .map(|c| {
            let idx: Vec<usize> = (0..truth.len()).filter(|&i| truth[i] == c).collect();
            if idx.is_empty() {
                f64::NAN
            } else {
                idx.iter().filter(|&&i| pred[i] == c).count() as f64 / idx.len() as f64
            }
        })
        .collect()
}

fn gather<'a>(rows: &'a [Vec<f64>], idx: &[usize]) -> Vec<&'a [f64]> {
    idx.iter().map(|&i| rows[i].as_slice()).collect()
}

/// Standardizes on `train`, picks the regularization on an inner split of
/// `train`, refits on all of `train` and predicts `test`.
pub fn train_and_predict(
    rows: &[Vec<f64>],
    labels: &[usize],
    class_count: usize,
    train: &[usize],
    test: &[usize],
    cfg: &ClassifierConfig,
    seed: u64,
) -> (Vec<usize>, f64) {
    let st = Standardizer::fit(&gather(rows, train));
    let xs: Vec<Vec<f64>> = rows.iter().map(|r| st.apply(r)).collect();
    let pick = |idx: &[usize]| -> (Vec<Vec<f64>>, Vec<usize>) {
        (idx.iter().map(|&i| xs[i].clone()).collect(), idx.iter().map(|&i| labels[i]).collect())
    };
    let reg = if cfg.reg_grid.len() == 1 {
        cfg.reg_grid[0]
    } else {
        let train_labels: Vec<usize> = train.iter().map(|&i| labels[i]).collect();
        let inner = FoldPlan::stratified(&train_labels, cfg.inner_folds.max(2), seed ^ TAG_INNER);
        let splits: Vec<_> = (0..inner.folds)
            .map(|f| {
                let tr: Vec<usize> = inner.train(f).iter().map(|&k| train[k]).collect();
                let va: Vec<usize> = inner.test(f).iter().map(|&k| train[k]).collect();
                (pick(&tr), pick(&va))
            })
            .collect();
        let mut best = (0, cfg.reg_grid[0]);
        for &r in &cfg.reg_grid {
            let mut correct = 0;
            for ((xt, yt), (xv, yv)) in &splits {
                let m = fit_linear(xt, yt, class_count, r, cfg);
                correct += xv.iter().zip(yv).filter(|(x, y)| m.predict(x) == **y).count();
            }
            // ties go to the stronger regularization
            if correct >= best.0 {
                best = (correct, r);
            }
        }
        best.1
    };
    let (xt, yt) = pick(train);
    let model = fit_linear(&xt, &yt, class_count, reg, cfg);
    (test.iter().map(|&i| model.predict(&xs[i])).collect(), reg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldRecord {
    pub fold: usize,
    pub train: usize,
    pub test: usize,
    pub accuracy: f64,
    pub reg: f64,
    /// No test sample contributed walks to landmark fitting.
    pub leakage_free: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub folds: Vec<FoldRecord>,
    pub mean: f64,
    /// Population standard deviation over folds.
    pub std: f64,
    pub macro_f1: f64,
    pub micro_f1: f64,
    pub per_class_accuracy: Vec<f64>,
    pub config: Vec<(String, String)>,
}

impl EvalReport {
    fn from_folds(
        folds: Vec<FoldRecord>,
        pred: &[usize],
        truth: &[usize],
        class_count: usize,
        config: Vec<(String, String)>,
    ) -> Self {
        let accs: Vec<f64> = folds.iter().map(|f| f.accuracy).collect();
        let n = accs.len().max(1) as f64;
        let mean = accs.iter().sum::<f64>() / n;
        let std = (accs.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n).sqrt();
        let (macro_f1, micro_f1) = f1_scores(pred, truth, class_count);
        EvalReport {
            folds,
            mean,
            std,
            macro_f1,
            micro_f1,
            per_class_accuracy: per_class_accuracy(pred, truth, class_count),
            config,
        }
    }

    pub fn fold_accuracy(&self) -> Vec<f64> {
        self.folds.iter().map(|f| f.accuracy).collect()
    }

    pub fn leakage_free(&self) -> bool {
        self.folds.iter().all(|f| f.leakage_free)
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "fold  train  test  accuracy  reg");
        for f in &self.folds {
            let _ = writeln!(s, "{:>4}  {:>5}  {:>4}  {:>8.4}  {:e}", f.fold, f.train, f.test, f.accuracy, f.reg);
        }
        let _ = writeln!(s, "mean accuracy {:.2}% +- {:.2}", 100.0 * self.mean, 100.0 * self.std);
        let _ = writeln!(s, "macro-F1 {:.4}  micro-F1 {:.4}", self.macro_f1, self.micro_f1);
        for (c, a) in self.per_class_accuracy.iter().enumerate() {
            let _ = writeln!(s, "class {c}: {:.4}", a);
        }
        s
    }

    /// One `key=value` record per line: the config, each fold, then the summary.
    pub fn to_records(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.config {
            let _ = writeln!(s, "config {k}={v}");
        }
        for f in &self.folds {
            let _ = writeln!(
                s,
                "fold index={} train={} test={} accuracy={:?} reg={:?} leakage_free={}",
                f.fold, f.train, f.test, f.accuracy, f.reg, f.leakage_free
            );
        }
        let per_class: Vec<String> = self.per_class_accuracy.iter().map(|a| format!("{a:?}")).collect();
        let _ = writeln!(
            s,
            "summary mean={:?} std={:?} macro_f1={:?} micro_f1={:?} per_class={}",
            self.mean,
            self.std,
            self.macro_f1,
            self.micro_f1,
            per_class.join(",")
        );
        s
    }
}

#[cfg(feature = "parallel")]
fn map_folds<R: Send>(n: usize, f: impl Fn(usize) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_folds<R: Send>(n: usize, f: impl Fn(usize) -> R + Sync + Send) -> Vec<R> {
    (0..n).map(f).collect()
}

/// K-fold cross-validation. Per fold, landmarks are fitted on the training
/// graphs only, then every graph is embedded and a linear probe is trained.
pub fn cross_validate(
    coll: &GraphCollection,
    embed: &EmbeddingConfig,
    cls: &ClassifierConfig,
    folds: usize,
    seed: u64,
) -> Result<EvalReport, FeatureError> {
    let labels: Vec<usize> = coll
        .graphs
        .iter()
        .map(|g| g.label().ok_or_else(|| FeatureError::Config("unlabeled graph in collection".into())))
        .collect::<Result<_, _>>()?;
    let plan = FoldPlan::stratified(&labels, folds, seed);
    let results = map_folds(plan.folds, |k| -> Result<(FoldRecord, Vec<usize>, Vec<usize>), FeatureError> {
        let train = plan.train(k);
        let test = plan.test(k);
        let model = EmbeddingModel::fit(&coll.graphs, &train, embed)?;
        let leakage_free = model.fitted_on.iter().all(|i| plan.assignment[*i] != k);
        let emb = model.embed_collection(&coll.graphs)?;
        let (pred, reg) = train_and_predict(&emb.rows, &labels, coll.class_count, &train, &test, cls, seed ^ k as u64);
        let truth: Vec<usize> = test.iter().map(|&i| labels[i]).collect();
        let rec = FoldRecord {
            fold: k,
            train: train.len(),
            test: test.len(),
            accuracy: accuracy(&pred, &truth),
            reg,
            leakage_free,
        };
        log::info!("fold {k}: accuracy {:.4} (reg {reg:e})", rec.accuracy);
        Ok((rec, pred, truth))
    });
    let mut records = Vec::new();
    let (mut pred, mut truth) = (Vec::new(), Vec::new());
    for r in results {
        let (rec, p, t) = r?;
        records.push(rec);
        pred.extend(p);
        truth.extend(t);
    }
    let mut config = embed.to_pairs();
    config.extend(cls.to_pairs());
    config.push(("folds".into(), plan.folds.to_string()));
    config.push(("cv_seed".into(), seed.to_string()));
    Ok(EvalReport::from_folds(records, &pred, &truth, coll.class_count, config))
}

/// Node classification: `runs` stratified random splits with `train_fraction`
/// of each class for training, a linear probe per split.
pub fn node_classification_eval(
    embeddings: &[Vec<f64>],
    labels: &[usize],
    train_fraction: f64,
    cls: &ClassifierConfig,
    runs: usize,
    seed: u64,
) -> EvalReport {
    let class_count = labels.iter().copied().max().map_or(1, |m| m + 1);
    let results = map_folds(runs, |r| {
        let (train, test) = stratified_split(labels, train_fraction, seed.wrapping_add(r as u64));
        let (pred, reg) = train_and_predict(embeddings, labels, class_count, &train, &test, cls, seed ^ r as u64);
        let truth: Vec<usize> = test.iter().map(|&i| labels[i]).collect();
        let (macro_f1, micro_f1) = f1_scores(&pred, &truth, class_count);
        (
            FoldRecord {
                fold: r,
                train: train.len(),
                test: test.len(),
                accuracy: accuracy(&pred, &truth),
                reg,
                leakage_free: true,
            },
            macro_f1,
            micro_f1,
            pred,
            truth,
        )
    });
    let n = results.len().max(1) as f64;
    let macro_f1 = results.iter().map(|r| r.1).sum::<f64>() / n;
    let micro_f1 = results.iter().map(|r| r.2).sum::<f64>() / n;
    let (mut pred, mut truth) = (Vec::new(), Vec::new());
    let mut records = Vec::new();
    for (rec, _, _, p, t) in results {
        records.push(rec);
        pred.extend(p);
        truth.extend(t);
    }
    let mut config = cls.to_pairs();
    config.push(("train_fraction".into(), format!("{train_fraction:?}")));
    config.push(("runs".into(), runs.to_string()));
    config.push(("split_seed".into(), seed.to_string()));
    let mut report = EvalReport::from_folds(records, &pred, &truth, class_count, config);
    report.macro_f1 = macro_f1;
    report.micro_f1 = micro_f1;
    report
}

/// The four model variants of the ablation study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ablation {
    /// Walk branch over degree one-hots instead of the dataset attributes.
    RwDegree,
    /// Anonymous-walk branch alone.
    Aw,
    /// Walk branch over the dataset attributes.
    RwAttr,
    /// Walk branch over attributes plus the anonymous-walk branch.
    Full,
}

impl Ablation {
    pub const ALL: [Ablation; 4] = [Ablation::RwDegree, Ablation::Aw, Ablation::RwAttr, Ablation::Full];

    pub fn as_str(self) -> &'static str {
        match self {
            Ablation::RwDegree => "rw-degree",
            Ablation::Aw => "aw",
            Ablation::RwAttr => "rw-attr",
            Ablation::Full => "full",
        }
    }

    /// The collection and embedding config this variant runs on.
    pub fn apply(self, coll: &GraphCollection, base: &EmbeddingConfig) -> (GraphCollection, EmbeddingConfig) {
        let mut cfg = base.clone();
        cfg.branches = match self {
            Ablation::RwDegree | Ablation::RwAttr => BranchSelection::Walk,
            Ablation::Aw => BranchSelection::Aw,
            Ablation::Full => BranchSelection::Both,
        };
        let coll = match self {
            Ablation::RwDegree => coll.with_degree_attributes(),
            _ => coll.clone(),
        };
        (coll, cfg)
    }
}

impl std::str::FromStr for Ablation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ablation::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| format!("unknown ablation {s:?} (rw-degree, aw, rw-attr, full)"))
    }
}
