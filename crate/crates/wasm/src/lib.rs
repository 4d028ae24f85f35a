//! Browser bindings. Every export returns a JSON string for `www/index.html`.

use awkernel::model::{BranchSelection, EmbeddingConfig, EmbeddingModel};
use awkernel::oracle::wl_refine_joint;
use awkernel::properties::truncated_universe_gap;
use awkernel::synthgen::{gen_ring_pair, gen_structure_sized, BasicFamily};
use awkernel::walks::aw_universe;
use awkernel::graph::degree_attributes;
use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct Failure {
    error: String,
}

fn json<T: Serialize>(r: Result<T, String>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v),
        Err(error) => serde_json::to_string(&Failure { error }),
    }
    .unwrap_or_else(|e| format!("{{\"error\":\"{e}\"}}"))
}

#[derive(Serialize)]
struct RingReport {
    k: usize,
    nodes: usize,
    /// Number of colour classes per refinement step, identical for both graphs.
    wl_classes: Vec<usize>,
    wl_equal: bool,
    walk_distance: f64,
    aw_distance: f64,
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn pooled(rows: Option<Vec<Vec<f64>>>) -> Vec<f64> {
    let rows = rows.unwrap_or_default();
    let mut out = vec![0.0; rows.first().map_or(0, Vec::len)];
    for r in &rows {
        for (o, x) in out.iter_mut().zip(r) {
            *o += x;
        }
    }
    out
}

fn rings(k: usize, alpha: f64) -> Result<RingReport, String> {
    if !(3..=10).contains(&k) {
        return Err("k must lie in 3..=10".into());
    }
    let (big, two) = gen_ring_pair(k).map_err(|e| e.to_string())?;
    let graphs = vec![degree_attributes(&big, 2), degree_attributes(&two, 2)];
    let iters = 2 * k;
    let c = wl_refine_joint(&[&graphs[0], &graphs[1]], iters);
    let wl_equal = (0..=iters).all(|i| c[0].histogram(i) == c[1].histogram(i));
    let cfg = EmbeddingConfig {
        branches: BranchSelection::Both,
        l_aw: k + 2,
        alpha,
        aw_enumerate: true,
        ..EmbeddingConfig::default()
    };
    let model = EmbeddingModel::fit(&graphs, &[0, 1], &cfg).map_err(|e| e.to_string())?;
    let a = model.embed_nodes(&graphs[0], 0).map_err(|e| e.to_string())?;
    let b = model.embed_nodes(&graphs[1], 1).map_err(|e| e.to_string())?;
    Ok(RingReport {
        k,
        nodes: 2 * k,
        wl_classes: (0..=iters).map(|i| c[0].class_count(i)).collect(),
        wl_equal,
        walk_distance: distance(&pooled(a.walk), &pooled(b.walk)),
        aw_distance: distance(&pooled(a.aw), &pooled(b.aw)),
    })
}

/// 1-WL colour refinement against anonymous-walk embeddings on `R_2k` vs `R_{k,k}`.
#[wasm_bindgen]
pub fn ring_pair(k: usize, alpha: f64) -> String {
    json(rings(k, alpha))
}

#[derive(Serialize)]
struct GapPoint {
    q: usize,
    gap: f64,
}

#[derive(Serialize)]
struct GapCurve {
    l: usize,
    universe: usize,
    points: Vec<GapPoint>,
}

fn gap_curve(l: usize, alpha: f64, epsilon: f64) -> Result<GapCurve, String> {
    if !(2..=7).contains(&l) {
        return Err("l must lie in 2..=7".into());
    }
    let universe = aw_universe(l).len();
    let points = (1..=universe)
        .map(|q| {
            truncated_universe_gap(l, q, alpha, epsilon)
                .map(|gap| GapPoint { q, gap })
                .map_err(|e| e.to_string())
        })
        .collect::<Result<_, _>>()?;
    Ok(GapCurve { l, universe, points })
}

/// Worst kernel error over the length-`l` AW universe as landmarks are added one by one.
#[wasm_bindgen]
pub fn nystrom_gap(l: usize, alpha: f64, epsilon: f64) -> String {
    json(gap_curve(l, alpha, epsilon))
}

#[derive(Serialize)]
struct Point {
    x: f64,
    y: f64,
    class: usize,
    family: &'static str,
}

#[derive(Serialize)]
struct Projection {
    points: Vec<Point>,
    /// Share of variance on the two plotted axes.
    explained: f64,
    dim: usize,
}

fn project(per_class: usize, seed: u64, m: usize, branch: &str) -> Result<Projection, String> {
    if !(1..=50).contains(&per_class) {
        return Err("per_class must lie in 1..=50".into());
    }
    let coll = gen_structure_sized(seed, per_class);
    let cfg = EmbeddingConfig {
        branches: branch.parse()?,
        m,
        seed,
        ..EmbeddingConfig::default()
    };
    cfg.check().map_err(|e| e.to_string())?;
    let all: Vec<usize> = (0..coll.len()).collect();
    let model = EmbeddingModel::fit(&coll.graphs, &all, &cfg).map_err(|e| e.to_string())?;
    let emb = model.embed_collection(&coll.graphs).map_err(|e| e.to_string())?;
    let (n, d) = (emb.len(), emb.dim());
    let mut x = DMatrix::from_fn(n, d, |i, j| emb.rows[i][j]);
    for j in 0..d {
        let mean = x.column(j).mean();
        x.column_mut(j).add_scalar_mut(-mean);
    }
    let cov = x.transpose() * &x;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let total: f64 = eig.eigenvalues.iter().map(|v| v.max(0.0)).sum();
    let top: f64 = order.iter().take(2).map(|&i| eig.eigenvalues[i].max(0.0)).sum();
    let axis = |k: usize| order.get(k).map(|&i| eig.eigenvectors.column(i).into_owned());
    let (a, b) = (axis(0), axis(1));
    let points = (0..n)
        .map(|i| {
            let row = x.row(i);
            let class = coll.graphs[i].label().unwrap_or(0);
            Point {
                x: a.as_ref().map_or(0.0, |v| row.dot(&v.transpose())),
                y: b.as_ref().map_or(0.0, |v| row.dot(&v.transpose())),
                class,
                family: BasicFamily::ALL[class].name(),
            }
        })
        .collect();
    Ok(Projection {
        points,
        explained: if total > 0.0 { top / total } else { 0.0 },
        dim: d,
    })
}

/// Structure-dataset graph embeddings projected on their first two principal axes.
#[wasm_bindgen]
pub fn structure_pca(per_class: usize, seed: u64, m: usize, branch: &str) -> String {
    json(project(per_class, seed, m, branch))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_json_shows_blindness_and_separation() {
        let v: serde_json::Value = serde_json::from_str(&ring_pair(4, 1.5)).unwrap();
        assert_eq!(v["wl_equal"], true);
        assert!(v["aw_distance"].as_f64().unwrap() > 1e-3);
        assert!(v["walk_distance"].as_f64().unwrap() < 1e-9);
        assert!(serde_json::from_str::<serde_json::Value>(&ring_pair(2, 1.5)).unwrap()["error"].is_string());
    }

    #[test]
    fn gap_reaches_zero() {
        let v: serde_json::Value = serde_json::from_str(&nystrom_gap(4, 1.5, 0.0)).unwrap();
        let pts = v["points"].as_array().unwrap();
        assert_eq!(pts.len(), v["universe"].as_u64().unwrap() as usize);
        assert!(pts.last().unwrap()["gap"].as_f64().unwrap() < 1e-6);
        assert!(pts[0]["gap"].as_f64().unwrap() > pts.last().unwrap()["gap"].as_f64().unwrap());
    }

    #[test]
    fn pca_has_one_point_per_graph() {
        let v: serde_json::Value = serde_json::from_str(&structure_pca(3, 1, 20, "aw")).unwrap();
        assert_eq!(v["points"].as_array().unwrap().len(), 12);
        assert_eq!(v["dim"], 32);
        let e = v["explained"].as_f64().unwrap();
        assert!((0.0..=1.0 + 1e-12).contains(&e));
    }
}
