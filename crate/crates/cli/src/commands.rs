use std::fmt::Write as _;
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use awkernel::classify::{cross_validate, node_classification_eval, Ablation, EvalReport};
use awkernel::export::{load_model, save_model, write_embedding_csv};
use awkernel::model::{EmbeddingMatrix, Level};
use awkernel::oracle::{exact_awgk, kernel_matrix, min_eigenvalue, AwMode};
use awkernel::properties::{kernel_consistency, ring_check, small_corpus, universe_gap};
use awkernel::synthgen::{gen_regular_dataset, gen_ring_pair, gen_structure_dataset};
use awkernel::tu::{load_node_targets, load_tu_dataset, write_tu_dataset};
use awkernel::walks::{anonymize, sample_walks, DEFAULT_ENUMERATION_CAP};
use awkernel::{AttributeKind, EmbeddingModel, GraphCollection};

use crate::config::{RunConfig, Source, SynthKind, Task};
use crate::CliError;

fn data_err(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

fn rings_collection() -> GraphCollection {
    let mut graphs = Vec::new();
    for k in 3..=10 {
        let (big, two) = gen_ring_pair(k).expect("k >= 3");
        graphs.push(big.with_label(Some(0)));
        graphs.push(two.with_label(Some(1)));
    }
    GraphCollection::new(graphs, 2, AttributeKind::None)
        .expect("uniform attributes")
        .with_degree_attributes()
}

fn generate(family: SynthKind, seed: u64) -> Result<GraphCollection, CliError> {
    Ok(match family {
        SynthKind::Structure => gen_structure_dataset(seed),
        SynthKind::Regular => gen_regular_dataset(seed).map_err(data_err)?,
        SynthKind::Rings => rings_collection(),
    })
}

fn tu_name(dir: &Path, name: &Option<String>) -> String {
    name.clone()
        .unwrap_or_else(|| dir.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default())
}

fn load(cfg: &RunConfig) -> Result<GraphCollection, CliError> {
    match &cfg.source {
        Source::Tu { dir, name } => load_tu_dataset(dir, &tu_name(dir, name)).map_err(data_err),
        Source::Synth { family, seed } => generate(*family, *seed),
        Source::None => Err(CliError::Usage("no dataset: pass --data DIR or --synth FAMILY".into())),
    }
}

fn out_file(cfg: &RunConfig, name: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(&cfg.out).map_err(|e| io_err(&cfg.out, e))?;
    Ok(cfg.out.join(name))
}

fn write_with(path: &Path, body: impl FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>) -> Result<(), CliError> {
    let f = fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(f);
    body(&mut w).and_then(|_| w.flush()).map_err(|e| io_err(path, e))
}

fn comment_block(pairs: &[(String, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("# {k}={v}\n")).collect()
}

pub fn synth(cfg: &RunConfig) -> Result<(), CliError> {
    let Source::Synth { family, seed } = cfg.source else {
        return Err(CliError::Usage("synth needs --family structure|regular|rings".into()));
    };
    let coll = generate(family, seed)?;
    let name = family.as_str();
    write_tu_dataset(&coll, &cfg.out, name).map_err(data_err)?;
    let snapshot = out_file(cfg, &format!("{name}_config.txt"))?;
    fs::write(&snapshot, cfg.to_text()).map_err(|e| io_err(&snapshot, e))?;
    println!("wrote {} graphs to {}", coll.len(), cfg.out.join(name).display());
    Ok(())
}

pub fn embed(cfg: &RunConfig, model_path: Option<&Path>) -> Result<(), CliError> {
    let coll = load(cfg)?;
    let mut snapshot = cfg.clone();
    let model = match model_path {
        Some(p) => {
            let f = fs::File::open(p).map_err(|e| io_err(p, e))?;
            let m = load_model(BufReader::new(f)).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?;
            snapshot.embed = m.config.clone();
            m
        }
        None => {
            let all: Vec<usize> = (0..coll.len()).collect();
            EmbeddingModel::fit(&coll.graphs, &all, &cfg.embed).map_err(data_err)?
        }
    };
    let emb = model.embed_collection(&coll.graphs).map_err(data_err)?;
    let pairs = snapshot.to_pairs();
    let path = out_file(cfg, "embeddings.csv")?;
    write_with(&path, |w| write_embedding_csv(w, &emb, &pairs))?;
    let model_out = out_file(cfg, "model.txt")?;
    write_with(&model_out, |w| save_model(w, &model))?;
    println!("wrote {} x {} graph embeddings to {}", emb.len(), emb.dim(), path.display());
    if cfg.node_embeddings {
        let mut rows = Vec::new();
        for (i, g) in coll.graphs.iter().enumerate() {
            rows.extend(model.embed_node_matrix(g, i).map_err(data_err)?.rows);
        }
        let nodes = EmbeddingMatrix {
            level: Level::Node,
            ids: (0..rows.len()).collect(),
            rows,
            q_walk: emb.q_walk,
            q_aw: emb.q_aw,
        };
        let path = out_file(cfg, "node_embeddings.csv")?;
        write_with(&path, |w| write_embedding_csv(w, &nodes, &pairs))?;
        println!("wrote {} x {} node embeddings to {}", nodes.len(), nodes.dim(), path.display());
    }
    Ok(())
}

fn summary_line(label: &str, r: &EvalReport) -> String {
    format!(
        "{label}: accuracy {:.2}% +- {:.2} over {} folds, macro-F1 {:.4}",
        100.0 * r.mean,
        100.0 * r.std,
        r.folds.len(),
        r.macro_f1
    )
}

pub fn eval(cfg: &RunConfig) -> Result<(), CliError> {
    match cfg.task {
        Task::Graph => eval_graphs(cfg),
        Task::Node => eval_nodes(cfg),
    }
}

fn eval_graphs(cfg: &RunConfig) -> Result<(), CliError> {
    let coll = load(cfg)?;
    let variants: Vec<Option<Ablation>> = if cfg.ablate.is_empty() {
        vec![None]
    } else {
        cfg.ablate.iter().copied().map(Some).collect()
    };
    let mut summary = comment_block(&cfg.to_pairs());
    summary.push_str("variant,repeat,cv_seed,mean,std,macro_f1,micro_f1\n");
    for variant in variants {
        let label = variant.map_or("model", Ablation::as_str);
        let (data, embed) = match variant {
            Some(a) => a.apply(&coll, &cfg.embed),
            None => (coll.clone(), cfg.embed.clone()),
        };
        let mut records = String::new();
        let mut means = Vec::new();
        for r in 0..cfg.cv_repeats {
            let seed = cfg.cv_seed + r as u64;
            let report = cross_validate(&data, &embed, &cfg.classifier, cfg.folds, seed).map_err(data_err)?;
            if !report.leakage_free() {
                return Err(CliError::Property("test graphs leaked into landmark fitting".into()));
            }
            let _ = writeln!(records, "repeat index={r} cv_seed={seed}");
            records.push_str(&report.to_records());
            let _ = writeln!(
                summary,
                "{label},{r},{seed},{:?},{:?},{:?},{:?}",
                report.mean, report.std, report.macro_f1, report.micro_f1
            );
            if r == 0 {
                print!("{}", report.to_table());
            }
            println!("{}", summary_line(&format!("{label} (cv seed {seed})"), &report));
            means.push(report.mean);
        }
        if means.len() > 1 {
            let avg = means.iter().sum::<f64>() / means.len() as f64;
            println!("{label}: mean over {} repeats {:.2}%", means.len(), 100.0 * avg);
        }
        let path = out_file(cfg, &format!("eval_{label}.txt"))?;
        fs::write(&path, format!("variant {label}\n{records}")).map_err(|e| io_err(&path, e))?;
    }
    let path = out_file(cfg, "eval_summary.csv")?;
    fs::write(&path, summary).map_err(|e| io_err(&path, e))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn eval_nodes(cfg: &RunConfig) -> Result<(), CliError> {
    let Source::Tu { dir, .. } = &cfg.source else {
        return Err(CliError::Usage("node task needs --data with a targets file".into()));
    };
    let Some(targets) = &cfg.targets else {
        return Err(CliError::Usage("node task needs --targets NAME".into()));
    };
    let coll = load(cfg)?;
    let labels = load_node_targets(dir, targets).map_err(data_err)?;
    let node_count: usize = coll.graphs.iter().map(|g| g.node_count()).sum();
    if labels.len() != node_count {
        return Err(CliError::Data(format!("{} targets for {node_count} nodes", labels.len())));
    }
    let all: Vec<usize> = (0..coll.len()).collect();
    let model = EmbeddingModel::fit(&coll.graphs, &all, &cfg.embed).map_err(data_err)?;
    let mut rows = Vec::with_capacity(node_count);
    for (i, g) in coll.graphs.iter().enumerate() {
        rows.extend(model.embed_node_matrix(g, i).map_err(data_err)?.rows);
    }
    let mut report = node_classification_eval(&rows, &labels, cfg.train_fraction, &cfg.classifier, cfg.runs, cfg.cv_seed);
    report.config = cfg.to_pairs();
    print!("{}", report.to_table());
    let path = out_file(cfg, "eval_node.txt")?;
    fs::write(&path, report.to_records()).map_err(|e| io_err(&path, e))?;
    println!("micro-F1 {:.4}; wrote {}", report.micro_f1, path.display());
    Ok(())
}

pub fn oracle_check(cfg: &RunConfig) -> Result<(), CliError> {
    let alpha = cfg.embed.alpha;
    let mut failed = Vec::new();
    let mut report = |name: &str, ok: bool, detail: String| {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failed.push(name.to_owned());
        }
    };
    for k in [4, 6, 8] {
        match ring_check(k, alpha) {
            Ok(r) => report(
                &format!("rings k={k}"),
                r.wl_equal && r.aw_distance > 1e-3,
                format!("WL equal={} |dPsi_AW|={:.3e} (> 1e-3)", r.wl_equal, r.aw_distance),
            ),
            Err(e) => report(&format!("rings k={k}"), false, e.to_string()),
        }
    }
    match universe_gap(4, alpha) {
        Ok(gap) => report("nystrom l=4 universe", gap < 1e-6, format!("gap {gap:.2e} (< 1e-6)")),
        Err(e) => report("nystrom l=4 universe", false, e.to_string()),
    }
    let corpus = small_corpus();
    match kernel_consistency(&corpus, 5, 3, alpha) {
        Ok((aw, walk)) => report(
            "kernel consistency",
            aw < 1e-5 && walk < 1e-5,
            format!("max relative error AW {aw:.2e}, walk {walk:.2e} (< 1e-5)"),
        ),
        Err(e) => report("kernel consistency", false, e.to_string()),
    }
    let k = kernel_matrix(&corpus, |a, b| exact_awgk(a, b, 5, alpha, AwMode::Enumerate { cap: DEFAULT_ENUMERATION_CAP }));
    match k {
        Ok(k) => {
            let scale = k.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let lo = min_eigenvalue(&k);
            report("AW kernel PSD", lo >= -1e-9 * scale, format!("min eigenvalue {lo:.2e}, scale {scale:.2e}"));
        }
        Err(e) => report("AW kernel PSD", false, e.to_string()),
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Property(format!("failed: {}", failed.join(", "))))
    }
}

/// Least-squares slope of `ln y` against `ln x`.
fn log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn time_aw_sampling(coll: &GraphCollection, l: usize, m: usize, seed: u64) -> f64 {
    let start = Instant::now();
    let mut sink = 0usize;
    for g in &coll.graphs {
        for u in 0..g.node_count() {
            for w in sample_walks(g, u, l, m, seed) {
                sink += anonymize(&w).len();
            }
        }
    }
    std::hint::black_box(sink);
    start.elapsed().as_secs_f64()
}

pub fn bench(cfg: &RunConfig, sweep_l: &[usize], sweep_m: &[usize]) -> Result<(), CliError> {
    let coll = load(cfg)?;
    let all: Vec<usize> = (0..coll.len()).collect();
    let mut out = comment_block(&cfg.to_pairs());
    let _ = writeln!(out, "phase,seconds");
    let t_walks = time_aw_sampling(&coll, cfg.embed.l_aw, cfg.embed.m, cfg.embed.seed);
    let _ = writeln!(out, "aw_sampling,{t_walks:.6}");
    let start = Instant::now();
    let model = EmbeddingModel::fit(&coll.graphs, &all, &cfg.embed).map_err(data_err)?;
    let t_fit = start.elapsed().as_secs_f64();
    let _ = writeln!(out, "landmark_fit,{t_fit:.6}");
    let start = Instant::now();
    let emb = model.embed_collection(&coll.graphs).map_err(data_err)?;
    let t_embed = start.elapsed().as_secs_f64();
    let _ = writeln!(out, "embed,{t_embed:.6}");
    let _ = writeln!(out, "total,{:.6}", t_walks + t_fit + t_embed);

    let _ = writeln!(out, "\nsweep,value,seconds");
    let mut ls = Vec::new();
    let mut lt = Vec::new();
    for &l in sweep_l.iter().filter(|&&l| l >= 2) {
        let t = time_aw_sampling(&coll, l, cfg.embed.m, cfg.embed.seed);
        let _ = writeln!(out, "l_aw,{l},{t:.6}");
        ls.push(l as f64);
        lt.push(t);
    }
    let mut ms = Vec::new();
    let mut mt = Vec::new();
    for &m in sweep_m.iter().filter(|&&m| m >= 1) {
        let t = time_aw_sampling(&coll, cfg.embed.l_aw, m, cfg.embed.seed);
        let _ = writeln!(out, "m,{m},{t:.6}");
        ms.push(m as f64);
        mt.push(t);
    }
    let (bl, bm) = (log_slope(&ls, &lt), log_slope(&ms, &mt));
    let _ = writeln!(out, "\n# AW sampling time ~ l^{bl:.2} (polynomial fit)");
    let _ = writeln!(out, "# AW sampling time ~ m^{bm:.2}");
    log::info!("AW sampling exponent in l {bl:.2}, in m {bm:.2}");
    print!("{out}");
    println!("embedded {} graphs into {} dims", emb.len(), emb.dim());
    let path = out_file(cfg, "bench.csv")?;
    fs::write(&path, out).map_err(|e| io_err(&path, e))?;
    println!("wrote {}", path.display());
    Ok(())
}
