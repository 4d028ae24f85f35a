use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn awkernel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_awkernel"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn synth_rings(dir: &Path) {
    let o = awkernel(&["synth", "--family", "rings", "--seed", "7", "--out", s(dir)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn synth_is_byte_identical_on_rerun() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [a.path(), b.path()] {
        let o = awkernel(&["synth", "--family", "regular", "--seed", "7", "--out", s(d)]);
        assert_eq!(code(&o), 0);
    }
    for suffix in ["A", "graph_indicator", "graph_labels"] {
        let name = format!("regular_{suffix}.txt");
        assert_eq!(fs::read(a.path().join(&name)).unwrap(), fs::read(b.path().join(&name)).unwrap());
    }
    let labels = fs::read_to_string(a.path().join("regular_graph_labels.txt")).unwrap();
    assert_eq!(labels.lines().count(), 100);
}

#[test]
fn embed_writes_matrix_and_reusable_model() {
    let data = tempfile::tempdir().unwrap();
    synth_rings(data.path());
    let out = tempfile::tempdir().unwrap();
    let o = awkernel(&["embed", "--data", s(data.path()), "--name", "rings", "--q", "8", "--out", s(out.path())]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.path().join("embeddings.csv")).unwrap();
    assert!(csv.contains("# q_aw=8\n"));
    assert!(csv.lines().any(|l| l.starts_with("graph_id,walk_0")));
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 16);
    assert!(rows.iter().all(|r| r.len() == 17));

    let again = tempfile::tempdir().unwrap();
    let model = out.path().join("model.txt");
    let o = awkernel(&[
        "embed",
        "--data",
        s(data.path()),
        "--name",
        "rings",
        "--model",
        s(&model),
        "--out",
        s(again.path()),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv2 = fs::read_to_string(again.path().join("embeddings.csv")).unwrap();
    assert_eq!(data_rows(&csv2), rows);
}

#[test]
fn single_branch_halves_width() {
    let out = tempfile::tempdir().unwrap();
    let o = awkernel(&["embed", "--synth", "rings", "--branch", "aw", "--out", s(out.path())]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = data_rows(&fs::read_to_string(out.path().join("embeddings.csv")).unwrap());
    assert_eq!(rows[0].len(), 1 + 32);
}

#[test]
fn config_file_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# test\nsynth=rings\nm=5\nq=4\nalpha=0.5\n").unwrap();
    let out = dir.path().join("out");
    let o = awkernel(&["embed", "--config", s(&cfg), "--m", "7", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("embeddings.csv")).unwrap();
    assert!(csv.contains("# m=7\n"));
    assert!(csv.contains("# alpha=0.5\n"));
    assert!(csv.contains("# q_walk=4\n"));
}

#[test]
fn exit_codes() {
    let out = tempfile::tempdir().unwrap();
    assert_eq!(code(&awkernel(&["embed", "--bogus-flag"])), 1);
    assert_eq!(code(&awkernel(&["frobnicate"])), 1);
    assert_eq!(code(&awkernel(&["embed", "--synth", "rings", "--set", "nope=1"])), 1);
    assert_eq!(code(&awkernel(&["embed", "--synth", "rings", "--alpha", "-1"])), 1);
    assert_eq!(code(&awkernel(&["embed", "--out", s(out.path())])), 1);
    let missing = out.path().join("does-not-exist");
    assert_eq!(code(&awkernel(&["embed", "--data", s(&missing), "--out", s(out.path())])), 2);
    assert_eq!(code(&awkernel(&["--help"])), 0);
}

#[test]
fn eval_reports_folds_and_ablations() {
    let out = tempfile::tempdir().unwrap();
    let o = awkernel(&[
        "eval",
        "--synth",
        "rings",
        "--folds",
        "2",
        "--q",
        "8",
        "--ablate",
        "aw,rw-degree",
        "--out",
        s(out.path()),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("mean accuracy"));
    let summary = fs::read_to_string(out.path().join("eval_summary.csv")).unwrap();
    assert!(summary.contains("# folds=2\n"));
    assert_eq!(data_rows(&summary).len(), 2);
    let aw = fs::read_to_string(out.path().join("eval_aw.txt")).unwrap();
    assert_eq!(aw.lines().filter(|l| l.starts_with("fold ")).count(), 2);
    assert!(aw.contains("summary mean="));
}

#[test]
fn node_task_with_targets() {
    let data = tempfile::tempdir().unwrap();
    synth_rings(data.path());
    let ind = fs::read_to_string(data.path().join("rings_graph_indicator.txt")).unwrap();
    let targets: String = ind
        .lines()
        .map(|g| format!("{}\n", g.trim().parse::<usize>().unwrap() % 2))
        .collect();
    fs::write(data.path().join("tgt_node_labels.txt"), targets).unwrap();
    let out = tempfile::tempdir().unwrap();
    let o = awkernel(&[
        "eval",
        "--task",
        "node",
        "--data",
        s(data.path()),
        "--name",
        "rings",
        "--targets",
        "tgt",
        "--q",
        "8",
        "--set",
        "runs=2",
        "--out",
        s(out.path()),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rec = fs::read_to_string(out.path().join("eval_node.txt")).unwrap();
    assert!(rec.contains("config task=node"));
    assert_eq!(rec.lines().filter(|l| l.starts_with("fold ")).count(), 2);
}

#[test]
fn oracle_check_passes() {
    let o = awkernel(&["oracle-check"]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(code(&o), 0, "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 6);
}

#[test]
fn bench_writes_timings() {
    let out = tempfile::tempdir().unwrap();
    let o = awkernel(&[
        "bench",
        "--synth",
        "rings",
        "--q",
        "4",
        "--sweep-l",
        "3,5",
        "--sweep-m",
        "10,20",
        "--out",
        s(out.path()),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.path().join("bench.csv")).unwrap();
    for key in ["aw_sampling,", "landmark_fit,", "embed,", "l_aw,5,", "m,20,"] {
        assert!(csv.contains(key), "{key}");
    }
}
