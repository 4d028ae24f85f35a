mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;

/// Anonymous-walk graph embeddings: generate, embed, evaluate, check, benchmark.
#[derive(Debug, Parser)]
#[command(name = "awkernel", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic collection in TUDataset format.
    Synth {
        /// structure, regular or rings
        #[arg(long)]
        family: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Fit landmarks and write graph embeddings plus the model file.
    Embed {
        /// Embed with a saved model instead of fitting one.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Also write per-node embeddings.
        #[arg(long)]
        node_embeddings: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Cross-validated classification report.
    Eval {
        /// Comma list of rw-degree, aw, rw-attr, full, or `all`.
        #[arg(long)]
        ablate: Option<String>,
        #[arg(long)]
        folds: Option<usize>,
        /// Repeat cross-validation with seeds cv_seed, cv_seed + 1, ...
        #[arg(long)]
        repeats: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Run the property suite; exits 3 if any check fails.
    OracleCheck {
        #[command(flatten)]
        common: Common,
    },
    /// Per-phase wall-clock timings and scaling sweeps.
    Bench {
        /// Walk lengths for the AW sampling sweep.
        #[arg(long, value_delimiter = ',', default_values_t = [3usize, 4, 5, 6, 7, 8])]
        sweep_l: Vec<usize>,
        /// Walk counts for the AW sampling sweep.
        #[arg(long, value_delimiter = ',', default_values_t = [25usize, 50, 100, 200])]
        sweep_m: Vec<usize>,
        #[command(flatten)]
        common: Common,
    },
}

/// Flags shared by every subcommand. They override the config file.
#[derive(Debug, Clone, Default, Args)]
struct Common {
    /// Flat key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// TUDataset directory.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Dataset name inside --data (defaults to the directory name).
    #[arg(long)]
    name: Option<String>,
    /// Generate the dataset in memory instead (structure, regular, rings).
    #[arg(long)]
    synth: Option<String>,
    /// Seeds sampling, landmark fitting, fold assignment and generation.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// walk, aw or both
    #[arg(long)]
    branch: Option<String>,
    #[arg(long)]
    l_aw: Option<usize>,
    #[arg(long)]
    l_rw: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// Landmarks per branch.
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    layers: Option<usize>,
    /// graph or node
    #[arg(long)]
    task: Option<String>,
    /// Node-task targets stem: reads <data>/<targets>_node_labels.txt.
    #[arg(long)]
    targets: Option<String>,
    /// Any other config key, as key=value. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

pub enum CliError {
    Usage(String),
    Data(String),
    Property(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Property(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Property(m) => m,
        }
    }
}

impl Common {
    fn overrides(&self) -> Vec<(String, String)> {
        let mut v: Vec<(String, String)> = Vec::new();
        let mut push = |k: &str, val: Option<String>| {
            if let Some(val) = val {
                v.push((k.to_owned(), val));
            }
        };
        push("data", self.data.as_ref().map(|p| p.display().to_string()));
        push("name", self.name.clone());
        push("synth", self.synth.clone());
        push("out", self.out.as_ref().map(|p| p.display().to_string()));
        push("threads", self.threads.map(|t| t.to_string()));
        push("branch", self.branch.clone());
        push("l_aw", self.l_aw.map(|x| x.to_string()));
        push("l_rw", self.l_rw.map(|x| x.to_string()));
        push("m", self.m.map(|x| x.to_string()));
        push("q", self.q.map(|x| x.to_string()));
        push("alpha", self.alpha.map(|x| format!("{x:?}")));
        push("layers", self.layers.map(|x| x.to_string()));
        push("task", self.task.clone());
        push("targets", self.targets.clone());
        v
    }

    /// Defaults, then the config file, then flags.
    fn resolve(&self, extra: &[(&str, Option<String>)]) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Data(format!("cannot read config {}: {e}", path.display())))?;
            cfg.apply_text(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        }
        for (k, v) in self.overrides() {
            cfg.set(&k, &v).map_err(|e| CliError::Usage(format!("--{}: {e}", k.replace('_', "-"))))?;
        }
        for (k, v) in extra {
            if let Some(v) = v {
                cfg.set(k, v).map_err(CliError::Usage)?;
            }
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--set expects key=value, got {kv:?}")))?;
            cfg.set(k.trim(), v).map_err(CliError::Usage)?;
        }
        if let Some(seed) = self.seed {
            let s = seed.to_string();
            cfg.set("seed", &s).map_err(CliError::Usage)?;
            cfg.set("cv_seed", &s).map_err(CliError::Usage)?;
            if matches!(cfg.source, config::Source::Synth { .. }) {
                cfg.set("synth_seed", &s).map_err(CliError::Usage)?;
            }
        }
        cfg.check().map_err(CliError::Usage)?;
        if let Some(n) = cfg.threads {
            // Fails only if a pool already exists, which cannot happen here.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Synth { family, common } => {
            let cfg = common.resolve(&[("synth", family)])?;
            commands::synth(&cfg)
        }
        Command::Embed { model, node_embeddings, common } => {
            let cfg = common.resolve(&[("node_embeddings", node_embeddings.then(|| "true".to_owned()))])?;
            commands::embed(&cfg, model.as_deref())
        }
        Command::Eval { ablate, folds, repeats, common } => {
            let cfg = common.resolve(&[
                ("ablate", ablate),
                ("folds", folds.map(|f| f.to_string())),
                ("cv_repeats", repeats.map(|r| r.to_string())),
            ])?;
            commands::eval(&cfg)
        }
        Command::OracleCheck { common } => commands::oracle_check(&common.resolve(&[])?),
        Command::Bench { sweep_l, sweep_m, common } => commands::bench(&common.resolve(&[])?, &sweep_l, &sweep_m),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
