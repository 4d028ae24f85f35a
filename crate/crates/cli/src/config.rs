//! Run configuration: a flat `key=value` file, overridable from the command line.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use awkernel::classify::{Ablation, ClassifierConfig};
use awkernel::EmbeddingConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Graph,
    Node,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::Graph => "graph",
            Task::Node => "node",
        }
    }
}

impl FromStr for Task {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "graph" => Ok(Task::Graph),
            "node" => Ok(Task::Node),
            _ => Err(format!("unknown task {s:?} (graph, node)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthKind {
    Structure,
    Regular,
    Rings,
}

impl SynthKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SynthKind::Structure => "structure",
            SynthKind::Regular => "regular",
            SynthKind::Rings => "rings",
        }
    }
}

impl FromStr for SynthKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "structure" => Ok(SynthKind::Structure),
            "regular" => Ok(SynthKind::Regular),
            "rings" => Ok(SynthKind::Rings),
            _ => Err(format!("unknown family {s:?} (structure, regular, rings)")),
        }
    }
}

/// Where graphs come from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    /// TUDataset directory plus dataset name (defaults to the directory name).
    Tu { dir: PathBuf, name: Option<String> },
    /// Generated in memory.
    Synth { family: SynthKind, seed: u64 },
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub source: Source,
    pub task: Task,
    pub embed: EmbeddingConfig,
    pub classifier: ClassifierConfig,
    pub folds: usize,
    pub cv_seed: u64,
    pub cv_repeats: usize,
    pub train_fraction: f64,
    pub runs: usize,
    /// Node-task targets file stem (`<targets>_node_labels.txt`).
    pub targets: Option<String>,
    pub ablate: Vec<Ablation>,
    pub node_embeddings: bool,
    pub out: PathBuf,
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            source: Source::None,
            task: Task::Graph,
            embed: EmbeddingConfig::default(),
            classifier: ClassifierConfig::default(),
            folds: 10,
            cv_seed: 0,
            cv_repeats: 1,
            train_fraction: 0.7,
            runs: 10,
            targets: None,
            ablate: Vec::new(),
            node_embeddings: false,
            out: PathBuf::from("out"),
            threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "config line {}: {}", self.line, self.message)
        }
    }
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("bad value {value:?} for {key}"))
}

impl RunConfig {
    /// Applies one setting. Embedding and classifier keys are forwarded.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let value = value.trim();
        match key {
            "data" => {
                let name = match &self.source {
                    Source::Tu { name, .. } => name.clone(),
                    _ => None,
                };
                self.source = Source::Tu { dir: PathBuf::from(value), name };
            }
            "name" => match &mut self.source {
                Source::Tu { name, .. } => *name = Some(value.to_owned()),
                _ => return Err("name needs data set first".into()),
            },
            "synth" => {
                let family = value.parse()?;
                let seed = match self.source {
                    Source::Synth { seed, .. } => seed,
                    _ => 0,
                };
                self.source = Source::Synth { family, seed };
            }
            "synth_seed" => match &mut self.source {
                Source::Synth { seed, .. } => *seed = num(key, value)?,
                _ => return Err("synth_seed needs synth set first".into()),
            },
            "task" => self.task = value.parse()?,
            "folds" => self.folds = num(key, value)?,
            "cv_seed" => self.cv_seed = num(key, value)?,
            "cv_repeats" => self.cv_repeats = num(key, value)?,
            "train_fraction" => self.train_fraction = num(key, value)?,
            "runs" => self.runs = num(key, value)?,
            "targets" => self.targets = (!value.is_empty()).then(|| value.to_owned()),
            "ablate" => {
                self.ablate = if value.is_empty() {
                    Vec::new()
                } else if value == "all" {
                    Ablation::ALL.to_vec()
                } else {
                    value.split(',').map(|s| s.trim().parse()).collect::<Result<_, _>>()?
                }
            }
            "node_embeddings" => self.node_embeddings = num(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "threads" => {
                self.threads = match value {
                    "" | "auto" => None,
                    v => Some(num(key, v)?),
                }
            }
            _ => {
                if !self.embed.set(key, value)? && !self.classifier.set(key, value)? {
                    return Err(format!("unknown key {key:?}"));
                }
            }
        }
        Ok(())
    }

    pub fn check(&self) -> Result<(), String> {
        self.embed.check().map_err(|e| e.to_string())?;
        if self.folds < 2 {
            return Err("folds must be >= 2".into());
        }
        if self.cv_repeats == 0 || self.runs == 0 {
            return Err("cv_repeats and runs must be >= 1".into());
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err("train_fraction must lie in (0, 1)".into());
        }
        if self.threads == Some(0) {
            return Err("threads must be >= 1".into());
        }
        Ok(())
    }

    /// Every setting in a fixed order; [`RunConfig::apply_text`] on a default config reads it back exactly.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let mut v: Vec<(String, String)> = Vec::new();
        let mut push = |k: &str, val: String| v.push((k.to_owned(), val));
        match &self.source {
            Source::Tu { dir, name } => {
                push("data", dir.display().to_string());
                if let Some(n) = name {
                    push("name", n.clone());
                }
            }
            Source::Synth { family, seed } => {
                push("synth", family.as_str().to_owned());
                push("synth_seed", seed.to_string());
            }
            Source::None => {}
        }
        push("task", self.task.as_str().to_owned());
        push("folds", self.folds.to_string());
        push("cv_seed", self.cv_seed.to_string());
        push("cv_repeats", self.cv_repeats.to_string());
        push("train_fraction", format!("{:?}", self.train_fraction));
        push("runs", self.runs.to_string());
        if let Some(t) = &self.targets {
            push("targets", t.clone());
        }
        let ablate: Vec<&str> = self.ablate.iter().map(|a| a.as_str()).collect();
        push("ablate", ablate.join(","));
        push("node_embeddings", self.node_embeddings.to_string());
        push("out", self.out.display().to_string());
        push("threads", self.threads.map_or("auto".into(), |t| t.to_string()));
        v.extend(self.embed.to_pairs());
        v.extend(self.classifier.to_pairs());
        v
    }

    pub fn to_text(&self) -> String {
        self.to_pairs().into_iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    /// Reads `key=value` lines on top of `self`. Blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| ConfigError { line: i + 1, message };
            let (k, v) = line.split_once('=').ok_or_else(|| err("expected key=value".into()))?;
            self.set(k.trim(), v).map_err(err)?;
        }
        Ok(())
    }

    #[cfg(test)]
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut c = RunConfig::default();
        c.apply_text(text)?;
        Ok(c)
    }
}
