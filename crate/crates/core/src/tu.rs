//! Reader and writer for the TUDataset plain-text layout.
//!
//! A dataset `NAME` lives in one directory:
//!
//! * `NAME_A.txt`: one `u, v` line per directed edge, 1-based global node ids
//! * `NAME_graph_indicator.txt`: 1-based graph id of each node
//! * `NAME_graph_labels.txt`: one class label per graph
//! * `NAME_node_labels.txt` (optional): one integer label per node
//! * `NAME_node_attributes.txt` (optional): comma-separated floats per node
//!
//! Node ids are remapped to 0-based ids local to their graph. Graph labels are
//! remapped to contiguous class ids in ascending label order, node labels to a
//! one-hot of width equal to the number of distinct labels. Without either node
//! file, nodes get one-hot degrees capped at the collection's maximum degree.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::graph::{one_hot, AttributeKind, Graph, GraphCollection, GraphError};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("missing dataset file {0}")]
    MissingFile(PathBuf),
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn file(dir: &Path, name: &str, suffix: &str) -> PathBuf {
    dir.join(format!("{name}_{suffix}.txt"))
}

fn read_lines(path: &Path, required: bool) -> Result<Option<Vec<String>>, DatasetError> {
    match fs::read_to_string(path) {
        Ok(text) => Ok(Some(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(str::to_owned)
                .collect(),
        )),
        Err(e) if e.kind() == io::ErrorKind::NotFound => {
            if required {
                Err(DatasetError::MissingFile(path.to_owned()))
            } else {
                Ok(None)
            }
        }
        Err(source) => Err(DatasetError::Io {
            path: path.to_owned(),
            source,
        }),
    }
}

fn parse<T: std::str::FromStr>(path: &Path, line: usize, text: &str) -> Result<T, DatasetError> {
    text.trim().parse().map_err(|_| DatasetError::Format {
        path: path.to_owned(),
        line: line + 1,
        message: format!("cannot parse {text:?}"),
    })
}

fn format_err(path: &Path, line: usize, message: String) -> DatasetError {
    DatasetError::Format {
        path: path.to_owned(),
        line: line + 1,
        message,
    }
}

/// Loads `dir/NAME_*.txt` into a [`GraphCollection`].
pub fn load_tu_dataset(dir: impl AsRef<Path>, name: &str) -> Result<GraphCollection, DatasetError> {
    let dir = dir.as_ref();
    let a_path = file(dir, name, "A");
    let ind_path = file(dir, name, "graph_indicator");
    let gl_path = file(dir, name, "graph_labels");
    let a_lines = read_lines(&a_path, true)?.unwrap_or_default();
    let ind_lines = read_lines(&ind_path, true)?.unwrap_or_default();
    let gl_lines = read_lines(&gl_path, true)?.unwrap_or_default();

    let mut graph_of = Vec::with_capacity(ind_lines.len());
    for (i, l) in ind_lines.iter().enumerate() {
        let id: usize = parse(&ind_path, i, l)?;
        if id == 0 {
            return Err(format_err(&ind_path, i, "graph ids are 1-based".into()));
        }
        graph_of.push(id - 1);
    }
    let graph_count = gl_lines.len();
    if let Some((i, &g)) = graph_of.iter().enumerate().find(|(_, &g)| g >= graph_count) {
        return Err(format_err(
            &ind_path,
            i,
            format!("graph id {} but only {graph_count} graph labels", g + 1),
        ));
    }

    let mut local = Vec::with_capacity(graph_of.len());
    let mut sizes = vec![0usize; graph_count];
    for &g in &graph_of {
        local.push(sizes[g]);
        sizes[g] += 1;
    }

    let mut edges: Vec<Vec<(usize, usize)>> = vec![Vec::new(); graph_count];
    for (i, l) in a_lines.iter().enumerate() {
        let (u, v) = l
            .split_once(',')
            .ok_or_else(|| format_err(&a_path, i, format!("expected \"u, v\", got {l:?}")))?;
        let u: usize = parse(&a_path, i, u)?;
        let v: usize = parse(&a_path, i, v)?;
        for x in [u, v] {
            if x == 0 || x > graph_of.len() {
                return Err(format_err(
                    &a_path,
                    i,
                    format!("node id {x} outside 1..={}", graph_of.len()),
                ));
            }
        }
        let (u, v) = (u - 1, v - 1);
        if graph_of[u] != graph_of[v] {
            return Err(format_err(
                &a_path,
                i,
                format!(
                    "edge joins node {} of graph {} and node {} of graph {}",
                    u + 1,
                    graph_of[u] + 1,
                    v + 1,
                    graph_of[v] + 1
                ),
            ));
        }
        if u != v {
            edges[graph_of[u]].push((local[u], local[v]));
        }
    }

    let raw_labels: Vec<i64> = gl_lines
        .iter()
        .enumerate()
        .map(|(i, l)| parse(&gl_path, i, l))
        .collect::<Result<_, _>>()?;
    let class_ids = dense_ids(&raw_labels);
    let class_count = class_ids.len().max(1);

    let attr_path = file(dir, name, "node_attributes");
    let nl_path = file(dir, name, "node_labels");
    let (kind, node_attrs): (AttributeKind, Vec<Vec<f64>>) =
        if let Some(lines) = read_lines(&attr_path, false)? {
            let rows = lines
                .iter()
                .enumerate()
                .map(|(i, l)| {
                    l.split(',')
                        .map(|x| parse::<f64>(&attr_path, i, x))
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?;
            (AttributeKind::Continuous, rows)
        } else if let Some(lines) = read_lines(&nl_path, false)? {
            let labels: Vec<i64> = lines
                .iter()
                .enumerate()
                .map(|(i, l)| parse(&nl_path, i, l))
                .collect::<Result<_, _>>()?;
            let ids = dense_ids(&labels);
            let rows = labels.iter().map(|x| one_hot(ids[x], ids.len())).collect();
            (AttributeKind::Categorical, rows)
        } else {
            (AttributeKind::None, vec![vec![1.0]; graph_of.len()])
        };
    if node_attrs.len() != graph_of.len() {
        let path = if kind == AttributeKind::Continuous { attr_path } else { nl_path };
        return Err(format_err(
            &path,
            node_attrs.len(),
            format!("{} rows for {} nodes", node_attrs.len(), graph_of.len()),
        ));
    }

    let mut per_graph: Vec<Vec<Vec<f64>>> = sizes.iter().map(|&s| Vec::with_capacity(s)).collect();
    for (node, attr) in node_attrs.into_iter().enumerate() {
        per_graph[graph_of[node]].push(attr);
    }
    let graphs = per_graph
        .into_iter()
        .zip(edges)
        .zip(&raw_labels)
        .enumerate()
        .map(|(gi, ((attrs, e), raw))| Graph::new(sizes[gi], e, attrs, Some(class_ids[raw])))
        .collect::<Result<Vec<_>, _>>()?;
    let coll = GraphCollection::new(graphs, class_count, kind)?;
    Ok(if kind == AttributeKind::None {
        coll.with_degree_attributes()
    } else {
        coll
    })
}

fn dense_ids(values: &[i64]) -> BTreeMap<i64, usize> {
    let mut ids: BTreeMap<i64, usize> = values.iter().map(|&v| (v, 0)).collect();
    for (i, id) in ids.values_mut().enumerate() {
        *id = i;
    }
    ids
}

/// Writes `coll` as `dir/NAME_*.txt`. Unlabeled graphs are written with class 0.
/// Categorical attributes are written as the index of their largest entry.
pub fn write_tu_dataset(
    coll: &GraphCollection,
    dir: impl AsRef<Path>,
    name: &str,
) -> Result<(), DatasetError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|source| DatasetError::Io {
        path: dir.to_owned(),
        source,
    })?;
    let mut a = String::new();
    let mut ind = String::new();
    let mut gl = String::new();
    let mut nodes = String::new();
    let mut offset = 0;
    for (gi, g) in coll.graphs.iter().enumerate() {
        for &(u, v) in g.edges() {
            let _ = writeln!(a, "{}, {}", u + offset + 1, v + offset + 1);
            let _ = writeln!(a, "{}, {}", v + offset + 1, u + offset + 1);
        }
        for u in 0..g.node_count() {
            let _ = writeln!(ind, "{}", gi + 1);
            let attr = g.attribute(u);
            match coll.attribute_kind {
                AttributeKind::Categorical => {
                    let idx = attr
                        .iter()
                        .enumerate()
                        .fold((0, f64::NEG_INFINITY), |best, (i, &x)| {
                            if x > best.1 {
                                (i, x)
                            } else {
                                best
                            }
                        })
                        .0;
                    let _ = writeln!(nodes, "{idx}");
                }
                AttributeKind::Continuous => {
                    let row: Vec<String> = attr.iter().map(|x| format!("{x:?}")).collect();
                    let _ = writeln!(nodes, "{}", row.join(", "));
                }
                AttributeKind::None => {}
            }
        }
        let _ = writeln!(gl, "{}", g.label().unwrap_or(0));
        offset += g.node_count();
    }
    let mut files = vec![("A", a), ("graph_indicator", ind), ("graph_labels", gl)];
    match coll.attribute_kind {
        AttributeKind::Categorical => files.push(("node_labels", nodes)),
        AttributeKind::Continuous => files.push(("node_attributes", nodes)),
        AttributeKind::None => {}
    }
    for (suffix, body) in files {
        let path = file(dir, name, suffix);
        fs::write(&path, body).map_err(|source| DatasetError::Io { path, source })?;
    }
    Ok(())
}

/// Reads `NAME_node_labels.txt` as per-node class targets, remapped to 0-based ids.
pub fn load_node_targets(dir: impl AsRef<Path>, name: &str) -> Result<Vec<usize>, DatasetError> {
    let path = file(dir.as_ref(), name, "node_labels");
    let lines = read_lines(&path, true)?.unwrap_or_default();
    let labels: Vec<i64> = lines
        .iter()
        .enumerate()
        .map(|(i, l)| parse(&path, i, l))
        .collect::<Result<_, _>>()?;
    let ids = dense_ids(&labels);
    Ok(labels.iter().map(|x| ids[x]).collect())
}
