//! Text outputs: embedding and kernel CSVs, and the versioned model file.
//!
//! CSVs start with `# key=value` provenance lines, then a header row, then one
//! row per record with floats at 9 significant digits.
//!
//! A model file holds the embedding config and every layer's landmarks with
//! floats in shortest round-trip form; the Gram correction is recomputed on
//! load, so a reloaded model embeds bit-identically.

use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use nalgebra::DMatrix;
use thiserror::Error;

use crate::model::{EmbeddingConfig, EmbeddingMatrix, EmbeddingModel, Level};
use crate::nystrom::{Branch, FeatureError, LandmarkSet};

pub const MODEL_MAGIC: &str = "awkernel-model v1";

#[derive(Debug, Error)]
pub enum ExportError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("model file line {line}: {message}")]
    Format { line: usize, message: String },
    #[error(transparent)]
    Feature(#[from] FeatureError),
}

fn write_comments(out: &mut impl Write, config: &[(String, String)]) -> io::Result<()> {
    for (k, v) in config {
        writeln!(out, "# {k}={v}")?;
    }
    Ok(())
}

pub fn write_embedding_csv(out: &mut impl Write, emb: &EmbeddingMatrix, config: &[(String, String)]) -> io::Result<()> {
    write_comments(out, config)?;
    let mut header = String::from(match emb.level {
        Level::Graph => "graph_id",
        Level::Node => "node_id",
    });
    for i in 0..emb.q_walk {
        let _ = write!(header, ",walk_{i}");
    }
    for i in 0..emb.q_aw {
        let _ = write!(header, ",aw_{i}");
    }
    writeln!(out, "{header}")?;
    for (id, row) in emb.ids.iter().zip(&emb.rows) {
        let mut line = id.to_string();
        for x in row {
            let _ = write!(line, ",{x:.8e}");
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn write_kernel_csv(out: &mut impl Write, k: &DMatrix<f64>, config: &[(String, String)]) -> io::Result<()> {
    write_comments(out, config)?;
    let mut header = String::from("id");
    for j in 0..k.ncols() {
        let _ = write!(header, ",{j}");
    }
    writeln!(out, "{header}")?;
    for i in 0..k.nrows() {
        let mut line = i.to_string();
        for j in 0..k.ncols() {
            let _ = write!(line, ",{:.8e}", k[(i, j)]);
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Reads an embedding CSV back into `(ids, rows)`, skipping comment lines.
pub fn read_embedding_csv(input: impl BufRead) -> Result<(Vec<usize>, Vec<Vec<f64>>), ExportError> {
    let mut ids = Vec::new();
    let mut rows = Vec::new();
    let mut header_seen = false;
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        if !header_seen {
            header_seen = true;
            continue;
        }
        let bad = |m: &str| ExportError::Format { line: i + 1, message: m.to_owned() };
        let mut fields = line.split(',');
        ids.push(fields.next().unwrap().trim().parse().map_err(|_| bad("bad id"))?);
        rows.push(
            fields
                .map(|f| f.trim().parse::<f64>().map_err(|_| bad("bad value")))
                .collect::<Result<_, _>>()?,
        );
    }
    Ok((ids, rows))
}

fn floats(v: impl IntoIterator<Item = f64>) -> String {
    v.into_iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
}

fn write_layer(out: &mut impl Write, stack: &str, index: usize, lm: &LandmarkSet) -> io::Result<()> {
    writeln!(
        out,
        "layer stack={stack} index={index} branch={} q={} p={} alpha={:?} l={} epsilon={:?} output_dim={}",
        lm.branch.as_str(),
        lm.q(),
        lm.feature_dim(),
        lm.alpha,
        lm.l,
        lm.epsilon,
        lm.output_dim
    )?;
    for r in 0..lm.q() {
        writeln!(out, "z {}", floats(lm.z.row(r).iter().copied()))?;
    }
    Ok(())
}

pub fn save_model(out: &mut impl Write, model: &EmbeddingModel) -> io::Result<()> {
    writeln!(out, "{MODEL_MAGIC}")?;
    for (k, v) in model.config.to_pairs() {
        writeln!(out, "config {k}={v}")?;
    }
    let fitted: Vec<String> = model.fitted_on.iter().map(|i| i.to_string()).collect();
    writeln!(out, "fitted_on {}", fitted.join(","))?;
    for (i, lm) in model.walk_layers.iter().enumerate() {
        write_layer(out, "walk", i, lm)?;
    }
    for (i, lm) in model.aw_layers.iter().enumerate() {
        write_layer(out, "aw", i, lm)?;
    }
    writeln!(out, "end")
}

struct PendingLayer {
    stack: String,
    branch: Branch,
    q: usize,
    p: usize,
    alpha: f64,
    l: usize,
    epsilon: f64,
    output_dim: usize,
    rows: Vec<Vec<f64>>,
}

pub fn load_model(input: impl BufRead) -> Result<EmbeddingModel, ExportError> {
    let mut config = EmbeddingConfig::default();
    let mut fitted_on = Vec::new();
    let mut layers: Vec<PendingLayer> = Vec::new();
    let mut ended = false;
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let err = |m: String| ExportError::Format { line: i + 1, message: m };
        if i == 0 {
            if line.trim() != MODEL_MAGIC {
                return Err(err(format!("expected {MODEL_MAGIC:?}")));
            }
            continue;
        }
        let (tag, rest) = line.split_once(' ').unwrap_or((line.as_str(), ""));
        match tag {
            "config" => {
                let (k, v) = rest.split_once('=').ok_or_else(|| err("config needs key=value".into()))?;
                if !config.set(k, v).map_err(err)? {
                    return Err(err(format!("unknown config key {k:?}")));
                }
            }
            "fitted_on" => {
                fitted_on = rest
                    .split(',')
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse().map_err(|_| err(format!("bad index {s:?}"))))
                    .collect::<Result<_, _>>()?;
            }
            "layer" => {
                let field = |name: &str| -> Result<&str, ExportError> {
                    rest.split(' ')
                        .find_map(|kv| kv.strip_prefix(name).and_then(|s| s.strip_prefix('=')))
                        .ok_or_else(|| err(format!("layer lacks {name}")))
                };
                let num = |name: &str| -> Result<f64, ExportError> {
                    field(name)?.parse().map_err(|_| err(format!("bad {name}")))
                };
                let int = |name: &str| -> Result<usize, ExportError> {
                    field(name)?.parse().map_err(|_| err(format!("bad {name}")))
                };
                let branch = match field("branch")? {
                    "walk" => Branch::Walk,
                    "aw" => Branch::Aw,
                    b => return Err(err(format!("unknown branch {b:?}"))),
                };
                layers.push(PendingLayer {
                    stack: field("stack")?.to_owned(),
                    branch,
                    q: int("q")?,
                    p: int("p")?,
                    alpha: num("alpha")?,
                    l: int("l")?,
                    epsilon: num("epsilon")?,
                    output_dim: int("output_dim")?,
                    rows: Vec::new(),
                });
            }
            "z" => {
                let layer = layers.last_mut().ok_or_else(|| err("landmark row before any layer".into()))?;
                let row: Vec<f64> = rest
                    .split(',')
                    .map(|s| s.parse().map_err(|_| err(format!("bad float {s:?}"))))
                    .collect::<Result<_, _>>()?;
                if row.len() != layer.p {
                    return Err(err(format!("landmark has {} entries, expected {}", row.len(), layer.p)));
                }
                layer.rows.push(row);
            }
            "end" => {
                ended = true;
                break;
            }
            "" => {}
            t => return Err(err(format!("unknown record {t:?}"))),
        }
    }
    if !ended {
        return Err(ExportError::Format { line: 0, message: "missing end marker".into() });
    }
    let mut walk_layers = Vec::new();
    let mut aw_layers = Vec::new();
    for l in layers {
        if l.rows.len() != l.q {
            return Err(ExportError::Format {
                line: 0,
                message: format!("layer declares q={} but has {} landmarks", l.q, l.rows.len()),
            });
        }
        let set = LandmarkSet::from_landmarks(&l.rows, l.alpha, l.l, l.epsilon, l.branch, l.output_dim)?;
        match l.stack.as_str() {
            "walk" => walk_layers.push(set),
            "aw" => aw_layers.push(set),
            s => {
                return Err(ExportError::Format { line: 0, message: format!("unknown stack {s:?}") });
            }
        }
    }
    Ok(EmbeddingModel {
        config,
        walk_layers,
        aw_layers,
        fitted_on,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::degree_attributes;
    use crate::synthgen::{gen_basic, BasicFamily};
    use std::io::Cursor;

    fn fitted() -> (Vec<crate::Graph>, EmbeddingModel) {
        let graphs = vec![
            degree_attributes(&gen_basic(BasicFamily::Wheel, 6).unwrap(), 5),
            degree_attributes(&gen_basic(BasicFamily::Ladder, 3).unwrap(), 5),
        ];
        let cfg = EmbeddingConfig {
            q_aw: 4,
            q_walk: 3,
            layers: 2,
            alpha: 0.7,
            ..EmbeddingConfig::default()
        };
        let m = EmbeddingModel::fit(&graphs, &[0, 1], &cfg).unwrap();
        (graphs, m)
    }

    #[test]
    fn model_round_trip_is_exact() {
        let (graphs, m) = fitted();
        let mut buf = Vec::new();
        save_model(&mut buf, &m).unwrap();
        let back = load_model(Cursor::new(&buf)).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.embed_collection(&graphs).unwrap(), m.embed_collection(&graphs).unwrap());
    }

    #[test]
    fn model_rejects_garbage() {
        assert!(load_model(Cursor::new("not a model\n")).is_err());
        assert!(load_model(Cursor::new(format!("{MODEL_MAGIC}\nconfig bogus=1\nend\n"))).is_err());
        assert!(load_model(Cursor::new(format!("{MODEL_MAGIC}\n"))).is_err());
    }

    #[test]
    fn embedding_csv_layout() {
        let (graphs, m) = fitted();
        let emb = m.embed_collection(&graphs).unwrap();
        let mut buf = Vec::new();
        write_embedding_csv(&mut buf, &emb, &m.config.to_pairs()).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# branch=both\n"));
        assert!(text.contains("graph_id,walk_0,walk_1,walk_2,aw_0,aw_1,aw_2,aw_3\n"));
        assert!(text.ends_with('\n'));
        let (ids, rows) = read_embedding_csv(Cursor::new(buf)).unwrap();
        assert_eq!(ids, vec![0, 1]);
        for (a, b) in rows.iter().flatten().zip(emb.rows.iter().flatten()) {
            assert!((a - b).abs() <= 1e-8 * b.abs().max(1e-300));
        }
    }

    #[test]
    fn kernel_csv_layout() {
        let k = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 2.0]);
        let mut buf = Vec::new();
        write_kernel_csv(&mut buf, &k, &[("kernel".into(), "awgk".into())]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "# kernel=awgk\nid,0,1\n0,1.00000000e0,5.00000000e-1\n1,5.00000000e-1,2.00000000e0\n");
    }
}
