//! CSV and single-value text outputs.

use std::io::Write;
use std::path::Path;

use cola_core::eval::{RocCurve, SweepRow};

use crate::error::{CliError, Result};
use crate::io::text::{open_reader, open_writer};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

/// `scores.csv`: header `node_id,score`, one row per node.
pub fn write_scores_csv(scores: &[f64], path: &Path) -> Result<()> {
    let mut w = open_writer(path)?;
    writeln!(w, "node_id,score").map_err(io_err(path))?;
    for (node, score) in scores.iter().enumerate() {
        writeln!(w, "{node},{score}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_scores_csv(path: &Path) -> Result<Vec<f64>> {
    let reader = open_reader(path)?;
    let mut scores = Vec::new();
    for (idx, line) in std::io::BufRead::lines(reader).enumerate() {
        let line = line.map_err(io_err(path))?;
        let line_no = idx + 1;
        if line_no == 1 || line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let (node, score) = match (fields.next(), fields.next(), fields.next()) {
            (Some(n), Some(s), None) => (n, s),
            _ => {
                return Err(CliError::Parse {
                    path: path.to_path_buf(),
                    line: line_no,
                    message: "expected `node_id,score`".into(),
                })
            }
        };
        let node: usize = node.trim().parse().map_err(|_| CliError::Parse {
            path: path.to_path_buf(),
            line: line_no,
            message: format!("invalid node id `{node}`"),
        })?;
        if node != scores.len() {
            return Err(CliError::Parse {
                path: path.to_path_buf(),
                line: line_no,
                message: format!("node ids must be dense and ascending, got {node}"),
            });
        }
        let score: f64 = score.trim().parse().map_err(|_| CliError::Parse {
            path: path.to_path_buf(),
            line: line_no,
            message: format!("invalid score `{score}`"),
        })?;
        scores.push(score);
    }
    Ok(scores)
}

/// `train_log.csv`: header `iteration,loss`.
pub fn write_train_log(losses: &[f64], path: &Path) -> Result<()> {
    let mut w = open_writer(path)?;
    writeln!(w, "iteration,loss").map_err(io_err(path))?;
    for (iteration, loss) in losses.iter().enumerate() {
        writeln!(w, "{iteration},{loss}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// `roc.csv`: header `fpr,tpr`, one row per threshold point.
pub fn write_roc_csv(curve: &RocCurve, path: &Path) -> Result<()> {
    let mut w = open_writer(path)?;
    writeln!(w, "fpr,tpr").map_err(io_err(path))?;
    for (fpr, tpr) in &curve.points {
        writeln!(w, "{fpr},{tpr}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_auc_txt(auc: f64, path: &Path) -> Result<()> {
    let mut w = open_writer(path)?;
    writeln!(w, "{auc}").map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

/// `sweep_<axis>.csv`: header `value,mean_auc,std_auc`.
pub fn write_sweep_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    let mut w = open_writer(path)?;
    writeln!(w, "value,mean_auc,std_auc").map_err(io_err(path))?;
    for row in rows {
        writeln!(w, "{},{},{}", row.value, row.mean_auc, row.std_auc).map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}
