//! Text formats: whitespace-separated edge lists, dense CSV attribute
//! matrices, and one-label-per-line files. Paths ending in `.gz` are
//! compressed transparently in both directions.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use cola_core::dense::Matrix;
use cola_core::graph::AttributedGraph;
use flate2::read::GzDecoder;
use flate2::write::GzEncoder;

use crate::error::{CliError, Result};

/// Loader side effects worth reporting: the raw line count vs what survived
/// symmetrize + dedup, and how many self-loop lines were dropped.
#[derive(Debug, Clone, Copy, Default, serde::Serialize, serde::Deserialize)]
pub struct LoadReport {
    pub raw_edge_lines: usize,
    pub self_loops_skipped: usize,
    pub undirected_edges: usize,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn is_gz(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "gz")
}

pub fn open_reader(path: &Path) -> Result<Box<dyn BufRead>> {
    let file = File::open(path).map_err(io_err(path))?;
    if is_gz(path) {
        Ok(Box::new(BufReader::new(GzDecoder::new(BufReader::new(file)))))
    } else {
        Ok(Box::new(BufReader::new(file)))
    }
}

pub fn open_writer(path: &Path) -> Result<Box<dyn Write>> {
    let file = File::create(path).map_err(io_err(path))?;
    if is_gz(path) {
        Ok(Box::new(BufWriter::new(GzEncoder::new(
            BufWriter::new(file),
            flate2::Compression::default(),
        ))))
    } else {
        Ok(Box::new(BufWriter::new(file)))
    }
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> CliError {
    CliError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Reads `src dst` integer pairs. Self-loop lines are skipped and counted;
/// blank lines are ignored.
pub fn read_edges(path: &Path) -> Result<(Vec<(usize, usize)>, usize, usize)> {
    let reader = open_reader(path)?;
    let mut edges = Vec::new();
    let mut raw_lines = 0usize;
    let mut self_loops = 0usize;
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let (a, b) = match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => return Err(parse_err(path, line_no, "expected exactly two fields `src dst`")),
        };
        let a: usize = a
            .parse()
            .map_err(|_| parse_err(path, line_no, format!("invalid node id `{a}`")))?;
        let b: usize = b
            .parse()
            .map_err(|_| parse_err(path, line_no, format!("invalid node id `{b}`")))?;
        raw_lines += 1;
        if a == b {
            self_loops += 1;
            continue;
        }
        edges.push((a, b));
    }
    Ok((edges, raw_lines, self_loops))
}

/// Reads the dense CSV attribute matrix; every row must have the width of
/// the first row.
pub fn read_attributes(path: &Path) -> Result<Matrix> {
    let reader = open_reader(path)?;
    let mut data: Vec<f64> = Vec::new();
    let mut cols = 0usize;
    let mut rows = 0usize;
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let before = data.len();
        for field in line.split(',') {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| parse_err(path, line_no, format!("invalid real `{}`", field.trim())))?;
            data.push(v);
        }
        let width = data.len() - before;
        if rows == 0 {
            cols = width;
        } else if width != cols {
            return Err(parse_err(
                path,
                line_no,
                format!("row has {width} columns, expected {cols}"),
            ));
        }
        rows += 1;
    }
    if rows == 0 || cols == 0 {
        return Err(parse_err(path, 1, "attribute file is empty"));
    }
    Ok(Matrix::from_vec(rows, cols, data))
}

/// Reads one `{0,1}` label per line.
pub fn read_labels(path: &Path) -> Result<Vec<u8>> {
    let reader = open_reader(path)?;
    let mut labels = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        match trimmed {
            "0" => labels.push(0),
            "1" => labels.push(1),
            other => {
                return Err(parse_err(path, idx + 1, format!("invalid label `{other}`, want 0 or 1")))
            }
        }
    }
    Ok(labels)
}

/// Loads and validates a full attributed graph from text files.
pub fn load_graph(
    edge_path: &Path,
    attr_path: &Path,
    label_path: Option<&Path>,
) -> Result<(AttributedGraph, LoadReport)> {
    let attributes = read_attributes(attr_path)?;
    let n = attributes.rows();
    let (edges, raw_edge_lines, self_loops_skipped) = read_edges(edge_path)?;
    if let Some(&(a, b)) = edges.iter().find(|&&(a, b)| a >= n || b >= n) {
        let bad = if a >= n { a } else { b };
        let line = find_edge_line(edge_path, bad)?;
        return Err(parse_err(
            edge_path,
            line,
            format!("node id {bad} out of range for {n} attribute rows"),
        ));
    }
    let labels = match label_path {
        Some(p) => {
            let l = read_labels(p)?;
            if l.len() != n {
                return Err(CliError::Format {
                    path: p.to_path_buf(),
                    message: format!("{} labels for {} nodes", l.len(), n),
                });
            }
            Some(l)
        }
        None => None,
    };
    let graph = AttributedGraph::from_edges(&edges, attributes, labels)?;
    let report = LoadReport {
        raw_edge_lines,
        self_loops_skipped,
        undirected_edges: graph.edge_count(),
    };
    Ok((graph, report))
}

fn find_edge_line(path: &Path, node: usize) -> Result<usize> {
    let reader = open_reader(path)?;
    let needle = node.to_string();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.split_whitespace().any(|f| f == needle) {
            return Ok(idx + 1);
        }
    }
    Ok(0)
}

/// Writes one `src dst` line per undirected edge, smaller endpoint first,
/// in ascending order.
pub fn write_edges(g: &AttributedGraph, path: &Path) -> Result<()> {
    let mut w = open_writer(path)?;
    for v in 0..g.node_count() {
        for &u in g.neighbors(v) {
            let u = u as usize;
            if v < u {
                writeln!(w, "{v} {u}").map_err(io_err(path))?;
            }
        }
    }
    w.flush().map_err(io_err(path))
}

/// Writes the attribute matrix as CSV. `f64` display is shortest
/// round-trip, so load(write(g)) reproduces the exact values.
pub fn write_attributes(g: &AttributedGraph, path: &Path) -> Result<()> {
    let mut w = open_writer(path)?;
    let attrs = g.attributes();
    let mut line = String::new();
    for r in 0..attrs.rows() {
        line.clear();
        for (i, v) in attrs.row(r).iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&format!("{v}"));
        }
        writeln!(w, "{line}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_labels(labels: &[u8], path: &Path) -> Result<()> {
    let mut w = open_writer(path)?;
    for l in labels {
        writeln!(w, "{l}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Reads a whole (possibly gzipped) file into a byte buffer.
pub fn read_all(path: &Path) -> Result<Vec<u8>> {
    let mut reader = open_reader(path)?;
    let mut buf = Vec::new();
    reader.read_to_end(&mut buf).map_err(io_err(path))?;
    Ok(buf)
}

pub fn path_buf(p: &Path) -> PathBuf {
    p.to_path_buf()
}
