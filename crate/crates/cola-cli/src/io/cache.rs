//! Binary graph cache for fast reload of large graphs.
//!
//! Layout (all integers little-endian):
//! magic `COLAGRPH`, u32 version, u64 n, u64 m, u64 f, u8 has_labels,
//! CSR offsets ((n+1) x u64), CSR neighbors (2m x u32),
//! attributes (n*f x f64), labels (n x u8, when present).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use cola_core::dense::Matrix;
use cola_core::graph::AttributedGraph;

use crate::error::{CliError, Result};

const MAGIC: &[u8; 8] = b"COLAGRPH";
const VERSION: u32 = 1;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn format_err(path: &Path, message: impl Into<String>) -> CliError {
    CliError::Format { path: path.to_path_buf(), message: message.into() }
}

pub fn save_cache(g: &AttributedGraph, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let write = |w: &mut BufWriter<File>, bytes: &[u8]| w.write_all(bytes).map_err(io_err(path));

    write(&mut w, MAGIC)?;
    write(&mut w, &VERSION.to_le_bytes())?;
    write(&mut w, &(g.node_count() as u64).to_le_bytes())?;
    write(&mut w, &(g.edge_count() as u64).to_le_bytes())?;
    write(&mut w, &(g.attr_dim() as u64).to_le_bytes())?;
    write(&mut w, &[g.labels().is_some() as u8])?;
    for &offset in g.csr_offsets() {
        write(&mut w, &(offset as u64).to_le_bytes())?;
    }
    for &neighbor in g.csr_neighbors() {
        write(&mut w, &neighbor.to_le_bytes())?;
    }
    for &v in g.attributes().data() {
        write(&mut w, &v.to_le_bytes())?;
    }
    if let Some(labels) = g.labels() {
        write(&mut w, labels)?;
    }
    w.flush().map_err(io_err(path))
}

pub fn load_cache(path: &Path) -> Result<AttributedGraph> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut r = BufReader::new(file);

    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(io_err(path))?;
    if &magic != MAGIC {
        return Err(format_err(path, "not a graph cache (bad magic)"));
    }
    let version = read_u32(&mut r, path)?;
    if version != VERSION {
        return Err(format_err(path, format!("unsupported cache version {version}")));
    }
    let n = read_u64(&mut r, path)? as usize;
    let m = read_u64(&mut r, path)? as usize;
    let f = read_u64(&mut r, path)? as usize;
    let mut has_labels = [0u8; 1];
    r.read_exact(&mut has_labels).map_err(io_err(path))?;

    let mut offsets = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        offsets.push(read_u64(&mut r, path)? as usize);
    }
    if offsets.last() != Some(&(2 * m)) {
        return Err(format_err(path, "offset table does not end at 2m"));
    }
    let mut neighbors = vec![0u32; 2 * m];
    read_u32_slice(&mut r, path, &mut neighbors)?;
    let mut attr_data = vec![0.0f64; n * f];
    read_f64_slice(&mut r, path, &mut attr_data)?;
    let attributes = Matrix::from_vec(n, f, attr_data);
    let labels = if has_labels[0] != 0 {
        let mut l = vec![0u8; n];
        r.read_exact(&mut l).map_err(io_err(path))?;
        Some(l)
    } else {
        None
    };

    // Rebuild through the validating constructor so a corrupted cache can
    // never produce an inconsistent graph.
    let mut edges = Vec::with_capacity(m);
    for v in 0..n {
        let (start, end) = (offsets[v], offsets[v + 1]);
        if end > neighbors.len() || start > end {
            return Err(format_err(path, "corrupt offset table"));
        }
        for &u in &neighbors[start..end] {
            let u = u as usize;
            if v < u {
                edges.push((v, u));
            }
        }
    }
    if edges.len() != m {
        return Err(format_err(path, format!("edge payload has {} edges, header says {m}", edges.len())));
    }
    Ok(AttributedGraph::from_edges(&edges, attributes, labels)?)
}

fn read_u32(r: &mut impl Read, path: &Path) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf).map_err(io_err(path))?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64(r: &mut impl Read, path: &Path) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf).map_err(io_err(path))?;
    Ok(u64::from_le_bytes(buf))
}

fn read_u32_slice(r: &mut impl Read, path: &Path, out: &mut [u32]) -> Result<()> {
    let mut buf = [0u8; 4];
    for v in out {
        r.read_exact(&mut buf).map_err(io_err(path))?;
        *v = u32::from_le_bytes(buf);
    }
    Ok(())
}

fn read_f64_slice(r: &mut impl Read, path: &Path, out: &mut [f64]) -> Result<()> {
    let mut buf = [0u8; 8];
    for v in out {
        r.read_exact(&mut buf).map_err(io_err(path))?;
        *v = f64::from_le_bytes(buf);
    }
    Ok(())
}
