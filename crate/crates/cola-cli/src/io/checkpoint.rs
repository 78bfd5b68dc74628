//! Model checkpoint: magic `COLACKPT`, u32 version, u32 f, u32 d, u32 L,
//! then the layer matrices `W(0)..W(L-1)` followed by the discriminator
//! matrix, each row-major little-endian f64. Shapes are implied by the
//! header (`f x d`, then `d x d` repeated). A JSON sidecar at
//! `<path>.json` records the resolved config and its hash.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use cola_core::dense::Matrix;
use cola_core::model::{Activation, ModelParams};

use crate::error::{CliError, Result};

const MAGIC: &[u8; 8] = b"COLACKPT";
const VERSION: u32 = 1;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

pub fn sidecar_path(checkpoint: &Path) -> PathBuf {
    let mut os = checkpoint.as_os_str().to_owned();
    os.push(".json");
    PathBuf::from(os)
}

pub fn save_checkpoint(params: &ModelParams, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    w.write_all(MAGIC).map_err(io_err(path))?;
    w.write_all(&VERSION.to_le_bytes()).map_err(io_err(path))?;
    w.write_all(&(params.attr_dim() as u32).to_le_bytes()).map_err(io_err(path))?;
    w.write_all(&(params.embedding_dim() as u32).to_le_bytes()).map_err(io_err(path))?;
    w.write_all(&(params.layer_count() as u32).to_le_bytes()).map_err(io_err(path))?;
    for matrix in params.layer_weights.iter().chain(std::iter::once(&params.disc_weight)) {
        for &v in matrix.data() {
            w.write_all(&v.to_le_bytes()).map_err(io_err(path))?;
        }
    }
    w.flush().map_err(io_err(path))
}

pub fn load_checkpoint(path: &Path) -> Result<ModelParams> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut r = BufReader::new(file);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(io_err(path))?;
    if &magic != MAGIC {
        return Err(CliError::Format {
            path: path.to_path_buf(),
            message: "not a checkpoint (bad magic)".into(),
        });
    }
    let mut u32buf = [0u8; 4];
    let mut next_u32 = |r: &mut BufReader<File>| -> Result<u32> {
        r.read_exact(&mut u32buf).map_err(io_err(path))?;
        Ok(u32::from_le_bytes(u32buf))
    };
    let version = next_u32(&mut r)?;
    if version != VERSION {
        return Err(CliError::Format {
            path: path.to_path_buf(),
            message: format!("unsupported checkpoint version {version}"),
        });
    }
    let f = next_u32(&mut r)? as usize;
    let d = next_u32(&mut r)? as usize;
    let layers = next_u32(&mut r)? as usize;
    if f == 0 || d == 0 || layers == 0 {
        return Err(CliError::Format {
            path: path.to_path_buf(),
            message: format!("degenerate dimensions f={f} d={d} L={layers}"),
        });
    }

    let mut read_matrix = |rows: usize, cols: usize| -> Result<Matrix> {
        let mut data = vec![0.0f64; rows * cols];
        let mut buf = [0u8; 8];
        for v in &mut data {
            r.read_exact(&mut buf).map_err(io_err(path))?;
            *v = f64::from_le_bytes(buf);
        }
        Ok(Matrix::from_vec(rows, cols, data))
    };
    let mut layer_weights = Vec::with_capacity(layers);
    let mut in_dim = f;
    for _ in 0..layers {
        layer_weights.push(read_matrix(in_dim, d)?);
        in_dim = d;
    }
    let disc_weight = read_matrix(d, d)?;
    Ok(ModelParams {
        layer_weights,
        disc_weight,
        activation: Activation::Relu,
    })
}

/// Sidecar content: the training-stage config snapshot plus its hash.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct CheckpointSidecar {
    pub config_hash: String,
    pub config: crate::config::ResolvedConfig,
}

pub fn save_sidecar(sidecar: &CheckpointSidecar, checkpoint: &Path) -> Result<()> {
    let path = sidecar_path(checkpoint);
    let json = serde_json::to_string_pretty(sidecar)
        .map_err(|e| CliError::Runtime(format!("sidecar serialization failed: {e}")))?;
    std::fs::write(&path, json).map_err(io_err(&path))
}

pub fn load_sidecar(checkpoint: &Path) -> Result<CheckpointSidecar> {
    let path = sidecar_path(checkpoint);
    let raw = std::fs::read_to_string(&path).map_err(io_err(&path))?;
    serde_json::from_str(&raw).map_err(|e| CliError::Format {
        path,
        message: format!("invalid sidecar: {e}"),
    })
}
