//! Round-matrix persistence: magic `COLARNDS`, u32 version, u64 n, u32 R,
//! then the positive and negative `n x R` matrices as row-major
//! little-endian f64.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use cola_core::dense::Matrix;

use crate::error::{CliError, Result};

const MAGIC: &[u8; 8] = b"COLARNDS";
const VERSION: u32 = 1;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

pub fn save_rounds(pos: &Matrix, neg: &Matrix, path: &Path) -> Result<()> {
    assert_eq!(pos.rows(), neg.rows());
    assert_eq!(pos.cols(), neg.cols());
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    w.write_all(MAGIC).map_err(io_err(path))?;
    w.write_all(&VERSION.to_le_bytes()).map_err(io_err(path))?;
    w.write_all(&(pos.rows() as u64).to_le_bytes()).map_err(io_err(path))?;
    w.write_all(&(pos.cols() as u32).to_le_bytes()).map_err(io_err(path))?;
    for matrix in [pos, neg] {
        for &v in matrix.data() {
            w.write_all(&v.to_le_bytes()).map_err(io_err(path))?;
        }
    }
    w.flush().map_err(io_err(path))
}

pub fn load_rounds(path: &Path) -> Result<(Matrix, Matrix)> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut r = BufReader::new(file);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(io_err(path))?;
    if &magic != MAGIC {
        return Err(CliError::Format {
            path: path.to_path_buf(),
            message: "not a rounds file (bad magic)".into(),
        });
    }
    let mut u32buf = [0u8; 4];
    r.read_exact(&mut u32buf).map_err(io_err(path))?;
    let version = u32::from_le_bytes(u32buf);
    if version != VERSION {
        return Err(CliError::Format {
            path: path.to_path_buf(),
            message: format!("unsupported rounds version {version}"),
        });
    }
    let mut u64buf = [0u8; 8];
    r.read_exact(&mut u64buf).map_err(io_err(path))?;
    let n = u64::from_le_bytes(u64buf) as usize;
    r.read_exact(&mut u32buf).map_err(io_err(path))?;
    let rounds = u32::from_le_bytes(u32buf) as usize;

    let load_matrix = |r: &mut BufReader<File>| -> Result<Matrix> {
        let mut data = vec![0.0f64; n * rounds];
        let mut buf = [0u8; 8];
        for v in &mut data {
            r.read_exact(&mut buf).map_err(io_err(path))?;
            *v = f64::from_le_bytes(buf);
        }
        Ok(Matrix::from_vec(n, rounds, data))
    };
    let pos = load_matrix(&mut r)?;
    let neg = load_matrix(&mut r)?;
    Ok((pos, neg))
}
