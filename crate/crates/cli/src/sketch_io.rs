//! The `SKRG` sketch file format.
//!
//! Layout (little-endian):
//!
//! ```text
//! magic   "SKRG"      4 bytes
//! version u16         format version, currently 1
//! method  u8          sketch method tag
//! master  u64         hash seed master (the full seed serialisation)
//! k       u64         sketch rows
//! d_total u64         sketch columns
//! m       u64         Hadamard dimension, 0 if unused
//! rows    u64         rows consumed by the builder
//! payload k * d_total f64, row-major: the finalised sketch
//! ```
//!
//! Identical seeds and streams produce byte-identical files.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use sketchreg_core::hashing::SketchSeed;
use sketchreg_core::linalg::DenseMatrix;
use sketchreg_core::sketch::SketchMethod;

use crate::data::write_csv;
use crate::error::CliError;

pub const SKRG_MAGIC: &[u8; 4] = b"SKRG";
pub const SKRG_VERSION: u16 = 1;

/// A finalised sketch plus the configuration that defines it.
#[derive(Debug, Clone, PartialEq)]
pub struct SketchFile {
    pub method: SketchMethod,
    pub seed_master: u64,
    pub m: u64,
    pub rows_seen: u64,
    pub payload: DenseMatrix,
}

impl SketchFile {
    pub fn k(&self) -> usize {
        self.payload.rows()
    }

    pub fn d_total(&self) -> usize {
        self.payload.cols()
    }

    pub fn seed(&self) -> SketchSeed {
        SketchSeed::from_master(self.seed_master)
    }

    /// Variable block `P X` (all but the last column).
    pub fn design(&self) -> DenseMatrix {
        self.payload.columns(0, self.d_total() - 1)
    }

    /// Response column `P Y`.
    pub fn response(&self) -> Vec<f64> {
        (0..self.k()).map(|i| self.payload.get(i, self.d_total() - 1)).collect()
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let file = File::create(path).map_err(|e| CliError::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e: std::io::Error| CliError::io(path, e);
        w.write_all(SKRG_MAGIC).map_err(io)?;
        w.write_all(&SKRG_VERSION.to_le_bytes()).map_err(io)?;
        w.write_all(&[self.method.tag()]).map_err(io)?;
        w.write_all(&self.seed_master.to_le_bytes()).map_err(io)?;
        w.write_all(&(self.k() as u64).to_le_bytes()).map_err(io)?;
        w.write_all(&(self.d_total() as u64).to_le_bytes()).map_err(io)?;
        w.write_all(&self.m.to_le_bytes()).map_err(io)?;
        w.write_all(&self.rows_seen.to_le_bytes()).map_err(io)?;
        for v in self.payload.data() {
            w.write_all(&v.to_le_bytes()).map_err(io)?;
        }
        w.flush().map_err(io)
    }

    pub fn read(path: &Path) -> Result<SketchFile, CliError> {
        let file = File::open(path).map_err(|e| CliError::io(path, e))?;
        let mut r = BufReader::new(file);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(|e| CliError::io(path, e))?;
        if &magic != SKRG_MAGIC {
            return Err(CliError::io(path, "bad magic; not an SKRG sketch file"));
        }
        let version = read_u16(&mut r, path)?;
        if version != SKRG_VERSION {
            return Err(CliError::io(path, format!("unsupported SKRG version {version}")));
        }
        let mut tag = [0u8; 1];
        r.read_exact(&mut tag).map_err(|e| CliError::io(path, e))?;
        let method = SketchMethod::from_tag(tag[0])
            .ok_or_else(|| CliError::io(path, format!("unknown method tag {}", tag[0])))?;
        let seed_master = read_u64(&mut r, path)?;
        let k = read_u64(&mut r, path)? as usize;
        let d_total = read_u64(&mut r, path)? as usize;
        let m = read_u64(&mut r, path)?;
        let rows_seen = read_u64(&mut r, path)?;
        let mut raw = vec![0u8; k * d_total * 8];
        r.read_exact(&mut raw).map_err(|e| CliError::io(path, e))?;
        let data: Vec<f64> = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        let payload = DenseMatrix::from_vec(k, d_total, data)
            .map_err(|e| CliError::io(path, e.to_string()))?;
        Ok(SketchFile { method, seed_master, m, rows_seen, payload })
    }

    /// CSV mirror of the payload for interoperability.
    pub fn write_csv_mirror(&self, path: &Path) -> Result<(), CliError> {
        write_csv(path, &self.payload)
    }
}

fn read_u16(r: &mut impl Read, path: &Path) -> Result<u16, CliError> {
    let mut b = [0u8; 2];
    r.read_exact(&mut b).map_err(|e| CliError::io(path, e))?;
    Ok(u16::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read, path: &Path) -> Result<u64, CliError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(|e| CliError::io(path, e))?;
    Ok(u64::from_le_bytes(b))
}
