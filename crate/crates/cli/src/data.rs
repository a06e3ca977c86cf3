//! Data ingestion: numeric CSV, the `SKDT` binary matrix format, and
//! turnstile update files. Streams deliver rows exactly once, in source
//! order, against a reusable buffer.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use sketchreg_core::linalg::DenseMatrix;
use sketchreg_core::sketch::UpdateTriple;

use crate::error::CliError;

pub const SKDT_MAGIC: &[u8; 4] = b"SKDT";
pub const SKDT_VERSION: u16 = 1;

/// Input container format for row data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    Csv,
    Binary,
    Updates,
}

impl DataFormat {
    pub fn parse(s: &str) -> Option<DataFormat> {
        match s {
            "csv" => Some(DataFormat::Csv),
            "bin" | "binary" => Some(DataFormat::Binary),
            "updates" => Some(DataFormat::Updates),
            _ => None,
        }
    }
}

enum Source {
    Csv { reader: BufReader<File>, has_header: bool },
    Binary { reader: BufReader<File>, n: u64 },
    InMemory { matrix: DenseMatrix },
}

/// A single-consumer stream of `d_total`-wide rows.
pub struct RowStream {
    source: Source,
    path: PathBuf,
    d_total: usize,
    /// Known row count (binary header or in-memory), if any.
    n_known: Option<u64>,
}

impl RowStream {
    /// Opens a rectangular numeric CSV; the column count is fixed by the
    /// first data row.
    pub fn open_csv(path: &Path, has_header: bool) -> Result<RowStream, CliError> {
        let file = File::open(path).map_err(|e| CliError::io(path, e))?;
        let mut reader = BufReader::new(file);
        // Peek ahead for the column count, then reopen to stream cleanly.
        let mut line = String::new();
        if has_header {
            reader.read_line(&mut line).map_err(|e| CliError::io(path, e))?;
            line.clear();
        }
        let got = reader.read_line(&mut line).map_err(|e| CliError::io(path, e))?;
        if got == 0 {
            return Err(CliError::io(path, "no data rows"));
        }
        let d_total = split_fields(&line).count();
        if d_total == 0 {
            return Err(CliError::io(path, "first data row is empty"));
        }
        let file = File::open(path).map_err(|e| CliError::io(path, e))?;
        Ok(RowStream {
            source: Source::Csv { reader: BufReader::new(file), has_header },
            path: path.to_path_buf(),
            d_total,
            n_known: None,
        })
    }

    /// Opens an `SKDT` binary matrix.
    pub fn open_binary(path: &Path) -> Result<RowStream, CliError> {
        let file = File::open(path).map_err(|e| CliError::io(path, e))?;
        let mut reader = BufReader::new(file);
        let mut magic = [0u8; 4];
        reader.read_exact(&mut magic).map_err(|e| CliError::io(path, e))?;
        if &magic != SKDT_MAGIC {
            return Err(CliError::io(path, "bad magic; not an SKDT file"));
        }
        let version = read_u16(&mut reader, path)?;
        if version != SKDT_VERSION {
            return Err(CliError::io(path, format!("unsupported SKDT version {version}")));
        }
        let n = read_u64(&mut reader, path)?;
        let d_total = read_u64(&mut reader, path)? as usize;
        if d_total == 0 {
            return Err(CliError::io(path, "SKDT file has zero columns"));
        }
        Ok(RowStream {
            source: Source::Binary { reader, n },
            path: path.to_path_buf(),
            d_total,
            n_known: Some(n),
        })
    }

    pub fn from_matrix(matrix: DenseMatrix) -> RowStream {
        RowStream {
            d_total: matrix.cols(),
            n_known: Some(matrix.rows() as u64),
            path: PathBuf::from("<memory>"),
            source: Source::InMemory { matrix },
        }
    }

    pub fn open(path: &Path, format: DataFormat, has_header: bool) -> Result<RowStream, CliError> {
        match format {
            DataFormat::Csv => RowStream::open_csv(path, has_header),
            DataFormat::Binary => RowStream::open_binary(path),
            DataFormat::Updates => Err(CliError::contract(
                "update files stream triples, not rows; use read_updates",
            )),
        }
    }

    pub fn d_total(&self) -> usize {
        self.d_total
    }

    pub fn n_known(&self) -> Option<u64> {
        self.n_known
    }

    /// Drives `f` with `(row_index, row)` for every row; returns the row
    /// count. The slice is only valid during the call.
    pub fn for_each_row(
        self,
        mut f: impl FnMut(u64, &[f64]) -> Result<(), CliError>,
    ) -> Result<u64, CliError> {
        let d = self.d_total;
        let path = self.path;
        match self.source {
            Source::InMemory { matrix } => {
                for i in 0..matrix.rows() {
                    f(i as u64, matrix.row(i))?;
                }
                Ok(matrix.rows() as u64)
            }
            Source::Csv { reader, has_header } => {
                let mut buf = vec![0.0; d];
                let mut index = 0u64;
                let mut lines = reader.lines();
                if has_header {
                    lines.next();
                }
                for line in lines {
                    let line = line.map_err(|e| CliError::io(&path, e))?;
                    if line.trim().is_empty() {
                        continue;
                    }
                    parse_csv_row(&line, index, d, &mut buf, &path)?;
                    f(index, &buf)?;
                    index += 1;
                }
                Ok(index)
            }
            Source::Binary { mut reader, n } => {
                let mut raw = vec![0u8; d * 8];
                let mut buf = vec![0.0; d];
                for i in 0..n {
                    reader
                        .read_exact(&mut raw)
                        .map_err(|e| CliError::io(&path, format!("row {i}: {e}")))?;
                    for (j, chunk) in raw.chunks_exact(8).enumerate() {
                        buf[j] = f64::from_le_bytes(chunk.try_into().expect("8-byte chunk"));
                    }
                    f(i, &buf)?;
                }
                Ok(n)
            }
        }
    }

    /// Materialises the whole stream; for desk-scale verification paths.
    pub fn collect_matrix(self) -> Result<DenseMatrix, CliError> {
        let d = self.d_total;
        let mut data = Vec::new();
        let n = self.for_each_row(|_, row| {
            data.extend_from_slice(row);
            Ok(())
        })?;
        DenseMatrix::from_vec(n as usize, d, data)
            .map_err(|e| CliError::contract(e.to_string()))
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

fn split_fields(line: &str) -> impl Iterator<Item = &str> {
    line.trim_end_matches(['\n', '\r']).split(',')
}

fn parse_csv_row(
    line: &str,
    row_index: u64,
    d: usize,
    out: &mut [f64],
    path: &Path,
) -> Result<(), CliError> {
    let mut count = 0usize;
    for (col, field) in split_fields(line).enumerate() {
        if col >= d {
            count = col + 1;
            break;
        }
        out[col] = field.trim().parse::<f64>().map_err(|_| {
            CliError::io(
                path,
                format!("non-numeric cell at row {row_index}, column {col}: {field:?}"),
            )
        })?;
        count = col + 1;
    }
    if count != d {
        return Err(CliError::io(
            path,
            format!("ragged row {row_index}: expected {d} fields, found {count}"),
        ));
    }
    Ok(())
}

/// Writes a matrix as an `SKDT` binary file: magic, version u16, n u64,
/// d_total u64, then row-major little-endian f64.
pub fn write_binary(path: &Path, matrix: &DenseMatrix) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let header = binary_header(matrix.rows() as u64, matrix.cols() as u64);
    w.write_all(&header).map_err(|e| CliError::io(path, e))?;
    for i in 0..matrix.rows() {
        write_f64_row(&mut w, matrix.row(i)).map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn binary_header(n: u64, d_total: u64) -> Vec<u8> {
    let mut h = Vec::with_capacity(4 + 2 + 16);
    h.extend_from_slice(SKDT_MAGIC);
    h.extend_from_slice(&SKDT_VERSION.to_le_bytes());
    h.extend_from_slice(&n.to_le_bytes());
    h.extend_from_slice(&d_total.to_le_bytes());
    h
}

pub fn write_f64_row(w: &mut impl Write, row: &[f64]) -> std::io::Result<()> {
    for v in row {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Writes a matrix as numeric CSV using shortest round-trip formatting.
pub fn write_csv(path: &Path, matrix: &DenseMatrix) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for i in 0..matrix.rows() {
        write_csv_row(&mut w, matrix.row(i)).map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_csv_row(w: &mut impl Write, row: &[f64]) -> std::io::Result<()> {
    let mut first = true;
    for v in row {
        if !first {
            w.write_all(b",")?;
        }
        write!(w, "{v}")?;
        first = false;
    }
    w.write_all(b"\n")
}

/// Streams `i,j,u` update triples from a text file. Duplicate entries and
/// negative updates (deletions) are permitted.
pub fn for_each_update(
    path: &Path,
    mut f: impl FnMut(UpdateTriple) -> Result<(), CliError>,
) -> Result<u64, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let reader = BufReader::new(file);
    let mut count = 0u64;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut parts = trimmed.split(',');
        let parse_err = |what: &str, tok: &str| {
            CliError::io(path, format!("line {}: bad {what}: {tok:?}", lineno + 1))
        };
        let row_tok = parts.next().unwrap_or("");
        let col_tok = parts.next().ok_or_else(|| parse_err("triple", trimmed))?;
        let val_tok = parts.next().ok_or_else(|| parse_err("triple", trimmed))?;
        if parts.next().is_some() {
            return Err(parse_err("triple (too many fields)", trimmed));
        }
        let row = row_tok.trim().parse::<u64>().map_err(|_| parse_err("row index", row_tok))?;
        let col = col_tok.trim().parse::<usize>().map_err(|_| parse_err("column", col_tok))?;
        let value = val_tok.trim().parse::<f64>().map_err(|_| parse_err("value", val_tok))?;
        f(UpdateTriple { row, col, value })?;
        count += 1;
    }
    Ok(count)
}

/// Applies an update stream to a dense zero matrix of the given shape.
pub fn materialize_updates(path: &Path, n: usize, d_total: usize) -> Result<DenseMatrix, CliError> {
    let mut m = DenseMatrix::zeros(n, d_total);
    for_each_update(path, |t| {
        if t.row as usize >= n || t.col >= d_total {
            return Err(CliError::contract(format!(
                "update ({}, {}) outside {n} x {d_total}",
                t.row, t.col
            )));
        }
        let cur = m.get(t.row as usize, t.col);
        m.set(t.row as usize, t.col, cur + t.value);
        Ok(())
    })?;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn tmp(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join("sketchreg-data-tests");
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn csv_basic_rows() {
        let p = tmp("basic.csv");
        std::fs::write(&p, "1,2\n3,4\n").unwrap();
        let s = RowStream::open_csv(&p, false).unwrap();
        assert_eq!(s.d_total(), 2);
        let m = s.collect_matrix().unwrap();
        assert_eq!(m.rows(), 2);
        assert_eq!(m.get(0, 0), 1.0);
        assert_eq!(m.get(1, 1), 4.0);
    }

    #[test]
    fn csv_header_skipped() {
        let p = tmp("header.csv");
        std::fs::write(&p, "a,b\n1,2\n").unwrap();
        let m = RowStream::open_csv(&p, true).unwrap().collect_matrix().unwrap();
        assert_eq!(m.rows(), 1);
        assert_eq!(m.get(0, 1), 2.0);
    }

    #[test]
    fn csv_ragged_and_non_numeric_errors_carry_position() {
        let p = tmp("ragged.csv");
        std::fs::write(&p, "1,2\n3\n").unwrap();
        let err = RowStream::open_csv(&p, false).unwrap().collect_matrix().unwrap_err();
        assert!(err.to_string().contains("row 1"), "{err}");

        let p = tmp("nonnum.csv");
        std::fs::write(&p, "1,2\n3,x\n").unwrap();
        let err = RowStream::open_csv(&p, false).unwrap().collect_matrix().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("row 1") && msg.contains("column 1"), "{msg}");
    }

    #[test]
    fn binary_round_trip_is_bit_exact() {
        let p = tmp("round.skdt");
        let m = DenseMatrix::from_fn(100, 7, |i, j| {
            (i as f64 + 1.0).sqrt() * (j as f64 - 3.0) / 7.0
        });
        write_binary(&p, &m).unwrap();
        let s = RowStream::open_binary(&p).unwrap();
        assert_eq!(s.n_known(), Some(100));
        let back = s.collect_matrix().unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn binary_empty_and_single_row() {
        let p = tmp("empty.skdt");
        let m = DenseMatrix::zeros(0, 3);
        write_binary(&p, &m).unwrap();
        let back = RowStream::open_binary(&p).unwrap().collect_matrix().unwrap();
        assert_eq!(back.rows(), 0);

        let p = tmp("one.skdt");
        let m = DenseMatrix::from_vec(1, 2, vec![1.5, -2.5]).unwrap();
        write_binary(&p, &m).unwrap();
        let back = RowStream::open_binary(&p).unwrap().collect_matrix().unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn csv_to_binary_round_trip_bit_exact() {
        // Full-precision CSV formatting survives parse -> binary -> parse.
        let csv = tmp("precise.csv");
        let mut f = std::fs::File::create(&csv).unwrap();
        let m = DenseMatrix::from_fn(200, 3, |i, j| {
            ((i * 31 + j * 17) as f64).sin() * 1e-7 + (i as f64) * 0.123456789
        });
        for i in 0..m.rows() {
            write_csv_row(&mut f, m.row(i)).unwrap();
        }
        drop(f);
        let parsed = RowStream::open_csv(&csv, false).unwrap().collect_matrix().unwrap();
        assert_eq!(parsed, m);
        let bin = tmp("precise.skdt");
        write_binary(&bin, &parsed).unwrap();
        let back = RowStream::open_binary(&bin).unwrap().collect_matrix().unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn updates_coalesce_and_empty_file() {
        let p = tmp("ups.txt");
        std::fs::write(&p, "0,0,5\n0,0,-3\n").unwrap();
        let m = materialize_updates(&p, 2, 2).unwrap();
        assert_eq!(m.get(0, 0), 2.0);

        let p = tmp("empty_ups.txt");
        std::fs::write(&p, "").unwrap();
        let m = materialize_updates(&p, 3, 2).unwrap();
        assert_eq!(m.max_abs(), 0.0);
    }

    #[test]
    fn bad_magic_is_io_error() {
        let p = tmp("bad.skdt");
        std::fs::write(&p, b"NOPE").unwrap();
        assert!(matches!(RowStream::open_binary(&p), Err(CliError::Io { .. })));
    }
}
