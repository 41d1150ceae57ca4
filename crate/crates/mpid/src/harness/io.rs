//! Matrix file formats and result CSV emission.
//!
//! CSV matrices are comma-separated decimal rows with no header unless one
//! is explicitly skipped. The RAW format is bit-exact: magic `MPID`, a
//! version byte 0x01, rows and cols as little-endian u64, then the entries
//! as little-endian f64 in column-major order.

use super::{CellStatus, ResultRow};
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use std::io::Write;
use std::path::Path;

const RAW_MAGIC: &[u8; 4] = b"MPID";
const RAW_VERSION: u8 = 0x01;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixFormat {
    Csv,
    Raw,
}

impl MatrixFormat {
    /// `.csv` means CSV; everything else is RAW.
    pub fn infer(path: &Path) -> MatrixFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => MatrixFormat::Csv,
            _ => MatrixFormat::Raw,
        }
    }

    pub fn parse(s: &str) -> Result<MatrixFormat> {
        match s {
            "csv" => Ok(MatrixFormat::Csv),
            "raw" => Ok(MatrixFormat::Raw),
            other => Err(Error::config(format!("unknown format {other:?}"))),
        }
    }
}

/// Loads a matrix file. `skip_header` drops line 1 of a CSV file; it is
/// ignored for RAW.
pub fn load_matrix(path: &Path, format: MatrixFormat, skip_header: bool) -> Result<DenseMatrix> {
    match format {
        MatrixFormat::Csv => load_csv(path, skip_header),
        MatrixFormat::Raw => load_raw(path),
    }
}

fn load_csv(path: &Path, skip_header: bool) -> Result<DenseMatrix> {
    let text = std::fs::read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut cols = 0usize;
    let skip = usize::from(skip_header);
    for (idx, line) in text.lines().enumerate().skip(skip) {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::with_capacity(cols);
        for tok in line.split(',') {
            let tok = tok.trim();
            let v: f64 = tok.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("bad number {tok:?}"),
            })?;
            row.push(v);
        }
        if rows.is_empty() {
            cols = row.len();
        } else if row.len() != cols {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("row has {} entries, expected {cols}", row.len()),
            });
        }
        rows.push(row);
    }
    if rows.is_empty() || cols == 0 {
        return Err(Error::Parse {
            line: 0,
            msg: "no matrix data in file".to_string(),
        });
    }
    Ok(DenseMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

fn load_raw(path: &Path) -> Result<DenseMatrix> {
    let bytes = std::fs::read(path)?;
    let raw_err = |msg: String| Error::Parse { line: 0, msg };
    if bytes.len() < 21 {
        return Err(raw_err(format!("file too short: {} bytes", bytes.len())));
    }
    if &bytes[0..4] != RAW_MAGIC {
        return Err(raw_err("missing MPID magic at offset 0".to_string()));
    }
    if bytes[4] != RAW_VERSION {
        return Err(raw_err(format!(
            "unsupported version byte {:#04x} at offset 4",
            bytes[4]
        )));
    }
    let rows = u64::from_le_bytes(bytes[5..13].try_into().unwrap());
    let cols = u64::from_le_bytes(bytes[13..21].try_into().unwrap());
    if rows == 0 || cols == 0 {
        return Err(raw_err(format!("empty matrix {rows}x{cols}")));
    }
    let count = rows
        .checked_mul(cols)
        .and_then(|c| usize::try_from(c).ok())
        .ok_or_else(|| raw_err(format!("dimension overflow {rows}x{cols}")))?;
    let expected = 21 + 8 * count;
    if bytes.len() != expected {
        return Err(raw_err(format!(
            "expected {expected} bytes for {rows}x{cols}, found {}",
            bytes.len()
        )));
    }
    let mut data = Vec::with_capacity(count);
    for chunk in bytes[21..].chunks_exact(8) {
        data.push(f64::from_le_bytes(chunk.try_into().unwrap()));
    }
    Ok(DenseMatrix::from_col_major(
        rows as usize,
        cols as usize,
        data,
    ))
}

/// Writes a matrix file in the given format. CSV entries use scientific
/// notation with 17 significant digits, which parses back to the same bits;
/// RAW is a bit-exact dump.
pub fn save_matrix(a: &DenseMatrix, path: &Path, format: MatrixFormat) -> Result<()> {
    match format {
        MatrixFormat::Csv => {
            let mut out = String::new();
            for i in 0..a.rows() {
                for j in 0..a.cols() {
                    if j > 0 {
                        out.push(',');
                    }
                    out.push_str(&format!("{:.16e}", a.get(i, j)));
                }
                out.push('\n');
            }
            std::fs::write(path, out)?;
        }
        MatrixFormat::Raw => {
            let mut bytes = Vec::with_capacity(21 + 8 * a.rows() * a.cols());
            bytes.extend_from_slice(RAW_MAGIC);
            bytes.push(RAW_VERSION);
            bytes.extend_from_slice(&(a.rows() as u64).to_le_bytes());
            bytes.extend_from_slice(&(a.cols() as u64).to_le_bytes());
            for j in 0..a.cols() {
                for &v in a.col(j) {
                    bytes.extend_from_slice(&v.to_le_bytes());
                }
            }
            std::fs::write(path, bytes)?;
        }
    }
    Ok(())
}

pub const CSV_HEADER: &str = "experiment,dataset,variant,k,n,seed,error_kind,error_value,status";

fn dataset_base(label: &str) -> &str {
    label.split(':').next().unwrap_or(label)
}

/// Stable output order: dataset, variant, rank, width, seed, then held-out
/// column with the per-variant mean row last.
fn sorted_indices(rows: &[ResultRow]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..rows.len()).collect();
    idx.sort_by(|&a, &b| {
        let ra = &rows[a];
        let rb = &rows[b];
        (
            dataset_base(&ra.dataset),
            ra.variant,
            ra.k,
            ra.n,
            ra.seed,
            ra.holdout_col.unwrap_or(usize::MAX),
            &ra.dataset,
        )
            .cmp(&(
                dataset_base(&rb.dataset),
                rb.variant,
                rb.k,
                rb.n,
                rb.seed,
                rb.holdout_col.unwrap_or(usize::MAX),
                &rb.dataset,
            ))
    });
    idx
}

/// Writes the result CSV: header plus one line per row, sorted. Failed
/// cells carry `NaN` in the value column.
pub fn write_csv<W: Write>(rows: &[ResultRow], w: &mut W) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for &i in &sorted_indices(rows) {
        let r = &rows[i];
        let value = if r.status == CellStatus::Ok {
            format!("{:.16e}", r.error_value)
        } else {
            "NaN".to_string()
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.experiment.as_str(),
            r.dataset,
            r.variant.as_str(),
            r.k,
            r.n,
            r.seed,
            r.error_kind.as_str(),
            value,
            r.status.as_str()
        )?;
    }
    Ok(())
}

pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{ErrorKind, ExperimentKind, HarnessVariant};

    fn sample_row(variant: HarnessVariant, k: usize) -> ResultRow {
        ResultRow {
            experiment: ExperimentKind::RankSweep,
            dataset: "fast".to_string(),
            variant,
            k,
            n: 50,
            seed: 7,
            error_kind: ErrorKind::RelSpectralVsDouble,
            error_value: 0.015625,
            status: CellStatus::Ok,
            holdout_col: None,
        }
    }

    #[test]
    fn csv_round_trip() {
        let a = DenseMatrix::from_fn(3, 4, |i, j| (i as f64 + 1.0) / (j as f64 + 3.0));
        let f = tempfile::NamedTempFile::with_suffix(".csv").unwrap();
        save_matrix(&a, f.path(), MatrixFormat::Csv).unwrap();
        let b = load_matrix(f.path(), MatrixFormat::Csv, false).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn raw_round_trip_is_bit_identical() {
        let a = DenseMatrix::from_fn(5, 3, |i, j| {
            (-1.0f64).powi(i as i32) * (j as f64 + 0.1) * 1e-7
        });
        let f = tempfile::NamedTempFile::new().unwrap();
        save_matrix(&a, f.path(), MatrixFormat::Raw).unwrap();
        let b = load_matrix(f.path(), MatrixFormat::Raw, false).unwrap();
        for j in 0..a.cols() {
            for (x, y) in a.col(j).iter().zip(b.col(j)) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn csv_parses_plain_literals() {
        let f = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(f.path(), "1,2\n3,4\n").unwrap();
        let a = load_matrix(f.path(), MatrixFormat::Csv, false).unwrap();
        assert_eq!(a, DenseMatrix::from_col_major(2, 2, vec![1.0, 3.0, 2.0, 4.0]));
    }

    #[test]
    fn csv_header_skip() {
        let f = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(f.path(), "x,y\n1,2\n").unwrap();
        assert!(load_matrix(f.path(), MatrixFormat::Csv, false).is_err());
        let a = load_matrix(f.path(), MatrixFormat::Csv, true).unwrap();
        assert_eq!(a.rows(), 1);
        assert_eq!(a.cols(), 2);
    }

    #[test]
    fn ragged_csv_reports_its_line() {
        let f = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(f.path(), "1,2\n3\n").unwrap();
        match load_matrix(f.path(), MatrixFormat::Csv, false) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn raw_rejects_corruption() {
        let a = DenseMatrix::from_fn(2, 2, |i, j| (i + j) as f64);
        let f = tempfile::NamedTempFile::new().unwrap();
        save_matrix(&a, f.path(), MatrixFormat::Raw).unwrap();
        let mut bytes = std::fs::read(f.path()).unwrap();
        bytes[0] = b'X';
        std::fs::write(f.path(), &bytes).unwrap();
        assert!(load_matrix(f.path(), MatrixFormat::Raw, false).is_err());

        save_matrix(&a, f.path(), MatrixFormat::Raw).unwrap();
        let mut bytes = std::fs::read(f.path()).unwrap();
        bytes.truncate(bytes.len() - 1);
        std::fs::write(f.path(), &bytes).unwrap();
        assert!(load_matrix(f.path(), MatrixFormat::Raw, false).is_err());
    }

    #[test]
    fn format_inference() {
        assert_eq!(MatrixFormat::infer(Path::new("a.csv")), MatrixFormat::Csv);
        assert_eq!(MatrixFormat::infer(Path::new("a.CSV")), MatrixFormat::Csv);
        assert_eq!(MatrixFormat::infer(Path::new("a.raw")), MatrixFormat::Raw);
        assert_eq!(MatrixFormat::infer(Path::new("a")), MatrixFormat::Raw);
    }

    #[test]
    fn result_csv_shape_and_order() {
        let rows = vec![
            sample_row(HarnessVariant::Single, 9),
            sample_row(HarnessVariant::Double, 7),
            sample_row(HarnessVariant::Double, 5),
            ResultRow {
                status: CellStatus::Underflow,
                error_value: f64::NAN,
                ..sample_row(HarnessVariant::Half, 5)
            },
        ];
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], CSV_HEADER);
        assert!(lines[1].starts_with("rank_sweep,fast,double,5,50,7,"));
        assert!(lines[2].starts_with("rank_sweep,fast,double,7,"));
        assert!(lines[3].starts_with("rank_sweep,fast,single,9,"));
        assert_eq!(
            lines[4],
            "rank_sweep,fast,half,5,50,7,rel_spectral_vs_double,NaN,underflow"
        );
        assert!(lines[1].contains("1.5625000000000000e-2"));
    }

    #[test]
    fn value_formatting_survives_round_trip() {
        for &v in &[1.0f64, 3.141592653589793, 2.5e-17, 6.02e23, 1e-300] {
            let s = format!("{v:.16e}");
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{s}");
        }
    }
}
