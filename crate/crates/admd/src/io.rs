//! File formats: the binary snapshot container, key/value metadata
//! sidecars, and the CSV tables the CLI emits.
//!
//! Binary matrix layout (all little-endian): magic `ADMD`, `u32` format
//! version, `u64` rows, `u64` cols, then row-major `f64` values. Floats
//! round-trip bitwise; CSV values are printed with 17 significant digits
//! so text output round-trips too.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use ndarray::{Array2, ArrayView2};

use crate::error::{AdmdError, Result};
use crate::evaluation::SpectrumReport;

pub const MATRIX_MAGIC: [u8; 4] = *b"ADMD";
pub const MATRIX_FORMAT_VERSION: u32 = 1;

fn io_err(path: &Path, source: std::io::Error) -> AdmdError {
    AdmdError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn format_err(path: &Path, offset: u64, what: impl Into<String>) -> AdmdError {
    AdmdError::Format {
        path: path.to_path_buf(),
        offset,
        what: what.into(),
    }
}

/// Write `bytes` to `path` atomically (temp file + rename).
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let parent = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    let tmp = parent.join(format!(
        ".{}.tmp-{}",
        path.file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "out".into()),
        std::process::id()
    ));
    {
        let mut f = fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
        f.write_all(bytes).map_err(|e| io_err(&tmp, e))?;
        f.sync_all().map_err(|e| io_err(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

/// Serialize a matrix into the binary container.
pub fn matrix_to_bytes(data: ArrayView2<'_, f64>) -> Vec<u8> {
    let (rows, cols) = data.dim();
    let mut out = Vec::with_capacity(4 + 4 + 16 + rows * cols * 8);
    out.extend_from_slice(&MATRIX_MAGIC);
    out.extend_from_slice(&MATRIX_FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(rows as u64).to_le_bytes());
    out.extend_from_slice(&(cols as u64).to_le_bytes());
    for i in 0..rows {
        for j in 0..cols {
            out.extend_from_slice(&data[[i, j]].to_le_bytes());
        }
    }
    out
}

pub fn write_matrix(path: &Path, data: ArrayView2<'_, f64>) -> Result<()> {
    atomic_write(path, &matrix_to_bytes(data))
}

/// Read a matrix from the binary container, reporting the byte offset of
/// any structural problem.
pub fn read_matrix(path: &Path) -> Result<Array2<f64>> {
    let mut f = fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut bytes = Vec::new();
    f.read_to_end(&mut bytes).map_err(|e| io_err(path, e))?;
    matrix_from_bytes(&bytes, path)
}

pub fn matrix_from_bytes(bytes: &[u8], path: &Path) -> Result<Array2<f64>> {
    if bytes.len() < 4 || bytes[..4] != MATRIX_MAGIC {
        return Err(format_err(path, 0, "missing ADMD magic"));
    }
    if bytes.len() < 8 {
        return Err(format_err(path, 4, "truncated before format version"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != MATRIX_FORMAT_VERSION {
        return Err(format_err(
            path,
            4,
            format!("unsupported format version {version}"),
        ));
    }
    if bytes.len() < 24 {
        return Err(format_err(path, 8, "truncated before the dimension header"));
    }
    let rows = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let cols = u64::from_le_bytes(bytes[16..24].try_into().unwrap()) as usize;
    let need = rows
        .checked_mul(cols)
        .and_then(|c| c.checked_mul(8))
        .and_then(|c| c.checked_add(24))
        .ok_or_else(|| format_err(path, 8, "dimension header overflows"))?;
    if bytes.len() < need {
        return Err(format_err(
            path,
            bytes.len() as u64,
            format!("payload truncated: expected {need} bytes"),
        ));
    }
    let mut data = Array2::<f64>::zeros((rows, cols));
    let mut off = 24;
    for i in 0..rows {
        for j in 0..cols {
            data[[i, j]] = f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
            off += 8;
        }
    }
    Ok(data)
}

/// Print with 17 significant digits; parses back to the identical f64.
pub fn format_g17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Flat `key = value` metadata sidecar.
#[derive(Debug, Clone, Default)]
pub struct Meta {
    pairs: Vec<(String, String)>,
}

impl Meta {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.pairs.push((key.to_string(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.pairs
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.pairs {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        atomic_write(path, self.to_text().as_bytes())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        let mut pairs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| AdmdError::Config {
                line: lineno + 1,
                what: format!("expected `key = value`, got `{line}`"),
            })?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        Ok(Self { pairs })
    }
}

/// `spectrum.csv`: one row per mode.
pub fn spectrum_csv(report: &SpectrumReport) -> String {
    let mut out = String::from("k,re_mu,im_mu,abs_mu,re_omega,im_omega,abs_b\n");
    for row in report.rows() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.index,
            format_g17(row.discrete.re),
            format_g17(row.discrete.im),
            format_g17(row.magnitude),
            format_g17(row.continuous.re),
            format_g17(row.continuous.im),
            format_g17(row.amplitude_abs),
        ));
    }
    out
}

/// `errors.csv`: time stamp and relative error per snapshot. Undefined
/// entries (zero truth) are left empty rather than written as 0.
pub fn errors_csv(times: &[f64], errors: &[Option<f64>]) -> String {
    let mut out = String::from("t,rel_error\n");
    for (t, e) in times.iter().zip(errors.iter()) {
        match e {
            Some(v) => out.push_str(&format!("{},{}\n", format_g17(*t), format_g17(*v))),
            None => out.push_str(&format!("{},\n", format_g17(*t))),
        }
    }
    out
}

/// One comparison row per method.
pub struct CompareRow {
    pub name: String,
    pub measurements_used: usize,
    pub rank: usize,
    pub max_error: Option<f64>,
    pub final_error: Option<f64>,
}

pub fn compare_csv(rows: &[CompareRow]) -> String {
    let fmt_opt = |v: &Option<f64>| v.map(format_g17).unwrap_or_default();
    let mut out = String::from("name,measurements_used,rank,max_error,final_error\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.name,
            r.measurements_used,
            r.rank,
            fmt_opt(&r.max_error),
            fmt_opt(&r.final_error),
        ));
    }
    out
}

/// `singular_values.csv` for the spectrum subcommand.
pub fn singular_values_csv(values: &[f64]) -> String {
    let mut out = String::from("k,sigma\n");
    for (k, v) in values.iter().enumerate() {
        out.push_str(&format!("{},{}\n", k, format_g17(*v)));
    }
    out
}

/// Locate the metadata sidecar next to a snapshot file.
pub fn sidecar_path(matrix_path: &Path) -> PathBuf {
    matrix_path
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join("meta.txt")
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn matrix_round_trip_is_bitwise() {
        let dir = std::env::temp_dir().join(format!("admd-io-test-{}", std::process::id()));
        let path = dir.join("m.mat");
        let data = array![[1.0, -2.5, 3.125], [f64::MIN_POSITIVE, 0.1, -0.0]];
        write_matrix(&path, data.view()).unwrap();
        let back = read_matrix(&path).unwrap();
        assert_eq!(back.dim(), (2, 3));
        for (a, b) in back.iter().zip(data.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn corrupt_magic_reports_offset_zero() {
        let err = matrix_from_bytes(b"NOPE", Path::new("x.mat")).unwrap_err();
        match err {
            AdmdError::Format { offset, .. } => assert_eq!(offset, 0),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn truncated_payload_reports_offset() {
        let data = array![[1.0, 2.0], [3.0, 4.0]];
        let mut bytes = matrix_to_bytes(data.view());
        bytes.truncate(bytes.len() - 5);
        let err = matrix_from_bytes(&bytes, Path::new("x.mat")).unwrap_err();
        match err {
            AdmdError::Format { offset, what, .. } => {
                assert_eq!(offset, bytes.len() as u64);
                assert!(what.contains("truncated"));
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn g17_round_trips() {
        for v in [0.1, 1.0 / 3.0, 1e-300, -2.7e17, std::f64::consts::PI] {
            let s = format_g17(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{s}");
        }
    }

    #[test]
    fn meta_round_trip() {
        let dir = std::env::temp_dir().join(format!("admd-meta-test-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("meta.txt");
        let mut meta = Meta::new();
        meta.push("dataset", "hidden_dynamics");
        meta.push("dt", format_g17(0.05));
        meta.write(&path).unwrap();
        let back = Meta::read(&path).unwrap();
        assert_eq!(back.get("dataset"), Some("hidden_dynamics"));
        let dt: f64 = back.get("dt").unwrap().parse().unwrap();
        assert_eq!(dt, 0.05);
        fs::remove_dir_all(&dir).ok();
    }

    proptest! {
        #[test]
        fn matrix_bytes_round_trip(rows in 1usize..6, cols in 1usize..6, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
            let data = Array2::from_shape_fn((rows, cols), |_| {
                // Mix magnitudes, subnormals and signed zeros.
                match rng.gen_range(0..4) {
                    0 => rng.gen_range(-1e10..1e10),
                    1 => rng.gen_range(-1.0..1.0) * f64::MIN_POSITIVE,
                    2 => -0.0,
                    _ => rng.gen_range(-1.0..1.0),
                }
            });
            let bytes = matrix_to_bytes(data.view());
            let back = matrix_from_bytes(&bytes, Path::new("p.mat")).unwrap();
            prop_assert_eq!(back.dim(), (rows, cols));
            for (a, b) in back.iter().zip(data.iter()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }

        #[test]
        fn g17_round_trips_any_finite(bits in any::<u64>()) {
            let v = f64::from_bits(bits);
            prop_assume!(v.is_finite());
            let back: f64 = format_g17(v).parse().unwrap();
            prop_assert_eq!(back.to_bits(), v.to_bits());
        }
    }
}
