//! Sample file format: one sample per row, `2p` comma-separated real fields
//! (real and imaginary parts interleaved), optional header row.

use std::fmt::Write as _;
use std::path::Path;

use scattershrink_core::estimators::SampleSet;
use scattershrink_core::hpd::{CMatrix, ComplexVector};
use scattershrink_core::C64;

use crate::error::CliError;

/// Parse a sample file. The first row may be a header (any non-numeric
/// field); every data row must have the same even field count.
pub fn read_samples(path: &Path) -> Result<SampleSet, CliError> {
    let text = std::fs::read_to_string(path)?;
    parse_samples(&text, &path.display().to_string())
}

pub fn parse_samples(text: &str, path: &str) -> Result<SampleSet, CliError> {
    let mut vectors: Vec<ComplexVector> = Vec::new();
    let mut dim: Option<usize> = None;
    let mut first_data_row = true;
    for (idx, raw) in text.lines().enumerate() {
        let row = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Result<Vec<f64>, _> = fields.iter().map(|s| s.parse::<f64>()).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if first_data_row => continue, // header row
            Err(_) => {
                return Err(CliError::Parse {
                    path: path.to_string(),
                    row,
                    message: "non-numeric field".to_string(),
                })
            }
        };
        first_data_row = false;
        if values.len() % 2 != 0 || values.is_empty() {
            return Err(CliError::Parse {
                path: path.to_string(),
                row,
                message: format!(
                    "expected an even number of fields (re, im interleaved), got {}",
                    values.len()
                ),
            });
        }
        let p = values.len() / 2;
        match dim {
            None => dim = Some(p),
            Some(d) if d != p => {
                return Err(CliError::Parse {
                    path: path.to_string(),
                    row,
                    message: format!("row has {p} complex entries, expected {d}"),
                })
            }
            Some(_) => {}
        }
        let v: Vec<C64> = values.chunks(2).map(|c| C64::new(c[0], c[1])).collect();
        vectors.push(ComplexVector::new(v));
    }
    let dim = dim.ok_or_else(|| CliError::Parse {
        path: path.to_string(),
        row: 1,
        message: "no data rows".to_string(),
    })?;
    SampleSet::new(dim, vectors).map_err(CliError::Numeric)
}

/// Render a matrix in the same interleaved re/im CSV layout.
pub fn matrix_to_csv(m: &CMatrix) -> String {
    let p = m.dim();
    let mut out = String::new();
    for i in 0..p {
        for j in 0..p {
            if j > 0 {
                out.push(',');
            }
            let z = m.get(i, j);
            let _ = write!(out, "{},{}", z.re, z.im);
        }
        out.push('\n');
    }
    out
}
