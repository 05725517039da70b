//! JSON file schemas. Complex numbers are `[re, im]` pairs and port labels
//! are 1-based.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::polarization::DensityMatrix;
use crate::simulator::{CorrelationSet, TransferMatrix, Units};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityMatrixFile {
    pub n_photons: usize,
    /// `rho` lets a reconstruction report be read back as a state.
    #[serde(alias = "rho")]
    pub matrix: Vec<Vec<Complex64>>,
}

impl From<DensityMatrix> for DensityMatrixFile {
    fn from(rho: DensityMatrix) -> Self {
        Self {
            n_photons: rho.n_photons(),
            matrix: nested_from_matrix(rho.matrix()),
        }
    }
}

impl TryFrom<DensityMatrixFile> for DensityMatrix {
    type Error = Error;
    fn try_from(f: DensityMatrixFile) -> Result<Self> {
        density_from_nested(f.n_photons, &f.matrix)
    }
}

pub fn nested_from_matrix(m: &CMatrix) -> Vec<Vec<Complex64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn density_from_nested(n_photons: usize, rows: &[Vec<Complex64>]) -> Result<DensityMatrix> {
    let dim = rows.len();
    if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: format!("{dim} columns"),
            found: format!("{} columns", bad.len()),
        });
    }
    DensityMatrix::new(n_photons, CMatrix::from_fn(dim, dim, |i, j| rows[i][j]))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransferMatrixFile {
    pub ports: usize,
    #[serde(default = "unit_scale")]
    pub scale: f64,
    pub rows: Vec<[Complex64; 2]>,
}

fn unit_scale() -> f64 {
    1.0
}

impl From<TransferMatrix> for TransferMatrixFile {
    fn from(t: TransferMatrix) -> Self {
        Self {
            ports: t.n_ports(),
            scale: t.scale(),
            rows: t.raw_rows().to_vec(),
        }
    }
}

impl TryFrom<TransferMatrixFile> for TransferMatrix {
    type Error = Error;
    fn try_from(f: TransferMatrixFile) -> Result<Self> {
        if f.ports != f.rows.len() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} rows", f.ports),
                found: format!("{} rows", f.rows.len()),
            });
        }
        TransferMatrix::new(f.rows, f.scale)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationEntry {
    pub ports: Vec<usize>,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationSetFile {
    pub n_photons: usize,
    pub units: Units,
    pub entries: Vec<CorrelationEntry>,
}

impl From<CorrelationSet> for CorrelationSetFile {
    fn from(c: CorrelationSet) -> Self {
        let entries = c
            .entries()
            .iter()
            .map(|(ports, &value)| CorrelationEntry {
                ports: ports.iter().map(|p| p + 1).collect(),
                value,
            })
            .collect();
        Self {
            n_photons: c.n_photons(),
            units: c.units(),
            entries,
        }
    }
}

impl TryFrom<CorrelationSetFile> for CorrelationSet {
    type Error = Error;
    fn try_from(f: CorrelationSetFile) -> Result<Self> {
        let mut map = std::collections::BTreeMap::new();
        for e in f.entries {
            if e.ports.contains(&0) {
                return Err(Error::InvalidInput(format!(
                    "port labels are 1-based, got {:?}",
                    e.ports
                )));
            }
            let key: Vec<usize> = e.ports.iter().map(|p| p - 1).collect();
            if map.insert(key, e.value).is_some() {
                return Err(Error::InvalidInput(format!(
                    "duplicate tuple {:?}",
                    e.ports
                )));
            }
        }
        CorrelationSet::new(f.n_photons, f.units, map)
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json_string(value)?)?;
    Ok(())
}
