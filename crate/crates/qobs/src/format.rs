//! JSON system files.
//!
//! A system file holds one linear quantum stochastic system:
//!
//! ```json
//! {
//!   "n_x": 2,
//!   "A": [[-0.1, 0.0], [0.0, -0.1]],
//!   "B": [[...], [...]],
//!   "C": [[...], [...]],
//!   "D": [[...], [...]],
//!   "channels": [{"kind": "vacuum"}, {"kind": "thermal", "k_n": 10}]
//! }
//! ```
//!
//! Matrices are row-major nested arrays. Observer files written by
//! `qobs design` add `B_hat`, `B_v1`, `B_v2`, `T` and `provenance`; readers
//! that only need the system ignore them.

use std::fs;
use std::path::Path;

use qobs_core::{Mat, NoiseChannel, NoiseKind, QuantumLinearSystem};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ChannelSpec {
    Vacuum,
    Thermal { k_n: f64 },
}

impl From<&NoiseChannel> for ChannelSpec {
    fn from(c: &NoiseChannel) -> Self {
        match c.kind() {
            NoiseKind::Vacuum => ChannelSpec::Vacuum,
            NoiseKind::Thermal => ChannelSpec::Thermal { k_n: c.k_n() },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "lowercase")]
pub enum ProvenanceSpec {
    Alg1,
    Alg2 { rho: f64 },
    Alg3 { transformed: bool },
    Classical,
}

type Rows = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct SystemFile {
    pub n_x: usize,
    pub A: Rows,
    pub B: Rows,
    pub C: Rows,
    pub D: Rows,
    pub channels: Vec<ChannelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<ProvenanceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub B_hat: Option<Rows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub B_v1: Option<Rows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub B_v2: Option<Rows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub T: Option<Rows>,
}

pub fn rows_of(m: &Mat) -> Rows {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Builds a matrix from nested rows. `rows` fixes the row count; the
/// column count comes from the first row, or from `cols` when given.
pub fn matrix_from_rows(
    key: &str,
    data: &Rows,
    rows: usize,
    cols: Option<usize>,
) -> std::result::Result<Mat, String> {
    if data.len() != rows {
        return Err(format!("`{key}` has {} rows, expected {rows}", data.len()));
    }
    let width = match (cols, data.first()) {
        (Some(c), _) => c,
        (None, Some(r)) => r.len(),
        (None, None) => 0,
    };
    for (i, r) in data.iter().enumerate() {
        if r.len() != width {
            return Err(format!(
                "`{key}` row {i} has {} entries, expected {width}",
                r.len()
            ));
        }
        if let Some(j) = r.iter().position(|v| !v.is_finite()) {
            return Err(format!("`{key}` entry ({i}, {j}) is not finite"));
        }
    }
    Ok(Mat::from_fn(rows, width, |i, j| data[i][j]))
}

impl SystemFile {
    pub fn from_system(sys: &QuantumLinearSystem) -> Self {
        SystemFile {
            n_x: sys.n_x(),
            A: rows_of(sys.a()),
            B: rows_of(sys.b()),
            C: rows_of(sys.c()),
            D: rows_of(sys.d()),
            channels: sys.channels().iter().map(ChannelSpec::from).collect(),
            provenance: None,
            B_hat: None,
            B_v1: None,
            B_v2: None,
            T: None,
        }
    }

    /// Converts to a validated system; the error names the offending key.
    pub fn to_system(&self) -> std::result::Result<QuantumLinearSystem, String> {
        let n = self.n_x;
        let a = matrix_from_rows("A", &self.A, n, Some(n))?;
        let b = matrix_from_rows("B", &self.B, n, None)?;
        let n_y = self.C.len();
        let c = matrix_from_rows("C", &self.C, n_y, Some(n))?;
        let d = matrix_from_rows("D", &self.D, n_y, Some(b.ncols()))?;
        let channels = self
            .channels
            .iter()
            .enumerate()
            .map(|(i, ch)| match *ch {
                ChannelSpec::Vacuum => Ok(NoiseChannel::vacuum()),
                ChannelSpec::Thermal { k_n } => {
                    NoiseChannel::thermal(k_n).map_err(|e| format!("`channels[{i}]`: {e}"))
                }
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        QuantumLinearSystem::new(a, b, c, d, channels).map_err(|e| e.to_string())
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse(path, e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serializes");
        s.push('\n');
        s
    }
}

pub fn read_system_file(path: &Path) -> Result<SystemFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    SystemFile::parse(&text, path)
}

pub fn load_system(path: &Path) -> Result<QuantumLinearSystem> {
    read_system_file(path)?
        .to_system()
        .map_err(|m| Error::parse(path, m))
}

pub fn write_system_file(path: &Path, file: &SystemFile) -> Result<()> {
    fs::write(path, file.to_json()).map_err(|e| Error::io(path, e))
}
