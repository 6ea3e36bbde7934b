//! On-disk system description.
//!
//! A system file is a single JSON document:
//!
//! ```json
//! {
//!   "n": 1, "m": 1,
//!   "A": [ [[[2.0, 0.0]]], [[[3.0, 0.0]]] ],
//!   "B": [ [[19.0, 0.0]] ],
//!   "C": [ [[23.0, 0.0]] ],
//!   "D": [ [[[11.0, 0.0]]], [[[13.0, 0.0]]] ],
//!   "sigma": [2, 1]
//! }
//! ```
//!
//! `A` and `D` list coefficient matrices by ascending power; every entry is a
//! `[re, im]` pair (bare reals are accepted on input). `sigma` is optional.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use rosenfied_core::matpoly::{CMatrix, MatrixPolynomial};
use rosenfied_core::rosenbrock::SystemMatrix;

/// Complex entry: serialized as `[re, im]`, deserialized from that or a bare
/// real number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Pair(f64, f64),
    Real(f64),
}

impl Entry {
    pub fn to_complex(self) -> Complex64 {
        match self {
            Entry::Pair(re, im) => Complex64::new(re, im),
            Entry::Real(re) => Complex64::new(re, 0.0),
        }
    }

    pub fn from_complex(z: Complex64) -> Self {
        Entry::Pair(z.re, z.im)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemFile {
    pub n: usize,
    pub m: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<Vec<Entry>>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<Entry>>,
    #[serde(rename = "C")]
    pub c: Vec<Vec<Entry>>,
    #[serde(rename = "D")]
    pub d: Vec<Vec<Vec<Entry>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<usize>>,
}

/// Semantic validation failure (dimensions, degrees, σ), distinct from JSON
/// schema violations.
#[derive(Debug, Clone)]
pub struct DimensionError(pub String);

impl std::fmt::Display for DimensionError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for DimensionError {}

fn matrix_from_entries(
    entries: &[Vec<Entry>],
    rows: usize,
    cols: usize,
    what: &str,
) -> Result<CMatrix, DimensionError> {
    if entries.len() != rows {
        return Err(DimensionError(format!(
            "{what}: expected {rows} rows, found {}",
            entries.len()
        )));
    }
    let mut out = CMatrix::zeros(rows, cols);
    for (i, row) in entries.iter().enumerate() {
        if row.len() != cols {
            return Err(DimensionError(format!(
                "{what}: row {i} has {} entries, expected {cols}",
                row.len()
            )));
        }
        for (j, e) in row.iter().enumerate() {
            out[(i, j)] = e.to_complex();
        }
    }
    Ok(out)
}

fn poly_from_entries(
    coeffs: &[Vec<Vec<Entry>>],
    size: usize,
    what: &str,
) -> Result<MatrixPolynomial, DimensionError> {
    if coeffs.len() < 2 {
        return Err(DimensionError(format!(
            "{what}: needs degree >= 1 (found {} coefficient matrices)",
            coeffs.len()
        )));
    }
    let mats = coeffs
        .iter()
        .enumerate()
        .map(|(k, m)| matrix_from_entries(m, size, size, &format!("{what}[{k}]")))
        .collect::<Result<Vec<_>, _>>()?;
    MatrixPolynomial::new(mats).map_err(|e| DimensionError(format!("{what}: {e}")))
}

impl SystemFile {
    /// Validates dimensions and converts to a [`SystemMatrix`].
    pub fn to_system(&self) -> Result<SystemMatrix, DimensionError> {
        if self.n == 0 || self.m == 0 {
            return Err(DimensionError("n and m must be positive".into()));
        }
        let a = poly_from_entries(&self.a, self.n, "A")?;
        let d = poly_from_entries(&self.d, self.m, "D")?;
        let b = matrix_from_entries(&self.b, self.n, self.m, "B")?;
        let c = matrix_from_entries(&self.c, self.m, self.n, "C")?;
        let sys = SystemMatrix::new(a, b, c, d).map_err(|e| DimensionError(e.to_string()))?;
        if let Some(sigma) = &self.sigma {
            let d_max = sys.deg_max();
            rosenfied_core::fiedler::Bijection::new(sigma.clone()).map_err(|e| {
                DimensionError(format!("sigma must be a permutation of 1..={d_max}: {e}"))
            })?;
            if sigma.len() != d_max {
                return Err(DimensionError(format!(
                    "sigma has length {}, expected max(d_A, d_D) = {d_max}",
                    sigma.len()
                )));
            }
        }
        Ok(sys)
    }

    /// Encodes a system losslessly ([re, im] pairs, shortest round-trip floats).
    pub fn from_system(sys: &SystemMatrix, sigma: Option<Vec<usize>>) -> Self {
        let mat_entries = |m: &CMatrix| -> Vec<Vec<Entry>> {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| Entry::from_complex(m[(i, j)])).collect())
                .collect()
        };
        let poly_entries = |p: &MatrixPolynomial| -> Vec<Vec<Vec<Entry>>> {
            p.coeffs().iter().map(|c| mat_entries(c)).collect()
        };
        SystemFile {
            n: sys.n(),
            m: sys.m(),
            a: poly_entries(sys.a()),
            b: mat_entries(sys.b()),
            c: mat_entries(sys.c()),
            d: poly_entries(sys.d()),
            sigma,
        }
    }
}

/// JSON value for a dense complex matrix: rows of `[re, im]` pairs.
pub fn matrix_json(m: &CMatrix) -> serde_json::Value {
    serde_json::Value::Array(
        (0..m.nrows())
            .map(|i| {
                serde_json::Value::Array(
                    (0..m.ncols())
                        .map(|j| serde_json::json!([m[(i, j)].re, m[(i, j)].im]))
                        .collect(),
                )
            })
            .collect(),
    )
}

