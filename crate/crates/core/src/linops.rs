//! Dense linear maps `A : R^n -> R^m` and the spectral quantities the
//! step-size rules and algorithm requirements depend on.

use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::solvers::{Algorithm, NMode};

/// Relative threshold for deciding that `AAᵀ` is positive definite.
pub const PD_RELATIVE_THRESHOLD: f64 = 1e-10;

/// Default relative accuracy for [`LinearMap::spectral_summary`].
pub const DEFAULT_SPECTRAL_TOL: f64 = 1e-12;

/// Dense real matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl LinearMap {
    /// Builds a map from row-major entries.
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidMap(format!(
                "dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if entries.len() != rows * cols {
            return Err(Error::InvalidMap(format!(
                "{rows}x{cols} map needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if let Some(i) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidMap(format!(
                "entry ({}, {}) is not finite",
                i / cols,
                i % cols
            )));
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != n) {
            return Err(Error::InvalidMap(format!(
                "row {i} has length {}, expected {n}",
                rows[i].len()
            )));
        }
        Self::new(m, n, rows.concat())
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    /// Square diagonal map. Panics on an empty or non-finite diagonal.
    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut entries = vec![0.0; n * n];
        for (i, v) in d.iter().enumerate() {
            entries[i * n + i] = *v;
        }
        Self::new(n, n, entries).expect("valid diagonal")
    }

    pub fn from_dmatrix(m: &DMatrix<f64>) -> Result<Self> {
        let mut entries = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                entries.push(m[(i, j)]);
            }
        }
        Self::new(m.nrows(), m.ncols(), entries)
    }

    pub(crate) fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// Returns `Ax`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("apply", self.cols, x.len())?;
        Ok(self
            .entries
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Returns `Aᵀy`.
    pub fn apply_adjoint(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len("apply_adjoint", self.rows, y.len())?;
        let mut out = vec![0.0; self.cols];
        for (row, yi) in self.entries.chunks_exact(self.cols).zip(y) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * yi;
            }
        }
        Ok(out)
    }

    /// `AᵀA` as an `n x n` matrix.
    pub fn gram(&self) -> DMatrix<f64> {
        let a = self.to_dmatrix();
        a.transpose() * a
    }

    /// `AAᵀ` as an `m x m` matrix.
    pub fn row_gram(&self) -> DMatrix<f64> {
        let a = self.to_dmatrix();
        &a * a.transpose()
    }

    /// If `AᵀA = c²I` (relative tolerance `tol`), returns `c²`.
    pub fn orthogonal_scale(&self, tol: f64) -> Option<f64> {
        let g = self.gram();
        let c2 = g.diagonal().mean();
        if c2 <= 0.0 {
            return None;
        }
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let target = if i == j { c2 } else { 0.0 };
                if (g[(i, j)] - target).abs() > tol * c2 {
                    return None;
                }
            }
        }
        Some(c2)
    }

    /// Extreme eigenvalues of `AᵀA` and `AAᵀ`, from a symmetric
    /// eigendecomposition of whichever Gram matrix is smaller.
    pub fn spectral_summary(&self, tol: f64) -> Result<SpectralSummary> {
        if !(tol > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "spectral tolerance must be positive, got {tol}"
            )));
        }
        let (n, m) = (self.cols, self.rows);
        let small = if n <= m { self.gram() } else { self.row_gram() };
        let dim = small.nrows();
        let eig = SymmetricEigen::try_new(small, f64::EPSILON, 10_000)
            .ok_or_else(|| Error::Eigen(format!("no convergence on {dim}x{dim} Gram matrix")))?;
        let vals: Vec<f64> = eig.eigenvalues.iter().map(|v| v.max(0.0)).collect();
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::Eigen("non-finite eigenvalue".into()));
        }
        let max = vals.iter().copied().fold(0.0, f64::max);
        let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
        // The larger Gram matrix has min(m, n) nonzero eigenvalues; the rest are zero.
        let (gram_min, rowgram_min) = match n.cmp(&m) {
            std::cmp::Ordering::Less => (min, 0.0),
            std::cmp::Ordering::Greater => (0.0, min),
            std::cmp::Ordering::Equal => (min, min),
        };
        Ok(SpectralSummary::from_extremes(max, gram_min, rowgram_min))
    }
}

/// Extreme eigenvalues of `AᵀA` and `AAᵀ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    pub gram_lambda_max: f64,
    pub gram_lambda_min: f64,
    /// `+∞` when `AᵀA` is singular. Serialized as `null` in that case.
    #[serde(with = "inf_as_null")]
    pub gram_condition: f64,
    pub rowgram_lambda_min: f64,
    pub operator_norm: f64,
}

impl SpectralSummary {
    pub fn from_extremes(gram_max: f64, gram_min: f64, rowgram_min: f64) -> Self {
        let gram_condition = if gram_min > 0.0 {
            gram_max / gram_min
        } else {
            f64::INFINITY
        };
        Self {
            gram_lambda_max: gram_max,
            gram_lambda_min: gram_min,
            gram_condition,
            rowgram_lambda_min: rowgram_min,
            operator_norm: gram_max.sqrt(),
        }
    }

    /// `AAᵀ ≻ 0` under the scale-invariant numerical-rank threshold.
    pub fn rowgram_positive_definite(&self) -> bool {
        self.rowgram_lambda_min > PD_RELATIVE_THRESHOLD * self.gram_lambda_max
    }
}

mod inf_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// One row of the requirement table, as checked against a concrete `A`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RequirementCheck {
    pub requirement: &'static str,
    pub satisfied: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RequirementReport {
    pub algorithm: Algorithm,
    /// The table's requirements entry: "None", "Unknown", or the listed conditions.
    pub table_entry: &'static str,
    pub checks: Vec<RequirementCheck>,
}

impl RequirementReport {
    pub fn is_satisfied(&self) -> bool {
        self.checks.iter().all(|c| c.satisfied)
    }

    pub fn violations(&self) -> impl Iterator<Item = &RequirementCheck> {
        self.checks.iter().filter(|c| !c.satisfied)
    }
}

impl fmt::Display for RequirementReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: requirements {}", self.algorithm, self.table_entry)?;
        for c in &self.checks {
            let mark = if c.satisfied { "ok" } else { "FAILS" };
            write!(f, "; {} {mark} ({})", c.requirement, c.detail)?;
        }
        Ok(())
    }
}

/// Checks the requirements on `A` listed for `algorithm` in the algorithm table.
///
/// The report is advisory; solvers refuse to run on violations unless
/// `override_requirements` is set.
pub fn check_table_requirements(summary: &SpectralSummary, algorithm: Algorithm) -> RequirementReport {
    let pd = RequirementCheck {
        requirement: "AAᵀ ≻ 0",
        satisfied: summary.rowgram_positive_definite(),
        detail: format!(
            "λ_min(AAᵀ) = {:e}, threshold {:e}",
            summary.rowgram_lambda_min,
            PD_RELATIVE_THRESHOLD * summary.gram_lambda_max
        ),
    };
    let (table_entry, checks) = match algorithm {
        Algorithm::PadmmSf1 => ("Unknown", vec![]),
        Algorithm::WpadmmSf4(NMode::ProxIdentity) => ("AAᵀ ≻ 0", vec![pd]),
        Algorithm::WpadmmSf4(NMode::Linearized) => {
            let kappa = RequirementCheck {
                requirement: "κ(AᵀA) < 2",
                satisfied: summary.gram_condition < 2.0,
                detail: format!("κ(AᵀA) = {}", summary.gram_condition),
            };
            ("AAᵀ ≻ 0, κ(AᵀA) < 2", vec![pd, kappa])
        }
        _ => ("None", vec![]),
    };
    RequirementReport {
        algorithm,
        table_entry,
        checks,
    }
}
