//! Projections onto, and membership tests for, the cones used by the
//! subproblems.

use serde::{Deserialize, Serialize};

use crate::dense::{skew_part, sym_eig, sym_part, DenseMatrix};
use crate::error::{Error, Result};

/// Which inner description of the dissipation cone `R ⪰ 0` a solve uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConeMode {
    /// Exact semidefinite constraint.
    #[default]
    Psd,
    /// Diagonally dominant (linear constraints).
    Dd,
    /// Scaled diagonally dominant (sum of PSD 2×2 blocks).
    Sdd,
}

impl ConeMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ConeMode::Psd => "psd",
            ConeMode::Dd => "dd",
            ConeMode::Sdd => "sdd",
        }
    }
}

impl std::str::FromStr for ConeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "psd" => Ok(ConeMode::Psd),
            "dd" => Ok(ConeMode::Dd),
            "sdd" => Ok(ConeMode::Sdd),
            other => Err(Error::Contract(format!("unknown cone mode '{other}'"))),
        }
    }
}

/// One `(i, j)` block of an SDD decomposition: the 2×2 matrix
/// `[[mii, mij], [mij, mjj]]` embedded at rows/columns `i < j`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SddBlock {
    pub i: usize,
    pub j: usize,
    pub mii: f64,
    pub mij: f64,
    pub mjj: f64,
}

/// Witness that a symmetric matrix is a sum of PSD 2×2 principal blocks.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SddCertificate {
    pub blocks: Vec<SddBlock>,
}

impl SddCertificate {
    /// Sums the embedded blocks into an `n × n` matrix.
    pub fn assemble(&self, n: usize) -> Result<DenseMatrix> {
        let mut out = DenseMatrix::zeros(n, n);
        for b in &self.blocks {
            if b.i >= b.j || b.j >= n {
                return Err(Error::Contract(format!(
                    "block indices ({}, {}) invalid for n = {n}",
                    b.i, b.j
                )));
            }
            out[(b.i, b.i)] += b.mii;
            out[(b.j, b.j)] += b.mjj;
            out[(b.i, b.j)] += b.mij;
            out[(b.j, b.i)] += b.mij;
        }
        Ok(out)
    }
}

fn require_symmetric(s: &DenseMatrix) -> Result<usize> {
    let n = s.require_square()?;
    if !s.is_symmetric(crate::dense::SYMMETRY_TOL * (1.0 + s.max_abs())) {
        return Err(Error::Contract("matrix is not symmetric".into()));
    }
    Ok(n)
}

/// `U·diag(max(floor, λᵢ))·Uᵀ`: nearest matrix with spectrum bounded below by
/// `floor`. Inputs already in the set are returned unchanged.
pub fn project_psd(s: &DenseMatrix, floor: f64) -> Result<DenseMatrix> {
    require_symmetric(s)?;
    let eig = sym_eig(s)?;
    if eig.min() >= floor {
        return Ok(s.clone());
    }
    Ok(eig.recompose_with(|l| l.max(floor)))
}

/// Keeps the skew part of `W` and clips the spectrum of its symmetric part
/// from above at `ceil`.
pub fn project_nsd_sym_keep_skew(w: &DenseMatrix, ceil: f64) -> Result<DenseMatrix> {
    let sym = sym_part(w)?;
    let eig = sym_eig(&sym)?;
    if eig.max() <= ceil {
        return Ok(w.clone());
    }
    let clipped = eig.recompose_with(|l| l.min(ceil));
    skew_part(w)?.add(&clipped)
}

/// Replaces negative off-diagonal entries by zero; the diagonal is untouched.
pub fn project_offdiag_nonneg(w: &DenseMatrix) -> DenseMatrix {
    let mut out = w.clone();
    clip_offdiag_in_place(&mut out);
    out
}

pub(crate) fn clip_offdiag_in_place(w: &mut DenseMatrix) {
    let (r, c) = (w.rows(), w.cols());
    for i in 0..r {
        for j in 0..c {
            if i != j && w[(i, j)] < 0.0 {
                w[(i, j)] = 0.0;
            }
        }
    }
}

/// Nearest Metzler matrix (stability ignored). The Metzler set only
/// constrains off-diagonal entries, so the diagonal of `A` is kept.
pub fn project_metzler(a: &DenseMatrix) -> DenseMatrix {
    project_offdiag_nonneg(a)
}

/// Default DD tolerance `1e-9·(1 + ‖F‖∞)`.
pub fn default_dd_tol(f: &DenseMatrix) -> f64 {
    1e-9 * (1.0 + f.inf_norm())
}

/// `Fᵢᵢ + tol ≥ Σ_{j≠i} |Fᵢⱼ|` and `Fᵢᵢ ≥ −tol` for every row.
pub fn is_dd(f: &DenseMatrix, tol: f64) -> Result<bool> {
    let n = require_symmetric(f)?;
    Ok((0..n).all(|i| {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| f[(i, j)].abs()).sum();
        f[(i, i)] >= -tol && f[(i, i)] + tol >= off
    }))
}

/// Nearest PSD 2×2 matrix to `[[m11, m12], [m12, m22]]` in the full-matrix
/// Frobenius norm (`m12` counted twice).
pub fn project_psd_2x2(m11: f64, m12: f64, m22: f64) -> (f64, f64, f64) {
    let mean = 0.5 * (m11 + m22);
    let half_diff = 0.5 * (m11 - m22);
    let r = half_diff.hypot(m12);
    let lo = mean - r;
    let hi = mean + r;
    if lo >= 0.0 {
        return (m11, m12, m22);
    }
    if hi <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    // hi·(I + E)/2 with E = (M − mean·I)/r the reflection with eigenvalues ±1
    let h = 0.5 * hi;
    (h * (1.0 + half_diff / r), h * m12 / r, h * (1.0 - half_diff / r))
}

/// Smallest eigenvalue of a symmetric 2×2 matrix.
pub fn min_eig_2x2(m11: f64, m12: f64, m22: f64) -> f64 {
    0.5 * (m11 + m22) - (0.5 * (m11 - m22)).hypot(m12)
}

/// Checks that every block is PSD (min eigenvalue ≥ −tol) and that the blocks
/// sum to `F` within `tol` in Frobenius norm.
pub fn validate_sdd(f: &DenseMatrix, cert: &SddCertificate, tol: f64) -> Result<bool> {
    let n = require_symmetric(f)?;
    let assembled = cert.assemble(n)?;
    let blocks_psd = cert
        .blocks
        .iter()
        .all(|b| min_eig_2x2(b.mii, b.mij, b.mjj) >= -tol);
    Ok(blocks_psd && assembled.sub(f)?.fro_norm() <= tol)
}
