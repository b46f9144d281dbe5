//! Stability and structure certificates for Metzler matrices and DH factors.
//!
//! A Hurwitz Metzler `X` has `−X⁻¹ ≥ 0` entrywise, so `ζ = −X⁻¹·1` and
//! `z = −X⁻ᵀ·1` are positive vectors with `Xζ < 0` and `zᵀX < 0`. Either
//! vector proves stability, and `P = diag(zᵢ/ζᵢ)` is a diagonal Lyapunov
//! matrix with `XᵀP + PX ≺ 0`.

use serde::{Deserialize, Serialize};

use crate::dense::{solve_linear, sym_eig, DenseMatrix};
use crate::error::{Error, Result};
use crate::subproblems::DhTriple;

/// Positivity threshold used by the certificate checks.
pub const CERT_EPS: f64 = 1e-12;

/// Default off-diagonal tolerance for the Metzler precondition.
pub const METZLER_TOL: f64 = 1e-9;

/// Positive vectors proving that a Metzler matrix is Hurwitz.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertBundle {
    /// `ζ > 0` with `Xζ < 0`.
    pub zeta: Vec<f64>,
    /// `z > 0` with `zᵀX < 0`.
    #[serde(rename = "z")]
    pub zvec: Vec<f64>,
    /// Diagonal Lyapunov matrix, `pdiagᵢ = zᵢ / ζᵢ`.
    pub pdiag: Vec<f64>,
    /// `maxᵢ (Xζ)ᵢ` (negative).
    pub zeta_margin: f64,
    /// `maxᵢ (zᵀX)ᵢ` (negative).
    pub z_margin: f64,
}

/// `Xᵢⱼ ≥ −tol` for every `i ≠ j`.
pub fn is_metzler(x: &DenseMatrix, tol: f64) -> bool {
    let (r, c) = (x.rows(), x.cols());
    (0..r).all(|i| (0..c).all(|j| i == j || x[(i, j)] >= -tol))
}

/// Returns a Hurwitz certificate for a Metzler `X`, or `None` if the
/// constructive vectors fail the positivity checks. `None` alone does not
/// prove instability.
pub fn hurwitz_certificate_metzler(x: &DenseMatrix) -> Result<Option<CertBundle>> {
    let n = x.require_square()?;
    if !is_metzler(x, METZLER_TOL) {
        return Err(Error::Contract("hurwitz certificate requires a Metzler matrix".into()));
    }
    let minus_ones = vec![-1.0; n];
    let zeta = match solve_linear(x, &minus_ones) {
        Ok(v) => v,
        Err(Error::Singular { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let zvec = match solve_linear(&x.transpose(), &minus_ones) {
        Ok(v) => v,
        Err(Error::Singular { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    if zeta.iter().chain(&zvec).any(|&v| !(v > CERT_EPS)) {
        return Ok(None);
    }
    let xz = x.matvec(&zeta)?;
    let zx = x.tr_matvec(&zvec)?;
    let zeta_margin = xz.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let z_margin = zx.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(zeta_margin < -CERT_EPS && z_margin < -CERT_EPS) {
        return Ok(None);
    }
    let pdiag = zvec.iter().zip(&zeta).map(|(z, s)| z / s).collect();
    Ok(Some(CertBundle {
        zeta,
        zvec,
        pdiag,
        zeta_margin,
        z_margin,
    }))
}

/// `λ_max(XᵀP + PX) < −1e-12` for `P = diag(pdiag)`.
pub fn check_diagonal_lyapunov(x: &DenseMatrix, pdiag: &[f64]) -> Result<bool> {
    let n = x.require_square()?;
    if pdiag.len() != n {
        return Err(Error::Dimension(format!("pdiag has {} entries for n = {n}", pdiag.len())));
    }
    if pdiag.iter().any(|&p| !(p > 0.0)) {
        return Err(Error::Contract("pdiag must be positive".into()));
    }
    // (XᵀP + PX)ᵢⱼ = Xⱼᵢ pⱼ + pᵢ Xᵢⱼ
    let s = DenseMatrix::from_fn(n, n, |i, j| x[(j, i)] * pdiag[j] + pdiag[i] * x[(i, j)]);
    Ok(sym_eig(&s)?.max() < -CERT_EPS)
}

/// Structural checks on DH factors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DhReport {
    /// `‖J + Jᵀ‖∞` (largest entry).
    pub skew_defect: f64,
    pub r_min_eig: f64,
    pub q_min: f64,
    /// Smallest singular value of `R·diag(q)`. Positive means `RQx ≠ 0` for
    /// all `x ≠ 0`, which rules out imaginary-axis eigenvalues of `(J − R)Q`.
    pub rq_min_singular: f64,
    pub skew_ok: bool,
    pub r_psd_ok: bool,
    pub q_nonneg_ok: bool,
    pub no_imaginary_axis: bool,
}

impl DhReport {
    pub fn all_pass(&self) -> bool {
        self.skew_ok && self.r_psd_ok && self.q_nonneg_ok && self.no_imaginary_axis
    }
}

pub fn dh_validate(t: &DhTriple, tol: f64) -> Result<DhReport> {
    let n = t.j.require_square()?;
    t.j.check_same_shape(&t.r)?;
    if t.q.len() != n {
        return Err(Error::Dimension(format!("q has {} entries for n = {n}", t.q.len())));
    }
    let skew_defect = t.j.add(&t.j.transpose())?.max_abs();
    let r_sym = DenseMatrix::from_fn(n, n, |i, j| 0.5 * (t.r[(i, j)] + t.r[(j, i)]));
    let r_min_eig = sym_eig(&r_sym)?.min();
    let q_min = t.q.iter().copied().fold(f64::INFINITY, f64::min);
    let rq = t.r.scale_columns(&t.q)?;
    let gram = rq.transpose().matmul(&rq)?;
    let gram = DenseMatrix::from_fn(n, n, |i, j| 0.5 * (gram[(i, j)] + gram[(j, i)]));
    let rq_min_singular = sym_eig(&gram)?.min().max(0.0).sqrt();
    Ok(DhReport {
        skew_defect,
        r_min_eig,
        q_min,
        rq_min_singular,
        skew_ok: skew_defect <= tol,
        r_psd_ok: r_min_eig >= -tol,
        q_nonneg_ok: q_min >= -tol,
        no_imaginary_axis: rq_min_singular > tol,
    })
}

/// `Σ_{i≠j} max(0, −Aᵢⱼ)²`: the squared distance from `A` to the Metzler
/// cone. Every stable Metzler matrix is in that cone, so this bounds the
/// optimal distance from below.
pub fn lower_bound_metzler_cone(a: &DenseMatrix) -> Result<f64> {
    let n = a.require_square()?;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j && a[(i, j)] < 0.0 {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    Ok(s)
}
