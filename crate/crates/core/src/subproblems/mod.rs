//! The two convex blocks of the alternating scheme.
//!
//! With `Q = diag(q)` fixed, the `(J, R)` step optimizes over
//! `W = J − R`, where `J = skew(W)` and `R = −sym(W)`; the constraint
//! `R ⪰ δI` (or its DD/SDD inner approximations) becomes a constraint on
//! `sym(W)` and the Metzler pattern becomes `offdiag(W) ≥ 0`. With `W` fixed,
//! the `q` step is a separable nonnegative least-squares problem.

mod jr_dd;
mod jr_psd;
mod jr_sdd;
mod q_step;

pub use jr_dd::jr_step_dd;
pub use jr_psd::jr_step_psd;
pub use jr_sdd::jr_step_sdd;
pub use q_step::{q_step_admm, q_step_closed_form, QStepOutcome};

use serde::{Deserialize, Serialize};

use crate::cones::{clip_offdiag_in_place, min_eig_2x2, ConeMode, SddBlock, SddCertificate};
use crate::dense::{skew_part, sym_eig, sym_part, DenseMatrix};
use crate::error::{Error, Result};
use crate::qp::AdmmState;

/// Factors of a candidate `X = (J − R)·diag(q)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DhTriple {
    /// Skew-symmetric energy-flux matrix.
    pub j: DenseMatrix,
    /// Symmetric dissipation matrix.
    pub r: DenseMatrix,
    /// Diagonal of `Q`.
    pub q: Vec<f64>,
}

impl DhTriple {
    /// Splits `W` into `J = skew(W)` and `R = −sym(W)`.
    pub fn from_w(w: &DenseMatrix, q: Vec<f64>) -> Result<Self> {
        Ok(Self {
            j: skew_part(w)?,
            r: sym_part(w)?.scale(-1.0),
            q,
        })
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    /// `J − R`.
    pub fn w(&self) -> DenseMatrix {
        self.j.sub(&self.r).expect("factors share a shape")
    }

    /// `(J − R)·diag(q)`.
    pub fn compose(&self) -> DenseMatrix {
        self.w().scale_columns(&self.q).expect("factors share a shape")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubproblemSettings {
    pub rho: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Strictness floor: `R ⪰ δI` (or the DD/SDD analogue).
    pub delta: f64,
    /// Lower bound on the entries of `q`.
    pub eps_q: f64,
}

impl Default for SubproblemSettings {
    fn default() -> Self {
        Self {
            rho: 1.0,
            tol: 1e-8,
            max_iter: 5000,
            delta: 1e-9,
            eps_q: 0.0,
        }
    }
}

impl SubproblemSettings {
    pub fn validate(&self) -> Result<()> {
        if self.rho > 0.0
            && self.tol > 0.0
            && self.max_iter > 0
            && self.delta >= 0.0
            && self.eps_q >= 0.0
            && self.eps_q.is_finite()
        {
            Ok(())
        } else {
            Err(Error::Contract(format!("invalid subproblem settings {self:?}")))
        }
    }
}

/// Solver state carried between calls of the same `(J, R)` step.
#[derive(Clone, Debug, PartialEq)]
pub enum JrWarm {
    /// Two-copy consensus ADMM (PSD mode).
    Consensus {
        z1: DenseMatrix,
        u1: DenseMatrix,
        z2: DenseMatrix,
        u2: DenseMatrix,
        rho: f64,
    },
    /// QP engine state (DD and SDD modes).
    Qp(AdmmState),
}

/// Result of one `(J, R)` step.
#[derive(Clone, Debug)]
pub struct JrOutcome {
    /// Feasible `W = J − R`.
    pub w: DenseMatrix,
    /// Present in SDD mode: decomposition of `−sym(W)`.
    pub certificate: Option<SddCertificate>,
    pub iterations: usize,
    pub converged: bool,
    pub primal_res: f64,
    pub dual_res: f64,
    pub warm: JrWarm,
}

/// `‖A − W·diag(q)‖²_F`.
pub fn dh_objective(a: &DenseMatrix, w: &DenseMatrix, q: &[f64]) -> f64 {
    let n = a.cols();
    let mut s = 0.0;
    for i in 0..a.rows() {
        for j in 0..n {
            let d = a[(i, j)] - w[(i, j)] * q[j];
            s += d * d;
        }
    }
    s
}

pub(crate) fn check_step_inputs(a: &DenseMatrix, q: &[f64], w_init: &DenseMatrix) -> Result<usize> {
    let n = a.require_square()?;
    a.check_same_shape(w_init)?;
    if q.len() != n {
        return Err(Error::Dimension(format!("q has {} entries for n = {n}", q.len())));
    }
    if q.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::Contract("q must be finite and nonnegative".into()));
    }
    Ok(n)
}

/// Makes `W` exactly PSD-mode feasible: clips the off-diagonal, then shifts
/// the diagonal so that `λ_max(sym W) ≤ −δ`. Diagonal shifts leave the
/// off-diagonal untouched.
pub fn restore_psd(w: &DenseMatrix, delta: f64) -> Result<DenseMatrix> {
    let mut out = w.clone();
    clip_offdiag_in_place(&mut out);
    let top = sym_eig(&sym_part(&out)?)?.max();
    if top > -delta {
        out.shift_diag(-(top + delta));
    }
    Ok(out)
}

/// Makes `W` exactly DD-mode feasible: clips the off-diagonal, then lowers
/// each diagonal entry until `R = −sym(W)` satisfies
/// `Rᵢᵢ ≥ Σ_{j≠i} |Rᵢⱼ| + δ`.
pub fn restore_dd(w: &DenseMatrix, delta: f64) -> Result<DenseMatrix> {
    let n = w.require_square()?;
    let mut out = w.clone();
    clip_offdiag_in_place(&mut out);
    for i in 0..n {
        let off: f64 = (0..n)
            .filter(|&j| j != i)
            .map(|j| 0.5 * (out[(i, j)] + out[(j, i)]))
            .sum();
        let rii = -out[(i, i)];
        let deficit = off + delta - rii;
        if deficit > 0.0 {
            out[(i, i)] -= deficit;
        }
    }
    Ok(out)
}

/// Splits `−sym(W) − δI` into PSD 2×2 blocks using its diagonal dominance.
/// `W` must satisfy [`restore_dd`]'s postcondition.
pub(crate) fn dd_blocks(w: &DenseMatrix, delta: f64) -> Result<Vec<SddBlock>> {
    let n = w.require_square()?;
    if n < 2 {
        return Err(Error::Contract("SDD decomposition needs n ≥ 2".into()));
    }
    let r = sym_part(w)?.scale(-1.0);
    let share = (n - 1) as f64;
    let slack: Vec<f64> = (0..n)
        .map(|i| {
            let off: f64 = (0..n).filter(|&j| j != i).map(|j| r[(i, j)].abs()).sum();
            (r[(i, i)] - delta - off).max(0.0) / share
        })
        .collect();
    let mut blocks = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let f = r[(i, j)];
            blocks.push(SddBlock {
                i,
                j,
                mii: f.abs() + slack[i],
                mij: f,
                mjj: f.abs() + slack[j],
            });
        }
    }
    Ok(blocks)
}

/// Makes `W` SDD-mode feasible given candidate blocks for `−sym(W) − δI`:
/// clips the off-diagonal of `W`, re-targets each block's off-diagonal entry,
/// lifts block diagonals just enough to be PSD, spreads `δ` over the blocks
/// and rebuilds `diag(W)` from the blocks so the certificate assembles to
/// `−sym(W)`.
pub(crate) fn restore_sdd(
    w: &DenseMatrix,
    blocks: &[SddBlock],
    delta: f64,
) -> Result<(DenseMatrix, SddCertificate)> {
    let n = w.require_square()?;
    if n < 2 {
        return Err(Error::Contract("SDD mode needs n ≥ 2".into()));
    }
    let mut out = w.clone();
    clip_offdiag_in_place(&mut out);
    let lift = delta / (n - 1) as f64;
    let mut diag = vec![0.0; n];
    let mut fixed = Vec::with_capacity(blocks.len());
    for b in blocks {
        let mij = -0.5 * (out[(b.i, b.j)] + out[(b.j, b.i)]);
        let t = (-min_eig_2x2(b.mii, mij, b.mjj)).max(0.0);
        let blk = SddBlock {
            i: b.i,
            j: b.j,
            mii: b.mii + t + lift,
            mij,
            mjj: b.mjj + t + lift,
        };
        diag[b.i] += blk.mii;
        diag[b.j] += blk.mjj;
        fixed.push(blk);
    }
    for (i, d) in diag.iter().enumerate() {
        out[(i, i)] = -d;
    }
    Ok((out, SddCertificate { blocks: fixed }))
}

/// Brings any square `W` into the feasible set of `mode` by off-diagonal
/// clipping and diagonal shifts only.
pub fn make_feasible(
    w: &DenseMatrix,
    mode: ConeMode,
    delta: f64,
) -> Result<(DenseMatrix, Option<SddCertificate>)> {
    match mode {
        ConeMode::Psd => Ok((restore_psd(w, delta)?, None)),
        ConeMode::Dd => Ok((restore_dd(w, delta)?, None)),
        ConeMode::Sdd => {
            let dd = restore_dd(w, delta)?;
            let blocks = dd_blocks(&dd, delta)?;
            let (w, cert) = restore_sdd(&dd, &blocks, delta)?;
            Ok((w, Some(cert)))
        }
    }
}

/// Dispatches the `(J, R)` step for `mode`.
pub fn jr_step(
    mode: ConeMode,
    a: &DenseMatrix,
    q: &[f64],
    w_init: &DenseMatrix,
    settings: &SubproblemSettings,
    warm: Option<&JrWarm>,
) -> Result<JrOutcome> {
    match mode {
        ConeMode::Psd => jr_step_psd(a, q, w_init, settings, warm),
        ConeMode::Dd => jr_step_dd(a, q, w_init, settings, warm),
        ConeMode::Sdd => jr_step_sdd(a, q, w_init, settings, warm),
    }
}

/// Membership of `W` in the feasible set of `mode` at tolerance `tol`.
pub fn is_feasible(
    w: &DenseMatrix,
    mode: ConeMode,
    certificate: Option<&SddCertificate>,
    tol: f64,
) -> Result<bool> {
    let n = w.require_square()?;
    for i in 0..n {
        for j in 0..n {
            if i != j && w[(i, j)] < -tol {
                return Ok(false);
            }
        }
    }
    let r = sym_part(w)?.scale(-1.0);
    match mode {
        ConeMode::Psd => Ok(sym_eig(&r)?.min() >= -tol),
        ConeMode::Dd => crate::cones::is_dd(&r, tol),
        ConeMode::Sdd => match certificate {
            Some(c) => crate::cones::validate_sdd(&r, c, tol),
            None => Ok(false),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::{is_dd, validate_sdd};

    fn sample() -> DenseMatrix {
        DenseMatrix::from_rows(&[[0.5, -1.0, 2.0], [0.3, 1.0, -0.2], [1.5, 0.7, -2.0]]).unwrap()
    }

    #[test]
    fn restore_psd_is_feasible() {
        let w = restore_psd(&sample(), 1e-3).unwrap();
        assert!(is_feasible(&w, ConeMode::Psd, None, 0.0).unwrap());
        let top = sym_eig(&sym_part(&w).unwrap()).unwrap().max();
        assert!(top <= -1e-3 + 1e-12);
    }

    #[test]
    fn restore_dd_is_feasible() {
        let w = restore_dd(&sample(), 1e-3).unwrap();
        let r = sym_part(&w).unwrap().scale(-1.0);
        assert!(is_dd(&r, 0.0).unwrap());
        for i in 0..3 {
            let off: f64 = (0..3).filter(|&j| j != i).map(|j| r[(i, j)].abs()).sum();
            assert!(r[(i, i)] >= off + 1e-3 - 1e-12);
        }
    }

    #[test]
    fn sdd_make_feasible_certifies() {
        let (w, cert) = make_feasible(&sample(), ConeMode::Sdd, 1e-3).unwrap();
        let cert = cert.unwrap();
        let r = sym_part(&w).unwrap().scale(-1.0);
        assert!(validate_sdd(&r, &cert, 1e-12).unwrap());
        // the δ margin survives: R − δI is still a sum of PSD blocks
        let mut shifted = cert.clone();
        for b in &mut shifted.blocks {
            b.mii -= 0.5e-3;
            b.mjj -= 0.5e-3;
        }
        let mut r_minus = r.clone();
        r_minus.shift_diag(-1e-3);
        assert!(validate_sdd(&r_minus, &shifted, 1e-12).unwrap());
    }

    #[test]
    fn feasible_inputs_survive_restoration() {
        let w = DenseMatrix::from_rows(&[[-2.0, 0.5], [0.25, -3.0]]).unwrap();
        assert_eq!(restore_psd(&w, 1e-9).unwrap(), w);
        assert_eq!(restore_dd(&w, 1e-9).unwrap(), w);
    }

    #[test]
    fn triple_composition() {
        let w = sample();
        let t = DhTriple::from_w(&w, vec![1.0, 2.0, 0.5]).unwrap();
        assert!(t.w().sub(&w).unwrap().max_abs() < 1e-15);
        let x = t.compose();
        assert!((x[(0, 1)] - w[(0, 1)] * 2.0).abs() < 1e-15);
        assert!(dh_objective(&x, &w, &t.q) < 1e-28);
    }
}
