//! Alternating `(J, R)` / `q` block coordinate descent for the nearest
//! stable Metzler matrix.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::certify::{hurwitz_certificate_metzler, is_metzler, lower_bound_metzler_cone, CertBundle};
use crate::cones::{project_metzler, ConeMode, SddCertificate};
use crate::dense::{frobenius_dist_sq, lyapunov_solve, skew_part, sym_eig, sym_part, DenseMatrix, Lu};
use crate::error::{Error, Result};
use crate::qp::QpStatus;
use crate::subproblems::{
    dh_objective, jr_step, make_feasible, q_step_admm, restore_psd, DhTriple, JrWarm,
    SubproblemSettings,
};

/// Number of consecutive small relative decreases that end the outer loop.
pub const STALL_WINDOW: usize = 5;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub enum InitStrategy {
    /// `X₀ = project_metzler(A) − sI` with `s = max(0, λ_max(sym)) + 1`.
    #[default]
    MetzlerShift,
    /// Factors built from the Lyapunov solution `AP + PAᵀ = −I`; needs a
    /// stable `A`, otherwise falls back to `MetzlerShift`.
    LyapunovDh,
    Custom(DhTriple),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub mode: ConeMode,
    pub max_outer: usize,
    /// Relative objective decrease below which an outer iteration counts as
    /// stalled.
    pub rel_tol: f64,
    pub init: InitStrategy,
    pub subproblem: SubproblemSettings,
    /// Recorded for reproducibility; the solver itself has no randomized
    /// steps.
    pub seed: Option<u64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            mode: ConeMode::Psd,
            max_outer: 500,
            rel_tol: 1e-7,
            init: InitStrategy::MetzlerShift,
            subproblem: SubproblemSettings::default(),
            seed: None,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_outer < 1 || !(self.rel_tol > 0.0) {
            return Err(Error::Contract(format!(
                "max_outer must be ≥ 1 and rel_tol > 0 (got {}, {})",
                self.max_outer, self.rel_tol
            )));
        }
        self.subproblem.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub obj_after_jr: f64,
    pub obj_after_q: f64,
    pub jr_inner_iters: usize,
    pub q_inner_iters: usize,
    pub jr_primal_res: f64,
    pub jr_dual_res: f64,
    pub q_primal_res: f64,
    pub q_dual_res: f64,
    pub wall_ms: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// Input was already a certified stable Metzler matrix.
    AlreadyStable,
    Converged,
    MaxOuter,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub x: DenseMatrix,
    pub factors: DhTriple,
    pub dist_sq: f64,
    pub lower_bound: f64,
    pub certified: bool,
    pub certificate: Option<CertBundle>,
    /// Block decomposition of `R` in SDD mode.
    pub sdd_certificate: Option<SddCertificate>,
    pub trace: IterationTrace,
    pub status: SolveStatus,
    /// `LyapunovDh` was requested for an unstable input and `MetzlerShift`
    /// was used instead.
    pub init_fallback: bool,
    pub hint: Option<String>,
}

/// Exact DH factors of a stable `A`: with `AP + PAᵀ = −I`,
/// `J = (AP − PAᵀ)/2`, `R = −(AP + PAᵀ)/2` and `Q = P⁻¹` give
/// `(J − R)Q = A`.
///
/// Fails with a contract error when `P` is not positive definite, i.e. `A`
/// is not Hurwitz.
pub fn lyapunov_dh_factors(a: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix, DenseMatrix)> {
    let n = a.require_square()?;
    let p = lyapunov_solve(a, &DenseMatrix::identity(n))?;
    if sym_eig(&p)?.min() <= 0.0 {
        return Err(Error::Contract("A is not Hurwitz: Lyapunov solution is not positive definite".into()));
    }
    let ap = a.matmul(&p)?;
    let pat = ap.transpose();
    let j = ap.sub(&pat)?.scale(0.5);
    let r = ap.add(&pat)?.scale(-0.5);
    let lu = Lu::factor(&p)?;
    let mut q = DenseMatrix::zeros(n, n);
    for col in 0..n {
        let mut e = vec![0.0; n];
        e[col] = 1.0;
        let c = lu.solve(&e)?;
        for (row, v) in c.into_iter().enumerate() {
            q[(row, col)] = v;
        }
    }
    let q = DenseMatrix::from_fn(n, n, |i, k| 0.5 * (q[(i, k)] + q[(k, i)]));
    Ok((j, r, q))
}

/// Initial factors. Returns the triple and whether `LyapunovDh` fell back.
pub fn init_dh(a: &DenseMatrix, strategy: &InitStrategy, delta: f64) -> Result<(DhTriple, bool)> {
    let n = a.require_square()?;
    match strategy {
        InitStrategy::MetzlerShift => Ok((metzler_shift(a)?, false)),
        InitStrategy::LyapunovDh => match lyapunov_dh_factors(a) {
            Ok((j, r, q_full)) => {
                let q = q_full.diag();
                let w = restore_psd(&j.sub(&r)?, delta)?;
                Ok((DhTriple::from_w(&w, q)?, false))
            }
            Err(Error::Contract(_)) | Err(Error::NoLyapunovSolution) | Err(Error::Singular { .. }) => {
                Ok((metzler_shift(a)?, true))
            }
            Err(e) => Err(e),
        },
        InitStrategy::Custom(t) => {
            if t.n() != n || t.j.rows() != n || t.r.rows() != n {
                return Err(Error::Dimension(format!("custom factors do not match n = {n}")));
            }
            if t.q.iter().any(|v| !(*v >= 0.0)) {
                return Err(Error::Contract("custom q must be nonnegative".into()));
            }
            Ok((t.clone(), false))
        }
    }
}

fn metzler_shift(a: &DenseMatrix) -> Result<DhTriple> {
    let mut x0 = project_metzler(a);
    let top = sym_eig(&sym_part(&x0)?)?.max();
    let s = top.max(0.0) + 1.0;
    x0.shift_diag(-s);
    Ok(DhTriple {
        j: skew_part(&x0)?,
        r: sym_part(&x0)?.scale(-1.0),
        q: vec![1.0; a.rows()],
    })
}

/// Runs the alternating scheme: `(J, R)` step with `q` fixed, then `q` step
/// with `W = J − R` fixed, until the relative objective decrease stays below
/// `rel_tol` for [`STALL_WINDOW`] outer iterations or `max_outer` is reached.
///
/// A half-step whose output has a larger objective than the current
/// (feasible) iterate is rejected, so the recorded objectives never increase.
pub fn solve_nearest_metzler(a: &DenseMatrix, opts: &SolverOptions) -> Result<SolveResult> {
    let n = a.require_square()?;
    opts.validate()?;
    if opts.mode == ConeMode::Sdd && n < 2 {
        return Err(Error::Contract("SDD mode needs n ≥ 2".into()));
    }
    let lower_bound = lower_bound_metzler_cone(a)?;

    if is_metzler(a, 0.0) {
        if let Some(cert) = hurwitz_certificate_metzler(a)? {
            return Ok(already_stable(a, cert, lower_bound));
        }
    }

    let sub = &opts.subproblem;
    let (init, init_fallback) = init_dh(a, &opts.init, sub.delta)?;
    let (mut w, mut sdd_cert) = make_feasible(&init.w(), opts.mode, sub.delta)?;
    let mut q: Vec<f64> = init.q.iter().map(|v| v.max(sub.eps_q)).collect();
    let mut obj = dh_objective(a, &w, &q);

    let start = Instant::now();
    let mut trace = IterationTrace::default();
    let mut jr_warm: Option<JrWarm> = None;
    let mut q_warm = None;
    let mut stalled = 0;
    let mut status = SolveStatus::MaxOuter;

    for iter in 1..=opts.max_outer {
        let before = obj;

        let jr = jr_step(opts.mode, a, &q, &w, sub, jr_warm.as_ref())?;
        let obj_jr = dh_objective(a, &jr.w, &q);
        if obj_jr <= obj {
            w = jr.w;
            sdd_cert = jr.certificate;
            obj = obj_jr;
        }
        let obj_after_jr = obj;

        let qs = q_step_admm(a, &w, sub, q_warm.as_ref())?;
        let obj_q = dh_objective(a, &w, &qs.q);
        if obj_q <= obj {
            q = qs.q;
            obj = obj_q;
        }

        trace.records.push(IterationRecord {
            iter,
            obj_after_jr,
            obj_after_q: obj,
            jr_inner_iters: jr.iterations,
            q_inner_iters: qs.state.iteration,
            jr_primal_res: jr.primal_res,
            jr_dual_res: jr.dual_res,
            q_primal_res: qs.state.primal_res,
            q_dual_res: qs.state.dual_res,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        });
        jr_warm = Some(jr.warm);
        q_warm = Some(qs.state);
        debug_assert!(qs.status != QpStatus::PrimalInfeasibleGuess);

        let rel = if before > 0.0 { (before - obj) / before } else { 0.0 };
        if rel < opts.rel_tol {
            stalled += 1;
        } else {
            stalled = 0;
        }
        if stalled >= STALL_WINDOW || obj == 0.0 {
            status = SolveStatus::Converged;
            break;
        }
    }

    let factors = DhTriple::from_w(&w, q)?;
    let x = w.scale_columns(&factors.q)?;
    let dist_sq = frobenius_dist_sq(a, &x)?;
    let certificate = hurwitz_certificate_metzler(&x)?;
    let certified = certificate.is_some();
    let hint = (!certified).then(|| {
        if factors.q.iter().any(|&v| v <= 0.0) {
            "q reached zero, so X is singular; re-run with eps_q > 0".to_string()
        } else {
            "Hurwitz certificate failed; re-run with eps_q > 0 or a larger delta".to_string()
        }
    });
    Ok(SolveResult {
        x,
        factors,
        dist_sq,
        lower_bound,
        certified,
        certificate,
        sdd_certificate: sdd_cert,
        trace,
        status,
        init_fallback,
        hint,
    })
}

fn already_stable(a: &DenseMatrix, cert: CertBundle, lower_bound: f64) -> SolveResult {
    // A·diag(ζ/z) has a negative definite symmetric part (diagonal Lyapunov
    // certificate of Aᵀ), so q = z/ζ factors A exactly.
    let inv: Vec<f64> = cert.pdiag.iter().map(|p| 1.0 / p).collect();
    let w = a.scale_columns(&inv).expect("square input");
    let factors = DhTriple::from_w(&w, cert.pdiag.clone()).expect("square input");
    SolveResult {
        x: a.clone(),
        factors,
        dist_sq: 0.0,
        lower_bound,
        certified: true,
        certificate: Some(cert),
        sdd_certificate: None,
        trace: IterationTrace::default(),
        status: SolveStatus::AlreadyStable,
        init_fallback: false,
        hint: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metzler_shift_of_minus_identity() {
        let (t, fell_back) = init_dh(&DenseMatrix::identity(3).scale(-1.0), &InitStrategy::MetzlerShift, 1e-9).unwrap();
        assert!(!fell_back);
        assert_eq!(t.q, vec![1.0; 3]);
        assert_eq!(t.j, DenseMatrix::zeros(3, 3));
        assert_eq!(t.r, DenseMatrix::identity(3).scale(2.0));
    }

    #[test]
    fn lyapunov_factors_recompose() {
        let a = DenseMatrix::from_rows(&[[-1.0, -2.0], [0.5, -3.0]]).unwrap();
        let (j, r, q) = lyapunov_dh_factors(&a).unwrap();
        let x = j.sub(&r).unwrap().matmul(&q).unwrap();
        assert!(x.sub(&a).unwrap().max_abs() < 1e-8);
        // R = I/2
        assert!(r.sub(&DenseMatrix::identity(2).scale(0.5)).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn lyapunov_init_falls_back_on_unstable() {
        let a = DenseMatrix::from_rows(&[[1.0, -2.0], [0.5, -3.0]]).unwrap();
        let (_, fell_back) = init_dh(&a, &InitStrategy::LyapunovDh, 1e-9).unwrap();
        assert!(fell_back);
    }

    #[test]
    fn early_exit_on_stable_metzler() {
        let a = DenseMatrix::from_rows(&[[-2.0, 1.0], [0.5, -1.0]]).unwrap();
        let res = solve_nearest_metzler(&a, &SolverOptions::default()).unwrap();
        assert_eq!(res.status, SolveStatus::AlreadyStable);
        assert_eq!(res.x, a);
        assert_eq!(res.dist_sq, 0.0);
        assert!(res.certified);
        assert!(res.factors.compose().sub(&a).unwrap().max_abs() < 1e-10);
        let w = res.factors.w();
        assert!(sym_eig(&sym_part(&w).unwrap()).unwrap().max() < 0.0);
    }

    #[test]
    fn options_validation() {
        let bad = SolverOptions {
            max_outer: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let a = DenseMatrix::identity(1);
        let sdd = SolverOptions {
            mode: ConeMode::Sdd,
            ..Default::default()
        };
        assert!(solve_nearest_metzler(&a, &sdd).is_err());
    }
}
