//! Dense convex QP solver: operator-splitting ADMM in the style of OSQP.
//!
//! Solves `minimize ½xᵀPx + qᵀx  s.t.  l ≤ Cx ≤ u` by iterating a regularized
//! linear solve, a projection onto the bounds and a scaled dual update. The
//! linear system `P + σI + ρCᵀC` is factorized once and reused until `ρ`
//! is adapted.
//!
//! Inside the crate the same iteration also handles rows that are grouped
//! into 2×2 PSD blocks, which is how the SDD subproblem is solved.

use serde::{Deserialize, Serialize};

use crate::cones::project_psd_2x2;
use crate::dense::{dot, norm_inf, sym_eig, DenseMatrix, Lu, SYMMETRY_TOL};
use crate::error::{Error, Result};

const ADAPT_EVERY: usize = 50;
const ADAPT_RATIO: f64 = 10.0;
const INFEAS_WINDOW: usize = 1000;

/// `minimize ½xᵀPx + qᵀx subject to l ≤ Cx ≤ u`.
#[derive(Clone, Debug)]
pub struct QpProblem {
    pub p: DenseMatrix,
    pub q: Vec<f64>,
    pub c: DenseMatrix,
    pub l: Vec<f64>,
    pub u: Vec<f64>,
}

impl QpProblem {
    /// Checks shapes, `l ≤ u`, symmetry of `P` and `λ_min(P) ≥ −1e-9`.
    pub fn new(
        p: DenseMatrix,
        q: Vec<f64>,
        c: DenseMatrix,
        l: Vec<f64>,
        u: Vec<f64>,
    ) -> Result<Self> {
        let prob = Self::new_unchecked_psd(p, q, c, l, u)?;
        let min_eig = if is_diagonal(&prob.p) {
            prob.p.diag().into_iter().fold(f64::INFINITY, f64::min)
        } else {
            sym_eig(&prob.p)?.min()
        };
        if min_eig < -1e-9 {
            return Err(Error::Contract(format!(
                "P is not positive semidefinite (min eigenvalue {min_eig:e})"
            )));
        }
        Ok(prob)
    }

    /// Shape and bound checks only; `P` is trusted to be PSD.
    pub(crate) fn new_unchecked_psd(
        p: DenseMatrix,
        q: Vec<f64>,
        c: DenseMatrix,
        l: Vec<f64>,
        u: Vec<f64>,
    ) -> Result<Self> {
        let n = p.require_square()?;
        if q.len() != n || c.cols() != n {
            return Err(Error::Dimension(format!(
                "P is {n}x{n}, q has {} entries, C has {} columns",
                q.len(),
                c.cols()
            )));
        }
        let m = c.rows();
        if l.len() != m || u.len() != m {
            return Err(Error::Dimension(format!(
                "C has {m} rows but bounds have {} / {} entries",
                l.len(),
                u.len()
            )));
        }
        if !p.is_symmetric(SYMMETRY_TOL * (1.0 + p.max_abs())) {
            return Err(Error::Contract("P is not symmetric".into()));
        }
        for (k, (lo, hi)) in l.iter().zip(&u).enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi {
                return Err(Error::Contract(format!("bounds invalid at row {k}: [{lo}, {hi}]")));
            }
        }
        Ok(Self { p, q, c, l, u })
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn m(&self) -> usize {
        self.l.len()
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        let px = self.p.matvec(x).expect("shape checked");
        0.5 * dot(x, &px) + dot(&self.q, x)
    }
}

fn is_diagonal(m: &DenseMatrix) -> bool {
    let n = m.rows();
    (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)] == 0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QpSettings {
    pub rho: f64,
    pub sigma: f64,
    /// Over-relaxation parameter in (0, 2).
    pub alpha: f64,
    pub max_iter: usize,
    pub eps_abs: f64,
    pub eps_rel: f64,
    pub adaptive_rho: bool,
}

impl Default for QpSettings {
    fn default() -> Self {
        Self {
            rho: 1.0,
            sigma: 1e-6,
            alpha: 1.6,
            max_iter: 20_000,
            eps_abs: 1e-8,
            eps_rel: 1e-8,
            adaptive_rho: true,
        }
    }
}

impl QpSettings {
    fn validate(&self) -> Result<()> {
        let ok = self.rho > 0.0
            && self.sigma > 0.0
            && self.alpha > 0.0
            && self.alpha < 2.0
            && self.max_iter > 0
            && self.eps_abs > 0.0
            && self.eps_rel > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Contract(format!("invalid QP settings {self:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum QpStatus {
    Solved,
    MaxIter,
    PrimalInfeasibleGuess,
}

/// Iterate triple of an ADMM loop: primal `x`, split copy `z`, scaled dual
/// `u`, plus the penalty and last residuals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmmState {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub u: Vec<f64>,
    pub rho: f64,
    pub iteration: usize,
    pub primal_res: f64,
    pub dual_res: f64,
}

#[derive(Clone, Debug)]
pub struct QpSolution {
    pub x: Vec<f64>,
    pub status: QpStatus,
    pub state: AdmmState,
}

/// Solves a convex QP. `warm` (if its dimensions match) seeds `x`, `z`, `u`
/// and `ρ`.
pub fn qp_solve(
    prob: &QpProblem,
    settings: &QpSettings,
    warm: Option<&AdmmState>,
) -> Result<QpSolution> {
    solve_with_psd_blocks(prob, &[], settings, warm)
}

/// Projects `v` onto the constraint set: bounds first, then each triple of
/// rows `(m11, √2·m12, m22)` onto the 2×2 PSD cone.
fn project(v: &mut [f64], l: &[f64], u: &[f64], psd_rows: &[[usize; 3]]) {
    for ((vi, lo), hi) in v.iter_mut().zip(l).zip(u) {
        *vi = vi.clamp(*lo, *hi);
    }
    for &[a, b, c] in psd_rows {
        let (m11, m12, m22) = project_psd_2x2(v[a], v[b] / std::f64::consts::SQRT_2, v[c]);
        v[a] = m11;
        v[b] = m12 * std::f64::consts::SQRT_2;
        v[c] = m22;
    }
}

pub(crate) fn solve_with_psd_blocks(
    prob: &QpProblem,
    psd_rows: &[[usize; 3]],
    settings: &QpSettings,
    warm: Option<&AdmmState>,
) -> Result<QpSolution> {
    settings.validate()?;
    let (n, m) = (prob.n(), prob.m());
    for rows in psd_rows {
        if rows.iter().any(|&r| r >= m) {
            return Err(Error::Contract(format!("PSD block rows {rows:?} out of range")));
        }
    }
    let c = SparseRows::from_dense(&prob.c);
    let p_sparse = SparseRows::from_dense(&prob.p);
    let ctc = prob.c.transpose().matmul(&prob.c)?;

    let warm = warm.filter(|w| w.x.len() == n && w.z.len() == m && w.u.len() == m && w.rho > 0.0);
    let (mut x, mut z, mut y, mut rho) = match warm {
        Some(w) => (
            w.x.clone(),
            w.z.clone(),
            w.u.iter().map(|ui| ui * w.rho).collect::<Vec<_>>(),
            w.rho,
        ),
        None => {
            let x = vec![0.0; n];
            let mut z = c.mul(&x);
            project(&mut z, &prob.l, &prob.u, psd_rows);
            (x, z, vec![0.0; m], settings.rho)
        }
    };

    let factor = |rho: f64| -> Result<Lu> {
        let k = DenseMatrix::from_fn(n, n, |i, j| {
            prob.p[(i, j)] + rho * ctc[(i, j)] + if i == j { settings.sigma } else { 0.0 }
        });
        Lu::factor(&k)
    };
    let mut kkt = factor(rho)?;

    let alpha = settings.alpha;
    let mut status = QpStatus::MaxIter;
    let mut primal_res = f64::INFINITY;
    let mut dual_res = f64::INFINITY;
    let mut last_adapt = 0;
    let mut iteration = 0;
    let mut history: Vec<(f64, f64)> = Vec::new();

    while iteration < settings.max_iter {
        iteration += 1;
        let shifted: Vec<f64> = z.iter().zip(&y).map(|(zi, yi)| rho * zi - yi).collect();
        let ct_shift = c.tr_mul(&shifted, n);
        let rhs: Vec<f64> = (0..n)
            .map(|i| settings.sigma * x[i] - prob.q[i] + ct_shift[i])
            .collect();
        let x_tilde = kkt.solve_plain(&rhs);
        let z_tilde = c.mul(&x_tilde);

        for i in 0..n {
            x[i] = alpha * x_tilde[i] + (1.0 - alpha) * x[i];
        }
        let z_relaxed: Vec<f64> = (0..m)
            .map(|k| alpha * z_tilde[k] + (1.0 - alpha) * z[k])
            .collect();
        let mut z_new: Vec<f64> = (0..m).map(|k| z_relaxed[k] + y[k] / rho).collect();
        project(&mut z_new, &prob.l, &prob.u, psd_rows);
        for k in 0..m {
            y[k] += rho * (z_relaxed[k] - z_new[k]);
        }
        z = z_new;

        let cx = c.mul(&x);
        let px = p_sparse.mul(&x);
        let cty = c.tr_mul(&y, n);
        let r_prim: Vec<f64> = cx.iter().zip(&z).map(|(a, b)| a - b).collect();
        let r_dual: Vec<f64> = (0..n).map(|i| px[i] + prob.q[i] + cty[i]).collect();
        primal_res = norm_inf(&r_prim);
        dual_res = norm_inf(&r_dual);

        let prim_scale = norm_inf(&cx).max(norm_inf(&z));
        let dual_scale = norm_inf(&px).max(norm_inf(&cty)).max(norm_inf(&prob.q));
        let eps_prim = settings.eps_abs + settings.eps_rel * prim_scale;
        let eps_dual = settings.eps_abs + settings.eps_rel * dual_scale;
        if primal_res <= eps_prim && dual_res <= eps_dual {
            status = QpStatus::Solved;
            break;
        }

        if iteration % INFEAS_WINDOW == 0 {
            history.push((primal_res, norm_inf(&y)));
            if looks_infeasible(&history, eps_prim) {
                status = QpStatus::PrimalInfeasibleGuess;
                break;
            }
        }

        if settings.adaptive_rho && iteration - last_adapt >= ADAPT_EVERY {
            let p_norm = primal_res / prim_scale.max(1e-30);
            let d_norm = dual_res / dual_scale.max(1e-30);
            let new_rho = if p_norm > ADAPT_RATIO * d_norm {
                rho * 2.0
            } else if d_norm > ADAPT_RATIO * p_norm {
                rho / 2.0
            } else {
                rho
            };
            if new_rho != rho && (1e-6..=1e6).contains(&new_rho) {
                rho = new_rho;
                kkt = factor(rho)?;
                last_adapt = iteration;
            }
        }
    }

    let u = y.iter().map(|yi| yi / rho).collect();
    Ok(QpSolution {
        x: x.clone(),
        status,
        state: AdmmState {
            x,
            z,
            u,
            rho,
            iteration,
            primal_res,
            dual_res,
        },
    })
}

/// Row-compressed copy of a dense matrix; the subproblem constraint matrices
/// are mostly zeros.
struct SparseRows {
    start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseRows {
    fn from_dense(m: &DenseMatrix) -> Self {
        let mut start = Vec::with_capacity(m.rows() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        start.push(0);
        for i in 0..m.rows() {
            for (j, &v) in m.row(i).iter().enumerate() {
                if v != 0.0 {
                    cols.push(j);
                    vals.push(v);
                }
            }
            start.push(cols.len());
        }
        Self { start, cols, vals }
    }

    fn mul(&self, x: &[f64]) -> Vec<f64> {
        self.start
            .windows(2)
            .map(|w| (w[0]..w[1]).map(|k| self.vals[k] * x[self.cols[k]]).sum())
            .collect()
    }

    fn tr_mul(&self, y: &[f64], n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (i, w) in self.start.windows(2).enumerate() {
            for k in w[0]..w[1] {
                out[self.cols[k]] += self.vals[k] * y[i];
            }
        }
        out
    }
}

/// Divergence heuristic: the primal residual has stalled well above
/// tolerance over two windows while the dual keeps growing at a steady rate.
fn looks_infeasible(history: &[(f64, f64)], eps_prim: f64) -> bool {
    let k = history.len();
    if k < 3 {
        return false;
    }
    let (r2, y2) = history[k - 1];
    let (r1, y1) = history[k - 2];
    let (_, y0) = history[k - 3];
    let stalled = r2 > 100.0 * eps_prim && r2 >= 0.5 * r1;
    let growth_now = y2 - y1;
    let growth_before = y1 - y0;
    stalled && growth_before > 0.0 && growth_now >= 0.9 * growth_before
}
