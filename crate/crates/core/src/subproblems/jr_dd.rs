use crate::dense::DenseMatrix;
use crate::error::Result;
use crate::qp::{solve_with_psd_blocks, AdmmState, QpProblem, QpSettings, QpStatus};

use super::{check_step_inputs, restore_dd, JrOutcome, JrWarm, SubproblemSettings};

/// Index of the slack `y_ij` (i < j) among the strictly upper pairs.
pub(super) fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

pub(super) fn qp_settings(settings: &SubproblemSettings) -> QpSettings {
    QpSettings {
        rho: settings.rho,
        eps_abs: settings.tol,
        eps_rel: settings.tol,
        max_iter: settings.max_iter.saturating_mul(4),
        ..QpSettings::default()
    }
}

/// `(J, R)` step with `R` restricted to diagonally dominant matrices.
///
/// Decision vector: the `n²` entries of `W` followed by slacks `y_ij`
/// (i < j). Constraints, with `R = −sym(W)`:
///
/// * `W_ij ≥ 0` for `i ≠ j`
/// * `R_ii − Σ_{j≠i} y_ij ≥ δ`
/// * `−y_ij ≤ R_ij ≤ y_ij`
///
/// Solved with the QP engine and then made exactly feasible by
/// [`restore_dd`].
pub fn jr_step_dd(
    a: &DenseMatrix,
    q: &[f64],
    w_init: &DenseMatrix,
    settings: &SubproblemSettings,
    warm: Option<&JrWarm>,
) -> Result<JrOutcome> {
    settings.validate()?;
    let n = check_step_inputs(a, q, w_init)?;
    let npairs = n * (n - 1) / 2;
    let nx = n * n + npairs;
    let widx = |i: usize, j: usize| i * n + j;
    let yidx = |i: usize, j: usize| n * n + pair_index(n, i.min(j), i.max(j));

    let mut p = DenseMatrix::zeros(nx, nx);
    let mut lin = vec![0.0; nx];
    for i in 0..n {
        for j in 0..n {
            p[(widx(i, j), widx(i, j))] = 2.0 * q[j] * q[j];
            lin[widx(i, j)] = -2.0 * q[j] * a[(i, j)];
        }
    }

    let m = n * (n - 1) + n + 2 * npairs;
    let mut c = DenseMatrix::zeros(m, nx);
    let mut lo = vec![0.0; m];
    let hi = vec![f64::INFINITY; m];
    let mut row = 0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                c[(row, widx(i, j))] = 1.0;
                row += 1;
            }
        }
    }
    for i in 0..n {
        // R_ii = −W_ii
        c[(row, widx(i, i))] = -1.0;
        for j in (0..n).filter(|&j| j != i) {
            c[(row, yidx(i, j))] = -1.0;
        }
        lo[row] = settings.delta;
        row += 1;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            // y + R_ij ≥ 0 and y − R_ij ≥ 0, R_ij = −(W_ij + W_ji)/2
            c[(row, yidx(i, j))] = 1.0;
            c[(row, widx(i, j))] = -0.5;
            c[(row, widx(j, i))] = -0.5;
            row += 1;
            c[(row, yidx(i, j))] = 1.0;
            c[(row, widx(i, j))] = 0.5;
            c[(row, widx(j, i))] = 0.5;
            row += 1;
        }
    }
    debug_assert_eq!(row, m);
    let prob = QpProblem::new_unchecked_psd(p, lin, c, lo, hi)?;

    let start = match warm {
        Some(JrWarm::Qp(state)) if state.x.len() == nx && state.z.len() == m => state.clone(),
        _ => {
            let mut x = vec![0.0; nx];
            x[..n * n].copy_from_slice(w_init.as_slice());
            for i in 0..n {
                for j in (i + 1)..n {
                    x[yidx(i, j)] = (0.5 * (w_init[(i, j)] + w_init[(j, i)])).abs();
                }
            }
            let mut z = prob.c.matvec(&x)?;
            for (zk, (l, u)) in z.iter_mut().zip(prob.l.iter().zip(&prob.u)) {
                *zk = zk.clamp(*l, *u);
            }
            AdmmState {
                x,
                z,
                u: vec![0.0; m],
                rho: settings.rho,
                iteration: 0,
                primal_res: f64::INFINITY,
                dual_res: f64::INFINITY,
            }
        }
    };

    let sol = solve_with_psd_blocks(&prob, &[], &qp_settings(settings), Some(&start))?;
    let w_raw = DenseMatrix::new(n, n, sol.x[..n * n].to_vec())?;
    let w = restore_dd(&w_raw, settings.delta)?;
    Ok(JrOutcome {
        w,
        certificate: None,
        iterations: sol.state.iteration,
        converged: sol.status == QpStatus::Solved,
        primal_res: sol.state.primal_res,
        dual_res: sol.state.dual_res,
        warm: JrWarm::Qp(sol.state),
    })
}
