use std::f64::consts::SQRT_2;

use crate::cones::SddBlock;
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::qp::{solve_with_psd_blocks, AdmmState, QpProblem, QpStatus};

use super::jr_dd::{pair_index, qp_settings};
use super::{check_step_inputs, make_feasible, restore_sdd, JrOutcome, JrWarm, SubproblemSettings};

/// `(J, R)` step with `R − δI` restricted to scaled diagonally dominant
/// matrices.
///
/// `W` is parametrized as `K − δI − Σ_{i<j} M^{ij}` with `K` skew (one free
/// entry per pair) and each `M^{ij}` a 2×2 block on rows/columns `(i, j)`.
/// The objective is quadratic in these variables; the constraints are
/// `offdiag(W) ≥ 0` and `M^{ij} ⪰ 0`, the latter enforced in the ADMM
/// projection step with the closed-form 2×2 PSD projection. Returns `W`
/// together with the block certificate of `−sym(W)`.
pub fn jr_step_sdd(
    a: &DenseMatrix,
    q: &[f64],
    w_init: &DenseMatrix,
    settings: &SubproblemSettings,
    warm: Option<&JrWarm>,
) -> Result<JrOutcome> {
    settings.validate()?;
    let n = check_step_inputs(a, q, w_init)?;
    if n < 2 {
        return Err(Error::Contract("SDD mode needs n ≥ 2".into()));
    }
    let npairs = n * (n - 1) / 2;
    let nx = 4 * npairs;
    let kidx = |i: usize, j: usize| pair_index(n, i, j);
    let bidx = |i: usize, j: usize| npairs + 3 * pair_index(n, i, j);

    // W (row-major) = L·x + w0
    let mut l = DenseMatrix::zeros(n * n, nx);
    let mut w0 = vec![0.0; n * n];
    for i in 0..n {
        w0[i * n + i] = -settings.delta;
        for j in (i + 1)..n {
            let b = bidx(i, j);
            l[(i * n + j, kidx(i, j))] = 1.0;
            l[(j * n + i, kidx(i, j))] = -1.0;
            l[(i * n + j, b + 1)] = -1.0;
            l[(j * n + i, b + 1)] = -1.0;
            l[(i * n + i, b)] = -1.0;
            l[(j * n + j, b + 2)] = -1.0;
        }
    }

    // ‖A − W·diag(q)‖² = Σₑ dₑ Wₑ² − 2 cₑ Wₑ + const, dₑ = q_j², cₑ = q_j A_ij
    let d: Vec<f64> = (0..n * n).map(|e| q[e % n] * q[e % n]).collect();
    let cvec: Vec<f64> = (0..n * n).map(|e| q[e % n] * a.as_slice()[e]).collect();
    let mut p = DenseMatrix::zeros(nx, nx);
    let mut lin = vec![0.0; nx];
    for e in 0..n * n {
        let row = l.row(e);
        let nz: Vec<(usize, f64)> = row
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(k, v)| (k, *v))
            .collect();
        for &(k1, v1) in &nz {
            lin[k1] += 2.0 * v1 * (d[e] * w0[e] - cvec[e]);
            for &(k2, v2) in &nz {
                p[(k1, k2)] += 2.0 * d[e] * v1 * v2;
            }
        }
    }

    let m_off = n * (n - 1);
    let m = m_off + 3 * npairs;
    let mut c = DenseMatrix::zeros(m, nx);
    let mut lo = vec![f64::NEG_INFINITY; m];
    let hi = vec![f64::INFINITY; m];
    let mut row = 0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let e = i * n + j;
                for k in 0..nx {
                    c[(row, k)] = l[(e, k)];
                }
                lo[row] = -w0[e];
                row += 1;
            }
        }
    }
    let mut psd_rows = Vec::with_capacity(npairs);
    for i in 0..n {
        for j in (i + 1)..n {
            let b = bidx(i, j);
            c[(row, b)] = 1.0;
            c[(row + 1, b + 1)] = SQRT_2;
            c[(row + 2, b + 2)] = 1.0;
            psd_rows.push([row, row + 1, row + 2]);
            row += 3;
        }
    }
    debug_assert_eq!(row, m);
    let prob = QpProblem::new_unchecked_psd(p, lin, c, lo, hi)?;

    let start = match warm {
        Some(JrWarm::Qp(state)) if state.x.len() == nx && state.z.len() == m => state.clone(),
        _ => {
            let (wf, cert) = make_feasible(w_init, crate::cones::ConeMode::Sdd, settings.delta)?;
            let cert = cert.expect("sdd mode yields a certificate");
            let lift = settings.delta / (n - 1) as f64;
            let mut x = vec![0.0; nx];
            for blk in &cert.blocks {
                let (i, j) = (blk.i, blk.j);
                x[kidx(i, j)] = 0.5 * (wf[(i, j)] - wf[(j, i)]);
                let b = bidx(i, j);
                x[b] = blk.mii - lift;
                x[b + 1] = blk.mij;
                x[b + 2] = blk.mjj - lift;
            }
            let z = prob.c.matvec(&x)?;
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

    let sol = solve_with_psd_blocks(&prob, &psd_rows, &qp_settings(settings), Some(&start))?;

    // skew part from x, blocks from the projected copy z (exactly PSD)
    let mut blocks = Vec::with_capacity(npairs);
    let mut x_proj = sol.x.clone();
    for (idx, rows) in psd_rows.iter().enumerate() {
        let b = npairs + 3 * idx;
        x_proj[b] = sol.state.z[rows[0]];
        x_proj[b + 1] = sol.state.z[rows[1]] / SQRT_2;
        x_proj[b + 2] = sol.state.z[rows[2]];
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let b = bidx(i, j);
            blocks.push(SddBlock {
                i,
                j,
                mii: x_proj[b],
                mij: x_proj[b + 1],
                mjj: x_proj[b + 2],
            });
        }
    }
    let mut w_raw = l.matvec(&x_proj)?;
    for (wv, base) in w_raw.iter_mut().zip(&w0) {
        *wv += base;
    }
    let w_raw = DenseMatrix::new(n, n, w_raw)?;
    let (w, cert) = restore_sdd(&w_raw, &blocks, settings.delta)?;
    Ok(JrOutcome {
        w,
        certificate: Some(cert),
        iterations: sol.state.iteration,
        converged: sol.status == QpStatus::Solved,
        primal_res: sol.state.primal_res,
        dual_res: sol.state.dual_res,
        warm: JrWarm::Qp(sol.state),
    })
}
