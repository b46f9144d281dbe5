use crate::dense::{norm_inf, DenseMatrix};
use crate::error::{Error, Result};
use crate::qp::{AdmmState, QpStatus};

use super::SubproblemSettings;

fn column_products(a: &DenseMatrix, b: &DenseMatrix) -> Result<(Vec<f64>, Vec<f64>)> {
    a.require_square()?;
    a.check_same_shape(b)?;
    let n = a.cols();
    let mut bb = vec![0.0; n];
    let mut ab = vec![0.0; n];
    for i in 0..a.rows() {
        for j in 0..n {
            bb[j] += b[(i, j)] * b[(i, j)];
            ab[j] += a[(i, j)] * b[(i, j)];
        }
    }
    Ok((ab, bb))
}

/// Exact minimizer of `‖A − B·diag(q)‖²_F` over `q ≥ eps_q`.
///
/// The objective separates by column, so
/// `qⱼ = max(eps_q, ⟨Aⱼ, Bⱼ⟩ / ‖Bⱼ‖²)`, and `qⱼ = eps_q` for a zero column.
pub fn q_step_closed_form(a: &DenseMatrix, b: &DenseMatrix, eps_q: f64) -> Result<Vec<f64>> {
    let (ab, bb) = column_products(a, b)?;
    Ok(ab
        .iter()
        .zip(&bb)
        .map(|(&num, &den)| if den > 0.0 { (num / den).max(eps_q) } else { eps_q })
        .collect())
}

#[derive(Clone, Debug)]
pub struct QStepOutcome {
    pub q: Vec<f64>,
    pub status: QpStatus,
    pub state: AdmmState,
}

/// Scaled ADMM for the `q` step.
///
/// Minimizes `½xᵀP̂x + q̂ᵀx` with `P̂ⱼⱼ = 2‖Bⱼ‖²`, `q̂ⱼ = −2⟨Aⱼ, Bⱼ⟩` (which is
/// `‖A − B·diag(x)‖²_F` up to a constant) subject to `x = z`, `z ≥ eps_q`.
/// `P̂ + ρI` is diagonal, so the x-update is `n` divisions. Coordinate `j`
/// uses the penalty `ρ·max(1, P̂ⱼⱼ)`; the stored dual is rescaled to the base
/// `ρ`. Returns the feasible copy `z`.
pub fn q_step_admm(
    a: &DenseMatrix,
    b: &DenseMatrix,
    settings: &SubproblemSettings,
    warm: Option<&AdmmState>,
) -> Result<QStepOutcome> {
    settings.validate()?;
    let (ab, bb) = column_products(a, b)?;
    let n = ab.len();
    let p_hat: Vec<f64> = bb.iter().map(|v| 2.0 * v).collect();
    let q_hat: Vec<f64> = ab.iter().map(|v| -2.0 * v).collect();
    let eps_q = settings.eps_q;
    let rho = settings.rho;

    let warm = warm.filter(|w| w.x.len() == n && w.z.len() == n && w.u.len() == n);
    let rho_j: Vec<f64> = p_hat.iter().map(|p| rho * p.max(1.0)).collect();
    let (mut x, mut z, mut u) = match warm {
        Some(w) => {
            // rescale the dual if the previous run used another penalty
            let s = if w.rho > 0.0 { w.rho } else { rho };
            let z: Vec<f64> = w.z.iter().map(|v| v.max(eps_q)).collect();
            let u = w.u.iter().zip(&rho_j).map(|(v, r)| v * s / r).collect::<Vec<_>>();
            (w.x.clone(), z, u)
        }
        None => (vec![eps_q; n], vec![eps_q; n], vec![0.0; n]),
    };
    // zero columns: objective is constant in that coordinate; pin it
    let dead: Vec<bool> = bb.iter().map(|&v| v == 0.0).collect();
    for j in (0..n).filter(|&j| dead[j]) {
        x[j] = eps_q;
        z[j] = eps_q;
        u[j] = 0.0;
    }
    let inv: Vec<f64> = p_hat.iter().zip(&rho_j).map(|(p, r)| 1.0 / (p + r)).collect();

    let mut status = QpStatus::MaxIter;
    let mut primal_res = f64::INFINITY;
    let mut dual_res = f64::INFINITY;
    let mut iteration = 0;
    let mut r = vec![0.0; n];
    let mut dz = vec![0.0; n];
    while iteration < settings.max_iter {
        iteration += 1;
        for j in 0..n {
            if dead[j] {
                r[j] = 0.0;
                dz[j] = 0.0;
                continue;
            }
            x[j] = inv[j] * (rho_j[j] * (z[j] - u[j]) - q_hat[j]);
            let z_new = (x[j] + u[j]).max(eps_q);
            u[j] += x[j] - z_new;
            r[j] = x[j] - z_new;
            dz[j] = rho_j[j] * (z_new - z[j]);
            z[j] = z_new;
        }
        primal_res = norm_inf(&r);
        dual_res = norm_inf(&dz);
        if primal_res <= settings.tol && dual_res <= settings.tol {
            status = QpStatus::Solved;
            break;
        }
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::Contract("q step diverged".into()));
    }
    let u = u.iter().zip(&rho_j).map(|(v, r)| v * r / rho).collect();
    Ok(QStepOutcome {
        q: z.clone(),
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
