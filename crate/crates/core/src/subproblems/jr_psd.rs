use crate::cones::{project_nsd_sym_keep_skew, project_offdiag_nonneg};
use crate::dense::DenseMatrix;
use crate::error::Result;

use super::{check_step_inputs, restore_psd, JrOutcome, JrWarm, SubproblemSettings};

const ADAPT_EVERY: usize = 50;
const ADAPT_RATIO: f64 = 10.0;
const RELAX: f64 = 1.6;

/// `(J, R)` step with the exact semidefinite constraint.
///
/// Minimizes `‖A − W·diag(q)‖²_F` over `{W : sym(W) ⪯ −δI, offdiag(W) ≥ 0}`
/// by consensus ADMM with one copy per set. The W-update is a per-column
/// scalar solve:
///
/// ```text
/// wⱼ = (2qⱼ Aⱼ + ρ(z₁ − u₁ + z₂ − u₂)ⱼ) / (2qⱼ² + 2ρ)
/// ```
///
/// The consensus average is made exactly feasible by [`restore_psd`] before
/// it is returned.
pub fn jr_step_psd(
    a: &DenseMatrix,
    q: &[f64],
    w_init: &DenseMatrix,
    settings: &SubproblemSettings,
    warm: Option<&JrWarm>,
) -> Result<JrOutcome> {
    settings.validate()?;
    let n = check_step_inputs(a, q, w_init)?;
    let ceil = -settings.delta;
    let proj1 = |m: &DenseMatrix| project_nsd_sym_keep_skew(m, ceil);
    let proj2 = |m: &DenseMatrix| Ok::<_, crate::error::Error>(project_offdiag_nonneg(m));

    let (mut z1, mut u1, mut z2, mut u2, mut rho) = match warm {
        Some(JrWarm::Consensus { z1, u1, z2, u2, rho }) if z1.rows() == n => {
            (z1.clone(), u1.clone(), z2.clone(), u2.clone(), *rho)
        }
        _ => (
            proj1(w_init)?,
            DenseMatrix::zeros(n, n),
            proj2(w_init)?,
            DenseMatrix::zeros(n, n),
            settings.rho,
        ),
    };

    let mut w = w_init.clone();
    let mut iterations = 0;
    let mut converged = false;
    let mut primal_res = f64::INFINITY;
    let mut dual_res = f64::INFINITY;
    let mut last_adapt = 0;
    while iterations < settings.max_iter {
        iterations += 1;
        for j in 0..n {
            let denom = 2.0 * q[j] * q[j] + 2.0 * rho;
            for i in 0..n {
                let pull = z1[(i, j)] - u1[(i, j)] + z2[(i, j)] - u2[(i, j)];
                w[(i, j)] = (2.0 * q[j] * a[(i, j)] + rho * pull) / denom;
            }
        }
        // over-relaxed consensus targets
        let h1 = w.zip_with(&z1, |wv, zv| RELAX * wv + (1.0 - RELAX) * zv)?;
        let h2 = w.zip_with(&z2, |wv, zv| RELAX * wv + (1.0 - RELAX) * zv)?;
        let z1_new = proj1(&h1.add(&u1)?)?;
        let z2_new = proj2(&h2.add(&u2)?)?;
        u1 = u1.add(&h1.sub(&z1_new)?)?;
        u2 = u2.add(&h2.sub(&z2_new)?)?;
        let r1 = w.sub(&z1_new)?;
        let r2 = w.sub(&z2_new)?;
        primal_res = r1.fro_norm().max(r2.fro_norm());
        dual_res = rho
            * z1_new
                .sub(&z1)?
                .fro_norm()
                .max(z2_new.sub(&z2)?.fro_norm());
        z1 = z1_new;
        z2 = z2_new;

        let eps = settings.tol * (1.0 + w.fro_norm());
        if primal_res <= eps && dual_res <= eps {
            converged = true;
            break;
        }
        if iterations - last_adapt >= ADAPT_EVERY {
            let scale = if primal_res > ADAPT_RATIO * dual_res {
                2.0
            } else if dual_res > ADAPT_RATIO * primal_res {
                0.5
            } else {
                1.0
            };
            let next = rho * scale;
            if scale != 1.0 && (1e-4..=1e4).contains(&next) {
                // scaled duals carry a factor 1/ρ
                u1 = u1.scale(1.0 / scale);
                u2 = u2.scale(1.0 / scale);
                rho = next;
                last_adapt = iterations;
            }
        }
    }

    let avg = z1.add(&z2)?.scale(0.5);
    let w = restore_psd(&avg, settings.delta)?;
    Ok(JrOutcome {
        w,
        certificate: None,
        iterations,
        converged,
        primal_res,
        dual_res,
        warm: JrWarm::Consensus { z1, u1, z2, u2, rho },
    })
}
