use super::matrix::DenseMatrix;
use crate::error::{Error, Result};

/// Symmetry tolerance (relative to `1 + max|Sᵢⱼ|`) accepted by [`sym_eig`].
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Dimension above which the cyclic Jacobi method gets slow. Not enforced.
pub const SOFT_DIM_CAP: usize = 200;

const MAX_SWEEPS: usize = 100;

/// Eigendecomposition `S = U·diag(λ)·Uᵀ` of a symmetric matrix.
///
/// Eigenvalues are sorted ascending; column `k` of `basis` is the unit
/// eigenvector for `eigenvalues[k]`.
#[derive(Clone, Debug)]
pub struct SymEig {
    pub eigenvalues: Vec<f64>,
    pub basis: DenseMatrix,
}

impl SymEig {
    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    /// `U·diag(f(λ))·Uᵀ`, symmetrized.
    pub fn recompose_with(&self, f: impl Fn(f64) -> f64) -> DenseMatrix {
        let n = self.eigenvalues.len();
        let d: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let u = &self.basis;
        let mut out = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut s = 0.0;
                for k in 0..n {
                    if d[k] != 0.0 {
                        s += u[(i, k)] * d[k] * u[(j, k)];
                    }
                }
                out[(i, j)] = s;
                out[(j, i)] = s;
            }
        }
        out
    }

    pub fn recompose(&self) -> DenseMatrix {
        self.recompose_with(|l| l)
    }
}

pub(crate) fn check_symmetric(s: &DenseMatrix) -> Result<usize> {
    let n = s.require_square()?;
    let defect = s.asymmetry();
    if defect > SYMMETRY_TOL * (1.0 + s.max_abs()) {
        return Err(Error::Contract(format!(
            "matrix is not symmetric (defect {defect:e})"
        )));
    }
    Ok(n)
}

/// Symmetric eigendecomposition by cyclic Jacobi sweeps in fixed `(p, q)`
/// row order, so results are reproducible for identical input.
pub fn sym_eig(s: &DenseMatrix) -> Result<SymEig> {
    let n = check_symmetric(s)?;
    // work on the exactly symmetrized input
    let mut a = DenseMatrix::from_fn(n, n, |i, j| 0.5 * (s[(i, j)] + s[(j, i)]));
    let mut v = DenseMatrix::identity(n);
    let total = a.fro_norm();

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off.sqrt() <= 1e-15 * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.is_infinite() {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                // theta == 0 gives signum 1: a 45 degree rotation
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - sn * akq;
                    a[(k, q)] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - sn * aqk;
                    a[(q, k)] = sn * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]).then(i.cmp(&j)));
    let eigenvalues = order.iter().map(|&k| a[(k, k)]).collect();
    let basis = DenseMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(SymEig { eigenvalues, basis })
}
