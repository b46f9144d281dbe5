use super::matrix::{norm_inf, DenseMatrix};
use crate::error::{Error, Result};

/// Relative pivot threshold below which a matrix is reported singular.
pub const PIVOT_TOL: f64 = 1e-12;

/// LU factorization with partial pivoting, `PM = LU`, stored in place.
#[derive(Clone, Debug)]
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    original: DenseMatrix,
}

impl Lu {
    pub fn factor(m: &DenseMatrix) -> Result<Self> {
        Self::factor_with_tol(m, PIVOT_TOL)
    }

    pub fn factor_with_tol(m: &DenseMatrix, pivot_tol: f64) -> Result<Self> {
        let n = m.require_square()?;
        let scale = m.max_abs();
        let threshold = pivot_tol * scale;
        let mut lu = m.as_slice().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[i * n + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax <= threshold || pmax == 0.0 {
                return Err(Error::Singular {
                    pivot: pmax,
                    threshold,
                });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for i in (k + 1)..n {
                let f = lu[i * n + k] / pivot;
                lu[i * n + k] = f;
                if f == 0.0 {
                    continue;
                }
                for j in (k + 1)..n {
                    lu[i * n + j] -= f * lu[k * n + j];
                }
            }
        }
        Ok(Self {
            n,
            lu,
            perm,
            original: m.clone(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn substitute(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }

    /// Solves `Mx = b` with one step of iterative refinement.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::Dimension(format!(
                "right-hand side of length {} for a {}x{} system",
                b.len(),
                self.n,
                self.n
            )));
        }
        let mut x = self.substitute(b);
        let mx = self.original.matvec(&x)?;
        let r: Vec<f64> = b.iter().zip(&mx).map(|(bi, mi)| bi - mi).collect();
        let dx = self.substitute(&r);
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi += d;
        }
        Ok(x)
    }

    /// Solves without refinement; used in hot loops where the system is
    /// well conditioned.
    pub fn solve_plain(&self, b: &[f64]) -> Vec<f64> {
        debug_assert_eq!(b.len(), self.n);
        self.substitute(b)
    }
}

/// Solves `Mx = b` by LU with partial pivoting.
pub fn solve_linear(m: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = m.require_square()?;
    if b.len() != n {
        return Err(Error::Dimension(format!(
            "right-hand side of length {} for a {n}x{n} system",
            b.len()
        )));
    }
    Lu::factor(m)?.solve(b)
}

/// `‖Mx − b‖∞`.
pub fn residual_inf(m: &DenseMatrix, x: &[f64], b: &[f64]) -> Result<f64> {
    let mx = m.matvec(x)?;
    let r: Vec<f64> = mx.iter().zip(b).map(|(a, c)| a - c).collect();
    Ok(norm_inf(&r))
}
