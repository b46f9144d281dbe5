use super::eig::check_symmetric;
use super::lu::Lu;
use super::matrix::DenseMatrix;
use crate::error::{Error, Result};

/// Solves `XP + PXᵀ = −C` through the `n² × n²` Kronecker system
/// `(I ⊗ X + X ⊗ I) vec(P) = −vec(C)`.
///
/// The vectorized system costs O(n⁶); it is meant for initialization at
/// small n. The returned `P` is symmetrized.
pub fn lyapunov_solve(x: &DenseMatrix, c: &DenseMatrix) -> Result<DenseMatrix> {
    let n = x.require_square()?;
    x.check_same_shape(c)?;
    check_symmetric(c)?;
    let nn = n * n;
    let mut k = DenseMatrix::zeros(nn, nn);
    for i in 0..n {
        for j in 0..n {
            let row = i * n + j;
            // (XP)ᵢⱼ = Σₖ Xᵢₖ Pₖⱼ
            for m in 0..n {
                k[(row, m * n + j)] += x[(i, m)];
            }
            // (PXᵀ)ᵢⱼ = Σₖ Pᵢₖ Xⱼₖ
            for m in 0..n {
                k[(row, i * n + m)] += x[(j, m)];
            }
        }
    }
    let rhs: Vec<f64> = c.as_slice().iter().map(|v| -v).collect();
    let lu = Lu::factor(&k).map_err(|e| match e {
        Error::Singular { .. } => Error::NoLyapunovSolution,
        other => other,
    })?;
    let p = lu.solve(&rhs)?;
    let p = DenseMatrix::new(n, n, p).map_err(|_| Error::NoLyapunovSolution)?;
    Ok(DenseMatrix::from_fn(n, n, |i, j| 0.5 * (p[(i, j)] + p[(j, i)])))
}

/// `XP + PXᵀ`.
pub fn lyapunov_operator(x: &DenseMatrix, p: &DenseMatrix) -> Result<DenseMatrix> {
    let xp = x.matmul(p)?;
    let pxt = p.matmul(&x.transpose())?;
    xp.add(&pxt)
}
