//! Fixtures shared by the benchmarks.

use nearmetz_core::generate::UnitStream;
use nearmetz_core::{DenseMatrix, QpProblem};

/// The stable 5×5 test matrix at three decimals.
pub fn a1() -> DenseMatrix {
    DenseMatrix::from_rows(&[
        [-1.733, 1.295, -0.497, 0.765, 0.763],
        [0.481, -1.472, -0.945, 1.381, 0.146],
        [0.680, 0.326, -1.392, -0.536, 1.957],
        [-1.442, -1.127, -0.355, -1.079, 1.375],
        [0.566, 0.008, 1.849, 1.607, -6.299],
    ])
    .expect("fixture is rectangular")
}

pub fn random_symmetric(n: usize, seed: u64) -> DenseMatrix {
    let g = UnitStream::new(seed).matrix(n, n, -1.0, 1.0);
    DenseMatrix::from_fn(n, n, |i, j| 0.5 * (g[(i, j)] + g[(j, i)]))
}

/// Strongly convex QP with box constraints on every variable.
pub fn box_qp(n: usize, seed: u64) -> QpProblem {
    let mut st = UnitStream::new(seed);
    let g = st.matrix(n, n, -1.0, 1.0);
    let mut p = g.matmul(&g.transpose()).expect("square");
    p.shift_diag(0.1);
    let q = (0..n).map(|_| st.uniform(-3.0, 3.0)).collect();
    QpProblem::new(p, q, DenseMatrix::identity(n), vec![-0.5; n], vec![0.5; n])
        .expect("valid by construction")
}
