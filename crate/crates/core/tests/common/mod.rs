#![allow(dead_code)]

use nearmetz_core::generate::UnitStream;
use nearmetz_core::DenseMatrix;

pub fn rand_matrix(n: usize, m: usize, seed: u64) -> DenseMatrix {
    UnitStream::new(seed).matrix(n, m, -1.0, 1.0)
}

pub fn rand_sym(n: usize, seed: u64) -> DenseMatrix {
    let g = rand_matrix(n, n, seed);
    g.add(&g.transpose()).unwrap().scale(0.5)
}

pub fn max_abs_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    a.sub(b).unwrap().max_abs()
}

/// Metzler with spectral abscissa exactly `alpha`: a nonnegative matrix with
/// constant row sums `s` has Perron root `s`, so shifting by `alpha − s`
/// lands on `alpha`.
pub fn metzler_with_abscissa(n: usize, seed: u64, alpha: f64) -> DenseMatrix {
    let mut st = UnitStream::new(seed);
    let mut m = DenseMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { st.next_unit() });
    let sums: Vec<f64> = (0..n).map(|i| m.row(i).iter().sum()).collect();
    let target = sums.iter().cloned().fold(0.0, f64::max);
    let mut d = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            d.as_mut_slice()[i * n + j] = m[(i, j)];
        }
        d.as_mut_slice()[i * n + i] = target - sums[i];
    }
    m = d;
    m.shift_diag(alpha - target);
    m
}
