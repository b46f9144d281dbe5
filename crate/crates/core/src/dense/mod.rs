//! Dense real linear algebra: the matrix carrier, symmetric
//! eigendecomposition, LU solves, the Lyapunov operator and the Perron-based
//! spectral abscissa of Metzler matrices.

mod eig;
mod lu;
mod lyapunov;
mod matrix;
mod perron;

pub use eig::{sym_eig, SymEig, SOFT_DIM_CAP, SYMMETRY_TOL};
pub use lu::{residual_inf, solve_linear, Lu, PIVOT_TOL};
pub use lyapunov::{lyapunov_operator, lyapunov_solve};
pub use matrix::{dot, frobenius_dist_sq, norm2, norm_inf, skew_part, sym_part, DenseMatrix};
pub use perron::{
    spectral_abscissa_metzler, spectral_abscissa_metzler_with, PerronEstimate, PerronSettings,
};
