//! Nearest asymptotically stable Metzler matrix.
//!
//! Given a real square `A`, [`solve_nearest_metzler`] searches for
//! `X = (J − R)·diag(q)` with `J` skew-symmetric, `R ≻ 0` (or a diagonally
//! dominant / scaled diagonally dominant inner approximation), `q ≥ 0` and
//! `J − R` nonnegative off the diagonal. Every such `X` is Metzler, and it is
//! Hurwitz whenever `q > 0`. The search alternates a convex `(J, R)` step and
//! a convex `q` step, each solved with ADMM.
//!
//! ```
//! use nearmetz_core::{solve_nearest_metzler, DenseMatrix, SolverOptions};
//!
//! let a = DenseMatrix::from_rows(&[[-1.0, -0.5], [0.3, -2.0]]).unwrap();
//! let res = solve_nearest_metzler(&a, &SolverOptions::default()).unwrap();
//! assert!(res.certified);
//! assert!(res.lower_bound <= res.dist_sq);
//! ```

pub mod bcd;
pub mod certify;
pub mod cones;
pub mod dense;
pub mod error;
pub mod generate;
pub mod io;
pub mod qp;
pub mod subproblems;

pub use bcd::{
    init_dh, lyapunov_dh_factors, solve_nearest_metzler, InitStrategy, IterationRecord,
    IterationTrace, SolveResult, SolveStatus, SolverOptions,
};
pub use certify::{
    check_diagonal_lyapunov, dh_validate, hurwitz_certificate_metzler, is_metzler,
    lower_bound_metzler_cone, CertBundle, DhReport,
};
pub use cones::{ConeMode, SddBlock, SddCertificate};
pub use dense::{frobenius_dist_sq, DenseMatrix};
pub use error::{Error, Result};
pub use generate::{generate, InstanceKind};
pub use qp::{qp_solve, AdmmState, QpProblem, QpSettings, QpStatus};
pub use subproblems::{DhTriple, SubproblemSettings};
