//! Reproducible random test instances.
//!
//! Entries are drawn from a ChaCha8 stream (`rand_chacha::ChaCha8Rng`,
//! seeded with `SeedableRng::seed_from_u64`) and mapped to `[0, 1)` as
//! `(next_u64 >> 11) · 2⁻⁵³`, so the same `(n, seed, kind)` yields the same
//! matrix on every platform.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::dense::{sym_eig, sym_part, DenseMatrix};
use crate::error::{Error, Result};

/// Margin used by every kind.
pub const GEN_MARGIN: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceKind {
    /// Uniform `[−1, 1)` matrix shifted so `λ_max(sym A) = −0.1`.
    Stable,
    /// Uniform `[−1, 1)` matrix shifted so `tr(A)/n = 0.1`; some eigenvalue
    /// then has real part ≥ 0.1.
    Unstable,
    /// Off-diagonal uniform `[0, 1)`, rows strictly diagonally dominant
    /// with negative diagonal.
    MetzlerStable,
    /// Off-diagonal uniform `[0, 1)`, every row sum ≥ 0.1.
    MetzlerUnstable,
}

impl std::str::FromStr for InstanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stable" => Ok(InstanceKind::Stable),
            "unstable" => Ok(InstanceKind::Unstable),
            "metzler-stable" => Ok(InstanceKind::MetzlerStable),
            "metzler-unstable" => Ok(InstanceKind::MetzlerUnstable),
            other => Err(Error::Contract(format!("unknown instance kind '{other}'"))),
        }
    }
}

/// Uniform `[0, 1)` stream.
pub struct UnitStream(ChaCha8Rng);

impl UnitStream {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn next_unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_unit()
    }

    pub fn matrix(&mut self, rows: usize, cols: usize, lo: f64, hi: f64) -> DenseMatrix {
        DenseMatrix::from_fn(rows, cols, |_, _| self.uniform(lo, hi))
    }
}

pub fn generate(n: usize, seed: u64, kind: InstanceKind) -> Result<DenseMatrix> {
    if n < 1 {
        return Err(Error::Dimension("n must be at least 1".into()));
    }
    let mut rng = UnitStream::new(seed);
    match kind {
        InstanceKind::Stable => {
            let mut a = rng.matrix(n, n, -1.0, 1.0);
            let top = sym_eig(&sym_part(&a)?)?.max();
            a.shift_diag(-(top + GEN_MARGIN));
            Ok(a)
        }
        InstanceKind::Unstable => {
            let mut a = rng.matrix(n, n, -1.0, 1.0);
            let mean = a.trace() / n as f64;
            a.shift_diag(GEN_MARGIN - mean);
            Ok(a)
        }
        InstanceKind::MetzlerStable | InstanceKind::MetzlerUnstable => {
            let mut a = DenseMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        a[(i, j)] = rng.next_unit();
                    }
                }
            }
            for i in 0..n {
                let off: f64 = a.row(i).iter().sum();
                let extra = GEN_MARGIN + rng.next_unit();
                a[(i, i)] = if kind == InstanceKind::MetzlerStable {
                    -off - extra
                } else {
                    -off + extra
                };
            }
            Ok(a)
        }
    }
}
