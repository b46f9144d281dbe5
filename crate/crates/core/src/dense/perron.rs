use super::matrix::{dot, norm2, DenseMatrix};
use crate::error::{Error, Result};

/// Tolerances for the Perron power iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerronSettings {
    /// Converged when successive Rayleigh estimates differ by less than this.
    pub tol: f64,
    pub max_iter: usize,
    /// Extra growth-rate iterations used when the power iteration stalls.
    pub fallback_iter: usize,
    /// Off-diagonal entries down to `-metzler_tol` are accepted (and clamped).
    pub metzler_tol: f64,
}

impl Default for PerronSettings {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 10_000,
            fallback_iter: 50,
            metzler_tol: 1e-9,
        }
    }
}

/// Spectral abscissa estimate of a Metzler matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerronEstimate {
    pub value: f64,
    /// `false` when the power iteration hit its cap and the value comes from
    /// the growth-rate fallback.
    pub converged: bool,
    pub iterations: usize,
}

/// `α(X) = λ_max(X + cI) − c` with `c = max(0, −minᵢ Xᵢᵢ) + 1`, using power
/// iteration from the all-ones vector on the nonnegative shift.
pub fn spectral_abscissa_metzler(x: &DenseMatrix) -> Result<PerronEstimate> {
    spectral_abscissa_metzler_with(x, &PerronSettings::default())
}

pub fn spectral_abscissa_metzler_with(
    x: &DenseMatrix,
    settings: &PerronSettings,
) -> Result<PerronEstimate> {
    let n = x.require_square()?;
    for i in 0..n {
        for j in 0..n {
            if i != j && x[(i, j)] < -settings.metzler_tol {
                return Err(Error::Contract(format!(
                    "matrix is not Metzler: entry ({i}, {j}) = {}",
                    x[(i, j)]
                )));
            }
        }
    }
    let min_diag = x.diag().into_iter().fold(f64::INFINITY, f64::min);
    let shift = (-min_diag).max(0.0) + 1.0;
    let m = DenseMatrix::from_fn(n, n, |i, j| {
        if i == j {
            x[(i, i)] + shift
        } else {
            x[(i, j)].max(0.0)
        }
    });

    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut prev = f64::NAN;
    for it in 1..=settings.max_iter {
        let w = m.matvec(&v)?;
        let rayleigh = dot(&v, &w);
        let nw = norm2(&w);
        if nw == 0.0 {
            // nilpotent shifted matrix cannot occur (diagonal ≥ 1); guard anyway
            return Ok(PerronEstimate {
                value: -shift,
                converged: true,
                iterations: it,
            });
        }
        v = w.into_iter().map(|c| c / nw).collect();
        if (rayleigh - prev).abs() < settings.tol {
            return Ok(PerronEstimate {
                value: rayleigh - shift,
                converged: true,
                iterations: it,
            });
        }
        prev = rayleigh;
    }

    // Stalled (typically reducible with a defective Perron root): estimate
    // the growth rate of ‖Mᵏ v‖ over a short window.
    let mut log_growth = 0.0;
    for _ in 0..settings.fallback_iter {
        let w = m.matvec(&v)?;
        let nw = norm2(&w);
        log_growth += nw.ln();
        v = w.into_iter().map(|c| c / nw).collect();
    }
    let growth = (log_growth / settings.fallback_iter.max(1) as f64).exp();
    Ok(PerronEstimate {
        value: growth - shift,
        converged: false,
        iterations: settings.max_iter + settings.fallback_iter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal() {
        let e = spectral_abscissa_metzler(&DenseMatrix::from_diag(&[-1.0, -2.0])).unwrap();
        assert!((e.value + 1.0).abs() < 1e-9);
        assert!(e.converged);
    }

    #[test]
    fn zero_row_sums() {
        let x = DenseMatrix::from_rows(&[[-1.0, 1.0], [1.0, -1.0]]).unwrap();
        let e = spectral_abscissa_metzler(&x).unwrap();
        assert!(e.value.abs() < 1e-9, "{e:?}");
    }

    #[test]
    fn rejects_non_metzler() {
        let x = DenseMatrix::from_rows(&[[-1.0, -1.0], [1.0, -1.0]]).unwrap();
        assert!(matches!(spectral_abscissa_metzler(&x), Err(Error::Contract(_))));
    }

    #[test]
    fn stalled_iteration_is_flagged() {
        let x = DenseMatrix::from_rows(&[[-1.0, 1.0], [0.0, -1.0]]).unwrap();
        let settings = PerronSettings {
            max_iter: 3,
            ..Default::default()
        };
        let e = spectral_abscissa_metzler_with(&x, &settings).unwrap();
        assert!(!e.converged);
        // Jordan block: the growth estimate approaches −1 from above
        assert!(e.value > -1.0 && e.value < 0.0);
    }
}
