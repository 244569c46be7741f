//! Reference values independent of the QR iteration: the dominant real
//! characteristic root of an autonomous scalar kernel, and the spectrum of
//! an assembled evolution matrix.

use alloc::vec::Vec;

use nalgebra::{Complex, DMatrix, Schur};

use crate::model::QUADRATIC_SUPPORT;
use crate::{Error, Result};

/// `1 = c ∫_{lo}^{hi} e^{λθ} dθ`, the characteristic equation of a scalar
/// kernel that is constant (`c`) on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicProblem {
    pub c: f64,
    pub support: (f64, f64),
}

impl CharacteristicProblem {
    pub fn new(c: f64, support: (f64, f64)) -> Result<Self> {
        if !(c.is_finite() && support.0 < support.1) {
            return Err(Error::invalid("characteristic problem needs finite c and lo < hi"));
        }
        Ok(Self { c, support })
    }

    /// Kernel `c` on `[-3, -1]`, as obtained by linearizing the quadratic
    /// model at an equilibrium.
    pub fn quadratic(c: f64) -> Self {
        Self { c, support: QUADRATIC_SUPPORT }
    }

    /// `c ∫ e^{λθ} dθ`, continuous at `λ = 0` where it equals `c (hi - lo)`.
    pub fn value(&self, lambda: f64) -> f64 {
        let (lo, hi) = self.support;
        let len = hi - lo;
        if lambda == 0.0 {
            return self.c * len;
        }
        // e^{λ hi} (1 - e^{-λ len}) / λ without cancellation near 0
        self.c * libm::exp(lambda * hi) * (-libm::expm1(-lambda * len)) / lambda
    }
}

/// Bisection for `value(λ) = 1` inside `bracket`.
///
/// Returns `None` when the bracket shows no sign change; for `c > 0` the
/// value is strictly decreasing, so any root found is the unique real one.
pub fn dominant_real_root(problem: &CharacteristicProblem, bracket: (f64, f64), tol: f64) -> Result<Option<f64>> {
    let (mut a, mut b) = bracket;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::invalid("bracket must satisfy lo < hi"));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let g = |l: f64| problem.value(l) - 1.0;
    let (mut ga, gb) = (g(a), g(b));
    if ga == 0.0 {
        return Ok(Some(a));
    }
    if gb == 0.0 {
        return Ok(Some(b));
    }
    if ga.signum() == gb.signum() {
        return Ok(None);
    }
    while b - a > tol {
        let mid = 0.5 * (a + b);
        let gm = g(mid);
        if gm == 0.0 {
            return Ok(Some(mid));
        }
        if gm.signum() == ga.signum() {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
    }
    Ok(Some(0.5 * (a + b)))
}

/// All eigenvalues of a dense real matrix.
pub fn operator_eigs(t: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    if !t.is_square() {
        return Err(Error::invalid("eigenvalues need a square matrix"));
    }
    if t.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let schur = Schur::try_new(t.clone(), f64::EPSILON, 100_000)
        .ok_or_else(|| Error::NumericFailure("Schur iteration did not converge".into()))?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// `|z|` (no_std: the inherent `norm` needs `std`).
pub fn modulus(z: &Complex<f64>) -> f64 {
    libm::hypot(z.re, z.im)
}

/// `log|μ| / h` for each multiplier, sorted in descending order.
pub fn le_from_eigs(eigs: &[Complex<f64>], h: f64) -> Vec<f64> {
    let mut les: Vec<f64> = eigs.iter().map(|z| libm::log(modulus(z)) / h).collect();
    les.sort_by(|a, b| b.total_cmp(a));
    les
}
