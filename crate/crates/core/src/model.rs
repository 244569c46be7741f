//! Renewal-equation models: linear kernels, the quadratic nonlinear model
//! and its linearization along a reference solution.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Linear integration kernel `C(t, theta)` of `x(t) = ∫_{-tau}^0 C(t, θ) x(t + θ) dθ`.
///
/// `eval` writes the `d x d` matrix in row-major order into `out` and must
/// write zeros for `theta` outside [`Kernel::support`].
pub trait Kernel {
    fn dim(&self) -> usize;
    fn tau(&self) -> f64;
    /// Closed interval `[lo, hi] ⊆ [-tau, 0]` outside which the kernel vanishes.
    fn support(&self) -> (f64, f64);
    fn eval(&self, t: f64, theta: f64, out: &mut [f64]) -> Result<()>;
}

fn check_support(tau: f64, (lo, hi): (f64, f64)) -> Result<()> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::invalid("tau must be positive"));
    }
    if !(lo <= hi && lo >= -tau && hi <= 0.0) {
        return Err(Error::invalid(alloc::format!("support [{lo}, {hi}] not inside [-{tau}, 0]")));
    }
    Ok(())
}

#[inline]
fn in_support(theta: f64, (lo, hi): (f64, f64)) -> bool {
    theta >= lo && theta <= hi
}

/// Time-independent kernel, constant on its support.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantKernel {
    dim: usize,
    tau: f64,
    support: (f64, f64),
    coeff: Vec<f64>,
}

impl ConstantKernel {
    pub fn new(tau: f64, support: (f64, f64), coeff: Vec<f64>) -> Result<Self> {
        check_support(tau, support)?;
        let dim = libm::sqrt(coeff.len() as f64) as usize;
        if dim == 0 || dim * dim != coeff.len() {
            return Err(Error::invalid("coefficient must be a non-empty square matrix"));
        }
        Ok(Self { dim, tau, support, coeff })
    }

    /// Scalar kernel `c` on `support`.
    pub fn scalar(tau: f64, support: (f64, f64), c: f64) -> Result<Self> {
        Self::new(tau, support, vec![c])
    }
}

impl Kernel for ConstantKernel {
    fn dim(&self) -> usize {
        self.dim
    }
    fn tau(&self) -> f64 {
        self.tau
    }
    fn support(&self) -> (f64, f64) {
        self.support
    }
    fn eval(&self, _t: f64, theta: f64, out: &mut [f64]) -> Result<()> {
        if in_support(theta, self.support) {
            out.copy_from_slice(&self.coeff);
        } else {
            out.iter_mut().for_each(|v| *v = 0.0);
        }
        Ok(())
    }
}

/// Nonlinear renewal equation `x(t) = ∫_{lo}^{hi} F(t, θ, x(t + θ)) dθ`.
pub trait NonlinearRe {
    fn dim(&self) -> usize;
    fn tau(&self) -> f64;
    fn lag_support(&self) -> (f64, f64);
    /// `F(t, θ, x)`, a `d`-vector.
    fn integrand(&self, t: f64, theta: f64, x: &[f64], out: &mut [f64]);
    /// `∂F/∂x (t, θ, x)`, a row-major `d x d` matrix.
    fn jacobian_integrand(&self, t: f64, theta: f64, x: &[f64], out: &mut [f64]);
}

/// `x(t) = (γ/2) ∫_{-3}^{-1} x(t+θ)(1 - x(t+θ)) dθ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticRe {
    pub gamma: f64,
}

pub const QUADRATIC_TAU: f64 = 3.0;
pub const QUADRATIC_SUPPORT: (f64, f64) = (-3.0, -1.0);

pub fn quad_re(gamma: f64) -> Result<QuadraticRe> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::invalid(alloc::format!("gamma must be positive, got {gamma}")));
    }
    Ok(QuadraticRe { gamma })
}

impl NonlinearRe for QuadraticRe {
    fn dim(&self) -> usize {
        1
    }
    fn tau(&self) -> f64 {
        QUADRATIC_TAU
    }
    fn lag_support(&self) -> (f64, f64) {
        QUADRATIC_SUPPORT
    }
    fn integrand(&self, _t: f64, theta: f64, x: &[f64], out: &mut [f64]) {
        out[0] = if in_support(theta, QUADRATIC_SUPPORT) { 0.5 * self.gamma * x[0] * (1.0 - x[0]) } else { 0.0 };
    }
    fn jacobian_integrand(&self, _t: f64, theta: f64, x: &[f64], out: &mut [f64]) {
        out[0] = if in_support(theta, QUADRATIC_SUPPORT) { 0.5 * self.gamma * (1.0 - 2.0 * x[0]) } else { 0.0 };
    }
}

/// Constant solutions of the quadratic model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibria {
    pub trivial: f64,
    pub nontrivial: f64,
}

/// `x = γ x (1 - x)` has the roots `0` and `1 - 1/γ`.
pub fn equilibria(gamma: f64) -> Equilibria {
    Equilibria { trivial: 0.0, nontrivial: 1.0 - 1.0 / gamma }
}

/// A reference solution that can be sampled at arbitrary times.
pub trait Orbit {
    fn dim(&self) -> usize;
    fn state_at(&self, t: f64, out: &mut [f64]) -> Result<()>;
}

/// A constant solution (equilibrium).
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantOrbit(pub Vec<f64>);

impl Orbit for ConstantOrbit {
    fn dim(&self) -> usize {
        self.0.len()
    }
    fn state_at(&self, _t: f64, out: &mut [f64]) -> Result<()> {
        out.copy_from_slice(&self.0);
        Ok(())
    }
}

/// Formal linearization of a nonlinear model along an orbit:
/// `C(t, θ) = ∂F/∂x (t, θ, x̄(t + θ))` on the lag support.
#[derive(Debug, Clone, Copy)]
pub struct LinearizedKernel<'a, R, O> {
    model: &'a R,
    orbit: &'a O,
}

pub fn linearize<'a, R: NonlinearRe, O: Orbit>(model: &'a R, orbit: &'a O) -> Result<LinearizedKernel<'a, R, O>> {
    if model.dim() != orbit.dim() {
        return Err(Error::invalid("model and orbit dimensions differ"));
    }
    check_support(model.tau(), model.lag_support())?;
    Ok(LinearizedKernel { model, orbit })
}

impl<R: NonlinearRe, O: Orbit> Kernel for LinearizedKernel<'_, R, O> {
    fn dim(&self) -> usize {
        self.model.dim()
    }
    fn tau(&self) -> f64 {
        self.model.tau()
    }
    fn support(&self) -> (f64, f64) {
        self.model.lag_support()
    }
    fn eval(&self, t: f64, theta: f64, out: &mut [f64]) -> Result<()> {
        if !in_support(theta, self.support()) {
            out.iter_mut().for_each(|v| *v = 0.0);
            return Ok(());
        }
        let d = self.dim();
        // d is tiny in practice; a stack buffer would need a const bound
        let mut x = vec![0.0; d];
        self.orbit.state_at(t + theta, &mut x)?;
        self.model.jacobian_integrand(t, theta, &x, out);
        Ok(())
    }
}
