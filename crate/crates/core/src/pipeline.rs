//! End-to-end computations for the quadratic renewal equation: integrate a
//! reference solution, linearize along it, and run the QR iteration over the
//! per-window evolution matrices.

use alloc::vec;
use alloc::vec::Vec;

use crate::dqr::{dqr_run, LyapunovEstimate};
use crate::evolution::{Discretization, EvolutionMatrix};
use crate::ivp::{solve_re, Trajectory};
use crate::model::{equilibria, linearize, quad_re, ConstantKernel, QUADRATIC_SUPPORT, QUADRATIC_TAU};
use crate::spectral::{le_from_eigs, operator_eigs};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RunParams {
    pub gamma: f64,
    /// State discretization index `M`.
    pub m: usize,
    /// Step discretization index `N`.
    pub n: usize,
    pub t_f: f64,
    /// Trapezoid pieces per unit time for the reference solution.
    pub r: usize,
    /// Constant initial value.
    pub phi0: f64,
    pub seed: u64,
    /// Clenshaw–Curtis order; `None` means `2 max(M, N) + 8`.
    pub quad_order: Option<usize>,
    /// Start time `s` of the QR iteration along the trajectory.
    pub transient_skip: f64,
}

impl Default for RunParams {
    fn default() -> Self {
        Self { gamma: 4.0, m: 16, n: 16, t_f: 1000.0, r: 40, phi0: 0.1, seed: 0, quad_order: None, transient_skip: 0.0 }
    }
}

impl RunParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::invalid("gamma must be positive"));
        }
        if self.m < 1 || self.n < 1 {
            return Err(Error::invalid("M and N must be at least 1"));
        }
        if self.m + 1 < self.n {
            return Err(Error::invalid(alloc::format!("M = {} must be at least N - 1 = {}", self.m, self.n - 1)));
        }
        if !(self.t_f.is_finite() && self.t_f >= QUADRATIC_TAU) {
            return Err(Error::invalid("t_f must be at least tau = 3"));
        }
        if self.r < 1 {
            return Err(Error::invalid("r must be positive"));
        }
        if !self.phi0.is_finite() {
            return Err(Error::invalid("phi0 must be finite"));
        }
        if !(self.transient_skip.is_finite() && self.transient_skip >= 0.0) {
            return Err(Error::invalid("transient_skip must be non-negative"));
        }
        if matches!(self.quad_order, Some(q) if q < 2) {
            return Err(Error::invalid("quad_order must be at least 2"));
        }
        Ok(())
    }

    pub fn discretization(&self) -> Result<Discretization> {
        let mut disc = Discretization::with_default_quadrature(self.m, self.n, QUADRATIC_TAU, 1)?;
        if let Some(q) = self.quad_order {
            disc = Discretization::new(disc.mesh().clone(), 1, q)?;
        }
        Ok(disc)
    }
}

/// Reference solution long enough for every window of the iteration.
pub fn reference_trajectory(p: &RunParams) -> Result<Trajectory> {
    p.validate()?;
    let model = quad_re(p.gamma)?;
    solve_re(&model, &[p.phi0], p.transient_skip + p.t_f, p.r)
}

/// Exponents of the quadratic equation linearized along the solution
/// started from the constant `phi0`.
pub fn lyapunov_exponents(p: &RunParams) -> Result<LyapunovEstimate> {
    let traj = reference_trajectory(p)?;
    lyapunov_along(p, &traj)
}

/// As [`lyapunov_exponents`], reusing an already computed trajectory.
pub fn lyapunov_along(p: &RunParams, traj: &Trajectory) -> Result<LyapunovEstimate> {
    p.validate()?;
    let model = quad_re(p.gamma)?;
    let kernel = linearize(&model, traj)?;
    let disc = p.discretization()?;
    let s0 = p.transient_skip;
    dqr_run(
        |n| disc.assemble(&kernel, s0 + n as f64 * QUADRATIC_TAU).map(|t| t.matrix),
        disc.order(),
        QUADRATIC_TAU,
        p.t_f,
        p.seed,
    )
}

/// Autonomous kernel `c` on `[-3, -1]`.
pub fn constant_kernel(c: f64) -> ConstantKernel {
    ConstantKernel::scalar(QUADRATIC_TAU, QUADRATIC_SUPPORT, c).expect("static support is valid")
}

/// Evolution matrix of the constant kernel `c` with default quadrature.
pub fn autonomous_operator(c: f64, m: usize, n: usize) -> Result<EvolutionMatrix> {
    Discretization::with_default_quadrature(m, n, QUADRATIC_TAU, 1)?.assemble(&constant_kernel(c), 0.0)
}

/// Linearization coefficient `(γ/2)(1 - 2 x̄)` at the nontrivial equilibrium,
/// i.e. `1 - γ/2`.
pub fn nontrivial_coefficient(gamma: f64) -> f64 {
    0.5 * gamma * (1.0 - 2.0 * equilibria(gamma).nontrivial)
}

/// Exponents `log|μ| / tau` (descending) of the operator linearized at the
/// nontrivial equilibrium.
pub fn nontrivial_equilibrium_les(gamma: f64, m: usize, n: usize) -> Result<Vec<f64>> {
    let t = autonomous_operator(nontrivial_coefficient(gamma), m, n)?;
    Ok(le_from_eigs(&operator_eigs(&t.matrix)?, QUADRATIC_TAU))
}

/// `(γ, dominant exponent)` of [`nontrivial_equilibrium_les`] over a grid.
pub fn hopf_scan(gammas: &[f64], m: usize, n: usize) -> Result<Vec<(f64, f64)>> {
    let mut out = vec![];
    for &g in gammas {
        out.push((g, nontrivial_equilibrium_les(g, m, n)?[0]));
    }
    Ok(out)
}
