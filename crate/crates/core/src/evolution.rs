//! Dense matrix realization of one evolution operator `T(s + tau, s)`.
//!
//! With `W` the values of the unknown at the step nodes of `(0, h)` and
//! `Φ` the state at the state nodes of `[-tau, 0]`:
//!
//! ```text
//! (I - U2) W = U1 Φ,      T Φ = T1 Φ + T2 W
//! ```
//!
//! `U1` integrates the kernel against the state interpolant (the part of
//! the integral reaching back before `s`), `U2` against the step
//! interpolant, and `T2` reads the new state off the step polynomial. For
//! `h = tau` the shifted old state only touches `θ = -tau`, which is
//! assigned from the step polynomial at `0`, so `T1 = 0`.

use alloc::vec;

use nalgebra::DMatrix;

use crate::mesh::{lagrange_basis, ClenshawCurtis, CollocationMesh};
use crate::model::Kernel;
use crate::{Error, Result};

/// Smallest reciprocal condition number of `I - U2` accepted for the solve.
pub const MIN_RCOND: f64 = 1e-12;

/// One assembled evolution matrix and the window it covers.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionMatrix {
    pub matrix: DMatrix<f64>,
    pub window: (f64, f64),
}

impl EvolutionMatrix {
    pub fn order(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Kernel-independent pieces of the discretization for a fixed mesh,
/// dimension and quadrature order.
#[derive(Debug, Clone)]
pub struct Discretization {
    mesh: CollocationMesh,
    dim: usize,
    rule: ClenshawCurtis,
    t1: DMatrix<f64>,
    t2: DMatrix<f64>,
}

/// `T1`, the zero matrix of order `d (M + 1)`.
pub fn build_t1(mesh: &CollocationMesh, dim: usize) -> DMatrix<f64> {
    let m = dim * (mesh.m + 1);
    DMatrix::zeros(m, m)
}

/// `T2`: row block `j` evaluates the step polynomial at `h + θ_j`.
pub fn build_t2(mesh: &CollocationMesh, dim: usize) -> DMatrix<f64> {
    let mut t2 = DMatrix::zeros(dim * (mesh.m + 1), dim * mesh.n);
    let mut ell = vec![0.0; mesh.n];
    for (j, &theta) in mesh.state_nodes.iter().enumerate() {
        lagrange_basis(&mesh.step_nodes, &mesh.step_bary_weights, mesh.h + theta, &mut ell);
        for (i, &l) in ell.iter().enumerate() {
            for c in 0..dim {
                t2[(j * dim + c, i * dim + c)] = l;
            }
        }
    }
    t2
}

impl Discretization {
    pub fn new(mesh: CollocationMesh, dim: usize, quad_order: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        let rule = ClenshawCurtis::new(quad_order)?;
        let t1 = build_t1(&mesh, dim);
        let t2 = build_t2(&mesh, dim);
        Ok(Self { mesh, dim, rule, t1, t2 })
    }

    /// Mesh `(M, N, tau)` with the default quadrature order.
    pub fn with_default_quadrature(m: usize, n: usize, tau: f64, dim: usize) -> Result<Self> {
        let mesh = CollocationMesh::new(m, n, tau)?;
        let q = mesh.default_quad_order();
        Self::new(mesh, dim, q)
    }

    pub fn mesh(&self) -> &CollocationMesh {
        &self.mesh
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Matrix order `d (M + 1)`.
    pub fn order(&self) -> usize {
        self.dim * (self.mesh.m + 1)
    }

    pub fn quad_order(&self) -> usize {
        self.rule.order()
    }

    pub fn t1(&self) -> &DMatrix<f64> {
        &self.t1
    }

    pub fn t2(&self) -> &DMatrix<f64> {
        &self.t2
    }

    fn check_kernel<K: Kernel>(&self, kernel: &K) -> Result<()> {
        if kernel.dim() != self.dim {
            return Err(Error::invalid("kernel dimension does not match the discretization"));
        }
        if kernel.tau() != self.mesh.tau {
            return Err(Error::invalid("kernel delay does not match the mesh"));
        }
        Ok(())
    }

    /// Fills `out` (row blocks = step nodes) with
    /// `∫_{interval(t_i) ∩ supp} C(s + t_i, θ) ℓ_j(t_i + θ) dθ`.
    fn integrate_rows<K: Kernel>(
        &self,
        kernel: &K,
        s: f64,
        basis_nodes: &[f64],
        basis_weights: &[f64],
        interval: impl Fn(f64) -> (f64, f64),
        out: &mut DMatrix<f64>,
    ) -> Result<()> {
        let d = self.dim;
        let (lo, hi) = kernel.support();
        let mut c = vec![0.0; d * d];
        let mut ell = vec![0.0; basis_nodes.len()];
        for (i, &ti) in self.mesh.step_nodes.iter().enumerate() {
            let (a, b) = interval(ti);
            let (a, b) = (a.max(lo), b.min(hi));
            if b <= a {
                continue;
            }
            for (theta, w) in self.rule.points(a, b) {
                kernel.eval(s + ti, theta, &mut c)?;
                lagrange_basis(basis_nodes, basis_weights, ti + theta, &mut ell);
                for (j, &l) in ell.iter().enumerate() {
                    let coef = w * l;
                    for r in 0..d {
                        for k in 0..d {
                            out[(i * d + r, j * d + k)] += coef * c[r * d + k];
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// `U1`, of size `dN x d(M+1)`, over the window starting at `s`.
    pub fn build_u1<K: Kernel>(&self, kernel: &K, s: f64) -> Result<DMatrix<f64>> {
        self.check_kernel(kernel)?;
        let d = self.dim;
        let mut u1 = DMatrix::zeros(d * self.mesh.n, d * (self.mesh.m + 1));
        let tau = self.mesh.tau;
        self.integrate_rows(
            kernel,
            s,
            &self.mesh.state_nodes,
            &self.mesh.state_bary_weights,
            |ti| (-tau, -ti),
            &mut u1,
        )?;
        Ok(u1)
    }

    /// `U2`, of size `dN x dN`, over the window starting at `s`.
    pub fn build_u2<K: Kernel>(&self, kernel: &K, s: f64) -> Result<DMatrix<f64>> {
        self.check_kernel(kernel)?;
        let d = self.dim;
        let mut u2 = DMatrix::zeros(d * self.mesh.n, d * self.mesh.n);
        self.integrate_rows(kernel, s, &self.mesh.step_nodes, &self.mesh.step_bary_weights, |ti| (-ti, 0.0), &mut u2)?;
        Ok(u2)
    }

    /// `T = T1 + T2 (I - U2)^{-1} U1` for the window `[s, s + tau]`.
    pub fn assemble<K: Kernel>(&self, kernel: &K, s: f64) -> Result<EvolutionMatrix> {
        let u1 = self.build_u1(kernel, s)?;
        let u2 = self.build_u2(kernel, s)?;
        let n = u2.nrows();
        let a = DMatrix::identity(n, n) - u2;
        let rcond = reciprocal_condition(&a);
        if rcond.is_nan() || rcond < MIN_RCOND {
            return Err(Error::AssemblyFailure { s, rcond });
        }
        let w = a.lu().solve(&u1).ok_or(Error::AssemblyFailure { s, rcond: 0.0 })?;
        let matrix = &self.t1 + &self.t2 * w;
        Ok(EvolutionMatrix { matrix, window: (s, s + self.mesh.h) })
    }
}

/// `σ_min / σ_max`; `0` for a singular or non-finite matrix.
pub fn reciprocal_condition(a: &DMatrix<f64>) -> f64 {
    if a.iter().any(|v| !v.is_finite()) {
        return 0.0;
    }
    let sv = a.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if max == 0.0 {
        0.0
    } else {
        min / max
    }
}

pub fn build_u1<K: Kernel>(kernel: &K, s: f64, mesh: &CollocationMesh, quad_order: usize) -> Result<DMatrix<f64>> {
    Discretization::new(mesh.clone(), kernel.dim(), quad_order)?.build_u1(kernel, s)
}

pub fn build_u2<K: Kernel>(kernel: &K, s: f64, mesh: &CollocationMesh, quad_order: usize) -> Result<DMatrix<f64>> {
    Discretization::new(mesh.clone(), kernel.dim(), quad_order)?.build_u2(kernel, s)
}

/// One-shot assembly; prefer [`Discretization::assemble`] in loops.
pub fn assemble_t<K: Kernel>(kernel: &K, s: f64, mesh: &CollocationMesh, quad_order: usize) -> Result<EvolutionMatrix> {
    Discretization::new(mesh.clone(), kernel.dim(), quad_order)?.assemble(kernel, s)
}

/// Operator `T_{M,N}` lifted to act between polynomials: the matrix mapping
/// values at `inputs` (interpreted through their interpolant) to values of
/// the new state's interpolant at `outputs`.
///
/// Lets discretizations of different orders be compared on the same
/// finite-dimensional spaces.
pub fn lifted_operator(
    t: &EvolutionMatrix,
    mesh: &CollocationMesh,
    inputs: &[f64],
    outputs: &[f64],
) -> Result<DMatrix<f64>> {
    if t.order() != mesh.m + 1 {
        return Err(Error::invalid("lifting is implemented for scalar equations"));
    }
    let input_w = crate::mesh::barycentric_weights(inputs)?;
    let sample = basis_matrix(inputs, &input_w, &mesh.state_nodes);
    let interp = basis_matrix(&mesh.state_nodes, &mesh.state_bary_weights, outputs);
    Ok(interp * &t.matrix * sample)
}

/// Row `k` holds the Lagrange basis on `nodes` evaluated at `at[k]`.
fn basis_matrix(nodes: &[f64], weights: &[f64], at: &[f64]) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(at.len(), nodes.len());
    let mut ell = vec![0.0; nodes.len()];
    for (k, &theta) in at.iter().enumerate() {
        lagrange_basis(nodes, weights, theta, &mut ell);
        for (j, &l) in ell.iter().enumerate() {
            out[(k, j)] = l;
        }
    }
    out
}
