//! Chebyshev collocation meshes, barycentric Lagrange interpolation and
//! Clenshaw–Curtis quadrature.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::{Error, Result};

fn check_interval(a: f64, b: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::invalid(alloc::format!("interval [{a}, {b}] must satisfy a < b")));
    }
    Ok(())
}

#[inline]
fn affine(x: f64, a: f64, b: f64) -> f64 {
    // endpoints must land exactly on a and b (kernel supports are closed)
    if x == 1.0 {
        b
    } else if x == -1.0 {
        a
    } else {
        0.5 * (a + b) + 0.5 * (b - a) * x
    }
}

/// Chebyshev extrema `cos(j pi / m)`, `j = 0..=m`, mapped onto `[a, b]`.
///
/// Nodes come out in decreasing order, `b` first and `a` last.
pub fn cheb_extrema(m: usize, a: f64, b: f64) -> Result<Vec<f64>> {
    if m < 1 {
        return Err(Error::invalid("cheb_extrema needs m >= 1"));
    }
    check_interval(a, b)?;
    Ok((0..=m)
        .map(|j| {
            if j == 0 {
                b
            } else if j == m {
                a
            } else if 2 * j == m {
                0.5 * (a + b)
            } else {
                affine(libm::cos(j as f64 * PI / m as f64), a, b)
            }
        })
        .collect())
}

/// Chebyshev zeros `cos((2i - 1) pi / (2n))`, `i = 1..=n`, mapped onto
/// `[a, b]`, in decreasing order. All nodes are strictly interior.
pub fn cheb_zeros(n: usize, a: f64, b: f64) -> Result<Vec<f64>> {
    if n < 1 {
        return Err(Error::invalid("cheb_zeros needs n >= 1"));
    }
    check_interval(a, b)?;
    Ok((1..=n)
        .map(|i| {
            if 2 * i - 1 == n {
                0.5 * (a + b)
            } else {
                affine(libm::cos((2 * i - 1) as f64 * PI / (2 * n) as f64), a, b)
            }
        })
        .collect())
}

/// Barycentric weights `1 / prod_{k != j} (x_j - x_k)`, rescaled so the
/// largest weight has modulus one.
pub fn barycentric_weights(nodes: &[f64]) -> Result<Vec<f64>> {
    if nodes.is_empty() {
        return Err(Error::invalid("no nodes"));
    }
    if nodes.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("non-finite node"));
    }
    let lo = nodes.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = nodes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // capacity scaling keeps the products away from over/underflow
    let scale = if hi > lo { 4.0 / (hi - lo) } else { 1.0 };
    let mut w = Vec::with_capacity(nodes.len());
    for (j, &xj) in nodes.iter().enumerate() {
        let mut prod = 1.0;
        for (k, &xk) in nodes.iter().enumerate() {
            if k != j {
                let diff = xj - xk;
                if diff == 0.0 {
                    return Err(Error::invalid(alloc::format!("duplicate node {xj}")));
                }
                prod *= diff * scale;
            }
        }
        w.push(1.0 / prod);
    }
    let wmax = w.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    for v in &mut w {
        *v /= wmax;
    }
    Ok(w)
}

/// Values of every Lagrange basis polynomial at `t`, written into `out`.
///
/// Uses the second (true) barycentric form. When `t` hits a node the
/// result is the corresponding unit vector.
pub fn lagrange_basis(nodes: &[f64], weights: &[f64], t: f64, out: &mut [f64]) {
    debug_assert_eq!(nodes.len(), weights.len());
    debug_assert_eq!(nodes.len(), out.len());
    if let Some(hit) = nodes.iter().position(|&x| x == t) {
        out.iter_mut().for_each(|v| *v = 0.0);
        out[hit] = 1.0;
        return;
    }
    let mut denom = 0.0;
    for ((o, &x), &w) in out.iter_mut().zip(nodes).zip(weights) {
        *o = w / (t - x);
        denom += *o;
    }
    for o in out.iter_mut() {
        *o /= denom;
    }
}

/// Barycentric interpolant of `(nodes, values)` evaluated at `t`.
pub fn interp_eval(nodes: &[f64], weights: &[f64], values: &[f64], t: f64) -> f64 {
    debug_assert_eq!(nodes.len(), values.len());
    let mut num = 0.0;
    let mut den = 0.0;
    for ((&x, &w), &v) in nodes.iter().zip(weights).zip(values) {
        if x == t {
            return v;
        }
        let c = w / (t - x);
        num += c * v;
        den += c;
    }
    num / den
}

/// Clenshaw–Curtis rule with `q + 1` points on the reference interval
/// `[-1, 1]`, reusable on any `[a, b]`.
#[derive(Debug, Clone)]
pub struct ClenshawCurtis {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl ClenshawCurtis {
    pub fn new(q: usize) -> Result<Self> {
        if q < 2 {
            return Err(Error::invalid("Clenshaw-Curtis needs q >= 2"));
        }
        let nodes = cheb_extrema(q, -1.0, 1.0)?;
        let qf = q as f64;
        let half = q / 2;
        let weights = (0..=q)
            .map(|k| {
                let ck = if k == 0 || k == q { 1.0 } else { 2.0 };
                let mut s = 1.0;
                for j in 1..=half {
                    let bj = if 2 * j == q { 1.0 } else { 2.0 };
                    let jf = j as f64;
                    s -= bj / (4.0 * jf * jf - 1.0) * libm::cos(2.0 * jf * k as f64 * PI / qf);
                }
                ck * s / qf
            })
            .collect();
        Ok(Self { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn points(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (affine(x, a, b), w * half))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        self.points(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// One-shot Clenshaw–Curtis integral of `f` over `[a, b]` with `q + 1` points.
pub fn quad_cc<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, q: usize) -> Result<f64> {
    check_interval(a, b)?;
    Ok(ClenshawCurtis::new(q)?.integrate(f, a, b))
}

/// Node sets and barycentric weights for one discretization window.
///
/// `state_nodes` are Chebyshev extrema on `[-tau, 0]` (decreasing, `0`
/// first), `step_nodes` Chebyshev zeros on `(0, h)` (decreasing). The window
/// length is always `h = tau`.
#[derive(Debug, Clone)]
pub struct CollocationMesh {
    pub m: usize,
    pub n: usize,
    pub tau: f64,
    pub h: f64,
    pub state_nodes: Vec<f64>,
    pub step_nodes: Vec<f64>,
    pub state_bary_weights: Vec<f64>,
    pub step_bary_weights: Vec<f64>,
}

impl CollocationMesh {
    pub fn new(m: usize, n: usize, tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::invalid("tau must be positive"));
        }
        let h = tau;
        let state_nodes = cheb_extrema(m, -tau, 0.0)?;
        let step_nodes = cheb_zeros(n, 0.0, h)?;
        let state_bary_weights = barycentric_weights(&state_nodes)?;
        let step_bary_weights = barycentric_weights(&step_nodes)?;
        Ok(Self { m, n, tau, h, state_nodes, step_nodes, state_bary_weights, step_bary_weights })
    }

    /// Default quadrature order `2 max(M, N) + 8`.
    pub fn default_quad_order(&self) -> usize {
        2 * self.m.max(self.n) + 8
    }

    pub fn state_interp(&self, values: &[f64], theta: f64) -> f64 {
        interp_eval(&self.state_nodes, &self.state_bary_weights, values, theta)
    }

    pub fn step_interp(&self, values: &[f64], t: f64) -> f64 {
        interp_eval(&self.step_nodes, &self.step_bary_weights, values, t)
    }
}
