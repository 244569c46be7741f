//! Forward integration of a nonlinear renewal equation with the composite
//! trapezoidal rule on a uniform grid.

use alloc::vec;
use alloc::vec::Vec;

use crate::model::{NonlinearRe, Orbit};
use crate::{Error, Result};

const FIXED_POINT_TOL: f64 = 1e-12;
const FIXED_POINT_MAX_ITER: usize = 100;
// tolerance, in grid steps, for recognising a time as a grid point
const GRID_SNAP: f64 = 1e-9;

/// Numerical solution on the uniform grid of step `1 / r`.
///
/// The initial function is kept on `[t_start - tau, t_start]` separately
/// from the computed values on `[t_start, ..]`, since the solution of a
/// renewal equation generally jumps at `t_start`. At `t_start` itself the
/// computed (right) value is used.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    dim: usize,
    r: usize,
    t_start: f64,
    history_len: usize,
    history: Vec<f64>,
    values: Vec<f64>,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Grid step `1 / r`.
    pub fn delta(&self) -> f64 {
        1.0 / self.r as f64
    }

    pub fn pieces_per_unit(&self) -> usize {
        self.r
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    /// Number of computed samples (from `t_start` on).
    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Time of computed sample `k` (sample 0 is `t_start`).
    pub fn time(&self, k: usize) -> f64 {
        self.t_start + k as f64 / self.r as f64
    }

    pub fn sample(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    /// Initial-function sample `i`, at `t_start - tau + i / r`.
    pub fn history_sample(&self, i: usize) -> &[f64] {
        &self.history[i * self.dim..(i + 1) * self.dim]
    }

    pub fn first_time(&self) -> f64 {
        self.t_start - self.history_len as f64 / self.r as f64
    }

    pub fn last_time(&self) -> f64 {
        self.time(self.len() - 1)
    }

    /// All samples `(t, x)` in time order: the initial function strictly
    /// before `t_start`, then the computed values.
    pub fn iter(&self) -> impl Iterator<Item = (f64, &[f64])> + '_ {
        let hist = (0..self.history_len).map(move |i| {
            let t = self.t_start + (i as f64 - self.history_len as f64) / self.r as f64;
            (t, self.history_sample(i))
        });
        hist.chain((0..self.len()).map(move |k| (self.time(k), self.sample(k))))
    }

    /// Value at `t`: exact on grid points, piecewise linear in between.
    pub fn eval(&self, t: f64, out: &mut [f64]) -> Result<()> {
        let pos = (t - self.t_start) * self.r as f64;
        let last = (self.len() - 1) as f64;
        if !(pos >= -(self.history_len as f64) - GRID_SNAP && pos <= last + GRID_SNAP) {
            return Err(Error::Coverage { t, start: self.first_time(), end: self.last_time() });
        }
        let (samples, pos, count) = if pos >= -GRID_SNAP {
            (&self.values, pos.max(0.0), self.len())
        } else {
            (&self.history, pos + self.history_len as f64, self.history_len + 1)
        };
        let d = self.dim;
        let nearest = libm::round(pos);
        if (pos - nearest).abs() <= GRID_SNAP {
            let i = (nearest as usize).min(count - 1);
            out.copy_from_slice(&samples[i * d..(i + 1) * d]);
            return Ok(());
        }
        let i = libm::floor(pos) as usize;
        let frac = pos - i as f64;
        let (a, b) = (&samples[i * d..(i + 1) * d], &samples[(i + 1) * d..(i + 2) * d]);
        for ((o, &va), &vb) in out.iter_mut().zip(a).zip(b) {
            *o = va + frac * (vb - va);
        }
        Ok(())
    }

    /// Largest max-norm difference to `other` over the computed grid times
    /// of `self` falling in `[t0, t1]`.
    pub fn max_diff_on(&self, other: &Trajectory, t0: f64, t1: f64) -> Result<f64> {
        let mut buf = vec![0.0; self.dim];
        let mut worst: f64 = 0.0;
        for k in 0..self.len() {
            let t = self.time(k);
            if t < t0 || t > t1 {
                continue;
            }
            other.eval(t, &mut buf)?;
            for (a, b) in self.sample(k).iter().zip(&buf) {
                worst = worst.max((a - b).abs());
            }
        }
        Ok(worst)
    }
}

impl Orbit for Trajectory {
    fn dim(&self) -> usize {
        self.dim
    }
    fn state_at(&self, t: f64, out: &mut [f64]) -> Result<()> {
        self.eval(t, out)
    }
}

fn grid_multiple(x: f64, r: usize, what: &str) -> Result<i64> {
    let scaled = x * r as f64;
    let k = libm::round(scaled);
    if (scaled - k).abs() > 1e-9 {
        return Err(Error::invalid(alloc::format!("{what} = {x} is not a multiple of 1/{r}")));
    }
    Ok(k as i64)
}

/// Integrates `model` from the constant initial function `phi` up to (at
/// least) `t_end` with `r` trapezoid pieces per unit time, starting at
/// `t_start = 0`.
///
/// The lag integral at grid time `t_k` is a composite trapezoid over the
/// aligned nodes `θ_j = j / r`. Pieces left of `0` read the initial function
/// and pieces right of `0` the computed values, so a node at `t_k + θ_j = 0`
/// takes half its weight from each side. When the lag support reaches
/// `θ = 0` the step is implicit and solved by fixed-point iteration.
pub fn solve_re<R: NonlinearRe>(model: &R, phi: &[f64], t_end: f64, r: usize) -> Result<Trajectory> {
    let d = model.dim();
    if phi.len() != d {
        return Err(Error::invalid("initial value has the wrong dimension"));
    }
    if r == 0 {
        return Err(Error::invalid("r must be positive"));
    }
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::invalid("t_end must be positive"));
    }
    let tau = model.tau();
    let (lo, hi) = model.lag_support();
    let history_len = grid_multiple(tau, r, "tau")? as usize;
    let lo_i = grid_multiple(lo, r, "lag support start")?;
    let hi_i = grid_multiple(hi, r, "lag support end")?;
    let steps = libm::ceil(t_end * r as f64 - GRID_SNAP) as usize;
    let delta = 1.0 / r as f64;

    let mut history = Vec::with_capacity((history_len + 1) * d);
    for _ in 0..=history_len {
        history.extend_from_slice(phi);
    }
    let hist = |p: i64| -> &[f64] {
        let i = (history_len as i64 + p) as usize;
        &history[i * d..(i + 1) * d]
    };
    let mut values: Vec<f64> = Vec::with_capacity((steps + 1) * d);
    let mut acc = vec![0.0; d];
    let mut f = vec![0.0; d];
    let mut x_new = vec![0.0; d];
    let mut x_prev = vec![0.0; d];
    let implicit = hi_i == 0 && lo_i < 0;
    for k in 0..=steps as i64 {
        let t = k as f64 * delta;
        acc.iter_mut().for_each(|v| *v = 0.0);
        for j in lo_i..=hi_i {
            let p = k + j;
            if k > 0 && implicit && j == 0 {
                continue;
            }
            // half weights of the pieces left and right of node j
            let left = if j > lo_i { 0.5 } else { 0.0 };
            let right = if j < hi_i { 0.5 } else { 0.0 };
            let theta = j as f64 * delta;
            let mut add = |w: f64, x: &[f64], acc: &mut [f64]| {
                if w != 0.0 {
                    model.integrand(t, theta, x, &mut f);
                    for (a, fv) in acc.iter_mut().zip(&f) {
                        *a += w * fv;
                    }
                }
            };
            if p < 0 || k == 0 {
                add(left + right, hist(p), &mut acc);
            } else if p > 0 {
                let i = p as usize;
                add(left + right, &values[i * d..(i + 1) * d], &mut acc);
            } else {
                add(left, hist(0), &mut acc);
                add(right, &values[..d], &mut acc);
            }
        }
        if k > 0 && implicit {
            // x = delta * (acc + F(t, 0, x) / 2)
            let start = values.len() - d;
            x_prev.copy_from_slice(&values[start..]);
            let mut converged = false;
            for _ in 0..FIXED_POINT_MAX_ITER {
                model.integrand(t, 0.0, &x_prev, &mut f);
                let mut change: f64 = 0.0;
                for i in 0..d {
                    x_new[i] = delta * (acc[i] + 0.5 * f[i]);
                    change = change.max((x_new[i] - x_prev[i]).abs());
                }
                x_prev.copy_from_slice(&x_new);
                if change <= FIXED_POINT_TOL {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::SolverFailure { t, iterations: FIXED_POINT_MAX_ITER });
            }
            values.extend_from_slice(&x_new);
        } else {
            values.extend(acc.iter().map(|a| delta * a));
        }
    }
    Ok(Trajectory { dim: d, r, t_start: 0.0, history_len, history, values })
}
