//! Discrete QR iteration over a sequence of evolution matrices.
//!
//! Starting from a random orthonormal `Q_0`, each step factors
//! `T_n Q_n = Q_{n+1} R_n` with `diag(R_n) >= 0` and accumulates
//! `log [R_n]_ii`. The finite-time averages of these sums are the
//! exponent estimates.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

/// Largest tolerated `|QᵀQ - I|` entry before `Q` is re-factorized.
pub const ORTHONORMALITY_TOL: f64 = 1e-10;

/// QR factorization with a non-negative diagonal in `R`.
///
/// Columns of `Q` and rows of `R` whose diagonal entry comes out negative are
/// sign-flipped; zero diagonal entries (rank deficiency) are kept.
pub fn qr_pos(a: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let qr = a.clone().qr();
    let mut q = qr.q();
    let mut r = qr.r();
    for i in 0..r.nrows().min(r.ncols()) {
        if r[(i, i)] < 0.0 {
            r.row_mut(i).neg_mut();
            q.column_mut(i).neg_mut();
        }
    }
    (q, r)
}

/// Orthonormal factor of a seeded standard normal matrix.
pub fn random_unitary(m: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DMatrix::from_fn(m, m, |_, _| rng.sample::<f64, _>(StandardNormal));
    qr_pos(&a).0
}

/// `max |QᵀQ - I|`.
pub fn orthonormality_defect(q: &DMatrix<f64>) -> f64 {
    let g = q.transpose() * q;
    let mut worst: f64 = 0.0;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - target).abs());
        }
    }
    worst
}

/// Running state of the iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct DqrState {
    pub q: DMatrix<f64>,
    /// `Σ_k log [R_k]_ii`; `-inf` once a diagonal entry has vanished.
    pub log_sums: Vec<f64>,
    pub elapsed: f64,
    pub steps: usize,
    pub seed: u64,
    pub reorthonormalizations: usize,
}

impl DqrState {
    pub fn new(m: usize, seed: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("matrix order must be positive"));
        }
        Ok(Self {
            q: random_unitary(m, seed),
            log_sums: vec![0.0; m],
            elapsed: 0.0,
            steps: 0,
            seed,
            reorthonormalizations: 0,
        })
    }

    pub fn order(&self) -> usize {
        self.log_sums.len()
    }

    /// Advances by one window of length `h` with the evolution matrix `t`.
    pub fn step(&mut self, t: &DMatrix<f64>, h: f64) {
        let (q, r) = qr_pos(&(t * &self.q));
        for (s, i) in self.log_sums.iter_mut().zip(0..) {
            *s += libm::log(r[(i, i)]);
        }
        self.q = q;
        if orthonormality_defect(&self.q) > ORTHONORMALITY_TOL {
            self.q = qr_pos(&self.q).0;
            self.reorthonormalizations += 1;
        }
        self.steps += 1;
        self.elapsed = self.steps as f64 * h;
    }

    /// `log_sums / elapsed`, in QR-diagonal order.
    pub fn exponents(&self) -> Vec<f64> {
        self.log_sums.iter().map(|s| s / self.elapsed).collect()
    }
}

/// Exponent estimates after one step of the iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryRow {
    pub step: usize,
    /// Elapsed time `(step) * tau` since the start of the iteration.
    pub t: f64,
    pub exponents: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovEstimate {
    /// Final estimates, in QR-diagonal order.
    pub exponents: Vec<f64>,
    pub history: Vec<HistoryRow>,
    /// Elapsed time covered by the iteration.
    pub t_f: f64,
    pub reorthonormalizations: usize,
}

impl LyapunovEstimate {
    /// Exponents in descending order.
    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.exponents.clone();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    pub fn dominant(&self) -> f64 {
        self.sorted()[0]
    }
}

/// Runs `⌊t_f / tau⌋` steps; window `n` uses the matrix `op_source(n)`.
pub fn dqr_run<F>(mut op_source: F, m: usize, tau: f64, t_f: f64, seed: u64) -> Result<LyapunovEstimate>
where
    F: FnMut(usize) -> Result<DMatrix<f64>>,
{
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::invalid("tau must be positive"));
    }
    if !(t_f.is_finite() && t_f >= tau) {
        return Err(Error::invalid(alloc::format!("t_f = {t_f} must be at least tau = {tau}")));
    }
    let windows = libm::floor(t_f / tau + 1e-9) as usize;
    let mut state = DqrState::new(m, seed)?;
    let mut history = Vec::with_capacity(windows);
    for n in 0..windows {
        let t = op_source(n)?;
        if t.shape() != (m, m) {
            return Err(Error::invalid(alloc::format!("window {n}: expected a {m}x{m} matrix, got {:?}", t.shape())));
        }
        if t.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { window: n });
        }
        state.step(&t, tau);
        history.push(HistoryRow { step: n + 1, t: state.elapsed, exponents: state.exponents() });
    }
    Ok(LyapunovEstimate {
        exponents: state.exponents(),
        history,
        t_f: state.elapsed,
        reorthonormalizations: state.reorthonormalizations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::{prelude::any, prop_assert, prop_assert_eq, proptest};

    fn seeded(m: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(m, m, |_, _| rng.sample::<f64, _>(StandardNormal))
    }

    #[test]
    fn qr_pos_examples() {
        let (q, r) = qr_pos(&DMatrix::identity(3, 3));
        assert_eq!(q, DMatrix::identity(3, 3));
        assert_eq!(r, DMatrix::identity(3, 3));
        let a = DMatrix::from_row_slice(2, 2, &[-2.0, 0.0, 0.0, 3.0]);
        let (q, r) = qr_pos(&a);
        assert!((q - DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0])).amax() < 1e-15);
        assert!((r - DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0])).amax() < 1e-15);
    }

    #[test]
    fn rank_deficient_gives_zero_diagonal() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let (q, r) = qr_pos(&a);
        assert!(r[(1, 1)].abs() < 1e-15);
        assert!((&q * &r - a).amax() < 1e-14);
    }

    #[test]
    fn random_unitary_contract() {
        let q = random_unitary(1, 3);
        assert_eq!(q[(0, 0)].abs(), 1.0);
        for m in [2, 5, 17] {
            let a = random_unitary(m, 42);
            let b = random_unitary(m, 42);
            assert_eq!(a, b);
            assert!(orthonormality_defect(&a) <= 1e-12);
        }
        assert_ne!(random_unitary(4, 1), random_unitary(4, 2));
    }

    #[test]
    fn scalar_constant_operator() {
        let a = 1.7;
        let est = dqr_run(|_| Ok(DMatrix::from_element(1, 1, a)), 1, 3.0, 30.0, 9).unwrap();
        assert!((est.exponents[0] - libm::log(a) / 3.0).abs() < 1e-15);
        assert_eq!(est.history.len(), 10);
        assert_eq!(est.t_f, 30.0);
    }

    #[test]
    fn alternating_operators_cancel() {
        let est =
            dqr_run(|n| Ok(DMatrix::from_element(1, 1, if n % 2 == 0 { 2.0 } else { 0.5 })), 1, 1.0, 40.0, 0).unwrap();
        for row in est.history.iter().filter(|r| r.step % 2 == 0) {
            assert_eq!(row.exponents[0], 0.0);
        }
        assert_eq!(est.exponents[0], 0.0);
    }

    #[test]
    fn diagonal_operator_exponents() {
        let t = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 0.5, 1.0]));
        let est = dqr_run(|_| Ok(t.clone()), 3, 1.0, 2000.0, 5).unwrap();
        let s = est.sorted();
        assert!((s[0] - libm::log(2.0)).abs() < 2e-3);
        assert!(s[1].abs() < 2e-3);
        assert!((s[2] - libm::log(0.5)).abs() < 2e-3);
    }

    #[test]
    fn collapse_gives_neg_infinity() {
        let est = dqr_run(|_| Ok(DMatrix::zeros(2, 2)), 2, 1.0, 5.0, 1).unwrap();
        assert!(est.exponents.iter().all(|v| *v == f64::NEG_INFINITY));
    }

    #[test]
    fn non_finite_window_reported() {
        let r = dqr_run(|n| Ok(DMatrix::from_element(1, 1, if n == 3 { f64::NAN } else { 1.0 })), 1, 1.0, 10.0, 0);
        assert_eq!(r, Err(Error::NonFinite { window: 3 }));
    }

    #[test]
    fn argument_errors() {
        let ok = |_| Ok(DMatrix::identity(2, 2));
        assert!(matches!(dqr_run(ok, 2, 3.0, 2.0, 0), Err(Error::InvalidArgument(_))));
        assert!(matches!(dqr_run(ok, 3, 1.0, 2.0, 0), Err(Error::InvalidArgument(_))));
        assert!(matches!(dqr_run(ok, 0, 1.0, 2.0, 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn seed_determinism() {
        let t = seeded(6, 77) * 0.5;
        let a = dqr_run(|_| Ok(t.clone()), 6, 1.0, 50.0, 11).unwrap();
        let b = dqr_run(|_| Ok(t.clone()), 6, 1.0, 50.0, 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn orthonormality_maintained() {
        let ops: Vec<_> = (0..200).map(|k| seeded(8, k) * 3.0).collect();
        let mut st = DqrState::new(8, 4).unwrap();
        for t in &ops {
            st.step(t, 1.0);
            assert!(orthonormality_defect(&st.q) <= ORTHONORMALITY_TOL);
        }
    }

    proptest! {
        #[test]
        fn qr_pos_contract(seed in any::<u64>(), m in 1usize..12) {
            let a = seeded(m, seed);
            let (q, r) = qr_pos(&a);
            prop_assert!((&q * &r - &a).amax() <= 1e-12);
            prop_assert!(orthonormality_defect(&q) <= 1e-12);
            for i in 0..m {
                prop_assert!(r[(i, i)] >= 0.0);
                for j in 0..i {
                    prop_assert_eq!(r[(i, j)], 0.0);
                }
            }
        }
    }
}
