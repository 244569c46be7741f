//! Experiment drivers: single runs, `γ` sweeps and convergence studies.

use rayon::prelude::*;
use relyap_core::dqr::LyapunovEstimate;
use relyap_core::ivp::Trajectory;
use relyap_core::model::QUADRATIC_TAU;
use relyap_core::pipeline::{lyapunov_along, nontrivial_equilibrium_les, reference_trajectory, RunParams};
use relyap_core::spectral::{dominant_real_root, CharacteristicProblem};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

/// `M = N` for single runs and convergence studies.
pub const DEFAULT_MN: usize = 16;
/// `M = N` for diagram sweeps.
pub const DIAGRAM_MN: usize = 15;
/// Discretization of the operator whose spectrum is the equilibrium reference.
pub const REFERENCE_MN: usize = 40;
pub const DEFAULT_TF_LIST: [f64; 4] = [125.0, 250.0, 500.0, 1000.0];
pub const DEFAULT_MN_LIST: [usize; 4] = [8, 12, 16, 20];

/// First Hopf point of the nontrivial equilibrium.
pub const HOPF_GAMMA: f64 = 2.0 + core::f64::consts::FRAC_PI_2;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the sweep job at `gamma`; depends only on `seed` and `gamma`.
pub fn gamma_seed(seed: u64, gamma: f64) -> u64 {
    seed ^ splitmix64(gamma.to_bits())
}

pub fn run_solve(cfg: &ExperimentConfig) -> Result<Trajectory> {
    let p = cfg.run_params(cfg.single_gamma()?, DEFAULT_MN)?;
    Ok(reference_trajectory(&p)?)
}

pub fn run_lyapunov(cfg: &ExperimentConfig) -> Result<LyapunovEstimate> {
    let p = cfg.run_params(cfg.single_gamma()?, DEFAULT_MN)?;
    let traj = reference_trajectory(&p)?;
    Ok(lyapunov_along(&p, &traj)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagramRow {
    pub gamma: f64,
    /// Descending; all NaN when the run at this `γ` failed.
    pub les: Vec<f64>,
}

/// Runs the pipeline at every grid point of the configured sweep.
///
/// Numeric failures at one `γ` yield a NaN row; configuration errors abort.
/// `jobs` bounds the worker count (default: all available cores).
pub fn run_diagram(cfg: &ExperimentConfig, jobs: Option<usize>) -> Result<Vec<DiagramRow>> {
    let gammas = cfg.gamma_spec()?.values()?;
    let params = gammas
        .iter()
        .map(|&g| {
            let mut p = cfg.run_params(g, DIAGRAM_MN)?;
            p.seed = gamma_seed(p.seed, g);
            Ok(p)
        })
        .collect::<Result<Vec<_>>>()?;
    let width = params[0].m + 1;
    let job = |p: &RunParams| DiagramRow {
        gamma: p.gamma,
        les: reference_trajectory(p)
            .and_then(|traj| lyapunov_along(p, &traj))
            .map(|est| est.sorted())
            .unwrap_or_else(|_| vec![f64::NAN; width]),
    };
    let rows = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(e.to_string()))?
            .install(|| params.par_iter().map(job).collect()),
        None => params.par_iter().map(job).collect(),
    };
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvergenceMode {
    /// Vary the final time at fixed `M = N`.
    FinalTime,
    /// Vary `M = N` at fixed final time.
    Discretization,
}

impl std::str::FromStr for ConvergenceMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "tf" => Ok(Self::FinalTime),
            "MN" | "mn" => Ok(Self::Discretization),
            _ => Err(format!("unknown convergence mode `{s}` (expected `tf` or `MN`)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceKind {
    /// Real characteristic root at the trivial equilibrium.
    TrivialRoot,
    /// Operator spectrum at the nontrivial equilibrium.
    NontrivialSpectrum,
    /// The highest-resolution run of the study itself.
    FinestRun,
}

impl ReferenceKind {
    pub fn name(self) -> &'static str {
        match self {
            ReferenceKind::TrivialRoot => "characteristic-root",
            ReferenceKind::NontrivialSpectrum => "equilibrium-spectrum",
            ReferenceKind::FinestRun => "finest-run",
        }
    }
}

/// Dominant exponent of the attracting equilibrium, if `γ` has one.
pub fn equilibrium_reference(gamma: f64) -> Result<Option<(ReferenceKind, f64)>> {
    if gamma < 1.0 {
        let root = dominant_real_root(&CharacteristicProblem::quadratic(0.5 * gamma), (-10.0, 10.0), 1e-15)?
            .ok_or_else(|| CliError::Numeric(relyap_core::Error::NumericFailure("root not bracketed".into())))?;
        return Ok(Some((ReferenceKind::TrivialRoot, root)));
    }
    if gamma > 1.0 && gamma < HOPF_GAMMA {
        let les = nontrivial_equilibrium_les(gamma, REFERENCE_MN, REFERENCE_MN)?;
        return Ok(Some((ReferenceKind::NontrivialSpectrum, les[0])));
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    /// `t_f` or `M = N`.
    pub param: f64,
    pub dominant: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub mode: ConvergenceMode,
    pub gamma: f64,
    pub reference_kind: ReferenceKind,
    pub reference: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// Least-squares slope of `log error` against `log param` over the rows
    /// with a positive error.
    pub fn loglog_slope(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.error > 0.0 && r.error.is_finite())
            .map(|r| (r.param.ln(), r.error.ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        Some(sxy / sxx)
    }
}

pub fn run_convergence(cfg: &ExperimentConfig, mode: ConvergenceMode) -> Result<ConvergenceTable> {
    let gamma = cfg.single_gamma()?;
    let (params, dominants): (Vec<f64>, Vec<f64>) = match mode {
        ConvergenceMode::FinalTime => {
            let mut tfs = cfg.tf_list.clone().unwrap_or_else(|| DEFAULT_TF_LIST.to_vec());
            tfs.sort_by(f64::total_cmp);
            let longest = *tfs.last().ok_or_else(|| CliError::Config("tf_list is empty".into()))?;
            let p = RunParams { t_f: longest, ..cfg.run_params(gamma, DEFAULT_MN)? };
            for &tf in &tfs {
                RunParams { t_f: tf, ..p.clone() }.validate()?;
            }
            // shorter final times are prefixes of the longest run
            let est = lyapunov_along(&p, &reference_trajectory(&p)?)?;
            let dominants = tfs
                .iter()
                .map(|&tf| {
                    let windows = (tf / QUADRATIC_TAU + 1e-9).floor() as usize;
                    let row = &est.history[windows - 1];
                    row.exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                })
                .collect();
            (tfs, dominants)
        }
        ConvergenceMode::Discretization => {
            let mut mns = cfg.mn_list.clone().unwrap_or_else(|| DEFAULT_MN_LIST.to_vec());
            mns.sort_unstable();
            if mns.is_empty() {
                return Err(CliError::Config("mn_list is empty".into()));
            }
            let ps = mns
                .iter()
                .map(|&k| Ok(RunParams { m: k, n: k, ..cfg.run_params(gamma, k)? }))
                .collect::<Result<Vec<_>>>()?;
            let traj = reference_trajectory(&ps[0])?;
            let dominants = ps
                .par_iter()
                .map(|p| lyapunov_along(p, &traj).map(|e| e.dominant()))
                .collect::<relyap_core::Result<Vec<_>>>()?;
            (mns.iter().map(|&k| k as f64).collect(), dominants)
        }
    };
    let (reference_kind, reference) = match equilibrium_reference(gamma)? {
        Some(r) => r,
        None => (ReferenceKind::FinestRun, *dominants.last().expect("non-empty list")),
    };
    let rows = params
        .into_iter()
        .zip(dominants)
        .map(|(param, dominant)| ConvergenceRow { param, dominant, error: (dominant - reference).abs() })
        .collect();
    Ok(ConvergenceTable { mode, gamma, reference_kind, reference, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::GammaSpec;

    #[test]
    fn gamma_seed_is_stable_and_distinct() {
        assert_eq!(gamma_seed(7, 4.2), gamma_seed(7, 4.2));
        assert_ne!(gamma_seed(7, 4.2), gamma_seed(7, 4.21));
        assert_ne!(gamma_seed(7, 4.2), gamma_seed(8, 4.2));
    }

    #[test]
    fn equilibrium_reference_regimes() {
        let (k, v) = equilibrium_reference(0.5).unwrap().unwrap();
        assert_eq!(k, ReferenceKind::TrivialRoot);
        assert!((v + 0.337137416).abs() < 1e-8);
        let (k, v) = equilibrium_reference(3.0).unwrap().unwrap();
        assert_eq!(k, ReferenceKind::NontrivialSpectrum);
        assert!(v < 0.0);
        assert_eq!(equilibrium_reference(4.0).unwrap(), None);
    }

    #[test]
    fn slope_of_exact_power_law() {
        let rows =
            [1.0, 2.0, 4.0].iter().map(|&p| ConvergenceRow { param: p, dominant: 0.0, error: 3.0 / p }).collect();
        let t = ConvergenceTable {
            mode: ConvergenceMode::FinalTime,
            gamma: 0.5,
            reference_kind: ReferenceKind::TrivialRoot,
            reference: 0.0,
            rows,
        };
        assert!((t.loglog_slope().unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn final_time_rows_match_separate_runs() {
        let cfg = ExperimentConfig {
            gamma: Some(GammaSpec::Value(0.5)),
            m: Some(6),
            n: Some(6),
            tf_list: Some(vec![30.0, 15.0]),
            ..Default::default()
        };
        let table = run_convergence(&cfg, ConvergenceMode::FinalTime).unwrap();
        assert_eq!(table.rows[0].param, 15.0);
        for row in &table.rows {
            let single = ExperimentConfig { t_f: Some(row.param), ..cfg.clone() };
            assert_eq!(run_lyapunov(&single).unwrap().dominant(), row.dominant);
        }
    }

    #[test]
    fn diagram_rows_follow_grid() {
        let cfg = ExperimentConfig {
            gamma: Some(GammaSpec::Sweep { start: 3.0, stop: 3.2, step: 0.1 }),
            m: Some(4),
            n: Some(4),
            t_f: Some(12.0),
            ..Default::default()
        };
        let rows = run_diagram(&cfg, Some(2)).unwrap();
        assert_eq!(rows.iter().map(|r| r.gamma).collect::<Vec<_>>(), vec![3.0, 3.1, 3.2]);
        assert!(rows.iter().all(|r| r.les.len() == 5));
    }
}
