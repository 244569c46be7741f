//! JSON experiment configuration and command-line overrides.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use relyap_core::pipeline::RunParams;
use serde::Deserialize;

use crate::error::{CliError, Result};

/// Upper bound on swept `γ` values.
pub const GAMMA_MAX: f64 = 5.0;

/// A single `γ`, an arithmetic sweep, or a named preset.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum GammaSpec {
    Value(f64),
    Sweep { start: f64, stop: f64, step: f64 },
    Preset(String),
}

/// Named sweeps: `diagram` covers the full range, `island` resolves the
/// stability window near 4.87.
pub const PRESETS: &[(&str, f64, f64, f64)] =
    &[("diagram", 2.5, 5.0, 0.01), ("island", 4.86, 4.89, 0.0005), ("hopf", 3.5, 3.65, 0.01)];

impl GammaSpec {
    /// Grid points in increasing order.
    pub fn values(&self) -> Result<Vec<f64>> {
        match *self {
            GammaSpec::Value(g) => {
                if !(g.is_finite() && g > 0.0) {
                    return Err(CliError::Config(format!("gamma must be positive, got {g}")));
                }
                Ok(vec![g])
            }
            GammaSpec::Sweep { start, stop, step } => sweep(start, stop, step),
            GammaSpec::Preset(ref name) => {
                let (_, a, b, h) = PRESETS
                    .iter()
                    .find(|p| p.0 == name)
                    .ok_or_else(|| CliError::Config(format!("unknown gamma preset `{name}`")))?;
                sweep(*a, *b, *h)
            }
        }
    }

    pub fn is_single(&self) -> bool {
        matches!(self, GammaSpec::Value(_))
    }
}

fn sweep(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step.is_finite() && step > 0.0) {
        return Err(CliError::Config(format!("sweep step must be positive, got {step}")));
    }
    let in_range = |g: f64| g.is_finite() && g > 0.0 && g <= GAMMA_MAX;
    if !(in_range(start) && in_range(stop) && start <= stop) {
        return Err(CliError::Config(format!(
            "sweep bounds [{start}, {stop}] must satisfy 0 < start <= stop <= {GAMMA_MAX}"
        )));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    // k * step rather than repeated addition; rounding drops the binary
    // representation noise so that 4.52 is written as 4.52
    Ok((0..=count).map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12).collect())
}

impl FromStr for GammaSpec {
    type Err = String;

    /// `4.2`, `start:stop:step`, or a preset name.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}"));
        match parts.as_slice() {
            [v] => match num(v) {
                Ok(g) => Ok(GammaSpec::Value(g)),
                Err(_) if PRESETS.iter().any(|p| p.0 == *v) => Ok(GammaSpec::Preset(v.to_string())),
                Err(e) => Err(e),
            },
            [a, b, h] => Ok(GammaSpec::Sweep { start: num(a)?, stop: num(b)?, step: num(h)? }),
            _ => Err(format!("cannot parse gamma `{s}`")),
        }
    }
}

/// Every field is optional so that files and flags can be layered; unset
/// fields fall back to the documented defaults.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub gamma: Option<GammaSpec>,
    #[serde(rename = "M")]
    pub m: Option<usize>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub t_f: Option<f64>,
    pub r: Option<usize>,
    pub phi0: Option<f64>,
    pub seed: Option<u64>,
    pub quad_order: Option<usize>,
    pub transient_skip: Option<f64>,
    pub output_dir: Option<PathBuf>,
    /// Final times of a `tf` convergence study.
    pub tf_list: Option<Vec<f64>>,
    /// `M = N` values of an `MN` convergence study.
    pub mn_list: Option<Vec<usize>>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Fields set in `other` take precedence.
    pub fn overlay(self, other: ExperimentConfig) -> Self {
        Self {
            gamma: other.gamma.or(self.gamma),
            m: other.m.or(self.m),
            n: other.n.or(self.n),
            t_f: other.t_f.or(self.t_f),
            r: other.r.or(self.r),
            phi0: other.phi0.or(self.phi0),
            seed: other.seed.or(self.seed),
            quad_order: other.quad_order.or(self.quad_order),
            transient_skip: other.transient_skip.or(self.transient_skip),
            output_dir: other.output_dir.or(self.output_dir),
            tf_list: other.tf_list.or(self.tf_list),
            mn_list: other.mn_list.or(self.mn_list),
        }
    }

    pub fn gamma_spec(&self) -> Result<&GammaSpec> {
        self.gamma.as_ref().ok_or_else(|| CliError::Config("gamma is required".into()))
    }

    /// The configured `γ`, which must not be a sweep.
    pub fn single_gamma(&self) -> Result<f64> {
        let spec = self.gamma_spec()?;
        if !spec.is_single() {
            return Err(CliError::Config("this experiment takes a single gamma, not a sweep".into()));
        }
        Ok(spec.values()?[0])
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    /// Validated pipeline parameters for `gamma`; `default_mn` applies when
    /// `M` or `N` is unset.
    pub fn run_params(&self, gamma: f64, default_mn: usize) -> Result<RunParams> {
        let d = RunParams::default();
        let p = RunParams {
            gamma,
            m: self.m.unwrap_or(default_mn),
            n: self.n.unwrap_or(default_mn),
            t_f: self.t_f.unwrap_or(d.t_f),
            r: self.r.unwrap_or(d.r),
            phi0: self.phi0.unwrap_or(d.phi0),
            seed: self.seed.unwrap_or(d.seed),
            quad_order: self.quad_order,
            transient_skip: self.transient_skip.unwrap_or(d.transient_skip),
        };
        p.validate()?;
        Ok(p)
    }
}
