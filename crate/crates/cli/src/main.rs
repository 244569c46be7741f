use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use relyap::experiment::{self, ConvergenceMode};
use relyap::output::{self, fmt_f64};
use relyap::{ExperimentConfig, GammaSpec, Result};

/// Lyapunov exponents of the quadratic renewal equation
/// x(t) = (γ/2) ∫_{-3}^{-1} x(t+θ)(1 - x(t+θ)) dθ.
#[derive(Parser)]
#[command(name = "relyap", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the equation and write trajectory.csv.
    Solve(Common),
    /// Compute the exponents along one solution; writes les.csv and history.csv.
    Lyapunov(Common),
    /// Sweep γ; writes diagram.csv and diagram.gp.
    Diagram {
        #[command(flatten)]
        common: Common,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Error of the dominant exponent against t_f or M = N; writes converge.csv.
    Converge {
        #[command(flatten)]
        common: Common,
        /// `tf` or `MN`.
        #[arg(long, default_value = "tf")]
        mode: ConvergenceMode,
    },
}

#[derive(Args)]
struct Common {
    /// JSON configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// A value, `start:stop:step`, or a preset (`diagram`, `island`, `hopf`).
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<GammaSpec>,
    #[arg(long = "M")]
    m: Option<usize>,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long = "tf", alias = "t_f")]
    t_f: Option<f64>,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    phi0: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "quad-order", alias = "quad_order")]
    quad_order: Option<usize>,
    #[arg(long = "transient-skip", alias = "transient_skip")]
    transient_skip: Option<f64>,
    #[arg(long = "out", alias = "output_dir")]
    out: Option<PathBuf>,
    /// Comma-separated final times for `converge --mode tf`.
    #[arg(long = "tf-list", value_delimiter = ',')]
    tf_list: Option<Vec<f64>>,
    /// Comma-separated M = N values for `converge --mode MN`.
    #[arg(long = "mn-list", value_delimiter = ',')]
    mn_list: Option<Vec<usize>>,
}

impl Common {
    fn resolve(self) -> Result<ExperimentConfig> {
        let base = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        Ok(base.overlay(ExperimentConfig {
            gamma: self.gamma,
            m: self.m,
            n: self.n,
            t_f: self.t_f,
            r: self.r,
            phi0: self.phi0,
            seed: self.seed,
            quad_order: self.quad_order,
            transient_skip: self.transient_skip,
            output_dir: self.out,
            tf_list: self.tf_list,
            mn_list: self.mn_list,
        }))
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve(common) => {
            let cfg = common.resolve()?;
            let traj = experiment::run_solve(&cfg)?;
            let path = output::write_trajectory(&cfg.output_dir(), &traj)?;
            println!("wrote {} ({} samples)", path.display(), traj.len());
        }
        Command::Lyapunov(common) => {
            let cfg = common.resolve()?;
            let est = experiment::run_lyapunov(&cfg)?;
            let (les, hist) = output::write_lyapunov(&cfg.output_dir(), &est)?;
            let sorted = est.sorted();
            println!("lambda_1 = {}", fmt_f64(sorted[0]));
            if let Some(l2) = sorted.get(1) {
                println!("lambda_2 = {}", fmt_f64(*l2));
            }
            println!("wrote {} and {}", les.display(), hist.display());
        }
        Command::Diagram { common, jobs } => {
            let mut cfg = common.resolve()?;
            if cfg.gamma.is_none() {
                cfg.gamma = Some(GammaSpec::Preset("diagram".into()));
            }
            let rows = experiment::run_diagram(&cfg, jobs)?;
            let failed = rows.iter().filter(|r| r.les.iter().all(|v| v.is_nan())).count();
            let (csv, gp) = output::write_diagram(&cfg.output_dir(), &rows)?;
            println!("{} gamma values, {failed} failed", rows.len());
            println!("wrote {} and {}", csv.display(), gp.display());
        }
        Command::Converge { common, mode } => {
            let cfg = common.resolve()?;
            let table = experiment::run_convergence(&cfg, mode)?;
            let path = output::write_convergence(&cfg.output_dir(), &table)?;
            println!("reference ({}) = {}", table.reference_kind.name(), fmt_f64(table.reference));
            if let Some(s) = table.loglog_slope() {
                println!("log-log slope = {s:.3}");
            }
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("relyap: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
