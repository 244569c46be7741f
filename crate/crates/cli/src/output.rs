//! CSV tables and the gnuplot script.

use std::fs;
use std::path::{Path, PathBuf};

use relyap_core::dqr::LyapunovEstimate;
use relyap_core::ivp::Trajectory;

use crate::error::{CliError, Result};
use crate::experiment::{ConvergenceMode, ConvergenceTable, DiagramRow};

/// Shortest round-trip decimal; non-finite values as `nan`, `inf`, `-inf`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v}")
    }
}

struct Table {
    path: PathBuf,
    writer: csv::Writer<fs::File>,
}

impl Table {
    fn create(dir: &Path, name: &str, header: &[String]) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
        let path = dir.join(name);
        let writer = csv::Writer::from_path(&path).map_err(|source| CliError::Csv { path: path.clone(), source })?;
        let mut t = Self { path, writer };
        t.record(header.iter().cloned())?;
        Ok(t)
    }

    fn record<I: IntoIterator<Item = String>>(&mut self, fields: I) -> Result<()> {
        let fields: Vec<String> = fields.into_iter().collect();
        self.writer.write_record(&fields).map_err(|source| CliError::Csv { path: self.path.clone(), source })
    }

    fn finish(mut self) -> Result<PathBuf> {
        self.writer.flush().map_err(|source| CliError::Io { path: self.path.clone(), source })?;
        Ok(self.path)
    }
}

fn numbered(prefix: &str, count: usize) -> impl Iterator<Item = String> + '_ {
    (1..=count).map(move |i| format!("{prefix}{i}"))
}

/// `trajectory.csv`: `t, x_1, ...` including the initial history.
pub fn write_trajectory(dir: &Path, traj: &Trajectory) -> Result<PathBuf> {
    let header: Vec<String> = std::iter::once("t".to_string()).chain(numbered("x_", traj.dim())).collect();
    let mut t = Table::create(dir, "trajectory.csv", &header)?;
    for (time, x) in traj.iter() {
        t.record(std::iter::once(fmt_f64(time)).chain(x.iter().map(|v| fmt_f64(*v))))?;
    }
    t.finish()
}

/// `les.csv` (`index, lambda`, descending) and `history.csv`
/// (`step, t, lambda_1, ...`, each row descending).
pub fn write_lyapunov(dir: &Path, est: &LyapunovEstimate) -> Result<(PathBuf, PathBuf)> {
    let mut t = Table::create(dir, "les.csv", &["index".into(), "lambda".into()])?;
    for (i, v) in est.sorted().iter().enumerate() {
        t.record([(i + 1).to_string(), fmt_f64(*v)])?;
    }
    let les = t.finish()?;

    let m = est.exponents.len();
    let header: Vec<String> = ["step".to_string(), "t".to_string()].into_iter().chain(numbered("lambda_", m)).collect();
    let mut t = Table::create(dir, "history.csv", &header)?;
    for row in &est.history {
        let mut v = row.exponents.clone();
        v.sort_by(|a, b| b.total_cmp(a));
        t.record([row.step.to_string(), fmt_f64(row.t)].into_iter().chain(v.iter().map(|x| fmt_f64(*x))))?;
    }
    Ok((les, t.finish()?))
}

/// `diagram.csv` (`gamma, le1, ...`, sorted by `γ`) and `diagram.gp`.
pub fn write_diagram(dir: &Path, rows: &[DiagramRow]) -> Result<(PathBuf, PathBuf)> {
    let width = rows.iter().map(|r| r.les.len()).max().unwrap_or(0);
    let header: Vec<String> = std::iter::once("gamma".to_string()).chain(numbered("le", width)).collect();
    let mut sorted: Vec<&DiagramRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.gamma.total_cmp(&b.gamma));
    let mut t = Table::create(dir, "diagram.csv", &header)?;
    for r in sorted {
        let cells = (0..width).map(|i| fmt_f64(r.les.get(i).copied().unwrap_or(f64::NAN)));
        t.record(std::iter::once(fmt_f64(r.gamma)).chain(cells))?;
    }
    let csv_path = t.finish()?;

    let script = "\
set datafile separator ','
set datafile missing 'nan'
set key autotitle columnhead
set xlabel 'gamma'
set ylabel 'Lyapunov exponent'
set yrange [-0.2:0.2]
set grid
set terminal pngcairo size 1000,600
set output 'diagram.png'
plot 'diagram.csv' using 1:2 with linespoints pointtype 7 pointsize 0.4 title 'le1', \\
     '' using 1:3 with linespoints pointtype 7 pointsize 0.4 title 'le2', \\
     0 with lines dashtype 2 linecolor 'black' notitle
";
    let gp = dir.join("diagram.gp");
    fs::write(&gp, script).map_err(|source| CliError::Io { path: gp.clone(), source })?;
    Ok((csv_path, gp))
}

/// `converge.csv`: `t_f` or `M` column, then `lambda_1, reference, abs_error`.
pub fn write_convergence(dir: &Path, table: &ConvergenceTable) -> Result<PathBuf> {
    let first = match table.mode {
        ConvergenceMode::FinalTime => "t_f",
        ConvergenceMode::Discretization => "M",
    };
    let header = [first, "lambda_1", "reference", "abs_error"].map(String::from);
    let mut t = Table::create(dir, "converge.csv", &header)?;
    for r in &table.rows {
        t.record([fmt_f64(r.param), fmt_f64(r.dominant), fmt_f64(table.reference), fmt_f64(r.error)])?;
    }
    t.finish()
}
