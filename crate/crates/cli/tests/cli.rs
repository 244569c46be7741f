use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn relyap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relyap")).args(args).output().expect("binary runs")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn num(s: &str) -> f64 {
    match s {
        "nan" => f64::NAN,
        "-inf" => f64::NEG_INFINITY,
        "inf" => f64::INFINITY,
        _ => s.parse().unwrap(),
    }
}

#[test]
fn solve_writes_history_and_solution() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = relyap(&["solve", "--gamma", "4", "--tf", "30", "--r", "10", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&dir.path().join("trajectory.csv"));
    assert_eq!(header, ["t", "x_1"]);
    // 30 history samples on [-3, 0), then 301 computed samples on [0, 30]
    assert_eq!(rows.len(), 30 + 301);
    assert_eq!(num(&rows[0][0]), -3.0);
    assert_eq!(num(&rows[0][1]), 0.1);
    assert_eq!(num(&rows[30][0]), 0.0);
    assert!((num(&rows[30][1]) - 0.36).abs() < 1e-12);
    assert_eq!(num(&rows.last().unwrap()[0]), 30.0);
}

#[test]
fn lyapunov_writes_sorted_exponents_and_history() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = relyap(&["lyapunov", "--gamma", "3", "--M", "8", "--N", "8", "--tf", "60", "--out", out]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("lambda_1 = "));
    let (header, rows) = read_csv(&dir.path().join("les.csv"));
    assert_eq!(header, ["index", "lambda"]);
    assert_eq!(rows.len(), 9);
    let les: Vec<f64> = rows.iter().map(|r| num(&r[1])).collect();
    assert!(les.windows(2).all(|w| w[0] >= w[1]));
    assert!(les[0] < 0.0);

    let (header, rows) = read_csv(&dir.path().join("history.csv"));
    assert_eq!(header.len(), 2 + 9);
    assert_eq!(&header[..3], ["step", "t", "lambda_1"]);
    assert_eq!(rows.len(), 20);
    assert_eq!(num(&rows[19][1]), 60.0);
    let last: Vec<f64> = rows[19][2..].iter().map(|s| num(s)).collect();
    assert_eq!(last, les);
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let out = dir.path().join("out");
    fs::write(
        &cfg,
        format!(r#"{{"gamma": 0.5, "M": 6, "N": 6, "t_f": 30, "seed": 3, "output_dir": {:?}}}"#, out.to_str().unwrap()),
    )
    .unwrap();
    let o = relyap(&["lyapunov", "--config", cfg.to_str().unwrap(), "--M", "7"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, rows) = read_csv(&out.join("les.csv"));
    assert_eq!(rows.len(), 8);
}

#[test]
fn configuration_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let bad_json = dir.path().join("bad.json");
    fs::write(&bad_json, r#"{"gamma": 4, "delta": 1}"#).unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["lyapunov", "--gamma", "4", "--M", "4", "--N", "8", "--out", out],
        vec!["lyapunov", "--gamma", "4", "--tf", "2", "--out", out],
        vec!["lyapunov", "--gamma", "-1", "--out", out],
        vec!["lyapunov", "--gamma", "3:4:0.5", "--out", out],
        vec!["lyapunov", "--out", out],
        vec!["diagram", "--gamma", "4:6:0.5", "--out", out],
        vec!["diagram", "--gamma", "4:4.5:0", "--out", out],
        vec!["lyapunov", "--config", bad_json.to_str().unwrap()],
        vec!["lyapunov", "--config", "/nonexistent/run.json"],
        vec!["converge", "--gamma", "0.5", "--mode", "xyz"],
        vec!["frobnicate"],
    ];
    for args in cases {
        let o = relyap(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn numeric_failures_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = relyap(&["lyapunov", "--gamma", "4", "--phi0", "1e200", "--tf", "30", "--out", out]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("numeric failure"));
}

#[test]
fn diagram_rows_cover_grid_and_record_failures() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = relyap(&["diagram", "--gamma", "4.5:4.7:0.05", "--M", "6", "--N", "6", "--tf", "60", "--out", out]);
    assert!(o.status.success());
    let (header, rows) = read_csv(&dir.path().join("diagram.csv"));
    assert_eq!(header.len(), 1 + 7);
    assert_eq!(&header[..3], ["gamma", "le1", "le2"]);
    let gammas: Vec<f64> = rows.iter().map(|r| num(&r[0])).collect();
    assert_eq!(gammas, [4.5, 4.55, 4.6, 4.65, 4.7]);
    assert!(rows.iter().all(|r| r.len() == header.len()));
    let script = fs::read_to_string(dir.path().join("diagram.gp")).unwrap();
    assert!(script.contains("'diagram.csv' using 1:2"));

    let o = relyap(&["diagram", "--gamma", "4:4.1:0.05", "--phi0", "1e200", "--tf", "30", "--out", out]);
    assert!(o.status.success());
    let (_, rows) = read_csv(&dir.path().join("diagram.csv"));
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[1..].iter().all(|v| v == "nan")));
}

#[test]
fn diagram_output_is_deterministic() {
    let run = |jobs: &str| {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        let o = relyap(&[
            "diagram",
            "--gamma",
            "3.0:3.3:0.1",
            "--M",
            "5",
            "--N",
            "5",
            "--tf",
            "45",
            "--seed",
            "9",
            "--jobs",
            jobs,
            "--out",
            out,
        ]);
        assert!(o.status.success());
        fs::read(dir.path().join("diagram.csv")).unwrap()
    };
    let a = run("1");
    assert_eq!(a, run("1"));
    assert_eq!(a, run("3"));
}

#[test]
fn diagram_presets_and_regimes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = relyap(&["diagram", "--gamma", "hopf", "--out", out]);
    assert!(o.status.success());
    let (_, rows) = read_csv(&dir.path().join("diagram.csv"));
    assert_eq!(rows.len(), 16);
    let le1 = |g: f64| num(&rows.iter().find(|r| num(&r[0]) == g).unwrap()[1]);
    // attracting equilibrium below the Hopf point, trivial exponent above
    assert!(le1(3.5) < -0.01);
    assert!(le1(3.65).abs() < 5e-3);

    let o = relyap(&["diagram", "--gamma", "4.6", "--out", out]);
    assert!(o.status.success());
    let (_, rows) = read_csv(&dir.path().join("diagram.csv"));
    assert!(num(&rows[0][1]) > 0.0);
}

#[test]
fn converge_final_time_errors_decrease() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = relyap(&["converge", "--gamma", "0.5", "--mode", "tf", "--out", out]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("characteristic-root"));
    let (header, rows) = read_csv(&dir.path().join("converge.csv"));
    assert_eq!(header, ["t_f", "lambda_1", "reference", "abs_error"]);
    let tf: Vec<f64> = rows.iter().map(|r| num(&r[0])).collect();
    assert_eq!(tf, [125.0, 250.0, 500.0, 1000.0]);
    let err: Vec<f64> = rows.iter().map(|r| num(&r[3])).collect();
    assert!(err.windows(2).all(|w| w[1] < w[0]), "{err:?}");
}

#[test]
fn converge_discretization_uses_finest_run_without_equilibrium() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = relyap(&["converge", "--gamma", "4", "--mode", "MN", "--mn-list", "6,4", "--tf", "90", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("finest-run"));
    let (header, rows) = read_csv(&dir.path().join("converge.csv"));
    assert_eq!(header[0], "M");
    assert_eq!(num(&rows[0][0]), 4.0);
    assert_eq!(num(&rows[1][3]), 0.0);
}
