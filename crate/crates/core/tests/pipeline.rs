use relyap_core::ivp::solve_re;
use relyap_core::model::{equilibria, linearize, quad_re, Kernel};
use relyap_core::pipeline::{autonomous_operator, lyapunov_exponents, nontrivial_equilibrium_les, RunParams};
use relyap_core::spectral::{le_from_eigs, operator_eigs};

#[test]
fn solution_settles_on_stable_equilibrium() {
    let traj = solve_re(&quad_re(3.0).unwrap(), &[0.1], 200.0, 40).unwrap();
    let mut x = [0.0];
    traj.eval(200.0, &mut x).unwrap();
    assert!((x[0] - equilibria(3.0).nontrivial).abs() < 1e-8);
}

#[test]
fn kernel_along_solution_is_pointwise_derivative() {
    let model = quad_re(4.0).unwrap();
    let traj = solve_re(&model, &[0.1], 40.0, 40).unwrap();
    let kernel = linearize(&model, &traj).unwrap();
    let (mut c, mut x) = ([0.0], [0.0]);
    for &(t, theta) in &[(10.0, -3.0), (10.0, -1.0), (17.3, -2.2), (33.0, -1.5)] {
        kernel.eval(t, theta, &mut c).unwrap();
        traj.eval(t + theta, &mut x).unwrap();
        assert!((c[0] - 2.0 * (1.0 - 2.0 * x[0])).abs() < 1e-12);
    }
    kernel.eval(10.0, -0.5, &mut c).unwrap();
    assert_eq!(c[0], 0.0);
}

#[test]
fn qr_iteration_agrees_with_spectrum_at_equilibria() {
    // trivial equilibrium: the kernel is autonomous along the solution
    let est = lyapunov_exponents(&RunParams { gamma: 0.5, ..RunParams::default() }).unwrap();
    let spec = le_from_eigs(&operator_eigs(&autonomous_operator(0.25, 16, 16).unwrap().matrix).unwrap(), 3.0);
    assert!((est.dominant() - spec[0]).abs() < 2e-3);

    // nontrivial equilibrium, reached after a transient
    let est = lyapunov_exponents(&RunParams { gamma: 3.0, ..RunParams::default() }).unwrap();
    let spec = nontrivial_equilibrium_les(3.0, 16, 16).unwrap();
    assert!(est.dominant() < 0.0);
    assert!((est.dominant() - spec[0]).abs() < 2e-3);
}

#[test]
fn longer_runs_shrink_the_oracle_gap() {
    let p = RunParams { gamma: 0.5, ..RunParams::default() };
    let est = lyapunov_exponents(&p).unwrap();
    // real characteristic root for c = 0.25, from bisection
    let root = -0.337_137_416_386_532_6;
    let at = |t: f64| est.history.iter().find(|r| (r.t - t).abs() < 1.5).unwrap().exponents[0];
    assert!((at(150.0) - root).abs() > (at(999.0) - root).abs());
}
