mod common;

use kcontract::certify::nob_pipeline;
use kcontract::compound::{add_compound, mult_compound};
use kcontract::matrix::{max_abs, Matrix, Vector};
use kcontract::measures::Norm;
use kcontract::model::{BoxDomain, ControlledModel, OutputMap, SerialPair, VectorFieldModel};
use kcontract::models::{self, lti_model};
use kcontract::sampling::{uniform_points, SampleSpec};
use kcontract::simulate::{
    cics_probe, classify, detect_period, integrate, DetectionSettings, SolverSettings, Verdict,
};
use kcontract::Error;
use std::f64::consts::TAU;

fn damped_oscillator() -> Matrix {
    Matrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, -0.1])
}

#[test]
fn fixed_step_scheme_is_fifth_order() {
    let a = damped_oscillator();
    let m = lti_model("osc", a.clone()).unwrap();
    let x0 = Vector::from_vec(vec![1.0, 0.0]);
    let exact = (a * 2.0).exp() * &x0;
    let errs: Vec<f64> = [0.2, 0.1, 0.05]
        .iter()
        .map(|&h| {
            let traj = integrate(&m, &x0, 0.0, 2.0, &SolverSettings::default().fixed(h)).unwrap();
            (traj.final_state() - &exact).amax()
        })
        .collect();
    for w in errs.windows(2) {
        // halving h divides a fifth-order global error by about 32
        let ratio = w[0] / w[1];
        assert!(ratio >= 16.0, "ratio {ratio} from {errs:?}");
    }
}

#[test]
fn adaptive_error_tracks_the_tolerance() {
    let a = damped_oscillator();
    let m = lti_model("osc", a.clone()).unwrap();
    let x0 = Vector::from_vec(vec![1.0, 0.0]);
    let exact = (a * 10.0).exp() * &x0;
    let loose = integrate(&m, &x0, 0.0, 10.0, &SolverSettings::default()).unwrap();
    let tight = integrate(&m, &x0, 0.0, 10.0, &SolverSettings::precise()).unwrap();
    let e_loose = (loose.final_state() - &exact).amax();
    let e_tight = (tight.final_state() - &exact).amax();
    assert!(e_loose <= 1e-6, "{e_loose:e}");
    assert!(e_tight <= 1e-9, "{e_tight:e}");
    assert!(tight.len() > loose.len());
}

#[test]
fn compound_of_the_flow_solves_the_compound_equation() {
    // Ψ(t) = Φ(t)^(k) with Φ(t) = exp(tA) satisfies Ψ' = A^[k] Ψ, Ψ(0) = I
    let mut rng = common::rng(41);
    for trial in 0..6 {
        let n = 3 + trial % 2;
        let a = common::random_matrix(&mut rng, n, n, 0.5);
        for k in 1..=n {
            let ak = add_compound(&a, k).unwrap();
            let dim = ak.nrows();
            let m = lti_model("compound", ak).unwrap();
            for &t in &[0.1, 1.0] {
                let want = mult_compound(&(&a * t).exp(), k).unwrap();
                let mut got = Matrix::zeros(dim, dim);
                for c in 0..dim {
                    let e = Vector::from_fn(dim, |i, _| if i == c { 1.0 } else { 0.0 });
                    let traj = integrate(&m, &e, 0.0, t, &SolverSettings::precise()).unwrap();
                    got.set_column(c, &traj.final_state());
                }
                let err = max_abs(&(got - want));
                assert!(err <= 1e-6, "n={n} k={k} t={t}: {err:e}");
            }
        }
    }
}

#[test]
fn sin_clock_matches_its_closed_form() {
    let m = models::build_default("sin-clock").unwrap().model;
    for x0 in [[0.0, 1.0], [2.0, -3.0], [-1.5, 0.25]] {
        let traj = integrate(
            &m,
            &Vector::from_row_slice(&x0),
            0.0,
            TAU,
            &SolverSettings::default(),
        )
        .unwrap();
        for &t in &[1.0, 3.0, TAU] {
            let x = traj.interpolate(t);
            assert!((x[0] - (x0[0] + 1.0 - t.cos())).abs() <= 1e-6);
            assert!((x[1] - x0[1] * (-t).exp()).abs() <= 1e-6);
        }
    }
}

#[test]
fn equilibrium_takes_precedence_over_period() {
    // a settled trajectory is trivially periodic for every lag
    let m = lti_model("decay", Matrix::identity(2, 2) * -1.0).unwrap();
    let traj = integrate(
        &m,
        &Vector::from_vec(vec![1.0, -1.0]),
        0.0,
        60.0,
        &SolverSettings::default(),
    )
    .unwrap();
    let r = classify(&traj, &m, &DetectionSettings::default()).unwrap();
    assert_eq!(r.verdict, Verdict::ConvergedToEquilibrium);
    assert!(r.period.is_none());
    let eq = r.equilibrium.unwrap();
    assert!(eq.iter().all(|v| v.abs() <= 1e-6));
    let alone = detect_period(&traj, &DetectionSettings::default()).unwrap();
    assert_ne!(alone.verdict, Verdict::Periodic);
}

#[test]
fn nob_certified_models_show_no_periodic_orbits() {
    let detection = DetectionSettings::default();
    let spec = SampleSpec::default().with_counts(5, 100);
    for name in ["three-agents", "two-agent-3d", "laplacian-consensus"] {
        let b = models::build_default(name).unwrap();
        let pair = b.known_pair.as_ref().unwrap();
        let report = nob_pipeline(&b.model, pair, Norm::L2, &spec, 1e-6).unwrap();
        assert!(report.passed, "{name}");
        for x0 in uniform_points(b.model.domain(), 20, 7) {
            let traj = integrate(&b.model, &x0, 0.0, 200.0, &SolverSettings::default()).unwrap();
            let r = classify(&traj, &b.model, &detection).unwrap();
            assert_ne!(
                r.verdict,
                Verdict::Periodic,
                "{name} from {:?}",
                x0.as_slice()
            );
        }
    }
}

fn pendulum() -> VectorFieldModel {
    VectorFieldModel::new("pendulum", BoxDomain::cube(2, 10.0), |_, x| {
        Vector::from_vec(vec![x[1], -x[0].sin() - 0.5 * x[1]])
    })
    .with_jacobian(|_, x| Matrix::from_row_slice(2, 2, &[0.0, 1.0, -x[0].cos(), -0.5]))
}

fn relay(gain: f64) -> ControlledModel {
    ControlledModel::new(
        "relay",
        BoxDomain::cube(1, 10.0),
        1,
        move |_, x, u| Vector::from_element(1, -gain * x[0] + u[0]),
        move |_, _, _| Matrix::from_element(1, 1, -gain),
        |_, _, _| Matrix::from_element(1, 1, 1.0),
    )
}

fn first_coordinate() -> OutputMap {
    OutputMap::linear(Matrix::from_row_slice(1, 2, &[1.0, 0.0]))
}

#[test]
fn converging_input_probe_on_a_contracting_cascade() {
    let pair = SerialPair::new(pendulum(), relay(1.0), first_coordinate()).unwrap();
    let mut x0s = uniform_points(&BoxDomain::cube(3, 2.0), 10, 3);
    x0s.push(Vector::zeros(3));
    let summary = cics_probe(
        &pair,
        &x0s,
        120.0,
        &SolverSettings::default(),
        &DetectionSettings::default(),
    )
    .unwrap();
    assert_eq!(summary.total, 11);
    assert_eq!(summary.converged, 11);
}

#[test]
fn converging_input_probe_flags_a_marginal_downstream() {
    // x2' = u integrates the upstream equilibrium value forever
    let upstream = VectorFieldModel::new("shifted", BoxDomain::cube(1, 10.0), |_, x| {
        Vector::from_element(1, 1.0 - x[0])
    })
    .with_jacobian(|_, _| Matrix::from_element(1, 1, -1.0));
    let output = OutputMap::linear(Matrix::identity(1, 1));
    let pair = SerialPair::new(upstream, relay(0.0), output).unwrap();
    let x0s = vec![Vector::zeros(2), Vector::from_vec(vec![2.0, 1.0])];
    let summary = cics_probe(
        &pair,
        &x0s,
        40.0,
        &SolverSettings::default(),
        &DetectionSettings::default(),
    )
    .unwrap();
    assert_eq!(summary.total, 2);
    assert!(summary.converged < summary.total);
}

#[test]
fn converging_input_probe_rejects_forced_upstream() {
    let clock = models::build_default("sin-clock").unwrap().model;
    let output = OutputMap::linear(Matrix::from_row_slice(1, 2, &[0.0, 1.0]));
    let pair = SerialPair::new(clock, relay(1.0), output).unwrap();
    let r = cics_probe(
        &pair,
        &[Vector::zeros(3)],
        10.0,
        &SolverSettings::default(),
        &DetectionSettings::default(),
    );
    assert!(matches!(r, Err(Error::Precondition(_))));
}

#[test]
fn trajectory_csv_has_one_row_per_step() {
    let m = models::build_default("two-agent-3d").unwrap().model;
    let traj = integrate(
        &m,
        &Vector::from_vec(vec![1.0, -2.0, 0.5]),
        0.0,
        5.0,
        &SolverSettings::default(),
    )
    .unwrap();
    let mut buf = Vec::new();
    traj.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x1,x2,x3"));
    assert_eq!(lines.count(), traj.len());
}
