//! Semi-discrete right-hand side, energy behaviour and time stepping.

mod common;

use common::{central_drift, layered_media_mesh, max_energy_increase, pulse, suite_meshes};
use wedgedg::analysis::l2_error;
use wedgedg::mesh::generate::DiagonalSplit;
use wedgedg::mesh::{family_mesh, structured_hybrid_box, Medium, MeshFamily};
use wedgedg::operators::QuadratureMode;
use wedgedg::solver::vtk::snapshot_to_string;
use wedgedg::solver::{
    run, standing_wave, standing_wave_frequency, Discretization, FluxConfig, FluxMode, Integrator, RunOptions,
    SolutionState,
};
use wedgedg::Error;

fn disc(mesh: wedgedg::mesh::HybridMesh, n: usize) -> Discretization {
    Discretization::new(mesh, n, QuadratureMode::Exact, FluxConfig::upwind()).unwrap()
}

/// Max-norm error of the RHS of the interpolated standing wave against its
/// exact time derivative.
fn standing_wave_rhs_error(d: &Discretization) -> f64 {
    let t = 0.37;
    let q = d.interpolate(|x, m| standing_wave(x, t, m));
    let mut rhs = vec![0.0; q.len()];
    d.compute_rhs(&q, t, &mut rhs).unwrap();
    let eps = 1e-6;
    let qp = d.interpolate(|x, m| standing_wave(x, t + eps, m));
    let qm = d.interpolate(|x, m| standing_wave(x, t - eps, m));
    let mut err: f64 = 0.0;
    for i in 0..q.len() {
        err = err.max((rhs[i] - (qp[i] - qm[i]) / (2.0 * eps)).abs());
    }
    err / standing_wave_frequency(Medium::UNIT)
}

#[test]
fn standing_wave_rhs_converges_with_degree() {
    let mesh = structured_hybrid_box(2, 2, 1, 1, DiagonalSplit::Main).unwrap();
    let errs: Vec<f64> = (1..=5).map(|n| standing_wave_rhs_error(&disc(mesh.clone(), n))).collect();
    for w in errs.windows(2) {
        assert!(w[1] < w[0], "RHS error not decreasing with N: {errs:?}");
    }
    assert!(errs[4] < errs[0] / 30.0, "{errs:?}");
}

#[test]
fn zero_state_has_zero_rhs_everywhere() {
    let d = disc(layered_media_mesh(), 2);
    let q = vec![0.0; d.state_len()];
    let mut rhs = vec![1.0; q.len()];
    d.compute_rhs(&q, 0.0, &mut rhs).unwrap();
    assert!(rhs.iter().all(|&x| x == 0.0));
}

#[test]
fn upwind_energy_never_increases() {
    for (name, mesh) in suite_meshes() {
        let d = disc(mesh, 2);
        let mut state = SolutionState::from_field(&d, pulse);
        let opts = RunOptions { final_time: 0.4, dt: d.estimate_dt(0.5), integrator: Integrator::Lserk4, energy_every: 1 };
        let s = run(&d, &mut state, &opts, &mut |_, _| Ok(())).unwrap();
        let inc = max_energy_increase(&s.energy_log);
        assert!(inc <= 1e-10, "{name}: energy rose by {inc:e}");
        assert!(s.final_energy < s.initial_energy, "{name}: no dissipation");
    }
}

#[test]
fn central_energy_drift_shrinks_at_integrator_order() {
    let mesh = family_mesh(MeshFamily::Unstructured, 1.0, 2).unwrap();
    for integ in [Integrator::Lserk4, Integrator::Ab3] {
        let drift = central_drift(mesh.clone(), 2, integ, 0.5, 0.4, 3);
        let rate = (drift[1] / drift[2]).log2();
        assert!(rate >= integ.order() as f64 - 0.3, "{integ:?}: drift {drift:?}, rate {rate}");
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let d = disc(structured_hybrid_box(3, 3, 2, 2, DiagonalSplit::Anti).unwrap(), 3);
    let go = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let mut state = SolutionState::from_field(&d, pulse);
            let opts = RunOptions { final_time: 0.05, dt: d.estimate_dt(0.5), integrator: Integrator::Lserk4, energy_every: 0 };
            run(&d, &mut state, &opts, &mut |_, _| Ok(())).unwrap();
            state.q
        })
    };
    let a = go(1);
    let b = go(4);
    assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
}

#[test]
fn step_size_scales_with_h_and_degree() {
    let coarse = disc(family_mesh(MeshFamily::Structured, 1.0, 1).unwrap(), 2);
    let fine = disc(family_mesh(MeshFamily::Structured, 0.5, 1).unwrap(), 2);
    assert!((coarse.estimate_dt(0.5) / fine.estimate_dt(0.5) - 2.0).abs() < 1e-12);
    let high = disc(family_mesh(MeshFamily::Structured, 1.0, 1).unwrap(), 5);
    assert!((coarse.estimate_dt(0.5) / high.estimate_dt(0.5) - 4.0).abs() < 1e-12);
    assert!((coarse.estimate_dt(1.0) / coarse.estimate_dt(0.5) - 2.0).abs() < 1e-12);
    // faster material shrinks the step
    let mut fast = family_mesh(MeshFamily::Structured, 1.0, 1).unwrap();
    fast.media[3] = Medium::new(1.0, 9.0);
    assert!((coarse.estimate_dt(0.5) / disc(fast, 2).estimate_dt(0.5) - 3.0).abs() < 1e-12);
}

#[test]
fn final_time_is_hit_exactly() {
    let d = disc(family_mesh(MeshFamily::Structured, 2.0, 1).unwrap(), 1);
    let mut state = SolutionState::zeros(&d);
    let opts = RunOptions { final_time: 0.3, dt: 0.07, integrator: Integrator::Ab3, energy_every: 0 };
    let s = run(&d, &mut state, &opts, &mut |_, _| Ok(())).unwrap();
    assert_eq!(s.steps, 5);
    assert!((state.time - 0.3).abs() < 1e-15);
}

#[test]
fn standing_wave_error_converges_on_refinement() {
    let err = |h: f64| {
        let d = disc(family_mesh(MeshFamily::Structured, h, 1).unwrap(), 2);
        let mut state = SolutionState::from_field(&d, |x, m| standing_wave(x, 0.0, m));
        let opts = RunOptions { final_time: 0.25, dt: d.estimate_dt(0.5), integrator: Integrator::Lserk4, energy_every: 0 };
        run(&d, &mut state, &opts, &mut |_, _| Ok(())).unwrap();
        l2_error(&d, &state.q, |x| standing_wave(x, 0.25, Medium::UNIT)[0])
    };
    let (e1, e2) = (err(1.0), err(0.5));
    assert!((e1 / e2).log2() > 2.5, "{e1:e} -> {e2:e}");
}

#[test]
fn lumped_scheme_runs_and_approximates() {
    let mesh = family_mesh(MeshFamily::Structured, 0.5, 1).unwrap();
    let d = Discretization::new(mesh, 2, QuadratureMode::Lumped, FluxConfig::upwind()).unwrap();
    let mut state = SolutionState::from_field(&d, |x, m| standing_wave(x, 0.0, m));
    let opts = RunOptions { final_time: 0.25, dt: d.estimate_dt(0.5), integrator: Integrator::Lserk4, energy_every: 0 };
    run(&d, &mut state, &opts, &mut |_, _| Ok(())).unwrap();
    let e = l2_error(&d, &state.q, |x| standing_wave(x, 0.25, Medium::UNIT)[0]);
    assert!(e < 2e-2, "{e}");
}

#[test]
fn oversized_steps_trip_the_watchdog() {
    let d = disc(family_mesh(MeshFamily::Structured, 0.5, 1).unwrap(), 2);
    let mut state = SolutionState::from_field(&d, pulse);
    let opts = RunOptions { final_time: 20.0, dt: 20.0 * d.estimate_dt(1.0), integrator: Integrator::Lserk4, energy_every: 0 };
    let err = run(&d, &mut state, &opts, &mut |_, _| Ok(())).unwrap_err();
    assert!(err.is_numerical_instability(), "{err}");
}

#[test]
fn non_finite_state_is_reported_with_element() {
    let d = disc(family_mesh(MeshFamily::Structured, 1.0, 1).unwrap(), 1);
    let mut q = vec![0.0; d.state_len()];
    let e = 5;
    q[d.offset(e) + 2] = f64::NAN;
    let mut rhs = vec![0.0; q.len()];
    match d.compute_rhs(&q, 0.0, &mut rhs) {
        Err(Error::NonFinite { element, .. }) => assert!(element <= e),
        other => panic!("expected NonFinite, got {other:?}"),
    }
}

#[test]
fn negative_penalties_are_rejected() {
    assert!(FluxConfig::new(FluxMode::Custom { tau_p: -1.0, tau_u: 0.0 }).is_err());
    assert!(FluxConfig::new(FluxMode::Custom { tau_p: 1.0, tau_u: f64::NAN }).is_err());
    assert!("upwind".parse::<FluxMode>().is_ok() && "sideways".parse::<FluxMode>().is_err());
}

#[test]
fn upwind_penalties_use_impedance_averages() {
    let (a, b) = (Medium::new(2.0, 8.0), Medium::new(1.0, 1.0));
    let (tp, tu) = FluxConfig::upwind().penalties(a, b);
    let z = 0.5 * (a.impedance() + b.impedance());
    assert!((tp - 1.0 / z).abs() < 1e-15 && (tu - z).abs() < 1e-15);
    assert_eq!(FluxConfig::central().penalties(a, b), (0.0, 0.0));
}

#[test]
fn vtk_snapshot_is_well_formed() {
    let n = 2;
    let d = disc(structured_hybrid_box(1, 1, 1, 1, DiagonalSplit::Main).unwrap(), n);
    let q = d.interpolate(|x, m| standing_wave(x, 0.0, m));
    let text = snapshot_to_string(&d, &q, 0.0);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# vtk DataFile Version"));
    assert!(text.contains("DATASET UNSTRUCTURED_GRID"));
    let npts: usize = lines.iter().find(|l| l.starts_with("POINTS")).unwrap().split_whitespace().nth(1).unwrap().parse().unwrap();
    assert_eq!(npts, d.num_nodes());
    let ncells: usize = lines.iter().find(|l| l.starts_with("CELLS")).unwrap().split_whitespace().nth(1).unwrap().parse().unwrap();
    let expected = d.mesh.wedges.len() * n * n * n + d.mesh.tets.len() * n * n * n;
    assert_eq!(ncells, expected);
    let types_at = lines.iter().position(|l| l.starts_with("CELL_TYPES")).unwrap();
    let types: Vec<&str> = lines[types_at + 1..types_at + 1 + ncells].to_vec();
    assert!(types.iter().all(|t| *t == "13" || *t == "10"));
    for name in ["SCALARS p", "SCALARS u_x", "SCALARS u_y", "SCALARS u_z"] {
        assert!(text.contains(name), "missing {name}");
    }
}
