//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the report is always printed. Pass
//! criterion numbers as arguments (`cargo test --test acceptance -- 3 5`) to
//! run a subset.

mod common;

use std::time::Instant;

use wedgedg::analysis::{assemble_global, bench, convergence_study, spectrum, ConvergenceOptions, SpectrumSummary};
use wedgedg::geometry::wedge_geometry;
use wedgedg::mesh::generate::DiagonalSplit;
use wedgedg::mesh::{sixteen_wedge_mesh, structured_hybrid_box, MeshFamily};
use wedgedg::operators::{
    apply_wedge_derivatives, apply_wedge_lift, build_wedge_operators, storage_report, wedge_storage_budget,
    QuadratureMode, SharedOperators,
};
use wedgedg::reference::ReferenceSet;
use wedgedg::solver::{run, standing_wave, Discretization, FluxConfig, Integrator, RunOptions, SolutionState};

const HS: [f64; 5] = [2.0, 1.0, 0.5, 0.25, 0.125];
const RATE_TOL: f64 = 0.3;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// Final-level errors of the structured runs, reused by the spot check.
#[derive(Default)]
struct Shared {
    structured_finest: [Option<f64>; 4],
}

fn convergence_rates(shared: &mut Shared) -> Outcome {
    let targets = [
        (MeshFamily::Structured, [2.01, 3.15, 3.97]),
        (MeshFamily::Unstructured, [1.72, 2.9, 4.42]),
        (MeshFamily::Arnold, [1.9, 3.13, 3.99]),
    ];
    let opts = ConvergenceOptions::default();
    let mut pass = true;
    let mut cells = Vec::new();
    for (family, want) in targets {
        for n in 1..=3 {
            let rec = match convergence_study(n, family, &HS, &opts) {
                Ok(r) => r,
                Err(e) => {
                    pass = false;
                    cells.push(format!("{} N={n}: error {e}", family.name()));
                    continue;
                }
            };
            let errs: Vec<String> =
                rec.levels.iter().map(|l| l.error.map_or("failed".into(), |e| format!("{e:.3e}"))).collect();
            println!("    {} N={n}: errors [{}] rate {:?}", family.name(), errs.join(", "), rec.rate);
            if family == MeshFamily::Structured {
                shared.structured_finest[n] = rec.levels.last().and_then(|l| l.error);
            }
            let target = want[n - 1];
            let ok = rec.rate.is_some_and(|r| (r - target).abs() <= RATE_TOL);
            pass &= ok;
            cells.push(format!(
                "{} N={n} {}{}",
                family.name(),
                rec.rate.map_or("n/a".into(), |r| format!("{r:.2}")),
                if ok { String::new() } else { format!(" (want {target}±{RATE_TOL})") }
            ));
        }
    }
    outcome(pass, format!("fitted rates: {}", cells.join("; ")))
}

fn error_spot_check(shared: &mut Shared) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (n, reference) in [(2, 6.91e-5), (3, 1.7e-6)] {
        let err = match shared.structured_finest[n] {
            Some(e) => Some(e),
            None => {
                let opts = ConvergenceOptions::default();
                convergence_study(n, MeshFamily::Structured, &HS[2..], &opts)
                    .ok()
                    .and_then(|r| r.levels.last().and_then(|l| l.error))
            }
        };
        let ok = err.is_some_and(|e| e <= 3.0 * reference && e >= reference / 3.0);
        pass &= ok;
        parts.push(format!("N={n} h=0.125 error {} vs {reference:e} (×3)", err.map_or("n/a".into(), |e| format!("{e:.3e}"))));
    }
    outcome(pass, parts.join("; "))
}

fn spectral_stability() -> Outcome {
    let mesh = sixteen_wedge_mesh(0.3, 7).expect("sixteen-wedge mesh");
    let mut pass = true;
    let mut parts = Vec::new();
    for mode in [QuadratureMode::Exact, QuadratureMode::Lumped] {
        for (fname, flux) in [("upwind", FluxConfig::upwind()), ("central", FluxConfig::central())] {
            let disc = Discretization::new(mesh.clone(), 2, mode, flux).expect("discretization");
            let a = assemble_global(&disc).expect("assembly").a;
            let s = SpectrumSummary::new(&spectrum(&a).expect("eigenvalues"));
            let ok = match (mode, fname) {
                (QuadratureMode::Exact, "upwind") => s.max_real <= 1e-10 * s.max_modulus,
                (QuadratureMode::Exact, _) => s.max_abs_real <= 1e-8 * s.max_modulus,
                _ => s.max_real > 0.0,
            };
            pass &= ok;
            parts.push(format!(
                "{mode:?}/{fname} n={} max Re {:.2e} max|Re| {:.2e} max|λ| {:.2e}",
                a.nrows(),
                s.max_real,
                s.max_abs_real,
                s.max_modulus
            ));
        }
    }
    outcome(pass, parts.join("; "))
}

fn energy_identity() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, mesh) in common::suite_meshes() {
        let disc = Discretization::new(mesh, 2, QuadratureMode::Exact, FluxConfig::upwind()).expect("discretization");
        let mut state = SolutionState::from_field(&disc, common::pulse);
        let opts = RunOptions { final_time: 0.5, dt: disc.estimate_dt(0.5), integrator: Integrator::Lserk4, energy_every: 1 };
        match run(&disc, &mut state, &opts, &mut |_, _| Ok(())) {
            Ok(s) => {
                let inc = common::max_energy_increase(&s.energy_log);
                let ok = inc <= 1e-10;
                pass &= ok;
                parts.push(format!("{name} max rise {inc:.1e}"));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{name}: {e}"));
            }
        }
    }
    let mesh = wedgedg::mesh::family_mesh(MeshFamily::Unstructured, 1.0, 2).expect("mesh");
    for integ in [Integrator::Lserk4, Integrator::Ab3] {
        let drift = common::central_drift(mesh.clone(), 2, integ, 0.5, 0.4, 3);
        let rates = [(drift[0] / drift[1]).log2(), (drift[1] / drift[2]).log2()];
        let ok = rates[1] >= integ.order() as f64 - RATE_TOL;
        pass &= ok;
        parts.push(format!(
            "central {integ:?} drift {:.1e}/{:.1e}/{:.1e} observed order {:.2}, {:.2}",
            drift[0], drift[1], drift[2], rates[0], rates[1]
        ));
    }
    outcome(pass, parts.join("; "))
}

fn kronecker_vs_dense() -> Outcome {
    let mut r = common::rng(5);
    let mut worst: f64 = 0.0;
    for n in 1..=4 {
        let refs = ReferenceSet::new(n).expect("reference");
        let shared = SharedOperators::new(&refs);
        for _ in 0..20 {
            let v = common::random_wedge(&mut r);
            let ops = build_wedge_operators(&wedge_geometry(&v, &refs).expect("geometry"), &shared).expect("operators");
            let dense = common::dense_wedge(&v, &refs, common::TRule::Exact);
            let u = common::random_vector(&mut r, refs.wedge.np);
            let mass = ops.tri_mass(&shared).kronecker(&shared.line_mass);
            worst = worst.max(common::rel_err(&common::matvec(&mass, &u), &common::matvec(&dense.mass, &u)));
            let grad = apply_wedge_derivatives(&ops, &shared, &u);
            for d in 0..3 {
                worst = worst.max(common::rel_err(&grad[d], &common::matvec(&dense.derivative(d), &u)));
            }
            let fluxes: Vec<Vec<f64>> =
                (0..5).map(|f| common::random_vector(&mut r, refs.wedge.faces[f].len())).collect();
            let lifted = apply_wedge_lift(&ops, &shared, &shared.lift_profile, &fluxes);
            let mut want = vec![0.0; refs.wedge.np];
            for (f, g) in fluxes.iter().enumerate() {
                for (w, x) in want.iter_mut().zip(common::matvec(&dense.lift(f), g)) {
                    *w += x;
                }
            }
            worst = worst.max(common::rel_err(&lifted, &want));
        }
    }
    outcome(worst <= 1e-11, format!("80 wedges, N=1..4, worst relative deviation {worst:.2e} (≤ 1e-11)"))
}

fn vertical_invariants() -> Outcome {
    let start = Instant::now();
    let refs = ReferenceSet::new(3).expect("reference");
    let mut r = common::rng(6);
    let mut failures = Vec::new();
    for k in 0..100 {
        let v = common::random_wedge(&mut r);
        if let Err(msg) = common::check_vertical_invariants(&v, &refs, 1e-13) {
            failures.push(format!("wedge {k}: {msg}"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = failures.is_empty() && secs < 1.0;
    let detail = if failures.is_empty() {
        format!("100 random wedges, all invariants at 1e-13, {secs:.3} s")
    } else {
        format!("{} failures, first: {}", failures.len(), failures[0])
    };
    outcome(pass, detail)
}

fn storage_budget() -> Outcome {
    let mut r = common::rng(7);
    let mut pass = true;
    let mut parts = Vec::new();
    for n in 1..=9 {
        let refs = ReferenceSet::new(n).expect("reference");
        let shared = SharedOperators::new(&refs);
        let ops = build_wedge_operators(&wedge_geometry(&common::random_wedge(&mut r), &refs).expect("geometry"), &shared)
            .expect("operators");
        let (used, budget) = (ops.stored_floats(), wedge_storage_budget(n));
        pass &= used <= budget;
        parts.push(format!("N={n} {used}/{budget}"));
    }
    // per-tet storage is a fixed number of scalars regardless of mesh size
    let mut tet_sizes = Vec::new();
    for cells in [1, 3] {
        let mesh = structured_hybrid_box(cells, cells, 1, 1, DiagonalSplit::Main).expect("mesh");
        let disc = Discretization::new(mesh, 3, QuadratureMode::Exact, FluxConfig::upwind()).expect("discretization");
        let rep = storage_report(&disc.ops);
        tet_sizes.push(rep.tet_floats);
    }
    pass &= tet_sizes[0] == tet_sizes[1];
    parts.push(format!("tet floats {} on both meshes", tet_sizes[0]));
    outcome(pass, format!("wedge floats/budget: {}", parts.join(", ")))
}

fn conformity() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in 1..=4 {
        let mesh = structured_hybrid_box(3, 3, 2, 2, DiagonalSplit::Main).expect("mesh");
        let disc = Discretization::new(mesh, n, QuadratureMode::Exact, FluxConfig::upwind()).expect("discretization");
        let q = disc.interpolate(|x, m| standing_wave(x, 0.2, m));
        let rep = common::wedge_tet_interfaces(&disc, &q);
        let ok = rep.faces > 0 && rep.node_mismatch <= 1e-10 && rep.jump_flux <= 1e-12;
        pass &= ok;
        parts.push(format!(
            "N={n} {} faces, mismatch {:.1e}·diam, jump flux {:.1e}",
            rep.faces, rep.node_mismatch, rep.jump_flux
        ));
    }
    outcome(pass, parts.join("; "))
}

fn per_dof_trend() -> Outcome {
    let mesh = structured_hybrid_box(4, 4, 2, 2, DiagonalSplit::Main).expect("mesh");
    let mut ratios = Vec::new();
    for n in 2..=5 {
        let disc = Discretization::new(mesh.clone(), n, QuadratureMode::Exact, FluxConfig::upwind()).expect("discretization");
        let b = bench(&disc, 300).expect("bench");
        println!(
            "    N={n}: ns/DOF wedge vol {:.1} surf {:.1}, tet vol {:.1} surf {:.1}",
            b.wedge_volume_ns_per_dof(),
            b.wedge_surface_ns_per_dof(),
            b.tet_volume_ns_per_dof(),
            b.tet_surface_ns_per_dof()
        );
        ratios.push(b.volume_ratio());
    }
    let pass = ratios.windows(2).all(|w| w[1] < w[0]);
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.3}")).collect();
    outcome(pass, format!("wedge/tet volume ns per DOF, N=2..5: {}", shown.join(", ")))
}

fn main() {
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wanted = |k: usize| selected.is_empty() || selected.contains(&k);
    let mut shared = Shared::default();
    let mut failed = 0;
    let mut report = |k: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        if !wanted(k) {
            return;
        }
        let start = Instant::now();
        let o = f();
        let status = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!("{status} [{k}] {name}: {} ({:.1} s)", o.detail, start.elapsed().as_secs_f64());
    };
    report(1, "convergence rates", &mut || convergence_rates(&mut shared));
    report(2, "absolute error spot check", &mut || error_spot_check(&mut shared));
    report(3, "spectral stability", &mut spectral_stability);
    report(4, "energy dissipation", &mut energy_identity);
    report(5, "factored vs dense operators", &mut kronecker_vs_dense);
    report(6, "vertically mapped wedge invariants", &mut vertical_invariants);
    report(7, "storage budget", &mut storage_budget);
    report(8, "wedge-tet conformity", &mut conformity);
    report(9, "per-DOF volume trend", &mut per_dof_trend);
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
