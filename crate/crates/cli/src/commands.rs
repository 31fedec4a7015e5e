//! Subcommand implementations.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use wedgedg::analysis::{
    assemble_global, bench, convergence_study, l2_error, spectrum, ConvergenceOptions, ConvergenceRecord,
    SpectrumSummary,
};
use wedgedg::geometry::{compute_geometry, ElementGeometry};
use wedgedg::mesh::{save_mesh, HybridMesh, MeshFamily};
use wedgedg::operators::{storage_report, QuadratureMode};
use wedgedg::reference::ReferenceSet;
use wedgedg::solver::vtk::write_snapshot;
use wedgedg::solver::{gaussian_pulse, run, standing_wave, Discretization, RunOptions, SolutionState};

use crate::config::{self, BenchConfig, ConvergeConfig, InitialCondition, MeshConfig, RunConfig, SpectrumConfig};
use crate::output::{ensure_dir, f17, write_csv, write_summary};

fn base_dir(config: &Path) -> PathBuf {
    config.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn output_dir(override_dir: Option<&Path>, configured: &Path, base: &Path) -> PathBuf {
    match override_dir {
        Some(d) => d.to_path_buf(),
        None if configured.is_absolute() => configured.to_path_buf(),
        None => base.join(configured),
    }
}

pub fn cmd_run(path: &Path, out: Option<&Path>) -> Result<()> {
    let cfg: RunConfig = config::load(path)?;
    let settings = cfg.validate()?;
    let base = base_dir(path);
    let out = output_dir(out, &cfg.output, &base);
    ensure_dir(&out)?;
    let mesh = config::build_mesh(&cfg.mesh, cfg.medium, &base, cfg.seed)?;
    let disc = Discretization::new(mesh, cfg.degree, settings.quadrature, settings.flux)?;
    let init = cfg.initial.clone();
    let mut state = SolutionState::from_field(&disc, |x, m| match init {
        InitialCondition::StandingWave => standing_wave(x, 0.0, m),
        InitialCondition::Gaussian { center, width } => gaussian_pulse(x, center, width),
    });
    let dt = cfg.dt.unwrap_or_else(|| disc.estimate_dt(cfg.cfl));
    let opts = RunOptions {
        final_time: cfg.final_time,
        dt,
        integrator: settings.integrator,
        energy_every: cfg.energy_every,
    };
    log::info!(
        "run: {} wedges, {} tets, N = {}, {} unknowns",
        disc.mesh.wedges.len(),
        disc.mesh.tets.len(),
        cfg.degree,
        disc.state_len()
    );
    let snapshot = |n: usize, s: &SolutionState| -> wedgedg::Result<()> {
        write_snapshot(&disc, &s.q, s.time, &out.join(format!("snapshot_{n:06}.vtk")))
    };
    if cfg.snapshot_every > 0 {
        snapshot(0, &state)?;
    }
    let every = cfg.snapshot_every;
    let summary = run(&disc, &mut state, &opts, &mut |n, s| {
        if every > 0 && n % every == 0 {
            snapshot(n, s)?;
        }
        Ok(())
    })?;

    let rows: Vec<Vec<String>> = summary.energy_log.iter().map(|(t, e)| vec![f17(*t), f17(*e)]).collect();
    write_csv(&out.join("energy.csv"), &["time", "energy"], &rows)?;
    let storage = storage_report(&disc.ops);
    let mut entries = vec![
        ("degree", cfg.degree.to_string()),
        ("wedges", disc.mesh.wedges.len().to_string()),
        ("tets", disc.mesh.tets.len().to_string()),
        ("unknowns", disc.state_len().to_string()),
        ("steps", summary.steps.to_string()),
        ("dt", f17(summary.dt)),
        ("final_time", f17(state.time)),
        ("initial_energy", f17(summary.initial_energy)),
        ("final_energy", f17(summary.final_energy)),
        ("stored_floats", storage.total.to_string()),
        ("wall_seconds", f17(summary.wall_seconds)),
    ];
    if cfg.initial == InitialCondition::StandingWave && disc.mesh.media.iter().all(|m| *m == disc.mesh.media[0]) {
        let t = state.time;
        let medium = disc.mesh.media[0];
        let err = l2_error(&disc, &state.q, |x| standing_wave(x, t, medium)[0]);
        entries.push(("l2_pressure_error", f17(err)));
    }
    write_summary(&out.join("summary.txt"), &entries)?;
    println!(
        "{} steps of dt = {:.6e}; energy {:.6e} -> {:.6e}; output in {}",
        summary.steps,
        summary.dt,
        summary.initial_energy,
        summary.final_energy,
        out.display()
    );
    Ok(())
}

/// Rate table: one row per degree, one column per family.
fn rate_table(records: &[ConvergenceRecord], families: &[MeshFamily], degrees: &[usize]) -> String {
    let mut s = format!("{:>4}", "N");
    for f in families {
        s.push_str(&format!(" {:>14}", f.name()));
    }
    s.push('\n');
    for &n in degrees {
        s.push_str(&format!("{n:>4}"));
        for f in families {
            let cell = records
                .iter()
                .find(|r| r.family == *f && r.degree == n)
                .map(|r| match (r.rate, r.levels.iter().any(|l| l.failure.is_some())) {
                    (_, true) => "unstable".to_string(),
                    (Some(rate), false) => format!("{rate:.2}"),
                    (None, false) => "n/a".to_string(),
                })
                .unwrap_or_default();
            s.push_str(&format!(" {cell:>14}"));
        }
        s.push('\n');
    }
    s
}

pub fn cmd_converge(path: &Path, out: Option<&Path>) -> Result<()> {
    let cfg: ConvergeConfig = config::load(path)?;
    let (families, flux, integrator) = cfg.validate()?;
    let out = output_dir(out, &cfg.output, &base_dir(path));
    ensure_dir(&out)?;
    let opts = ConvergenceOptions { final_time: cfg.final_time, cfl: cfg.cfl, integrator, flux, seed: cfg.seed };
    let mut records = Vec::new();
    let mut rows = Vec::new();
    for &family in &families {
        for &n in &cfg.degrees {
            let rec = convergence_study(n, family, &cfg.h, &opts)?;
            for l in &rec.levels {
                if let Some(msg) = &l.failure {
                    log::warn!("{} N={n} h={}: unstable ({msg})", family.name(), l.h);
                }
                rows.push(vec![
                    family.name().to_string(),
                    n.to_string(),
                    f17(l.h),
                    l.elements.to_string(),
                    l.dofs.to_string(),
                    l.steps.to_string(),
                    l.error.map(f17).unwrap_or_default(),
                    rec.rate.map(f17).unwrap_or_default(),
                    l.failure.clone().map(|m| format!("\"{}\"", m.replace('"', "'"))).unwrap_or_default(),
                ]);
            }
            records.push(rec);
        }
    }
    write_csv(
        &out.join("convergence.csv"),
        &["family", "degree", "h", "elements", "unknowns", "steps", "l2_error", "rate", "failure"],
        &rows,
    )?;
    print!("{}", rate_table(&records, &families, &cfg.degrees));
    Ok(())
}

pub fn cmd_spectrum(path: &Path, out: Option<&Path>) -> Result<()> {
    let cfg: SpectrumConfig = config::load(path)?;
    let (flux, mode) = cfg.validate()?;
    let base = base_dir(path);
    let out = output_dir(out, &cfg.output, &base);
    ensure_dir(&out)?;
    let mesh = config::build_mesh(&cfg.mesh, cfg.medium, &base, cfg.seed)?;
    let disc = Discretization::new(mesh, cfg.degree, mode, flux)?;
    let global = assemble_global(&disc)?;
    let ev = spectrum(&global.a)?;
    let rows: Vec<Vec<String>> = ev.iter().map(|z| vec![f17(z.re), f17(z.im)]).collect();
    write_csv(&out.join("spectrum.csv"), &["re", "im"], &rows)?;
    let s = SpectrumSummary::new(&ev);
    let verdict = if s.is_stable(cfg.tolerance) { "STABLE" } else { "UNSTABLE" };
    println!(
        "{verdict}: max Re = {:.6e}, max |Re| = {:.6e}, max |lambda| = {:.6e} ({} eigenvalues, {:?} quadrature)",
        s.max_real,
        s.max_abs_real,
        s.max_modulus,
        ev.len(),
        mode
    );
    Ok(())
}

fn jacobian_range(mesh: &HybridMesh, refs: &ReferenceSet) -> Result<(f64, f64)> {
    let geom = compute_geometry(mesh, refs)?;
    let mut range = (f64::INFINITY, f64::NEG_INFINITY);
    for g in &geom {
        let js: Vec<f64> = match g {
            ElementGeometry::Wedge(w) => w.j_vertex.to_vec(),
            ElementGeometry::Tet(t) => vec![t.j],
        };
        for j in js {
            range = (range.0.min(j), range.1.max(j));
        }
    }
    Ok(range)
}

pub fn cmd_mesh(path: &Path, output: Option<&Path>) -> Result<()> {
    let cfg: MeshConfig = config::load(path)?;
    let base = base_dir(path);
    let target = output_dir(output, &cfg.output, &base);
    let mesh = config::build_mesh(&cfg.mesh, cfg.medium, &base, cfg.seed)?;
    let refs = ReferenceSet::new(1)?;
    let (jmin, jmax) = jacobian_range(&mesh, &refs)?;
    if let Some(dir) = target.parent().filter(|d| !d.as_os_str().is_empty()) {
        ensure_dir(dir)?;
    }
    save_mesh(&mesh, &target)?;
    println!(
        "{} vertices, {} wedges, {} tets; J in [{:.6e}, {:.6e}]; written to {}",
        mesh.vertices.len(),
        mesh.wedges.len(),
        mesh.tets.len(),
        jmin,
        jmax,
        target.display()
    );
    Ok(())
}

pub fn cmd_bench(path: &Path, out: Option<&Path>) -> Result<()> {
    let cfg: BenchConfig = config::load(path)?;
    cfg.validate()?;
    let base = base_dir(path);
    let out = output_dir(out, &cfg.output, &base);
    ensure_dir(&out)?;
    let mesh = config::build_mesh(&cfg.mesh, None, &base, cfg.seed)?;
    let mut rows = Vec::new();
    println!("{:>3} {:>12} {:>12} {:>12} {:>12} {:>8}", "N", "wedge vol", "wedge surf", "tet vol", "tet surf", "ratio");
    for &n in &cfg.degrees {
        let disc = Discretization::new(mesh.clone(), n, QuadratureMode::Exact, wedgedg::solver::FluxConfig::upwind())?;
        let b = bench(&disc, cfg.steps).with_context(|| format!("benchmark at N = {n}"))?;
        println!(
            "{n:>3} {:>12.2} {:>12.2} {:>12.2} {:>12.2} {:>8.3}",
            b.wedge_volume_ns_per_dof(),
            b.wedge_surface_ns_per_dof(),
            b.tet_volume_ns_per_dof(),
            b.tet_surface_ns_per_dof(),
            b.volume_ratio()
        );
        rows.push(vec![
            n.to_string(),
            b.num_wedges.to_string(),
            b.num_tets.to_string(),
            f17(b.wedge_volume_ns_per_dof()),
            f17(b.wedge_surface_ns_per_dof()),
            f17(b.tet_volume_ns_per_dof()),
            f17(b.tet_surface_ns_per_dof()),
            f17(b.volume_ratio()),
            b.storage.wedge_floats.to_string(),
            b.storage.wedge_budget.to_string(),
            b.storage.tet_floats.to_string(),
            b.storage.total.to_string(),
        ]);
    }
    write_csv(
        &out.join("bench.csv"),
        &[
            "degree",
            "wedges",
            "tets",
            "wedge_volume_ns_per_dof",
            "wedge_surface_ns_per_dof",
            "tet_volume_ns_per_dof",
            "tet_surface_ns_per_dof",
            "volume_ratio",
            "wedge_floats",
            "wedge_budget",
            "tet_floats",
            "total_floats",
        ],
        &rows,
    )?;
    Ok(())
}

pub fn dump_reference(degree: usize, out: &Path) -> Result<()> {
    ensure_dir(out)?;
    let refs = ReferenceSet::new(degree)?;
    let files = refs.dump_csv(out)?;
    println!("wrote {} reference files to {}", files.len(), out.display());
    Ok(())
}
