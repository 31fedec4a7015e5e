//! Standing-wave convergence studies on the built-in mesh families.

use crate::mesh::{family_mesh, MeshFamily, Medium};
use crate::operators::QuadratureMode;
use crate::solver::{run, standing_wave, Discretization, FluxConfig, Integrator, RunOptions, SolutionState};
use crate::{Error, Result};

use super::l2_error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceOptions {
    pub final_time: f64,
    pub cfl: f64,
    pub integrator: Integrator,
    pub flux: FluxConfig,
    pub seed: u64,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        Self { final_time: 1.0, cfl: 0.5, integrator: Integrator::Lserk4, flux: FluxConfig::upwind(), seed: 1 }
    }
}

/// One mesh level of a study.
#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    pub h: f64,
    pub elements: usize,
    pub dofs: usize,
    pub steps: usize,
    /// L² pressure error at the final time, or `None` if the run failed.
    pub error: Option<f64>,
    pub failure: Option<String>,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub family: MeshFamily,
    pub degree: usize,
    pub levels: Vec<Level>,
    /// Least-squares slope of `log error` against `log h` over the last
    /// three levels.
    pub rate: Option<f64>,
}

/// Least-squares slope of `log e` against `log h`.
pub fn fit_rate(h: &[f64], e: &[f64]) -> f64 {
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Run the standing wave to `final_time` on each `h` of `family` and fit
/// the observed rate. Failed runs are recorded, not propagated.
pub fn convergence_study(
    degree: usize,
    family: MeshFamily,
    hs: &[f64],
    opts: &ConvergenceOptions,
) -> Result<ConvergenceRecord> {
    if hs.len() < 3 {
        return Err(Error::Config(format!("a convergence study needs at least 3 mesh sizes, got {}", hs.len())));
    }
    if hs.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config(format!("mesh sizes must be strictly decreasing, got {hs:?}")));
    }
    let mut levels = Vec::new();
    for &h in hs {
        let mesh = family_mesh(family, h, opts.seed)?;
        let elements = mesh.num_elements();
        let disc = Discretization::new(mesh, degree, QuadratureMode::Exact, opts.flux)?;
        let mut state = SolutionState::from_field(&disc, |x, m| standing_wave(x, 0.0, m));
        let ro = RunOptions {
            final_time: opts.final_time,
            dt: disc.estimate_dt(opts.cfl),
            integrator: opts.integrator,
            energy_every: 0,
        };
        let level = match run(&disc, &mut state, &ro, &mut |_, _| Ok(())) {
            Ok(summary) => {
                let t = state.time;
                let error = l2_error(&disc, &state.q, |x| standing_wave(x, t, Medium::UNIT)[0]);
                Level {
                    h,
                    elements,
                    dofs: disc.state_len(),
                    steps: summary.steps,
                    error: Some(error),
                    failure: None,
                    wall_seconds: summary.wall_seconds,
                }
            }
            Err(e) if e.is_numerical_instability() => Level {
                h,
                elements,
                dofs: disc.state_len(),
                steps: 0,
                error: None,
                failure: Some(e.to_string()),
                wall_seconds: 0.0,
            },
            Err(e) => return Err(e),
        };
        log::info!(
            "{} N={degree} h={h}: {} elements, error {:?} ({:.1} s)",
            family.name(),
            elements,
            level.error,
            level.wall_seconds
        );
        levels.push(level);
    }
    let tail = &levels[levels.len() - 3..];
    let rate = if tail.iter().all(|l| l.error.is_some_and(|e| e > 0.0)) {
        let h: Vec<f64> = tail.iter().map(|l| l.h).collect();
        let e: Vec<f64> = tail.iter().map(|l| l.error.unwrap_or(f64::NAN)).collect();
        Some(fit_rate(&h, &e))
    } else {
        None
    };
    Ok(ConvergenceRecord { family, degree, levels, rate })
}
