//! Explicit time integration with an energy and finiteness watchdog.

use std::time::Instant;

use super::{Discretization, SolutionState};
use crate::{Error, Result};

// Carpenter-Kennedy five-stage fourth-order low-storage coefficients.
const RK4A: [f64; 5] = [
    0.0,
    -567301805773.0 / 1357537059087.0,
    -2404267990393.0 / 2016746695238.0,
    -3550918686646.0 / 2091501179385.0,
    -1275806237668.0 / 842570457699.0,
];
const RK4B: [f64; 5] = [
    1432997174477.0 / 9575080441755.0,
    5161836677717.0 / 13612068292357.0,
    1720146321549.0 / 2090206949498.0,
    3134564353537.0 / 4481467310338.0,
    2277821191437.0 / 14882151754819.0,
];
const RK4C: [f64; 5] = [
    0.0,
    1432997174477.0 / 9575080441755.0,
    2526269341429.0 / 6820363962896.0,
    2006345519317.0 / 3224310063776.0,
    2802321613138.0 / 2924317926251.0,
];

/// Steps between NaN / energy-growth checks.
pub const WATCHDOG_INTERVAL: usize = 50;
/// Abort when the energy exceeds this multiple of its initial value.
pub const ENERGY_GROWTH_LIMIT: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    /// Five-stage fourth-order low-storage Runge-Kutta.
    #[default]
    Lserk4,
    /// Third-order Adams-Bashforth, bootstrapped with two RK steps.
    Ab3,
}

impl Integrator {
    pub fn order(&self) -> usize {
        match self {
            Integrator::Lserk4 => 4,
            Integrator::Ab3 => 3,
        }
    }
}

impl std::str::FromStr for Integrator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lserk4" | "rk4" => Ok(Integrator::Lserk4),
            "ab3" => Ok(Integrator::Ab3),
            other => Err(Error::Config(format!("unknown integrator '{other}' (expected lserk4 or ab3)"))),
        }
    }
}

/// Integrator with its work and history buffers.
#[derive(Debug, Clone)]
pub struct TimeStepper {
    pub integrator: Integrator,
    res: Vec<f64>,
    rhs: Vec<f64>,
    /// Previous right-hand sides, newest first.
    history: Vec<Vec<f64>>,
}

impl TimeStepper {
    pub fn new(integrator: Integrator, len: usize) -> Self {
        Self { integrator, res: vec![0.0; len], rhs: vec![0.0; len], history: Vec::new() }
    }

    /// Advance `q` from `t` to `t + dt` for `dq/dt = f(q, t)`.
    pub fn step_with<F>(&mut self, q: &mut [f64], t: f64, dt: f64, mut f: F) -> Result<()>
    where
        F: FnMut(&[f64], f64, &mut [f64]) -> Result<()>,
    {
        match self.integrator {
            Integrator::Lserk4 => self.rk_step(q, t, dt, &mut f),
            Integrator::Ab3 => {
                f(q, t, &mut self.rhs)?;
                if self.history.len() < 2 {
                    self.history.insert(0, self.rhs.clone());
                    return self.rk_step(q, t, dt, &mut f);
                }
                let (f1, f2) = (&self.history[0], &self.history[1]);
                for i in 0..q.len() {
                    q[i] += dt * (23.0 * self.rhs[i] - 16.0 * f1[i] + 5.0 * f2[i]) / 12.0;
                }
                let mut oldest = self.history.pop().expect("two history entries");
                oldest.copy_from_slice(&self.rhs);
                self.history.insert(0, oldest);
                Ok(())
            }
        }
    }

    fn rk_step<F>(&mut self, q: &mut [f64], t: f64, dt: f64, f: &mut F) -> Result<()>
    where
        F: FnMut(&[f64], f64, &mut [f64]) -> Result<()>,
    {
        self.res.iter_mut().for_each(|x| *x = 0.0);
        for s in 0..5 {
            f(q, t + RK4C[s] * dt, &mut self.rhs)?;
            for i in 0..q.len() {
                self.res[i] = RK4A[s] * self.res[i] + dt * self.rhs[i];
                q[i] += RK4B[s] * self.res[i];
            }
        }
        Ok(())
    }

    /// One step of the DG system.
    pub fn step(&mut self, disc: &Discretization, state: &mut SolutionState, dt: f64) -> Result<()> {
        self.step_with(&mut state.q, state.time, dt, |q, t, r| disc.compute_rhs(q, t, r))?;
        state.time += dt;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub final_time: f64,
    /// Upper bound on the step; the actual step divides `final_time` evenly.
    pub dt: f64,
    pub integrator: Integrator,
    /// Record the energy every this many steps (0: first and last only).
    pub energy_every: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    pub dt: f64,
    pub initial_energy: f64,
    pub final_energy: f64,
    /// `(time, energy)` samples.
    pub energy_log: Vec<(f64, f64)>,
    pub wall_seconds: f64,
}

/// Integrate to `final_time`. `on_step` sees the state after every step.
pub fn run(
    disc: &Discretization,
    state: &mut SolutionState,
    opts: &RunOptions,
    on_step: &mut dyn FnMut(usize, &SolutionState) -> Result<()>,
) -> Result<RunSummary> {
    if !(opts.final_time > 0.0 && opts.dt > 0.0) {
        return Err(Error::Config(format!(
            "final time and step must be positive (got {} and {})",
            opts.final_time, opts.dt
        )));
    }
    let start = Instant::now();
    let steps = ((opts.final_time / opts.dt) * (1.0 - 1e-14)).ceil().max(1.0) as usize;
    let dt = opts.final_time / steps as f64;
    let t0 = state.time;
    let mut stepper = TimeStepper::new(opts.integrator, state.q.len());
    disc.check_finite(&state.q, state.time)?;
    let e0 = disc.energy(&state.q);
    let limit = ENERGY_GROWTH_LIMIT * e0;
    let mut log = vec![(state.time, e0)];
    log::debug!("run: {steps} steps of dt = {dt:e}, initial energy {e0:e}");
    for n in 1..=steps {
        stepper.step(disc, state, dt)?;
        state.time = t0 + n as f64 * dt;
        let sample = opts.energy_every > 0 && n % opts.energy_every == 0;
        let watch = n % WATCHDOG_INTERVAL == 0;
        if sample || watch || n == steps {
            if watch || n == steps {
                disc.check_finite(&state.q, state.time)?;
            }
            let e = disc.energy(&state.q);
            if !e.is_finite() {
                disc.check_finite(&state.q, state.time)?;
            }
            if e0 > 0.0 && e > limit {
                return Err(Error::Instability { time: state.time, energy: e, limit });
            }
            if sample || n == steps {
                log.push((state.time, e));
            }
        }
        on_step(n, state)?;
    }
    let final_energy = log.last().map(|x| x.1).unwrap_or(e0);
    Ok(RunSummary {
        steps,
        dt,
        initial_energy: e0,
        final_energy,
        energy_log: log,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}
