//! Per-phase right-hand-side timings.

use std::time::Instant;

use crate::operators::{storage_report, StorageReport};
use crate::solver::Discretization;
use crate::{Error, Result};

/// Repetitions per timed batch; the reported time is the fastest batch.
const BATCH: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub degree: usize,
    pub num_wedges: usize,
    pub num_tets: usize,
    pub np_wedge: usize,
    pub np_tet: usize,
    /// Nanoseconds per element for one application of each phase.
    pub wedge_volume_ns: f64,
    pub wedge_surface_ns: f64,
    pub tet_volume_ns: f64,
    pub tet_surface_ns: f64,
    pub storage: StorageReport,
}

impl BenchRecord {
    pub fn wedge_volume_ns_per_dof(&self) -> f64 {
        self.wedge_volume_ns / self.np_wedge as f64
    }

    pub fn wedge_surface_ns_per_dof(&self) -> f64 {
        self.wedge_surface_ns / self.np_wedge as f64
    }

    pub fn tet_volume_ns_per_dof(&self) -> f64 {
        self.tet_volume_ns / self.np_tet as f64
    }

    pub fn tet_surface_ns_per_dof(&self) -> f64 {
        self.tet_surface_ns / self.np_tet as f64
    }

    /// Wedge over tet volume-kernel time per DOF.
    pub fn volume_ratio(&self) -> f64 {
        self.wedge_volume_ns_per_dof() / self.tet_volume_ns_per_dof()
    }
}

fn time_phase(steps: usize, count: usize, mut f: impl FnMut()) -> f64 {
    if count == 0 {
        return f64::NAN;
    }
    let mut best = f64::INFINITY;
    for _ in 0..steps.div_ceil(BATCH) {
        let start = Instant::now();
        for _ in 0..BATCH {
            f();
        }
        best = best.min(start.elapsed().as_secs_f64() / BATCH as f64);
    }
    best * 1e9 / count as f64
}

/// Time each RHS phase `steps` times on a fixed random-free state.
pub fn bench(disc: &Discretization, steps: usize) -> Result<BenchRecord> {
    if steps < 100 {
        return Err(Error::Config(format!("bench needs at least 100 steps, got {steps}")));
    }
    let n = disc.state_len();
    let q: Vec<f64> = (0..n).map(|i| ((i as f64) * 0.618_033_988_75).fract() - 0.5).collect();
    let mut rhs = vec![0.0; n];
    let nw = disc.mesh.wedges.len();
    let nt = disc.mesh.tets.len();
    let wv = time_phase(steps, nw, || disc.wedge_volume_phase(&q, &mut rhs));
    let ws = time_phase(steps, nw, || disc.wedge_surface_phase(&q, &mut rhs));
    let tv = time_phase(steps, nt, || disc.tet_volume_phase(&q, &mut rhs));
    let ts = time_phase(steps, nt, || disc.tet_surface_phase(&q, &mut rhs));
    Ok(BenchRecord {
        degree: disc.degree(),
        num_wedges: nw,
        num_tets: nt,
        np_wedge: disc.refs.wedge.np,
        np_tet: disc.refs.tet.np,
        wedge_volume_ns: wv,
        wedge_surface_ns: ws,
        tet_volume_ns: tv,
        tet_surface_ns: ts,
        storage: storage_report(&disc.ops),
    })
}
