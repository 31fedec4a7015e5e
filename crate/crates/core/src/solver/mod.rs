//! Semi-discrete right-hand side, energy, time stepping and output.
//!
//! The state is a single vector, element-major (wedges first, then tets),
//! with four contiguous blocks `[p, u_x, u_y, u_z]` of `Np` values per
//! element. The right-hand side is the strong form
//!
//! ```text
//! dp/dt = κ (-div u + Σ_f L_f F_p)
//! du/dt = (1/ρ) (-∇p + Σ_f n L_f F_u)
//! F_p = ½ (τ_p [p] - n·[u]),  F_u = ½ (τ_u [u]·n - [p]),  [a] = a⁺ - a⁻
//! ```
//!
//! with the reflection rule `p⁺ = -p⁻`, `u⁺ = u⁻` on boundary faces.

pub mod fields;
pub mod time;
pub mod vtk;

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use crate::geometry::{compute_geometry, ElementGeometry};
use crate::linalg::dot;
use crate::mesh::{build_connectivity, Connectivity, ElementKind, FaceLink, HybridMesh, Medium, Point};
use crate::operators::kernels::{dense_apply, line_apply, tri_apply};
use crate::operators::{MeshOperators, QuadratureMode};
use crate::reference::ReferenceSet;
use crate::{Error, Result};

pub use fields::{gaussian_pulse, standing_wave, standing_wave_frequency};
pub use time::{run, Integrator, RunOptions, RunSummary, TimeStepper};

/// Numerical flux family.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum FluxMode {
    /// `τ_p = 1/{ρc}`, `τ_u = {ρc}`.
    #[default]
    Upwind,
    /// `τ_p = τ_u = 0`.
    Central,
    /// Fixed non-negative penalties.
    Custom { tau_p: f64, tau_u: f64 },
}

impl std::str::FromStr for FluxMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "upwind" => Ok(FluxMode::Upwind),
            "central" => Ok(FluxMode::Central),
            other => Err(Error::Config(format!("unknown flux '{other}' (expected upwind, central or custom)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FluxConfig {
    pub mode: FluxMode,
}

impl FluxConfig {
    pub fn new(mode: FluxMode) -> Result<Self> {
        if let FluxMode::Custom { tau_p, tau_u } = mode {
            if !(tau_p >= 0.0 && tau_u >= 0.0 && tau_p.is_finite() && tau_u.is_finite()) {
                return Err(Error::Config(format!(
                    "flux penalties must be finite and non-negative (tau_p = {tau_p}, tau_u = {tau_u})"
                )));
            }
        }
        Ok(Self { mode })
    }

    pub fn upwind() -> Self {
        Self { mode: FluxMode::Upwind }
    }

    pub fn central() -> Self {
        Self { mode: FluxMode::Central }
    }

    /// `(τ_p, τ_u)` on a face between media `a` and `b`.
    pub fn penalties(&self, a: Medium, b: Medium) -> (f64, f64) {
        match self.mode {
            FluxMode::Upwind => {
                let avg = 0.5 * (a.impedance() + b.impedance());
                (1.0 / avg, avg)
            }
            FluxMode::Central => (0.0, 0.0),
            FluxMode::Custom { tau_p, tau_u } => (tau_p, tau_u),
        }
    }
}

/// Trace data of one element face.
#[derive(Debug, Clone)]
struct FaceMap {
    /// State offset and `Np` of the neighbour, or `None` on the boundary.
    neighbor: Option<(usize, usize)>,
    /// Neighbour volume node matching each of my face nodes.
    plus_nodes: Vec<usize>,
    tau_p: f64,
    tau_u: f64,
}

/// Mesh, reference data, geometry, operators and trace maps.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: HybridMesh,
    pub refs: ReferenceSet,
    pub geometry: Vec<ElementGeometry>,
    pub ops: MeshOperators,
    pub connectivity: Connectivity,
    pub flux: FluxConfig,
    faces: Vec<Vec<FaceMap>>,
    offsets: Vec<usize>,
    len: usize,
}

#[derive(Default)]
struct Scratch {
    fp: Vec<f64>,
    fu: Vec<f64>,
    lp: Vec<f64>,
    lu: Vec<f64>,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Scratch {
    fn new(np: usize) -> Self {
        let v = || vec![0.0; np];
        Self { fp: v(), fu: v(), lp: v(), lu: v(), x: vec![0.0; 4 * np], y: vec![0.0; 2 * np] }
    }
}

impl Discretization {
    pub fn new(mesh: HybridMesh, degree: usize, mode: QuadratureMode, flux: FluxConfig) -> Result<Self> {
        mesh.validate()?;
        let refs = ReferenceSet::new(degree)?;
        let geometry = compute_geometry(&mesh, &refs)?;
        let ops = MeshOperators::build(&geometry, &refs, mode)?;
        let connectivity = build_connectivity(&mesh, &refs)?;
        let ne = mesh.num_elements();
        let mut offsets = Vec::with_capacity(ne + 1);
        let mut acc = 0;
        for e in 0..ne {
            offsets.push(acc);
            acc += 4 * Self::np_of(&refs, mesh.kind(e));
        }
        offsets.push(acc);
        let mut faces = Vec::with_capacity(ne);
        for e in 0..ne {
            let mut fm = Vec::new();
            for (f, link) in connectivity.links[e].iter().enumerate() {
                let me = mesh.media[e];
                fm.push(match link {
                    FaceLink::Interior { element, face, perm } => {
                        let theirs = crate::mesh::face_nodes(&mesh, &refs, *element, *face);
                        let (tau_p, tau_u) = flux.penalties(me, mesh.media[*element]);
                        FaceMap {
                            neighbor: Some((offsets[*element], Self::np_of(&refs, mesh.kind(*element)))),
                            plus_nodes: perm.iter().map(|&b| theirs[b]).collect(),
                            tau_p,
                            tau_u,
                        }
                    }
                    FaceLink::Boundary { .. } => {
                        let (tau_p, tau_u) = flux.penalties(me, me);
                        let _ = f;
                        FaceMap { neighbor: None, plus_nodes: Vec::new(), tau_p, tau_u }
                    }
                });
            }
            faces.push(fm);
        }
        Ok(Self { mesh, refs, geometry, ops, connectivity, flux, faces, offsets, len: acc })
    }

    fn np_of(refs: &ReferenceSet, kind: ElementKind) -> usize {
        match kind {
            ElementKind::Wedge => refs.wedge.np,
            ElementKind::Tet => refs.tet.np,
        }
    }

    pub fn degree(&self) -> usize {
        self.refs.degree
    }

    /// Total state length `4 Σ_k Np_k`.
    pub fn state_len(&self) -> usize {
        self.len
    }

    /// Nodes per field, `Σ_k Np_k`.
    pub fn num_nodes(&self) -> usize {
        self.len / 4
    }

    /// Offset of element `e`'s block in the state vector.
    pub fn offset(&self, e: usize) -> usize {
        self.offsets[e]
    }

    pub fn np(&self, e: usize) -> usize {
        Self::np_of(&self.refs, self.mesh.kind(e))
    }

    fn wedge_len(&self) -> usize {
        self.offsets[self.mesh.wedges.len()]
    }

    /// `dq/dt` for state `q`. Non-finite output is reported with the first
    /// offending element.
    pub fn compute_rhs(&self, q: &[f64], time: f64, rhs: &mut [f64]) -> Result<()> {
        assert_eq!(q.len(), self.len);
        assert_eq!(rhs.len(), self.len);
        let bad = AtomicUsize::new(usize::MAX);
        let nw = self.mesh.wedges.len();
        let npw = self.refs.wedge.np;
        let npt = self.refs.tet.np;
        let (rw, rt) = rhs.split_at_mut(self.wedge_len());
        rw.par_chunks_mut(4 * npw).enumerate().for_each_init(
            || Scratch::new(npw),
            |s, (w, out)| {
                self.wedge_volume(w, q, out, s);
                self.wedge_surface(w, q, out, s);
                if out.iter().any(|v| !v.is_finite()) {
                    bad.fetch_min(w, Ordering::Relaxed);
                }
            },
        );
        rt.par_chunks_mut(4 * npt).enumerate().for_each_init(
            || Scratch::new(npt),
            |s, (t, out)| {
                self.tet_volume(t, q, out, s);
                self.tet_surface(t, q, out, s);
                if out.iter().any(|v| !v.is_finite()) {
                    bad.fetch_min(nw + t, Ordering::Relaxed);
                }
            },
        );
        match bad.into_inner() {
            usize::MAX => Ok(()),
            element => Err(Error::NonFinite { element, time }),
        }
    }

    /// Volume terms of all wedges (overwrites their output blocks).
    pub fn wedge_volume_phase(&self, q: &[f64], rhs: &mut [f64]) {
        let npw = self.refs.wedge.np;
        let wl = self.wedge_len();
        rhs[..wl].par_chunks_mut(4 * npw).enumerate().for_each_init(
            || Scratch::new(npw),
            |s, (w, out)| self.wedge_volume(w, q, out, s),
        );
    }

    /// Surface terms of all wedges (accumulates).
    pub fn wedge_surface_phase(&self, q: &[f64], rhs: &mut [f64]) {
        let npw = self.refs.wedge.np;
        let wl = self.wedge_len();
        rhs[..wl].par_chunks_mut(4 * npw).enumerate().for_each_init(
            || Scratch::new(npw),
            |s, (w, out)| self.wedge_surface(w, q, out, s),
        );
    }

    pub fn tet_volume_phase(&self, q: &[f64], rhs: &mut [f64]) {
        let npt = self.refs.tet.np;
        let wl = self.wedge_len();
        rhs[wl..].par_chunks_mut(4 * npt).enumerate().for_each_init(
            || Scratch::new(npt),
            |s, (t, out)| self.tet_volume(t, q, out, s),
        );
    }

    pub fn tet_surface_phase(&self, q: &[f64], rhs: &mut [f64]) {
        let npt = self.refs.tet.np;
        let wl = self.wedge_len();
        rhs[wl..].par_chunks_mut(4 * npt).enumerate().for_each_init(
            || Scratch::new(npt),
            |s, (t, out)| self.tet_surface(t, q, out, s),
        );
    }

    fn wedge_volume(&self, w: usize, q: &[f64], out: &mut [f64], s: &mut Scratch) {
        match self.ops.shared.nt {
            2 => self.wedge_volume_n::<2, 2>(w, q, out, s),
            3 => self.wedge_volume_n::<3, 3>(w, q, out, s),
            4 => self.wedge_volume_n::<4, 4>(w, q, out, s),
            5 => self.wedge_volume_n::<5, 5>(w, q, out, s),
            6 => self.wedge_volume_n::<6, 3>(w, q, out, s),
            7 => self.wedge_volume_n::<7, 7>(w, q, out, s),
            8 => self.wedge_volume_n::<8, 4>(w, q, out, s),
            9 => self.wedge_volume_n::<9, 3>(w, q, out, s),
            10 => self.wedge_volume_n::<10, 5>(w, q, out, s),
            nt => unreachable!("unsupported level count {nt}"),
        }
    }

    /// Volume terms with `NT = N + 1` GLL levels known at compile time.
    /// One pass over the triangle matrices applies `D_r`, `D_s` and `L^tri`
    /// to every field that needs them; levels are processed `JB` at a time
    /// (`JB` divides `NT`) to keep the accumulators in registers.
    fn wedge_volume_n<const NT: usize, const JB: usize>(&self, w: usize, q: &[f64], out: &mut [f64], s: &mut Scratch) {
        let sh = &self.ops.shared;
        let op = &self.ops.wedges[w];
        let m = self.mesh.media[w];
        let (np, np_tri) = (sh.np_wedge, sh.np_tri);
        let qe = &q[self.offsets[w]..self.offsets[w] + 4 * np];
        let (p, ux, uy, uz) = (
            levels::<NT>(&qe[..np]),
            levels::<NT>(&qe[np..2 * np]),
            levels::<NT>(&qe[2 * np..3 * np]),
            levels::<NT>(&qe[3 * np..]),
        );
        let dt: [[f64; NT]; NT] = std::array::from_fn(|j| std::array::from_fn(|k| sh.dt_line.get(j, k)));
        let txj: [f64; NT] = std::array::from_fn(|j| op.txj[j]);
        let tyj: [f64; NT] = std::array::from_fn(|j| op.tyj[j]);
        let apply_dt = |v: &[f64; NT]| -> [f64; NT] {
            std::array::from_fn(|j| {
                let mut acc = 0.0;
                for k in 0..NT {
                    acc += dt[j][k] * v[k];
                }
                acc
            })
        };
        // per node: x = [a, p, b, p], y = [c, d] so each triangle-matrix row
        // entry updates all four outputs with two short vector FMAs
        let x = s.x.as_chunks_mut::<4>().0;
        let y = s.y.as_chunks_mut::<2>().0;
        for k in 0..np_tri {
            let (ux, uy, pk) = (&ux[k], &uy[k], &p[k]);
            let (tx, ty, tz, tp) = (apply_dt(ux), apply_dt(uy), apply_dt(&uz[k]), apply_dt(pk));
            for j in 0..NT {
                let a = op.rx * ux[j] + op.ry * uy[j];
                let b = op.sx * ux[j] + op.sy * uy[j];
                x[k * NT + j] = [a, pk[j], b, pk[j]];
                y[k * NT + j] = [txj[j] * tx[j] + tyj[j] * ty[j] + op.tzj * tz[j], tp[j]];
            }
        }
        let (op_, ou) = out.split_at_mut(np);
        let (oux, ou) = ou.split_at_mut(np);
        let (ouy, ouz) = ou.split_at_mut(np);
        let ir = 1.0 / m.rho;
        let mut emit = |i: usize, j0: usize, acc4: &[[f64; 4]; JB], acc2: &[[f64; 2]; JB]| {
            for jj in 0..JB {
                let j = j0 + jj;
                let [dra, pr, dsb, ps] = acc4[jj];
                let [lc, h] = acc2[jj];
                let k = i * NT + j;
                op_[k] = -m.kappa * (dra + dsb + lc);
                oux[k] = -ir * (op.rx * pr + op.sx * ps + txj[j] * h);
                ouy[k] = -ir * (op.ry * pr + op.sy * ps + tyj[j] * h);
                ouz[k] = -ir * op.tzj * h;
            }
        };
        for j0 in (0..NT).step_by(JB) {
            // two rows at a time so every loaded x, y feeds twice as many FMAs
            let mut i = 0;
            while i + 1 < np_tri {
                let (rr0, rs0, rl0) = (sh.dr_tri.row(i), sh.ds_tri.row(i), op.ltri.row(i));
                let (rr1, rs1, rl1) = (sh.dr_tri.row(i + 1), sh.ds_tri.row(i + 1), op.ltri.row(i + 1));
                let mut a40 = [[0.0; 4]; JB];
                let mut a20 = [[0.0; 2]; JB];
                let mut a41 = [[0.0; 4]; JB];
                let mut a21 = [[0.0; 2]; JB];
                for k in 0..np_tri {
                    let c40 = [rr0[k], rr0[k], rs0[k], rs0[k]];
                    let c41 = [rr1[k], rr1[k], rs1[k], rs1[k]];
                    let (l0, l1) = (rl0[k], rl1[k]);
                    let base = k * NT + j0;
                    let (xk, yk) = (&x[base..base + JB], &y[base..base + JB]);
                    for j in 0..JB {
                        for c in 0..4 {
                            a40[j][c] += c40[c] * xk[j][c];
                            a41[j][c] += c41[c] * xk[j][c];
                        }
                        for c in 0..2 {
                            a20[j][c] += l0 * yk[j][c];
                            a21[j][c] += l1 * yk[j][c];
                        }
                    }
                }
                emit(i, j0, &a40, &a20);
                emit(i + 1, j0, &a41, &a21);
                i += 2;
            }
            if i < np_tri {
                let (rr, rs, rl) = (sh.dr_tri.row(i), sh.ds_tri.row(i), op.ltri.row(i));
                let mut acc4 = [[0.0; 4]; JB];
                let mut acc2 = [[0.0; 2]; JB];
                for k in 0..np_tri {
                    let c4 = [rr[k], rr[k], rs[k], rs[k]];
                    let l = rl[k];
                    let base = k * NT + j0;
                    let (xk, yk) = (&x[base..base + JB], &y[base..base + JB]);
                    for j in 0..JB {
                        for c in 0..4 {
                            acc4[j][c] += c4[c] * xk[j][c];
                        }
                        for c in 0..2 {
                            acc2[j][c] += l * yk[j][c];
                        }
                    }
                }
                emit(i, j0, &acc4, &acc2);
            }
        }
    }

    /// Fill `s.fp`, `s.fu` with `F_p`, `F_u` at the nodes of face `f`.
    fn face_fluxes(&self, e: usize, f: usize, nodes: &[usize], n: [f64; 3], q: &[f64], s: &mut Scratch) {
        let np = self.np(e);
        let off = self.offsets[e];
        let fm = &self.faces[e][f];
        for (a, &k) in nodes.iter().enumerate() {
            let pm = q[off + k];
            let um = [q[off + np + k], q[off + 2 * np + k], q[off + 3 * np + k]];
            let (dp, dun) = match fm.neighbor {
                Some((o2, np2)) => {
                    let k2 = fm.plus_nodes[a];
                    let pp = q[o2 + k2];
                    let up = [q[o2 + np2 + k2], q[o2 + 2 * np2 + k2], q[o2 + 3 * np2 + k2]];
                    (pp - pm, n[0] * (up[0] - um[0]) + n[1] * (up[1] - um[1]) + n[2] * (up[2] - um[2]))
                }
                None => (-2.0 * pm, 0.0),
            };
            s.fp[a] = 0.5 * (fm.tau_p * dp - dun);
            s.fu[a] = 0.5 * (fm.tau_u * dun - dp);
        }
    }

    fn wedge_surface(&self, w: usize, q: &[f64], out: &mut [f64], s: &mut Scratch) {
        match self.ops.shared.nt {
            2 => self.wedge_surface_n::<2>(w, q, out, s),
            3 => self.wedge_surface_n::<3>(w, q, out, s),
            4 => self.wedge_surface_n::<4>(w, q, out, s),
            5 => self.wedge_surface_n::<5>(w, q, out, s),
            6 => self.wedge_surface_n::<6>(w, q, out, s),
            7 => self.wedge_surface_n::<7>(w, q, out, s),
            8 => self.wedge_surface_n::<8>(w, q, out, s),
            9 => self.wedge_surface_n::<9>(w, q, out, s),
            10 => self.wedge_surface_n::<10>(w, q, out, s),
            nt => unreachable!("unsupported level count {nt}"),
        }
    }

    fn wedge_surface_n<const NT: usize>(&self, w: usize, q: &[f64], out: &mut [f64], s: &mut Scratch) {
        let sh = &self.ops.shared;
        let op = &self.ops.wedges[w];
        let m = self.mesh.media[w];
        let (np, np_tri) = (sh.np_wedge, sh.np_tri);
        let profile = self.ops.face_profile();
        let (o_p, ou) = out.split_at_mut(np);
        let (o_x, ou) = ou.split_at_mut(np);
        let (o_y, o_z) = ou.split_at_mut(np);
        let (o_p, o_x, o_y, o_z) = (
            o_p.as_chunks_mut::<NT>().0,
            o_x.as_chunks_mut::<NT>().0,
            o_y.as_chunks_mut::<NT>().0,
            o_z.as_chunks_mut::<NT>().0,
        );
        for f in 0..5 {
            let n = op.normal(f);
            self.face_fluxes(w, f, &sh.wedge_faces[f], n, q, s);
            let cu = [n[0] / m.rho, n[1] / m.rho, n[2] / m.rho];
            if f < 2 {
                // J_f L^tri F ⊗ (1D lift profile)
                dense_apply(&op.ltri, &s.fp[..np_tri], op.jf_tri[f] * m.kappa, &mut s.lp[..np_tri], false);
                dense_apply(&op.ltri, &s.fu[..np_tri], op.jf_tri[f], &mut s.lu[..np_tri], false);
                let prof: [f64; NT] = std::array::from_fn(|j| profile[f][j]);
                for i in 0..np_tri {
                    let (lp, lu) = (s.lp[i], s.lu[i]);
                    for j in 0..NT {
                        o_p[i][j] += lp * prof[j];
                        let v = lu * prof[j];
                        o_x[i][j] += cu[0] * v;
                        o_y[i][j] += cu[1] * v;
                        o_z[i][j] += cu[2] * v;
                    }
                }
            } else {
                // block diagonal across levels
                let blk = &op.quad_lift[f - 2];
                let fp = s.fp.as_chunks::<NT>().0;
                let fu = s.fu.as_chunks::<NT>().0;
                for i in 0..np_tri {
                    let row = blk.row(i);
                    let mut lp = [0.0; NT];
                    let mut lu = [0.0; NT];
                    for (a, &bia) in row.iter().enumerate() {
                        for j in 0..NT {
                            lp[j] += bia * fp[a][j];
                            lu[j] += bia * fu[a][j];
                        }
                    }
                    for j in 0..NT {
                        o_p[i][j] += m.kappa * lp[j];
                        o_x[i][j] += cu[0] * lu[j];
                        o_y[i][j] += cu[1] * lu[j];
                        o_z[i][j] += cu[2] * lu[j];
                    }
                }
            }
        }
    }

    /// Tet volume terms. The contravariant velocity components and `p` are
    /// interleaved so one pass over `D_r`, `D_s`, `D_t` serves all fields.
    fn tet_volume(&self, t: usize, q: &[f64], out: &mut [f64], s: &mut Scratch) {
        let sh = &self.ops.shared;
        let op = &self.ops.tets[t];
        let e = self.mesh.wedges.len() + t;
        let m = self.mesh.media[e];
        let np = sh.np_tet;
        let qe = &q[self.offsets[e]..self.offsets[e] + 4 * np];
        let (p, u) = qe.split_at(np);
        let (ux, u) = u.split_at(np);
        let (uy, uz) = u.split_at(np);
        let g = &op.grad;
        let x = s.x.as_chunks_mut::<4>().0;
        for k in 0..np {
            x[k] = [
                g[0][0] * ux[k] + g[0][1] * uy[k] + g[0][2] * uz[k],
                g[1][0] * ux[k] + g[1][1] * uy[k] + g[1][2] * uz[k],
                g[2][0] * ux[k] + g[2][1] * uy[k] + g[2][2] * uz[k],
                p[k],
            ];
        }
        let ir = 1.0 / m.rho;
        for i in 0..np {
            let (rr, rs, rt) = (sh.tet_dr.row(i), sh.tet_ds.row(i), sh.tet_dt.row(i));
            let mut ar = [0.0; 4];
            let mut as_ = [0.0; 4];
            let mut at = [0.0; 4];
            for k in 0..np {
                let xk = &x[k];
                for c in 0..4 {
                    ar[c] += rr[k] * xk[c];
                    as_[c] += rs[k] * xk[c];
                    at[c] += rt[k] * xk[c];
                }
            }
            out[i] = -m.kappa * (ar[0] + as_[1] + at[2]);
            for d in 0..3 {
                out[(d + 1) * np + i] = -ir * (g[0][d] * ar[3] + g[1][d] * as_[3] + g[2][d] * at[3]);
            }
        }
    }

    fn tet_surface(&self, t: usize, q: &[f64], out: &mut [f64], s: &mut Scratch) {
        let sh = &self.ops.shared;
        let op = &self.ops.tets[t];
        let e = self.mesh.wedges.len() + t;
        let m = self.mesh.media[e];
        let np = sh.np_tet;
        for f in 0..4 {
            let n = op.normals[f];
            let nodes = &sh.tet_faces[f];
            self.face_fluxes(e, f, nodes, n, q, s);
            let nf = nodes.len();
            let lift = &sh.tet_lift[f];
            dense_apply(lift, &s.fp[..nf], op.lift_scale[f] * m.kappa, &mut out[..np], true);
            dense_apply(lift, &s.fu[..nf], op.lift_scale[f] / m.rho, &mut s.lu[..np], false);
            for d in 0..3 {
                let o = &mut out[(d + 1) * np..(d + 2) * np];
                for k in 0..np {
                    o[k] += n[d] * s.lu[k];
                }
            }
        }
    }

    /// `½ Σ_k (pᵀ M p / κ + ρ uᵀ M u)` with exactly integrated mass matrices.
    pub fn energy(&self, q: &[f64]) -> f64 {
        let per: Vec<f64> = (0..self.mesh.num_elements())
            .into_par_iter()
            .map(|e| {
                let m = self.mesh.media[e];
                let np = self.np(e);
                let qe = &q[self.offsets[e]..self.offsets[e] + 4 * np];
                let w = [1.0 / m.kappa, m.rho, m.rho, m.rho];
                (0..4).map(|c| w[c] * self.mass_quadratic(e, &qe[c * np..(c + 1) * np])).sum::<f64>()
            })
            .collect();
        0.5 * per.iter().sum::<f64>()
    }

    /// `vᵀ M^k v` for a single nodal field on element `e`.
    pub fn mass_quadratic(&self, e: usize, v: &[f64]) -> f64 {
        let mv = self.mass_apply(e, v);
        dot(v, &mv)
    }

    /// Exact `M^k v` on element `e`.
    pub fn mass_apply(&self, e: usize, v: &[f64]) -> Vec<f64> {
        let sh = &self.ops.shared;
        let mut out = vec![0.0; v.len()];
        match self.mesh.kind(e) {
            ElementKind::Wedge => {
                let op = &self.ops.wedges[e];
                let mtri = crate::linalg::RowMat::from_dmatrix(&op.tri_mass(sh));
                let m1 = crate::linalg::RowMat::from_dmatrix(&sh.line_mass);
                let mut tmp = vec![0.0; v.len()];
                line_apply(&m1, v, sh.nt, &mut tmp);
                tri_apply(&mtri, &tmp, sh.nt, 1.0, &mut out, false);
            }
            ElementKind::Tet => {
                let t = e - self.mesh.wedges.len();
                let j = self.ops.tets[t].j;
                for (i, o) in out.iter_mut().enumerate() {
                    *o = j * (0..v.len()).map(|k| sh.tet_mass[(i, k)] * v[k]).sum::<f64>();
                }
            }
        }
        out
    }

    /// `M^k v` with the mass matrix of the configured quadrature mode.
    pub fn mass_apply_mode(&self, e: usize, v: &[f64]) -> Vec<f64> {
        match (self.mesh.kind(e), self.ops.mode) {
            (ElementKind::Wedge, QuadratureMode::Lumped) => {
                let mut out = vec![0.0; v.len()];
                self.ops.wedge_mass_apply(e, v, &mut out);
                out
            }
            _ => self.mass_apply(e, v),
        }
    }

    /// Stable step size `cfl · min_k h_k / (c_k (N+1)²)`.
    pub fn estimate_dt(&self, cfl: f64) -> f64 {
        let n1 = (self.degree() + 1) as f64;
        self.geometry
            .iter()
            .zip(&self.mesh.media)
            .map(|(g, m)| g.h() / (m.speed() * n1 * n1))
            .fold(f64::INFINITY, f64::min)
            * cfl
    }

    /// Physical node coordinates of element `e`.
    pub fn node_coordinates(&self, e: usize) -> Vec<Point> {
        self.mesh.node_coordinates(e, &self.refs)
    }

    /// Nodal interpolation of `field(x, medium) -> [p, u_x, u_y, u_z]`.
    pub fn interpolate<F>(&self, field: F) -> Vec<f64>
    where
        F: Fn(Point, Medium) -> [f64; 4] + Sync,
    {
        let blocks: Vec<Vec<f64>> = (0..self.mesh.num_elements())
            .into_par_iter()
            .map(|e| {
                let x = self.node_coordinates(e);
                let np = x.len();
                let mut b = vec![0.0; 4 * np];
                for (k, xk) in x.iter().enumerate() {
                    let v = field(*xk, self.mesh.media[e]);
                    for c in 0..4 {
                        b[c * np + k] = v[c];
                    }
                }
                b
            })
            .collect();
        blocks.concat()
    }

    /// First element with a non-finite state value.
    pub fn check_finite(&self, q: &[f64], time: f64) -> Result<()> {
        match q.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(i) => {
                let element = self.offsets.partition_point(|&o| o <= i) - 1;
                Err(Error::NonFinite { element, time })
            }
        }
    }

    /// Field block `c` (0 = p, 1..=3 = u) of element `e`.
    pub fn field<'a>(&self, q: &'a [f64], e: usize, c: usize) -> &'a [f64] {
        let np = self.np(e);
        let o = self.offsets[e] + c * np;
        &q[o..o + np]
    }
}

/// View a wedge field as rows of `NT` level values.
fn levels<const NT: usize>(v: &[f64]) -> &[[f64; NT]] {
    v.as_chunks::<NT>().0
}

/// Nodal state and time.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionState {
    pub q: Vec<f64>,
    pub time: f64,
}

impl SolutionState {
    pub fn zeros(disc: &Discretization) -> Self {
        Self { q: vec![0.0; disc.state_len()], time: 0.0 }
    }

    pub fn from_field<F>(disc: &Discretization, field: F) -> Self
    where
        F: Fn(Point, Medium) -> [f64; 4] + Sync,
    {
        Self { q: disc.interpolate(field), time: 0.0 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::structured_hybrid_box;
    use crate::mesh::DiagonalSplit;

    #[test]
    fn zero_state_has_zero_rhs() {
        let mesh = structured_hybrid_box(1, 1, 1, 1, DiagonalSplit::Main).unwrap();
        let d = Discretization::new(mesh, 2, QuadratureMode::Exact, FluxConfig::upwind()).unwrap();
        let q = vec![0.0; d.state_len()];
        let mut r = vec![1.0; d.state_len()];
        d.compute_rhs(&q, 0.0, &mut r).unwrap();
        assert!(r.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn constant_pressure_energy_is_half_volume() {
        let mesh = structured_hybrid_box(2, 2, 1, 1, DiagonalSplit::Main).unwrap();
        let vol = mesh.total_volume();
        let d = Discretization::new(mesh, 2, QuadratureMode::Exact, FluxConfig::upwind()).unwrap();
        let q = d.interpolate(|_, _| [1.0, 0.0, 0.0, 0.0]);
        assert!((d.energy(&q) - 0.5 * vol).abs() < 1e-12);
    }
}
