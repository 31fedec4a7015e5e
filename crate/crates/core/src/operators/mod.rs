//! Per-element DG operators.
//!
//! Wedge operators are stored in factored form:
//! - `ltri = (M^{tri,k})^{-1} M̂^{tri}`, where `M^{tri,k} = ∫ ℓ_i ℓ_j J` is
//!   integrated exactly (`J` is affine in `(r, s)`);
//! - three quad-face lift blocks `(M^{tri,k})^{-1} M̃_edge` restricted to the
//!   edge-node columns;
//! - the geometric scalars `r_x, r_y, s_x, s_y, t_zJ`, `J` at the bottom
//!   vertices, the two triangular face Jacobians, and `t_xJ`, `t_yJ` at the
//!   GLL levels.
//!
//! Everything else (triangle/1D/tet reference matrices) is shared.
//! The mass matrix is `M^{tri,k} ⊗ M^{1D}` and
//! `D_x = (r_x D_r + s_x D_s) ⊗ I + L^{tri} ⊗ diag(t_xJ) D_t`,
//! `D_z = L^{tri} ⊗ t_zJ D_t`. Triangular-face lifts are
//! `J_f L^{tri} ⊗ (M^{1D})^{-1} e`; quad-face lifts are block diagonal
//! across GLL levels.

pub mod kernels;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::geometry::{ElementGeometry, TetGeometry, WedgeGeometry};
use crate::linalg::{spd_solve, RowMat};
use crate::reference::ReferenceSet;
use crate::{Error, Result};
use kernels::{line_apply, tri_apply};

/// Quadrature used for wedge mass matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuadratureMode {
    /// Exact integration (the energy-stable scheme).
    #[default]
    Exact,
    /// GLL collocation in the extruded coordinate (block-diagonal mass).
    Lumped,
}

impl std::str::FromStr for QuadratureMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(QuadratureMode::Exact),
            "lumped" => Ok(QuadratureMode::Lumped),
            other => Err(Error::Config(format!("unknown quadrature mode '{other}' (expected exact or lumped)"))),
        }
    }
}

/// Reference matrices shared by all elements, in kernel-friendly layout.
#[derive(Debug, Clone)]
pub struct SharedOperators {
    pub degree: usize,
    pub nt: usize,
    pub np_tri: usize,
    pub np_wedge: usize,
    pub np_tet: usize,
    pub dr_tri: RowMat,
    pub ds_tri: RowMat,
    pub dt_line: RowMat,
    /// `(M^{1D})^{-1} e_0` and `(M^{1D})^{-1} e_N`.
    pub lift_profile: [Vec<f64>; 2],
    /// `e_0 / w_0` and `e_N / w_N` (GLL-collocated face lifts).
    pub lumped_profile: [Vec<f64>; 2],
    pub tri_mass: DMatrix<f64>,
    pub tri_vertex_mass: [DMatrix<f64>; 3],
    pub line_mass: DMatrix<f64>,
    pub line_weights: Vec<f64>,
    /// Edge masses weighted by `(1-σ)/2` and `(1+σ)/2`.
    pub edge_mass_weighted: [DMatrix<f64>; 2],
    pub tet_dr: RowMat,
    pub tet_ds: RowMat,
    pub tet_dt: RowMat,
    pub tet_lift: [RowMat; 4],
    pub tet_mass: DMatrix<f64>,
    pub wedge_faces: [Vec<usize>; 5],
    pub tet_faces: [Vec<usize>; 4],
    pub tri_edges: [Vec<usize>; 3],
}

impl SharedOperators {
    pub fn new(refs: &ReferenceSet) -> Self {
        let n = refs.degree;
        let w = &refs.interval.weights;
        let mut lumped0 = vec![0.0; n + 1];
        let mut lumped1 = vec![0.0; n + 1];
        lumped0[0] = 1.0 / w[0];
        lumped1[n] = 1.0 / w[n];
        Self {
            degree: n,
            nt: n + 1,
            np_tri: refs.tri.np,
            np_wedge: refs.wedge.np,
            np_tet: refs.tet.np,
            dr_tri: RowMat::from_dmatrix(&refs.tri.dr),
            ds_tri: RowMat::from_dmatrix(&refs.tri.ds),
            dt_line: RowMat::from_dmatrix(&refs.interval.dt),
            lift_profile: [refs.interval.lift_bottom.clone(), refs.interval.lift_top.clone()],
            lumped_profile: [lumped0, lumped1],
            tri_mass: refs.tri.mass.clone(),
            tri_vertex_mass: refs.tri.vertex_mass.clone(),
            line_mass: refs.interval.mass.clone(),
            line_weights: w.clone(),
            edge_mass_weighted: refs.wedge.edge_mass_weighted.clone(),
            tet_dr: RowMat::from_dmatrix(&refs.tet.dr),
            tet_ds: RowMat::from_dmatrix(&refs.tet.ds),
            tet_dt: RowMat::from_dmatrix(&refs.tet.dt),
            tet_lift: std::array::from_fn(|f| RowMat::from_dmatrix(&refs.tet.lift[f])),
            tet_mass: refs.tet.mass.clone(),
            wedge_faces: refs.wedge.faces.clone(),
            tet_faces: refs.tet.faces.clone(),
            tri_edges: refs.tri.edges.clone(),
        }
    }

    pub fn face_profile(&self, mode: QuadratureMode) -> &[Vec<f64>; 2] {
        match mode {
            QuadratureMode::Exact => &self.lift_profile,
            QuadratureMode::Lumped => &self.lumped_profile,
        }
    }
}

/// Factored operators of one vertically mapped wedge.
#[derive(Debug, Clone, PartialEq)]
pub struct WedgeOperators {
    pub ltri: RowMat,
    pub quad_lift: [RowMat; 3],
    pub jf_tri: [f64; 2],
    pub rx: f64,
    pub ry: f64,
    pub sx: f64,
    pub sy: f64,
    pub tzj: f64,
    pub txj: Vec<f64>,
    pub tyj: Vec<f64>,
    /// `J` at the three bottom vertices (defines `M^{tri,k}`).
    pub j_vertex: [f64; 3],
}

impl WedgeOperators {
    /// Number of element-specific floats stored.
    pub fn stored_floats(&self) -> usize {
        self.ltri.len()
            + self.quad_lift.iter().map(|b| b.len()).sum::<usize>()
            + self.jf_tri.len()
            + 5
            + self.txj.len()
            + self.tyj.len()
            + self.j_vertex.len()
    }

    /// `M^{tri,k} = Σ_v J_v ∫ λ_v ℓ_i ℓ_j`.
    pub fn tri_mass(&self, shared: &SharedOperators) -> DMatrix<f64> {
        let mut m = &shared.tri_vertex_mass[0] * self.j_vertex[0];
        m += &shared.tri_vertex_mass[1] * self.j_vertex[1];
        m += &shared.tri_vertex_mass[2] * self.j_vertex[2];
        m
    }

    /// Outward unit normal of face `f`.
    pub fn normal(&self, f: usize) -> [f64; 3] {
        let v = match f {
            0 => [-self.txj[0], -self.tyj[0], -self.tzj],
            1 => {
                let n = self.txj.len() - 1;
                [self.txj[n], self.tyj[n], self.tzj]
            }
            2 => [-self.sx, -self.sy, 0.0],
            3 => [self.rx + self.sx, self.ry + self.sy, 0.0],
            _ => [-self.rx, -self.ry, 0.0],
        };
        let l = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        [v[0] / l, v[1] / l, v[2] / l]
    }
}

/// Operators of one affine tetrahedron: scalars only.
#[derive(Debug, Clone, PartialEq)]
pub struct TetOperators {
    /// Rows `∇r`, `∇s`, `∇t`.
    pub grad: [[f64; 3]; 3],
    pub j: f64,
    /// `J_f / J` for each face.
    pub lift_scale: [f64; 4],
    pub normals: [[f64; 3]; 4],
}

impl TetOperators {
    pub fn stored_floats(&self) -> usize {
        9 + 1 + 4 + 12
    }

    /// Physical differentiation matrix along axis `d` (0, 1, 2).
    pub fn diff_matrix(&self, shared: &SharedOperators, d: usize) -> DMatrix<f64> {
        shared.tet_dr.to_dmatrix() * self.grad[0][d]
            + shared.tet_ds.to_dmatrix() * self.grad[1][d]
            + shared.tet_dt.to_dmatrix() * self.grad[2][d]
    }
}

/// Mass-lumped wedge operators: block-diagonal mass with one
/// `w_j M^{tri,k}` block per GLL level. Differentiation and quad-face lifts
/// coincide with the exact ones for vertically mapped wedges; the
/// triangular-face lifts use the collocated profile `e / w`.
#[derive(Debug, Clone)]
pub struct LumpedWedgeOperators {
    pub mass_blocks: Vec<DMatrix<f64>>,
    pub factored: WedgeOperators,
    pub face_profile: [Vec<f64>; 2],
}

impl LumpedWedgeOperators {
    /// Dense block-diagonal mass matrix.
    pub fn mass_matrix(&self) -> DMatrix<f64> {
        let nb = self.mass_blocks.len();
        let np_tri = self.mass_blocks[0].nrows();
        let mut m = DMatrix::zeros(np_tri * nb, np_tri * nb);
        for (j, b) in self.mass_blocks.iter().enumerate() {
            for i in 0..np_tri {
                for k in 0..np_tri {
                    m[(i * nb + j, k * nb + j)] = b[(i, k)];
                }
            }
        }
        m
    }
}

pub fn build_wedge_operators(geom: &WedgeGeometry, shared: &SharedOperators) -> Result<WedgeOperators> {
    let mut ops = WedgeOperators {
        ltri: RowMat::zeros(0, 0),
        quad_lift: std::array::from_fn(|_| RowMat::zeros(0, 0)),
        jf_tri: geom.jf_tri,
        rx: geom.rx,
        ry: geom.ry,
        sx: geom.sx,
        sy: geom.sy,
        tzj: geom.tzj,
        txj: geom.txj.clone(),
        tyj: geom.tyj.clone(),
        j_vertex: geom.j_vertex,
    };
    let mtri = ops.tri_mass(shared);
    let singular = || Error::Operator { element: usize::MAX, msg: "weighted triangle mass matrix is not SPD".into() };
    let ltri = spd_solve(&mtri, &shared.tri_mass).ok_or_else(singular)?;
    ops.ltri = RowMat::from_dmatrix(&ltri);
    let nt = shared.nt;
    for e in 0..3 {
        // edge mass weighted by the linear face Jacobian
        let (a, b) = (e, (e + 1) % 3);
        let half_len = geom.edge_half_len[e];
        let wa = half_len * 0.5 * geom.heights[a];
        let wb = half_len * 0.5 * geom.heights[b];
        let medge = edge_weighted_mass(shared, wa, wb);
        let mut rhs = DMatrix::zeros(shared.np_tri, nt);
        for (k, &node) in shared.tri_edges[e].iter().enumerate() {
            for c in 0..nt {
                rhs[(node, c)] = medge[(k, c)];
            }
        }
        let block = spd_solve(&mtri, &rhs).ok_or_else(singular)?;
        ops.quad_lift[e] = RowMat::from_dmatrix(&block);
    }
    Ok(ops)
}

/// `∫ ℓ_a ℓ_b (wa (1-σ)/2 + wb (1+σ)/2) dσ` on the GLL basis.
fn edge_weighted_mass(shared: &SharedOperators, wa: f64, wb: f64) -> DMatrix<f64> {
    &shared.edge_mass_weighted[0] * wa + &shared.edge_mass_weighted[1] * wb
}

pub fn build_tet_operators(geom: &TetGeometry) -> TetOperators {
    TetOperators {
        grad: geom.grad,
        j: geom.j,
        lift_scale: geom.jf.map(|jf| jf / geom.j),
        normals: geom.normals,
    }
}

pub fn build_lumped_wedge_operators(geom: &WedgeGeometry, shared: &SharedOperators) -> Result<LumpedWedgeOperators> {
    let factored = build_wedge_operators(geom, shared)?;
    let mtri = factored.tri_mass(shared);
    let mass_blocks = shared.line_weights.iter().map(|&w| &mtri * w).collect();
    Ok(LumpedWedgeOperators {
        mass_blocks,
        factored,
        face_profile: shared.lumped_profile.clone(),
    })
}

/// Operators for a whole mesh.
#[derive(Debug, Clone)]
pub struct MeshOperators {
    pub shared: SharedOperators,
    pub wedges: Vec<WedgeOperators>,
    pub tets: Vec<TetOperators>,
    pub mode: QuadratureMode,
}

impl MeshOperators {
    pub fn build(geometry: &[ElementGeometry], refs: &ReferenceSet, mode: QuadratureMode) -> Result<Self> {
        let shared = SharedOperators::new(refs);
        let wedges = geometry
            .par_iter()
            .enumerate()
            .filter_map(|(e, g)| match g {
                ElementGeometry::Wedge(w) => Some(build_wedge_operators(w, &shared).map_err(|err| match err {
                    Error::Operator { msg, .. } => Error::Operator { element: e, msg },
                    other => other,
                })),
                ElementGeometry::Tet(_) => None,
            })
            .collect::<Result<Vec<_>>>()?;
        let tets = geometry
            .iter()
            .filter_map(|g| match g {
                ElementGeometry::Tet(t) => Some(build_tet_operators(t)),
                ElementGeometry::Wedge(_) => None,
            })
            .collect();
        Ok(Self { shared, wedges, tets, mode })
    }

    /// The 1D profiles used by the triangular-face lifts.
    pub fn face_profile(&self) -> &[Vec<f64>; 2] {
        self.shared.face_profile(self.mode)
    }

    /// `M u` on a wedge field (mass of the configured quadrature mode).
    pub fn wedge_mass_apply(&self, w: usize, u: &[f64], out: &mut [f64]) {
        let sh = &self.shared;
        let mtri = RowMat::from_dmatrix(&self.wedges[w].tri_mass(sh));
        let mut tmp = vec![0.0; u.len()];
        match self.mode {
            QuadratureMode::Exact => {
                line_apply(&RowMat::from_dmatrix(&sh.line_mass), u, sh.nt, &mut tmp);
            }
            QuadratureMode::Lumped => {
                for (k, v) in u.iter().enumerate() {
                    tmp[k] = v * sh.line_weights[k % sh.nt];
                }
            }
        }
        tri_apply(&mtri, &tmp, sh.nt, 1.0, out, false);
    }

    pub fn tet_mass_apply(&self, t: usize, u: &[f64], out: &mut [f64]) {
        let j = self.tets[t].j;
        let m = &self.shared.tet_mass;
        for i in 0..u.len() {
            out[i] = j * (0..u.len()).map(|k| m[(i, k)] * u[k]).sum::<f64>();
        }
    }
}

/// Per-element and total stored floats.
#[derive(Debug, Clone, PartialEq)]
pub struct StorageReport {
    pub degree: usize,
    pub wedge_floats: usize,
    pub tet_floats: usize,
    pub wedge_budget: usize,
    pub num_wedges: usize,
    pub num_tets: usize,
    pub total: usize,
}

/// Closed-form per-wedge budget `Np_tri^2 + 3 Np_tri (N+1) + 8 (N+1)`.
pub fn wedge_storage_budget(n: usize) -> usize {
    let np_tri = (n + 1) * (n + 2) / 2;
    np_tri * np_tri + 3 * np_tri * (n + 1) + 8 * (n + 1)
}

pub fn storage_report(ops: &MeshOperators) -> StorageReport {
    let n = ops.shared.degree;
    let wedge_floats = ops.wedges.iter().map(|w| w.stored_floats()).max().unwrap_or(0);
    let tet_floats = ops.tets.iter().map(|t| t.stored_floats()).max().unwrap_or(0);
    let total = ops.wedges.iter().map(|w| w.stored_floats()).sum::<usize>()
        + ops.tets.iter().map(|t| t.stored_floats()).sum::<usize>();
    StorageReport {
        degree: n,
        wedge_floats,
        tet_floats,
        wedge_budget: wedge_storage_budget(n),
        num_wedges: ops.wedges.len(),
        num_tets: ops.tets.len(),
        total,
    }
}

/// Physical gradient `(∂x u, ∂y u, ∂z u)` of a wedge field.
pub fn apply_wedge_derivatives(ops: &WedgeOperators, shared: &SharedOperators, u: &[f64]) -> [Vec<f64>; 3] {
    let nt = shared.nt;
    let np = u.len();
    let mut ur = vec![0.0; np];
    let mut us = vec![0.0; np];
    let mut ut = vec![0.0; np];
    let mut h = vec![0.0; np];
    tri_apply(&shared.dr_tri, u, nt, 1.0, &mut ur, false);
    tri_apply(&shared.ds_tri, u, nt, 1.0, &mut us, false);
    line_apply(&shared.dt_line, u, nt, &mut ut);
    tri_apply(&ops.ltri, &ut, nt, 1.0, &mut h, false);
    let mut dx = vec![0.0; np];
    let mut dy = vec![0.0; np];
    let mut dz = vec![0.0; np];
    for k in 0..np {
        let j = k % nt;
        dx[k] = ops.rx * ur[k] + ops.sx * us[k] + ops.txj[j] * h[k];
        dy[k] = ops.ry * ur[k] + ops.sy * us[k] + ops.tyj[j] * h[k];
        dz[k] = ops.tzj * h[k];
    }
    [dx, dy, dz]
}

/// Lift of per-face flux values (`fluxes[f]` ordered like the wedge face
/// node lists) into the volume, `Σ_f M^{-1} M_f F_f`.
pub fn apply_wedge_lift(
    ops: &WedgeOperators,
    shared: &SharedOperators,
    profile: &[Vec<f64>; 2],
    fluxes: &[Vec<f64>],
) -> Vec<f64> {
    let nt = shared.nt;
    let mut out = vec![0.0; shared.np_wedge];
    let mut lifted = vec![0.0; shared.np_tri];
    for f in 0..2 {
        crate::operators::kernels::dense_apply(&ops.ltri, &fluxes[f], ops.jf_tri[f], &mut lifted, false);
        for i in 0..shared.np_tri {
            for j in 0..nt {
                out[i * nt + j] += lifted[i] * profile[f][j];
            }
        }
    }
    for e in 0..3 {
        let b = &ops.quad_lift[e];
        let flux = &fluxes[2 + e];
        for i in 0..shared.np_tri {
            let row = b.row(i);
            for (a, &bia) in row.iter().enumerate() {
                for j in 0..nt {
                    out[i * nt + j] += bia * flux[a * nt + j];
                }
            }
        }
    }
    out
}
