//! Geometric factors, Jacobians, face Jacobians and normals.
//!
//! For a vertically mapped wedge the map is
//! `x(r,s) = Σ λ_v(r,s) x_v`, `y` likewise, and
//! `z(r,s,t) = Σ λ_v(r,s) (z_v^b (1-t)/2 + z_v^t (1+t)/2)`,
//! so `x_t = y_t = 0`. Writing `A = x_r y_s - x_s y_r`:
//! - `J = A z_t` with `z_t` affine in `(r, s)` and independent of `t`;
//! - `r_x = y_s/A`, `r_y = -x_s/A`, `s_x = -y_r/A`, `s_y = x_r/A`, `r_z = s_z = 0`;
//! - `t_x J = y_r z_s - z_r y_s` and `t_y J = z_r x_s - x_r z_s` are linear
//!   in `t` only, and `t_z J = A` is constant.

use crate::mesh::{ElementKind, HybridMesh, Point};
use crate::reference::{ReferenceSet, TriangleRef};
use crate::{Error, Result};

type V3 = [f64; 3];

fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: V3, b: V3) -> V3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot3(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: V3) -> f64 {
    dot3(a, a).sqrt()
}

fn scale(a: V3, s: f64) -> V3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// Geometric data of one vertically mapped wedge.
#[derive(Debug, Clone, PartialEq)]
pub struct WedgeGeometry {
    pub rx: f64,
    pub ry: f64,
    pub sx: f64,
    pub sy: f64,
    /// `t_z J = x_r y_s - x_s y_r`.
    pub tzj: f64,
    /// `t_x J` and `t_y J` at the GLL nodes in `t`.
    pub txj: Vec<f64>,
    pub tyj: Vec<f64>,
    /// `J` at the triangle nodes (constant in `t`).
    pub j_tri: Vec<f64>,
    /// `J` at the three bottom-triangle vertices.
    pub j_vertex: [f64; 3],
    /// Bottom and top face Jacobians (physical area / 2).
    pub jf_tri: [f64; 2],
    /// Half lengths of the three bottom-triangle edges.
    pub edge_half_len: [f64; 3],
    /// Column heights `z_top - z_bottom` at the bottom vertices.
    pub heights: [f64; 3],
    /// `z_r` and `z_s` at `t = -1` and `t = 1`.
    zr: [f64; 2],
    zs: [f64; 2],
    xr: [f64; 2],
    xs: [f64; 2],
}

/// Geometric data of one affine tetrahedron.
#[derive(Debug, Clone, PartialEq)]
pub struct TetGeometry {
    /// Rows `∇r`, `∇s`, `∇t`.
    pub grad: [V3; 3],
    pub j: f64,
    pub normals: [V3; 4],
    /// Face Jacobians (physical area / 2).
    pub jf: [f64; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub enum ElementGeometry {
    Wedge(WedgeGeometry),
    Tet(TetGeometry),
}

/// Per-face outward normal and face Jacobian values. Triangular faces carry
/// one value; quadrilateral faces carry one value per edge node.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceData {
    pub normal: V3,
    pub jf: Vec<f64>,
}

impl WedgeGeometry {
    /// `z_t` at reference point `(r, s)`.
    pub fn zt(&self, r: f64, s: f64) -> f64 {
        let l = TriangleRef::vertex_functions(r, s);
        0.5 * (l[0] * self.heights[0] + l[1] * self.heights[1] + l[2] * self.heights[2])
    }

    /// `J` at any reference point (independent of `t`).
    pub fn jacobian(&self, r: f64, s: f64, _t: f64) -> f64 {
        self.tzj * self.zt(r, s)
    }

    /// `(t_x J, t_y J)` at any `t`.
    pub fn txj_tyj(&self, t: f64) -> (f64, f64) {
        let (b, u) = (0.5 * (1.0 - t), 0.5 * (1.0 + t));
        let zr = b * self.zr[0] + u * self.zr[1];
        let zs = b * self.zs[0] + u * self.zs[1];
        let (xr, yr) = (self.xr[0], self.xr[1]);
        let (xs, ys) = (self.xs[0], self.xs[1]);
        (yr * zs - zr * ys, zr * xs - xr * zs)
    }

    /// Full inverse Jacobian rows `(∇r, ∇s, ∇t)` at a reference point.
    pub fn metric_at(&self, r: f64, s: f64, t: f64) -> [V3; 3] {
        let j = self.jacobian(r, s, t);
        let (txj, tyj) = self.txj_tyj(t);
        [
            [self.rx, self.ry, 0.0],
            [self.sx, self.sy, 0.0],
            [txj / j, tyj / j, self.tzj / j],
        ]
    }

    /// Outward unit normal of face `f` (0 bottom, 1 top, 2..=4 quads).
    pub fn normal(&self, f: usize) -> V3 {
        match f {
            0 | 1 => {
                let t = if f == 0 { -1.0 } else { 1.0 };
                let (a, b) = self.txj_tyj(t);
                let v = [a, b, self.tzj];
                let sgn = if f == 0 { -1.0 } else { 1.0 };
                scale(v, sgn / norm(v))
            }
            _ => {
                let g = match f {
                    2 => [-self.sx, -self.sy, 0.0],
                    3 => [self.rx + self.sx, self.ry + self.sy, 0.0],
                    _ => [-self.rx, -self.ry, 0.0],
                };
                scale(g, 1.0 / norm(g))
            }
        }
    }

    /// Quad face Jacobian at edge parameter `σ ∈ [-1, 1]` (constant in `t`).
    pub fn quad_jf(&self, e: usize, sigma: f64) -> f64 {
        let (a, b) = (e, (e + 1) % 3);
        let h = 0.5 * (1.0 - sigma) * self.heights[a] + 0.5 * (1.0 + sigma) * self.heights[b];
        self.edge_half_len[e] * 0.5 * h
    }

    pub fn volume(&self) -> f64 {
        // ∫ J over the wedge: 2 ∫_T J, and ∫_T λ_v = 2/3
        4.0 / 3.0 * self.j_vertex.iter().sum::<f64>()
    }

    pub fn surface_area(&self) -> f64 {
        let tri = 2.0 * (self.jf_tri[0] + self.jf_tri[1]);
        let quads: f64 = (0..3)
            .map(|e| 2.0 * self.edge_half_len[e] * 0.5 * (self.heights[e] + self.heights[(e + 1) % 3]))
            .sum();
        tri + quads
    }
}

impl TetGeometry {
    pub fn volume(&self) -> f64 {
        self.j * 4.0 / 3.0
    }

    pub fn surface_area(&self) -> f64 {
        2.0 * self.jf.iter().sum::<f64>()
    }
}

impl ElementGeometry {
    pub fn kind(&self) -> ElementKind {
        match self {
            ElementGeometry::Wedge(_) => ElementKind::Wedge,
            ElementGeometry::Tet(_) => ElementKind::Tet,
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            ElementGeometry::Wedge(g) => g.volume(),
            ElementGeometry::Tet(g) => g.volume(),
        }
    }

    pub fn surface_area(&self) -> f64 {
        match self {
            ElementGeometry::Wedge(g) => g.surface_area(),
            ElementGeometry::Tet(g) => g.surface_area(),
        }
    }

    /// Characteristic size `volume / surface area`.
    pub fn h(&self) -> f64 {
        self.volume() / self.surface_area()
    }
}

fn geometry_error(msg: impl Into<String>) -> Error {
    Error::Geometry { element: usize::MAX, msg: msg.into() }
}

/// Closed-form geometric factors of a vertically mapped wedge.
pub fn wedge_geometry(v: &[Point; 6], refs: &ReferenceSet) -> Result<WedgeGeometry> {
    if !crate::mesh::is_vertically_mapped(v) {
        return Err(geometry_error("wedge is not vertically mapped"));
    }
    let xr = [0.5 * (v[1][0] - v[0][0]), 0.5 * (v[1][1] - v[0][1])];
    let xs = [0.5 * (v[2][0] - v[0][0]), 0.5 * (v[2][1] - v[0][1])];
    let a2 = xr[0] * xs[1] - xs[0] * xr[1];
    let heights = [v[3][2] - v[0][2], v[4][2] - v[1][2], v[5][2] - v[2][2]];
    let j_vertex = heights.map(|h| 0.5 * a2 * h);
    if j_vertex.iter().any(|&j| !(j > 0.0)) {
        return Err(geometry_error(format!("non-positive Jacobian (vertex values {j_vertex:?})")));
    }
    let zr = [0.5 * (v[1][2] - v[0][2]), 0.5 * (v[4][2] - v[3][2])];
    let zs = [0.5 * (v[2][2] - v[0][2]), 0.5 * (v[5][2] - v[3][2])];
    let mut g = WedgeGeometry {
        rx: xs[1] / a2,
        ry: -xs[0] / a2,
        sx: -xr[1] / a2,
        sy: xr[0] / a2,
        tzj: a2,
        txj: Vec::new(),
        tyj: Vec::new(),
        j_tri: Vec::new(),
        j_vertex,
        jf_tri: [0.0; 2],
        edge_half_len: [0.0; 3],
        heights,
        zr,
        zs,
        xr: [xr[0], xr[1]],
        xs: [xs[0], xs[1]],
    };
    let (txj, tyj): (Vec<f64>, Vec<f64>) = refs.interval.nodes.iter().map(|&t| g.txj_tyj(t)).unzip();
    g.txj = txj;
    g.tyj = tyj;
    g.j_tri = (0..refs.tri.np).map(|i| g.jacobian(refs.tri.r[i], refs.tri.s[i], 0.0)).collect();
    for (f, t) in [(0, -1.0), (1, 1.0)] {
        let (a, b) = g.txj_tyj(t);
        g.jf_tri[f] = norm([a, b, a2]);
    }
    for e in 0..3 {
        let (p, q) = (v[e], v[(e + 1) % 3]);
        g.edge_half_len[e] = 0.5 * ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt();
    }
    Ok(g)
}

/// Constant geometric factors of an affine tetrahedron.
pub fn tet_geometry(v: &[Point; 4]) -> Result<TetGeometry> {
    let xr = scale(sub(v[1], v[0]), 0.5);
    let xs = scale(sub(v[2], v[0]), 0.5);
    let xt = scale(sub(v[3], v[0]), 0.5);
    let j = dot3(xr, cross(xs, xt));
    if !(j > 0.0) {
        return Err(geometry_error(format!("degenerate or inverted tet (J = {j:e})")));
    }
    let grad = [scale(cross(xs, xt), 1.0 / j), scale(cross(xt, xr), 1.0 / j), scale(cross(xr, xs), 1.0 / j)];
    let face_dirs = [
        scale(grad[2], -1.0),
        scale(grad[1], -1.0),
        [grad[0][0] + grad[1][0] + grad[2][0], grad[0][1] + grad[1][1] + grad[2][1], grad[0][2] + grad[1][2] + grad[2][2]],
        scale(grad[0], -1.0),
    ];
    let normals = face_dirs.map(|d| scale(d, 1.0 / norm(d)));
    let jf = crate::reference::tet::TET_FACE_VERTICES.map(|[a, b, c]| 0.25 * norm(cross(sub(v[b], v[a]), sub(v[c], v[a]))));
    Ok(TetGeometry { grad, j, normals, jf })
}

/// Normals and face Jacobians of every face of an element.
pub fn face_normals_and_jacobians(geom: &ElementGeometry, refs: &ReferenceSet) -> Vec<FaceData> {
    match geom {
        ElementGeometry::Wedge(g) => {
            let mut out = vec![
                FaceData { normal: g.normal(0), jf: vec![g.jf_tri[0]] },
                FaceData { normal: g.normal(1), jf: vec![g.jf_tri[1]] },
            ];
            for e in 0..3 {
                out.push(FaceData {
                    normal: g.normal(2 + e),
                    jf: refs.interval.nodes.iter().map(|&sig| g.quad_jf(e, sig)).collect(),
                });
            }
            out
        }
        ElementGeometry::Tet(g) => (0..4).map(|f| FaceData { normal: g.normals[f], jf: vec![g.jf[f]] }).collect(),
    }
}

/// Geometry of every element, with element ids attached to errors.
pub fn compute_geometry(mesh: &HybridMesh, refs: &ReferenceSet) -> Result<Vec<ElementGeometry>> {
    let relabel = |e: usize| {
        move |err: Error| match err {
            Error::Geometry { msg, .. } => Error::Geometry { element: e, msg },
            other => other,
        }
    };
    (0..mesh.num_elements())
        .map(|e| match mesh.kind(e) {
            ElementKind::Wedge => wedge_geometry(&mesh.wedge_vertices(e), refs).map(ElementGeometry::Wedge).map_err(relabel(e)),
            ElementKind::Tet => tet_geometry(&mesh.tet_vertices(e - mesh.wedges.len())).map(ElementGeometry::Tet).map_err(relabel(e)),
        })
        .collect()
}
