//! Hybrid tetrahedron/wedge meshes: data model, validation, generators,
//! face connectivity and file I/O.
//!
//! Elements are numbered wedges first, then tets; element `e >= wedges.len()`
//! is tet `e - wedges.len()`.

pub mod connectivity;
pub mod families;
pub mod generate;
pub mod io;

pub use connectivity::{build_connectivity, face_nodes, Connectivity, FaceKind, FaceLink};
pub use families::{family_mesh, sixteen_wedge_mesh, MeshFamily};
pub use generate::{
    extrude_layer, hybrid_layered_box, perturb_vertically, stack_layers, structured_hybrid_box,
    structured_surface, DiagonalSplit, LayerSpec, SurfaceMesh,
};
pub use io::{load_mesh, load_surface, save_mesh, save_surface};

use crate::reference::{ReferenceSet, WedgeRef};
use crate::reference::tet::TetRef;
use crate::{Error, Result};

pub type Point = [f64; 3];

/// Boundary tag for the reflective (pressure-release) condition `p = 0`.
pub const REFLECTIVE: u32 = 1;

/// Per-element material constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Medium {
    /// Density ρ.
    pub rho: f64,
    /// Bulk modulus κ.
    pub kappa: f64,
}

impl Medium {
    pub const UNIT: Medium = Medium { rho: 1.0, kappa: 1.0 };

    pub fn new(rho: f64, kappa: f64) -> Self {
        Self { rho, kappa }
    }

    /// Wave speed `c = sqrt(κ/ρ)`.
    pub fn speed(&self) -> f64 {
        (self.kappa / self.rho).sqrt()
    }

    /// Acoustic impedance `ρc`.
    pub fn impedance(&self) -> f64 {
        self.rho * self.speed()
    }
}

impl Default for Medium {
    fn default() -> Self {
        Self::UNIT
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    Wedge,
    Tet,
}

/// Explicitly tagged boundary face.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryFace {
    pub element: usize,
    pub face: usize,
    pub tag: u32,
}

/// Local vertex lists of the wedge faces: bottom, top, then the quads over
/// bottom-triangle edges v1v2, v2v3, v3v1.
pub const WEDGE_FACE_VERTICES: [&[usize]; 5] =
    [&[0, 1, 2], &[3, 4, 5], &[0, 1, 4, 3], &[1, 2, 5, 4], &[2, 0, 3, 5]];

#[derive(Debug, Clone, PartialEq)]
pub struct HybridMesh {
    pub vertices: Vec<Point>,
    /// Bottom triangle `v1 v2 v3` (counterclockwise seen from above), then the
    /// top vertices `v4 v5 v6` above `v1 v2 v3`.
    pub wedges: Vec<[usize; 6]>,
    pub tets: Vec<[usize; 4]>,
    /// One entry per element, wedges first.
    pub media: Vec<Medium>,
    pub boundary: Vec<BoundaryFace>,
}

impl HybridMesh {
    pub fn num_elements(&self) -> usize {
        self.wedges.len() + self.tets.len()
    }

    pub fn kind(&self, e: usize) -> ElementKind {
        if e < self.wedges.len() {
            ElementKind::Wedge
        } else {
            ElementKind::Tet
        }
    }

    pub fn num_faces(&self, e: usize) -> usize {
        match self.kind(e) {
            ElementKind::Wedge => 5,
            ElementKind::Tet => 4,
        }
    }

    pub fn element_vertex_ids(&self, e: usize) -> &[usize] {
        match self.kind(e) {
            ElementKind::Wedge => &self.wedges[e],
            ElementKind::Tet => &self.tets[e - self.wedges.len()],
        }
    }

    pub fn element_vertices(&self, e: usize) -> Vec<Point> {
        self.element_vertex_ids(e).iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn wedge_vertices(&self, w: usize) -> [Point; 6] {
        self.wedges[w].map(|v| self.vertices[v])
    }

    pub fn tet_vertices(&self, t: usize) -> [Point; 4] {
        self.tets[t].map(|v| self.vertices[v])
    }

    /// Global vertex ids of local face `f` of element `e`.
    pub fn face_vertex_ids(&self, e: usize, f: usize) -> Vec<usize> {
        let ids = self.element_vertex_ids(e);
        match self.kind(e) {
            ElementKind::Wedge => WEDGE_FACE_VERTICES[f].iter().map(|&l| ids[l]).collect(),
            ElementKind::Tet => crate::reference::tet::TET_FACE_VERTICES[f].iter().map(|&l| ids[l]).collect(),
        }
    }

    /// Largest distance between two vertices of element `e`.
    pub fn diameter(&self, e: usize) -> f64 {
        let v = self.element_vertices(e);
        let mut d: f64 = 0.0;
        for a in 0..v.len() {
            for b in a + 1..v.len() {
                d = d.max(dist(v[a], v[b]));
            }
        }
        d
    }

    /// Physical coordinates of the reference nodes of element `e`.
    pub fn node_coordinates(&self, e: usize, refs: &ReferenceSet) -> Vec<Point> {
        match self.kind(e) {
            ElementKind::Wedge => wedge_map_nodes(&self.wedge_vertices(e), &refs.wedge),
            ElementKind::Tet => tet_map_nodes(&self.tet_vertices(e - self.wedges.len()), &refs.tet),
        }
    }

    /// Check ids, media, the vertically-mapped predicate and positive volume.
    pub fn validate(&self) -> Result<()> {
        let nv = self.vertices.len();
        if self.media.len() != self.num_elements() {
            return Err(Error::Mesh(format!(
                "{} media entries for {} elements",
                self.media.len(),
                self.num_elements()
            )));
        }
        for (i, p) in self.vertices.iter().enumerate() {
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::Mesh(format!("vertex {i} has non-finite coordinates")));
            }
        }
        for e in 0..self.num_elements() {
            let ids = self.element_vertex_ids(e);
            if let Some(&bad) = ids.iter().find(|&&v| v >= nv) {
                return Err(Error::Mesh(format!("element {e} references missing vertex {bad}")));
            }
            let m = self.media[e];
            if !(m.rho > 0.0 && m.kappa > 0.0 && m.rho.is_finite() && m.kappa.is_finite()) {
                return Err(Error::Mesh(format!(
                    "element {e} has invalid medium (rho = {}, kappa = {}); both must be positive",
                    m.rho, m.kappa
                )));
            }
        }
        for (w, _) in self.wedges.iter().enumerate() {
            let v = self.wedge_vertices(w);
            if !is_vertically_mapped(&v) {
                return Err(Error::Mesh(format!("wedge {w} is not vertically mapped")));
            }
            let (area, heights) = wedge_area_heights(&v);
            if area <= 0.0 || heights.iter().any(|&h| h <= 0.0) {
                return Err(Error::Geometry {
                    element: w,
                    msg: "wedge has non-positive Jacobian (bottom triangle must be counterclockwise and below the top)".into(),
                });
            }
        }
        for (t, _) in self.tets.iter().enumerate() {
            if tet_signed_volume(&self.tet_vertices(t)) <= 0.0 {
                return Err(Error::Geometry {
                    element: self.wedges.len() + t,
                    msg: "tet has non-positive volume".into(),
                });
            }
        }
        for b in &self.boundary {
            if b.element >= self.num_elements() || b.face >= self.num_faces(b.element) {
                return Err(Error::Mesh(format!(
                    "boundary record refers to missing face {} of element {}",
                    b.face, b.element
                )));
            }
        }
        Ok(())
    }

    /// Exact volume of element `e` (linear geometry).
    pub fn element_volume(&self, e: usize) -> f64 {
        match self.kind(e) {
            ElementKind::Wedge => {
                let (area, h) = wedge_area_heights(&self.wedge_vertices(e));
                area * (h[0] + h[1] + h[2]) / 3.0
            }
            ElementKind::Tet => tet_signed_volume(&self.tet_vertices(e - self.wedges.len())),
        }
    }

    pub fn total_volume(&self) -> f64 {
        (0..self.num_elements()).map(|e| self.element_volume(e)).sum()
    }
}

pub(crate) fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Signed area of the bottom triangle (positive when counterclockwise seen
/// from above) and the three column heights.
pub fn wedge_area_heights(v: &[Point; 6]) -> (f64, [f64; 3]) {
    let area = 0.5 * ((v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]));
    (area, [v[3][2] - v[0][2], v[4][2] - v[1][2], v[5][2] - v[2][2]])
}

pub fn tet_signed_volume(v: &[Point; 4]) -> f64 {
    let a = [v[1][0] - v[0][0], v[1][1] - v[0][1], v[1][2] - v[0][2]];
    let b = [v[2][0] - v[0][0], v[2][1] - v[0][1], v[2][2] - v[0][2]];
    let c = [v[3][0] - v[0][0], v[3][1] - v[0][1], v[3][2] - v[0][2]];
    (a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])) / 6.0
}

/// True when each vertex pair (v1,v4), (v2,v5), (v3,v6) shares its (x, y)
/// coordinates (to 1e-12 relative to the element size) and the wedge has
/// nonzero volume.
pub fn is_vertically_mapped(v: &[Point; 6]) -> bool {
    let scale = (0..6)
        .flat_map(|a| (0..6).map(move |b| (a, b)))
        .map(|(a, b)| dist(v[a], v[b]))
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return false;
    }
    let tol = 1e-12 * scale;
    for k in 0..3 {
        if (v[k][0] - v[k + 3][0]).abs() > tol || (v[k][1] - v[k + 3][1]).abs() > tol {
            return false;
        }
    }
    let (area, h) = wedge_area_heights(v);
    let volume = area * (h[0] + h[1] + h[2]) / 3.0;
    volume.abs() > 1e-12 * scale.powi(3)
}

fn wedge_map_nodes(v: &[Point; 6], wref: &WedgeRef) -> Vec<Point> {
    (0..wref.np)
        .map(|k| {
            let phi = WedgeRef::vertex_functions(wref.r[k], wref.s[k], wref.t[k]);
            let mut x = [0.0; 3];
            for (m, p) in phi.iter().enumerate() {
                for d in 0..3 {
                    x[d] += p * v[m][d];
                }
            }
            x
        })
        .collect()
}

fn tet_map_nodes(v: &[Point; 4], tref: &TetRef) -> Vec<Point> {
    (0..tref.np)
        .map(|k| {
            let phi = TetRef::vertex_functions(tref.r[k], tref.s[k], tref.t[k]);
            let mut x = [0.0; 3];
            for (m, p) in phi.iter().enumerate() {
                for d in 0..3 {
                    x[d] += p * v[m][d];
                }
            }
            x
        })
        .collect()
}
