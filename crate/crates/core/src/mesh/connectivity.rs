//! Face-to-face connectivity with coordinate-based node matching.

use std::collections::HashMap;

use super::{dist, ElementKind, HybridMesh, Point, REFLECTIVE};
use crate::reference::ReferenceSet;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceKind {
    Tri,
    Quad,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FaceLink {
    Interior {
        element: usize,
        face: usize,
        /// `perm[a]` is the index in the neighbour's face node list of my
        /// face node `a`.
        perm: Vec<usize>,
    },
    Boundary {
        tag: u32,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Connectivity {
    /// `links[e][f]` for every element and local face.
    pub links: Vec<Vec<FaceLink>>,
}

impl Connectivity {
    pub fn face_kind(mesh: &HybridMesh, e: usize, f: usize) -> FaceKind {
        match (mesh.kind(e), f) {
            (ElementKind::Wedge, 2..=4) => FaceKind::Quad,
            _ => FaceKind::Tri,
        }
    }

    pub fn num_interior_pairs(&self) -> usize {
        self.links
            .iter()
            .flatten()
            .filter(|l| matches!(l, FaceLink::Interior { .. }))
            .count()
            / 2
    }

    pub fn num_boundary_faces(&self) -> usize {
        self.links
            .iter()
            .flatten()
            .filter(|l| matches!(l, FaceLink::Boundary { .. }))
            .count()
    }
}

/// Volume node indices of face `f` of element `e`.
pub fn face_nodes<'a>(mesh: &HybridMesh, refs: &'a ReferenceSet, e: usize, f: usize) -> &'a [usize] {
    match mesh.kind(e) {
        ElementKind::Wedge => &refs.wedge.faces[f],
        ElementKind::Tet => &refs.tet.faces[f],
    }
}

/// Pair faces by their vertex sets and match face nodes by coordinates
/// (tolerance `1e-10 ×` element diameter). Unpaired faces are boundary faces
/// with the tag from `mesh.boundary`, or the reflective tag by default.
pub fn build_connectivity(mesh: &HybridMesh, refs: &ReferenceSet) -> Result<Connectivity> {
    let ne = mesh.num_elements();
    let mut owners: HashMap<Vec<usize>, Vec<(usize, usize)>> = HashMap::new();
    for e in 0..ne {
        for f in 0..mesh.num_faces(e) {
            let mut key = mesh.face_vertex_ids(e, f);
            key.sort_unstable();
            owners.entry(key).or_default().push((e, f));
        }
    }
    let tags: HashMap<(usize, usize), u32> =
        mesh.boundary.iter().map(|b| ((b.element, b.face), b.tag)).collect();

    let mut links: Vec<Vec<FaceLink>> = (0..ne)
        .map(|e| {
            (0..mesh.num_faces(e))
                .map(|f| FaceLink::Boundary {
                    tag: tags.get(&(e, f)).copied().unwrap_or(REFLECTIVE),
                })
                .collect()
        })
        .collect();

    let coords: Vec<Vec<Point>> = (0..ne).map(|e| mesh.node_coordinates(e, refs)).collect();
    let mut keys: Vec<&Vec<usize>> = owners.keys().collect();
    keys.sort();
    for key in keys {
        let list = &owners[key];
        match list.len() {
            1 => {}
            2 => {
                let (e1, f1) = list[0];
                let (e2, f2) = list[1];
                if Connectivity::face_kind(mesh, e1, f1) != Connectivity::face_kind(mesh, e2, f2) {
                    return Err(Error::Mesh(format!(
                        "face {f1} of element {e1} and face {f2} of element {e2} share vertices but differ in type"
                    )));
                }
                let tol = 1e-10 * mesh.diameter(e1).min(mesh.diameter(e2));
                let p12 = match_nodes(mesh, refs, &coords, (e1, f1), (e2, f2), tol)?;
                let p21 = match_nodes(mesh, refs, &coords, (e2, f2), (e1, f1), tol)?;
                links[e1][f1] = FaceLink::Interior { element: e2, face: f2, perm: p12 };
                links[e2][f2] = FaceLink::Interior { element: e1, face: f1, perm: p21 };
            }
            _ => {
                return Err(Error::Mesh(format!(
                    "face with vertices {key:?} is shared by {} elements",
                    list.len()
                )))
            }
        }
    }
    Ok(Connectivity { links })
}

fn match_nodes(
    mesh: &HybridMesh,
    refs: &ReferenceSet,
    coords: &[Vec<Point>],
    (e1, f1): (usize, usize),
    (e2, f2): (usize, usize),
    tol: f64,
) -> Result<Vec<usize>> {
    let n1 = face_nodes(mesh, refs, e1, f1);
    let n2 = face_nodes(mesh, refs, e2, f2);
    n1.iter()
        .enumerate()
        .map(|(a, &k1)| {
            let x = coords[e1][k1];
            let (best, d) = n2
                .iter()
                .enumerate()
                .map(|(b, &k2)| (b, dist(x, coords[e2][k2])))
                .min_by(|p, q| p.1.total_cmp(&q.1))
                .expect("faces have nodes");
            if d > tol {
                Err(Error::Mesh(format!(
                    "node {a} of face {f1} of element {e1} has no partner on face {f2} of element {e2} (distance {d:.3e})"
                )))
            } else {
                Ok(best)
            }
        })
        .collect()
}
