//! Layered wedge meshes, structured hybrid boxes and vertical perturbation.

use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{tet_signed_volume, HybridMesh, Medium, Point};
use crate::{Error, Result};

/// Surface triangulation with per-vertex bottom and top heights.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMesh {
    pub xy: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub z_bottom: Vec<f64>,
    pub z_top: Vec<f64>,
}

/// Which diagonal splits each structured quad (and, consistently, each hex
/// face) into triangles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiagonalSplit {
    /// Diagonal from `(i, j)` to `(i+1, j+1)`.
    #[default]
    Main,
    /// Diagonal from `(i+1, j)` to `(i, j+1)`.
    Anti,
}

/// One layer of a stacked wedge mesh.
pub struct LayerSpec<'a> {
    pub bottom: Box<dyn Fn(f64, f64) -> f64 + 'a>,
    pub top: Box<dyn Fn(f64, f64) -> f64 + 'a>,
    /// Number of wedge sublayers.
    pub layers: usize,
    pub medium: Medium,
}

impl<'a> LayerSpec<'a> {
    pub fn flat(z0: f64, z1: f64, layers: usize, medium: Medium) -> Self {
        Self {
            bottom: Box::new(move |_, _| z0),
            top: Box::new(move |_, _| z1),
            layers,
            medium,
        }
    }
}

/// Structured triangulation of `[x0,x1] × [y0,y1]` with `nx × ny` quads.
/// Vertex `(i, j)` has index `j * (nx+1) + i`; triangles are counterclockwise.
pub fn structured_surface(
    nx: usize,
    ny: usize,
    x: [f64; 2],
    y: [f64; 2],
    split: DiagonalSplit,
) -> (Vec<[f64; 2]>, Vec<[usize; 3]>) {
    let mut xy = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            xy.push([
                x[0] + (x[1] - x[0]) * i as f64 / nx as f64,
                y[0] + (y[1] - y[0]) * j as f64 / ny as f64,
            ]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut tris = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            match split {
                DiagonalSplit::Main => {
                    tris.push([a, b, c]);
                    tris.push([a, c, d]);
                }
                DiagonalSplit::Anti => {
                    tris.push([a, b, d]);
                    tris.push([b, c, d]);
                }
            }
        }
    }
    (xy, tris)
}

fn ccw(xy: &[[f64; 2]], t: [usize; 3]) -> [usize; 3] {
    let [a, b, c] = t;
    let area = (xy[b][0] - xy[a][0]) * (xy[c][1] - xy[a][1]) - (xy[c][0] - xy[a][0]) * (xy[b][1] - xy[a][1]);
    if area < 0.0 {
        [a, c, b]
    } else {
        t
    }
}

/// Build wedges between consecutive height levels. `levels[m][v]` is the
/// height of surface vertex `v` at level `m`; `media[m]` is the medium of the
/// sublayer between levels `m` and `m+1`. Vertex `(v, m)` gets id `m * nv + v`.
fn stack_levels(
    xy: &[[f64; 2]],
    triangles: &[[usize; 3]],
    levels: &[Vec<f64>],
    media: &[Medium],
) -> HybridMesh {
    let nv = xy.len();
    let mut vertices = Vec::with_capacity(nv * levels.len());
    for lev in levels {
        for (v, p) in xy.iter().enumerate() {
            vertices.push([p[0], p[1], lev[v]]);
        }
    }
    let tris: Vec<[usize; 3]> = triangles.iter().map(|&t| ccw(xy, t)).collect();
    let mut wedges = Vec::with_capacity(tris.len() * media.len());
    let mut wmedia = Vec::with_capacity(tris.len() * media.len());
    for (m, medium) in media.iter().enumerate() {
        let (lo, hi) = (m * nv, (m + 1) * nv);
        for t in &tris {
            wedges.push([lo + t[0], lo + t[1], lo + t[2], hi + t[0], hi + t[1], hi + t[2]]);
            wmedia.push(*medium);
        }
    }
    HybridMesh {
        vertices,
        wedges,
        tets: Vec::new(),
        media: wmedia,
        boundary: Vec::new(),
    }
}

pub(crate) fn stack_levels_uniform(
    xy: &[[f64; 2]],
    triangles: &[[usize; 3]],
    levels: &[Vec<f64>],
    medium: Medium,
) -> HybridMesh {
    stack_levels(xy, triangles, levels, &vec![medium; levels.len() - 1])
}

/// Extrude a surface into `layers` wedge sublayers between its bottom and top
/// heights, with interfaces at `z_b + (m/L)(z_t - z_b)`.
pub fn extrude_layer(surface: &SurfaceMesh, layers: usize, medium: Medium) -> Result<HybridMesh> {
    if layers == 0 {
        return Err(Error::Mesh("layer count must be at least 1".into()));
    }
    for (v, (zb, zt)) in surface.z_bottom.iter().zip(&surface.z_top).enumerate() {
        if zt <= zb {
            return Err(Error::Mesh(format!(
                "inverted layer at surface vertex {v}: z_top = {zt} <= z_bottom = {zb}"
            )));
        }
    }
    let levels: Vec<Vec<f64>> = (0..=layers)
        .map(|m| {
            let f = m as f64 / layers as f64;
            surface
                .z_bottom
                .iter()
                .zip(&surface.z_top)
                .map(|(zb, zt)| if m == layers { *zt } else { zb + f * (zt - zb) })
                .collect()
        })
        .collect();
    let mesh = stack_levels(&surface.xy, &surface.triangles, &levels, &vec![medium; layers]);
    mesh.validate()?;
    Ok(mesh)
}

/// Stack layers over the surface triangulation `(xy, triangles)`. Consecutive
/// layers must share their interface surface.
pub fn stack_layers(xy: &[[f64; 2]], triangles: &[[usize; 3]], specs: &[LayerSpec]) -> Result<HybridMesh> {
    if specs.is_empty() {
        return Err(Error::Mesh("at least one layer is required".into()));
    }
    let mut levels: Vec<Vec<f64>> = Vec::new();
    let mut media = Vec::new();
    for (k, spec) in specs.iter().enumerate() {
        if spec.layers == 0 {
            return Err(Error::Mesh(format!("layer {k} has zero sublayers")));
        }
        let zb: Vec<f64> = xy.iter().map(|p| (spec.bottom)(p[0], p[1])).collect();
        let zt: Vec<f64> = xy.iter().map(|p| (spec.top)(p[0], p[1])).collect();
        for v in 0..xy.len() {
            if zt[v] <= zb[v] {
                return Err(Error::Mesh(format!(
                    "inverted layer {k} at surface vertex {v}: z_top = {} <= z_bottom = {}",
                    zt[v], zb[v]
                )));
            }
        }
        if let Some(prev) = levels.last() {
            for v in 0..xy.len() {
                if (prev[v] - zb[v]).abs() > 1e-12 * (1.0 + zb[v].abs()) {
                    return Err(Error::Mesh(format!(
                        "layer {k} bottom does not match layer {} top at surface vertex {v} ({} vs {})",
                        k - 1,
                        zb[v],
                        prev[v]
                    )));
                }
            }
        } else {
            levels.push(zb.clone());
        }
        for m in 1..=spec.layers {
            let f = m as f64 / spec.layers as f64;
            levels.push(
                (0..xy.len())
                    .map(|v| if m == spec.layers { zt[v] } else { zb[v] + f * (zt[v] - zb[v]) })
                    .collect(),
            );
            media.push(spec.medium);
        }
    }
    let mesh = stack_levels(xy, triangles, &levels, &media);
    mesh.validate()?;
    Ok(mesh)
}

/// Box `[-1,1]^2 × [-1, z_0]` of Kuhn-subdivided hexes (6 tets each) below a
/// stack of wedge layers over the matching structured surface triangulation.
/// The first layer's bottom must be the flat plane `z = z_0`.
pub fn hybrid_layered_box(
    nx: usize,
    ny: usize,
    nz_tet: usize,
    split: DiagonalSplit,
    tet_medium: Medium,
    layers: &[LayerSpec],
) -> Result<HybridMesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::Mesh("nx and ny must be positive".into()));
    }
    let (xy, tris) = structured_surface(nx, ny, [-1.0, 1.0], [-1.0, 1.0], split);
    let nv = xy.len();
    let z_tet_top = match layers.first() {
        Some(l) => {
            let z0 = (l.bottom)(xy[0][0], xy[0][1]);
            if xy.iter().any(|p| ((l.bottom)(p[0], p[1]) - z0).abs() > 1e-12) {
                return Err(Error::Mesh("bottom of the wedge region above tets must be flat".into()));
            }
            z0
        }
        None => 1.0,
    };
    let mut mesh = if layers.is_empty() {
        HybridMesh {
            vertices: Vec::new(),
            wedges: Vec::new(),
            tets: Vec::new(),
            media: Vec::new(),
            boundary: Vec::new(),
        }
    } else {
        stack_layers(&xy, &tris, layers)?
    };
    if nz_tet == 0 {
        if layers.is_empty() {
            return Err(Error::Mesh("box has neither tets nor wedges".into()));
        }
        return Ok(mesh);
    }
    if z_tet_top <= -1.0 {
        return Err(Error::Mesh("tet region has non-positive height".into()));
    }
    // prepend tet grid levels 0..nz_tet-1; level nz_tet coincides with wedge level 0
    let dz = (z_tet_top + 1.0) / nz_tet as f64;
    let mut vertices: Vec<Point> = Vec::with_capacity(nv * nz_tet + mesh.vertices.len());
    for k in 0..nz_tet {
        for p in &xy {
            vertices.push([p[0], p[1], -1.0 + k as f64 * dz]);
        }
    }
    if layers.is_empty() {
        for p in &xy {
            vertices.push([p[0], p[1], z_tet_top]);
        }
    }
    let offset = nv * nz_tet;
    vertices.extend(mesh.vertices.iter().copied());
    for w in mesh.wedges.iter_mut() {
        for v in w.iter_mut() {
            *v += offset;
        }
    }
    let grid = |i: usize, j: usize, k: usize| k * nv + j * (nx + 1) + i;
    let mut tets = Vec::with_capacity(6 * nx * ny * nz_tet);
    const PATHS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    for k in 0..nz_tet {
        for j in 0..ny {
            for i in 0..nx {
                let corner = |d: [usize; 3]| {
                    let dx = match split {
                        DiagonalSplit::Main => d[0],
                        DiagonalSplit::Anti => 1 - d[0],
                    };
                    grid(i + dx, j + d[1], k + d[2])
                };
                for path in PATHS {
                    let mut d = [0usize; 3];
                    let mut ids = [corner(d); 4];
                    for (step, &axis) in path.iter().enumerate() {
                        d[axis] = 1;
                        ids[step + 1] = corner(d);
                    }
                    let pts = ids.map(|v| vertices[v]);
                    if tet_signed_volume(&pts) < 0.0 {
                        ids.swap(2, 3);
                    }
                    tets.push(ids);
                }
            }
        }
    }
    let mut media = std::mem::take(&mut mesh.media);
    media.extend(std::iter::repeat(tet_medium).take(tets.len()));
    let out = HybridMesh {
        vertices,
        wedges: mesh.wedges,
        tets,
        media,
        boundary: Vec::new(),
    };
    out.validate()?;
    Ok(out)
}

/// Box `[-1,1]^3` with `nz_tet` tet layers below `nz_wedge` wedge layers, all
/// of equal thickness, unit media.
pub fn structured_hybrid_box(
    nx: usize,
    ny: usize,
    nz_wedge: usize,
    nz_tet: usize,
    split: DiagonalSplit,
) -> Result<HybridMesh> {
    let nz = nz_wedge + nz_tet;
    if nz == 0 {
        return Err(Error::Mesh("need at least one element layer".into()));
    }
    let z_i = -1.0 + 2.0 * nz_tet as f64 / nz as f64;
    let layers = if nz_wedge > 0 {
        vec![LayerSpec::flat(z_i, 1.0, nz_wedge, Medium::UNIT)]
    } else {
        Vec::new()
    };
    hybrid_layered_box(nx, ny, nz_tet, split, Medium::UNIT, &layers)
}

fn column_key(p: &Point) -> (u64, u64) {
    ((p[0] + 0.0).to_bits(), (p[1] + 0.0).to_bits())
}

/// Randomly shift interior vertex heights by `U(-a, a)` times the smaller of
/// the two adjacent gaps in the vertex column. Column end points and vertices
/// of tetrahedra never move. Deterministic in `seed`.
pub fn perturb_vertically(mesh: &HybridMesh, amplitude: f64, seed: u64) -> Result<HybridMesh> {
    if !(0.0..0.45).contains(&amplitude) {
        return Err(Error::Config(format!(
            "perturbation amplitude {amplitude} outside [0, 0.45)"
        )));
    }
    if amplitude == 0.0 {
        return Ok(mesh.clone());
    }
    let fixed: HashSet<usize> = mesh.tets.iter().flatten().copied().collect();
    let mut columns: HashMap<(u64, u64), Vec<usize>> = HashMap::new();
    for (v, p) in mesh.vertices.iter().enumerate() {
        columns.entry(column_key(p)).or_default().push(v);
    }
    // (below, above) neighbours of each movable vertex
    let mut neighbours: Vec<Option<(usize, usize)>> = vec![None; mesh.vertices.len()];
    for col in columns.values_mut() {
        col.sort_by(|&a, &b| mesh.vertices[a][2].total_cmp(&mesh.vertices[b][2]));
        for k in 1..col.len().saturating_sub(1) {
            if !fixed.contains(&col[k]) {
                neighbours[col[k]] = Some((col[k - 1], col[k + 1]));
            }
        }
    }
    let mut amp = amplitude;
    for _ in 0..=5 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = mesh.clone();
        for (v, nb) in neighbours.iter().enumerate() {
            if let Some((lo, hi)) = *nb {
                let z = mesh.vertices[v][2];
                let gap = (z - mesh.vertices[lo][2]).min(mesh.vertices[hi][2] - z);
                let u: f64 = rng.gen_range(-1.0..1.0);
                out.vertices[v][2] = z + amp * u * gap;
            }
        }
        match out.validate() {
            Ok(()) => return Ok(out),
            Err(e) => {
                log::warn!("perturbation with amplitude {amp} failed ({e}); halving");
                amp *= 0.5;
            }
        }
    }
    Err(Error::Mesh(format!(
        "vertical perturbation failed after 5 halvings of amplitude {amplitude}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_hybrid_box_counts() {
        let m = structured_hybrid_box(1, 1, 1, 1, DiagonalSplit::Main).unwrap();
        assert_eq!(m.wedges.len(), 2);
        assert_eq!(m.tets.len(), 6);
        assert!((m.total_volume() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn all_tet_box() {
        let m = structured_hybrid_box(2, 2, 0, 2, DiagonalSplit::Anti).unwrap();
        assert_eq!(m.tets.len(), 48);
        assert!((m.total_volume() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn inverted_layer_names_vertex() {
        let (xy, tris) = structured_surface(1, 1, [0.0, 1.0], [0.0, 1.0], DiagonalSplit::Main);
        let mut zt = vec![1.0; 4];
        zt[2] = -0.5;
        let s = SurfaceMesh { xy, triangles: tris, z_bottom: vec![0.0; 4], z_top: zt };
        let err = extrude_layer(&s, 2, Medium::UNIT).unwrap_err().to_string();
        assert!(err.contains("vertex 2"), "{err}");
    }
}
