//! Legacy ASCII VTK snapshots. Each element is split into linear sub-wedges
//! or sub-tets on its nodal lattice; point data carries `p` and `u`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::Discretization;
use crate::mesh::ElementKind;
use crate::reference::TriangleRef;
use crate::Result;

const VTK_TETRA: u8 = 10;
const VTK_WEDGE: u8 = 13;

/// Sub-triangles of the degree-`n` triangle lattice, as node indices.
pub fn sub_triangles(n: usize) -> Vec<[usize; 3]> {
    let idx = |a, b| TriangleRef::lattice_index(n, a, b);
    let mut out = Vec::with_capacity(n * n);
    for b in 0..n {
        for a in 0..n - b {
            out.push([idx(a, b), idx(a + 1, b), idx(a, b + 1)]);
            if a + b + 1 < n {
                out.push([idx(a + 1, b), idx(a + 1, b + 1), idx(a, b + 1)]);
            }
        }
    }
    out
}

/// `n^3` sub-tets of the degree-`n` tet lattice.
pub fn sub_tets(n: usize, lattice: &[(usize, usize, usize)]) -> Vec<[usize; 4]> {
    let map: HashMap<(usize, usize, usize), usize> = lattice.iter().enumerate().map(|(k, &l)| (l, k)).collect();
    let v = |a, b, c| map[&(a, b, c)];
    let mut out = Vec::with_capacity(n * n * n);
    for c in 0..n {
        for b in 0..n - c {
            for a in 0..n - c - b {
                let i = a + b + c;
                out.push([v(a, b, c), v(a + 1, b, c), v(a, b + 1, c), v(a, b, c + 1)]);
                if i + 2 <= n {
                    // octahedron split along the (a+1,b,c)-(a,b+1,c+1) diagonal
                    let pa = v(a + 1, b, c);
                    let pf = v(a, b + 1, c + 1);
                    let ring = [v(a, b + 1, c), v(a, b, c + 1), v(a + 1, b, c + 1), v(a + 1, b + 1, c)];
                    for k in 0..4 {
                        out.push([pa, pf, ring[k], ring[(k + 1) % 4]]);
                    }
                }
                if i + 3 <= n {
                    out.push([v(a + 1, b + 1, c), v(a + 1, b, c + 1), v(a, b + 1, c + 1), v(a + 1, b + 1, c + 1)]);
                }
            }
        }
    }
    out
}

pub fn snapshot_to_string(disc: &Discretization, q: &[f64], time: f64) -> String {
    let n = disc.degree();
    let nt = n + 1;
    let tris = sub_triangles(n);
    let tets = sub_tets(n, &disc.refs.tet.lattice);
    let mut points = String::new();
    let mut cells: Vec<(u8, Vec<usize>)> = Vec::new();
    let mut fields: [Vec<f64>; 4] = Default::default();
    let mut base = 0;
    for e in 0..disc.mesh.num_elements() {
        let x = disc.node_coordinates(e);
        for p in &x {
            let _ = writeln!(points, "{:.16e} {:.16e} {:.16e}", p[0], p[1], p[2]);
        }
        for (c, f) in fields.iter_mut().enumerate() {
            f.extend_from_slice(disc.field(q, e, c));
        }
        match disc.mesh.kind(e) {
            ElementKind::Wedge => {
                for t in &tris {
                    for j in 0..n {
                        let mut ids: Vec<usize> = t.iter().map(|&i| base + i * nt + j).collect();
                        ids.extend(t.iter().map(|&i| base + i * nt + j + 1));
                        cells.push((VTK_WEDGE, ids));
                    }
                }
            }
            ElementKind::Tet => {
                for t in &tets {
                    cells.push((VTK_TETRA, t.iter().map(|&i| base + i).collect()));
                }
            }
        }
        base += x.len();
    }
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0\nacoustic field t={time:.16e}\nASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {base} double");
    s.push_str(&points);
    let size: usize = cells.iter().map(|c| c.1.len() + 1).sum();
    let _ = writeln!(s, "CELLS {} {size}", cells.len());
    for (_, ids) in &cells {
        let strs: Vec<String> = ids.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(s, "{} {}", ids.len(), strs.join(" "));
    }
    let _ = writeln!(s, "CELL_TYPES {}", cells.len());
    for (t, _) in &cells {
        let _ = writeln!(s, "{t}");
    }
    let _ = writeln!(s, "POINT_DATA {base}");
    for (name, f) in ["p", "u_x", "u_y", "u_z"].iter().zip(&fields) {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for v in f {
            let _ = writeln!(s, "{v:.16e}");
        }
    }
    s
}

pub fn write_snapshot(disc: &Discretization, q: &[f64], time: f64, path: &Path) -> Result<()> {
    std::fs::write(path, snapshot_to_string(disc, q, time))?;
    Ok(())
}
