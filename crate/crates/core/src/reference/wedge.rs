//! Wedge reference element as the tensor product triangle × GLL line.

use nalgebra::DMatrix;

use super::interval::Interval1D;
use super::jacobi::{gauss_legendre, lagrange_basis};
use super::triangle::TriangleRef;
use crate::Result;

#[derive(Debug, Clone)]
pub struct WedgeRef {
    pub degree: usize,
    /// `(N+1)^2 (N+2) / 2`
    pub np: usize,
    pub np_tri: usize,
    pub nt: usize,
    pub r: Vec<f64>,
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    /// Face node lists: 0 bottom (t=-1), 1 top (t=1), 2..=4 the quads over
    /// triangle edges 0..=2. Quad face node `a * (N+1) + j` is edge node `a`
    /// at GLL level `j`.
    pub faces: [Vec<usize>; 5],
    /// Edge mass matrices on the GLL basis weighted by `(1-σ)/2` and
    /// `(1+σ)/2`, used to build the quadrilateral-face lifts when the
    /// face Jacobian varies linearly along the edge.
    pub edge_mass_weighted: [DMatrix<f64>; 2],
}

impl WedgeRef {
    #[inline]
    pub fn node_id(&self, i: usize, j: usize) -> usize {
        i * self.nt + j
    }

    #[inline]
    pub fn node_pair(&self, id: usize) -> (usize, usize) {
        (id / self.nt, id % self.nt)
    }

    /// The six vertex functions `v_1..v_6` at `(r, s, t)`: bottom vertices
    /// first, then the top vertices in matching order.
    pub fn vertex_functions(r: f64, s: f64, t: f64) -> [f64; 6] {
        let l = TriangleRef::vertex_functions(r, s);
        let b = 0.5 * (1.0 - t);
        let u = 0.5 * (1.0 + t);
        [l[0] * b, l[1] * b, l[2] * b, l[0] * u, l[1] * u, l[2] * u]
    }

    pub fn face_len(&self, f: usize) -> usize {
        self.faces[f].len()
    }
}

pub fn build_wedge_ref(tri: &TriangleRef, line: &Interval1D) -> Result<WedgeRef> {
    let n = tri.degree;
    debug_assert_eq!(n, line.degree);
    let nt = n + 1;
    let np_tri = tri.np;
    let np = np_tri * nt;
    let (mut r, mut s, mut t) = (Vec::with_capacity(np), Vec::with_capacity(np), Vec::with_capacity(np));
    for i in 0..np_tri {
        for j in 0..nt {
            r.push(tri.r[i]);
            s.push(tri.s[i]);
            t.push(line.nodes[j]);
        }
    }
    let bottom = (0..np_tri).map(|i| i * nt).collect();
    let top = (0..np_tri).map(|i| i * nt + n).collect();
    let quad = |e: usize| -> Vec<usize> {
        tri.edges[e].iter().flat_map(|&i| (0..nt).map(move |j| i * nt + j)).collect()
    };
    let faces = [bottom, top, quad(0), quad(1), quad(2)];

    let (xq, wq) = gauss_legendre(n + 2);
    let edge_mass_weighted = std::array::from_fn(|side| {
        let mut m = DMatrix::zeros(nt, nt);
        for (x, w) in xq.iter().zip(&wq) {
            let l = lagrange_basis(&line.nodes, *x);
            let weight = if side == 0 { 0.5 * (1.0 - x) } else { 0.5 * (1.0 + x) };
            for a in 0..nt {
                for b in 0..nt {
                    m[(a, b)] += w * weight * l[a] * l[b];
                }
            }
        }
        m
    });

    Ok(WedgeRef {
        degree: n,
        np,
        np_tri,
        nt,
        r,
        s,
        t,
        faces,
        edge_mass_weighted,
    })
}
