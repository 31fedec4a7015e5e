//! Nodal Lagrange basis on the bi-unit triangle.

use nalgebra::DMatrix;

use super::jacobi::{gauss_jacobi, gauss_lobatto, grad_jacobi_p, jacobi_p};
use super::nodes::{triangle_nodes, TriLattice};
use super::check_degree;
use crate::linalg::invert;
use crate::Result;

/// Collapsed coordinates `(a, b)` of a point in the triangle.
pub fn rs_to_ab(r: f64, s: f64) -> (f64, f64) {
    let a = if (s - 1.0).abs() > 1e-14 {
        2.0 * (1.0 + r) / (1.0 - s) - 1.0
    } else {
        -1.0
    };
    (a, s)
}

/// Orthonormal mode `(i, j)` evaluated at `(r, s)`.
pub fn simplex2d_p(r: f64, s: f64, i: usize, j: usize) -> f64 {
    let (a, b) = rs_to_ab(r, s);
    let h1 = jacobi_p(a, 0.0, 0.0, i);
    let h2 = jacobi_p(b, 2.0 * i as f64 + 1.0, 0.0, j);
    2f64.sqrt() * h1 * h2 * (1.0 - b).powi(i as i32)
}

/// `(∂/∂r, ∂/∂s)` of mode `(i, j)`.
pub fn grad_simplex2d_p(r: f64, s: f64, i: usize, j: usize) -> (f64, f64) {
    let (a, b) = rs_to_ab(r, s);
    let fa = jacobi_p(a, 0.0, 0.0, i);
    let dfa = grad_jacobi_p(a, 0.0, 0.0, i);
    let alpha = 2.0 * i as f64 + 1.0;
    let gb = jacobi_p(b, alpha, 0.0, j);
    let dgb = grad_jacobi_p(b, alpha, 0.0, j);
    let hb = 0.5 * (1.0 - b);
    let pw = |k: i32| if k >= 0 { hb.powi(k) } else { 0.0 };
    let ii = i as i32;

    let mut dr = dfa * gb;
    if i > 0 {
        dr *= pw(ii - 1);
    }
    let mut ds = dfa * gb * 0.5 * (1.0 + a);
    if i > 0 {
        ds *= pw(ii - 1);
    }
    let mut tmp = dgb * pw(ii);
    if i > 0 {
        tmp -= 0.5 * i as f64 * gb * pw(ii - 1);
    }
    ds += fa * tmp;
    let scale = 2f64.powf(i as f64 + 0.5);
    (dr * scale, ds * scale)
}

/// Mode ordering `(i, j)` with `i + j <= N`.
pub fn modes_2d(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..=n {
        for j in 0..=n - i {
            out.push((i, j));
        }
    }
    out
}

pub fn vandermonde_2d(n: usize, r: &[f64], s: &[f64]) -> DMatrix<f64> {
    let modes = modes_2d(n);
    DMatrix::from_fn(r.len(), modes.len(), |k, m| simplex2d_p(r[k], s[k], modes[m].0, modes[m].1))
}

pub fn grad_vandermonde_2d(n: usize, r: &[f64], s: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
    let modes = modes_2d(n);
    let mut vr = DMatrix::zeros(r.len(), modes.len());
    let mut vs = DMatrix::zeros(r.len(), modes.len());
    for k in 0..r.len() {
        for (m, &(i, j)) in modes.iter().enumerate() {
            let (a, b) = grad_simplex2d_p(r[k], s[k], i, j);
            vr[(k, m)] = a;
            vs[(k, m)] = b;
        }
    }
    (vr, vs)
}

/// Collapsed Gauss rule with `q` points per direction; exact for total
/// degree `2q - 1`.
pub fn triangle_cubature(q: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let (xa, wa) = gauss_jacobi(0.0, 0.0, q);
    let (xb, wb) = gauss_jacobi(1.0, 0.0, q);
    let (mut r, mut s, mut w) = (Vec::new(), Vec::new(), Vec::new());
    for (b, wbj) in xb.iter().zip(&wb) {
        for (a, wai) in xa.iter().zip(&wa) {
            r.push(0.5 * (1.0 + a) * (1.0 - b) - 1.0);
            s.push(*b);
            w.push(0.5 * wai * wbj);
        }
    }
    (r, s, w)
}

/// Lagrange basis on warp-and-blend triangle nodes.
#[derive(Debug, Clone)]
pub struct TriangleRef {
    pub degree: usize,
    /// `(N+1)(N+2)/2`
    pub np: usize,
    pub r: Vec<f64>,
    pub s: Vec<f64>,
    pub lattice: Vec<TriLattice>,
    pub v: DMatrix<f64>,
    pub vinv: DMatrix<f64>,
    pub dr: DMatrix<f64>,
    pub ds: DMatrix<f64>,
    pub mass: DMatrix<f64>,
    /// Cubature points/weights exact to degree `2N + 3`.
    pub cub_r: Vec<f64>,
    pub cub_s: Vec<f64>,
    pub cub_w: Vec<f64>,
    /// Nodal basis evaluated at the cubature points.
    pub cub_interp: DMatrix<f64>,
    /// Node indices along the three edges, ordered from the start vertex:
    /// edge 0: v1→v2, edge 1: v2→v3, edge 2: v3→v1.
    pub edges: [Vec<usize>; 3],
    /// `∫ λ_v ℓ_i ℓ_j` for the three vertex hat functions; `Σ_v` equals `mass`.
    pub vertex_mass: [DMatrix<f64>; 3],
}

impl TriangleRef {
    /// Barycentric hat functions `(λ_1, λ_2, λ_3)` at `(r, s)`.
    pub fn vertex_functions(r: f64, s: f64) -> [f64; 3] {
        [-0.5 * (r + s), 0.5 * (1.0 + r), 0.5 * (1.0 + s)]
    }

    /// Nodal basis functions evaluated at arbitrary points (rows = points).
    pub fn interp_matrix(&self, r: &[f64], s: &[f64]) -> DMatrix<f64> {
        vandermonde_2d(self.degree, r, s) * &self.vinv
    }

    /// Lattice index of `(a, b)`.
    pub fn lattice_index(n: usize, a: usize, b: usize) -> usize {
        // rows b' < b contain N + 1 - b' nodes each
        b * (n + 1) - b * (b.saturating_sub(1)) / 2 + a
    }
}

pub fn build_triangle(n: usize) -> Result<TriangleRef> {
    check_degree(n)?;
    let (gll, _) = gauss_lobatto(n);
    let (r, s, lattice) = triangle_nodes(n, &gll);
    let np = r.len();
    let v = vandermonde_2d(n, &r, &s);
    let vinv = invert(&v).expect("triangle Vandermonde is nonsingular");
    let (vr, vs) = grad_vandermonde_2d(n, &r, &s);
    let dr = &vr * &vinv;
    let ds = &vs * &vinv;
    let mass = vinv.transpose() * &vinv;

    let (cub_r, cub_s, cub_w) = triangle_cubature(n + 2);
    let cub_interp = vandermonde_2d(n, &cub_r, &cub_s) * &vinv;
    let vertex_mass = std::array::from_fn(|vtx| {
        let mut m = DMatrix::zeros(np, np);
        for q in 0..cub_w.len() {
            let lam = TriangleRef::vertex_functions(cub_r[q], cub_s[q])[vtx];
            let row = cub_interp.row(q);
            let wq = cub_w[q] * lam;
            for i in 0..np {
                let wi = wq * row[i];
                for j in 0..np {
                    m[(i, j)] += wi * row[j];
                }
            }
        }
        m
    });

    let idx = |a: usize, b: usize| TriangleRef::lattice_index(n, a, b);
    let edges = [
        (0..=n).map(|k| idx(k, 0)).collect(),
        (0..=n).map(|k| idx(n - k, k)).collect(),
        (0..=n).map(|k| idx(0, n - k)).collect(),
    ];
    Ok(TriangleRef {
        degree: n,
        np,
        r,
        s,
        lattice,
        v,
        vinv,
        dr,
        ds,
        mass,
        cub_r,
        cub_s,
        cub_w,
        cub_interp,
        edges,
        vertex_mass,
    })
}
