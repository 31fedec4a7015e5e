//! Nodal Lagrange basis on the bi-unit tetrahedron.

use nalgebra::DMatrix;

use super::jacobi::{gauss_jacobi, gauss_lobatto, grad_jacobi_p, jacobi_p};
use super::nodes::{tet_nodes, TetLattice};
use super::triangle::vandermonde_2d;
use super::check_degree;
use crate::linalg::{condition_number, invert};
use crate::Result;

pub fn rst_to_abc(r: f64, s: f64, t: f64) -> (f64, f64, f64) {
    let a = if (s + t).abs() > 1e-14 {
        2.0 * (1.0 + r) / (-s - t) - 1.0
    } else {
        -1.0
    };
    let b = if (t - 1.0).abs() > 1e-14 {
        2.0 * (1.0 + s) / (1.0 - t) - 1.0
    } else {
        -1.0
    };
    (a, b, t)
}

pub fn simplex3d_p(r: f64, s: f64, t: f64, i: usize, j: usize, k: usize) -> f64 {
    let (a, b, c) = rst_to_abc(r, s, t);
    let h1 = jacobi_p(a, 0.0, 0.0, i);
    let h2 = jacobi_p(b, 2.0 * i as f64 + 1.0, 0.0, j);
    let h3 = jacobi_p(c, 2.0 * (i + j) as f64 + 2.0, 0.0, k);
    2.0 * 2f64.sqrt() * h1 * h2 * (1.0 - b).powi(i as i32) * h3 * (1.0 - c).powi((i + j) as i32)
}

pub fn grad_simplex3d_p(r: f64, s: f64, t: f64, i: usize, j: usize, k: usize) -> (f64, f64, f64) {
    let (a, b, c) = rst_to_abc(r, s, t);
    let fa = jacobi_p(a, 0.0, 0.0, i);
    let dfa = grad_jacobi_p(a, 0.0, 0.0, i);
    let ab = 2.0 * i as f64 + 1.0;
    let gb = jacobi_p(b, ab, 0.0, j);
    let dgb = grad_jacobi_p(b, ab, 0.0, j);
    let ac = 2.0 * (i + j) as f64 + 2.0;
    let hc = jacobi_p(c, ac, 0.0, k);
    let dhc = grad_jacobi_p(c, ac, 0.0, k);
    let hb = 0.5 * (1.0 - b);
    let hcc = 0.5 * (1.0 - c);
    let (ii, ij) = (i as i32, (i + j) as i32);

    let mut vr = dfa * gb * hc;
    if i > 0 {
        vr *= hb.powi(ii - 1);
    }
    if i + j > 0 {
        vr *= hcc.powi(ij - 1);
    }

    let mut vs = 0.5 * (1.0 + a) * vr;
    let mut tmp = dgb * hb.powi(ii);
    if i > 0 {
        tmp -= 0.5 * i as f64 * gb * hb.powi(ii - 1);
    }
    if i + j > 0 {
        tmp *= hcc.powi(ij - 1);
    }
    tmp = fa * tmp * hc;
    vs += tmp;

    let mut vt = 0.5 * (1.0 + a) * vr + 0.5 * (1.0 + b) * tmp;
    let mut tmp = dhc * hcc.powi(ij);
    if i + j > 0 {
        tmp -= 0.5 * (i + j) as f64 * hc * hcc.powi(ij - 1);
    }
    tmp = fa * gb * tmp * hb.powi(ii);
    vt += tmp;

    let scale = 2f64.powf(2.0 * i as f64 + j as f64 + 1.5);
    (vr * scale, vs * scale, vt * scale)
}

pub fn modes_3d(n: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for i in 0..=n {
        for j in 0..=n - i {
            for k in 0..=n - i - j {
                out.push((i, j, k));
            }
        }
    }
    out
}

pub fn vandermonde_3d(n: usize, r: &[f64], s: &[f64], t: &[f64]) -> DMatrix<f64> {
    let modes = modes_3d(n);
    DMatrix::from_fn(r.len(), modes.len(), |p, m| {
        let (i, j, k) = modes[m];
        simplex3d_p(r[p], s[p], t[p], i, j, k)
    })
}

pub fn grad_vandermonde_3d(
    n: usize,
    r: &[f64],
    s: &[f64],
    t: &[f64],
) -> [DMatrix<f64>; 3] {
    let modes = modes_3d(n);
    let mut out = [
        DMatrix::zeros(r.len(), modes.len()),
        DMatrix::zeros(r.len(), modes.len()),
        DMatrix::zeros(r.len(), modes.len()),
    ];
    for p in 0..r.len() {
        for (m, &(i, j, k)) in modes.iter().enumerate() {
            let g = grad_simplex3d_p(r[p], s[p], t[p], i, j, k);
            out[0][(p, m)] = g.0;
            out[1][(p, m)] = g.1;
            out[2][(p, m)] = g.2;
        }
    }
    out
}

/// Collapsed Gauss rule on the tet with `q` points per direction.
pub fn tet_cubature(q: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let (xa, wa) = gauss_jacobi(0.0, 0.0, q);
    let (xb, wb) = gauss_jacobi(1.0, 0.0, q);
    let (xc, wc) = gauss_jacobi(2.0, 0.0, q);
    let (mut r, mut s, mut t, mut w) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (c, wck) in xc.iter().zip(&wc) {
        for (b, wbj) in xb.iter().zip(&wb) {
            for (a, wai) in xa.iter().zip(&wa) {
                r.push(0.25 * (1.0 + a) * (1.0 - b) * (1.0 - c) - 1.0);
                s.push(0.5 * (1.0 + b) * (1.0 - c) - 1.0);
                t.push(*c);
                w.push(0.125 * wai * wbj * wck);
            }
        }
    }
    (r, s, t, w)
}

/// Reference vertices of the bi-unit tet.
pub const TET_VERTICES: [[f64; 3]; 4] = [
    [-1.0, -1.0, -1.0],
    [1.0, -1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
];

/// Local vertex triples of the four faces: t=-1, s=-1, r+s+t=-1, r=-1.
pub const TET_FACE_VERTICES: [[usize; 3]; 4] = [[0, 1, 2], [0, 1, 3], [1, 2, 3], [0, 2, 3]];

#[derive(Debug, Clone)]
pub struct TetRef {
    pub degree: usize,
    /// `(N+1)(N+2)(N+3)/6`
    pub np: usize,
    /// Nodes per face, `(N+1)(N+2)/2`.
    pub nfp: usize,
    pub r: Vec<f64>,
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    pub lattice: Vec<TetLattice>,
    pub v: DMatrix<f64>,
    pub vinv: DMatrix<f64>,
    pub dr: DMatrix<f64>,
    pub ds: DMatrix<f64>,
    pub dt: DMatrix<f64>,
    pub mass: DMatrix<f64>,
    /// Node indices on each face, in volume-node order.
    pub faces: [Vec<usize>; 4],
    /// Face mass matrices in the face's bi-unit parametrisation.
    pub face_mass: [DMatrix<f64>; 4],
    /// `M^{-1} E_f` (Np × Nfp); physical lift is this times `J_f / J`.
    pub lift: [DMatrix<f64>; 4],
    pub cub_r: Vec<f64>,
    pub cub_s: Vec<f64>,
    pub cub_t: Vec<f64>,
    pub cub_w: Vec<f64>,
    pub cub_interp: DMatrix<f64>,
    pub vandermonde_condition: f64,
}

impl TetRef {
    /// Barycentric hat functions of the four reference vertices.
    pub fn vertex_functions(r: f64, s: f64, t: f64) -> [f64; 4] {
        [-0.5 * (1.0 + r + s + t), 0.5 * (1.0 + r), 0.5 * (1.0 + s), 0.5 * (1.0 + t)]
    }

    pub fn interp_matrix(&self, r: &[f64], s: &[f64], t: &[f64]) -> DMatrix<f64> {
        vandermonde_3d(self.degree, r, s, t) * &self.vinv
    }

    /// Bi-unit face coordinates of node `k` on face `f`.
    pub fn face_coords(&self, f: usize, k: usize) -> (f64, f64) {
        match f {
            0 => (self.r[k], self.s[k]),
            1 => (self.r[k], self.t[k]),
            _ => (self.s[k], self.t[k]),
        }
    }
}

pub fn build_tet_ref(n: usize) -> Result<TetRef> {
    check_degree(n)?;
    let (gll, _) = gauss_lobatto(n);
    let (r, s, t, lattice) = tet_nodes(n, &gll);
    let np = r.len();
    let v = vandermonde_3d(n, &r, &s, &t);
    let vinv = invert(&v).expect("tet Vandermonde is nonsingular");
    let vandermonde_condition = condition_number(&v);
    log::debug!("tet Vandermonde condition number at N={n}: {vandermonde_condition:.3e}");
    let [vr, vs, vt] = grad_vandermonde_3d(n, &r, &s, &t);
    let dr = &vr * &vinv;
    let ds = &vs * &vinv;
    let dt = &vt * &vinv;
    let mass = vinv.transpose() * &vinv;
    let minv = &v * v.transpose();

    let faces: [Vec<usize>; 4] = [
        lattice.iter().enumerate().filter(|(_, l)| l.2 == 0).map(|(k, _)| k).collect(),
        lattice.iter().enumerate().filter(|(_, l)| l.1 == 0).map(|(k, _)| k).collect(),
        lattice.iter().enumerate().filter(|(_, l)| l.0 + l.1 + l.2 == n).map(|(k, _)| k).collect(),
        lattice.iter().enumerate().filter(|(_, l)| l.0 == 0).map(|(k, _)| k).collect(),
    ];
    let nfp = faces[0].len();
    let mut tref = TetRef {
        degree: n,
        np,
        nfp,
        r,
        s,
        t,
        lattice,
        v,
        vinv,
        dr,
        ds,
        dt,
        mass,
        faces,
        face_mass: std::array::from_fn(|_| DMatrix::zeros(0, 0)),
        lift: std::array::from_fn(|_| DMatrix::zeros(0, 0)),
        cub_r: Vec::new(),
        cub_s: Vec::new(),
        cub_t: Vec::new(),
        cub_w: Vec::new(),
        cub_interp: DMatrix::zeros(0, 0),
        vandermonde_condition,
    };
    for f in 0..4 {
        let (fr, fs): (Vec<f64>, Vec<f64>) = tref.faces[f].iter().map(|&k| tref.face_coords(f, k)).unzip();
        let v2 = vandermonde_2d(n, &fr, &fs);
        let v2inv = invert(&v2).expect("face Vandermonde is nonsingular");
        let fmass = v2inv.transpose() * &v2inv;
        let mut emat = DMatrix::zeros(np, nfp);
        for (a, &k) in tref.faces[f].iter().enumerate() {
            for b in 0..nfp {
                emat[(k, b)] = fmass[(a, b)];
            }
        }
        tref.lift[f] = &minv * emat;
        tref.face_mass[f] = fmass;
    }
    let (cr, cs, ct, cw) = tet_cubature(n + 2);
    tref.cub_interp = tref.interp_matrix(&cr, &cs, &ct);
    tref.cub_r = cr;
    tref.cub_s = cs;
    tref.cub_t = ct;
    tref.cub_w = cw;
    Ok(tref)
}
