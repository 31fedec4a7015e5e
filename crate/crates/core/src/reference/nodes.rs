//! Warp-and-blend interpolation nodes for the triangle and tetrahedron.
//!
//! Triangle nodes use the published 2D blend parameters. Tetrahedron nodes
//! on the boundary are placed with the *same* triangle construction (so a tet
//! face and a wedge triangular face carry identical node sets), while interior
//! nodes are blended from the four face warps with the 3D parameters.

use super::jacobi::lagrange_basis;

/// Optimised blend parameters for triangles, indexed by degree (1-based table).
const ALPHA_2D: [f64; 15] = [
    0.0000, 0.0000, 1.4152, 0.1001, 0.2751, 0.9800, 1.0999, 1.2832, 1.3648, 1.4773, 1.4959, 1.5743,
    1.5770, 1.6223, 1.6258,
];

/// Optimised blend parameters for tetrahedra, indexed by degree (1-based table).
const ALPHA_3D: [f64; 15] = [
    0.0, 0.0, 0.0, 0.1002, 1.1332, 1.5608, 1.3413, 1.2577, 1.1603, 1.10153, 0.6080, 0.4523, 0.8856,
    0.8717, 0.9655,
];

fn alpha_2d(n: usize) -> f64 {
    ALPHA_2D.get(n.wrapping_sub(1)).copied().unwrap_or(5.0 / 3.0)
}

fn alpha_3d(n: usize) -> f64 {
    ALPHA_3D.get(n.wrapping_sub(1)).copied().unwrap_or(1.0)
}

/// Warp function: interpolant of (GLL - equidistant) divided by (1 - r^2).
struct Warp {
    equi: Vec<f64>,
    disp: Vec<f64>,
}

impl Warp {
    fn new(n: usize, gll: &[f64]) -> Self {
        let equi: Vec<f64> = (0..=n).map(|i| -1.0 + 2.0 * i as f64 / n as f64).collect();
        let disp = gll.iter().zip(&equi).map(|(g, e)| g - e).collect();
        Self { equi, disp }
    }

    fn eval(&self, r: f64) -> f64 {
        let l = lagrange_basis(&self.equi, r);
        let w: f64 = l.iter().zip(&self.disp).map(|(a, b)| a * b).sum();
        if r.abs() < 1.0 - 1e-10 {
            w / (1.0 - r * r)
        } else {
            0.0
        }
    }

    /// In-plane displacement of the equilateral-frame point with (possibly
    /// unnormalised) barycentric weights `top`, `left`, `right`.
    fn face_shift(&self, alpha: f64, top: f64, left: f64, right: f64) -> (f64, f64) {
        let w1 = 4.0 * left * right * self.eval(right - left) * (1.0 + (alpha * top).powi(2));
        let w2 = 4.0 * top * right * self.eval(top - right) * (1.0 + (alpha * left).powi(2));
        let w3 = 4.0 * top * left * self.eval(left - top) * (1.0 + (alpha * right).powi(2));
        let (c2, s2) = ((2.0 * std::f64::consts::PI / 3.0).cos(), (2.0 * std::f64::consts::PI / 3.0).sin());
        let (c4, s4) = ((4.0 * std::f64::consts::PI / 3.0).cos(), (4.0 * std::f64::consts::PI / 3.0).sin());
        (w1 + c2 * w2 + c4 * w3, s2 * w2 + s4 * w3)
    }
}

/// Warp the barycentric point `lam = (λ_left, λ_right, λ_top)` of a triangle
/// and return the warped barycentric coordinates in the same order.
fn warp_triangle_barycentric(warp: &Warp, alpha: f64, lam: [f64; 3]) -> [f64; 3] {
    let [left, right, top] = lam;
    let sq3 = 3f64.sqrt();
    let (dx, dy) = warp.face_shift(alpha, top, left, right);
    let x = -left + right + dx;
    let y = (-left - right + 2.0 * top) / sq3 + dy;
    let top = (sq3 * y + 1.0) / 3.0;
    let left = (-3.0 * x - sq3 * y + 2.0) / 6.0;
    let right = (3.0 * x - sq3 * y + 2.0) / 6.0;
    [left, right, top]
}

/// Lattice position `(a, b)` of each triangle node: `λ_2 = a/N`, `λ_3 = b/N`.
pub type TriLattice = (usize, usize);
/// Lattice position `(a, b, c)` of each tet node: `λ_2 = a/N`, `λ_3 = b/N`, `λ_4 = c/N`.
pub type TetLattice = (usize, usize, usize);

/// Triangle nodes on the bi-unit triangle with vertices (-1,-1), (1,-1), (-1,1).
/// Order: `b` (s-direction) outer, `a` (r-direction) inner.
pub fn triangle_nodes(n: usize, gll: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<TriLattice>) {
    let warp = Warp::new(n, gll);
    let alpha = alpha_2d(n);
    let (mut r, mut s, mut lat) = (Vec::new(), Vec::new(), Vec::new());
    let nf = n as f64;
    for b in 0..=n {
        for a in 0..=n - b {
            let l2 = a as f64 / nf;
            let l3 = b as f64 / nf;
            let w = warp_triangle_barycentric(&warp, alpha, [1.0 - l2 - l3, l2, l3]);
            r.push(-1.0 + 2.0 * w[1]);
            s.push(-1.0 + 2.0 * w[2]);
            lat.push((a, b));
        }
    }
    (r, s, lat)
}

/// Tetrahedron nodes on the bi-unit tet with vertices (-1,-1,-1), (1,-1,-1),
/// (-1,1,-1), (-1,-1,1). Order: `c` outer, then `b`, then `a`.
pub fn tet_nodes(n: usize, gll: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<TetLattice>) {
    let warp = Warp::new(n, gll);
    let alpha_face = alpha_2d(n);
    let alpha = alpha_3d(n);
    let sq3 = 3f64.sqrt();
    let sq6 = 6f64.sqrt();
    let verts = [
        [-1.0, -1.0 / sq3, -1.0 / sq6],
        [1.0, -1.0 / sq3, -1.0 / sq6],
        [0.0, 2.0 / sq3, -1.0 / sq6],
        [0.0, 0.0, 3.0 / sq6],
    ];
    // (opposite vertex, left, right, top)
    const FACES: [[usize; 4]; 4] = [[3, 0, 1, 2], [2, 0, 1, 3], [0, 1, 2, 3], [1, 0, 2, 3]];
    let sub = |a: [f64; 3], b: [f64; 3]| [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    let unit = |a: [f64; 3]| {
        let l = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
        [a[0] / l, a[1] / l, a[2] / l]
    };
    let frames: Vec<([f64; 3], [f64; 3])> = FACES
        .iter()
        .map(|f| {
            let (l, r, t) = (verts[f[1]], verts[f[2]], verts[f[3]]);
            let mid = [0.5 * (l[0] + r[0]), 0.5 * (l[1] + r[1]), 0.5 * (l[2] + r[2])];
            (unit(sub(r, l)), unit(sub(t, mid)))
        })
        .collect();
    // Barycentric recovery from equilateral coordinates.
    let e = [sub(verts[1], verts[0]), sub(verts[2], verts[0]), sub(verts[3], verts[0])];
    let emat = nalgebra::Matrix3::new(
        e[0][0], e[1][0], e[2][0], e[0][1], e[1][1], e[2][1], e[0][2], e[1][2], e[2][2],
    );
    let einv = emat.try_inverse().expect("equilateral tet is nondegenerate");

    let nf = n as f64;
    let (mut rr, mut ss, mut tt, mut lat) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for c in 0..=n {
        for b in 0..=n - c {
            for a in 0..=n - b - c {
                let lam = [
                    (n - a - b - c) as f64 / nf,
                    a as f64 / nf,
                    b as f64 / nf,
                    c as f64 / nf,
                ];
                let on_face = [c == 0, b == 0, a + b + c == n, a == 0];
                let bary = if let Some(f) = (0..4).find(|&f| on_face[f]) {
                    let [_, il, ir, it] = FACES[f];
                    let w = warp_triangle_barycentric(&warp, alpha_face, [lam[il], lam[ir], lam[it]]);
                    let mut out = [0.0; 4];
                    out[il] = w[0];
                    out[ir] = w[1];
                    out[it] = w[2];
                    out
                } else {
                    let mut x = [0.0; 3];
                    for (v, l) in verts.iter().zip(lam) {
                        for d in 0..3 {
                            x[d] += l * v[d];
                        }
                    }
                    for (f, face) in FACES.iter().enumerate() {
                        let [ia, il, ir, it] = *face;
                        let (la, ll, lr, lt) = (lam[ia], lam[il], lam[ir], lam[it]);
                        let (dx, dy) = warp.face_shift(alpha, lt, ll, lr);
                        let denom = (ll + 0.5 * la) * (lr + 0.5 * la) * (lt + 0.5 * la);
                        let blend = (1.0 + (alpha * la).powi(2)) * ll * lr * lt / denom;
                        let (t1, t2) = frames[f];
                        for d in 0..3 {
                            x[d] += blend * (dx * t1[d] + dy * t2[d]);
                        }
                    }
                    let rel = nalgebra::Vector3::new(x[0] - verts[0][0], x[1] - verts[0][1], x[2] - verts[0][2]);
                    let l = einv * rel;
                    [1.0 - l[0] - l[1] - l[2], l[0], l[1], l[2]]
                };
                rr.push(-1.0 + 2.0 * bary[1]);
                ss.push(-1.0 + 2.0 * bary[2]);
                tt.push(-1.0 + 2.0 * bary[3]);
                lat.push((a, b, c));
            }
        }
    }
    (rr, ss, tt, lat)
}
