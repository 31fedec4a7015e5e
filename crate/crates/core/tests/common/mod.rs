//! Dense quadrature-built element operators and random element generators
//! shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wedgedg::mesh::Point;
use wedgedg::reference::jacobi::{gauss_legendre, grad_vandermonde_1d, vandermonde_1d};
use wedgedg::reference::tet::{grad_vandermonde_3d, tet_cubature, vandermonde_3d, TET_FACE_VERTICES};
use wedgedg::reference::triangle::{grad_vandermonde_2d, triangle_cubature, vandermonde_2d};
use wedgedg::reference::ReferenceSet;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random vertically mapped wedge: a well-shaped random triangle in xy,
/// random bottom heights and positive random column heights.
pub fn random_wedge(rng: &mut ChaCha8Rng) -> [Point; 6] {
    loop {
        let c = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
        let scale = rng.gen_range(0.2..3.0);
        let mut xy = [[0.0; 2]; 3];
        for (k, p) in xy.iter_mut().enumerate() {
            let ang = 2.0 * std::f64::consts::PI * k as f64 / 3.0 + rng.gen_range(-0.5..0.5);
            let rad = scale * rng.gen_range(0.6..1.4);
            *p = [c[0] + rad * ang.cos(), c[1] + rad * ang.sin()];
        }
        let area = 0.5 * ((xy[1][0] - xy[0][0]) * (xy[2][1] - xy[0][1]) - (xy[2][0] - xy[0][0]) * (xy[1][1] - xy[0][1]));
        if area < 0.05 * scale * scale {
            continue;
        }
        let zb: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0) * scale);
        let hz: [f64; 3] = std::array::from_fn(|_| rng.gen_range(0.3..2.0) * scale);
        let mut v = [[0.0; 3]; 6];
        for k in 0..3 {
            v[k] = [xy[k][0], xy[k][1], zb[k]];
            v[k + 3] = [xy[k][0], xy[k][1], zb[k] + hz[k]];
        }
        return v;
    }
}

/// Random positively oriented, reasonably shaped tetrahedron.
pub fn random_tet(rng: &mut ChaCha8Rng) -> [Point; 4] {
    loop {
        let mut v = [[0.0f64; 3]; 4];
        for p in v.iter_mut() {
            for x in p.iter_mut() {
                *x = rng.gen_range(-2.0..2.0);
            }
        }
        let d = |i: usize| [v[i][0] - v[0][0], v[i][1] - v[0][1], v[i][2] - v[0][2]];
        let (a, b, c) = (d(1), d(2), d(3));
        let det = a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
            + a[2] * (b[0] * c[1] - b[1] * c[0]);
        if det.abs() < 1.0 {
            continue;
        }
        if det < 0.0 {
            v.swap(2, 3);
        }
        return v;
    }
}

/// Quadrature in the extruded direction.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TRule {
    /// Gauss-Legendre with enough points for exact integration.
    Exact,
    /// GLL at the nodes (mass lumping).
    Lumped,
}

/// Dense element operators from brute-force quadrature with the full 3x3
/// Jacobian of the vertex map.
pub struct DenseOps {
    pub mass: DMatrix<f64>,
    /// Weak derivative matrices `S_d[i,j] = ∫ φ_i ∂_d φ_j`.
    pub stiff: [DMatrix<f64>; 3],
    /// `M_f[i, a] = ∫_f φ_i φ_{face[a]} dS`.
    pub face_mass: Vec<DMatrix<f64>>,
}

impl DenseOps {
    pub fn minv(&self) -> DMatrix<f64> {
        self.mass.clone().cholesky().expect("SPD mass").inverse()
    }

    /// `M^{-1} S_d`.
    pub fn derivative(&self, d: usize) -> DMatrix<f64> {
        self.mass.clone().cholesky().unwrap().solve(&self.stiff[d])
    }

    pub fn lift(&self, f: usize) -> DMatrix<f64> {
        self.mass.clone().cholesky().unwrap().solve(&self.face_mass[f])
    }
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Inverse of the matrix with columns `x_r, x_s, x_t`: rows are `∇r, ∇s, ∇t`.
pub fn inverse_metric(c: [[f64; 3]; 3]) -> ([[f64; 3]; 3], f64) {
    // a[row][col] with columns x_r, x_s, x_t
    let a = [[c[0][0], c[1][0], c[2][0]], [c[0][1], c[1][1], c[2][1]], [c[0][2], c[1][2], c[2][2]]];
    let j = det3(a);
    let m = DMatrix::from_fn(3, 3, |i, k| a[i][k]).try_inverse().expect("invertible map");
    (std::array::from_fn(|i| std::array::from_fn(|k| m[(i, k)])), j)
}

pub fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn norm(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

/// Wedge basis values and reference derivatives at one point.
struct WedgeBasis {
    phi: Vec<f64>,
    dr: Vec<f64>,
    ds: Vec<f64>,
    dt: Vec<f64>,
}

fn wedge_basis(refs: &ReferenceSet, r: f64, s: f64, t: f64) -> WedgeBasis {
    let n = refs.degree;
    let tri = &refs.tri;
    let v2 = vandermonde_2d(n, &[r], &[s]) * &tri.vinv;
    let (gr, gs) = grad_vandermonde_2d(n, &[r], &[s]);
    let (gr, gs) = (gr * &tri.vinv, gs * &tri.vinv);
    let v1 = vandermonde_1d(n, &refs.interval.nodes);
    let v1inv = v1.try_inverse().unwrap();
    let l1 = vandermonde_1d(n, &[t]) * &v1inv;
    let g1 = grad_vandermonde_1d(n, &[t]) * &v1inv;
    let nt = n + 1;
    let np = tri.np * nt;
    let mut b = WedgeBasis { phi: vec![0.0; np], dr: vec![0.0; np], ds: vec![0.0; np], dt: vec![0.0; np] };
    for i in 0..tri.np {
        for j in 0..nt {
            let k = i * nt + j;
            b.phi[k] = v2[(0, i)] * l1[(0, j)];
            b.dr[k] = gr[(0, i)] * l1[(0, j)];
            b.ds[k] = gs[(0, i)] * l1[(0, j)];
            b.dt[k] = v2[(0, i)] * g1[(0, j)];
        }
    }
    b
}

/// Columns `x_r, x_s, x_t` of the wedge vertex map at a point.
pub fn wedge_map_derivs(v: &[Point; 6], r: f64, s: f64, t: f64) -> ([f64; 3], [[f64; 3]; 3]) {
    let l = [-0.5 * (r + s), 0.5 * (1.0 + r), 0.5 * (1.0 + s)];
    let lr = [-0.5, 0.5, 0.0];
    let ls = [-0.5, 0.0, 0.5];
    let (b, u) = (0.5 * (1.0 - t), 0.5 * (1.0 + t));
    let mut x = [0.0; 3];
    let mut c = [[0.0; 3]; 3];
    for k in 0..3 {
        for d in 0..3 {
            let (lo, hi) = (v[k][d], v[k + 3][d]);
            x[d] += l[k] * (b * lo + u * hi);
            c[0][d] += lr[k] * (b * lo + u * hi);
            c[1][d] += ls[k] * (b * lo + u * hi);
            c[2][d] += l[k] * 0.5 * (hi - lo);
        }
    }
    (x, c)
}

/// Dense wedge operators. Volume quadrature: triangle cubature of degree
/// `2N+5` times the chosen rule in `t`; quad faces use the same `t` rule.
pub fn dense_wedge(v: &[Point; 6], refs: &ReferenceSet, rule: TRule) -> DenseOps {
    let n = refs.degree;
    let np = refs.wedge.np;
    let (cr, cs, cw) = triangle_cubature(n + 3);
    let (tq, tw) = match rule {
        TRule::Exact => gauss_legendre(n + 3),
        TRule::Lumped => (refs.interval.nodes.clone(), refs.interval.weights.clone()),
    };
    let mut mass = DMatrix::zeros(np, np);
    let mut stiff = [DMatrix::zeros(np, np), DMatrix::zeros(np, np), DMatrix::zeros(np, np)];
    for c in 0..cw.len() {
        for m in 0..tq.len() {
            let (r, s, t) = (cr[c], cs[c], tq[m]);
            let b = wedge_basis(refs, r, s, t);
            let (_, cols) = wedge_map_derivs(v, r, s, t);
            let (g, j) = inverse_metric(cols);
            let w = cw[c] * tw[m] * j;
            let phi = DVector::from_column_slice(&b.phi);
            mass += &phi * phi.transpose() * w;
            for d in 0..3 {
                let dd: Vec<f64> = (0..np).map(|k| g[0][d] * b.dr[k] + g[1][d] * b.ds[k] + g[2][d] * b.dt[k]).collect();
                stiff[d] += &phi * DVector::from_column_slice(&dd).transpose() * w;
            }
        }
    }
    let mut face_mass = Vec::new();
    for f in 0..5 {
        let nodes = &refs.wedge.faces[f];
        let mut mf = DMatrix::zeros(np, nodes.len());
        let mut add = |r: f64, s: f64, t: f64, ds: f64| {
            let b = wedge_basis(refs, r, s, t);
            for i in 0..np {
                for (a, &k) in nodes.iter().enumerate() {
                    mf[(i, a)] += ds * b.phi[i] * b.phi[k];
                }
            }
        };
        if f < 2 {
            let t = if f == 0 { -1.0 } else { 1.0 };
            for c in 0..cw.len() {
                let (_, cols) = wedge_map_derivs(v, cr[c], cs[c], t);
                add(cr[c], cs[c], t, cw[c] * norm(cross(cols[0], cols[1])));
            }
        } else {
            let e = f - 2;
            let (gq, gw) = gauss_legendre(n + 3);
            // edge parameter σ from vertex e to vertex e+1
            let corners = [(-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0)];
            let (p0, p1) = (corners[e], corners[(e + 1) % 3]);
            for (sig, ws) in gq.iter().zip(&gw) {
                let r = p0.0 + 0.5 * (1.0 + sig) * (p1.0 - p0.0);
                let s = p0.1 + 0.5 * (1.0 + sig) * (p1.1 - p0.1);
                for (t, wt) in tq.iter().zip(&tw) {
                    let (_, cols) = wedge_map_derivs(v, r, s, *t);
                    let xs: [f64; 3] = std::array::from_fn(|d| 0.5 * ((p1.0 - p0.0) * cols[0][d] + (p1.1 - p0.1) * cols[1][d]));
                    add(r, s, *t, ws * wt * norm(cross(xs, cols[2])));
                }
            }
        }
        face_mass.push(mf);
    }
    DenseOps { mass, stiff, face_mass }
}

/// Dense affine tet operators from quadrature.
pub fn dense_tet(v: &[Point; 4], refs: &ReferenceSet) -> DenseOps {
    let n = refs.degree;
    let tet = &refs.tet;
    let np = tet.np;
    let (cr, cs, ct, cw) = tet_cubature(n + 2);
    let cols: [[f64; 3]; 3] = std::array::from_fn(|k| std::array::from_fn(|d| 0.5 * (v[k + 1][d] - v[0][d])));
    let (g, j) = inverse_metric(cols);
    let phi = vandermonde_3d(n, &cr, &cs, &ct) * &tet.vinv;
    let [gr, gs, gt] = grad_vandermonde_3d(n, &cr, &cs, &ct);
    let (gr, gs, gt) = (gr * &tet.vinv, gs * &tet.vinv, gt * &tet.vinv);
    let w = DMatrix::from_diagonal(&DVector::from_iterator(cw.len(), cw.iter().map(|x| x * j)));
    let mass = phi.transpose() * &w * &phi;
    let stiff = std::array::from_fn(|d| {
        let dd = &gr * g[0][d] + &gs * g[1][d] + &gt * g[2][d];
        phi.transpose() * &w * dd
    });
    let mut face_mass = Vec::new();
    let (tr, ts, tw) = triangle_cubature(n + 2);
    let rv = [[-1.0, -1.0, -1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]];
    for (f, fv) in TET_FACE_VERTICES.iter().enumerate() {
        let nodes = &tet.faces[f];
        // map the bi-unit triangle onto the reference face
        let lam = |a: f64, b: f64| [-0.5 * (a + b), 0.5 * (1.0 + a), 0.5 * (1.0 + b)];
        let mut pr = Vec::new();
        let mut ps = Vec::new();
        let mut pt = Vec::new();
        for q in 0..tw.len() {
            let l = lam(tr[q], ts[q]);
            let p: [f64; 3] = std::array::from_fn(|d| (0..3).map(|k| l[k] * rv[fv[k]][d]).sum());
            pr.push(p[0]);
            ps.push(p[1]);
            pt.push(p[2]);
        }
        let e1: [f64; 3] = std::array::from_fn(|d| 0.5 * (v[fv[1]][d] - v[fv[0]][d]));
        let e2: [f64; 3] = std::array::from_fn(|d| 0.5 * (v[fv[2]][d] - v[fv[0]][d]));
        let jf = norm(cross(e1, e2));
        let b = vandermonde_3d(n, &pr, &ps, &pt) * &tet.vinv;
        let mut mf = DMatrix::zeros(np, nodes.len());
        for q in 0..tw.len() {
            for i in 0..np {
                for (a, &k) in nodes.iter().enumerate() {
                    mf[(i, a)] += tw[q] * jf * b[(q, i)] * b[(q, k)];
                }
            }
        }
        face_mass.push(mf);
    }
    DenseOps { mass, stiff, face_mass }
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// `|a - b| / max(|b|, floor)` in the max norm.
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

pub fn matvec(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    (m * DVector::from_column_slice(x)).as_slice().to_vec()
}

/// Checks the vertically mapped wedge invariants of `wedge_geometry` against
/// the full 3D vertex-map oracle: `J` constant in `t`, `r_z = s_z = 0`,
/// horizontal factors constant, `t_xJ`/`t_yJ` linear in `t` and independent
/// of `(r, s)`, quad-face Jacobians constant in `t` and linear along edges.
pub fn check_vertical_invariants(v: &[Point; 6], refs: &ReferenceSet, tol: f64) -> Result<(), String> {
    use wedgedg::geometry::wedge_geometry;
    let g = wedge_geometry(v, refs).map_err(|e| e.to_string())?;
    let samples = [(-0.6, -0.2), (0.3, -0.9), (-1.0, 1.0), (0.1, -0.3)];
    let levels = [-1.0, -0.35, 0.5, 1.0];
    let close = |a: f64, b: f64, scale: f64| (a - b).abs() <= tol * scale;
    let hscale = (g.rx.abs() + g.ry.abs() + g.sx.abs() + g.sy.abs()).max(1e-300);
    for &(r, s) in &samples {
        let j0 = g.jacobian(r, s, -1.0);
        for &t in &levels {
            let (_, cols) = wedge_map_derivs(v, r, s, t);
            let (inv, j) = inverse_metric(cols);
            if !close(j, j0, j0.abs()) || !close(g.jacobian(r, s, t), j0, j0.abs()) {
                return Err(format!("J varies in t at ({r},{s},{t}): {j} vs {j0}"));
            }
            let m = g.metric_at(r, s, t);
            if m[0][2] != 0.0 || m[1][2] != 0.0 {
                return Err("r_z or s_z nonzero".into());
            }
            for row in 0..2 {
                for d in 0..2 {
                    if !close(m[row][d], inv[row][d], hscale) {
                        return Err(format!("horizontal factor ({row},{d}) {} vs oracle {}", m[row][d], inv[row][d]));
                    }
                }
            }
            let (txj, tyj) = g.txj_tyj(t);
            let tscale = norm([txj, tyj, g.tzj]);
            let oracle = [inv[2][0] * j, inv[2][1] * j, inv[2][2] * j];
            if !close(txj, oracle[0], tscale) || !close(tyj, oracle[1], tscale) || !close(g.tzj, oracle[2], tscale) {
                return Err(format!("J grad t at ({r},{s},{t}): ({txj},{tyj},{}) vs {oracle:?}", g.tzj));
            }
        }
    }
    for vals in [&g.txj, &g.tyj] {
        let scale = vals.iter().fold(g.tzj.abs(), |m, x| m.max(x.abs()));
        let t = &refs.interval.nodes;
        let n = t.len() as f64;
        let (mt, mv) = (t.iter().sum::<f64>() / n, vals.iter().sum::<f64>() / n);
        let slope = t.iter().zip(vals.iter()).map(|(a, b)| (a - mt) * (b - mv)).sum::<f64>()
            / t.iter().map(|a| (a - mt).powi(2)).sum::<f64>();
        for (a, b) in t.iter().zip(vals.iter()) {
            if !close(mv + slope * (a - mt), *b, scale) {
                return Err(format!("t_xJ/t_yJ not linear in t: residual {:e}", mv + slope * (a - mt) - b));
            }
        }
    }
    let corners = [(-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0)];
    for e in 0..3 {
        let (p0, p1) = (corners[e], corners[(e + 1) % 3]);
        let ends = (g.quad_jf(e, -1.0), g.quad_jf(e, 1.0));
        for sig in [-1.0, -0.4, 0.0, 0.7, 1.0] {
            let jf = g.quad_jf(e, sig);
            let lin = 0.5 * (1.0 - sig) * ends.0 + 0.5 * (1.0 + sig) * ends.1;
            if !close(jf, lin, jf) {
                return Err(format!("quad J_f not linear along edge {e}"));
            }
            let r = p0.0 + 0.5 * (1.0 + sig) * (p1.0 - p0.0);
            let s = p0.1 + 0.5 * (1.0 + sig) * (p1.1 - p0.1);
            for &t in &levels {
                let (_, cols) = wedge_map_derivs(v, r, s, t);
                let xs: [f64; 3] = std::array::from_fn(|d| 0.5 * ((p1.0 - p0.0) * cols[0][d] + (p1.1 - p0.1) * cols[1][d]));
                let oracle = norm(cross(xs, cols[2]));
                if !close(jf, oracle, oracle) {
                    return Err(format!("quad J_f on edge {e} at (σ={sig}, t={t}): {jf} vs {oracle}"));
                }
            }
        }
    }
    Ok(())
}

/// Conformity of the wedge-tet interfaces of a discretization.
#[derive(Debug, Default)]
pub struct InterfaceReport {
    pub faces: usize,
    /// Largest node mismatch divided by the smaller element diameter.
    pub node_mismatch: f64,
    /// Largest `|F_p|`, `|F_u|` for the state `q`.
    pub jump_flux: f64,
}

pub fn wedge_tet_interfaces(disc: &wedgedg::solver::Discretization, q: &[f64]) -> InterfaceReport {
    use wedgedg::mesh::{face_nodes, ElementKind, FaceLink};
    let mesh = &disc.mesh;
    let mut rep = InterfaceReport::default();
    for w in 0..mesh.wedges.len() {
        let xw = mesh.node_coordinates(w, &disc.refs);
        for f in 0..2 {
            let FaceLink::Interior { element: t, face: g, perm } = &disc.connectivity.links[w][f] else { continue };
            if mesh.kind(*t) != ElementKind::Tet {
                continue;
            }
            rep.faces += 1;
            let xt = mesh.node_coordinates(*t, &disc.refs);
            let diam = mesh.diameter(w).min(mesh.diameter(*t));
            let mine = face_nodes(mesh, &disc.refs, w, f);
            let theirs = face_nodes(mesh, &disc.refs, *t, *g);
            let n = disc.ops.wedges[w].normal(f);
            let (tau_p, tau_u) = disc.flux.penalties(mesh.media[w], mesh.media[*t]);
            for (a, &k) in mine.iter().enumerate() {
                let kt = theirs[perm[a]];
                let d = norm(std::array::from_fn(|c| xw[k][c] - xt[kt][c]));
                rep.node_mismatch = rep.node_mismatch.max(d / diam);
                let jump: [f64; 4] = std::array::from_fn(|c| disc.field(q, *t, c)[kt] - disc.field(q, w, c)[k]);
                let ndu = n[0] * jump[1] + n[1] * jump[2] + n[2] * jump[3];
                let fp = 0.5 * (tau_p * jump[0] - ndu);
                let fu = 0.5 * (tau_u * ndu - jump[0]);
                rep.jump_flux = rep.jump_flux.max(fp.abs()).max(fu.abs());
            }
        }
    }
    rep
}

/// Two wedge layers of contrasting media over a tet layer.
pub fn layered_media_mesh() -> wedgedg::mesh::HybridMesh {
    use wedgedg::mesh::generate::{hybrid_layered_box, DiagonalSplit, LayerSpec};
    use wedgedg::mesh::Medium;
    let layers = [
        LayerSpec::flat(-0.5, 0.2, 2, Medium::new(2.0, 4.5)),
        LayerSpec {
            bottom: Box::new(|_, _| 0.2),
            top: Box::new(|x, y| 1.0 + 0.1 * x * y),
            layers: 2,
            medium: Medium::new(0.5, 0.8),
        },
    ];
    hybrid_layered_box(3, 3, 1, DiagonalSplit::Main, Medium::UNIT, &layers).unwrap()
}

/// The meshes used by the energy checks.
pub fn suite_meshes() -> Vec<(&'static str, wedgedg::mesh::HybridMesh)> {
    use wedgedg::mesh::generate::DiagonalSplit;
    use wedgedg::mesh::{family_mesh, sixteen_wedge_mesh, structured_hybrid_box, MeshFamily};
    vec![
        ("structured", family_mesh(MeshFamily::Structured, 0.5, 1).unwrap()),
        ("unstructured", family_mesh(MeshFamily::Unstructured, 0.5, 1).unwrap()),
        ("arnold", family_mesh(MeshFamily::Arnold, 0.5, 1).unwrap()),
        ("sixteen-wedge", sixteen_wedge_mesh(0.3, 7).unwrap()),
        ("hybrid-box", structured_hybrid_box(3, 3, 2, 2, DiagonalSplit::Main).unwrap()),
        ("layered-media", layered_media_mesh()),
    ]
}

/// Off-center Gaussian pressure pulse at rest.
pub fn pulse(x: Point, _m: wedgedg::mesh::Medium) -> [f64; 4] {
    wedgedg::solver::gaussian_pulse(x, [0.2, -0.1, 0.15], 0.3)
}

/// Largest per-sample energy increase relative to the initial energy.
pub fn max_energy_increase(log: &[(f64, f64)]) -> f64 {
    let e0 = log[0].1;
    log.windows(2).map(|w| (w[1].1 - w[0].1) / e0).fold(f64::NEG_INFINITY, f64::max)
}

/// Relative energy drift `|E(T) - E(0)| / E(0)` of central-flux runs at
/// each step size `dt0 / 2^k`, `k = 0..levels`.
pub fn central_drift(
    mesh: wedgedg::mesh::HybridMesh,
    degree: usize,
    integrator: wedgedg::solver::Integrator,
    final_time: f64,
    cfl: f64,
    levels: usize,
) -> Vec<f64> {
    use wedgedg::operators::QuadratureMode;
    use wedgedg::solver::{run, Discretization, FluxConfig, RunOptions, SolutionState};
    let disc = Discretization::new(mesh, degree, QuadratureMode::Exact, FluxConfig::central()).unwrap();
    let dt0 = disc.estimate_dt(cfl);
    (0..levels)
        .map(|k| {
            let mut state = SolutionState::from_field(&disc, pulse);
            let opts = RunOptions { final_time, dt: dt0 / 2f64.powi(k as i32), integrator, energy_every: 0 };
            let s = run(&disc, &mut state, &opts, &mut |_, _| Ok(())).unwrap();
            (s.final_energy - s.initial_energy).abs() / s.initial_energy
        })
        .collect()
}
