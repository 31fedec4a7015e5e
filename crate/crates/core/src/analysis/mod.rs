//! Global operator assembly, spectra, L² errors, convergence studies and
//! kernel timings.

pub mod bench;
pub mod convergence;

use nalgebra::{Complex, DMatrix};
use rayon::prelude::*;

use crate::geometry::ElementGeometry;
use crate::mesh::{ElementKind, Point};
use crate::operators::QuadratureMode;
use crate::reference::jacobi::{gauss_legendre, lagrange_basis};
use crate::reference::WedgeRef;
use crate::solver::{Discretization, FluxMode};
use crate::{Error, Result};

pub use bench::{bench, BenchRecord};
pub use convergence::{convergence_study, fit_rate, ConvergenceOptions, ConvergenceRecord, Level};

/// Largest state size accepted by [`assemble_global`].
pub const MAX_GLOBAL_DOFS: usize = 20_000;

/// Dense right-hand-side matrix `A` with `dq/dt = A q`. Rows and columns
/// follow the state layout: element-major (wedges first), then
/// `[p, u_x, u_y, u_z]` blocks of `Np` nodes.
#[derive(Debug, Clone)]
pub struct GlobalOperator {
    pub a: DMatrix<f64>,
    pub degree: usize,
    pub flux: FluxMode,
    pub mode: QuadratureMode,
    pub num_elements: usize,
}

/// Column `j` of `A` is the right-hand side of the `j`-th unit state.
pub fn assemble_global(disc: &Discretization) -> Result<GlobalOperator> {
    let n = disc.state_len();
    if n > MAX_GLOBAL_DOFS {
        return Err(Error::Analysis(format!(
            "{n} unknowns exceed the dense limit of {MAX_GLOBAL_DOFS}; use a smaller mesh or degree"
        )));
    }
    let cols: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map_init(
            || vec![0.0; n],
            |q, j| {
                q[j] = 1.0;
                let mut r = vec![0.0; n];
                let res = disc.compute_rhs(q, 0.0, &mut r);
                q[j] = 0.0;
                res.map(|_| r)
            },
        )
        .collect::<Result<_>>()?;
    let mut a = DMatrix::zeros(n, n);
    for (j, c) in cols.iter().enumerate() {
        a.set_column(j, &nalgebra::DVector::from_column_slice(c));
    }
    Ok(GlobalOperator {
        a,
        degree: disc.degree(),
        flux: disc.flux.mode,
        mode: disc.ops.mode,
        num_elements: disc.mesh.num_elements(),
    })
}

/// All eigenvalues of `a`, sorted by real part (ascending).
pub fn spectrum(a: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    let schur = nalgebra::linalg::Schur::try_new(a.clone(), 1e-14, 100_000)
        .ok_or_else(|| Error::Analysis("eigenvalue iteration did not converge".into()))?;
    let mut ev: Vec<Complex<f64>> = schur.complex_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Ok(ev)
}

/// Extremes of a spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumSummary {
    pub max_real: f64,
    pub max_abs_real: f64,
    pub max_modulus: f64,
}

impl SpectrumSummary {
    pub fn new(ev: &[Complex<f64>]) -> Self {
        Self {
            max_real: ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max),
            max_abs_real: ev.iter().map(|z| z.re.abs()).fold(0.0, f64::max),
            max_modulus: ev.iter().map(|z| z.norm()).fold(0.0, f64::max),
        }
    }

    /// `max Re(λ) ≤ tol · max |λ|`.
    pub fn is_stable(&self, tol: f64) -> bool {
        self.max_real <= tol * self.max_modulus
    }
}

/// Relative tolerance for declaring a spectrum stable.
pub const STABILITY_TOL: f64 = 1e-10;

/// `sqrt(Σ_k ∫ (p_h - p)² J)` with degree `2N+3` quadrature and the exact
/// field sampled at the quadrature points.
pub fn l2_error<F>(disc: &Discretization, q: &[f64], exact: F) -> f64
where
    F: Fn(Point) -> f64 + Sync,
{
    let refs = &disc.refs;
    let n = refs.degree;
    let (tq, tw) = gauss_legendre(n + 2);
    let line_interp: Vec<Vec<f64>> = tq.iter().map(|&t| lagrange_basis(&refs.interval.nodes, t)).collect();
    let tri = &refs.tri;
    let ncub = tri.cub_w.len();
    let per: Vec<f64> = (0..disc.mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            let p = disc.field(q, e, 0);
            match (&disc.geometry[e], disc.mesh.kind(e)) {
                (ElementGeometry::Wedge(g), ElementKind::Wedge) => {
                    let v = disc.mesh.wedge_vertices(e);
                    let nt = n + 1;
                    // interpolate to triangle cubature points, level by level
                    let mut ptri = vec![0.0; ncub * nt];
                    for c in 0..ncub {
                        for i in 0..tri.np {
                            let w = tri.cub_interp[(c, i)];
                            for j in 0..nt {
                                ptri[c * nt + j] += w * p[i * nt + j];
                            }
                        }
                    }
                    let mut sum = 0.0;
                    for c in 0..ncub {
                        let (r, s) = (tri.cub_r[c], tri.cub_s[c]);
                        let jac = g.jacobian(r, s, 0.0);
                        for (m, &t) in tq.iter().enumerate() {
                            let ph: f64 = (0..nt).map(|j| line_interp[m][j] * ptri[c * nt + j]).sum();
                            let phi = WedgeRef::vertex_functions(r, s, t);
                            let x = map_point(&v, &phi);
                            sum += tri.cub_w[c] * tw[m] * jac * (ph - exact(x)).powi(2);
                        }
                    }
                    sum
                }
                (ElementGeometry::Tet(g), _) => {
                    let tet = &refs.tet;
                    let v = disc.mesh.tet_vertices(e - disc.mesh.wedges.len());
                    let mut sum = 0.0;
                    for c in 0..tet.cub_w.len() {
                        let ph: f64 = (0..tet.np).map(|i| tet.cub_interp[(c, i)] * p[i]).sum();
                        let phi = crate::reference::TetRef::vertex_functions(tet.cub_r[c], tet.cub_s[c], tet.cub_t[c]);
                        let x = map_point(&v, &phi);
                        sum += tet.cub_w[c] * g.j * (ph - exact(x)).powi(2);
                    }
                    sum
                }
                _ => unreachable!("geometry kind matches element kind"),
            }
        })
        .collect();
    per.iter().sum::<f64>().sqrt()
}

fn map_point(v: &[Point], phi: &[f64]) -> Point {
    let mut x = [0.0; 3];
    for (vk, &w) in v.iter().zip(phi) {
        for d in 0..3 {
            x[d] += w * vk[d];
        }
    }
    x
}
