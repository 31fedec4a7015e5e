use nalgebra::DMatrix;

use super::jacobi::{gauss_lobatto, grad_vandermonde_1d, vandermonde_1d};
use super::check_degree;
use crate::linalg::invert;
use crate::Result;

/// Lagrange basis on the degree-`N` Gauss-Legendre-Lobatto nodes of [-1, 1].
#[derive(Debug, Clone)]
pub struct Interval1D {
    pub degree: usize,
    /// Increasing GLL nodes, including both endpoints.
    pub nodes: Vec<f64>,
    /// GLL weights (exact to degree 2N-1).
    pub weights: Vec<f64>,
    /// `dt[(m, j)] = ℓ_j'(t_m)`.
    pub dt: DMatrix<f64>,
    /// Exact mass matrix `∫ ℓ_i ℓ_j`.
    pub mass: DMatrix<f64>,
    /// `M^{-1} e_0` and `M^{-1} e_N`: the 1D profiles of the triangular-face lifts.
    pub lift_bottom: Vec<f64>,
    pub lift_top: Vec<f64>,
}

pub fn build_interval(n: usize) -> Result<Interval1D> {
    check_degree(n)?;
    let (nodes, weights) = gauss_lobatto(n);
    let v = vandermonde_1d(n, &nodes);
    let vinv = invert(&v).expect("1D Vandermonde is nonsingular");
    let dt = grad_vandermonde_1d(n, &nodes) * &vinv;
    // orthonormal modal basis: M = (V V^T)^{-1}
    let mass = vinv.transpose() * &vinv;
    let minv = &v * v.transpose();
    let lift_bottom = minv.column(0).iter().cloned().collect();
    let lift_top = minv.column(n).iter().cloned().collect();
    Ok(Interval1D {
        degree: n,
        nodes,
        weights,
        dt,
        mass,
        lift_bottom,
        lift_top,
    })
}
