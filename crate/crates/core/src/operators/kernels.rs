//! Tensor-product building blocks on wedge nodal arrays.
//!
//! A wedge field is stored row-major as `u[i * nt + j]` with `i` the
//! triangle node and `j` the GLL level, so "triangle" operators act on
//! whole rows and "line" operators act within a row.

use crate::linalg::RowMat;

/// `out(i, :) = alpha Σ_k A[i, k] u(k, :)`, overwriting or accumulating.
#[inline]
pub fn tri_apply(a: &RowMat, u: &[f64], nt: usize, alpha: f64, out: &mut [f64], accumulate: bool) {
    let n = a.rows();
    debug_assert_eq!(u.len(), a.cols() * nt);
    debug_assert_eq!(out.len(), n * nt);
    if !accumulate {
        out.iter_mut().for_each(|x| *x = 0.0);
    }
    for i in 0..n {
        let row = a.row(i);
        let o = &mut out[i * nt..(i + 1) * nt];
        for (k, &aik) in row.iter().enumerate() {
            let c = alpha * aik;
            if c == 0.0 {
                continue;
            }
            let uk = &u[k * nt..(k + 1) * nt];
            for (oj, uj) in o.iter_mut().zip(uk) {
                *oj += c * uj;
            }
        }
    }
}

/// `out(i, j) = Σ_m D[j, m] u(i, m)`.
#[inline]
pub fn line_apply(d: &RowMat, u: &[f64], nt: usize, out: &mut [f64]) {
    let np_tri = u.len() / nt;
    for i in 0..np_tri {
        let ui = &u[i * nt..(i + 1) * nt];
        let oi = &mut out[i * nt..(i + 1) * nt];
        for (j, o) in oi.iter_mut().enumerate() {
            *o = crate::linalg::dot(d.row(j), ui);
        }
    }
}

/// Dense `y = A x` for a square reference matrix stored row-major.
#[inline]
pub fn dense_apply(a: &RowMat, x: &[f64], alpha: f64, y: &mut [f64], accumulate: bool) {
    for (i, yi) in y.iter_mut().enumerate() {
        let v = alpha * crate::linalg::dot(a.row(i), x);
        if accumulate {
            *yi += v;
        } else {
            *yi = v;
        }
    }
}
