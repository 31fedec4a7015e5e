//! Orthonormal Jacobi polynomials and Gauss-type quadrature on [-1, 1].

use nalgebra::{DMatrix, SymmetricEigen};

/// Γ(x) for positive integer arguments (all Jacobi weights used here have
/// integer exponents).
fn gamma_int(x: f64) -> f64 {
    let n = x.round();
    debug_assert!((x - n).abs() < 1e-12 && n >= 1.0, "gamma_int({x})");
    (1..n as u64).map(|k| k as f64).product()
}

/// Squared norm of the weight `(1-x)^alpha (1+x)^beta` on [-1, 1].
fn weight_mass(alpha: f64, beta: f64) -> f64 {
    2f64.powf(alpha + beta + 1.0) / (alpha + beta + 1.0) * gamma_int(alpha + 1.0)
        * gamma_int(beta + 1.0)
        / gamma_int(alpha + beta + 1.0)
}

/// Jacobi polynomial `P_n^{(alpha,beta)}(x)` normalised to unit
/// `L^2((1-x)^alpha (1+x)^beta)` norm.
pub fn jacobi_p(x: f64, alpha: f64, beta: f64, n: usize) -> f64 {
    let gamma0 = weight_mass(alpha, beta);
    let p0 = 1.0 / gamma0.sqrt();
    if n == 0 {
        return p0;
    }
    let gamma1 = (alpha + 1.0) * (beta + 1.0) / (alpha + beta + 3.0) * gamma0;
    let p1 = ((alpha + beta + 2.0) * x / 2.0 + (alpha - beta) / 2.0) / gamma1.sqrt();
    if n == 1 {
        return p1;
    }
    let mut aold = 2.0 / (2.0 + alpha + beta)
        * ((alpha + 1.0) * (beta + 1.0) / (alpha + beta + 3.0)).sqrt();
    let (mut pm1, mut p) = (p0, p1);
    for i in 1..n {
        let i = i as f64;
        let h1 = 2.0 * i + alpha + beta;
        let anew = 2.0 / (h1 + 2.0)
            * ((i + 1.0) * (i + 1.0 + alpha + beta) * (i + 1.0 + alpha) * (i + 1.0 + beta)
                / (h1 + 1.0)
                / (h1 + 3.0))
                .sqrt();
        let bnew = -(alpha * alpha - beta * beta) / h1 / (h1 + 2.0);
        let pn = (-aold * pm1 + (x - bnew) * p) / anew;
        pm1 = p;
        p = pn;
        aold = anew;
    }
    p
}

/// Derivative of [`jacobi_p`].
pub fn grad_jacobi_p(x: f64, alpha: f64, beta: f64, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        ((n as f64) * (n as f64 + alpha + beta + 1.0)).sqrt()
            * jacobi_p(x, alpha + 1.0, beta + 1.0, n - 1)
    }
}

/// Gauss-Jacobi rule with `npts` points for the weight
/// `(1-x)^alpha (1+x)^beta`, via the Golub-Welsch eigenvalue problem.
/// Nodes are returned in increasing order.
pub fn gauss_jacobi(alpha: f64, beta: f64, npts: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(npts >= 1);
    if npts == 1 {
        return (
            vec![-(alpha - beta) / (alpha + beta + 2.0)],
            vec![weight_mass(alpha, beta)],
        );
    }
    let n = npts - 1;
    let mut jac = DMatrix::<f64>::zeros(npts, npts);
    for i in 0..=n {
        let h1 = 2.0 * i as f64 + alpha + beta;
        let diag = if (alpha + beta).abs() < 10.0 * f64::EPSILON && i == 0 {
            0.0
        } else {
            -(alpha * alpha - beta * beta) / (h1 + 2.0) / h1
        };
        jac[(i, i)] = diag;
        if i < n {
            let k = (i + 1) as f64;
            let off = 2.0 / (h1 + 2.0)
                * (k * (k + alpha + beta) * (k + alpha) * (k + beta) / (h1 + 1.0) / (h1 + 3.0))
                    .sqrt();
            jac[(i, i + 1)] = off;
            jac[(i + 1, i)] = off;
        }
    }
    let eig = SymmetricEigen::new(jac);
    let mass = weight_mass(alpha, beta);
    let mut pairs: Vec<(f64, f64)> = (0..npts)
        .map(|k| {
            let v0 = eig.eigenvectors[(0, k)];
            (eig.eigenvalues[k], v0 * v0 * mass)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs.into_iter().unzip()
}

/// Gauss-Legendre rule with `npts` points.
pub fn gauss_legendre(npts: usize) -> (Vec<f64>, Vec<f64>) {
    gauss_jacobi(0.0, 0.0, npts)
}

/// Classical (unnormalised) Legendre polynomial `P_n(x)`.
pub fn legendre(x: f64, n: usize) -> f64 {
    let (mut pm1, mut p) = (1.0, x);
    if n == 0 {
        return 1.0;
    }
    for k in 1..n {
        let k = k as f64;
        let pn = ((2.0 * k + 1.0) * x * p - k * pm1) / (k + 1.0);
        pm1 = p;
        p = pn;
    }
    p
}

/// Gauss-Legendre-Lobatto nodes and weights of degree `n` (n+1 points).
/// Interior nodes are the Gauss-Jacobi(1,1) points.
pub fn gauss_lobatto(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![-1.0];
    if n >= 2 {
        let (xi, _) = gauss_jacobi(1.0, 1.0, n - 1);
        x.extend(xi);
    }
    x.push(1.0);
    // symmetrise to remove eigen-solver round-off
    for i in 0..=n / 2 {
        let j = n - i;
        let m = 0.5 * (x[j] - x[i]);
        x[i] = -m;
        x[j] = m;
    }
    if n % 2 == 0 {
        x[n / 2] = 0.0;
    }
    let nf = n as f64;
    let w = x
        .iter()
        .map(|&xi| {
            let p = legendre(xi, n);
            2.0 / (nf * (nf + 1.0) * p * p)
        })
        .collect();
    (x, w)
}

/// 1D Vandermonde matrix of orthonormal Legendre polynomials.
pub fn vandermonde_1d(n: usize, x: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(x.len(), n + 1, |i, j| jacobi_p(x[i], 0.0, 0.0, j))
}

pub fn grad_vandermonde_1d(n: usize, x: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(x.len(), n + 1, |i, j| grad_jacobi_p(x[i], 0.0, 0.0, j))
}

/// Lagrange basis of `nodes` evaluated at `x`.
pub fn lagrange_basis(nodes: &[f64], x: f64) -> Vec<f64> {
    (0..nodes.len())
        .map(|i| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &xj)| (x - xj) / (nodes[i] - xj))
                .product()
        })
        .collect()
}
