//! Independent oracles for the acceptance suite.
//!
//! Everything in this module recomputes reference values through routes that
//! share no numerical machinery with the code under test: the prolate
//! spectrum via a Legendre–Galerkin discretization of the commuting
//! differential operator (instead of the production Nyström collocation),
//! the squeeze kernel via its closed hyperbolic forms (instead of the linear
//! solve), and a locally built Gauss–Legendre rule for direct high-order
//! quadratures.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1], by
/// Newton iteration on the Legendre recurrence. Deliberately a local copy:
/// the oracle must not borrow the production quadrature tables.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n and P_n' by the three-term recurrence
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Orthonormal Legendre polynomials P̄_0 … P̄_{count−1} at `x`.
fn normalized_legendre(count: usize, x: f64) -> Vec<f64> {
    let mut values = Vec::with_capacity(count);
    let (mut p0, mut p1) = (1.0, x);
    for n in 0..count {
        let p = if n == 0 {
            1.0
        } else if n == 1 {
            x
        } else {
            let nf = n as f64;
            let p2 = ((2.0 * nf - 1.0) * x * p1 - (nf - 1.0) * p0) / nf;
            p0 = p1;
            p1 = p2;
            p2
        };
        values.push((n as f64 + 0.5).sqrt() * p);
    }
    values
}

/// The prolate spectrum λ_0 > λ_1 > … by the Legendre–Galerkin route: the
/// Sturm–Liouville operator −d/ds[(1−s²) d/ds] + c²s² commutes with the
/// sinc kernel, its Galerkin matrix in the orthonormal Legendre basis is
/// assembled by exact quadrature, and the kernel eigenvalues are recovered
/// from the eigenvectors through the sinc-kernel Rayleigh quotient
/// λ_k = ∫∫ f_k(s) sin(c(s−t))/(π(s−t)) f_k(t) ds dt.
pub fn legendre_galerkin_lambdas(c: f64, count: usize, basis_size: usize) -> Vec<f64> {
    assert!(basis_size > count + 4);
    // Galerkin matrix: the derivative part is diagonal n(n+1) in this basis;
    // the c²s² part is integrated exactly (polynomial of degree ≤ 2N)
    let (nodes, weights) = gauss_legendre(basis_size + 4);
    let mut h = DMatrix::<f64>::zeros(basis_size, basis_size);
    for n in 0..basis_size {
        h[(n, n)] = (n * (n + 1)) as f64;
    }
    for (&x, &w) in nodes.iter().zip(&weights) {
        let p = normalized_legendre(basis_size, x);
        for m in 0..basis_size {
            // s² couples m to m and m ± 2 only; skip the zero entries
            for n in [m, m + 2] {
                if n < basis_size {
                    h[(m, n)] += c * c * w * x * x * p[m] * p[n];
                }
            }
        }
    }
    // the quadrature filled the diagonal and the (m, m+2) couplings; mirror
    // them onto the lower triangle
    for m in 0..basis_size {
        if m + 2 < basis_size {
            h[(m + 2, m)] = h[(m, m + 2)];
        }
    }
    let eigen = h.symmetric_eigen();
    // sort eigenpairs by ascending Sturm–Liouville eigenvalue = mode order
    let mut order: Vec<usize> = (0..basis_size).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[a].total_cmp(&eigen.eigenvalues[b]));
    // Rayleigh quotients through the sinc kernel on a tensor rule
    let (qn, qw) = gauss_legendre(120);
    let kernel = |x: f64| {
        if x.abs() < 1e-12 {
            c / std::f64::consts::PI
        } else {
            (c * x).sin() / (std::f64::consts::PI * x)
        }
    };
    let mut lambdas = Vec::with_capacity(count);
    for &col in order.iter().take(count) {
        let coeffs = eigen.eigenvectors.column(col);
        let f: Vec<f64> = qn
            .iter()
            .map(|&x| {
                normalized_legendre(basis_size, x)
                    .iter()
                    .zip(coeffs.iter())
                    .map(|(p, a)| p * a)
                    .sum()
            })
            .collect();
        let mut value = 0.0;
        for (i, (&s, &ws)) in qn.iter().zip(&qw).enumerate() {
            let mut inner = 0.0;
            for (j, (&t, &wt)) in qn.iter().zip(&qw).enumerate() {
                inner += wt * kernel(s - t) * f[j];
            }
            value += ws * f[i] * inner;
        }
        // the eigenvector is unit-norm in the orthonormal basis, so the
        // quotient needs no normalization
        lambdas.push(value);
    }
    lambdas
}

/// Closed hyperbolic forms of the squeeze kernel: U = e^{−iφ} e^{iθ} cosh r
/// and V = e^{iφ} e^{iθ} sinh r.
pub fn closed_form_uv(r: f64, theta: f64, phi: f64) -> (Complex64, Complex64) {
    let u = Complex64::from_polar(1.0, -phi) * Complex64::from_polar(r.cosh(), theta);
    let v = Complex64::from_polar(1.0, phi) * Complex64::from_polar(r.sinh(), theta);
    (u, v)
}
