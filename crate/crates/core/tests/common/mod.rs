//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;
use smchanest::numerics::{ComplexMatrix, ComplexVector, RngStream};

/// Adaptive Simpson quadrature with Richardson correction.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    rec(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 50)
}

/// Chi-square CDF by direct quadrature of its density (even dof only).
pub fn chi_square_cdf_quadrature(x: f64, dof: u32) -> f64 {
    assert!(dof.is_multiple_of(2));
    let k = dof / 2;
    let gamma_k: f64 = (1..k).map(f64::from).product();
    let density = move |t: f64| t.powi(k as i32 - 1) * (-t).exp() / gamma_k;
    integrate(&density, 0.0, x / 2.0, 1e-14)
}

/// Bessel J0 from its integral representation; the trapezoid rule is
/// spectrally accurate for this periodic integrand.
pub fn bessel_j0(x: f64) -> f64 {
    let n = 400;
    let h = std::f64::consts::PI / n as f64;
    let f = |theta: f64| (x * theta.sin()).cos();
    let inner: f64 = (1..n).map(|i| f(i as f64 * h)).sum();
    (0.5 * (f(0.0) + f(std::f64::consts::PI)) + inner) * h / std::f64::consts::PI
}

pub fn random_matrix(rng: &mut RngStream, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| rng.complex_normal(1.0))
}

pub fn random_vector(rng: &mut RngStream, len: usize, variance: f64) -> ComplexVector {
    ComplexVector::from_fn(len, |_, _| rng.complex_normal(variance))
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve(mut a: ComplexMatrix, mut b: ComplexMatrix) -> ComplexMatrix {
    let n = a.nrows();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| a[(i, c)].norm().total_cmp(&a[(j, c)].norm()))
            .unwrap();
        a.swap_rows(c, p);
        b.swap_rows(c, p);
        let pivot = a[(c, c)];
        for r in c + 1..n {
            let f = a[(r, c)] / pivot;
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in c..n {
                let v = a[(c, k)];
                a[(r, k)] -= f * v;
            }
            for k in 0..b.ncols() {
                let v = b[(c, k)];
                b[(r, k)] -= f * v;
            }
        }
    }
    let mut x = ComplexMatrix::zeros(n, b.ncols());
    for k in 0..b.ncols() {
        for r in (0..n).rev() {
            let mut acc = b[(r, k)];
            for j in r + 1..n {
                acc -= a[(r, j)] * x[(j, k)];
            }
            x[(r, k)] = acc / a[(r, r)];
        }
    }
    x
}

/// Least squares `Σ r sᴴ (Σ s sᴴ)⁻¹`, computed through normal equations.
pub fn least_squares(snapshots: &[(ComplexVector, ComplexVector)]) -> ComplexMatrix {
    let (n, m) = (snapshots[0].0.len(), snapshots[0].1.len());
    let mut phi = ComplexMatrix::zeros(n, n);
    let mut cross = ComplexMatrix::zeros(m, n);
    for (s, r) in snapshots {
        phi += s * s.adjoint();
        cross += r * s.adjoint();
    }
    // H Φ = C  ⇔  Φᴴ Hᴴ = Cᴴ
    solve(phi.adjoint(), cross.adjoint()).adjoint()
}
