//! Complex linear-algebra helpers, seeded random variates and the special
//! functions used by the update-probability analysis.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Matrices whose 1-norm condition estimate exceeds this are treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// Builds a matrix from row-major entries, rejecting wrong lengths and
/// non-finite values.
pub fn matrix_from_rows(rows: usize, cols: usize, entries: &[Complex64]) -> Result<ComplexMatrix> {
    if entries.len() != rows * cols {
        return Err(Error::dimension("matrix_from_rows", rows * cols, entries.len()));
    }
    if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::parameter("entries", "non-finite matrix entry"));
    }
    Ok(DMatrix::from_row_slice(rows, cols, entries))
}

/// Builds a vector, rejecting non-finite values.
pub fn vector_from(entries: &[Complex64]) -> Result<ComplexVector> {
    if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::parameter("entries", "non-finite vector entry"));
    }
    Ok(DVector::from_column_slice(entries))
}

/// A reproducible random stream keyed by `(seed, stream_id)`.
///
/// Backed by ChaCha8 with the stream id mapped onto the cipher's stream
/// counter, so distinct ids give non-overlapping sequences and a trial can
/// be replayed without generating any of the trials before it.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream
    }

    /// Standard normal variate.
    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Uniform variate on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn bit(&mut self) -> bool {
        self.rng.random::<bool>()
    }

    /// Circularly symmetric complex Gaussian with E|z|^2 = `variance`.
    pub fn complex_normal(&mut self, variance: f64) -> Complex64 {
        let scale = (variance / 2.0).sqrt();
        Complex64::new(scale * self.normal(), scale * self.normal())
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Vector of i.i.d. circularly symmetric complex Gaussian entries; real and
/// imaginary parts each carry half of `variance`.
pub fn complex_gaussian_vector(rng: &mut RngStream, len: usize, variance: f64) -> Result<ComplexVector> {
    if !(variance >= 0.0) || !variance.is_finite() {
        return Err(Error::parameter(
            "variance",
            format!("must be finite and >= 0, got {variance}"),
        ));
    }
    Ok(DVector::from_fn(len, |_, _| rng.complex_normal(variance)))
}

/// Lower incomplete gamma function, the integral of t^(s-1) e^(-t) over [0, x].
pub fn lower_incomplete_gamma(s: f64, x: f64) -> Result<f64> {
    check_gamma_args(s, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    let regularized = statrs::function::gamma::gamma_lr(s, x);
    Ok(regularized * statrs::function::gamma::gamma(s))
}

/// Regularized lower incomplete gamma P(s, x), clamped to [0, 1].
pub fn regularized_lower_gamma(s: f64, x: f64) -> Result<f64> {
    check_gamma_args(s, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok(statrs::function::gamma::gamma_lr(s, x).clamp(0.0, 1.0))
}

fn check_gamma_args(s: f64, x: f64) -> Result<()> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::parameter("s", format!("must be > 0, got {s}")));
    }
    if !(x >= 0.0) {
        return Err(Error::parameter("x", format!("must be >= 0, got {x}")));
    }
    Ok(())
}

/// Chi-square CDF with `dof` degrees of freedom.
pub fn chi_square_cdf(x: f64, dof: u32) -> Result<f64> {
    if dof == 0 {
        return Err(Error::parameter("dof", "must be >= 1"));
    }
    if !(x >= 0.0) {
        return Err(Error::parameter("x", format!("must be >= 0, got {x}")));
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    regularized_lower_gamma(f64::from(dof) / 2.0, x / 2.0)
}

pub fn frobenius_norm(m: &ComplexMatrix) -> f64 {
    m.norm()
}

/// Squared Frobenius norm.
pub fn frobenius_norm_sqr(m: &ComplexMatrix) -> f64 {
    m.norm_squared()
}

/// Induced 1-norm (maximum absolute column sum).
pub fn one_norm(m: &ComplexMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Inverse of a small square matrix by LU with partial pivoting.
///
/// Fails with [`Error::Singular`] when the factorization breaks down or the
/// 1-norm condition estimate exceeds [`MAX_CONDITION`].
pub fn invert(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::dimension(
            "invert",
            "square matrix",
            format!("{}x{}", m.nrows(), m.ncols()),
        ));
    }
    let inverse = match m.clone().lu().try_inverse() {
        Some(inv) => inv,
        None => {
            return Err(Error::Singular {
                condition: f64::INFINITY,
            })
        }
    };
    let condition = one_norm(m) * one_norm(&inverse);
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(Error::Singular { condition });
    }
    Ok(inverse)
}

/// Hermitian part, (m + m^H) / 2.
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Real part of s^H m s.
pub fn quadratic_form(m: &ComplexMatrix, s: &ComplexVector) -> f64 {
    s.dotc(&(m * s)).re
}
