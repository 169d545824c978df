//! Batch least-squares and MMSE estimators.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{invert, ComplexMatrix, ComplexVector};

/// Exponentially weighted least squares over `(s, r)` snapshots, the latest
/// snapshot carrying weight 1:
/// `H = [Σ λ^{n-l} r sᴴ][Σ λ^{n-l} s sᴴ]⁻¹`.
pub fn ls_batch(snapshots: &[(ComplexVector, ComplexVector)], forgetting: f64) -> Result<ComplexMatrix> {
    if !(forgetting > 0.0 && forgetting <= 1.0) {
        return Err(Error::parameter(
            "forgetting",
            format!("must lie in (0, 1], got {forgetting}"),
        ));
    }
    let (n, m) = match snapshots.first() {
        Some((s, r)) => (s.len(), r.len()),
        None => return Err(Error::RankDeficient("no snapshots".into())),
    };
    let mut gram = ComplexMatrix::zeros(n, n);
    let mut cross = ComplexMatrix::zeros(m, n);
    let mut weight = 1.0;
    for (s, r) in snapshots.iter().rev() {
        if s.len() != n || r.len() != m {
            return Err(Error::dimension(
                "ls_batch snapshot",
                format!("({n}, {m})"),
                format!("({}, {})", s.len(), r.len()),
            ));
        }
        let w = Complex64::new(weight, 0.0);
        gram.gerc(w, s, s, Complex64::new(1.0, 0.0));
        cross.gerc(w, r, s, Complex64::new(1.0, 0.0));
        weight *= forgetting;
    }
    let inv = invert(&gram).map_err(|e| match e {
        Error::Singular { condition } => Error::RankDeficient(format!(
            "weighted Gram matrix of {} snapshots in dimension {n} is singular (condition {condition:.3e})",
            snapshots.len()
        )),
        other => other,
    })?;
    Ok(cross * inv)
}

/// MMSE estimate evaluated as `R (Sᴴ C S + M σ² I)⁻¹ Sᴴ C`, where `S` is
/// N x T (training inputs as columns), `R` is M x T and `C = E[HᴴH]` is N x N.
pub fn mmse_batch(
    training: &ComplexMatrix,
    received: &ComplexMatrix,
    correlation: &ComplexMatrix,
    noise_variance: f64,
    rows: usize,
) -> Result<ComplexMatrix> {
    let (n, t) = training.shape();
    if correlation.shape() != (n, n) {
        return Err(Error::dimension(
            "mmse correlation",
            format!("{n}x{n}"),
            format!("{:?}", correlation.shape()),
        ));
    }
    if received.ncols() != t {
        return Err(Error::dimension("mmse received columns", t, received.ncols()));
    }
    if received.nrows() != rows {
        return Err(Error::dimension("mmse received rows", rows, received.nrows()));
    }
    if !(noise_variance >= 0.0) {
        return Err(Error::parameter(
            "noise_variance",
            format!("must be >= 0, got {noise_variance}"),
        ));
    }
    let sh_c = training.adjoint() * correlation;
    let mut inner = &sh_c * training;
    let load = Complex64::new(rows as f64 * noise_variance, 0.0);
    for i in 0..t {
        inner[(i, i)] += load;
    }
    Ok(received * invert(&inner)? * sh_c)
}
