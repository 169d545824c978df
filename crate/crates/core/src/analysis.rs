//! Steady-state analysis: update probability, excess MSE and per-update
//! arithmetic cost.

use crate::error::{Error, Result};
use crate::estimators::Algorithm;
use crate::numerics::chi_square_cdf;

/// Denominators of the steady-state formula smaller than this are rejected.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-6;

/// Probability that the a-priori error norm exceeds `γ` when the error is
/// white Gaussian with per-entry variance `σ²` over `M` complex entries:
/// `1 - F(2γ²/σ²; 2M)` with `F` the chi-square CDF.
pub fn p_update_analytical(gamma: f64, noise_variance: f64, rows: usize) -> Result<f64> {
    if !(noise_variance > 0.0) || !noise_variance.is_finite() {
        return Err(Error::parameter(
            "noise_variance",
            format!("must be finite and > 0, got {noise_variance}"),
        ));
    }
    if !(gamma >= 0.0) {
        return Err(Error::parameter("gamma", format!("must be >= 0, got {gamma}")));
    }
    if rows == 0 {
        return Err(Error::parameter("rows", "must be >= 1"));
    }
    let x = 2.0 * gamma * gamma / noise_variance;
    Ok(1.0 - chi_square_cdf(x, 2 * rows as u32)?)
}

/// The noise variance used in place of `σ²` for the SM-NLMS analytical
/// curves, which accounts for the residual estimation error in `e(n)`.
pub fn sigma_inflation_for_smnlms(noise_variance: f64) -> f64 {
    1.1 * noise_variance
}

/// Branch-conditional moments of the error-norm stream.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalMoments {
    pub gamma: f64,
    /// `E[1/‖e‖ | ‖e‖ > γ]`.
    pub x: Option<f64>,
    /// `E[‖e‖ | ‖e‖ > γ]`.
    pub y: Option<f64>,
    /// `E[‖e‖² | ‖e‖ ≤ γ]`.
    pub z: Option<f64>,
    pub p_up: f64,
    pub above: usize,
    pub below: usize,
}

impl ConditionalMoments {
    pub fn x(&self) -> Result<f64> {
        self.x.ok_or(Error::InsufficientData { branch: "above-bound" })
    }

    pub fn y(&self) -> Result<f64> {
        self.y.ok_or(Error::InsufficientData { branch: "above-bound" })
    }

    pub fn z(&self) -> Result<f64> {
        self.z.ok_or(Error::InsufficientData { branch: "within-bound" })
    }
}

/// Sample moments of `norms` split at `γ`. A branch without samples leaves
/// its moments as `None`; an empty stream is an error.
pub fn collect_moments(norms: &[f64], gamma: f64) -> Result<ConditionalMoments> {
    if norms.is_empty() {
        return Err(Error::InsufficientData { branch: "both" });
    }
    if norms.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::parameter("norms", "error norms must be finite and >= 0"));
    }
    let (mut inv, mut lin, mut sq) = (0.0, 0.0, 0.0);
    let (mut above, mut below) = (0usize, 0usize);
    for &v in norms {
        if v > gamma {
            above += 1;
            inv += 1.0 / v;
            lin += v;
        } else {
            below += 1;
            sq += v * v;
        }
    }
    let mean = |sum: f64, n: usize| (n > 0).then(|| sum / n as f64);
    Ok(ConditionalMoments {
        gamma,
        x: mean(inv, above),
        y: mean(lin, above),
        z: mean(sq, below),
        p_up: above as f64 / norms.len() as f64,
        above,
        below,
    })
}

/// Returns `(X, Y, Z)` with the moments that carry zero weight replaced by 0.
fn weighted_moments(m: &ConditionalMoments) -> Result<(f64, f64, f64)> {
    let p = m.p_up;
    let (x, y) = if p > 0.0 { (m.x()?, m.y()?) } else { (0.0, 0.0) };
    let z = if p < 1.0 { m.z()? } else { 0.0 };
    Ok((x, y, z))
}

/// Steady-state excess MSE
/// `(2γYP + Z(1-P) - Mσ² - γ²P) / (2γXP - 2P + 1)`.
pub fn excess_mse_steady(m: &ConditionalMoments, gamma: f64, noise_variance: f64, rows: usize) -> Result<f64> {
    let p = m.p_up;
    let (x, y, z) = weighted_moments(m)?;
    let den = 2.0 * gamma * x * p - 2.0 * p + 1.0;
    if den.abs() < DEGENERATE_DENOMINATOR {
        return Err(Error::Degenerate { denominator: den });
    }
    let num = 2.0 * gamma * y * p + z * (1.0 - p) - rows as f64 * noise_variance - gamma * gamma * p;
    Ok(num / den)
}

/// One step of the excess-MSE recursion whose fixed point is
/// [`excess_mse_steady`]:
/// `J(n+1) = [2γXP + 2 - 2P] J(n) - 2γYP - Z(1-P) + Mσ² + γ²P`.
pub fn excess_mse_recursion(
    j: f64,
    m: &ConditionalMoments,
    gamma: f64,
    noise_variance: f64,
    rows: usize,
) -> Result<f64> {
    let p = m.p_up;
    let (x, y, z) = weighted_moments(m)?;
    Ok(
        (2.0 * gamma * x * p + 2.0 - 2.0 * p) * j - 2.0 * gamma * y * p - z * (1.0 - p)
            + rows as f64 * noise_variance
            + gamma * gamma * p,
    )
}

/// Expected arithmetic per iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexityCount {
    pub multiplications: f64,
    pub additions: f64,
    pub divisions: f64,
}

/// Expected cost per iteration of an `M x N` estimator updating with
/// probability `p_up` (ignored by NLMS and RLS, which always update).
pub fn complexity_per_update(alg: Algorithm, rows: usize, cols: usize, p_up: f64) -> Result<ComplexityCount> {
    if !(0.0..=1.0).contains(&p_up) {
        return Err(Error::parameter("p_up", format!("must lie in [0, 1], got {p_up}")));
    }
    let (m, n) = (rows as f64, cols as f64);
    let mn = m * n;
    let small = m.min(n);
    let p = p_up;
    let (mul, add, div) = match alg {
        Algorithm::Nlms => (2.0 * mn + n + small, 2.0 * mn + n - 1.0, 1.0),
        Algorithm::SmNlms => (mn + m + p * (mn + n + small), mn + m - 1.0 + p * (mn + n), 2.0),
        Algorithm::Rls => (4.0 * n * n + 2.0 * mn + n, 3.0 * n * n + 2.0 * mn - n, 2.0),
        Algorithm::Beacon => (
            n * n + mn + m + n + p * (2.0 * n * n + mn + n + small),
            n * n + mn + m - 2.0 + p * (2.0 * n * n + mn - n + 2.0),
            2.0,
        ),
    };
    Ok(ComplexityCount {
        multiplications: mul,
        additions: add,
        divisions: div,
    })
}

/// Update probability below which BEACON needs fewer multiplications than
/// RLS: `(3N² + MN - M) / (2N² + MN + N + min{M, N})`.
pub fn beacon_rls_crossover(rows: usize, cols: usize) -> f64 {
    let (m, n) = (rows as f64, cols as f64);
    (3.0 * n * n + m * n - m) / (2.0 * n * n + m * n + n + m.min(n))
}
