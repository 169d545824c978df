//! QPSK mapping, linear MMSE detection and the decision-directed feed.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{invert, ComplexMatrix, ComplexVector};

/// Gray-mapped QPSK: the first bit selects the sign of the real part and the
/// second the sign of the imaginary part, `0 -> +`. Bits `00` map to
/// `(1 + j)/√2`.
pub fn qpsk_mod(bits: [bool; 2]) -> Complex64 {
    let sign = |b: bool| if b { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 };
    Complex64::new(sign(bits[0]), sign(bits[1]))
}

/// Quadrant decision. Points on an axis resolve to bit 0.
pub fn qpsk_demod(z: Complex64) -> [bool; 2] {
    [z.re < 0.0, z.im < 0.0]
}

/// Nearest constellation point.
pub fn hard_decision(z: Complex64) -> Complex64 {
    qpsk_mod(qpsk_demod(z))
}

/// Number of differing bits between two symbols after demodulation.
pub fn bit_errors(detected: Complex64, sent: Complex64) -> usize {
    let (a, b) = (qpsk_demod(detected), qpsk_demod(sent));
    (a[0] != b[0]) as usize + (a[1] != b[1]) as usize
}

/// Detector inputs: the effective channel seen by unit-power symbols and the
/// receiver noise variance.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorConfig {
    pub channel: ComplexMatrix,
    pub noise_variance: f64,
}

impl DetectorConfig {
    pub fn new(channel: ComplexMatrix, noise_variance: f64) -> Result<Self> {
        if !(noise_variance >= 0.0) || !noise_variance.is_finite() {
            return Err(Error::parameter(
                "noise_variance",
                format!("must be finite and >= 0, got {noise_variance}"),
            ));
        }
        Ok(Self {
            channel,
            noise_variance,
        })
    }

    /// Wiener filter `W = (H Hᴴ + σ² I)⁻¹ H`; soft estimates are `Wᴴ r`.
    /// At zero noise this is the limit `(H⁺)ᴴ`, so rank-deficient channels
    /// still resolve every identifiable symbol.
    pub fn filter(&self) -> Result<ComplexMatrix> {
        let h = &self.channel;
        if self.noise_variance == 0.0 {
            let tol = 1e-12 * h.iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
            let pinv = h.clone().pseudo_inverse(tol).map_err(|_| Error::Singular {
                condition: f64::INFINITY,
            })?;
            return Ok(pinv.adjoint());
        }
        let mut cov = h * h.adjoint();
        for i in 0..cov.nrows() {
            cov[(i, i)] += Complex64::new(self.noise_variance, 0.0);
        }
        Ok(invert(&cov)? * h)
    }
}

/// Linear MMSE soft symbol estimates for all columns of the channel.
pub fn lmmse_detect(received: &ComplexVector, cfg: &DetectorConfig) -> Result<ComplexVector> {
    if received.len() != cfg.channel.nrows() {
        return Err(Error::dimension("lmmse_detect", cfg.channel.nrows(), received.len()));
    }
    Ok(cfg.filter()?.adjoint() * received)
}

/// Zero-forcing estimates `(HᴴH)⁻¹Hᴴ r`; needs full column rank.
pub fn zero_forcing_detect(received: &ComplexVector, channel: &ComplexMatrix) -> Result<ComplexVector> {
    if received.len() != channel.nrows() {
        return Err(Error::dimension("zero_forcing_detect", channel.nrows(), received.len()));
    }
    let gram = channel.adjoint() * channel;
    Ok(invert(&gram)? * channel.adjoint() * received)
}

/// Where the estimator input of one time instant came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeedKind {
    Training,
    Decided,
}

/// Estimator input for time instant `index`: the true symbols inside the
/// training preamble, hard decisions on `soft` afterwards.
pub fn decision_directed_feed(
    index: usize,
    training_len: usize,
    truth: &ComplexVector,
    soft: &ComplexVector,
) -> (ComplexVector, FeedKind) {
    if index < training_len {
        (truth.clone(), FeedKind::Training)
    } else {
        (soft.map(hard_decision), FeedKind::Decided)
    }
}
