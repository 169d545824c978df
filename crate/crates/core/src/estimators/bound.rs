use crate::error::{Error, Result};
use crate::numerics::{frobenius_norm_sqr, ComplexMatrix};

/// Time-varying error bound `γ(n+1) = (1-β)γ(n) + β√(α‖H(n)‖²σ²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundController {
    gamma: f64,
    alpha: f64,
    beta: f64,
    noise_variance: f64,
}

impl BoundController {
    pub fn new(gamma: f64, alpha: f64, beta: f64, noise_variance: f64) -> Result<Self> {
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::parameter(
                "gamma",
                format!("initial bound must be finite and >= 0, got {gamma}"),
            ));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::parameter(
                "alpha",
                format!("must be finite and > 0, got {alpha}"),
            ));
        }
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::parameter("beta", format!("must lie in [0, 1], got {beta}")));
        }
        if !(noise_variance >= 0.0) || !noise_variance.is_finite() {
            return Err(Error::parameter(
                "noise_variance",
                format!("must be finite and >= 0, got {noise_variance}"),
            ));
        }
        Ok(Self {
            gamma,
            alpha,
            beta,
            noise_variance,
        })
    }

    /// Starts at the recursion's fixed point for `‖H‖² = rows`, i.e.
    /// `γ(0) = √(α·rows·σ²)`.
    pub fn at_fixed_point(alpha: f64, beta: f64, noise_variance: f64, rows: usize) -> Result<Self> {
        Self::new(
            (alpha * rows as f64 * noise_variance).sqrt(),
            alpha,
            beta,
            noise_variance,
        )
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn update(&mut self, h: &ComplexMatrix) -> f64 {
        let target = (self.alpha * frobenius_norm_sqr(h) * self.noise_variance).sqrt();
        self.gamma = (1.0 - self.beta) * self.gamma + self.beta * target;
        self.gamma
    }
}

/// Advances `ctrl` with the current estimate and returns the new bound.
pub fn bound_update(ctrl: &mut BoundController, h: &ComplexMatrix) -> f64 {
    ctrl.update(h)
}

/// How a set-membership estimator chooses its bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundPolicy {
    Fixed(f64),
    TimeVarying(BoundController),
}

impl BoundPolicy {
    pub fn fixed(gamma: f64) -> Result<Self> {
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::parameter(
                "gamma",
                format!("must be finite and >= 0, got {gamma}"),
            ));
        }
        Ok(BoundPolicy::Fixed(gamma))
    }

    pub fn gamma(&self) -> f64 {
        match self {
            BoundPolicy::Fixed(g) => *g,
            BoundPolicy::TimeVarying(c) => c.gamma(),
        }
    }

    /// Called once per step after the estimate has been updated.
    pub(crate) fn advance(&mut self, h: &ComplexMatrix) {
        if let BoundPolicy::TimeVarying(c) = self {
            c.update(h);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn h_with_norm_sqr(v: f64) -> ComplexMatrix {
        ComplexMatrix::from_element(1, 1, Complex64::new(v.sqrt(), 0.0))
    }

    #[test]
    fn beta_zero_freezes() {
        let mut c = BoundController::new(0.7, 1.5, 0.0, 0.1).unwrap();
        assert_eq!(bound_update(&mut c, &h_with_norm_sqr(20.0)), 0.7);
    }

    #[test]
    fn beta_one_jumps_to_target() {
        let mut c = BoundController::new(0.7, 3.0, 1.0, 0.1).unwrap();
        let g = bound_update(&mut c, &h_with_norm_sqr(9.0));
        assert!((g - (3.0f64 * 9.0 * 0.1).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn fixed_point_is_stationary() {
        let mut c = BoundController::at_fixed_point(1.5, 0.01, 0.05, 9).unwrap();
        let g0 = c.gamma();
        assert!((c.update(&h_with_norm_sqr(9.0)) - g0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(BoundController::new(-1.0, 1.0, 0.1, 0.1).is_err());
        assert!(BoundController::new(1.0, 0.0, 0.1, 0.1).is_err());
        assert!(BoundController::new(1.0, 1.0, 1.1, 0.1).is_err());
        assert!(BoundPolicy::fixed(f64::NAN).is_err());
    }
}
