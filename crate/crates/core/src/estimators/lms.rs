//! NLMS and set-membership NLMS.

use num_complex::Complex64;

use super::{check_shape, check_step_dims, Algorithm, BoundPolicy, Counters, Estimator, StepReport};
use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, ComplexVector};

/// Normalized LMS with a fixed normalized step `μ₀`.
#[derive(Debug, Clone)]
pub struct Nlms {
    h: ComplexMatrix,
    step_size: f64,
    counters: Counters,
}

impl Nlms {
    pub fn new(rows: usize, cols: usize, step_size: f64) -> Result<Self> {
        check_shape(rows, cols)?;
        if !(step_size > 0.0 && step_size < 2.0) {
            return Err(Error::parameter(
                "step_size",
                format!("must lie in (0, 2), got {step_size}"),
            ));
        }
        Ok(Self {
            h: ComplexMatrix::zeros(rows, cols),
            step_size,
            counters: Counters::default(),
        })
    }

    pub fn step_size(&self) -> f64 {
        self.step_size
    }
}

impl Estimator for Nlms {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Nlms
    }

    fn step(&mut self, s: &ComplexVector, r: &ComplexVector) -> Result<StepReport> {
        check_step_dims(&self.h, s, r)?;
        let e = r - &self.h * s;
        let power = s.norm_squared();
        let report = if power == 0.0 {
            StepReport::idle(e, None, true)
        } else {
            let mu = self.step_size / power;
            self.h.gerc(Complex64::new(mu, 0.0), &e, s, Complex64::new(1.0, 0.0));
            let norm = e.norm();
            StepReport {
                updated: true,
                skipped: false,
                posterior_norm: (r - &self.h * s).norm(),
                error: e,
                error_norm: norm,
                step: mu,
                bound: None,
            }
        };
        self.counters.record(&report);
        Ok(report)
    }

    fn estimate(&self) -> &ComplexMatrix {
        &self.h
    }

    fn counters(&self) -> Counters {
        self.counters
    }
}

/// Set-membership NLMS: updates only when `‖e‖ > γ`, with the step that
/// places the a-posteriori error on the sphere of radius `γ`.
#[derive(Debug, Clone)]
pub struct SmNlms {
    h: ComplexMatrix,
    bound: BoundPolicy,
    counters: Counters,
}

impl SmNlms {
    pub fn new(rows: usize, cols: usize, bound: BoundPolicy) -> Result<Self> {
        check_shape(rows, cols)?;
        if !(bound.gamma() >= 0.0) {
            return Err(Error::parameter("gamma", "must be >= 0"));
        }
        Ok(Self {
            h: ComplexMatrix::zeros(rows, cols),
            bound,
            counters: Counters::default(),
        })
    }

    pub fn policy(&self) -> &BoundPolicy {
        &self.bound
    }
}

impl Estimator for SmNlms {
    fn algorithm(&self) -> Algorithm {
        Algorithm::SmNlms
    }

    fn step(&mut self, s: &ComplexVector, r: &ComplexVector) -> Result<StepReport> {
        check_step_dims(&self.h, s, r)?;
        let gamma = self.bound.gamma();
        let e = r - &self.h * s;
        let norm = e.norm();
        let power = s.norm_squared();
        let report = if power == 0.0 {
            StepReport::idle(e, Some(gamma), true)
        } else if norm > gamma {
            let mu = (1.0 - gamma / norm) / power;
            self.h.gerc(Complex64::new(mu, 0.0), &e, s, Complex64::new(1.0, 0.0));
            StepReport {
                updated: true,
                skipped: false,
                posterior_norm: (r - &self.h * s).norm(),
                error: e,
                error_norm: norm,
                step: mu,
                bound: Some(gamma),
            }
        } else {
            StepReport::idle(e, Some(gamma), false)
        };
        self.bound.advance(&self.h);
        self.counters.record(&report);
        Ok(report)
    }

    fn estimate(&self) -> &ComplexMatrix {
        &self.h
    }

    fn counters(&self) -> Counters {
        self.counters
    }

    fn bound(&self) -> Option<f64> {
        Some(self.bound.gamma())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RngStream;

    fn random_pair(rng: &mut RngStream, m: usize, n: usize) -> (ComplexVector, ComplexVector) {
        (
            ComplexVector::from_fn(n, |_, _| rng.complex_normal(1.0)),
            ComplexVector::from_fn(m, |_, _| rng.complex_normal(1.0)),
        )
    }

    #[test]
    fn unit_step_nlms_zeroes_posterior() {
        let mut rng = RngStream::new(1, 0);
        let mut est = Nlms::new(3, 4, 1.0).unwrap();
        for _ in 0..20 {
            let (s, r) = random_pair(&mut rng, 3, 4);
            let rep = est.step(&s, &r).unwrap();
            assert!(rep.posterior_norm < 1e-12 * r.norm().max(1.0));
        }
    }

    #[test]
    fn nlms_matches_hand_update() {
        let mut rng = RngStream::new(2, 0);
        let mut est = Nlms::new(2, 3, 0.3).unwrap();
        let (s0, r0) = random_pair(&mut rng, 2, 3);
        est.step(&s0, &r0).unwrap();
        let h_before = est.estimate().clone();
        let (s, r) = random_pair(&mut rng, 2, 3);
        est.step(&s, &r).unwrap();
        let e = &r - &h_before * &s;
        let expected = &h_before + (&e * s.adjoint()) * Complex64::new(0.3 / s.norm_squared(), 0.0);
        assert!((est.estimate() - expected).norm() < 1e-13);
    }

    #[test]
    fn zero_error_leaves_nlms_unchanged() {
        let mut est = Nlms::new(2, 2, 0.5).unwrap();
        let s = ComplexVector::from_element(2, Complex64::new(1.0, 0.0));
        est.step(&s, &ComplexVector::zeros(2)).unwrap();
        assert_eq!(est.estimate(), &ComplexMatrix::zeros(2, 2));
    }

    #[test]
    fn zero_input_is_skipped() {
        let mut est = SmNlms::new(2, 2, BoundPolicy::Fixed(0.1)).unwrap();
        let rep = est
            .step(
                &ComplexVector::zeros(2),
                &ComplexVector::from_element(2, Complex64::new(1.0, 0.0)),
            )
            .unwrap();
        assert!(rep.skipped && !rep.updated && rep.step == 0.0);
        assert_eq!(est.counters(), Counters { steps: 1, updates: 0 });
    }

    #[test]
    fn dead_zone_is_bit_identical() {
        let mut rng = RngStream::new(3, 0);
        let mut est = SmNlms::new(3, 3, BoundPolicy::Fixed(1e6)).unwrap();
        let (s, r) = random_pair(&mut rng, 3, 3);
        let rep = est.step(&s, &r).unwrap();
        assert!(!rep.updated && rep.step == 0.0);
        assert_eq!(est.estimate(), &ComplexMatrix::zeros(3, 3));
    }

    #[test]
    fn double_bound_error_halves_step() {
        let s = ComplexVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]);
        let r = ComplexVector::from_vec(vec![Complex64::new(2.0, 0.0)]);
        let mut est = SmNlms::new(1, 2, BoundPolicy::Fixed(1.0)).unwrap();
        let rep = est.step(&s, &r).unwrap();
        assert!((rep.step - 1.0 / (2.0 * 2.0)).abs() < 1e-15);
        assert!((rep.posterior_norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projection_on_bound() {
        let mut rng = RngStream::new(4, 0);
        let mut est = SmNlms::new(5, 4, BoundPolicy::Fixed(0.3)).unwrap();
        for _ in 0..50 {
            let (s, r) = random_pair(&mut rng, 5, 4);
            let rep = est.step(&s, &r).unwrap();
            if rep.updated {
                assert!((rep.posterior_norm - 0.3).abs() <= 1e-9);
                assert!(rep.step > 0.0 && rep.step < 1.0 / s.norm_squared());
            }
        }
    }

    #[test]
    fn zero_bound_tracks_unit_nlms() {
        let mut rng = RngStream::new(5, 0);
        let mut sm = SmNlms::new(3, 4, BoundPolicy::Fixed(0.0)).unwrap();
        let mut nl = Nlms::new(3, 4, 1.0).unwrap();
        for _ in 0..100 {
            let (s, r) = random_pair(&mut rng, 3, 4);
            sm.step(&s, &r).unwrap();
            nl.step(&s, &r).unwrap();
            assert!((sm.estimate() - nl.estimate()).norm() <= 1e-12);
        }
    }

    #[test]
    fn rejects_wrong_dims() {
        let mut est = SmNlms::new(2, 3, BoundPolicy::Fixed(0.1)).unwrap();
        assert!(est.step(&ComplexVector::zeros(2), &ComplexVector::zeros(2)).is_err());
        assert!(Nlms::new(2, 2, 0.0).is_err());
        assert!(Nlms::new(0, 2, 0.5).is_err());
    }
}
