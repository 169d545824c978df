//! Channel estimators for the stacked model `r = H s + v`.
//!
//! Batch baselines live in [`batch`]. The streaming estimators share the
//! [`Estimator`] trait: each call to [`Estimator::step`] consumes one input
//! snapshot `s(n)` and observation `r(n)`.

pub mod batch;
mod bound;
mod lms;
mod recursive;

pub use batch::{ls_batch, mmse_batch};
pub use bound::{bound_update, BoundController, BoundPolicy};
pub use lms::{Nlms, SmNlms};
pub use recursive::{Beacon, Rls, RlsInit};

use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, ComplexVector};

/// Outcome of one streaming step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    /// True when the estimate changed.
    pub updated: bool,
    /// True when the input was the zero vector and the step was skipped.
    pub skipped: bool,
    /// A-priori error `r - H(n-1) s`.
    pub error: ComplexVector,
    pub error_norm: f64,
    /// `μ(n)` for the LMS family, `λ(n)` for BEACON, the per-sample weight
    /// for RLS. Zero when no update happened.
    pub step: f64,
    /// `‖r - H(n) s‖` after the step.
    pub posterior_norm: f64,
    /// Error bound in force during the step, for set-membership estimators.
    pub bound: Option<f64>,
}

impl StepReport {
    fn idle(error: ComplexVector, bound: Option<f64>, skipped: bool) -> Self {
        let norm = error.norm();
        Self {
            updated: false,
            skipped,
            error,
            error_norm: norm,
            step: 0.0,
            posterior_norm: norm,
            bound,
        }
    }
}

/// Step and update counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    pub steps: u64,
    pub updates: u64,
}

impl Counters {
    pub fn update_rate(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.updates as f64 / self.steps as f64
        }
    }

    fn record(&mut self, report: &StepReport) {
        self.steps += 1;
        self.updates += report.updated as u64;
    }
}

/// Algorithm families, used for complexity accounting and labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Nlms,
    SmNlms,
    Rls,
    Beacon,
}

impl Algorithm {
    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Nlms => "nlms",
            Algorithm::SmNlms => "sm-nlms",
            Algorithm::Rls => "rls",
            Algorithm::Beacon => "beacon",
        }
    }
}

/// A streaming channel estimator.
pub trait Estimator: Send {
    fn algorithm(&self) -> Algorithm;

    /// Consumes one snapshot.
    fn step(&mut self, s: &ComplexVector, r: &ComplexVector) -> Result<StepReport>;

    /// Current estimate `H(n)`.
    fn estimate(&self) -> &ComplexMatrix;

    fn counters(&self) -> Counters;

    /// Bound for the next step, for set-membership estimators.
    fn bound(&self) -> Option<f64> {
        None
    }

    fn update_rate(&self) -> f64 {
        self.counters().update_rate()
    }
}

pub(crate) fn check_step_dims(h: &ComplexMatrix, s: &ComplexVector, r: &ComplexVector) -> Result<()> {
    if s.len() != h.ncols() {
        return Err(Error::dimension("estimator input s", h.ncols(), s.len()));
    }
    if r.len() != h.nrows() {
        return Err(Error::dimension("estimator observation r", h.nrows(), r.len()));
    }
    Ok(())
}

pub(crate) fn check_shape(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::parameter(
            "shape",
            format!("estimate must be non-empty, got {rows}x{cols}"),
        ));
    }
    Ok(())
}
