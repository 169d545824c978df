//! BEACON and RLS, sharing one weighted rank-one recursion.
//!
//! Both maintain `P(n) = φ(n)⁻¹` where `φ(n) = φ(n-1) + w(n) s sᴴ`. The
//! inverse is carried as a square-root factor `P = L Lᴴ`; the update of
//! `L` is algebraically the same as the matrix-inversion-lemma form
//! `P ← P - w P s sᴴ P / (1 + w sᴴ P s)`, but keeps `P` Hermitian positive
//! definite when successive weights are large.

use nalgebra::Cholesky;
use num_complex::Complex64;

use super::{batch::ls_batch, check_shape, check_step_dims, Algorithm, BoundPolicy, Counters, Estimator, StepReport};
use crate::error::{Error, Result};
use crate::numerics::{invert, ComplexMatrix, ComplexVector};

/// `H`, `L` and the quantities of one rank-one step.
#[derive(Debug, Clone)]
struct RankOne {
    h: ComplexMatrix,
    l: ComplexMatrix,
}

impl RankOne {
    fn identity(rows: usize, cols: usize) -> Self {
        Self {
            h: ComplexMatrix::zeros(rows, cols),
            l: ComplexMatrix::identity(cols, cols),
        }
    }

    /// Returns `(u, G, P s)` with `u = Lᴴ s` and `G = sᴴ P s = ‖u‖²`.
    fn prepare(&self, s: &ComplexVector) -> Result<(ComplexVector, f64, ComplexVector)> {
        let u = self.l.ad_mul(s);
        let g = u.norm_squared();
        if !(g > 0.0) || !g.is_finite() {
            return Err(Error::StateCorrupted(format!("sᴴPs = {g:e} is not positive")));
        }
        let ps = &self.l * &u;
        Ok((u, g, ps))
    }

    /// Applies the step with weight `w`, given through `q = 1/(1 + wG)`:
    /// `H += (w/(1+wG)) ε (Ps)ᴴ` and `P ← P - (w/(1+wG)) Ps (Ps)ᴴ`.
    fn apply(&mut self, e: &ComplexVector, u: &ComplexVector, g: f64, ps: &ComplexVector, q: f64) {
        let gain = (1.0 - q) / g;
        self.h.gerc(Complex64::new(gain, 0.0), e, ps, Complex64::new(1.0, 0.0));
        let shrink = (1.0 - q.sqrt()) / g;
        self.l
            .gerc(Complex64::new(-shrink, 0.0), ps, u, Complex64::new(1.0, 0.0));
    }

    fn p(&self) -> ComplexMatrix {
        &self.l * self.l.adjoint()
    }
}

/// BEACON: the set-membership recursion whose multiplier `λ(n)` acts as a
/// data-dependent weight, with `H(0) = 0` and `P(0) = I`.
#[derive(Debug, Clone)]
pub struct Beacon {
    core: RankOne,
    bound: BoundPolicy,
    counters: Counters,
}

impl Beacon {
    pub fn new(rows: usize, cols: usize, bound: BoundPolicy) -> Result<Self> {
        check_shape(rows, cols)?;
        if !(bound.gamma() > 0.0) {
            return Err(Error::parameter(
                "gamma",
                format!("BEACON needs a bound > 0, got {}", bound.gamma()),
            ));
        }
        Ok(Self {
            core: RankOne::identity(rows, cols),
            bound,
            counters: Counters::default(),
        })
    }

    /// `P(n)`.
    pub fn p(&self) -> ComplexMatrix {
        self.core.p()
    }

    pub fn policy(&self) -> &BoundPolicy {
        &self.bound
    }

    /// Re-initializes `H` and `P` to `0` and `I`, keeping the bound.
    pub fn reset(&mut self) {
        let (m, n) = self.core.h.shape();
        self.core = RankOne::identity(m, n);
    }
}

impl Estimator for Beacon {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Beacon
    }

    fn step(&mut self, s: &ComplexVector, r: &ComplexVector) -> Result<StepReport> {
        check_step_dims(&self.core.h, s, r)?;
        let gamma = self.bound.gamma();
        let e = r - &self.core.h * s;
        let norm = e.norm();
        let report = if s.norm_squared() == 0.0 {
            StepReport::idle(e, Some(gamma), true)
        } else if norm > gamma {
            if !(gamma > 0.0) {
                return Err(Error::parameter("gamma", "bound fell to zero"));
            }
            let (u, g, ps) = self.core.prepare(s)?;
            let lambda = (norm / gamma - 1.0) / g;
            self.core.apply(&e, &u, g, &ps, gamma / norm);
            StepReport {
                updated: true,
                skipped: false,
                posterior_norm: (r - &self.core.h * s).norm(),
                error: e,
                error_norm: norm,
                step: lambda,
                bound: Some(gamma),
            }
        } else {
            StepReport::idle(e, Some(gamma), false)
        };
        self.bound.advance(&self.core.h);
        self.counters.record(&report);
        Ok(report)
    }

    fn estimate(&self) -> &ComplexMatrix {
        &self.core.h
    }

    fn counters(&self) -> Counters {
        self.counters
    }

    fn bound(&self) -> Option<f64> {
        Some(self.bound.gamma())
    }
}

/// Initialization of the RLS recursion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RlsInit {
    /// `H(0) = 0`, `P(0) = δ I`.
    Regularized(f64),
    /// Buffer snapshots until the weighted Gram matrix is invertible, then
    /// start from the batch least-squares solution. The recursion then
    /// reproduces batch LS exactly.
    Exact,
}

/// Exponentially weighted RLS with forgetting factor `λ`.
///
/// Each step is the shared rank-one update with weight `1/λ` followed by
/// `P ← P/λ`, which is the textbook recursion
/// `k = Ps/(λ + sᴴPs)`, `P ← (P - k sᴴP)/λ`.
#[derive(Debug, Clone)]
pub struct Rls {
    core: RankOne,
    forgetting: f64,
    pending: Option<Vec<(ComplexVector, ComplexVector)>>,
    counters: Counters,
}

impl Rls {
    pub fn new(rows: usize, cols: usize, forgetting: f64, init: RlsInit) -> Result<Self> {
        check_shape(rows, cols)?;
        if !(forgetting > 0.0 && forgetting <= 1.0) {
            return Err(Error::parameter(
                "forgetting",
                format!("must lie in (0, 1], got {forgetting}"),
            ));
        }
        let mut core = RankOne::identity(rows, cols);
        let pending = match init {
            RlsInit::Regularized(delta) => {
                if !(delta > 0.0) || !delta.is_finite() {
                    return Err(Error::parameter(
                        "delta",
                        format!("must be finite and > 0, got {delta}"),
                    ));
                }
                core.l *= Complex64::new(delta.sqrt(), 0.0);
                None
            }
            RlsInit::Exact => Some(Vec::new()),
        };
        Ok(Self {
            core,
            forgetting,
            pending,
            counters: Counters::default(),
        })
    }

    pub fn forgetting(&self) -> f64 {
        self.forgetting
    }

    /// False while an exact initialization is still collecting snapshots.
    pub fn is_initialized(&self) -> bool {
        self.pending.is_none()
    }

    pub fn p(&self) -> ComplexMatrix {
        self.core.p()
    }

    fn try_initialize(&mut self) -> Result<()> {
        let Some(buffer) = &self.pending else {
            return Ok(());
        };
        let n = self.core.h.ncols();
        if buffer.len() < n {
            return Ok(());
        }
        let h = match ls_batch(buffer, self.forgetting) {
            Ok(h) => h,
            Err(Error::RankDeficient(_)) => return Ok(()),
            Err(e) => return Err(e),
        };
        let mut gram = ComplexMatrix::zeros(n, n);
        let mut weight = 1.0;
        for (s, _) in buffer.iter().rev() {
            gram.gerc(Complex64::new(weight, 0.0), s, s, Complex64::new(1.0, 0.0));
            weight *= self.forgetting;
        }
        let mut p = invert(&gram)?;
        p = (&p + p.adjoint()) * Complex64::new(0.5, 0.0);
        let chol =
            Cholesky::new(p).ok_or_else(|| Error::StateCorrupted("initial P is not positive definite".into()))?;
        self.core.h = h;
        self.core.l = chol.l();
        self.pending = None;
        Ok(())
    }
}

impl Estimator for Rls {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Rls
    }

    fn step(&mut self, s: &ComplexVector, r: &ComplexVector) -> Result<StepReport> {
        check_step_dims(&self.core.h, s, r)?;
        let e = r - &self.core.h * s;
        let norm = e.norm();
        if s.norm_squared() == 0.0 {
            let report = StepReport::idle(e, None, true);
            self.counters.record(&report);
            return Ok(report);
        }
        let weight = 1.0 / self.forgetting;
        if let Some(buffer) = &mut self.pending {
            buffer.push((s.clone(), r.clone()));
            self.try_initialize()?;
        } else {
            let (u, g, ps) = self.core.prepare(s)?;
            self.core.apply(&e, &u, g, &ps, 1.0 / (1.0 + weight * g));
            if self.forgetting < 1.0 {
                self.core.l *= Complex64::new(weight.sqrt(), 0.0);
            }
        }
        let report = StepReport {
            updated: true,
            skipped: false,
            posterior_norm: (r - &self.core.h * s).norm(),
            error: e,
            error_norm: norm,
            step: weight,
            bound: None,
        };
        self.counters.record(&report);
        Ok(report)
    }

    fn estimate(&self) -> &ComplexMatrix {
        &self.core.h
    }

    fn counters(&self) -> Counters {
        self.counters
    }
}
