//! Fading channel matrices and receiver noise.
//!
//! Two fading laws are supported: quasi-static Rayleigh block fading, drawn
//! once per packet, and Clarke's time-varying Rayleigh model realized as a
//! Jakes-style sum of sinusoids.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{complex_gaussian_vector, ComplexMatrix, ComplexVector, RngStream};

/// Oscillators per channel entry in the sum-of-sinusoids Clarke model.
pub const CLARKE_OSCILLATORS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FadingKind {
    QuasiStatic,
    Clarke,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingSpec {
    pub kind: FadingKind,
    /// Normalized Doppler f_d·T in cycles per symbol; ignored for quasi-static.
    pub doppler: f64,
    /// Mean square modulus of each channel entry.
    pub entry_power: f64,
}

impl FadingSpec {
    pub fn quasi_static(entry_power: f64) -> Self {
        Self {
            kind: FadingKind::QuasiStatic,
            doppler: 0.0,
            entry_power,
        }
    }

    pub fn clarke(doppler: f64, entry_power: f64) -> Self {
        Self {
            kind: FadingKind::Clarke,
            doppler,
            entry_power,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.entry_power > 0.0) || !self.entry_power.is_finite() {
            return Err(Error::parameter(
                "entry_power",
                format!("must be finite and > 0, got {}", self.entry_power),
            ));
        }
        if self.kind == FadingKind::Clarke && (!(self.doppler >= 0.0) || !self.doppler.is_finite()) {
            return Err(Error::parameter(
                "doppler",
                format!("must be finite and >= 0, got {}", self.doppler),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Oscillators {
    /// 2π·f_dT·cos(θ_k) per oscillator, radians per symbol.
    rates: [f64; CLARKE_OSCILLATORS],
    phases: [f64; CLARKE_OSCILLATORS],
}

#[derive(Debug, Clone)]
enum ProcessState {
    Static(ComplexMatrix),
    Clarke { amplitude: f64, entries: Vec<Oscillators> },
}

/// A matrix-valued fading process that can be sampled at any symbol time.
#[derive(Debug, Clone)]
pub struct FadingProcess {
    rows: usize,
    cols: usize,
    spec: FadingSpec,
    state: ProcessState,
}

impl FadingProcess {
    /// Draws a process according to `spec`.
    pub fn new(rng: &mut RngStream, rows: usize, cols: usize, spec: FadingSpec) -> Result<Self> {
        match spec.kind {
            FadingKind::QuasiStatic => {
                let h = draw_block_fading(rng, rows, cols, spec.entry_power)?;
                Ok(Self {
                    rows,
                    cols,
                    spec,
                    state: ProcessState::Static(h),
                })
            }
            FadingKind::Clarke => clarke_process(rng, rows, cols, spec.doppler, spec.entry_power),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn spec(&self) -> &FadingSpec {
        &self.spec
    }

    /// Channel matrix at symbol time `t`.
    pub fn sample(&self, t: f64) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.rows, self.cols);
        self.sample_into(t, &mut out);
        out
    }

    /// Writes the channel at time `t` into `out`, which must have the process dims.
    pub fn sample_into(&self, t: f64, out: &mut ComplexMatrix) {
        debug_assert_eq!(out.shape(), (self.rows, self.cols));
        match &self.state {
            ProcessState::Static(h) => out.copy_from(h),
            ProcessState::Clarke { amplitude, entries } => {
                for (idx, osc) in entries.iter().enumerate() {
                    let (i, j) = (idx / self.cols, idx % self.cols);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..CLARKE_OSCILLATORS {
                        acc += Complex64::from_polar(1.0, osc.rates[k] * t + osc.phases[k]);
                    }
                    out[(i, j)] = acc * *amplitude;
                }
            }
        }
    }

    /// True when the process does not change with time.
    pub fn is_static(&self) -> bool {
        match &self.state {
            ProcessState::Static(_) => true,
            ProcessState::Clarke { entries, .. } => entries.iter().all(|o| o.rates.iter().all(|r| *r == 0.0)),
        }
    }
}

/// I.i.d. circularly symmetric complex Gaussian matrix with E|h|^2 = `entry_power`.
pub fn draw_block_fading(rng: &mut RngStream, rows: usize, cols: usize, entry_power: f64) -> Result<ComplexMatrix> {
    FadingSpec::quasi_static(entry_power).validate()?;
    Ok(ComplexMatrix::from_fn(rows, cols, |_, _| {
        rng.complex_normal(entry_power)
    }))
}

/// Clarke-model process: every entry is an independent sum of
/// [`CLARKE_OSCILLATORS`] unit phasors with uniform random arrival angles and
/// phases, scaled to mean power `entry_power`. Its ensemble autocorrelation
/// is `entry_power · J0(2π f_dT τ)`.
pub fn clarke_process(
    rng: &mut RngStream,
    rows: usize,
    cols: usize,
    doppler: f64,
    entry_power: f64,
) -> Result<FadingProcess> {
    let spec = FadingSpec::clarke(doppler, entry_power);
    spec.validate()?;
    let entries = (0..rows * cols)
        .map(|_| {
            let mut rates = [0.0; CLARKE_OSCILLATORS];
            let mut phases = [0.0; CLARKE_OSCILLATORS];
            for k in 0..CLARKE_OSCILLATORS {
                let angle = 2.0 * PI * rng.uniform();
                rates[k] = 2.0 * PI * doppler * angle.cos();
                phases[k] = 2.0 * PI * rng.uniform();
            }
            Oscillators { rates, phases }
        })
        .collect();
    Ok(FadingProcess {
        rows,
        cols,
        spec,
        state: ProcessState::Clarke {
            amplitude: (entry_power / CLARKE_OSCILLATORS as f64).sqrt(),
            entries,
        },
    })
}

/// Receiver noise: complex AWGN with per-entry variance `variance`.
pub fn awgn(rng: &mut RngStream, len: usize, variance: f64) -> Result<ComplexVector> {
    complex_gaussian_vector(rng, len, variance)
}
