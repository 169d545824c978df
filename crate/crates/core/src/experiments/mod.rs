//! Monte Carlo scenarios, runners and CSV output.

mod output;
mod runners;

pub use output::{write_outputs, CsvTable, Metadata};
pub use runners::{
    run_analysis_validation, run_ber, run_complexity_table, run_learning_curve, run_mse_vs_snr, simulate_trial,
    AnalysisPoint, BerPoint, BerSweep, RunMetrics, SeriesMetrics, SnrSweep, TrialOptions, TrialOutput,
};

use crate::channel::FadingKind;
use crate::error::{Error, Result};
use crate::estimators::{Algorithm, Beacon, BoundController, BoundPolicy, Estimator, Nlms, Rls, RlsInit, SmNlms};
use crate::wsn::{LinkPowers, Topology};

/// How the requested SNR maps to the noise variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnrConvention {
    /// Received energy per bit over N0: `σ² = P_rx / (2·SNR)` for QPSK.
    EbN0,
    /// Received energy per symbol over N0: `σ² = P_rx / SNR`.
    EsN0,
}

impl SnrConvention {
    pub fn label(self) -> &'static str {
        match self {
            SnrConvention::EbN0 => "eb_n0",
            SnrConvention::EsN0 => "es_n0",
        }
    }

    fn bits_per_symbol(self) -> f64 {
        match self {
            SnrConvention::EbN0 => 2.0,
            SnrConvention::EsN0 => 1.0,
        }
    }
}

/// Estimator input after the training preamble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feed {
    /// The true transmitted symbols throughout the packet.
    Genie,
    /// Hard decisions from the estimator's own LMMSE detector.
    DecisionDirected,
}

impl Feed {
    pub fn label(self) -> &'static str {
        match self {
            Feed::Genie => "genie",
            Feed::DecisionDirected => "decision-directed",
        }
    }
}

/// Error-bound choice for a set-membership estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundSpec {
    Fixed(f64),
    /// Time-varying bound; `initial = None` starts at `√(α M σ²)`.
    TimeVarying {
        alpha: f64,
        beta: f64,
        initial: Option<f64>,
    },
}

impl BoundSpec {
    fn policy(&self, rows: usize, noise_variance: f64) -> Result<BoundPolicy> {
        match *self {
            BoundSpec::Fixed(g) => BoundPolicy::fixed(g),
            BoundSpec::TimeVarying { alpha, beta, initial } => {
                let ctrl = match initial {
                    Some(g0) => BoundController::new(g0, alpha, beta, noise_variance)?,
                    None => BoundController::at_fixed_point(alpha, beta, noise_variance, rows)?,
                };
                Ok(BoundPolicy::TimeVarying(ctrl))
            }
        }
    }

    fn tag(&self) -> String {
        match self {
            BoundSpec::Fixed(g) => format!("g{g}"),
            BoundSpec::TimeVarying { .. } => "tvb".to_string(),
        }
    }
}

/// One estimator of a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimatorSpec {
    Nlms {
        step_size: f64,
    },
    SmNlms {
        bound: BoundSpec,
    },
    /// RLS with `P(0) = I`.
    Rls {
        forgetting: f64,
    },
    Beacon {
        bound: BoundSpec,
    },
    /// Batch MMSE over the training block, shown as a constant reference.
    Mmse,
}

impl EstimatorSpec {
    /// Column-safe label, e.g. `sm_nlms_g1.1` or `beacon_tvb`.
    pub fn label(&self) -> String {
        match self {
            EstimatorSpec::Nlms { step_size } => format!("nlms_mu{step_size}"),
            EstimatorSpec::SmNlms { bound } => format!("sm_nlms_{}", bound.tag()),
            EstimatorSpec::Rls { forgetting } => format!("rls_{forgetting}"),
            EstimatorSpec::Beacon { bound } => format!("beacon_{}", bound.tag()),
            EstimatorSpec::Mmse => "mmse".to_string(),
        }
    }

    pub fn algorithm(&self) -> Option<Algorithm> {
        match self {
            EstimatorSpec::Nlms { .. } => Some(Algorithm::Nlms),
            EstimatorSpec::SmNlms { .. } => Some(Algorithm::SmNlms),
            EstimatorSpec::Rls { .. } => Some(Algorithm::Rls),
            EstimatorSpec::Beacon { .. } => Some(Algorithm::Beacon),
            EstimatorSpec::Mmse => None,
        }
    }

    pub fn is_time_varying(&self) -> bool {
        matches!(
            self,
            EstimatorSpec::SmNlms {
                bound: BoundSpec::TimeVarying { .. }
            } | EstimatorSpec::Beacon {
                bound: BoundSpec::TimeVarying { .. }
            }
        )
    }

    /// Builds the streaming estimator; `None` for the batch MMSE reference.
    pub fn build(&self, rows: usize, cols: usize, noise_variance: f64) -> Result<Option<Box<dyn Estimator>>> {
        Ok(Some(match self {
            EstimatorSpec::Nlms { step_size } => Box::new(Nlms::new(rows, cols, *step_size)?),
            EstimatorSpec::SmNlms { bound } => Box::new(SmNlms::new(rows, cols, bound.policy(rows, noise_variance)?)?),
            EstimatorSpec::Rls { forgetting } => {
                Box::new(Rls::new(rows, cols, *forgetting, RlsInit::Regularized(1.0))?)
            }
            EstimatorSpec::Beacon { bound } => Box::new(Beacon::new(rows, cols, bound.policy(rows, noise_variance)?)?),
            EstimatorSpec::Mmse => return Ok(None),
        }))
    }
}

/// A complete experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub topology: Topology,
    pub link_powers: LinkPowers,
    /// Amplification coefficient of every relay.
    pub amplification: f64,
    pub fading: FadingKind,
    /// Normalized Doppler per time instant, Clarke fading only.
    pub doppler: f64,
    pub snr_db: f64,
    pub snr_convention: SnrConvention,
    /// Overrides the SNR-derived noise variance when set.
    pub noise_variance: Option<f64>,
    pub packet_len: usize,
    pub training_len: usize,
    pub trials: usize,
    pub seed: u64,
    pub feed: Feed,
    pub estimators: Vec<EstimatorSpec>,
    /// Trailing fraction of the packet treated as steady state.
    pub steady_fraction: f64,
}

impl Scenario {
    /// The three-hop reference network at 10 dB with quasi-static fading
    /// and `(n_p, n_t) = (1000, 100)`; no estimators.
    pub fn reference(name: impl Into<String>) -> Self {
        let topology = Topology::reference();
        Self {
            name: name.into(),
            link_powers: LinkPowers::unit_received(&topology),
            topology,
            amplification: 1.0,
            fading: FadingKind::QuasiStatic,
            doppler: 0.0,
            snr_db: 10.0,
            snr_convention: SnrConvention::EbN0,
            noise_variance: None,
            packet_len: 1000,
            training_len: 100,
            trials: 200,
            seed: 1,
            feed: Feed::Genie,
            estimators: Vec::new(),
            steady_fraction: 0.5,
        }
    }

    pub fn rows(&self) -> usize {
        self.topology.stacked_rows()
    }

    pub fn cols(&self) -> usize {
        self.topology.stacked_cols()
    }

    /// Average received signal power per destination entry, with relay
    /// slots scaled by the squared amplification.
    pub fn received_power(&self) -> f64 {
        let t = &self.topology;
        let a2 = self.amplification * self.amplification;
        let mut total = t.sources() as f64 * self.link_powers.source_destination;
        for (&n, &p) in t.relay_groups().iter().zip(&self.link_powers.relay_destination) {
            total += a2 * n as f64 * p;
        }
        total / t.hops() as f64
    }

    /// Noise variance at `snr_db` under this scenario's convention.
    pub fn noise_variance_at(&self, snr_db: f64) -> f64 {
        let snr = 10f64.powf(snr_db / 10.0);
        self.received_power() / (self.snr_convention.bits_per_symbol() * snr)
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
            .unwrap_or_else(|| self.noise_variance_at(self.snr_db))
    }

    pub fn with_snr(&self, snr_db: f64) -> Self {
        Self {
            snr_db,
            noise_variance: None,
            ..self.clone()
        }
    }

    pub fn data_len(&self) -> usize {
        self.packet_len - self.training_len
    }

    pub fn labels(&self) -> Vec<String> {
        self.estimators.iter().map(EstimatorSpec::label).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.training_len == 0 {
            return Err(Error::parameter("n_t", "training length must be > 0"));
        }
        if self.training_len > self.packet_len {
            return Err(Error::parameter(
                "n_t",
                format!("n_t = {} exceeds n_p = {}", self.training_len, self.packet_len),
            ));
        }
        if self.trials == 0 {
            return Err(Error::parameter("trials", "must be >= 1"));
        }
        if self.estimators.is_empty() {
            return Err(Error::parameter("estimators", "at least one estimator is required"));
        }
        if !(self.steady_fraction > 0.0 && self.steady_fraction <= 1.0) {
            return Err(Error::parameter(
                "steady_fraction",
                format!("must lie in (0, 1], got {}", self.steady_fraction),
            ));
        }
        if !self.snr_db.is_finite() {
            return Err(Error::parameter("snr_db", "must be finite"));
        }
        if !self.amplification.is_finite() {
            return Err(Error::parameter("amplification", "must be finite"));
        }
        if let Some(v) = self.noise_variance {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::parameter(
                    "noise_variance",
                    format!("must be finite and >= 0, got {v}"),
                ));
            }
        }
        if self.fading == FadingKind::Clarke && (!(self.doppler >= 0.0) || !self.doppler.is_finite()) {
            return Err(Error::parameter(
                "doppler",
                format!("must be finite and >= 0, got {}", self.doppler),
            ));
        }
        let mut labels = self.labels();
        labels.sort();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::parameter("estimators", "duplicate estimator entries"));
        }
        let sigma2 = self.noise_variance();
        for spec in &self.estimators {
            spec.build(self.rows(), self.cols(), sigma2)?;
        }
        Ok(())
    }

    /// Human-readable description for metadata files.
    pub fn describe(&self) -> Metadata {
        let t = &self.topology;
        let mut m = Metadata::default();
        m.push("scenario", &self.name);
        m.push("hops", t.hops());
        m.push("sources", t.sources());
        m.push("relays", format!("{:?}", t.relay_groups()));
        m.push("destinations", t.destinations());
        m.push("stacked_rows_M", self.rows());
        m.push("stacked_cols_N", self.cols());
        m.push("link_power_source_relay", self.link_powers.source_relay);
        m.push("link_power_relay_relay", format!("{:?}", self.link_powers.relay_relay));
        m.push("link_power_source_destination", self.link_powers.source_destination);
        m.push(
            "link_power_relay_destination",
            format!("{:?}", self.link_powers.relay_destination),
        );
        m.push("amplification", self.amplification);
        m.push("fading", format!("{:?}", self.fading));
        m.push("doppler", self.doppler);
        m.push("snr_db", self.snr_db);
        m.push("snr_convention", self.snr_convention.label());
        m.push("noise_variance", self.noise_variance());
        m.push("packet_len", self.packet_len);
        m.push("training_len", self.training_len);
        m.push("trials", self.trials);
        m.push("seed", self.seed);
        m.push("feed", self.feed.label());
        m.push("steady_fraction", self.steady_fraction);
        m.push("estimators", self.labels().join(" "));
        m.push(
            "mse_normalization",
            "||H0-H||_F^2 / ||H0||_F^2, averaged over trials, reported in dB",
        );
        m
    }
}
