//! Trial simulation and the experiment runners.

use rayon::prelude::*;

use super::{CsvTable, EstimatorSpec, Feed, Metadata, Scenario};
use crate::analysis::{
    beacon_rls_crossover, collect_moments, complexity_per_update, excess_mse_steady, p_update_analytical,
    sigma_inflation_for_smnlms, ConditionalMoments,
};
use crate::detection::{bit_errors, hard_decision, DetectorConfig};
use crate::error::{Error, Result};
use crate::estimators::Algorithm;
use crate::experiments::BoundSpec;
use crate::numerics::{frobenius_norm_sqr, ComplexMatrix, ComplexVector, RngStream};
use crate::wsn::{make_packet, Amplification, NetworkChannels};

/// What a trial records beyond the learning curve.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrialOptions {
    /// Run the LMMSE detector on data symbols and count bit errors.
    pub detect: bool,
    /// Keep a-priori error norms and excess errors per step.
    pub record_norms: bool,
}

/// Per-step records of one trial, indexed `[estimator][time]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrialOutput {
    pub mse: Vec<Vec<f64>>,
    pub mse_raw: Vec<Vec<f64>>,
    pub updated: Vec<Vec<bool>>,
    /// Bound in force at each step; empty for estimators without one.
    pub gamma: Vec<Vec<f64>>,
    /// `‖r - H(n-1)s‖`; filled when `record_norms` is set.
    pub error_norms: Vec<Vec<f64>>,
    /// `‖(H0 - H(n-1))s‖²`; filled when `record_norms` is set.
    pub excess: Vec<Vec<f64>>,
    pub bit_errors: Vec<u64>,
    pub bits: Vec<u64>,
    pub perfect_bit_errors: u64,
    pub perfect_bits: u64,
}

fn rng_streams(seed: u64, trial: usize) -> (RngStream, RngStream, RngStream) {
    let base = (trial as u64) << 4;
    (
        RngStream::new(seed, base),
        RngStream::new(seed, base + 1),
        RngStream::new(seed, base + 2),
    )
}

/// Counts bit errors on the source entries, which sit last in the stacked input.
fn source_bit_errors(soft: &ComplexVector, truth: &ComplexVector, sources: usize) -> (u64, u64) {
    let start = truth.len() - sources;
    let errors = (start..truth.len()).map(|i| bit_errors(soft[i], truth[i]) as u64).sum();
    (errors, 2 * sources as u64)
}

/// Simulates one packet of trial `trial` for every estimator of `scn`.
/// All estimators see the same channel, symbols and noise.
pub fn simulate_trial(scn: &Scenario, trial: usize, opts: &TrialOptions) -> Result<TrialOutput> {
    let (m, n) = (scn.rows(), scn.cols());
    let (np, nt) = (scn.packet_len, scn.training_len);
    let sigma2 = scn.noise_variance();
    let sources = scn.topology.sources();
    let (mut ch_rng, mut sym_rng, mut noise_rng) = rng_streams(scn.seed, trial);

    let channels = NetworkChannels::draw(&mut ch_rng, &scn.topology, &scn.link_powers, scn.fading, scn.doppler)?;
    let amp = Amplification::uniform(&scn.topology, scn.amplification)?.stacked(&scn.topology);
    let packet = make_packet(&mut sym_rng, n, np, nt)?;
    let is_static = channels.is_static();

    // True effective channel H_d·A at every time instant.
    let mut hd = ComplexMatrix::zeros(m, n);
    let mut h0s = Vec::with_capacity(if is_static { 1 } else { np });
    for t in 0..if is_static { 1 } else { np } {
        channels.stacked_into(&scn.topology, t as f64, &mut hd);
        h0s.push(&hd * &amp);
    }
    let h0_at = |t: usize| if is_static { &h0s[0] } else { &h0s[t] };
    let received: Vec<ComplexVector> = (0..np)
        .map(|t| {
            let v = crate::channel::awgn(&mut noise_rng, m, sigma2)?;
            Ok(h0_at(t) * packet.column(t) + v)
        })
        .collect::<Result<_>>()?;

    let k = scn.estimators.len();
    let mut ests = Vec::with_capacity(k);
    for spec in &scn.estimators {
        ests.push(spec.build(m, n, sigma2)?);
    }
    let mmse = if ests.iter().any(Option::is_none) {
        let training = packet.symbols().columns(0, nt).into_owned();
        let mut r = ComplexMatrix::zeros(m, nt);
        for (t, col) in received.iter().take(nt).enumerate() {
            r.set_column(t, col);
        }
        let corr = &amp * scn.link_powers.stacked_correlation(&scn.topology) * &amp;
        Some(crate::estimators::mmse_batch(&training, &r, &corr, sigma2, m).map_err(|e| e.in_run(trial, 0))?)
    } else {
        None
    };

    let mut out = TrialOutput {
        mse: vec![Vec::with_capacity(np); k],
        mse_raw: vec![Vec::with_capacity(np); k],
        updated: vec![Vec::with_capacity(np); k],
        gamma: vec![Vec::new(); k],
        error_norms: vec![Vec::new(); k],
        excess: vec![Vec::new(); k],
        bit_errors: vec![0; k],
        bits: vec![0; k],
        ..Default::default()
    };
    let needs_detector = opts.detect || scn.feed == Feed::DecisionDirected;
    let mut filters: Vec<Option<ComplexMatrix>> = vec![None; k];
    let mut perfect_filter: Option<ComplexMatrix> = None;

    for (t, r) in received.iter().enumerate() {
        let h0 = h0_at(t);
        let h0_norm2 = frobenius_norm_sqr(h0);
        let y = packet.column(t);
        let data = t >= nt;

        if opts.detect && data {
            if perfect_filter.is_none() || !is_static {
                perfect_filter = Some(
                    DetectorConfig::new(h0.clone(), sigma2)?
                        .filter()
                        .map_err(|e| e.in_run(trial, t))?,
                );
            }
            let soft = perfect_filter.as_ref().expect("filter").ad_mul(r);
            let (e, b) = source_bit_errors(&soft, &y, sources);
            out.perfect_bit_errors += e;
            out.perfect_bits += b;
        }

        for i in 0..k {
            let current = match &ests[i] {
                Some(est) => est.estimate(),
                None => mmse.as_ref().expect("mmse estimate"),
            };
            let soft = if needs_detector && data {
                if filters[i].is_none() {
                    filters[i] = Some(
                        DetectorConfig::new(current.clone(), sigma2)?
                            .filter()
                            .map_err(|e| e.in_run(trial, t))?,
                    );
                }
                Some(filters[i].as_ref().expect("filter").ad_mul(r))
            } else {
                None
            };
            if let (true, Some(sf)) = (opts.detect, &soft) {
                let (e, b) = source_bit_errors(sf, &y, sources);
                out.bit_errors[i] += e;
                out.bits[i] += b;
            }
            if opts.record_norms {
                out.excess[i].push(((h0 - current) * &y).norm_squared());
            }
            let Some(est) = ests[i].as_mut() else {
                let current = mmse.as_ref().expect("mmse estimate");
                let raw = frobenius_norm_sqr(&(h0 - current));
                out.mse_raw[i].push(raw);
                out.mse[i].push(raw / h0_norm2);
                out.updated[i].push(false);
                if opts.record_norms {
                    out.error_norms[i].push((r - current * &y).norm());
                }
                continue;
            };
            let input = match (scn.feed, &soft) {
                (Feed::DecisionDirected, Some(sf)) => sf.map(hard_decision),
                _ => y.clone(),
            };
            let rep = est.step(&input, r).map_err(|e| e.in_run(trial, t))?;
            if rep.updated {
                filters[i] = None;
            }
            let raw = frobenius_norm_sqr(&(h0 - est.estimate()));
            out.mse_raw[i].push(raw);
            out.mse[i].push(raw / h0_norm2);
            out.updated[i].push(rep.updated);
            if let Some(g) = rep.bound {
                out.gamma[i].push(g);
            }
            if opts.record_norms {
                out.error_norms[i].push(rep.error_norm);
            }
        }
    }
    Ok(out)
}

fn run_trials(scn: &Scenario, opts: &TrialOptions) -> Result<Vec<TrialOutput>> {
    (0..scn.trials)
        .into_par_iter()
        .map(|t| simulate_trial(scn, t, opts))
        .collect()
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

fn to_db(x: f64) -> f64 {
    10.0 * x.max(1e-300).log10()
}

/// Trial-averaged results for one estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesMetrics {
    pub label: String,
    pub spec: EstimatorSpec,
    /// Normalized MSE `‖H0 - H(n)‖²/‖H0‖²`, linear.
    pub mse: Vec<f64>,
    /// Unnormalized `‖H0 - H(n)‖²`.
    pub mse_raw: Vec<f64>,
    /// Fraction of trials updating at each step.
    pub update_fraction: Vec<f64>,
    /// Mean bound at each step; empty without a bound.
    pub gamma: Vec<f64>,
    pub trial_update_rates: Vec<f64>,
    pub bit_errors: u64,
    pub bits: u64,
}

impl SeriesMetrics {
    pub fn update_rate(&self) -> f64 {
        mean(&self.trial_update_rates)
    }

    fn window(&self, fraction: f64) -> &[f64] {
        let len = self.mse.len();
        let take = ((len as f64 * fraction).round() as usize).clamp(1, len);
        &self.mse[len - take..]
    }

    /// Mean normalized MSE over the trailing `fraction` of the packet.
    pub fn steady_mse(&self, fraction: f64) -> f64 {
        mean(self.window(fraction))
    }

    pub fn steady_mse_db(&self, fraction: f64) -> f64 {
        to_db(self.steady_mse(fraction))
    }

    /// Least-squares slope of the dB learning curve over the trailing
    /// `fraction`, in dB per iteration.
    pub fn slope_db(&self, fraction: f64) -> f64 {
        let w = self.window(fraction);
        let n = w.len() as f64;
        if w.len() < 2 {
            return 0.0;
        }
        let xm = (n - 1.0) / 2.0;
        let ym = w.iter().map(|&v| to_db(v)).sum::<f64>() / n;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for (i, &v) in w.iter().enumerate() {
            let dx = i as f64 - xm;
            sxy += dx * (to_db(v) - ym);
            sxx += dx * dx;
        }
        sxy / sxx
    }

    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.bit_errors as f64 / self.bits as f64
        }
    }

    /// Trial-averaged cumulative update rate after each step.
    pub fn cumulative_update_rate(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.update_fraction
            .iter()
            .enumerate()
            .map(|(i, f)| {
                acc += f;
                acc / (i + 1) as f64
            })
            .collect()
    }
}

/// Results of a learning-curve run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub scenario: Scenario,
    pub noise_variance: f64,
    pub series: Vec<SeriesMetrics>,
    pub perfect_bit_errors: u64,
    pub perfect_bits: u64,
}

impl RunMetrics {
    fn reduce(scn: &Scenario, trials: Vec<TrialOutput>) -> Self {
        let np = scn.packet_len;
        let count = trials.len() as f64;
        let mut series: Vec<SeriesMetrics> = scn
            .estimators
            .iter()
            .map(|spec| SeriesMetrics {
                label: spec.label(),
                spec: *spec,
                mse: vec![0.0; np],
                mse_raw: vec![0.0; np],
                update_fraction: vec![0.0; np],
                gamma: Vec::new(),
                trial_update_rates: Vec::with_capacity(trials.len()),
                bit_errors: 0,
                bits: 0,
            })
            .collect();
        let (mut pe, mut pb) = (0, 0);
        // Ordered fold over trials keeps results independent of scheduling.
        for tr in &trials {
            for (i, s) in series.iter_mut().enumerate() {
                for t in 0..np {
                    s.mse[t] += tr.mse[i][t];
                    s.mse_raw[t] += tr.mse_raw[i][t];
                    s.update_fraction[t] += tr.updated[i][t] as u8 as f64;
                }
                if !tr.gamma[i].is_empty() {
                    if s.gamma.is_empty() {
                        s.gamma = vec![0.0; np];
                    }
                    for t in 0..np {
                        s.gamma[t] += tr.gamma[i][t];
                    }
                }
                let ups = tr.updated[i].iter().filter(|u| **u).count();
                s.trial_update_rates.push(ups as f64 / np as f64);
                s.bit_errors += tr.bit_errors[i];
                s.bits += tr.bits[i];
            }
            pe += tr.perfect_bit_errors;
            pb += tr.perfect_bits;
        }
        for s in &mut series {
            for v in s
                .mse
                .iter_mut()
                .chain(s.mse_raw.iter_mut())
                .chain(s.update_fraction.iter_mut())
                .chain(s.gamma.iter_mut())
            {
                *v /= count;
            }
        }
        Self {
            scenario: scn.clone(),
            noise_variance: scn.noise_variance(),
            series,
            perfect_bit_errors: pe,
            perfect_bits: pb,
        }
    }

    pub fn series(&self, label: &str) -> Option<&SeriesMetrics> {
        self.series.iter().find(|s| s.label == label)
    }

    pub fn perfect_ber(&self) -> f64 {
        if self.perfect_bits == 0 {
            0.0
        } else {
            self.perfect_bit_errors as f64 / self.perfect_bits as f64
        }
    }

    /// Columns: `iteration`, then per estimator `<label>_mse_db`,
    /// `<label>_mse_raw`, `<label>_ur` (cumulative update rate) and, for
    /// bounded estimators, `<label>_gamma`.
    pub fn to_table(&self) -> Result<CsvTable> {
        let mut header = vec!["iteration".to_string()];
        for s in &self.series {
            header.push(format!("{}_mse_db", s.label));
            header.push(format!("{}_mse_raw", s.label));
            if s.spec.algorithm().is_some() {
                header.push(format!("{}_ur", s.label));
            }
            if !s.gamma.is_empty() {
                header.push(format!("{}_gamma", s.label));
            }
        }
        let cum: Vec<Vec<f64>> = self.series.iter().map(SeriesMetrics::cumulative_update_rate).collect();
        let mut table = CsvTable::new(header);
        for t in 0..self.scenario.packet_len {
            let mut row = vec![(t + 1) as f64];
            for (s, c) in self.series.iter().zip(&cum) {
                row.push(to_db(s.mse[t]));
                row.push(s.mse_raw[t]);
                if s.spec.algorithm().is_some() {
                    row.push(c[t]);
                }
                if !s.gamma.is_empty() {
                    row.push(s.gamma[t]);
                }
            }
            table.push_row(row)?;
        }
        Ok(table)
    }

    pub fn metadata(&self) -> Metadata {
        let mut m = self.scenario.describe();
        let f = self.scenario.steady_fraction;
        for s in &self.series {
            m.push(format!("{}_update_rate", s.label), s.update_rate());
            m.push(format!("{}_steady_mse_db", s.label), s.steady_mse_db(f));
        }
        m
    }
}

/// Trial-averaged learning curves of every estimator in `scn`.
pub fn run_learning_curve(scn: &Scenario) -> Result<RunMetrics> {
    scn.validate()?;
    let trials = run_trials(scn, &TrialOptions::default())?;
    Ok(RunMetrics::reduce(scn, trials))
}

fn check_grid(grid: &[f64], name: &'static str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::parameter(name, "grid must not be empty"));
    }
    if grid.iter().any(|v| !v.is_finite()) || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::parameter(name, "grid must be finite and strictly increasing"));
    }
    Ok(())
}

/// Steady-state MSE and update rate against SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrSweep {
    pub scenario: Scenario,
    pub snr_db: Vec<f64>,
    pub noise_variance: Vec<f64>,
    pub labels: Vec<String>,
    /// `[estimator][snr]`, linear normalized MSE.
    pub steady_mse: Vec<Vec<f64>>,
    pub update_rate: Vec<Vec<f64>>,
}

impl SnrSweep {
    pub fn to_table(&self) -> Result<CsvTable> {
        let mut header = vec!["snr_db".to_string()];
        for l in &self.labels {
            header.push(format!("{l}_mse_db"));
            header.push(format!("{l}_ur"));
        }
        let mut table = CsvTable::new(header);
        for (j, snr) in self.snr_db.iter().enumerate() {
            let mut row = vec![*snr];
            for i in 0..self.labels.len() {
                row.push(to_db(self.steady_mse[i][j]));
                row.push(self.update_rate[i][j]);
            }
            table.push_row(row)?;
        }
        Ok(table)
    }

    pub fn metadata(&self) -> Metadata {
        let mut m = self.scenario.describe();
        m.push("snr_grid_db", format!("{:?}", self.snr_db));
        m.push("noise_variance_grid", format!("{:?}", self.noise_variance));
        m
    }

    pub fn index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// Steady-state MSE per SNR; every SNR point reuses the same seeds.
pub fn run_mse_vs_snr(scn: &Scenario, snr_grid: &[f64]) -> Result<SnrSweep> {
    check_grid(snr_grid, "snr grid")?;
    let labels = scn.labels();
    let mut sweep = SnrSweep {
        scenario: scn.clone(),
        snr_db: snr_grid.to_vec(),
        noise_variance: Vec::new(),
        labels: labels.clone(),
        steady_mse: vec![Vec::new(); labels.len()],
        update_rate: vec![Vec::new(); labels.len()],
    };
    for &snr in snr_grid {
        let point = scn.with_snr(snr);
        let run = run_learning_curve(&point)?;
        sweep.noise_variance.push(run.noise_variance);
        for (i, s) in run.series.iter().enumerate() {
            sweep.steady_mse[i].push(s.steady_mse(scn.steady_fraction));
            sweep.update_rate[i].push(s.update_rate());
        }
    }
    Ok(sweep)
}

/// Bit-error tallies at one SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    pub bit_errors: Vec<u64>,
    pub bits: Vec<u64>,
    pub perfect_bit_errors: u64,
    pub perfect_bits: u64,
}

impl BerPoint {
    pub fn ber(&self, i: usize) -> f64 {
        self.bit_errors[i] as f64 / self.bits[i].max(1) as f64
    }

    pub fn perfect_ber(&self) -> f64 {
        self.perfect_bit_errors as f64 / self.perfect_bits.max(1) as f64
    }
}

/// BER against SNR with a perfect-CSI reference.
#[derive(Debug, Clone, PartialEq)]
pub struct BerSweep {
    pub scenario: Scenario,
    pub labels: Vec<String>,
    pub points: Vec<BerPoint>,
}

impl BerSweep {
    pub fn to_table(&self) -> Result<CsvTable> {
        let mut header = vec!["snr_db".to_string()];
        header.extend(self.labels.iter().map(|l| format!("{l}_ber")));
        header.push("perfect_csi_ber".into());
        let mut table = CsvTable::new(header);
        for p in &self.points {
            let mut row = vec![p.snr_db];
            row.extend((0..self.labels.len()).map(|i| p.ber(i)));
            row.push(p.perfect_ber());
            table.push_row(row)?;
        }
        Ok(table)
    }

    pub fn metadata(&self) -> Metadata {
        let mut m = self.scenario.describe();
        m.push(
            "ber_symbols",
            "source symbols of data instants, LMMSE detection on the current estimate",
        );
        for p in &self.points {
            m.push(format!("bits_at_{}db", p.snr_db), p.perfect_bits);
        }
        m
    }

    pub fn index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// Bit error rate of source symbols in the data part of the packet.
pub fn run_ber(scn: &Scenario, snr_grid: &[f64]) -> Result<BerSweep> {
    check_grid(snr_grid, "snr grid")?;
    if scn.data_len() == 0 {
        return Err(Error::parameter("n_d", "BER needs data symbols (n_p > n_t)"));
    }
    let opts = TrialOptions {
        detect: true,
        record_norms: false,
    };
    let mut points = Vec::with_capacity(snr_grid.len());
    for &snr in snr_grid {
        let point = scn.with_snr(snr);
        point.validate()?;
        let run = RunMetrics::reduce(&point, run_trials(&point, &opts)?);
        points.push(BerPoint {
            snr_db: snr,
            bit_errors: run.series.iter().map(|s| s.bit_errors).collect(),
            bits: run.series.iter().map(|s| s.bits).collect(),
            perfect_bit_errors: run.perfect_bit_errors,
            perfect_bits: run.perfect_bits,
        });
    }
    Ok(BerSweep {
        scenario: scn.clone(),
        labels: scn.labels(),
        points,
    })
}

/// Analysis against simulation at one bound.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisPoint {
    /// `γ² / (M σ²)`.
    pub ratio: f64,
    pub gamma: f64,
    pub p_up_empirical: f64,
    /// From the chi-square model; uses `1.1σ²` for SM-NLMS.
    pub p_up_analytical: f64,
    pub j_ex_semi_analytical: f64,
    pub j_ex_empirical: f64,
    /// Learning-curve slope over the last 20% of the packet, dB/iteration.
    pub slope_db: f64,
    pub moments: ConditionalMoments,
}

impl AnalysisPoint {
    pub fn relative_error(&self) -> f64 {
        (self.j_ex_semi_analytical - self.j_ex_empirical).abs() / self.j_ex_empirical.abs()
    }

    pub fn table(points: &[AnalysisPoint]) -> Result<CsvTable> {
        let mut t = CsvTable::new([
            "gamma2_over_m_sigma2",
            "gamma",
            "p_up_analytical",
            "p_up_empirical",
            "j_ex_semi_analytical",
            "j_ex_empirical",
            "slope_db_per_iter",
        ]);
        for p in points {
            t.push_row(vec![
                p.ratio,
                p.gamma,
                p.p_up_analytical,
                p.p_up_empirical,
                p.j_ex_semi_analytical,
                p.j_ex_empirical,
                p.slope_db,
            ])?;
        }
        Ok(t)
    }
}

/// Sweeps the fixed bound of `algorithm` over `γ²/(Mσ²) ∈ ratios` and
/// compares the analysis with simulation over the steady-state window.
pub fn run_analysis_validation(scn: &Scenario, algorithm: Algorithm, ratios: &[f64]) -> Result<Vec<AnalysisPoint>> {
    check_grid(ratios, "bound grid")?;
    if ratios[0] <= 0.0 {
        return Err(Error::parameter("bound grid", "ratios must be > 0"));
    }
    let rows = scn.rows();
    let sigma2 = scn.noise_variance();
    if !(sigma2 > 0.0) {
        return Err(Error::parameter("noise_variance", "analysis needs noise"));
    }
    let analytic_sigma2 = match algorithm {
        Algorithm::SmNlms => sigma_inflation_for_smnlms(sigma2),
        Algorithm::Beacon => sigma2,
        other => {
            return Err(Error::parameter(
                "algorithm",
                format!("analysis covers sm-nlms and beacon, not {}", other.label()),
            ))
        }
    };
    let opts = TrialOptions {
        detect: false,
        record_norms: true,
    };
    let np = scn.packet_len;
    let start = np - ((np as f64 * scn.steady_fraction).round() as usize).clamp(1, np);
    let mut points = Vec::with_capacity(ratios.len());
    for &ratio in ratios {
        let gamma = (ratio * rows as f64 * sigma2).sqrt();
        let bound = BoundSpec::Fixed(gamma);
        let spec = match algorithm {
            Algorithm::SmNlms => EstimatorSpec::SmNlms { bound },
            _ => EstimatorSpec::Beacon { bound },
        };
        let point_scn = Scenario {
            estimators: vec![spec],
            ..scn.clone()
        };
        point_scn.validate()?;
        let trials = run_trials(&point_scn, &opts).map_err(|e| e.at_gamma(gamma))?;
        let mut norms = Vec::with_capacity(trials.len() * (np - start));
        let mut excess = Vec::with_capacity(trials.len() * (np - start));
        for tr in &trials {
            norms.extend_from_slice(&tr.error_norms[0][start..]);
            excess.extend_from_slice(&tr.excess[0][start..]);
        }
        let run = RunMetrics::reduce(&point_scn, trials);
        let moments = collect_moments(&norms, gamma).map_err(|e| e.at_gamma(gamma))?;
        let semi = excess_mse_steady(&moments, gamma, sigma2, rows).map_err(|e| e.at_gamma(gamma))?;
        points.push(AnalysisPoint {
            ratio,
            gamma,
            p_up_empirical: moments.p_up,
            p_up_analytical: p_update_analytical(gamma, analytic_sigma2, rows)?,
            j_ex_semi_analytical: semi,
            j_ex_empirical: mean(&excess),
            slope_db: run.series[0].slope_db(0.2),
            moments,
        });
    }
    Ok(points)
}

/// Multiplications per iteration against the channel size with `M = N`,
/// for every algorithm and every update probability in `p_grid`.
pub fn run_complexity_table(sizes: &[usize], p_grid: &[f64]) -> Result<CsvTable> {
    let as_f64: Vec<f64> = sizes.iter().map(|&s| s as f64).collect();
    check_grid(&as_f64, "size grid")?;
    if sizes[0] == 0 {
        return Err(Error::parameter("size grid", "sizes must be >= 1"));
    }
    let mut header = vec!["size".to_string(), "nlms".into(), "rls".into()];
    for p in p_grid {
        header.push(format!("sm_nlms_p{p}"));
        header.push(format!("beacon_p{p}"));
    }
    header.push("beacon_rls_crossover".into());
    let mut table = CsvTable::new(header);
    for &s in sizes {
        let mut row = vec![
            s as f64,
            complexity_per_update(Algorithm::Nlms, s, s, 1.0)?.multiplications,
            complexity_per_update(Algorithm::Rls, s, s, 1.0)?.multiplications,
        ];
        for &p in p_grid {
            row.push(complexity_per_update(Algorithm::SmNlms, s, s, p)?.multiplications);
            row.push(complexity_per_update(Algorithm::Beacon, s, s, p)?.multiplications);
        }
        row.push(beacon_rls_crossover(s, s));
        table.push_row(row)?;
    }
    Ok(table)
}
