//! Subcommand bodies: run an experiment and write `<name>.csv` + `<name>.meta`.

use std::path::{Path, PathBuf};

use smchanest::estimators::Algorithm;
use smchanest::experiments::{
    run_analysis_validation, run_ber, run_complexity_table, run_learning_curve, run_mse_vs_snr, write_outputs,
    AnalysisPoint, CsvTable, Metadata, Scenario,
};
use thiserror::Error;

use crate::config::Experiment;

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Run(#[from] smchanest::Error),
    #[error("{0}")]
    Config(String),
}

pub type Written = (PathBuf, PathBuf);

/// Update probabilities tabulated by `complexity`.
pub const COMPLEXITY_P_GRID: [f64; 3] = [0.1, 0.3, 0.5];

/// Joins tables that share an x-axis, prefixing every other column.
fn merge(parts: Vec<(String, CsvTable)>) -> Result<CsvTable, CommandError> {
    let x_name = parts[0].1.header()[0].clone();
    let x = parts[0].1.column(&x_name).unwrap_or_default();
    let mut header = vec![x_name];
    for (prefix, t) in &parts {
        if t.column(&t.header()[0]).unwrap_or_default() != x {
            return Err(CommandError::Config("merged runs disagree on the x-axis".into()));
        }
        header.extend(t.header()[1..].iter().map(|h| format!("{prefix}{h}")));
    }
    let mut merged = CsvTable::new(header);
    for (i, xv) in x.iter().enumerate() {
        let mut row = vec![*xv];
        for (_, t) in &parts {
            row.extend_from_slice(&t.rows()[i][1..]);
        }
        merged.push_row(row)?;
    }
    Ok(merged)
}

fn single_rate(exp: &Experiment, command: &str) -> Result<(), CommandError> {
    if exp.dopplers.len() > 1 {
        return Err(CommandError::Config(format!(
            "{command} takes a single fading rate; `doppler` lists {}",
            exp.dopplers.len()
        )));
    }
    Ok(())
}

fn needs_estimators(scn: &Scenario, command: &str) -> Result<(), CommandError> {
    if scn.estimators.is_empty() {
        return Err(CommandError::Config(format!(
            "{command} needs at least one [estimator] section"
        )));
    }
    Ok(())
}

pub fn curve(exp: &Experiment, out: &Path) -> Result<Written, CommandError> {
    let scn = &exp.scenario;
    needs_estimators(scn, "curve")?;
    let mut meta = scn.describe();
    if exp.dopplers.len() <= 1 {
        let run = run_learning_curve(scn)?;
        meta = run.metadata();
        return Ok(write_outputs(out, &scn.name, &run.to_table()?, &meta)?);
    }
    meta.push("doppler_grid", format!("{:?}", exp.dopplers));
    let mut parts = Vec::new();
    for &fd in &exp.dopplers {
        let point = Scenario {
            doppler: fd,
            ..scn.clone()
        };
        let run = run_learning_curve(&point)?;
        let prefix = format!("fd{fd:e}_");
        for s in &run.series {
            meta.push(format!("{prefix}{}_update_rate", s.label), s.update_rate());
            meta.push(
                format!("{prefix}{}_steady_mse_db", s.label),
                s.steady_mse_db(scn.steady_fraction),
            );
        }
        parts.push((prefix, run.to_table()?));
    }
    Ok(write_outputs(out, &scn.name, &merge(parts)?, &meta)?)
}

fn snr_grid<'a>(exp: &'a Experiment, command: &str) -> Result<&'a [f64], CommandError> {
    exp.snr_grid_db
        .as_deref()
        .ok_or_else(|| CommandError::Config(format!("{command} needs `snr_grid_db` in [run]")))
}

pub fn mse_vs_snr(exp: &Experiment, out: &Path) -> Result<Written, CommandError> {
    single_rate(exp, "mse-vs-snr")?;
    needs_estimators(&exp.scenario, "mse-vs-snr")?;
    let sweep = run_mse_vs_snr(&exp.scenario, snr_grid(exp, "mse-vs-snr")?)?;
    Ok(write_outputs(
        out,
        &exp.scenario.name,
        &sweep.to_table()?,
        &sweep.metadata(),
    )?)
}

pub fn ber(exp: &Experiment, out: &Path) -> Result<Written, CommandError> {
    single_rate(exp, "ber")?;
    needs_estimators(&exp.scenario, "ber")?;
    let sweep = run_ber(&exp.scenario, snr_grid(exp, "ber")?)?;
    Ok(write_outputs(
        out,
        &exp.scenario.name,
        &sweep.to_table()?,
        &sweep.metadata(),
    )?)
}

pub fn validate_analysis(exp: &Experiment, out: &Path) -> Result<Written, CommandError> {
    single_rate(exp, "validate-analysis")?;
    let ratios = exp
        .bound_ratios
        .as_deref()
        .ok_or_else(|| CommandError::Config("validate-analysis needs `bound_ratios` in [run]".into()))?;
    if exp.analysis.is_empty() {
        return Err(CommandError::Config(
            "validate-analysis needs `analysis` in [run]".into(),
        ));
    }
    let scn = &exp.scenario;
    let mut meta = scn.describe();
    meta.push("bound_ratios", format!("{ratios:?}"));
    meta.push("steady_window", format!("last {} of each packet", scn.steady_fraction));
    let mut parts = Vec::new();
    for &alg in &exp.analysis {
        let points = run_analysis_validation(scn, alg, ratios)?;
        let prefix = format!("{}_", alg.label().replace('-', "_"));
        if alg == Algorithm::SmNlms {
            meta.push("sm_nlms_analytical_noise", "1.1 x noise variance");
        }
        let worst = points.iter().map(AnalysisPoint::relative_error).fold(0.0, f64::max);
        meta.push(format!("{prefix}worst_relative_j_ex_error"), worst);
        parts.push((prefix, AnalysisPoint::table(&points)?));
    }
    Ok(write_outputs(out, &scn.name, &merge(parts)?, &meta)?)
}

pub fn complexity(out: &Path, max_size: usize) -> Result<Written, CommandError> {
    let sizes: Vec<usize> = (1..=max_size).collect();
    let table = run_complexity_table(&sizes, &COMPLEXITY_P_GRID)?;
    let mut meta = Metadata::default();
    meta.push("scenario", "fig4");
    meta.push("sizes", format!("M = N = 1..={max_size}"));
    meta.push("p_up_grid", format!("{COMPLEXITY_P_GRID:?}"));
    meta.push("count", "complex multiplications per iteration");
    Ok(write_outputs(out, "fig4", &table, &meta)?)
}
