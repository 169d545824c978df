//! Plain-text scenario files.
//!
//! ```text
//! # comment
//! [topology]
//! hops = 3
//! sources = 2
//! relays = 4, 4
//! destinations = 3
//!
//! [estimator]          # repeatable, one estimator family each
//! algorithm = sm-nlms
//! gamma = 0.3, 0.5, 0.7
//!
//! [run]
//! name = fig5
//! n_p = 1000
//! n_t = 100
//! ```

use std::collections::HashMap;
use std::str::FromStr;

use smchanest::channel::FadingKind;
use smchanest::estimators::Algorithm;
use smchanest::experiments::{BoundSpec, EstimatorSpec, Feed, Scenario, SnrConvention};
use smchanest::wsn::{LinkPowers, Topology};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown section [{name}]")]
    UnknownSection { line: usize, name: String },
    #[error("line {line}: unknown key `{key}` in [{section}]")]
    UnknownKey { line: usize, section: String, key: String },
    #[error("duplicate key `{key}` in [{section}] at lines {first} and {second}")]
    DuplicateKey {
        section: String,
        key: String,
        first: usize,
        second: usize,
    },
    #[error("duplicate section [{section}] at lines {first} and {second}")]
    DuplicateSection {
        section: String,
        first: usize,
        second: usize,
    },
    #[error("line {line}: `{key}`: {message}")]
    Value { line: usize, key: String, message: String },
    #[error("missing required key `{key}` in [{section}]")]
    Missing { section: String, key: String },
    #[error("missing required section [{0}]")]
    MissingSection(String),
    #[error("{0}")]
    Inconsistent(String),
    #[error("invalid scenario: {0}")]
    Scenario(#[from] smchanest::Error),
}

/// A parsed config: the scenario plus the sweep grids some subcommands use.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub scenario: Scenario,
    /// Clarke fading rates; one run each. Empty for quasi-static fading.
    pub dopplers: Vec<f64>,
    pub snr_grid_db: Option<Vec<f64>>,
    pub bound_ratios: Option<Vec<f64>>,
    pub analysis: Vec<Algorithm>,
}

#[derive(Debug)]
struct Entry {
    key: String,
    value: String,
    line: usize,
}

#[derive(Debug)]
struct Section {
    name: String,
    line: usize,
    entries: Vec<Entry>,
}

fn tokenize(text: &str) -> Result<Vec<Section>, ConfigError> {
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                line,
                message: format!("unterminated section header `{content}`"),
            })?;
            let name = name.trim().to_string();
            if !matches!(name.as_str(), "topology" | "fading" | "estimator" | "run") {
                return Err(ConfigError::UnknownSection { line, name });
            }
            sections.push(Section {
                name,
                line,
                entries: Vec::new(),
            });
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line,
            message: format!("expected `key = value`, got `{content}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::Syntax {
                line,
                message: "key and value must both be non-empty".into(),
            });
        }
        let section = sections.last_mut().ok_or_else(|| ConfigError::Syntax {
            line,
            message: format!("key `{key}` appears before any section header"),
        })?;
        if let Some(prev) = section.entries.iter().find(|e| e.key == key) {
            return Err(ConfigError::DuplicateKey {
                section: section.name.clone(),
                key: key.into(),
                first: prev.line,
                second: line,
            });
        }
        section.entries.push(Entry {
            key: key.into(),
            value: value.into(),
            line,
        });
    }
    Ok(sections)
}

/// Hands out the keys of one section and reports whatever is left over.
struct Fields<'a> {
    section: String,
    entries: HashMap<&'a str, &'a Entry>,
}

impl<'a> Fields<'a> {
    fn new(section: &'a Section, label: impl Into<String>) -> Self {
        Self {
            section: label.into(),
            entries: section.entries.iter().map(|e| (e.key.as_str(), e)).collect(),
        }
    }

    fn take(&mut self, key: &str) -> Option<&'a Entry> {
        self.entries.remove(key)
    }

    fn required(&mut self, key: &str) -> Result<&'a Entry, ConfigError> {
        self.take(key).ok_or_else(|| ConfigError::Missing {
            section: self.section.clone(),
            key: key.into(),
        })
    }

    fn parse<T: FromStr>(&mut self, key: &str) -> Result<Option<(T, usize)>, ConfigError> {
        self.take(key).map(|e| Ok((parse_value(e)?, e.line))).transpose()
    }

    fn finish(self) -> Result<(), ConfigError> {
        match self.entries.values().min_by_key(|e| e.line) {
            Some(e) => Err(ConfigError::UnknownKey {
                line: e.line,
                section: self.section,
                key: e.key.clone(),
            }),
            None => Ok(()),
        }
    }
}

fn value_error(e: &Entry, message: impl Into<String>) -> ConfigError {
    ConfigError::Value {
        line: e.line,
        key: e.key.clone(),
        message: message.into(),
    }
}

fn parse_value<T: FromStr>(e: &Entry) -> Result<T, ConfigError> {
    e.value
        .parse()
        .map_err(|_| value_error(e, format!("cannot parse `{}`", e.value)))
}

fn parse_list<T: FromStr>(e: &Entry) -> Result<Vec<T>, ConfigError> {
    e.value
        .split(',')
        .map(|item| {
            item.trim()
                .parse()
                .map_err(|_| value_error(e, format!("cannot parse list item `{}`", item.trim())))
        })
        .collect()
}

fn positive(e: &Entry, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(value_error(e, format!("must be finite and > 0, got {v}")))
    }
}

fn algorithm(e: &Entry) -> Result<&'static str, ConfigError> {
    match e.value.as_str() {
        "nlms" => Ok("nlms"),
        "sm-nlms" => Ok("sm-nlms"),
        "rls" => Ok("rls"),
        "beacon" => Ok("beacon"),
        "mmse" => Ok("mmse"),
        other => Err(value_error(
            e,
            format!("unknown algorithm `{other}` (expected nlms, sm-nlms, rls, beacon or mmse)"),
        )),
    }
}

fn estimator_section(section: &Section) -> Result<Vec<EstimatorSpec>, ConfigError> {
    let mut probe = Fields::new(section, "estimator");
    let alg_entry = probe.required("algorithm")?;
    let alg = algorithm(alg_entry)?;
    let mut f = Fields::new(section, format!("estimator ({alg})"));
    f.take("algorithm");
    let specs = match alg {
        "nlms" => {
            let e = f.required("step_size")?;
            vec![EstimatorSpec::Nlms {
                step_size: parse_value(e)?,
            }]
        }
        "rls" => {
            let e = f.required("forgetting")?;
            vec![EstimatorSpec::Rls {
                forgetting: parse_value(e)?,
            }]
        }
        "mmse" => vec![EstimatorSpec::Mmse],
        _ => {
            let gamma = f.take("gamma");
            let alpha = f.parse::<f64>("alpha")?;
            let beta = f.parse::<f64>("beta")?;
            let initial = f.parse::<f64>("gamma0")?;
            let bounds = match (gamma, alpha, beta) {
                (Some(g), None, None) if initial.is_none() => parse_list::<f64>(g)?
                    .into_iter()
                    .map(|v| positive(g, v).map(BoundSpec::Fixed))
                    .collect::<Result<Vec<_>, _>>()?,
                (None, Some((alpha, _)), Some((beta, _))) => vec![BoundSpec::TimeVarying {
                    alpha,
                    beta,
                    initial: initial.map(|(v, _)| v),
                }],
                (Some(g), _, _) => {
                    return Err(value_error(
                        g,
                        "fixed bounds (`gamma`) and a time-varying bound (`alpha`, `beta`, `gamma0`) \
                         belong in separate [estimator] sections",
                    ))
                }
                (None, None, None) => {
                    return Err(ConfigError::Missing {
                        section: format!("estimator ({alg})"),
                        key: "gamma` or `alpha` and `beta".into(),
                    })
                }
                (None, a, _) => {
                    return Err(ConfigError::Missing {
                        section: format!("estimator ({alg})"),
                        key: if a.is_some() { "beta" } else { "alpha" }.into(),
                    })
                }
            };
            bounds
                .into_iter()
                .map(|bound| {
                    if alg == "sm-nlms" {
                        EstimatorSpec::SmNlms { bound }
                    } else {
                        EstimatorSpec::Beacon { bound }
                    }
                })
                .collect()
        }
    };
    f.finish()?;
    Ok(specs)
}

fn unique<'a>(sections: &'a [Section], name: &str) -> Result<Option<&'a Section>, ConfigError> {
    let mut found: Option<&Section> = None;
    for s in sections.iter().filter(|s| s.name == name) {
        if let Some(prev) = found {
            return Err(ConfigError::DuplicateSection {
                section: name.into(),
                first: prev.line,
                second: s.line,
            });
        }
        found = Some(s);
    }
    Ok(found)
}

fn increasing(e: &Entry, v: &[f64]) -> Result<(), ConfigError> {
    if v.iter().any(|x| !x.is_finite()) || v.windows(2).any(|w| w[1] <= w[0]) {
        return Err(value_error(e, "values must be finite and strictly increasing"));
    }
    Ok(())
}

/// Parses and validates a config. Errors name the offending line and key.
pub fn parse_config(text: &str) -> Result<Experiment, ConfigError> {
    let sections = tokenize(text)?;
    let mut scn = Scenario::reference("");

    // [topology]
    let topo = unique(&sections, "topology")?.ok_or_else(|| ConfigError::MissingSection("topology".into()))?;
    let mut f = Fields::new(topo, "topology");
    let hops_entry = f.required("hops")?;
    let hops: usize = parse_value(hops_entry)?;
    let sources: usize = parse_value(f.required("sources")?)?;
    let relays_entry = f.required("relays")?;
    let relays: Vec<usize> = parse_list(relays_entry)?;
    let destinations: usize = parse_value(f.required("destinations")?)?;
    if relays.len() + 1 != hops {
        return Err(ConfigError::Inconsistent(format!(
            "`hops` = {hops} (line {}) needs {} relay groups, but `relays` (line {}) lists {}",
            hops_entry.line,
            hops.saturating_sub(1),
            relays_entry.line,
            relays.len()
        )));
    }
    scn.topology = Topology::new(sources, relays, destinations)?;
    if let Some((a, _)) = f.parse::<f64>("amplification")? {
        scn.amplification = a;
    }
    scn.link_powers = match f.take("normalization") {
        None => LinkPowers::unit_received(&scn.topology),
        Some(e) => match e.value.as_str() {
            "unit-received" => LinkPowers::unit_received(&scn.topology),
            "unit-entry" => LinkPowers::uniform(&scn.topology, 1.0),
            other => {
                return Err(value_error(
                    e,
                    format!("expected unit-received or unit-entry, got `{other}`"),
                ))
            }
        },
    };
    f.finish()?;

    // [fading]
    let mut dopplers = Vec::new();
    if let Some(section) = unique(&sections, "fading")? {
        let mut f = Fields::new(section, "fading");
        let kind = match f.take("kind") {
            None => FadingKind::QuasiStatic,
            Some(e) => match e.value.as_str() {
                "quasi-static" => FadingKind::QuasiStatic,
                "clarke" => FadingKind::Clarke,
                other => {
                    return Err(value_error(
                        e,
                        format!("expected quasi-static or clarke, got `{other}`"),
                    ))
                }
            },
        };
        let doppler = f.take("doppler");
        match (kind, doppler) {
            (FadingKind::Clarke, Some(e)) => {
                dopplers = parse_list(e)?;
                increasing(e, &dopplers)?;
                if dopplers[0] < 0.0 {
                    return Err(value_error(e, "fading rates must be >= 0"));
                }
            }
            (FadingKind::Clarke, None) => {
                return Err(ConfigError::Missing {
                    section: "fading".into(),
                    key: "doppler".into(),
                })
            }
            (FadingKind::QuasiStatic, Some(e)) => {
                return Err(value_error(e, "a fading rate only applies to `kind = clarke`"))
            }
            (FadingKind::QuasiStatic, None) => {}
        }
        scn.fading = kind;
        scn.doppler = dopplers.first().copied().unwrap_or(0.0);
        f.finish()?;
    }

    // [estimator], repeatable
    scn.estimators = sections
        .iter()
        .filter(|s| s.name == "estimator")
        .map(estimator_section)
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect();

    // [run]
    let run = unique(&sections, "run")?.ok_or_else(|| ConfigError::MissingSection("run".into()))?;
    let mut f = Fields::new(run, "run");
    scn.name = f.required("name")?.value.clone();
    if scn.name.contains(['/', '\\']) {
        return Err(ConfigError::Inconsistent(format!(
            "`name` = {} must not contain path separators",
            scn.name
        )));
    }
    let np_entry = f.required("n_p")?;
    let nt_entry = f.required("n_t")?;
    scn.packet_len = parse_value(np_entry)?;
    scn.training_len = parse_value(nt_entry)?;
    if scn.training_len > scn.packet_len {
        return Err(ConfigError::Inconsistent(format!(
            "`n_t` = {} (line {}) exceeds `n_p` = {} (line {})",
            scn.training_len, nt_entry.line, scn.packet_len, np_entry.line
        )));
    }
    if let Some((v, _)) = f.parse("snr_db")? {
        scn.snr_db = v;
    }
    if let Some(e) = f.take("snr_convention") {
        scn.snr_convention = match e.value.as_str() {
            "eb-n0" => SnrConvention::EbN0,
            "es-n0" => SnrConvention::EsN0,
            other => return Err(value_error(e, format!("expected eb-n0 or es-n0, got `{other}`"))),
        };
    }
    scn.noise_variance = f.parse("noise_variance")?.map(|(v, _)| v);
    if let Some((v, _)) = f.parse("trials")? {
        scn.trials = v;
    }
    if let Some((v, _)) = f.parse("seed")? {
        scn.seed = v;
    }
    if let Some(e) = f.take("feed") {
        scn.feed = match e.value.as_str() {
            "genie" => Feed::Genie,
            "decision-directed" => Feed::DecisionDirected,
            other => {
                return Err(value_error(
                    e,
                    format!("expected genie or decision-directed, got `{other}`"),
                ))
            }
        };
    }
    if let Some((v, _)) = f.parse("steady_fraction")? {
        scn.steady_fraction = v;
    }
    let snr_grid_db = match f.take("snr_grid_db") {
        Some(e) => {
            let v: Vec<f64> = parse_list(e)?;
            increasing(e, &v)?;
            Some(v)
        }
        None => None,
    };
    let bound_ratios = match f.take("bound_ratios") {
        Some(e) => {
            let v: Vec<f64> = parse_list(e)?;
            increasing(e, &v)?;
            if v[0] <= 0.0 {
                return Err(value_error(e, "ratios must be > 0"));
            }
            Some(v)
        }
        None => None,
    };
    let analysis = match f.take("analysis") {
        Some(e) => e
            .value
            .split(',')
            .map(|a| match a.trim() {
                "sm-nlms" => Ok(Algorithm::SmNlms),
                "beacon" => Ok(Algorithm::Beacon),
                other => Err(value_error(
                    e,
                    format!("analysis covers sm-nlms and beacon, not `{other}`"),
                )),
            })
            .collect::<Result<Vec<_>, _>>()?,
        None => Vec::new(),
    };
    f.finish()?;

    // Scenario checks need an estimator; analysis-only configs borrow one.
    let mut probe = scn.clone();
    if probe.estimators.is_empty() {
        probe.estimators.push(EstimatorSpec::Nlms { step_size: 1.0 });
    }
    probe.validate()?;
    Ok(Experiment {
        scenario: scn,
        dopplers,
        snr_grid_db,
        bound_ratios,
        analysis,
    })
}
