//! JSON sweep configuration.
//!
//! A config file is a JSON object with `"schema": 1`. It may name a
//! `"preset"`, in which case the preset's values are the base and every key
//! given in the file overrides the corresponding preset key (objects merge
//! recursively, everything else is replaced). Unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use super::presets;
use crate::analytic::PseudoVarianceModel;
use crate::channel::Scenario;
use crate::montecarlo::RunSpec;

pub const SCHEMA_VERSION: u32 = 1;
const MAX_POWER_POINTS: usize = 10_000;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{}{key}: {message}", line_prefix(*line))]
    Invalid {
        key: String,
        line: Option<usize>,
        message: String,
    },
}

fn line_prefix(line: Option<usize>) -> String {
    line.map_or_else(String::new, |l| format!("line {l}, key "))
}

/// Transmit-power sweep `start, start+step, …, ≤ stop` in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl PowerRange {
    fn count(&self) -> usize {
        ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1
    }

    /// Grid points in dB; each is `start + i·step`.
    pub fn points(&self) -> Vec<f64> {
        (0..self.count())
            .map(|i| self.start + i as f64 * self.step)
            .collect()
    }
}

/// Quantities a sweep can produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    AnalyticOutage,
    McOutage,
    AnalyticSe,
    McSe,
    SeAsymptotic,
    OutageAsymptotic,
}

impl Output {
    pub const ALL: [Output; 6] = [
        Output::AnalyticOutage,
        Output::McOutage,
        Output::AnalyticSe,
        Output::McSe,
        Output::SeAsymptotic,
        Output::OutageAsymptotic,
    ];
}

fn all_outputs() -> Vec<Output> {
    Output::ALL.to_vec()
}

fn default_id() -> String {
    "custom".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub schema: u32,
    /// Written to the `scenario_id` column.
    #[serde(default = "default_id")]
    pub id: String,
    pub scenario: Scenario,
    pub p_db_range: PowerRange,
    #[serde(default)]
    pub gamma_th_db: f64,
    /// `trials = 0` disables Monte Carlo.
    pub run: RunSpec,
    #[serde(default = "all_outputs")]
    pub outputs: Vec<Output>,
    /// Variance bookkeeping of the Gamma model.
    #[serde(default)]
    pub pseudo_variance: PseudoVarianceModel,
}

impl SweepConfig {
    pub fn wants(&self, output: Output) -> bool {
        self.outputs.contains(&output)
    }

    pub fn gamma_th_linear(&self) -> f64 {
        db_to_linear(self.gamma_th_db)
    }

    pub fn monte_carlo_enabled(&self) -> bool {
        self.run.trials > 0
    }

    /// Checks every invariant; errors carry the offending key path.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |key: &str, message: String| ConfigError::Invalid {
            key: key.into(),
            line: None,
            message,
        };
        if self.schema != SCHEMA_VERSION {
            return Err(invalid(
                "schema",
                format!(
                    "unsupported schema {}, expected {SCHEMA_VERSION}",
                    self.schema
                ),
            ));
        }
        if self.id.is_empty() {
            return Err(invalid("id", "must not be empty".into()));
        }
        self.scenario.validate().map_err(|e| match e {
            crate::channel::ChannelError::Invalid { key, reason } => invalid(&key, reason),
        })?;
        let r = &self.p_db_range;
        for (key, v) in [("start", r.start), ("stop", r.stop), ("step", r.step)] {
            if !v.is_finite() {
                return Err(invalid(
                    &format!("p_db_range.{key}"),
                    format!("must be finite, got {v}"),
                ));
            }
        }
        if !(r.step > 0.0) {
            return Err(invalid(
                "p_db_range.step",
                format!("must be > 0, got {}", r.step),
            ));
        }
        if r.stop < r.start {
            return Err(invalid(
                "p_db_range.stop",
                format!("must be >= start ({}), got {}", r.start, r.stop),
            ));
        }
        if (r.stop - r.start) / r.step >= MAX_POWER_POINTS as f64 {
            return Err(invalid(
                "p_db_range",
                format!("more than {MAX_POWER_POINTS} power points"),
            ));
        }
        if !self.gamma_th_db.is_finite() {
            return Err(invalid(
                "gamma_th_db",
                format!("must be finite, got {}", self.gamma_th_db),
            ));
        }
        if self.monte_carlo_enabled() {
            self.run.validate().map_err(|e| match e {
                crate::montecarlo::MonteCarloError::InvalidRun { key, reason } => {
                    invalid(&format!("run.{key}"), reason)
                }
                other => invalid("run", other.to_string()),
            })?;
        }
        if self.outputs.is_empty() {
            return Err(invalid("outputs", "must list at least one output".into()));
        }
        Ok(())
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Reads and validates a config file.
pub fn parse_config(path: &Path) -> Result<SweepConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config_str(&text)
}

/// Parses and validates config text.
pub fn parse_config_str(text: &str) -> Result<SweepConfig, ConfigError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let with_line = |key: String, message: String| ConfigError::Invalid {
        line: locate_key(text, &key),
        key,
        message,
    };
    let Value::Object(mut object) = value else {
        return Err(with_line(
            String::new(),
            "top level must be a JSON object".into(),
        ));
    };
    match object.get("schema") {
        Some(Value::Number(n)) if n.as_u64() == Some(SCHEMA_VERSION as u64) => {}
        Some(other) => {
            return Err(with_line(
                "schema".into(),
                format!("unsupported schema {other}, expected {SCHEMA_VERSION}"),
            ))
        }
        None => return Err(with_line("schema".into(), "missing; expected 1".into())),
    }

    let merged = match object.remove("preset") {
        None => Value::Object(object),
        Some(Value::String(name)) => {
            let base = presets::preset(&name).ok_or_else(|| {
                with_line(
                    "preset".into(),
                    format!(
                        "unknown preset {name:?}; known: {}",
                        presets::preset_names().join(", ")
                    ),
                )
            })?;
            let mut base = serde_json::to_value(base).expect("presets serialize");
            merge(&mut base, Value::Object(object));
            base
        }
        Some(other) => {
            return Err(with_line(
                "preset".into(),
                format!("must be a string, got {other}"),
            ));
        }
    };

    let config: SweepConfig = serde_path_to_error::deserialize(merged).map_err(|e| {
        let key = e.path().to_string();
        with_line(
            if key == "." { String::new() } else { key },
            e.into_inner().to_string(),
        )
    })?;
    config.validate().map_err(|e| match e {
        ConfigError::Invalid { key, message, .. } => with_line(key, message),
        other => other,
    })?;
    Ok(config)
}

/// Recursively overlays `overlay` onto `base`.
fn merge(base: &mut Value, overlay: Value) {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Best-effort 1-based line of a dotted key path such as
/// `scenario.external_ris[0].inbound.distance_m` in the source text.
fn locate_key(text: &str, path: &str) -> Option<usize> {
    let names: Vec<&str> = path
        .split('.')
        .map(|seg| seg.split('[').next().unwrap_or(seg))
        .filter(|s| !s.is_empty())
        .collect();
    if names.is_empty() {
        return None;
    }
    let mut from = 0;
    let mut found = None;
    for name in names {
        let needle = format!("\"{name}\"");
        let mut search = from;
        let hit = loop {
            let pos = text[search..].find(&needle)? + search;
            let after = text[pos + needle.len()..].trim_start();
            if after.starts_with(':') {
                break pos;
            }
            search = pos + needle.len();
        };
        found = Some(hit);
        from = hit + needle.len();
    }
    found.map(|pos| text[..pos].matches('\n').count() + 1)
}
