//! Sweep evaluation and the CSV row format.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use super::config::{db_to_linear, Output, SweepConfig};
use super::ExperimentError;
use crate::analytic::{no_ris_spectral_efficiency, ClosedForm};
use crate::channel::Quantizer;
use crate::montecarlo::{ks_distance, sample_gains, GainSample};

/// Floor of the relative-error denominator.
pub const REL_ERROR_FLOOR: f64 = 1e-12;
/// Quantile points of the empirical SNR used for CDF distances.
pub const KS_GRID_POINTS: usize = 256;

pub const CSV_HEADER: [&str; 10] = [
    "scenario_id",
    "p_db",
    "n",
    "m_total",
    "q_bits",
    "metric",
    "analytic",
    "mc_value",
    "mc_stderr",
    "rel_error",
];

/// Row kinds; the analytic column holds the closed form and the Monte Carlo
/// columns the matching simulated quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    /// Gamma-model (or exponential-law) outage vs simulated outage.
    Outage,
    /// High-SNR outage asymptote vs simulated outage.
    OutageAsymptotic,
    /// Log-digamma approximation vs simulated spectral efficiency.
    SeAsymptotic,
    /// Quadrature spectral efficiency vs simulated.
    SpectralEfficiency,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Outage => "outage",
            Metric::OutageAsymptotic => "outage_asymptotic",
            Metric::SeAsymptotic => "se_asymptotic",
            Metric::SpectralEfficiency => "spectral_efficiency",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            Metric::Outage,
            Metric::OutageAsymptotic,
            Metric::SeAsymptotic,
            Metric::SpectralEfficiency,
        ]
        .into_iter()
        .find(|m| m.as_str() == s)
        .ok_or_else(|| format!("unknown metric {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scenario_id: String,
    pub p_db: f64,
    pub n: usize,
    pub m_total: usize,
    /// Reference quantizer; `None` without a reference RIS.
    pub q_bits: Option<Quantizer>,
    pub metric: Metric,
    pub analytic: f64,
    pub mc_value: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub rel_error: Option<f64>,
}

pub fn rel_error(analytic: f64, mc_value: f64) -> f64 {
    (analytic - mc_value).abs() / mc_value.abs().max(REL_ERROR_FLOOR)
}

/// Sup distance between the analytic and empirical SNR CDFs at one power.
#[derive(Debug, Clone, PartialEq)]
pub struct KsEntry {
    pub scenario_id: String,
    pub p_db: f64,
    pub distance: f64,
}

/// Deviation of a stated closed form from its exact counterpart.
#[derive(Debug, Clone, PartialEq)]
pub struct Deviation {
    pub p_db: f64,
    pub stated: f64,
    pub exact: f64,
    pub relative: f64,
}

/// Non-gated diagnostics of one sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    /// `ln(pγ̄)ψ(pγ̄)/ln2` vs quadrature; `Err` explains why it is undefined.
    pub log_digamma_se: Result<Vec<Deviation>, String>,
    /// Stated three-term no-reference-RIS spectral efficiency vs the reduced
    /// exponential-law form for the same external aggregate.
    pub no_ris_se: Result<Vec<Deviation>, String>,
}

/// Everything one sweep produces.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
    pub ks: Vec<KsEntry>,
    pub diagnostics: Diagnostics,
}

/// Rows of one sweep, sorted by `(metric, p_db)`.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>, ExperimentError> {
    Ok(evaluate(config)?.rows)
}

/// Runs a sweep and collects rows, CDF distances and diagnostics.
pub fn evaluate(config: &SweepConfig) -> Result<SweepOutcome, ExperimentError> {
    config.validate()?;
    let id = config.id.clone();
    let numeric = |p_db: Option<f64>, what: &'static str| {
        let id = id.clone();
        move |source| ExperimentError::Numeric {
            scenario_id: id,
            p_db,
            what,
            source,
        }
    };
    let model = ClosedForm::from_scenario(&config.scenario, config.pseudo_variance)
        .map_err(numeric(None, "model"))?;
    let sample = if config.monte_carlo_enabled() {
        Some(
            sample_gains(&config.scenario, config.run).map_err(|source| {
                ExperimentError::MonteCarlo {
                    scenario_id: id.clone(),
                    source,
                }
            })?,
        )
    } else {
        None
    };
    let mc = |r: Result<_, _>| {
        r.map_err(|source| ExperimentError::MonteCarlo {
            scenario_id: id.clone(),
            source,
        })
    };

    let gamma_th = config.gamma_th_linear();
    let row = |p_db: f64,
               metric: Metric,
               analytic: f64,
               est: Option<crate::montecarlo::MetricEstimate>| {
        SweepRow {
            scenario_id: id.clone(),
            p_db,
            n: config.scenario.reference_elements(),
            m_total: config.scenario.external_elements(),
            q_bits: config.scenario.reference_quantizer(),
            metric,
            analytic,
            mc_value: est.map(|e| e.value),
            mc_stderr: est.map(|e| e.std_error),
            rel_error: est.map(|e| rel_error(analytic, e.value)),
        }
    };

    let mut rows = Vec::new();
    let mut ks = Vec::new();
    let mut log_digamma = Vec::new();
    let mut log_digamma_undefined = None;
    for p_db in config.p_db_range.points() {
        let p = db_to_linear(p_db);
        let outage_mc = match &sample {
            Some(s) => Some(mc(s.outage(p, gamma_th))?),
            None => None,
        };
        let se_mc = match &sample {
            Some(s) => Some(mc(s.spectral_efficiency(p))?),
            None => None,
        };
        let se = model
            .spectral_efficiency(p)
            .map_err(numeric(Some(p_db), "spectral efficiency"))?;

        if config.wants(Output::AnalyticOutage) || config.wants(Output::McOutage) {
            let a = model
                .cdf(gamma_th, p)
                .map_err(numeric(Some(p_db), "outage"))?;
            rows.push(row(
                p_db,
                Metric::Outage,
                a,
                outage_mc.filter(|_| config.wants(Output::McOutage)),
            ));
        }
        if config.wants(Output::AnalyticSe) || config.wants(Output::McSe) {
            rows.push(row(
                p_db,
                Metric::SpectralEfficiency,
                se,
                se_mc.filter(|_| config.wants(Output::McSe)),
            ));
        }
        if config.wants(Output::OutageAsymptotic) {
            let a = model
                .outage_asymptotic(gamma_th, p)
                .map_err(numeric(Some(p_db), "outage asymptote"))?;
            rows.push(row(p_db, Metric::OutageAsymptotic, a, outage_mc));
        }
        match model
            .spectral_efficiency_asymptotic(p)
            .map_err(numeric(Some(p_db), "log-digamma spectral efficiency"))?
        {
            Some(a) => {
                if config.wants(Output::SeAsymptotic) {
                    rows.push(row(p_db, Metric::SeAsymptotic, a, se_mc));
                }
                log_digamma.push(Deviation {
                    p_db,
                    stated: a,
                    exact: se,
                    relative: (a - se).abs() / se.abs().max(REL_ERROR_FLOOR),
                });
            }
            None => {
                log_digamma_undefined = Some(
                    "undefined: no external RIS and no reference RIS, so no gamma_bar".to_string(),
                )
            }
        }
        if let Some(s) = &sample {
            ks.push(KsEntry {
                scenario_id: id.clone(),
                p_db,
                distance: cdf_distance(&model, s, p).map_err(|e| match e {
                    DistanceError::Analytic(source) => numeric(Some(p_db), "cdf distance")(source),
                    DistanceError::MonteCarlo(source) => ExperimentError::MonteCarlo {
                        scenario_id: id.clone(),
                        source,
                    },
                })?,
            });
        }
    }
    rows.sort_by(|a, b| a.metric.cmp(&b.metric).then(a.p_db.total_cmp(&b.p_db)));

    let diagnostics = Diagnostics {
        log_digamma_se: match log_digamma_undefined {
            Some(reason) => Err(reason),
            None => Ok(log_digamma),
        },
        no_ris_se: no_ris_deviations(config)?,
    };
    Ok(SweepOutcome {
        config: config.clone(),
        rows,
        ks,
        diagnostics,
    })
}

enum DistanceError {
    Analytic(crate::analytic::AnalyticError),
    MonteCarlo(crate::montecarlo::MonteCarloError),
}

/// Sup distance on a grid of empirical SNR quantiles.
fn cdf_distance(model: &ClosedForm, sample: &GainSample, p: f64) -> Result<f64, DistanceError> {
    let mut gains: Vec<f64> = sample.gains().collect();
    gains.sort_unstable_by(f64::total_cmp);
    let n = gains.len();
    let mut grid: Vec<f64> = (0..KS_GRID_POINTS)
        .map(|i| p * gains[((i as f64 + 0.5) / KS_GRID_POINTS as f64 * n as f64) as usize])
        .collect();
    grid.dedup();
    let analytic = model.cdf_curve(&grid, p).map_err(DistanceError::Analytic)?;
    let empirical = sample.cdf(p, &grid).map_err(DistanceError::MonteCarlo)?;
    ks_distance(&analytic, &empirical).map_err(DistanceError::MonteCarlo)
}

fn no_ris_deviations(
    config: &SweepConfig,
) -> Result<Result<Vec<Deviation>, String>, ExperimentError> {
    let s = &config.scenario;
    let m = s.external_elements();
    if m == 0 {
        return Ok(Err("not applicable: no external RIS".into()));
    }
    let total = crate::analytic::aggregate_external_variance(s);
    let v_d = s.direct.map_or(0.0, |d| d.path_gain());
    config
        .p_db_range
        .points()
        .into_iter()
        .map(|p_db| {
            let both =
                no_ris_spectral_efficiency(db_to_linear(p_db), m as f64, total / m as f64, v_d)
                    .map_err(|source| ExperimentError::Numeric {
                        scenario_id: config.id.clone(),
                        p_db: Some(p_db),
                        what: "no-RIS spectral efficiency",
                        source,
                    })?;
            Ok(Deviation {
                p_db,
                stated: both.printed,
                exact: both.reduced,
                relative: both.relative_deviation,
            })
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Ok)
}

/// 17 significant digits; parses back to the identical `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn format_opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| ExperimentError::Csv(e.to_string());
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.scenario_id.clone(),
            format_float(r.p_db),
            r.n.to_string(),
            r.m_total.to_string(),
            r.q_bits.map(|q| q.to_string()).unwrap_or_default(),
            r.metric.to_string(),
            format_float(r.analytic),
            format_opt(r.mc_value),
            format_opt(r.mc_stderr),
            format_opt(r.rel_error),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| ExperimentError::Csv(e.to_string()))
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<SweepRow>, ExperimentError> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader
        .headers()
        .map_err(|e| ExperimentError::Csv(e.to_string()))?
        .clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(ExperimentError::Csv(format!(
            "unexpected header {header:?}"
        )));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| ExperimentError::Csv(e.to_string()))?;
        let line = i + 2;
        let field = |k: usize| record.get(k).unwrap_or_default();
        let bad = |k: usize, e: String| {
            ExperimentError::Csv(format!("line {line}, {}: {e}", CSV_HEADER[k]))
        };
        let float = |k: usize| field(k).parse::<f64>().map_err(|e| bad(k, e.to_string()));
        let opt = |k: usize| {
            if field(k).is_empty() {
                Ok(None)
            } else {
                float(k).map(Some)
            }
        };
        let int = |k: usize| field(k).parse::<usize>().map_err(|e| bad(k, e.to_string()));
        rows.push(SweepRow {
            scenario_id: field(0).to_string(),
            p_db: float(1)?,
            n: int(2)?,
            m_total: int(3)?,
            q_bits: if field(4).is_empty() {
                None
            } else {
                Some(
                    field(4)
                        .parse::<Quantizer>()
                        .map_err(|e| bad(4, e.to_string()))?,
                )
            },
            metric: field(5).parse().map_err(|e| bad(5, e))?,
            analytic: float(6)?,
            mc_value: opt(7)?,
            mc_stderr: opt(8)?,
            rel_error: opt(9)?,
        });
    }
    Ok(rows)
}
