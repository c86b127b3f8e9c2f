//! Cross-validation report between closed forms and Monte Carlo.

use std::collections::BTreeMap;
use std::fmt;

use super::sweep::{Deviation, Metric, SweepOutcome};

/// Gate on the sup CDF distance between closed form and simulation.
pub const KS_KEY: &str = "ks";

/// Tolerances keyed by metric name (`outage`, `spectral_efficiency`, …) or
/// [`KS_KEY`]. Metrics without an entry are reported but not gated.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Tolerances(pub BTreeMap<String, f64>);

impl Tolerances {
    pub fn with(mut self, key: &str, tolerance: Option<f64>) -> Self {
        if let Some(t) = tolerance {
            self.0.insert(key.to_string(), t);
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Worst {
    pub scenario_id: String,
    pub p_db: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub key: String,
    /// `None` when no row carried a Monte Carlo value.
    pub worst: Option<Worst>,
    pub tolerance: Option<f64>,
    pub passed: bool,
}

/// Relative spectral-efficiency loss caused by external RISs for one
/// reference size: `(C(M=0) − C(M))/C(M=0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceGap {
    pub n: usize,
    pub m_total: usize,
    pub p_db: f64,
    pub relative_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioDiagnostics {
    pub scenario_id: String,
    pub log_digamma_se: Result<Vec<Deviation>, String>,
    pub no_ris_se: Result<Vec<Deviation>, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub scenarios: Vec<String>,
    pub summaries: Vec<Summary>,
    pub diagnostics: Vec<ScenarioDiagnostics>,
    pub gaps: Vec<InterferenceGap>,
    pub passed: bool,
}

impl ValidationReport {
    pub fn failing(&self) -> Vec<&str> {
        self.summaries
            .iter()
            .filter(|s| !s.passed)
            .map(|s| s.key.as_str())
            .collect()
    }
}

fn worst_of(items: impl Iterator<Item = Worst>) -> Option<Worst> {
    items.fold(None, |acc: Option<Worst>, w| match acc {
        Some(a) if a.value >= w.value || w.value.is_nan() => Some(a),
        _ => Some(w),
    })
}

fn summarize(key: &str, worst: Option<Worst>, tolerance: Option<f64>) -> Summary {
    let passed = match (tolerance, &worst) {
        (Some(t), Some(w)) => w.value <= t,
        _ => true,
    };
    Summary {
        key: key.to_string(),
        worst,
        tolerance,
        passed,
    }
}

/// Per-metric worst relative error and CDF distance, with gating.
pub fn validation_report(outcomes: &[SweepOutcome], tolerances: &Tolerances) -> ValidationReport {
    let metrics = [
        Metric::Outage,
        Metric::SpectralEfficiency,
        Metric::OutageAsymptotic,
        Metric::SeAsymptotic,
    ];
    let mut summaries: Vec<Summary> = metrics
        .iter()
        .map(|&m| {
            let worst = worst_of(
                outcomes
                    .iter()
                    .flat_map(|o| &o.rows)
                    .filter(|r| r.metric == m)
                    .filter_map(|r| {
                        r.rel_error.map(|value| Worst {
                            scenario_id: r.scenario_id.clone(),
                            p_db: r.p_db,
                            value,
                        })
                    }),
            );
            summarize(m.as_str(), worst, tolerances.0.get(m.as_str()).copied())
        })
        .collect();
    let ks = worst_of(outcomes.iter().flat_map(|o| &o.ks).map(|k| Worst {
        scenario_id: k.scenario_id.clone(),
        p_db: k.p_db,
        value: k.distance,
    }));
    summaries.push(summarize(KS_KEY, ks, tolerances.0.get(KS_KEY).copied()));

    let diagnostics = outcomes
        .iter()
        .map(|o| ScenarioDiagnostics {
            scenario_id: o.config.id.clone(),
            log_digamma_se: o.diagnostics.log_digamma_se.clone(),
            no_ris_se: o.diagnostics.no_ris_se.clone(),
        })
        .collect();
    let passed = summaries.iter().all(|s| s.passed);
    ValidationReport {
        scenarios: outcomes.iter().map(|o| o.config.id.clone()).collect(),
        summaries,
        diagnostics,
        gaps: interference_gaps(outcomes),
        passed,
    }
}

/// Pairs each sweep having external RISs with an interference-free sweep of
/// the same reference size and compares analytic spectral efficiency.
fn interference_gaps(outcomes: &[SweepOutcome]) -> Vec<InterferenceGap> {
    let se = |o: &SweepOutcome| -> Vec<(f64, f64)> {
        o.rows
            .iter()
            .filter(|r| r.metric == Metric::SpectralEfficiency)
            .map(|r| (r.p_db, r.analytic))
            .collect()
    };
    let mut gaps = Vec::new();
    for base in outcomes
        .iter()
        .filter(|o| o.config.scenario.external_elements() == 0)
    {
        let n = base.config.scenario.reference_elements();
        let clean = se(base);
        for other in outcomes.iter().filter(|o| {
            o.config.scenario.reference_elements() == n && o.config.scenario.external_elements() > 0
        }) {
            for (p_db, value) in se(other) {
                if let Some(&(_, c0)) = clean.iter().find(|(p, _)| p.to_bits() == p_db.to_bits()) {
                    gaps.push(InterferenceGap {
                        n,
                        m_total: other.config.scenario.external_elements(),
                        p_db,
                        relative_gap: (c0 - value) / c0,
                    });
                }
            }
        }
    }
    gaps
}

fn write_deviations(
    f: &mut fmt::Formatter<'_>,
    label: &str,
    id: &str,
    d: &Result<Vec<Deviation>, String>,
) -> fmt::Result {
    match d {
        Err(reason) => writeln!(f, "  {label} [{id}]: {reason}"),
        Ok(list) => {
            for x in list {
                writeln!(
                    f,
                    "  {label} [{id}] p={} dB: stated {:.6e}, exact {:.6e}, relative deviation {:.3e}",
                    x.p_db, x.stated, x.exact, x.relative
                )?;
            }
            Ok(())
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "validation report")?;
        writeln!(f, "scenarios: {}", self.scenarios.join(", "))?;
        writeln!(f, "metrics (max relative error vs Monte Carlo):")?;
        for s in &self.summaries {
            let value = match &s.worst {
                Some(w) => format!("{:.4e} at {} p={} dB", w.value, w.scenario_id, w.p_db),
                None => "no Monte Carlo data".to_string(),
            };
            let gate = match s.tolerance {
                Some(t) => format!(
                    "tolerance {t:e}: {}",
                    if s.passed { "PASS" } else { "FAIL" }
                ),
                None => "not gated".to_string(),
            };
            writeln!(f, "  {}: {value}; {gate}", s.key)?;
        }
        writeln!(f, "diagnostics (not gated):")?;
        for d in &self.diagnostics {
            write_deviations(
                f,
                "log-digamma SE approximation vs quadrature",
                &d.scenario_id,
                &d.log_digamma_se,
            )?;
            write_deviations(
                f,
                "stated no-RIS SE vs reduced exponential form",
                &d.scenario_id,
                &d.no_ris_se,
            )?;
        }
        if !self.gaps.is_empty() {
            writeln!(f, "interference gap (relative analytic SE loss vs M=0):")?;
            for g in &self.gaps {
                writeln!(
                    f,
                    "  N={} M={} p={} dB: {:.6e}",
                    g.n, g.m_total, g.p_db, g.relative_gap
                )?;
            }
        }
        if self.passed {
            writeln!(f, "status: PASS")
        } else {
            writeln!(f, "status: FAIL ({})", self.failing().join(", "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::presets::preset;
    use crate::experiments::sweep::evaluate;

    fn outcome(name: &str, trials: u64) -> SweepOutcome {
        let mut c = preset(name).unwrap();
        c.run.trials = trials;
        c.run.chunks = 2;
        c.p_db_range.step = 15.0;
        evaluate(&c).unwrap()
    }

    #[test]
    fn empty_tolerances_gate_nothing() {
        let o = outcome("fig2-case2-N16", 3000);
        let r = validation_report(&[o], &Tolerances::default());
        assert!(r.passed);
        assert_eq!(r.summaries.len(), 5);
        let text = r.to_string();
        assert!(text.contains("log-digamma SE approximation"));
        assert!(text.contains("stated no-RIS SE"));
        assert!(text.contains("status: PASS"));
    }

    #[test]
    fn exceeded_tolerance_names_metric() {
        let o = outcome("fig2-case2-N16", 3000);
        let r = validation_report(
            &[o],
            &Tolerances::default().with("spectral_efficiency", Some(0.0)),
        );
        assert!(!r.passed);
        assert_eq!(r.failing(), vec!["spectral_efficiency"]);
        assert!(r.to_string().contains("status: FAIL (spectral_efficiency)"));
    }

    #[test]
    fn gaps_pair_same_reference_size() {
        let outs: Vec<_> = ["fig3-N100-M0", "fig3-N100-M10000"]
            .iter()
            .map(|n| outcome(n, 0))
            .collect();
        let r = validation_report(&outs, &Tolerances::default());
        assert_eq!(r.gaps.len(), 3);
        assert!(r.gaps.iter().all(|g| g.n == 100 && g.relative_gap > 0.0));
        // without Monte Carlo nothing is gated even with tolerances
        let gated = validation_report(&outs, &Tolerances::default().with("outage", Some(0.0)));
        assert!(gated.passed);
    }
}
