//! Built-in baseline scenarios.
//!
//! Every preset uses 3-bit phase quantization, Rician factors 10 (inbound)
//! and 6 (outbound), a Rayleigh direct link at 100 m with exponent 3.1 and
//! RIS hops at 30 m with exponents 2.2 (inbound) and 2.4 (outbound). External
//! RISs share the reference geometry.

use super::config::{Output, PowerRange, SweepConfig, SCHEMA_VERSION};
use crate::analytic::PseudoVarianceModel;
use crate::channel::{LinkGeometry, Quantizer, RicianLink, RisUnit, Scenario};
use crate::montecarlo::{RunSpec, DEFAULT_CHUNKS};

pub const BASELINE_QUANTIZER_BITS: u32 = 3;
pub const BASELINE_K_INBOUND: f64 = 10.0;
pub const BASELINE_K_OUTBOUND: f64 = 6.0;
pub const DIRECT_DISTANCE_M: f64 = 100.0;
pub const DIRECT_EXPONENT: f64 = 3.1;
pub const RIS_DISTANCE_M: f64 = 30.0;
pub const INBOUND_EXPONENT: f64 = 2.2;
pub const OUTBOUND_EXPONENT: f64 = 2.4;

/// External array sizes along the two-case figure; the source only says
/// "scaled range", so these are a declared choice.
pub const FIG2_SIZES: [usize; 4] = [16, 64, 256, 1024];
pub const FIG3_REFERENCE_SIZES: [usize; 2] = [100, 400];
pub const FIG3_EXTERNAL_SIZES: [usize; 2] = [0, 10_000];

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_TRIALS: u64 = 100_000;

/// Figures that can be regenerated.
pub const FIGURES: [&str; 3] = ["fig2-case1", "fig2-case2", "fig3"];

fn inbound() -> RicianLink {
    RicianLink {
        geometry: LinkGeometry {
            distance_m: RIS_DISTANCE_M,
            pathloss_exponent: INBOUND_EXPONENT,
        },
        k_factor: BASELINE_K_INBOUND,
    }
}

fn outbound() -> RicianLink {
    RicianLink {
        geometry: LinkGeometry {
            distance_m: RIS_DISTANCE_M,
            pathloss_exponent: OUTBOUND_EXPONENT,
        },
        k_factor: BASELINE_K_OUTBOUND,
    }
}

/// Direct link plus an optional reference RIS with `n` elements and one
/// external RIS per entry of `external`.
pub fn baseline_scenario(n: usize, external: &[usize]) -> Scenario {
    Scenario {
        direct: Some(LinkGeometry {
            distance_m: DIRECT_DISTANCE_M,
            pathloss_exponent: DIRECT_EXPONENT,
        }),
        reference_ris: (n > 0).then(|| {
            RisUnit::controlled(
                n,
                Quantizer::Bits(BASELINE_QUANTIZER_BITS),
                inbound(),
                outbound(),
            )
        }),
        external_ris: external
            .iter()
            .filter(|&&m| m > 0)
            .map(|&m| RisUnit::external(m, inbound(), outbound()))
            .collect(),
    }
}

fn sweep(id: String, scenario: Scenario) -> SweepConfig {
    SweepConfig {
        schema: SCHEMA_VERSION,
        id,
        scenario,
        p_db_range: PowerRange {
            start: 0.0,
            stop: 30.0,
            step: 5.0,
        },
        gamma_th_db: 0.0,
        run: RunSpec {
            seed: DEFAULT_SEED,
            trials: DEFAULT_TRIALS,
            chunks: DEFAULT_CHUNKS,
        },
        outputs: Output::ALL.to_vec(),
        pseudo_variance: PseudoVarianceModel::AsPrinted,
    }
}

fn fig2_case1() -> Vec<SweepConfig> {
    FIG2_SIZES
        .iter()
        .map(|&m| sweep(format!("fig2-case1-M{m}"), baseline_scenario(0, &[m])))
        .collect()
}

fn fig2_case2() -> Vec<SweepConfig> {
    FIG2_SIZES
        .iter()
        .map(|&m| sweep(format!("fig2-case2-N{m}"), baseline_scenario(m, &[m])))
        .collect()
}

fn fig3() -> Vec<SweepConfig> {
    let mut out = Vec::new();
    for &n in &FIG3_REFERENCE_SIZES {
        for &m in &FIG3_EXTERNAL_SIZES {
            out.push(sweep(format!("fig3-N{n}-M{m}"), baseline_scenario(n, &[m])));
        }
    }
    out
}

/// All sweeps of a figure, in output order.
pub fn figure_preset(name: &str) -> Option<Vec<SweepConfig>> {
    match name {
        "fig2-case1" => Some(fig2_case1()),
        "fig2-case2" => Some(fig2_case2()),
        "fig3" => Some(fig3()),
        _ => None,
    }
}

/// A single named sweep. Besides every figure member, `fig3-N100` and
/// `fig3-N400` name the interference-heavy `M = 10^4` cases.
pub fn preset(name: &str) -> Option<SweepConfig> {
    let alias = match name {
        "fig3-N100" => "fig3-N100-M10000",
        "fig3-N400" => "fig3-N400-M10000",
        other => other,
    };
    FIGURES
        .iter()
        .flat_map(|f| figure_preset(f).unwrap_or_default())
        .find(|c| c.id == alias)
        .map(|mut c| {
            c.id = name.to_string();
            c
        })
}

pub fn preset_names() -> Vec<String> {
    let mut names: Vec<String> = FIGURES
        .iter()
        .flat_map(|f| figure_preset(f).unwrap_or_default())
        .map(|c| c.id)
        .collect();
    names.extend(["fig3-N100".to_string(), "fig3-N400".to_string()]);
    names
}
