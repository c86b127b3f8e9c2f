//! Closed-form statistics of the received SNR.
//!
//! The reference link `Ξ = Z + X + Y` is approximated by a Gamma law for
//! `|Ξ|²` whose shape and scale follow from [`derive_moments`]. Scenarios
//! without a reference RIS use the exact exponential law of
//! [`no_ris_cdf`] instead. [`ClosedForm`] picks the right one.

pub mod quadrature;

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{Quantizer, RicianLink, Scenario};
use crate::specfun::{self, SpecialError};

pub use quadrature::{gamma_mean_log1p, QuadratureError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error(transparent)]
    Special(#[from] SpecialError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("{quantity}: {reason}")]
    Domain {
        quantity: &'static str,
        reason: String,
    },
    #[error("degenerate scenario: {0}")]
    Degenerate(String),
}

fn domain(quantity: &'static str, reason: impl Into<String>) -> AnalyticError {
    AnalyticError::Domain {
        quantity,
        reason: reason.into(),
    }
}

/// Source of the per-hop amplitude mean `A = E[|h|]` for unit-power fading.
///
/// Any fading law with finite first two moments can implement this to reuse
/// the moment formulas; only Rician (Rayleigh at `k = 0`) ships.
pub trait AmplitudeMean {
    fn amplitude_mean(&self) -> Result<f64, SpecialError>;
}

impl AmplitudeMean for RicianLink {
    fn amplitude_mean(&self) -> Result<f64, SpecialError> {
        specfun::rician_mean_factor(self.k_factor)
    }
}

/// How the external aggregate enters the real-part variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PseudoVarianceModel {
    /// External term counted in both variance and pseudo-variance, so all of
    /// it lands in the real part: `σ² = ½(N𝒫 + N𝒱 + 2ΣM𝒱_Y)`.
    #[default]
    AsPrinted,
    /// External term circular, split evenly: `σ² = ½(N𝒫 + N𝒱 + ΣM𝒱_Y)`.
    Circular,
}

/// Statistical parameters of the Gamma approximation.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    /// Per-element mean of the reference cascade.
    pub mu_x: f64,
    pub v_x: f64,
    /// Per-element pseudo-variance of the reference cascade.
    pub p_x: f64,
    /// Direct-link variance, 0 without a direct link.
    pub v_d: f64,
    /// Per-element variance of each external RIS.
    pub v_y: Vec<f64>,
    pub n: usize,
    pub m_list: Vec<usize>,
    pub sigma2: f64,
    pub gamma_bar: f64,
    /// Gamma shape.
    pub m_n: f64,
    pub model: PseudoVarianceModel,
}

impl Moments {
    /// `Σ M_u 𝒱_{Y,u}`.
    pub fn external_variance(&self) -> f64 {
        merged_external_variance(self.m_list.iter().copied().zip(self.v_y.iter().copied()))
    }

    pub fn external_elements(&self) -> usize {
        self.m_list.iter().sum()
    }

    /// The nominal diversity order `N²/M`; infinite without external RISs.
    pub fn nominal_diversity_order(&self) -> f64 {
        let m = self.external_elements();
        if m == 0 {
            f64::INFINITY
        } else {
            (self.n as f64).powi(2) / m as f64
        }
    }
}

/// Empirical or analytic CDF on a fixed SNR grid (linear units).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfCurve {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl CdfCurve {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self, AnalyticError> {
        if grid.len() != values.len() {
            return Err(domain(
                "cdf",
                format!("{} grid points but {} values", grid.len(), values.len()),
            ));
        }
        validate_grid(&grid)?;
        if let Some(i) = values.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(domain(
                "cdf",
                format!("value {} at index {i} outside [0,1]", values[i]),
            ));
        }
        if let Some(i) = values.windows(2).position(|w| w[1] < w[0]) {
            return Err(domain("cdf", format!("values decrease at index {}", i + 1)));
        }
        Ok(CdfCurve { grid, values })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Checks that a grid is finite, nonnegative and sorted ascending.
pub fn validate_grid(grid: &[f64]) -> Result<(), AnalyticError> {
    if let Some(i) = grid.iter().position(|x| !(*x >= 0.0) || !x.is_finite()) {
        return Err(domain(
            "grid",
            format!("point {} at index {i} must be finite and >= 0", grid[i]),
        ));
    }
    if let Some(i) = grid.windows(2).position(|w| w[1] < w[0]) {
        return Err(domain("grid", format!("not sorted at index {}", i + 1)));
    }
    Ok(())
}

/// `(ϑ₁, ϑ₂)` of the uniform residual phase error of a `q`-bit codebook.
pub fn quantizer_moments(q: Quantizer) -> (f64, f64) {
    match q {
        Quantizer::Perfect => (1.0, 1.0),
        Quantizer::Bits(bits) => {
            let half_width = PI * 2f64.powi(-(bits as i32));
            (specfun::sinc(half_width), specfun::sinc(2.0 * half_width))
        }
    }
}

/// Sums `M_u 𝒱_u`, first merging surfaces with bit-identical `𝒱_u` so the
/// result depends only on each variance's total element budget.
fn merged_external_variance(terms: impl Iterator<Item = (usize, f64)>) -> f64 {
    let mut groups: Vec<(f64, usize)> = Vec::new();
    for (m, v) in terms {
        match groups
            .iter_mut()
            .find(|(gv, _)| gv.to_bits() == v.to_bits())
        {
            Some(group) => group.1 += m,
            None => groups.push((v, m)),
        }
    }
    groups.iter().map(|&(v, m)| m as f64 * v).sum()
}

/// `Σ_u M_u 𝒱_{Y,u}` over the external RISs.
pub fn aggregate_external_variance(scenario: &Scenario) -> f64 {
    merged_external_variance(
        scenario
            .external_ris
            .iter()
            .map(|r| (r.num_elements, r.cascaded_gain())),
    )
}

pub fn derive_moments(scenario: &Scenario) -> Result<Moments, AnalyticError> {
    derive_moments_with(scenario, PseudoVarianceModel::AsPrinted)
}

pub fn derive_moments_with(
    scenario: &Scenario,
    model: PseudoVarianceModel,
) -> Result<Moments, AnalyticError> {
    scenario
        .validate()
        .map_err(|e| AnalyticError::Degenerate(e.to_string()))?;

    let (n, mu_x, v_x, p_x) = match &scenario.reference_ris {
        Some(ris) => {
            let (t1, t2) = quantizer_moments(ris.quantizer);
            let g = ris.cascaded_gain();
            let a = ris.inbound.amplitude_mean()? * ris.outbound.amplitude_mean()?;
            let mean_sq = t1 * t1 * a * a;
            (
                ris.num_elements,
                g.sqrt() * t1 * a,
                g * (1.0 - mean_sq),
                g * (t2 - mean_sq),
            )
        }
        None => (0, 0.0, 0.0, 0.0),
    };
    let v_d = scenario.direct.map_or(0.0, |d| d.path_gain());
    let v_y: Vec<f64> = scenario
        .external_ris
        .iter()
        .map(|r| r.cascaded_gain())
        .collect();
    let m_list: Vec<usize> = scenario
        .external_ris
        .iter()
        .map(|r| r.num_elements)
        .collect();
    let external = aggregate_external_variance(scenario);

    let nf = n as f64;
    let external_weight = match model {
        PseudoVarianceModel::AsPrinted => 2.0,
        PseudoVarianceModel::Circular => 1.0,
    };
    let sigma2 = 0.5 * (nf * p_x + nf * v_x + external_weight * external);
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(AnalyticError::Degenerate(format!(
            "real-part variance is {sigma2:e}; the Gamma model needs a fading reference \
             or external RIS"
        )));
    }
    let gamma_bar = 4.0 * sigma2;
    let m_n = (nf * nf * mu_x * mu_x + v_d + (PI * v_d).sqrt() * nf * mu_x) / gamma_bar;
    if !(m_n > 0.0) || !m_n.is_finite() {
        return Err(AnalyticError::Degenerate(format!(
            "Gamma shape is {m_n:e}; without a reference RIS or direct link the \
             exponential law applies instead"
        )));
    }
    Ok(Moments {
        mu_x,
        v_x,
        p_x,
        v_d,
        v_y,
        n,
        m_list,
        sigma2,
        gamma_bar,
        m_n,
        model,
    })
}

fn check_power(p_linear: f64) -> Result<(), AnalyticError> {
    if !(p_linear > 0.0) || !p_linear.is_finite() {
        return Err(domain(
            "p_linear",
            format!("must be positive and finite, got {p_linear}"),
        ));
    }
    Ok(())
}

fn check_threshold(x: f64) -> Result<(), AnalyticError> {
    if !(x >= 0.0) || x.is_nan() {
        return Err(domain("x", format!("must be >= 0, got {x}")));
    }
    Ok(())
}

/// Gamma-approximated CDF of the received SNR.
pub fn snr_cdf(x: f64, p_linear: f64, m: &Moments) -> Result<f64, AnalyticError> {
    check_threshold(x)?;
    check_power(p_linear)?;
    if x.is_infinite() {
        return Ok(1.0);
    }
    Ok(specfun::lower_gamma_regularized(
        m.m_n,
        x / (p_linear * m.gamma_bar),
    )?)
}

pub fn outage_probability(gamma_th: f64, p_linear: f64, m: &Moments) -> Result<f64, AnalyticError> {
    snr_cdf(gamma_th, p_linear, m)
}

/// High-SNR outage `(γ_th/(pγ̄))^{m_N}/Γ(m_N+1)`, evaluated in log domain.
pub fn outage_asymptotic(gamma_th: f64, p_linear: f64, m: &Moments) -> Result<f64, AnalyticError> {
    check_power(p_linear)?;
    if !(gamma_th > 0.0) || !gamma_th.is_finite() {
        return Err(domain(
            "gamma_th",
            format!("must be positive and finite, got {gamma_th}"),
        ));
    }
    let z = gamma_th / (p_linear * m.gamma_bar);
    Ok((m.m_n * z.ln() - specfun::ln_gamma(m.m_n + 1.0)?).exp())
}

/// Ergodic spectral efficiency in bit/s/Hz under the Gamma approximation.
pub fn spectral_efficiency(p_linear: f64, m: &Moments) -> Result<f64, AnalyticError> {
    check_power(p_linear)?;
    Ok(gamma_mean_log1p(m.m_n, p_linear * m.gamma_bar)? / LN_2)
}

/// Large-array approximation `ln(pγ̄)·ψ(pγ̄)/ln 2`, implemented as stated.
pub fn spectral_efficiency_asymptotic(p_linear: f64, m: &Moments) -> Result<f64, AnalyticError> {
    check_power(p_linear)?;
    log_digamma_form(p_linear * m.gamma_bar)
}

fn log_digamma_form(s: f64) -> Result<f64, AnalyticError> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(domain(
            "p*gamma_bar",
            format!("must be positive and finite, got {s}"),
        ));
    }
    Ok(s.ln() * specfun::digamma(s)? / LN_2)
}

fn check_no_ris_variances(m_total_vy: f64, v_d: f64) -> Result<(), AnalyticError> {
    for (name, v) in [("m_total_vy", m_total_vy), ("v_d", v_d)] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(domain(name, format!("must be finite and >= 0, got {v}")));
        }
    }
    if m_total_vy == 0.0 && v_d == 0.0 {
        return Err(domain(
            "m_total_vy, v_d",
            "at least one variance must be positive",
        ));
    }
    Ok(())
}

/// CDF of the SNR without a reference RIS, evaluated term by term as
/// `1 − e^{−a} − e^{−b}(1 − e^{−c})` with `a = x/(pS)`, `b = x/(p(𝒱_d+S))`,
/// `c = x𝒱_d/(pS(𝒱_d+S))` and `S = Σ M 𝒱_Y`.
pub fn no_ris_cdf(x: f64, p_linear: f64, m_total_vy: f64, v_d: f64) -> Result<f64, AnalyticError> {
    check_threshold(x)?;
    check_power(p_linear)?;
    check_no_ris_variances(m_total_vy, v_d)?;
    if m_total_vy == 0.0 {
        return Ok(-(-x / (p_linear * v_d)).exp_m1());
    }
    if v_d == 0.0 {
        return Ok(-(-x / (p_linear * m_total_vy)).exp_m1());
    }
    let s = m_total_vy;
    let inv_sum = 1.0 / s + 1.0 / v_d;
    let a = x / (p_linear * s);
    let b = x / (p_linear * s * v_d * inv_sum);
    let c = x / (p_linear * s * s * inv_sum);
    let value = 1.0 - (-a).exp() - (-b).exp() * (-(-c).exp_m1());
    Ok(value.clamp(0.0, 1.0))
}

/// Spectral efficiency without a reference RIS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoRisSpectralEfficiency {
    /// The three-term exponential-integral expression as stated; may be
    /// non-finite when its exponents overflow.
    pub printed: f64,
    /// `e^c E₁(c)/ln 2` with `c = 1/(p(𝒱_d + M𝒱_Y))`, exact for the
    /// exponential law of [`no_ris_cdf`].
    pub reduced: f64,
    /// `|printed − reduced|/reduced`.
    pub relative_deviation: f64,
}

/// `e^c E₁(c)/ln 2` with `c = 1/(p(𝒱_d + S))`.
pub fn no_ris_spectral_efficiency_reduced(
    p_linear: f64,
    m_total_vy: f64,
    v_d: f64,
) -> Result<f64, AnalyticError> {
    check_power(p_linear)?;
    check_no_ris_variances(m_total_vy, v_d)?;
    let c = 1.0 / (p_linear * (v_d + m_total_vy));
    Ok(specfun::exp_scaled_e1(c)? / LN_2)
}

/// Both forms of the no-reference-RIS spectral efficiency. The stated form
/// needs the element count `m_elements` and per-element variance `v_y`
/// separately; for several external RISs pass `ΣM_u` and `ΣM_u𝒱_u/ΣM_u`.
pub fn no_ris_spectral_efficiency(
    p_linear: f64,
    m_elements: f64,
    v_y: f64,
    v_d: f64,
) -> Result<NoRisSpectralEfficiency, AnalyticError> {
    check_power(p_linear)?;
    if !(m_elements > 0.0) || !(v_y > 0.0) || !m_elements.is_finite() || !v_y.is_finite() {
        return Err(domain(
            "m_elements, v_y",
            format!("must be positive and finite, got {m_elements}, {v_y}"),
        ));
    }
    let s = m_elements * v_y;
    let reduced = no_ris_spectral_efficiency_reduced(p_linear, s, v_d)?;

    let p = p_linear;
    let c1 = 1.0 / (p * s + p * v_d * v_y * v_y);
    let c2 = v_d / (p * s * s + p * v_d * v_y.powi(3));
    let c3 = (v_d + s) / (p * m_elements * v_y * v_y * (m_elements + v_d * v_y));
    let c4 = 1.0 / (p * s);
    // e^{c1}Γ(0,c1) − e^{c1+c2}Γ(0,c3) + e^{c4}Γ(0,c4), with Γ(0,z) = e^{−z}·[e^z E₁(z)]
    let printed = (specfun::exp_scaled_e1(c1)?
        - (c1 + c2 - c3).exp() * specfun::exp_scaled_e1(c3)?
        + specfun::exp_scaled_e1(c4)?)
        / LN_2;
    Ok(NoRisSpectralEfficiency {
        printed,
        reduced,
        relative_deviation: (printed - reduced).abs() / reduced,
    })
}

/// Analytic model for a scenario: the Gamma approximation when a reference
/// RIS is present, otherwise the exact exponential law.
#[derive(Debug, Clone, PartialEq)]
pub enum ClosedForm {
    GammaMatched(Moments),
    WithoutReferenceRis {
        /// `Σ M_u`.
        elements: usize,
        /// `Σ M_u 𝒱_{Y,u}`.
        external_variance: f64,
        v_d: f64,
        /// `4σ²` of the stated variance bookkeeping; `None` without external RISs.
        gamma_bar: Option<f64>,
    },
}

impl ClosedForm {
    pub fn from_scenario(
        scenario: &Scenario,
        model: PseudoVarianceModel,
    ) -> Result<Self, AnalyticError> {
        if scenario.reference_elements() > 0 {
            return Ok(ClosedForm::GammaMatched(derive_moments_with(
                scenario, model,
            )?));
        }
        scenario
            .validate()
            .map_err(|e| AnalyticError::Degenerate(e.to_string()))?;
        let external_variance = aggregate_external_variance(scenario);
        let v_d = scenario.direct.map_or(0.0, |d| d.path_gain());
        check_no_ris_variances(external_variance, v_d)?;
        let weight = match model {
            PseudoVarianceModel::AsPrinted => 4.0,
            PseudoVarianceModel::Circular => 2.0,
        };
        Ok(ClosedForm::WithoutReferenceRis {
            elements: scenario.external_elements(),
            external_variance,
            v_d,
            gamma_bar: (external_variance > 0.0).then_some(weight * external_variance),
        })
    }

    pub fn moments(&self) -> Option<&Moments> {
        match self {
            ClosedForm::GammaMatched(m) => Some(m),
            ClosedForm::WithoutReferenceRis { .. } => None,
        }
    }

    pub fn cdf(&self, x: f64, p_linear: f64) -> Result<f64, AnalyticError> {
        match self {
            ClosedForm::GammaMatched(m) => snr_cdf(x, p_linear, m),
            ClosedForm::WithoutReferenceRis {
                external_variance,
                v_d,
                ..
            } => no_ris_cdf(x, p_linear, *external_variance, *v_d),
        }
    }

    /// High-SNR outage; for the exponential law this is `γ_th/(p(𝒱_d+S))`.
    pub fn outage_asymptotic(&self, gamma_th: f64, p_linear: f64) -> Result<f64, AnalyticError> {
        match self {
            ClosedForm::GammaMatched(m) => outage_asymptotic(gamma_th, p_linear, m),
            ClosedForm::WithoutReferenceRis {
                external_variance,
                v_d,
                ..
            } => {
                check_power(p_linear)?;
                if !(gamma_th > 0.0) || !gamma_th.is_finite() {
                    return Err(domain(
                        "gamma_th",
                        format!("must be positive, got {gamma_th}"),
                    ));
                }
                Ok(gamma_th / (p_linear * (v_d + external_variance)))
            }
        }
    }

    pub fn spectral_efficiency(&self, p_linear: f64) -> Result<f64, AnalyticError> {
        match self {
            ClosedForm::GammaMatched(m) => spectral_efficiency(p_linear, m),
            ClosedForm::WithoutReferenceRis {
                external_variance,
                v_d,
                ..
            } => no_ris_spectral_efficiency_reduced(p_linear, *external_variance, *v_d),
        }
    }

    /// `ln(pγ̄)ψ(pγ̄)/ln 2`; `None` when no `γ̄` is defined.
    pub fn spectral_efficiency_asymptotic(
        &self,
        p_linear: f64,
    ) -> Result<Option<f64>, AnalyticError> {
        check_power(p_linear)?;
        let gamma_bar = match self {
            ClosedForm::GammaMatched(m) => Some(m.gamma_bar),
            ClosedForm::WithoutReferenceRis { gamma_bar, .. } => *gamma_bar,
        };
        gamma_bar
            .map(|g| log_digamma_form(p_linear * g))
            .transpose()
    }

    /// Analytic CDF over a sorted grid.
    pub fn cdf_curve(&self, grid: &[f64], p_linear: f64) -> Result<CdfCurve, AnalyticError> {
        validate_grid(grid)?;
        let values = grid
            .iter()
            .map(|&x| self.cdf(x, p_linear))
            .collect::<Result<Vec<_>, _>>()?;
        CdfCurve::new(grid.to_vec(), values)
    }
}
