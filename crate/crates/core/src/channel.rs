//! Channel model for one coherence block of the multi-operator RIS link.
//!
//! A [`Scenario`] describes the optional direct link, the reference operator's
//! own (controlled) RIS and any number of uncontrolled RISs belonging to other
//! operators. [`draw_block`] samples every per-element channel exactly; no
//! Gaussian approximation is made at this level.

use std::f64::consts::{PI, TAU};
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("{key}: {reason}")]
    Invalid { key: String, reason: String },
}

impl ChannelError {
    fn invalid(key: impl Into<String>, reason: impl Into<String>) -> Self {
        ChannelError::Invalid {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

/// Distance and path-loss exponent of one hop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkGeometry {
    pub distance_m: f64,
    pub pathloss_exponent: f64,
}

impl LinkGeometry {
    pub fn new(distance_m: f64, pathloss_exponent: f64) -> Result<Self, ChannelError> {
        let geometry = LinkGeometry {
            distance_m,
            pathloss_exponent,
        };
        geometry.validate("link")?;
        Ok(geometry)
    }

    /// `distance^(−exponent)`.
    pub fn path_gain(&self) -> f64 {
        self.distance_m.powf(-self.pathloss_exponent)
    }

    fn validate(&self, key: &str) -> Result<(), ChannelError> {
        if !(self.distance_m > 0.0) || !self.distance_m.is_finite() {
            return Err(ChannelError::invalid(
                format!("{key}.distance_m"),
                format!("must be a positive finite number, got {}", self.distance_m),
            ));
        }
        if !(self.pathloss_exponent > 0.0) || !self.pathloss_exponent.is_finite() {
            return Err(ChannelError::invalid(
                format!("{key}.pathloss_exponent"),
                format!(
                    "must be a positive finite number, got {}",
                    self.pathloss_exponent
                ),
            ));
        }
        Ok(())
    }
}

/// One Rician-faded hop with unit per-element power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "FlatRicianLink", into = "FlatRicianLink")]
pub struct RicianLink {
    pub geometry: LinkGeometry,
    pub k_factor: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FlatRicianLink {
    distance_m: f64,
    pathloss_exponent: f64,
    k_factor: f64,
}

impl From<FlatRicianLink> for RicianLink {
    fn from(flat: FlatRicianLink) -> Self {
        RicianLink {
            geometry: LinkGeometry {
                distance_m: flat.distance_m,
                pathloss_exponent: flat.pathloss_exponent,
            },
            k_factor: flat.k_factor,
        }
    }
}

impl From<RicianLink> for FlatRicianLink {
    fn from(link: RicianLink) -> Self {
        FlatRicianLink {
            distance_m: link.geometry.distance_m,
            pathloss_exponent: link.geometry.pathloss_exponent,
            k_factor: link.k_factor,
        }
    }
}

impl RicianLink {
    pub fn new(geometry: LinkGeometry, k_factor: f64) -> Result<Self, ChannelError> {
        let link = RicianLink { geometry, k_factor };
        link.validate("link")?;
        Ok(link)
    }

    fn validate(&self, key: &str) -> Result<(), ChannelError> {
        self.geometry.validate(key)?;
        if !(self.k_factor >= 0.0) || !self.k_factor.is_finite() {
            return Err(ChannelError::invalid(
                format!("{key}.k_factor"),
                format!("must be finite and >= 0, got {}", self.k_factor),
            ));
        }
        Ok(())
    }
}

/// Phase resolution of a RIS.
///
/// For the controlled RIS this is the resolution of the alignment codebook.
/// For an uncontrolled RIS `Perfect` means continuous uniform phases and
/// `Bits(q)` draws phases uniformly from the `2^q`-point codebook.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantizer {
    Bits(u32),
    Perfect,
}

/// Largest supported codebook resolution; finer codebooks are numerically
/// indistinguishable from `Perfect`.
pub const MAX_QUANTIZER_BITS: u32 = 48;

impl Quantizer {
    fn validate(&self, key: &str) -> Result<(), ChannelError> {
        match *self {
            Quantizer::Bits(q) if q == 0 || q > MAX_QUANTIZER_BITS => Err(ChannelError::invalid(
                format!("{key}.quantizer_bits"),
                format!("must be in 1..={MAX_QUANTIZER_BITS} or \"perfect\", got {q}"),
            )),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Quantizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantizer::Bits(q) => write!(f, "{q}"),
            Quantizer::Perfect => f.write_str("perfect"),
        }
    }
}

impl std::str::FromStr for Quantizer {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("perfect") {
            return Ok(Quantizer::Perfect);
        }
        s.parse::<u32>()
            .map(Quantizer::Bits)
            .map_err(|_| format!("expected bit count or \"perfect\", got {s:?}"))
    }
}

impl Serialize for Quantizer {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Quantizer::Bits(q) => serializer.serialize_u32(*q),
            Quantizer::Perfect => serializer.serialize_str("perfect"),
        }
    }
}

impl<'de> Deserialize<'de> for Quantizer {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct QuantizerVisitor;

        impl Visitor<'_> for QuantizerVisitor {
            type Value = Quantizer;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a positive bit count or \"perfect\"")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Quantizer, E> {
                u32::try_from(v)
                    .map(Quantizer::Bits)
                    .map_err(|_| E::custom("bit count too large"))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Quantizer, E> {
                u32::try_from(v)
                    .map(Quantizer::Bits)
                    .map_err(|_| E::custom(format!("bit count must be positive, got {v}")))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Quantizer, E> {
                v.parse().map_err(E::custom)
            }
        }

        deserializer.deserialize_any(QuantizerVisitor)
    }
}

fn default_quantizer() -> Quantizer {
    Quantizer::Perfect
}

/// A reconfigurable surface with its two hops.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RisUnit {
    pub num_elements: usize,
    #[serde(default = "default_quantizer")]
    pub quantizer: Quantizer,
    /// transmitter → RIS
    pub inbound: RicianLink,
    /// RIS → receiver
    pub outbound: RicianLink,
    #[serde(default)]
    pub controlled: bool,
}

impl RisUnit {
    pub fn controlled(
        num_elements: usize,
        quantizer: Quantizer,
        inbound: RicianLink,
        outbound: RicianLink,
    ) -> Self {
        RisUnit {
            num_elements,
            quantizer,
            inbound,
            outbound,
            controlled: true,
        }
    }

    /// Uncontrolled surface with continuous uniform phases.
    pub fn external(num_elements: usize, inbound: RicianLink, outbound: RicianLink) -> Self {
        RisUnit {
            num_elements,
            quantizer: Quantizer::Perfect,
            inbound,
            outbound,
            controlled: false,
        }
    }

    /// Product of the two hop path gains.
    pub fn cascaded_gain(&self) -> f64 {
        self.inbound.geometry.path_gain() * self.outbound.geometry.path_gain()
    }

    fn validate(&self, key: &str) -> Result<(), ChannelError> {
        self.quantizer.validate(key)?;
        self.inbound.validate(&format!("{key}.inbound"))?;
        self.outbound.validate(&format!("{key}.outbound"))
    }
}

/// Full system: direct link (Rayleigh), reference RIS and external RISs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Direct transmitter → receiver hop; always Rayleigh.
    #[serde(default)]
    pub direct: Option<LinkGeometry>,
    #[serde(default)]
    pub reference_ris: Option<RisUnit>,
    #[serde(default)]
    pub external_ris: Vec<RisUnit>,
}

impl Scenario {
    pub fn new(
        direct: Option<LinkGeometry>,
        reference_ris: Option<RisUnit>,
        external_ris: Vec<RisUnit>,
    ) -> Result<Self, ChannelError> {
        let scenario = Scenario {
            direct,
            reference_ris,
            external_ris,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        if let Some(direct) = &self.direct {
            direct.validate("scenario.direct")?;
        }
        if let Some(reference) = &self.reference_ris {
            reference.validate("scenario.reference_ris")?;
            if !reference.controlled {
                return Err(ChannelError::invalid(
                    "scenario.reference_ris.controlled",
                    "the reference RIS must be controlled",
                ));
            }
        }
        for (i, ris) in self.external_ris.iter().enumerate() {
            let key = format!("scenario.external_ris[{i}]");
            ris.validate(&key)?;
            if ris.controlled {
                return Err(ChannelError::invalid(
                    format!("{key}.controlled"),
                    "only the reference RIS may be controlled",
                ));
            }
        }
        if self.direct.is_none() && self.reference_ris.is_none() && self.external_ris.is_empty() {
            return Err(ChannelError::invalid(
                "scenario",
                "needs a direct link, a reference RIS or at least one external RIS",
            ));
        }
        Ok(())
    }

    /// Reference array size `N` (0 without a reference RIS).
    pub fn reference_elements(&self) -> usize {
        self.reference_ris.as_ref().map_or(0, |r| r.num_elements)
    }

    /// Total external element count `Σ M_u`.
    pub fn external_elements(&self) -> usize {
        self.external_ris.iter().map(|r| r.num_elements).sum()
    }

    pub fn reference_quantizer(&self) -> Option<Quantizer> {
        self.reference_ris.as_ref().map(|r| r.quantizer)
    }
}

/// Aggregates of one coherence block. `xi = z + x + y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelDraw {
    pub z: f64,
    pub x: Complex64,
    pub y: Complex64,
    pub xi: Complex64,
}

impl ChannelDraw {
    /// `|Ξ|²`.
    pub fn gain(&self) -> f64 {
        self.xi.norm_sqr()
    }
}

/// Precomputed amplitudes for unit-power Rician sampling.
#[derive(Debug, Clone, Copy)]
struct RicianSampler {
    los: f64,
    scatter: f64,
}

impl RicianSampler {
    fn new(kappa: f64) -> Self {
        RicianSampler {
            los: (kappa / (1.0 + kappa)).sqrt(),
            // per real dimension: variance 1/(2(1+κ))
            scatter: (0.5 / (1.0 + kappa)).sqrt(),
        }
    }

    #[inline]
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        let los = unit_phasor(rng);
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(
            self.los * los.re + self.scatter * re,
            self.los * los.im + self.scatter * im,
        )
    }
}

impl RicianSampler {
    /// `|h|` only; the scatter term is rotation invariant so the LoS phase can
    /// be fixed at zero.
    #[inline]
    fn magnitude<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        let a = self.los + self.scatter * re;
        let b = self.scatter * im;
        (a * a + b * b).sqrt()
    }
}

/// `e^{jψ}` with `ψ` uniform on `[0, 2π)`, without trigonometric calls.
///
/// A point `(u, v)` uniform in the unit disc has uniform angle; squaring it as a
/// complex number doubles the angle and keeps it uniform, and dividing by
/// `u² + v²` normalizes the modulus.
#[inline]
pub fn unit_phasor<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    loop {
        let u = 2.0 * rng.random::<f64>() - 1.0;
        let v = 2.0 * rng.random::<f64>() - 1.0;
        let s = u * u + v * v;
        if s <= 1.0 && s > 1e-12 {
            return Complex64::new((u * u - v * v) / s, 2.0 * u * v / s);
        }
    }
}

/// `n` i.i.d. unit-power Rician coefficients with independent uniform LoS phases.
pub fn sample_rician_vector<R: Rng + ?Sized>(
    n: usize,
    kappa: f64,
    rng: &mut R,
) -> Result<Vec<Complex64>, ChannelError> {
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(ChannelError::invalid(
            "kappa",
            format!("must be finite and >= 0, got {kappa}"),
        ));
    }
    let sampler = RicianSampler::new(kappa);
    Ok((0..n).map(|_| sampler.sample(rng)).collect())
}

/// Nearest point of the codebook `{ lπ/2^{q−1} : l = 0..2^q−1 }` to `target`
/// in circular distance; returned in `[0, 2π)`. Exact ties go to the lower
/// codebook index.
pub fn quantize_phase(target: f64, bits: u32) -> f64 {
    assert!(
        (1..=MAX_QUANTIZER_BITS).contains(&bits),
        "quantizer bits out of range"
    );
    let levels = 1u64 << bits;
    let step = TAU / levels as f64;
    let wrapped = target.rem_euclid(TAU);
    let position = wrapped / step;
    let lower = position.floor();
    let frac = position - lower;
    let mut index = lower as u64;
    if frac > 0.5 {
        index += 1;
    } else if frac == 0.5 && index == levels - 1 {
        // tie between the last point and index 0 wrapping around
        index = levels;
    }
    (index % levels) as f64 * step
}

/// Wraps an angle to `(−π, π]`.
pub fn wrap_phase(angle: f64) -> f64 {
    let w = (angle + PI).rem_euclid(TAU) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

/// Phase error `quantized − target`, wrapped; lies in `[−π/2^q, π/2^q]`.
pub fn quantization_residual(target: f64, bits: u32) -> f64 {
    wrap_phase(quantize_phase(target, bits) - target)
}

/// Samples one coherence block.
pub fn draw_block<R: Rng + ?Sized>(scenario: &Scenario, rng: &mut R) -> ChannelDraw {
    let (z, direct_phase) = match &scenario.direct {
        Some(direct) => {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let hd = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
            ((direct.path_gain()).sqrt() * hd.norm(), hd.arg())
        }
        None => (0.0, 0.0),
    };

    let x = match &scenario.reference_ris {
        Some(ris) if ris.num_elements > 0 => reference_aggregate(ris, direct_phase, rng),
        _ => Complex64::new(0.0, 0.0),
    };

    let derotate = Complex64::from_polar(1.0, -direct_phase);
    let mut y = Complex64::new(0.0, 0.0);
    for ris in &scenario.external_ris {
        if ris.num_elements > 0 {
            y += external_aggregate(ris, rng) * derotate;
        }
    }

    ChannelDraw {
        z,
        x,
        y,
        xi: Complex64::new(z, 0.0) + x + y,
    }
}

/// `√(g₁g₂) Σ |h₁ᵢ||h₂ᵢ| e^{jθᵢ}` after phase alignment to the direct link.
fn reference_aggregate<R: Rng + ?Sized>(
    ris: &RisUnit,
    direct_phase: f64,
    rng: &mut R,
) -> Complex64 {
    let inbound = RicianSampler::new(ris.inbound.k_factor);
    let outbound = RicianSampler::new(ris.outbound.k_factor);
    let mut sum = Complex64::new(0.0, 0.0);
    for _ in 0..ris.num_elements {
        let h1 = inbound.sample(rng);
        let h2 = outbound.sample(rng);
        let amplitude = h1.norm() * h2.norm();
        match ris.quantizer {
            Quantizer::Perfect => sum.re += amplitude,
            Quantizer::Bits(q) => {
                let ideal = direct_phase - h1.arg() - h2.arg();
                let theta = quantization_residual(ideal, q);
                let (s, c) = theta.sin_cos();
                sum += Complex64::new(amplitude * c, amplitude * s);
            }
        }
    }
    sum * ris.cascaded_gain().sqrt()
}

/// `√(g₁g₂) Σ g₂ᵢ e^{jφᵢ} g₁ᵢ` with phases unknown to the reference operator.
fn external_aggregate<R: Rng + ?Sized>(ris: &RisUnit, rng: &mut R) -> Complex64 {
    let inbound = RicianSampler::new(ris.inbound.k_factor);
    let outbound = RicianSampler::new(ris.outbound.k_factor);
    let mut sum = Complex64::new(0.0, 0.0);
    match ris.quantizer {
        Quantizer::Perfect => {
            // g₁ and g₂ are circularly symmetric, so with an independent uniform
            // φ the product g₂e^{jφ}g₁ has the law of |g₁||g₂|e^{jφ}.
            for _ in 0..ris.num_elements {
                let amplitude = inbound.magnitude(rng) * outbound.magnitude(rng);
                sum += unit_phasor(rng) * amplitude;
            }
        }
        Quantizer::Bits(q) => {
            let levels = 1u64 << q;
            let step = TAU / levels as f64;
            for _ in 0..ris.num_elements {
                let g1 = inbound.sample(rng);
                let g2 = outbound.sample(rng);
                let phi = rng.random_range(0..levels) as f64 * step;
                sum += g1 * g2 * Complex64::from_polar(1.0, phi);
            }
        }
    }
    sum * ris.cascaded_gain().sqrt()
}

/// `γ = p·|Ξ|²`.
pub fn instantaneous_snr(draw: &ChannelDraw, p_linear: f64) -> f64 {
    p_linear * draw.gain()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{rician_mean_factor, sinc};
    use rand::SeedableRng;
    use rand_xoshiro::Xoshiro256PlusPlus;

    fn link(d: f64, a: f64, k: f64) -> RicianLink {
        RicianLink::new(LinkGeometry::new(d, a).unwrap(), k).unwrap()
    }

    fn mean_and_se(values: &[f64]) -> (f64, f64) {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, (var / n).sqrt())
    }

    #[test]
    fn rayleigh_magnitude_mean() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(1);
        let h = sample_rician_vector(400_000, 0.0, &mut rng).unwrap();
        let mags: Vec<f64> = h.iter().map(|c| c.norm()).collect();
        let (mean, se) = mean_and_se(&mags);
        assert!((mean - PI.sqrt() / 2.0).abs() < 3.0 * se, "{mean} ± {se}");
    }

    #[test]
    fn rician_unit_power_and_mean() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(2);
        for &kappa in &[0.0, 1.0, 6.0, 10.0] {
            let h = sample_rician_vector(200_000, kappa, &mut rng).unwrap();
            let power: Vec<f64> = h.iter().map(|c| c.norm_sqr()).collect();
            let (p, se) = mean_and_se(&power);
            assert!((p - 1.0).abs() < 3.0 * se, "kappa={kappa}: {p} ± {se}");
            let mags: Vec<f64> = h.iter().map(|c| c.norm()).collect();
            let (m, se) = mean_and_se(&mags);
            let expected = rician_mean_factor(kappa).unwrap();
            assert!(
                (m - expected).abs() < 3.0 * se,
                "kappa={kappa}: {m} vs {expected}"
            );
        }
    }

    #[test]
    fn large_k_factor_is_deterministic_magnitude() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(3);
        let h = sample_rician_vector(1_000, 1e12, &mut rng).unwrap();
        assert!(h.iter().all(|c| (c.norm() - 1.0).abs() < 1e-5));
        assert!(sample_rician_vector(3, -1.0, &mut rng).is_err());
    }

    #[test]
    fn quantizer_examples() {
        assert_eq!(quantize_phase(0.3, 2), 0.0);
        assert_eq!(quantize_phase(PI / 3.0, 1), 0.0);
        assert_eq!(quantize_phase(1.3, 2), PI / 2.0);
        assert_eq!(quantize_phase(-0.1, 3), 0.0);
        assert!((quantize_phase(-PI / 2.0 + 0.01, 2) - 1.5 * PI).abs() < 1e-15);
        // exact ties pick the lower index
        assert_eq!(quantize_phase(PI / 4.0, 2), 0.0);
        assert_eq!(quantize_phase(1.75 * PI, 2), 0.0);
        assert_eq!(quantize_phase(0.75 * PI, 2), 0.5 * PI);
    }

    #[test]
    fn residuals_uniform_with_sinc_mean() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(4);
        let bound = PI / 8.0;
        let n = 100_000;
        let mut residuals: Vec<f64> = (0..n)
            .map(|_| quantization_residual(rng.random::<f64>() * 40.0 - 20.0, 3))
            .collect();
        assert!(residuals.iter().all(|r| r.abs() <= bound + 1e-12));
        let mean_cos = residuals.iter().map(|r| r.cos()).sum::<f64>() / n as f64;
        let mean_sin = residuals.iter().map(|r| r.sin()).sum::<f64>() / n as f64;
        assert!((mean_cos - sinc(bound)).abs() < 1e-3);
        assert!(mean_sin.abs() < 5e-3);

        // Kolmogorov–Smirnov against U[−π/8, π/8]
        residuals.sort_by(f64::total_cmp);
        let d = residuals
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let f = (r + bound) / (2.0 * bound);
                (f - i as f64 / n as f64)
                    .abs()
                    .max((f - (i + 1) as f64 / n as f64).abs())
            })
            .fold(0.0, f64::max);
        // p > 0.01 critical value: 1.628 / √n
        assert!(d < 1.628 / (n as f64).sqrt(), "KS {d}");
    }

    #[test]
    fn direct_only_block() {
        let scenario =
            Scenario::new(Some(LinkGeometry::new(100.0, 3.1).unwrap()), None, vec![]).unwrap();
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(5);
        for _ in 0..100 {
            let d = draw_block(&scenario, &mut rng);
            assert_eq!(d.x, Complex64::new(0.0, 0.0));
            assert_eq!(d.y, Complex64::new(0.0, 0.0));
            assert_eq!(d.xi, Complex64::new(d.z, 0.0));
            assert!(d.z >= 0.0);
        }
    }

    #[test]
    fn perfect_alignment_is_real_nonnegative() {
        let ris = RisUnit::controlled(
            32,
            Quantizer::Perfect,
            link(30.0, 2.2, 10.0),
            link(30.0, 2.4, 6.0),
        );
        let scenario = Scenario::new(
            Some(LinkGeometry::new(100.0, 3.1).unwrap()),
            Some(ris),
            vec![],
        )
        .unwrap();
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(6);
        for _ in 0..200 {
            let d = draw_block(&scenario, &mut rng);
            assert_eq!(d.xi.im, 0.0);
            assert!(d.xi.re >= 0.0);
        }
    }

    #[test]
    fn xi_is_sum_of_parts() {
        let scenario = Scenario::new(
            Some(LinkGeometry::new(100.0, 3.1).unwrap()),
            Some(RisUnit::controlled(
                8,
                Quantizer::Bits(2),
                link(30.0, 2.2, 10.0),
                link(30.0, 2.4, 6.0),
            )),
            vec![RisUnit::external(
                8,
                link(30.0, 2.2, 10.0),
                link(30.0, 2.4, 6.0),
            )],
        )
        .unwrap();
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(7);
        for _ in 0..50 {
            let d = draw_block(&scenario, &mut rng);
            assert_eq!(d.xi, Complex64::new(d.z, 0.0) + d.x + d.y);
            assert_eq!(instantaneous_snr(&d, 4.0), 4.0 * instantaneous_snr(&d, 1.0));
        }
    }

    #[test]
    fn snr_examples() {
        let zero = ChannelDraw {
            z: 0.0,
            x: Complex64::new(0.0, 0.0),
            y: Complex64::new(0.0, 0.0),
            xi: Complex64::new(0.0, 0.0),
        };
        assert_eq!(instantaneous_snr(&zero, 10.0), 0.0);
        let unit = ChannelDraw {
            xi: Complex64::new(1.0, 0.0),
            ..zero
        };
        assert_eq!(instantaneous_snr(&unit, 10.0), 10.0);
    }

    #[test]
    fn same_seed_same_draws() {
        let scenario = Scenario::new(
            None,
            Some(RisUnit::controlled(
                16,
                Quantizer::Bits(3),
                link(30.0, 2.2, 10.0),
                link(30.0, 2.4, 6.0),
            )),
            vec![RisUnit::external(
                16,
                link(30.0, 2.2, 10.0),
                link(30.0, 2.4, 6.0),
            )],
        )
        .unwrap();
        let mut a = Xoshiro256PlusPlus::seed_from_u64(99);
        let mut b = Xoshiro256PlusPlus::seed_from_u64(99);
        for _ in 0..100 {
            assert_eq!(draw_block(&scenario, &mut a), draw_block(&scenario, &mut b));
        }
    }

    #[test]
    fn scenario_validation() {
        assert!(Scenario::new(None, None, vec![]).is_err());
        let err = LinkGeometry::new(-3.0, 2.0).unwrap_err();
        assert!(err.to_string().contains("distance_m"));
        let mut bad = RisUnit::external(4, link(30.0, 2.2, 1.0), link(30.0, 2.4, 1.0));
        bad.controlled = true;
        let err = Scenario::new(None, None, vec![bad]).unwrap_err();
        assert!(err.to_string().contains("external_ris[0].controlled"));
        let reference = RisUnit::controlled(
            4,
            Quantizer::Bits(0),
            link(30.0, 2.2, 1.0),
            link(30.0, 2.4, 1.0),
        );
        let err = Scenario::new(None, Some(reference), vec![]).unwrap_err();
        assert!(err.to_string().contains("quantizer_bits"));
    }

    #[test]
    fn quantizer_serde() {
        let q: Quantizer = serde_json::from_str("3").unwrap();
        assert_eq!(q, Quantizer::Bits(3));
        let q: Quantizer = serde_json::from_str("\"perfect\"").unwrap();
        assert_eq!(q, Quantizer::Perfect);
        assert!(serde_json::from_str::<Quantizer>("-2").is_err());
        assert_eq!(serde_json::to_string(&Quantizer::Bits(5)).unwrap(), "5");
    }
}
