//! Seeded Monte Carlo estimators over [`draw_block`].
//!
//! The trial budget is split into `chunks` contiguous pieces. Chunk `k` draws
//! from its own Xoshiro256++ substream (the seeded state jumped `k` times,
//! 2^128 steps apart), so results depend on `(seed, chunks)` only and never
//! on how many threads execute the chunks. Per-chunk partial sums are
//! combined in chunk order with compensated summation.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::{validate_grid, AnalyticError, CdfCurve};
use crate::channel::{draw_block, Scenario};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MonteCarloError {
    #[error("run.{key}: {reason}")]
    InvalidRun { key: &'static str, reason: String },
    #[error("scenario: {0}")]
    Scenario(String),
    #[error("p_linear: must be positive and finite, got {0}")]
    Power(f64),
    #[error(transparent)]
    Curve(#[from] AnalyticError),
    #[error("grids differ: {0}")]
    GridMismatch(String),
}

pub const DEFAULT_CHUNKS: u32 = 64;

/// Seed, trial budget and substream count of one estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub seed: u64,
    pub trials: u64,
    #[serde(default = "default_chunks")]
    pub chunks: u32,
}

fn default_chunks() -> u32 {
    DEFAULT_CHUNKS
}

impl RunSpec {
    /// Builds a run, clamping the default chunk count to the trial budget.
    pub fn new(seed: u64, trials: u64) -> Self {
        RunSpec {
            seed,
            trials,
            chunks: DEFAULT_CHUNKS.min(trials.max(1) as u32),
        }
    }

    pub fn validate(&self) -> Result<(), MonteCarloError> {
        if self.chunks == 0 {
            return Err(MonteCarloError::InvalidRun {
                key: "chunks",
                reason: "must be at least 1".into(),
            });
        }
        if self.trials < self.chunks as u64 {
            return Err(MonteCarloError::InvalidRun {
                key: "trials",
                reason: format!("must be >= chunks ({}), got {}", self.chunks, self.trials),
            });
        }
        Ok(())
    }

    /// Trials assigned to chunk `k`; the remainder goes to the first chunks.
    fn chunk_len(&self, k: u32) -> u64 {
        let c = self.chunks as u64;
        self.trials / c + u64::from((k as u64) < self.trials % c)
    }

    fn substream(&self, k: u32) -> Xoshiro256PlusPlus {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(self.seed);
        for _ in 0..k {
            rng.jump();
        }
        rng
    }
}

/// A sample mean or proportion with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricEstimate {
    pub value: f64,
    pub std_error: f64,
    pub num_samples: u64,
}

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Channel gains `|Ξ|²` of one seeded run, stored per chunk.
///
/// Every metric at every power level reuses the same draws, since
/// `γ = p·|Ξ|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct GainSample {
    chunks: Vec<Vec<f64>>,
}

/// Draws `run.trials` coherence blocks.
pub fn sample_gains(scenario: &Scenario, run: RunSpec) -> Result<GainSample, MonteCarloError> {
    run.validate()?;
    scenario
        .validate()
        .map_err(|e| MonteCarloError::Scenario(e.to_string()))?;
    let chunks = (0..run.chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = run.substream(k);
            (0..run.chunk_len(k))
                .map(|_| draw_block(scenario, &mut rng).gain())
                .collect()
        })
        .collect();
    Ok(GainSample { chunks })
}

fn check_power(p_linear: f64) -> Result<(), MonteCarloError> {
    if !(p_linear > 0.0) || !p_linear.is_finite() {
        return Err(MonteCarloError::Power(p_linear));
    }
    Ok(())
}

impl GainSample {
    pub fn len(&self) -> u64 {
        self.chunks.iter().map(|c| c.len() as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All gains in chunk order.
    pub fn gains(&self) -> impl Iterator<Item = f64> + '_ {
        self.chunks.iter().flatten().copied()
    }

    /// Mean of `f` over all draws plus its standard error, with per-chunk
    /// compensated partials reduced in chunk order.
    fn mean_of(&self, f: impl Fn(f64) -> f64 + Sync) -> MetricEstimate {
        let n = self.len();
        let partial = |g: &(dyn Fn(f64) -> f64 + Sync)| {
            let parts: Vec<f64> = self
                .chunks
                .par_iter()
                .map(|c| {
                    let mut s = CompensatedSum::default();
                    c.iter().for_each(|&x| s.add(g(x)));
                    s.value()
                })
                .collect();
            let mut total = CompensatedSum::default();
            parts.into_iter().for_each(|p| total.add(p));
            total.value()
        };
        let mean = partial(&|x| f(x)) / n as f64;
        let sq = partial(&|x| (f(x) - mean).powi(2));
        let variance = if n > 1 { sq / (n - 1) as f64 } else { 0.0 };
        MetricEstimate {
            value: mean,
            std_error: (variance / n as f64).sqrt(),
            num_samples: n,
        }
    }

    /// Fraction of draws with `p·|Ξ|² < γ_th`, with binomial standard error.
    pub fn outage(&self, p_linear: f64, gamma_th: f64) -> Result<MetricEstimate, MonteCarloError> {
        check_power(p_linear)?;
        let n = self.len();
        let hits: u64 = self
            .chunks
            .iter()
            .map(|c| c.iter().filter(|&&g| p_linear * g < gamma_th).count() as u64)
            .sum();
        let value = hits as f64 / n as f64;
        Ok(MetricEstimate {
            value,
            std_error: (value * (1.0 - value) / n as f64).sqrt(),
            num_samples: n,
        })
    }

    /// Sample mean of `log₂(1 + p·|Ξ|²)`.
    pub fn spectral_efficiency(&self, p_linear: f64) -> Result<MetricEstimate, MonteCarloError> {
        check_power(p_linear)?;
        Ok(self.mean_of(|g| (p_linear * g).ln_1p() / std::f64::consts::LN_2))
    }

    /// Empirical `P(p·|Ξ|² < x)` at every grid point.
    pub fn cdf(&self, p_linear: f64, grid: &[f64]) -> Result<CdfCurve, MonteCarloError> {
        check_power(p_linear)?;
        validate_grid(grid)?;
        let mut snr: Vec<f64> = self.gains().map(|g| p_linear * g).collect();
        snr.sort_unstable_by(f64::total_cmp);
        let n = snr.len() as f64;
        let values = grid
            .iter()
            .map(|&x| snr.partition_point(|&s| s < x) as f64 / n)
            .collect();
        Ok(CdfCurve::new(grid.to_vec(), values)?)
    }
}

pub fn estimate_outage(
    scenario: &Scenario,
    p_linear: f64,
    gamma_th: f64,
    run: RunSpec,
) -> Result<MetricEstimate, MonteCarloError> {
    check_power(p_linear)?;
    sample_gains(scenario, run)?.outage(p_linear, gamma_th)
}

pub fn estimate_spectral_efficiency(
    scenario: &Scenario,
    p_linear: f64,
    run: RunSpec,
) -> Result<MetricEstimate, MonteCarloError> {
    check_power(p_linear)?;
    sample_gains(scenario, run)?.spectral_efficiency(p_linear)
}

pub fn empirical_cdf(
    scenario: &Scenario,
    p_linear: f64,
    grid: &[f64],
    run: RunSpec,
) -> Result<CdfCurve, MonteCarloError> {
    check_power(p_linear)?;
    validate_grid(grid)?;
    sample_gains(scenario, run)?.cdf(p_linear, grid)
}

/// `max_i |a_i − b_i|` over curves sharing one grid.
pub fn ks_distance(a: &CdfCurve, b: &CdfCurve) -> Result<f64, MonteCarloError> {
    if a.grid().len() != b.grid().len() {
        return Err(MonteCarloError::GridMismatch(format!(
            "{} vs {} points",
            a.grid().len(),
            b.grid().len()
        )));
    }
    if let Some(i) = a
        .grid()
        .iter()
        .zip(b.grid())
        .position(|(x, y)| x.to_bits() != y.to_bits())
    {
        return Err(MonteCarloError::GridMismatch(format!(
            "point {i}: {} vs {}",
            a.grid()[i],
            b.grid()[i]
        )));
    }
    Ok(a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}
