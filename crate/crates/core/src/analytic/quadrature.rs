//! `E[ln(1 + θT)]` for `T ~ Gamma(shape, 1)`.
//!
//! After `t = e^u` the integrand `ln(1+θe^u)·exp(shape·u − e^u)/Γ(shape)` is
//! analytic in the strip `|Im u| < π/2` and decays at least exponentially in
//! both directions, so the trapezoidal rule on the real line converges
//! geometrically in the number of nodes. The node count starts at
//! [`INITIAL_INTERVALS`] and doubles until two successive estimates agree.

use thiserror::Error;

use crate::specfun::ln_gamma;

pub const INITIAL_INTERVALS: usize = 64;
pub const MAX_INTERVALS: usize = 1024;
pub const RELATIVE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
#[error(
    "quadrature did not converge: shape {shape}, scale {scale}, \
     {intervals} intervals gave {estimate:e} vs {previous:e}"
)]
pub struct QuadratureError {
    pub shape: f64,
    pub scale: f64,
    pub intervals: usize,
    pub estimate: f64,
    pub previous: f64,
}

/// Integrand in `v = ln t − ln(shape)`, centered on the density peak:
/// `ln(1 + θ·shape·e^v)·exp(base + shape·(v − expm1 v))`.
struct Integrand {
    shape: f64,
    scale: f64,
    /// `shape·ln(shape) − shape − lnΓ(shape)`, the log density at the peak.
    base: f64,
}

/// `a ln a − a − lnΓ(a)` without the cancellation of the direct form.
fn peak_log_density(a: f64) -> Result<f64, crate::specfun::SpecialError> {
    if a < 10.0 {
        return Ok(a * a.ln() - a - ln_gamma(a)?);
    }
    let r = 1.0 / (a * a);
    let stirling = (1.0 / 12.0 - r * (1.0 / 360.0 - r / 1260.0)) / a;
    Ok(0.5 * (a / (2.0 * std::f64::consts::PI)).ln() - stirling)
}

impl Integrand {
    fn log_density(&self, v: f64) -> f64 {
        self.base + self.shape * (v - v.exp_m1())
    }

    fn log_factor(&self, v: f64) -> f64 {
        (self.scale * self.shape * v.exp()).ln_1p()
    }

    fn at(&self, v: f64) -> f64 {
        let density = self.log_density(v).exp();
        if density == 0.0 {
            return 0.0;
        }
        self.log_factor(v) * density
    }
}

/// Finds `[lo, hi]` outside of which the integrand is negligible.
///
/// The log density is concave with slope `shape·(1 − e^v)`, so beyond a
/// point it is bounded by its tangent line; together with the at most
/// linear growth of `ln(1+θt)` in `v` this bounds each tail in closed form.
fn support(f: &Integrand) -> (f64, f64) {
    const NEGLIGIBLE: f64 = 1e-18;
    let step = (0.5 / f.shape.sqrt()).min(0.5);
    let mut mass = f.at(0.0) * step;

    let mut hi = 0.0;
    loop {
        hi += step;
        let v = f.at(hi);
        mass += v * step;
        let slope = f.shape * hi.exp_m1();
        let tail = f.log_density(hi).exp() * (f.log_factor(hi) / slope + 1.0 / (slope * slope));
        if tail <= NEGLIGIBLE * mass {
            break;
        }
    }
    let mut lo = 0.0;
    loop {
        lo -= step;
        let v = f.at(lo);
        mass += v * step;
        let slope = -f.shape * lo.exp_m1();
        if v / slope <= NEGLIGIBLE * mass || lo < -10_000.0 {
            break;
        }
    }
    (lo, hi)
}

fn trapezoid(f: &Integrand, lo: f64, hi: f64, intervals: usize) -> f64 {
    let h = (hi - lo) / intervals as f64;
    let interior: f64 = (1..intervals).map(|i| f.at(lo + i as f64 * h)).sum();
    h * (0.5 * (f.at(lo) + f.at(hi)) + interior)
}

/// `E[ln(1 + scale·T)]` with `T ~ Gamma(shape, 1)`, in nats.
pub fn gamma_mean_log1p(shape: f64, scale: f64) -> Result<f64, QuadratureError> {
    let fail = |intervals, estimate, previous| QuadratureError {
        shape,
        scale,
        intervals,
        estimate,
        previous,
    };
    if !(shape > 0.0) || !shape.is_finite() || !(scale >= 0.0) || !scale.is_finite() {
        return Err(fail(0, f64::NAN, f64::NAN));
    }
    if scale == 0.0 {
        return Ok(0.0);
    }
    let f = Integrand {
        shape,
        scale,
        base: peak_log_density(shape).map_err(|_| fail(0, f64::NAN, f64::NAN))?,
    };
    let (lo, hi) = support(&f);

    let mut intervals = INITIAL_INTERVALS;
    let mut previous = trapezoid(&f, lo, hi, intervals);
    while intervals < MAX_INTERVALS {
        intervals *= 2;
        let estimate = trapezoid(&f, lo, hi, intervals);
        if (estimate - previous).abs() <= RELATIVE_TOLERANCE * estimate.abs() {
            return Ok(estimate);
        }
        previous = estimate;
    }
    let estimate = trapezoid(&f, lo, hi, intervals);
    Err(fail(intervals, estimate, previous))
}
