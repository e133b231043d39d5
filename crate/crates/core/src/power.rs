//! Instantaneous received power `P_r = P̄_r B²`.

use std::f64::consts::PI;

use log::warn;
use serde::Serialize;

use crate::channel::{gain_cdf, gain_pdf, ApproximantParams, ChannelConfig};
use crate::error::{domain, Error, Result};
use crate::specfun::{bessel_k0, ln_bessel_k0, log_exp_bessel, normal_cdf};

/// Link geometry and transmit power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScenarioConfig {
    /// Transmit power in watts.
    pub ps: f64,
    /// Source to RIS distance in meters.
    pub d1: f64,
    /// RIS to receiver distance in meters.
    pub d2: f64,
    /// Path-loss exponent.
    pub delta: f64,
    pub channel: ChannelConfig,
}

impl ScenarioConfig {
    pub fn new(ps: f64, d1: f64, d2: f64, delta: f64, channel: ChannelConfig) -> Result<Self> {
        let cfg = ScenarioConfig {
            ps,
            d1,
            d2,
            delta,
            channel,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Positive finite `ps`, `d1`, `d2`; `delta >= 0` (a warning is logged outside [2, 4]).
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("ps", self.ps), ("d1", self.d1), ("d2", self.d2)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "delta must be nonnegative, got {}",
                self.delta
            )));
        }
        if !(2.0..=4.0).contains(&self.delta) {
            warn!("path-loss exponent {} outside the usual range [2, 4]", self.delta);
        }
        Ok(())
    }

    pub fn n_elements(&self) -> u32 {
        self.channel.n_elements()
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

/// `P̄_r = P_s / (d1^δ d2^δ)`.
pub fn avg_received_power(cfg: &ScenarioConfig) -> f64 {
    cfg.ps / (cfg.d1.powf(cfg.delta) * cfg.d2.powf(cfg.delta))
}

fn check_positive(function: &'static str, x: f64) -> Result<()> {
    if x > 0.0 {
        Ok(())
    } else {
        Err(domain(function, x, "x > 0"))
    }
}

/// Distribution function of `P_r` from the approximant.
pub fn power_cdf(x: f64, cfg: &ScenarioConfig, params: &ApproximantParams) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(domain("power_cdf", x, "x >= 0"));
    }
    gain_cdf((x / avg_received_power(cfg)).sqrt(), params)
}

/// Density of `P_r` from the approximant.
pub fn power_pdf(x: f64, cfg: &ScenarioConfig, params: &ApproximantParams) -> Result<f64> {
    check_positive("power_pdf", x)?;
    if x == f64::INFINITY {
        return Ok(0.0);
    }
    let pbar = avg_received_power(cfg);
    let z = (x / pbar).sqrt() / params.a2;
    let g = crate::specfun::evaluate(&params.shifted_pdf_spec(), z)?;
    Ok(g.sign * (params.ln_a1 + params.a2.ln() - (2.0 * x).ln() + g.ln_abs).exp())
}

/// Same density through the gain density and the Jacobian of `x = P̄_r b²`.
pub fn power_pdf_from_gain(x: f64, cfg: &ScenarioConfig, params: &ApproximantParams) -> Result<f64> {
    check_positive("power_pdf_from_gain", x)?;
    let pbar = avg_received_power(cfg);
    Ok(gain_pdf((x / pbar).sqrt(), params)? / (2.0 * (x * pbar).sqrt()))
}

fn require_single(cfg: &ScenarioConfig, function: &str) -> Result<()> {
    if cfg.n_elements() != 1 {
        return Err(Error::InvalidConfig(format!(
            "{function} is the single-element law, got N = {}",
            cfg.n_elements()
        )));
    }
    Ok(())
}

/// Exact density for a single element.
///
/// Double-Rayleigh power `(2/Ω) K0(2√(x/Ω))` with `Ω = E[P_r] = 4 P̄_r`
/// (unit-scale hops give `E[B²] = 4`), i.e. `K0(√(x/P̄_r)) / (2 P̄_r)`.
pub fn power_pdf_n1(x: f64, cfg: &ScenarioConfig) -> Result<f64> {
    require_single(cfg, "power_pdf_n1")?;
    check_positive("power_pdf_n1", x)?;
    let pbar = avg_received_power(cfg);
    let y = (x / pbar).sqrt();
    if y > 2.0 {
        return Ok((ln_bessel_k0(y)? - (2.0 * pbar).ln()).exp());
    }
    Ok(bessel_k0(y)? / (2.0 * pbar))
}

/// Exact distribution function for a single element: `1 - y K1(y)`, `y = √(x/P̄_r)`.
pub fn power_cdf_n1(x: f64, cfg: &ScenarioConfig) -> Result<f64> {
    require_single(cfg, "power_cdf_n1")?;
    if !(x >= 0.0) {
        return Err(domain("power_cdf_n1", x, "x >= 0"));
    }
    crate::channel::double_rayleigh_cdf((x / avg_received_power(cfg)).sqrt())
}

/// Mean and variance of the Gaussian limit of B.
pub fn clt_gain_params(n_elements: u32) -> (f64, f64) {
    let n = n_elements as f64;
    (n * PI / 2.0, n * (16.0 - PI * PI) / 4.0)
}

/// Large-N density of `P_r`: noncentral chi-square with one degree of freedom.
///
/// `f = 2/(N(16-π²)P̄) (N²π²P̄/(4x))^{1/4} e^{-A} I_{-1/2}(B)` with
/// `A = (4x + N²π²P̄)/(2N(16-π²)P̄)` and `B = 2π√(P̄x)/((16-π²)P̄)`,
/// evaluated in log form.
pub fn power_pdf_clt(x: f64, cfg: &ScenarioConfig) -> Result<f64> {
    check_positive("power_pdf_clt", x)?;
    if x == f64::INFINITY {
        return Ok(0.0);
    }
    let n = cfg.n_elements() as f64;
    let pbar = avg_received_power(cfg);
    let c = 16.0 - PI * PI;
    let a = (4.0 * x + n * n * PI * PI * pbar) / (2.0 * n * c * pbar);
    let b = 2.0 * PI * (pbar * x).sqrt() / (c * pbar);
    let ln = 2f64.ln() - (n * c * pbar).ln()
        + 0.25 * (n * n * PI * PI * pbar / (4.0 * x)).ln()
        + log_exp_bessel(a, b)?;
    Ok(ln.exp())
}

/// The same law written as `P̄_r B²` with `B` a normal variable folded at 0.
pub fn power_pdf_clt_folded(x: f64, cfg: &ScenarioConfig) -> Result<f64> {
    check_positive("power_pdf_clt_folded", x)?;
    let pbar = avg_received_power(cfg);
    let (mu, var) = clt_gain_params(cfg.n_elements());
    let sigma = var.sqrt();
    let y = (x / pbar).sqrt();
    let phi = |u: f64| (-0.5 * u * u).exp() / (2.0 * PI).sqrt();
    Ok((phi((y - mu) / sigma) + phi((y + mu) / sigma)) / (2.0 * sigma * (x * pbar).sqrt()))
}

/// Large-N distribution function `Φ((y-μ)/σ) + Φ((y+μ)/σ) - 1`.
pub fn power_cdf_clt(x: f64, cfg: &ScenarioConfig) -> Result<f64> {
    Ok(1.0 - power_sf_clt(x, cfg)?)
}

/// Large-N survival function `Φ((μ-y)/σ) + Φ(-(y+μ)/σ)`, accurate in the far tail.
pub fn power_sf_clt(x: f64, cfg: &ScenarioConfig) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(domain("power_sf_clt", x, "x >= 0"));
    }
    let (mu, var) = clt_gain_params(cfg.n_elements());
    let sigma = var.sqrt();
    let y = (x / avg_received_power(cfg)).sqrt();
    let sf = normal_cdf((mu - y) / sigma) + normal_cdf(-(y + mu) / sigma);
    Ok(sf.clamp(0.0, 1.0))
}
