//! Battery recharging time `T_r = α / P_r` in hours.

use std::f64::consts::PI;

use serde::Serialize;

use crate::channel::ApproximantParams;
use crate::error::{domain, Error, Result};
use crate::power::{
    avg_received_power, power_cdf, power_cdf_n1, power_pdf_clt, power_sf_clt, ScenarioConfig,
};
use crate::specfun::{self, bessel_k0, ln_bessel_k0, ln_gamma_complex};

/// Battery and harvester constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BatteryProfile {
    /// `C_b` in ampere-hours.
    pub capacity: f64,
    /// `D_d` in (0, 1].
    pub discharge_depth: f64,
    /// `V_b` in volts.
    pub voltage: f64,
    /// RF-to-DC efficiency `η` in (0, 1].
    pub rfeh_efficiency: f64,
}

impl Default for BatteryProfile {
    /// 10 mAh, 40 % depth of discharge, 1.2 V, 50 % harvesting efficiency.
    fn default() -> Self {
        BatteryProfile {
            capacity: 10e-3,
            discharge_depth: 0.4,
            voltage: 1.2,
            rfeh_efficiency: 0.5,
        }
    }
}

impl BatteryProfile {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| v > 0.0 && v <= 1.0;
        if !(self.capacity > 0.0 && self.capacity.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "battery capacity must be positive, got {}",
                self.capacity
            )));
        }
        if !(self.voltage > 0.0 && self.voltage.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "battery voltage must be positive, got {}",
                self.voltage
            )));
        }
        if !unit(self.discharge_depth) {
            return Err(Error::InvalidConfig(format!(
                "depth of discharge must lie in (0, 1], got {}",
                self.discharge_depth
            )));
        }
        if !unit(self.rfeh_efficiency) {
            return Err(Error::InvalidConfig(format!(
                "harvesting efficiency must lie in (0, 1], got {}",
                self.rfeh_efficiency
            )));
        }
        Ok(())
    }
}

/// `α = C_b D_d V_b / η` in watt-hours.
pub fn conversion_coefficient(b: &BatteryProfile) -> f64 {
    b.capacity * b.discharge_depth * b.voltage / b.rfeh_efficiency
}

fn check_positive(function: &'static str, tau: f64) -> Result<()> {
    if tau > 0.0 {
        Ok(())
    } else {
        Err(domain(function, tau, "tau > 0"))
    }
}

/// Density of the recharging time from the approximant.
pub fn brt_pdf(tau: f64, cfg: &ScenarioConfig, params: &ApproximantParams, alpha: f64) -> Result<f64> {
    check_positive("brt_pdf", tau)?;
    if tau == f64::INFINITY {
        return Ok(0.0);
    }
    let z = (alpha / (avg_received_power(cfg) * tau)).sqrt() / params.a2;
    let g = specfun::evaluate(&params.shifted_pdf_spec(), z)?;
    Ok(g.sign * (params.ln_a1 + params.a2.ln() - (2.0 * tau).ln() + g.ln_abs).exp())
}

/// Exact single-element density `(2α/(Ωτ²)) K0(2√(α/(Ωτ)))`, `Ω = 4 P̄_r`.
pub fn brt_pdf_n1(tau: f64, cfg: &ScenarioConfig, alpha: f64) -> Result<f64> {
    check_positive("brt_pdf_n1", tau)?;
    if cfg.n_elements() != 1 {
        return Err(Error::InvalidConfig(format!(
            "brt_pdf_n1 is the single-element law, got N = {}",
            cfg.n_elements()
        )));
    }
    if tau == f64::INFINITY {
        return Ok(0.0);
    }
    let omega = 4.0 * avg_received_power(cfg);
    let y = 2.0 * (alpha / (omega * tau)).sqrt();
    let scale = 2.0 * alpha / (omega * tau * tau);
    if y > 2.0 {
        return Ok((scale.ln() + ln_bessel_k0(y)?).exp());
    }
    Ok(scale * bessel_k0(y)?)
}

/// `P(T_r <= τ) = 1 - F_P(α/τ)` from the approximant.
pub fn brt_cdf(tau: f64, cfg: &ScenarioConfig, params: &ApproximantParams, alpha: f64) -> Result<f64> {
    check_positive("brt_cdf", tau)?;
    Ok(1.0 - power_cdf(alpha / tau, cfg, params)?)
}

/// Exact single-element distribution function.
pub fn brt_cdf_n1(tau: f64, cfg: &ScenarioConfig, alpha: f64) -> Result<f64> {
    check_positive("brt_cdf_n1", tau)?;
    Ok(1.0 - power_cdf_n1(alpha / tau, cfg)?)
}

/// Large-N distribution function.
pub fn brt_cdf_clt(tau: f64, cfg: &ScenarioConfig, alpha: f64) -> Result<f64> {
    check_positive("brt_cdf_clt", tau)?;
    power_sf_clt(alpha / tau, cfg)
}

/// Large-N density, `(α/τ²) f_clt(α/τ)`.
pub fn brt_pdf_clt(tau: f64, cfg: &ScenarioConfig, alpha: f64) -> Result<f64> {
    check_positive("brt_pdf_clt", tau)?;
    if tau == f64::INFINITY {
        return Ok(0.0);
    }
    Ok(alpha / (tau * tau) * power_pdf_clt(alpha / tau, cfg)?)
}

/// Large-N mean `4α / ((N²π² + N(16-π²)) P̄_r)`.
pub fn brt_mean_clt(cfg: &ScenarioConfig, alpha: f64) -> f64 {
    let n = cfg.n_elements() as f64;
    4.0 * alpha / ((n * n * PI * PI + n * (16.0 - PI * PI)) * avg_received_power(cfg))
}

/// `E[T_r^n]` from the approximant.
///
/// The defining integral converges only when `min(Re a4, Re a5) + 1 - 2n > 0`;
/// outside that range the Gamma ratio is still finite, so the gate is checked
/// explicitly and [`Error::MomentUndefined`] is returned.
pub fn brt_moment(n: u32, cfg: &ScenarioConfig, params: &ApproximantParams, alpha: f64) -> Result<f64> {
    if n == 0 {
        return Ok(1.0);
    }
    let shift = 1.0 - 2.0 * n as f64;
    let exponent = params.min_lower() + shift;
    let upper = params.a3 + shift;
    if !(exponent > 0.0) || !(upper > 0.0) {
        return Err(Error::MomentUndefined {
            order: n,
            exponent,
        });
    }
    let lower = (ln_gamma_complex(params.a4() + shift) + ln_gamma_complex(params.a5() + shift)).re;
    let ln = params.ln_a1
        + shift * params.a2.ln()
        + n as f64 * (alpha / avg_received_power(cfg)).ln()
        + lower
        - specfun::ln_gamma(upper)?;
    Ok(ln.exp())
}

/// Mean, variance, skewness, kurtosis and amount of fading; `None` where the
/// required moment diverges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BrtSummary {
    pub mean: Option<f64>,
    pub variance: Option<f64>,
    /// `E[T³] / E[T²]^{3/2}` (raw moments).
    pub skewness: Option<f64>,
    /// `E[T⁴] / E[T²]² - 3` (raw moments).
    pub kurtosis: Option<f64>,
    pub aof: Option<f64>,
}

pub fn brt_summary(cfg: &ScenarioConfig, params: &ApproximantParams, alpha: f64) -> BrtSummary {
    let m: Vec<Option<f64>> = (1..=4).map(|k| brt_moment(k, cfg, params, alpha).ok()).collect();
    let mean = m[0];
    let variance = mean.zip(m[1]).map(|(m1, m2)| (m2 - m1 * m1).max(0.0));
    BrtSummary {
        mean,
        variance,
        skewness: m[2].zip(m[1]).map(|(m3, m2)| m3 / m2.powf(1.5)),
        kurtosis: m[3].zip(m[1]).map(|(m4, m2)| m4 / (m2 * m2) - 3.0),
        aof: variance.zip(mean).map(|(v, m1)| v / (m1 * m1)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{approximant_for, ChannelConfig};
    use crate::power::{dbm_to_watts, power_pdf};

    fn scenario(n: u32, ps_dbm: f64) -> ScenarioConfig {
        ScenarioConfig::new(dbm_to_watts(ps_dbm), 2.5, 2.5, 2.7, ChannelConfig::new(n).unwrap())
            .unwrap()
    }

    fn alpha() -> f64 {
        conversion_coefficient(&BatteryProfile::default())
    }

    #[test]
    fn table_battery() {
        let b = BatteryProfile::default();
        assert!((conversion_coefficient(&b) - 9.6e-3).abs() < 1e-15);
        let lossless = BatteryProfile {
            rfeh_efficiency: 1.0,
            discharge_depth: 1.0,
            ..b
        };
        assert_eq!(conversion_coefficient(&lossless), b.capacity * b.voltage);
        let half = BatteryProfile {
            rfeh_efficiency: 0.25,
            ..b
        };
        assert!((conversion_coefficient(&half) / conversion_coefficient(&b) - 2.0).abs() < 1e-15);
        assert!(b.validate().is_ok());
        assert!(BatteryProfile { discharge_depth: 1.5, ..b }.validate().is_err());
    }

    #[test]
    fn jacobian_identity() {
        let cfg = scenario(4, 15.0);
        let p = approximant_for(4).unwrap();
        let a = alpha();
        for i in 1..=50 {
            let tau = 0.01 * (i as f64).powf(1.5);
            let got = brt_pdf(tau, &cfg, &p, a).unwrap();
            let want = a / (tau * tau) * power_pdf(a / tau, &cfg, &p).unwrap();
            assert!(((got - want) / want).abs() < 1e-10, "tau={tau}");
            let c = brt_cdf(tau, &cfg, &p, a).unwrap();
            assert_eq!(c + power_cdf(a / tau, &cfg, &p).unwrap(), 1.0);
        }
    }

    #[test]
    fn clt_mean_example() {
        let cfg = scenario(10, 20.0);
        assert!((brt_mean_clt(&cfg, alpha()) - 0.0516).abs() < 5e-4);
        let big = scenario(100, 20.0);
        let big2 = scenario(200, 20.0);
        let r = brt_mean_clt(&big2, alpha()) / brt_mean_clt(&big, alpha());
        assert!((r / 0.25 - 1.0).abs() < 0.02);
    }

    #[test]
    fn moment_gate() {
        let cfg = scenario(1, 20.0);
        let p = approximant_for(1).unwrap();
        assert!(matches!(
            brt_moment(1, &cfg, &p, alpha()),
            Err(Error::MomentUndefined { order: 1, .. })
        ));
        let cfg = scenario(2, 20.0);
        let p = approximant_for(2).unwrap();
        let s = brt_summary(&cfg, &p, alpha());
        assert!(s.mean.is_some());
        assert!(s.variance.is_none() && s.kurtosis.is_none() && s.aof.is_none());
    }

    #[test]
    fn summary_relations() {
        let cfg = scenario(16, 20.0);
        let p = approximant_for(16).unwrap();
        let s = brt_summary(&cfg, &p, alpha());
        let (m, v) = (s.mean.unwrap(), s.variance.unwrap());
        assert!(v >= 0.0);
        assert!((s.aof.unwrap() - v / (m * m)).abs() < 1e-15);
    }

    #[test]
    fn limits() {
        let cfg = scenario(4, 15.0);
        let p = approximant_for(4).unwrap();
        assert!(brt_cdf(1e-9, &cfg, &p, alpha()).unwrap() < 1e-12);
        assert!((brt_cdf(1e9, &cfg, &p, alpha()).unwrap() - 1.0).abs() < 1e-12);
        assert!(brt_pdf(0.0, &cfg, &p, alpha()).is_err());
        assert!(brt_pdf_clt(-1.0, &cfg, alpha()).is_err());
    }
}
