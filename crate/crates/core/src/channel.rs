//! End-to-end gain `B = Σ |h_i| |g_i|`: exact moments and the moment-matched
//! Meijer-G approximant of its density.
//!
//! The approximant is `f_B(x) = a1 G2012(x/a2 | a3; a4, a5)` whose raw moments
//! are `a1 a2^{k+1} Γ(a4+1+k) Γ(a5+1+k) / Γ(a3+1+k)`; the fit below solves
//! for the five constants so that moments 0 through 4 match exactly.
//!
//! For small element counts (N <= 3 with Rayleigh hops) the quadratic for
//! `a4, a5` has a negative discriminant. The fitted pair is then complex
//! conjugate, which still yields a real, positive density reproducing the
//! four moments, so it is kept as [`LowerPair::Conjugate`].

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::specfun::{self, ln_gamma_complex, MeijerGSpec};

/// Element count and per-hop Rayleigh scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelConfig {
    n_elements: u32,
    rayleigh_scale: f64,
}

impl ChannelConfig {
    /// Unit-scale Rayleigh hops over `n_elements >= 1` reflecting elements.
    pub fn new(n_elements: u32) -> Result<Self> {
        if n_elements == 0 {
            return Err(Error::InvalidConfig(
                "number of reflecting elements must be at least 1".into(),
            ));
        }
        Ok(ChannelConfig {
            n_elements,
            rayleigh_scale: 1.0,
        })
    }

    pub fn n_elements(&self) -> u32 {
        self.n_elements
    }

    pub fn rayleigh_scale(&self) -> f64 {
        self.rayleigh_scale
    }
}

/// First four raw moments of B.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GainMoments {
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub mu4: f64,
}

impl GainMoments {
    pub fn as_array(&self) -> [f64; 4] {
        [self.mu1, self.mu2, self.mu3, self.mu4]
    }

    /// Positivity, Jensen (`mu2 >= mu1^2`) and Cauchy–Schwarz (`mu4 mu2 >= mu3^2`).
    pub fn validate(&self) -> Result<()> {
        let m = self.as_array();
        if m.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::IllConditioned(format!(
                "moments must be finite and positive, got {m:?}"
            )));
        }
        if self.mu2 < self.mu1 * self.mu1 {
            return Err(Error::IllConditioned(format!(
                "mu2 = {} < mu1^2 = {}",
                self.mu2,
                self.mu1 * self.mu1
            )));
        }
        if self.mu4 * self.mu2 < self.mu3 * self.mu3 {
            return Err(Error::IllConditioned(format!(
                "mu4 mu2 = {} < mu3^2 = {}",
                self.mu4 * self.mu2,
                self.mu3 * self.mu3
            )));
        }
        Ok(())
    }
}

/// Exact raw moments of B for unit-scale Rayleigh hops.
pub fn gain_moments(cfg: &ChannelConfig) -> GainMoments {
    let n = cfg.n_elements as f64;
    let pi2 = PI * PI;
    let mu1 = n * PI / 2.0;
    let mu2 = (4.0 + (n - 1.0) * pi2 / 4.0) * n;
    let mu3 = match cfg.n_elements {
        1 => 9.0 * PI / 2.0,
        2 => 21.0 * PI,
        _ => n * PI * (4.5 + 6.0 * (n - 1.0) + (n - 1.0) * (n - 2.0) * pi2 / 8.0),
    };
    let mu4 = match cfg.n_elements {
        1 => 64.0,
        2 => 224.0 + 18.0 * pi2,
        3 => 480.0 + 90.0 * pi2,
        _ => {
            64.0 * n
                + 48.0 * n * (n - 1.0)
                + 9.0 * n * (n - 1.0) * pi2
                + 6.0 * n * (n - 1.0) * (n - 2.0) * pi2
                + n * (n - 1.0) * (n - 2.0) * (n - 3.0) * pi2 * pi2 / 16.0
        }
    };
    GainMoments { mu1, mu2, mu3, mu4 }
}

/// The two lower Meijer-G parameters of the approximant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LowerPair {
    /// `a4 >= a5`, `a4 - a5 = a7`.
    Real { a4: f64, a5: f64 },
    /// `a4, a5 = re ± i im` when the discriminant `a7^2` is negative.
    Conjugate { re: f64, im: f64 },
}

/// Fitted approximant constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproximantParams {
    /// `a1`; underflows to zero for large N, use `ln_a1` in computations.
    pub a1: f64,
    pub ln_a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub lower: LowerPair,
    pub a6: f64,
    /// The radicand of `a7`; negative in the conjugate case.
    pub a7_squared: f64,
    pub phi2: f64,
    pub phi3: f64,
    pub phi4: f64,
}

impl ApproximantParams {
    pub fn a4(&self) -> Complex64 {
        match self.lower {
            LowerPair::Real { a4, .. } => Complex64::new(a4, 0.0),
            LowerPair::Conjugate { re, im } => Complex64::new(re, im),
        }
    }

    pub fn a5(&self) -> Complex64 {
        match self.lower {
            LowerPair::Real { a5, .. } => Complex64::new(a5, 0.0),
            LowerPair::Conjugate { re, im } => Complex64::new(re, -im),
        }
    }

    /// `a7 = a4 - a5`, defined when the lower pair is real.
    pub fn a7(&self) -> Option<f64> {
        match self.lower {
            LowerPair::Real { a4, a5 } => Some(a4 - a5),
            LowerPair::Conjugate { .. } => None,
        }
    }

    /// `min(Re a4, Re a5)`, which governs the behaviour at `x -> 0`.
    pub fn min_lower(&self) -> f64 {
        self.a4().re.min(self.a5().re)
    }

    /// `G2012(· | a3; a4, a5)` of the density.
    pub fn pdf_spec(&self) -> MeijerGSpec {
        MeijerGSpec::g2012(self.a3, self.a4(), self.a5()).expect("fitted parameters are valid")
    }

    /// `G2123(· | 1, a3+1; a4+1, a5+1, 0)` of the distribution function.
    pub fn cdf_spec(&self) -> MeijerGSpec {
        MeijerGSpec::g2123(self.a3, self.a4(), self.a5()).expect("fitted parameters are valid")
    }

    /// `G2012(· | a3+1; a5+1, a4+1)` of the received-power and BRT densities.
    pub fn shifted_pdf_spec(&self) -> MeijerGSpec {
        MeijerGSpec::g2012(self.a3 + 1.0, self.a5() + 1.0, self.a4() + 1.0)
            .expect("fitted parameters are valid")
    }

    /// ln of `Γ(a4+s) Γ(a5+s)`, real for both parameter kinds.
    pub(crate) fn ln_gamma_lower(&self, s: f64) -> f64 {
        (ln_gamma_complex(self.a4() + s) + ln_gamma_complex(self.a5() + s)).re
    }

    /// Raw moment `E[B^k]` of the approximant for real `k > -1 - min_lower`.
    pub fn moment(&self, k: f64) -> Result<f64> {
        if !(k + 1.0 + self.min_lower() > 0.0) {
            return Err(Error::MomentUndefined {
                order: k.max(0.0) as u32,
                exponent: k + 1.0 + self.min_lower(),
            });
        }
        let ln = self.ln_a1 + (k + 1.0) * self.a2.ln() + self.ln_gamma_lower(1.0 + k)
            - specfun::ln_gamma(self.a3 + 1.0 + k)?;
        Ok(ln.exp())
    }
}

/// Fits `a1 ... a7` to the four moments.
pub fn fit_approximant(m: &GainMoments) -> Result<ApproximantParams> {
    m.validate()?;
    let mu1 = m.mu1;
    let phi2 = m.mu2 / m.mu1;
    let phi3 = m.mu3 / m.mu2;
    let phi4 = m.mu4 / m.mu3;

    let a3 = (4.0 * phi4 - 9.0 * phi3 + 6.0 * phi2 - mu1) / (-phi4 + 3.0 * phi3 - 3.0 * phi2 + mu1);
    let a2 = a3 / 2.0 * (phi4 - 2.0 * phi3 + phi2) + 2.0 * phi4 - 3.0 * phi3 + phi2;
    if !a3.is_finite() || !a2.is_finite() || a2 <= 0.0 {
        return Err(Error::IllConditioned(format!(
            "scale a2 = {a2} (a3 = {a3}) is not positive"
        )));
    }
    let t = (a3 * (phi2 - mu1) + 2.0 * phi2 - mu1) / a2;
    let a6 = t - 3.0;
    let a7_squared = (t - 1.0).powi(2) - 4.0 * mu1 * (a3 + 1.0) / a2;
    let lower = if a7_squared >= 0.0 {
        let a7 = a7_squared.sqrt();
        LowerPair::Real {
            a4: (a6 + a7) / 2.0,
            a5: (a6 - a7) / 2.0,
        }
    } else {
        LowerPair::Conjugate {
            re: a6 / 2.0,
            im: (-a7_squared).sqrt() / 2.0,
        }
    };
    let mut p = ApproximantParams {
        a1: 0.0,
        ln_a1: 0.0,
        a2,
        a3,
        lower,
        a6,
        a7_squared,
        phi2,
        phi3,
        phi4,
    };
    // the density must be integrable at 0 and have a positive
    // integral representation (a3 above the smaller lower parameter)
    if !(p.min_lower() > -1.0) || !(a3 > p.min_lower()) {
        return Err(Error::IllConditioned(format!(
            "fitted a3 = {a3}, a4 = {}, a5 = {} do not define a density",
            p.a4(),
            p.a5()
        )));
    }
    p.ln_a1 = specfun::ln_gamma(a3 + 1.0)? - a2.ln() - p.ln_gamma_lower(1.0);
    p.a1 = p.ln_a1.exp();
    if !p.ln_a1.is_finite() {
        return Err(Error::IllConditioned(format!("normalizer ln a1 = {}", p.ln_a1)));
    }
    Ok(p)
}

/// Convenience: exact moments and fit for `n` elements.
pub fn approximant_for(n_elements: u32) -> Result<ApproximantParams> {
    fit_approximant(&gain_moments(&ChannelConfig::new(n_elements)?))
}

fn check_nonnegative(function: &'static str, x: f64) -> Result<()> {
    if x >= 0.0 {
        Ok(())
    } else {
        Err(crate::error::domain(function, x, "x >= 0"))
    }
}

/// Approximate density of B at `x >= 0`.
pub fn gain_pdf(x: f64, p: &ApproximantParams) -> Result<f64> {
    check_nonnegative("gain_pdf", x)?;
    if x == 0.0 {
        let b = p.min_lower();
        return Ok(if b > 0.0 {
            0.0
        } else if b < 0.0 {
            f64::INFINITY
        } else {
            // leading residue a1 Γ(a4 - a5) / Γ(a3 - a5) with a5 = 0
            let hi = p.a4().re.max(p.a5().re);
            (p.ln_a1 + specfun::ln_gamma(hi)? - specfun::ln_gamma(p.a3)?).exp()
        });
    }
    if x == f64::INFINITY {
        return Ok(0.0);
    }
    let e = specfun::evaluate(&p.pdf_spec(), x / p.a2)?;
    Ok(e.sign * (p.ln_a1 + e.ln_abs).exp())
}

/// Approximate distribution function of B at `x >= 0`, clamped to [0, 1].
pub fn gain_cdf(x: f64, p: &ApproximantParams) -> Result<f64> {
    check_nonnegative("gain_cdf", x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == f64::INFINITY {
        return Ok(1.0);
    }
    let e = specfun::evaluate(&p.cdf_spec(), x / p.a2)?;
    let v = e.sign * (p.ln_a1 + p.a2.ln() + e.ln_abs).exp();
    Ok(v.clamp(0.0, 1.0))
}

/// Exact density of B for a single element: `x K0(x)`.
pub fn double_rayleigh_pdf(x: f64) -> Result<f64> {
    check_nonnegative("double_rayleigh_pdf", x)?;
    if x == 0.0 || x == f64::INFINITY {
        return Ok(0.0);
    }
    Ok((x.ln() + specfun::ln_bessel_k0(x)?).exp())
}

/// Exact distribution function of B for a single element: `1 - x K1(x)`.
pub fn double_rayleigh_cdf(x: f64) -> Result<f64> {
    check_nonnegative("double_rayleigh_cdf", x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == f64::INFINITY {
        return Ok(1.0);
    }
    let tail = (x.ln() + specfun::ln_bessel_k1(x)?).exp();
    Ok((1.0 - tail).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn printed_small_n_values() {
        let pi2 = PI * PI;
        let m1 = gain_moments(&ChannelConfig::new(1).unwrap());
        assert_eq!(m1.as_array(), [PI / 2.0, 4.0, 9.0 * PI / 2.0, 64.0]);
        let m2 = gain_moments(&ChannelConfig::new(2).unwrap());
        assert_eq!(m2.mu1, PI);
        assert!(rel(m2.mu2, 2.0 * (4.0 + pi2 / 4.0)) < 1e-15);
        assert_eq!(m2.mu3, 21.0 * PI);
        assert_eq!(m2.mu4, 224.0 + 18.0 * pi2);
        let m10 = gain_moments(&ChannelConfig::new(10).unwrap());
        assert!((m10.mu2 - 262.07).abs() < 0.01);
    }

    #[test]
    fn general_branches_agree_with_special_ones() {
        // the N >= 3 / N >= 4 expressions reproduce the special cases
        let pi2 = PI * PI;
        for (n, mu3, mu4) in [
            (1.0, 9.0 * PI / 2.0, 64.0),
            (2.0, 21.0 * PI, 224.0 + 18.0 * pi2),
            (3.0, f64::NAN, 480.0 + 90.0 * pi2),
        ] {
            let g3 = n * PI * (4.5 + 6.0 * (n - 1.0) + (n - 1.0) * (n - 2.0) * pi2 / 8.0);
            let g4 = 64.0 * n
                + 48.0 * n * (n - 1.0)
                + 9.0 * n * (n - 1.0) * pi2
                + 6.0 * n * (n - 1.0) * (n - 2.0) * pi2;
            if mu3.is_finite() {
                assert!(rel(g3, mu3) < 1e-15);
            }
            assert!(rel(g4, mu4) < 1e-15);
        }
    }

    #[test]
    fn fit_reproduces_moments_exactly() {
        for n in [1, 2, 3, 4, 5, 8, 16, 32, 64, 128] {
            let m = gain_moments(&ChannelConfig::new(n).unwrap());
            let p = fit_approximant(&m).unwrap();
            assert_eq!(p.phi2, m.mu2 / m.mu1);
            for (k, want) in m.as_array().iter().enumerate() {
                let got = p.moment(k as f64 + 1.0).unwrap();
                assert!(rel(got, *want) < 1e-9, "N={n} k={} got={got} want={want}", k + 1);
            }
            assert!((p.moment(0.0).unwrap() - 1.0).abs() < 1e-10, "N={n}");
        }
    }

    #[test]
    fn lower_pair_kinds() {
        for n in 1..=3 {
            let p = approximant_for(n).unwrap();
            assert!(matches!(p.lower, LowerPair::Conjugate { .. }), "N={n}");
            assert!(p.a7_squared < 0.0);
        }
        let p = approximant_for(4).unwrap();
        let a7 = p.a7().unwrap();
        assert!(a7 >= 0.0);
        assert!((p.a4().re - p.a5().re - a7).abs() < 1e-12);
        // reference fit
        assert!((p.a2 - 0.99905).abs() < 1e-4);
        assert!((p.a3 - 7.98264).abs() < 1e-4);
        assert!((p.a4().re - 6.73000).abs() < 1e-4);
        assert!((p.a5().re - 6.30832).abs() < 1e-4);
        assert!(rel(p.a1, 0.0102418) < 1e-4);
    }

    #[test]
    fn large_n_keeps_log_normalizer() {
        let p = approximant_for(128).unwrap();
        assert_eq!(p.a1, 0.0);
        assert!(p.ln_a1.is_finite() && p.ln_a1 < -800.0);
    }

    #[test]
    fn corrupted_moments_are_rejected() {
        let mut m = gain_moments(&ChannelConfig::new(4).unwrap());
        m.mu4 /= 10.0;
        assert!(matches!(fit_approximant(&m), Err(Error::IllConditioned(_))));
        let mut m = gain_moments(&ChannelConfig::new(4).unwrap());
        m.mu2 = 0.5 * m.mu1 * m.mu1;
        assert!(matches!(fit_approximant(&m), Err(Error::IllConditioned(_))));
    }

    #[test]
    fn zero_elements_rejected() {
        assert!(ChannelConfig::new(0).is_err());
    }

    #[test]
    fn boundary_values() {
        let p = approximant_for(4).unwrap();
        assert_eq!(gain_cdf(0.0, &p).unwrap(), 0.0);
        assert_eq!(gain_pdf(0.0, &p).unwrap(), 0.0);
        assert!((gain_cdf(1e4, &p).unwrap() - 1.0).abs() < 1e-12);
        assert!(gain_pdf(-1.0, &p).is_err());
        assert!(double_rayleigh_cdf(0.0).unwrap() == 0.0);
        assert!((double_rayleigh_cdf(60.0).unwrap() - 1.0).abs() < 1e-15);
    }
}
