//! Mellin–Barnes quadrature of the Meijer-G defining integral.
//!
//! Independent of [`super::meijer`]: it integrates the Gamma-function ratio
//! of the definition directly along a vertical line `Re s = c` that separates
//! the poles of `Γ(b_j + s)` from those of `Γ(1 - a_j - s)`. The line is put
//! through the real saddle of `|M(s) z^{-s}|`, where the integrand is positive
//! at `t = 0` and decays like a Gaussian and then like `e^{-π|t|/2}`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::gamma::ln_gamma_complex;
use super::meijer::MeijerGSpec;
use crate::error::{Error, Result};

const TOL: f64 = 1e-12;
const MAX_HALVINGS: usize = 16;
const CUTOFF: f64 = 50.0;

/// Result of one oracle run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MellinBarnes {
    pub ln_abs: f64,
    pub sign: f64,
    /// Abscissa of the vertical contour.
    pub contour: f64,
    /// Relative change produced by the final step halving.
    pub halving_change: f64,
    /// Integrand evaluations used.
    pub evaluations: usize,
}

impl MellinBarnes {
    pub fn value(&self) -> f64 {
        self.sign * self.ln_abs.exp()
    }
}

/// ln M(s) for the spec's Gamma-ratio.
fn ln_mellin(spec: &MeijerGSpec, s: Complex64) -> Complex64 {
    let n = spec.n();
    let one = Complex64::new(1.0, 0.0);
    let mut v = Complex64::new(0.0, 0.0);
    for (j, b) in spec.lower().iter().enumerate() {
        if j < 2 {
            v += ln_gamma_complex(b + s);
        } else {
            v -= ln_gamma_complex(one - b - s);
        }
    }
    for (j, &a) in spec.upper().iter().enumerate() {
        if j < n {
            v += ln_gamma_complex(one - a - s);
        } else {
            v -= ln_gamma_complex(a + s);
        }
    }
    v
}

/// Admissible open interval for the contour abscissa.
fn strip(spec: &MeijerGSpec) -> Result<(f64, f64)> {
    let left = spec.lower()[..2]
        .iter()
        .map(|b| -b.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let right = spec.upper()[..spec.n()]
        .iter()
        .map(|a| 1.0 - a)
        .fold(f64::INFINITY, f64::min);
    if left >= right {
        return Err(Error::ContourPlacement(format!(
            "pole sets of {spec} overlap: need {left} < Re s < {right}"
        )));
    }
    Ok((left, right))
}

/// Minimizes the convex function `phi` on the open interval (lo, hi).
fn saddle(phi: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let (mut a, mut b) = if hi.is_finite() {
        let pad = 1e-9 * (hi - lo).max(1.0);
        (lo + pad, hi - pad)
    } else {
        // bracket by doubling away from the left boundary
        let mut step = 1.0;
        let mut prev = phi(lo + step);
        loop {
            let next = phi(lo + 2.0 * step);
            if next > prev || step > 1e6 {
                break;
            }
            prev = next;
            step *= 2.0;
        }
        (lo + 1e-9, lo + 4.0 * step)
    };
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (phi(x1), phi(x2));
    for _ in 0..200 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = phi(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = phi(x2);
        }
        if b - a < 1e-12 * (1.0 + a.abs()) {
            break;
        }
    }
    0.5 * (a + b)
}

/// Full oracle run with diagnostics.
pub fn mellin_barnes_detail(spec: &MeijerGSpec, z: f64) -> Result<MellinBarnes> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(crate::error::domain("mellin_barnes_oracle", z, "0 < z < inf"));
    }
    let (lo, hi) = strip(spec)?;
    let lz = z.ln();
    let phi = |c: f64| (ln_mellin(spec, Complex64::new(c, 0.0)) - c * lz).re;
    let mut c = saddle(&phi, lo, hi);
    // keep a little room from the nearest pole
    let margin = 0.02_f64.min(0.25 * (hi - lo));
    c = c.max(lo + margin);
    if hi.is_finite() {
        c = c.min(hi - margin);
    }
    let peak = phi(c);
    let dist = (c - lo).min(hi - c);

    let dc = 1e-4 * dist.min(1.0);
    let curv = (phi(c + dc) - 2.0 * peak + phi(c - dc)) / (dc * dc);
    let width = if curv > 0.0 { curv.sqrt().recip() } else { 1.0 };
    let mut h = 0.5 * width.min(dist).min(1.0);

    let mut evaluations = 0usize;
    let mut g = |t: f64| -> f64 {
        evaluations += 1;
        let s = Complex64::new(c, t);
        (ln_mellin(spec, s) - s * lz - peak).exp().re
    };
    let ln_g_re = |t: f64| {
        let s = Complex64::new(c, t);
        (ln_mellin(spec, s) - s * lz).re - peak
    };
    // sum of Re g over t = (k + offset) h, k >= 0, until the envelope is negligible
    let mut sweep = |h: f64, offset: f64| -> f64 {
        let mut s = 0.0;
        let mut quiet = 0;
        let mut k = 0usize;
        loop {
            let t = (k as f64 + offset) * h;
            if ln_g_re(t) < -CUTOFF {
                quiet += 1;
                if quiet >= 8 {
                    break;
                }
            } else {
                quiet = 0;
                let w = if k == 0 && offset == 0.0 { 0.5 } else { 1.0 };
                s += w * g(t);
            }
            k += 1;
            if k > 50_000_000 {
                break;
            }
        }
        s
    };
    let mut sum = sweep(h, 0.0);
    let mut estimate = sum * h;
    let mut change = f64::INFINITY;
    for _ in 0..MAX_HALVINGS {
        sum += sweep(h, 0.5);
        h *= 0.5;
        let next = sum * h;
        change = ((next - estimate) / next).abs();
        estimate = next;
        if change < TOL {
            break;
        }
    }
    if !(change < 1e-9) {
        return Err(Error::Convergence {
            method: "mellin_barnes_oracle",
            residual: change,
        });
    }
    // G = e^{peak} / π ∫₀^∞ Re g(t) dt
    let value = estimate / PI;
    Ok(MellinBarnes {
        ln_abs: value.abs().ln() + peak,
        sign: value.signum(),
        contour: c,
        halving_change: change,
        evaluations,
    })
}

/// Meijer-G value from the Mellin–Barnes integral.
pub fn mellin_barnes_oracle(spec: &MeijerGSpec, z: f64) -> Result<f64> {
    Ok(mellin_barnes_detail(spec, z)?.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::incgamma::{erfc, gamma_p};
    use crate::specfun::meijer::{evaluate, Shape};

    fn r(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn elementary_reduction() {
        // G2012(z | b2; b1, b2) = z^{b1} e^{-z}
        let spec = MeijerGSpec::g2012(2.5, r(0.7), r(2.5)).unwrap();
        for &z in &[1e-3_f64, 0.2, 1.0, 5.0, 60.0, 900.0] {
            let got = mellin_barnes_detail(&spec, z).unwrap();
            let want = 0.7 * z.ln() - z;
            assert!((got.ln_abs - want).abs() < 1e-10, "z={z} {got:?}");
        }
        // G2012(z | 1; 0, 1/2) = √π erfc(√z)
        let spec = MeijerGSpec::g2012(1.0, r(0.0), r(0.5)).unwrap();
        for &z in &[0.01_f64, 1.0, 10.0] {
            let want = PI.sqrt() * erfc(z.sqrt());
            let got = mellin_barnes_oracle(&spec, z).unwrap();
            assert!(((got - want) / want).abs() < 1e-10, "z={z}");
        }
        // the integrated shape is the lower incomplete gamma
        let spec = MeijerGSpec::g2123(2.5, r(0.7), r(2.5)).unwrap();
        let g17 = crate::specfun::gamma::gamma(1.7).unwrap();
        for &z in &[0.01, 1.0, 10.0] {
            let want = g17 * gamma_p(1.7, z).unwrap();
            let got = mellin_barnes_oracle(&spec, z).unwrap();
            assert!(((got - want) / want).abs() < 1e-10, "z={z}");
        }
    }

    #[test]
    fn halving_self_test() {
        let spec = MeijerGSpec::g2012(7.98, r(6.73), r(6.31)).unwrap();
        let got = mellin_barnes_detail(&spec, 6.0).unwrap();
        assert!(got.halving_change < 1e-11, "{got:?}");
    }

    #[test]
    fn agrees_with_evaluator() {
        let b = Complex64::new(0.788, 0.269);
        let specs = [
            MeijerGSpec::g2012(7.98, r(6.73), r(6.31)).unwrap(),
            MeijerGSpec::g2123(7.98, r(6.73), r(6.31)).unwrap(),
            MeijerGSpec::g2012(1.082, b, b.conj()).unwrap(),
            MeijerGSpec::g2123(1.082, b, b.conj()).unwrap(),
        ];
        for spec in &specs {
            for &z in &[0.01, 0.3, 2.0, 9.0, 40.0, 300.0] {
                let o = mellin_barnes_detail(spec, z).unwrap();
                let e = evaluate(spec, z).unwrap();
                assert!((o.ln_abs - e.ln_abs).abs() < 1e-9, "{spec} z={z} {o:?} {e:?}");
            }
        }
    }

    #[test]
    fn overlapping_poles_are_reported() {
        // Γ(b + s) needs Re s > -b, Γ(-s) needs Re s < 0
        let spec = MeijerGSpec::g2123(0.5, r(-1.5), r(2.0)).unwrap();
        assert_eq!(spec.shape(), Shape::G2123);
        assert!(matches!(
            mellin_barnes_oracle(&spec, 1.0),
            Err(Error::ContourPlacement(_))
        ));
    }
}
