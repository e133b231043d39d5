//! Regularized incomplete gamma functions and the error function.
//!
//! The parameter may be complex (the Meijer-G quadrature needs it when the
//! fitted lower parameters form a conjugate pair); the argument is real.
//! Below `x < Re(s) + 1` the power series for P converges quickly, above it
//! the Legendre continued fraction for Q is used (modified Lentz).

use std::f64::consts::SQRT_2;

use num_complex::Complex64;

use super::gamma::ln_gamma_complex;
use crate::error::{domain, Error, Result};

const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
const MAX_ITER: usize = 100_000;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// ln of the series sum Σ x^k / ((s+1)...(s+k)); P = x^s e^{-x} / Γ(s+1) · sum.
fn series_sum(s: Complex64, x: f64) -> Result<Complex64> {
    let mut term = c(1.0);
    let mut sum = c(1.0);
    for k in 1..MAX_ITER {
        term *= x / (s + k as f64);
        sum += term;
        if term.norm() < EPS * sum.norm() {
            return Ok(sum);
        }
    }
    Err(Error::Convergence {
        method: "incomplete gamma series",
        residual: term.norm() / sum.norm(),
    })
}

/// Continued fraction h with Q = x^s e^{-x} / Γ(s) · h.
fn continued_fraction(s: Complex64, x: f64) -> Result<Complex64> {
    let tiny = c(TINY);
    let mut b = c(x + 1.0) - s;
    let mut cc = c(1.0 / TINY);
    let mut d = b.inv();
    let mut h = d;
    for i in 1..MAX_ITER {
        let fi = i as f64;
        let an = -fi * (c(fi) - s);
        b += 2.0;
        d = an * d + b;
        if d.norm() < TINY {
            d = tiny;
        }
        cc = b + an / cc;
        if cc.norm() < TINY {
            cc = tiny;
        }
        d = d.inv();
        let del = d * cc;
        h *= del;
        if (del - 1.0).norm() < EPS {
            return Ok(h);
        }
    }
    Err(Error::Convergence {
        method: "incomplete gamma continued fraction",
        residual: f64::NAN,
    })
}

fn check(s: Complex64, x: f64) -> Result<()> {
    if !(x >= 0.0) {
        return Err(domain("incomplete_gamma", x, "x >= 0"));
    }
    if !(s.re > 0.0) {
        return Err(domain("incomplete_gamma", s.re, "Re(s) > 0"));
    }
    Ok(())
}

/// Complex logarithms of (P(s, x), Q(s, x)).
///
/// Either component may have real part `-inf` when the value underflows.
pub fn ln_gamma_pq(s: Complex64, x: f64) -> Result<(Complex64, Complex64)> {
    check(s, x)?;
    if x == 0.0 {
        return Ok((c(f64::NEG_INFINITY), c(0.0)));
    }
    if x == f64::INFINITY {
        return Ok((c(0.0), c(f64::NEG_INFINITY)));
    }
    let prefix = s * x.ln() - x;
    if x < s.re + 1.0 {
        let ln_p = prefix - ln_gamma_complex(s + 1.0) + series_sum(s, x)?.ln();
        let ln_q = (c(1.0) - ln_p.exp()).ln();
        Ok((ln_p, ln_q))
    } else {
        let ln_q = prefix - ln_gamma_complex(s) + continued_fraction(s, x)?.ln();
        let ln_p = (c(1.0) - ln_q.exp()).ln();
        Ok((ln_p, ln_q))
    }
}

/// Regularized lower incomplete gamma P(s, x) for real s > 0.
pub fn gamma_p(s: f64, x: f64) -> Result<f64> {
    Ok(ln_gamma_pq(c(s), x)?.0.exp().re)
}

/// Regularized upper incomplete gamma Q(s, x) for real s > 0.
pub fn gamma_q(s: f64, x: f64) -> Result<f64> {
    Ok(ln_gamma_pq(c(s), x)?.1.exp().re)
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let q = |y: f64| ln_gamma_pq(c(0.5), y * y).map_or(f64::NAN, |v| v.1.exp().re);
    if x >= 0.0 {
        q(x)
    } else {
        2.0 - q(-x)
    }
}

/// Standard normal CDF Φ(x).
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}
