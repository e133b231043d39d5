//! Gamma function for real and complex arguments.
//!
//! Both paths shift the argument upward until `Re(z) >= 15` and then apply
//! the Stirling series with eight Bernoulli corrections; the truncation error
//! at `|z| = 15` is below 1e-20. Reflection covers `Re(z) < 1/2`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};

const STIRLING_SHIFT: f64 = 15.0;
const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

/// Largest argument for which Γ(x) is representable as an f64.
pub const GAMMA_MAX_ARG: f64 = 171.624_376_956_302_7;

// B_{2k} / (2k (2k - 1)), k = 1..8
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

fn stirling_series(w: f64) -> f64 {
    STIRLING.iter().rev().fold(0.0, |acc, &c| acc * w + c)
}

fn stirling_series_c(w: Complex64) -> Complex64 {
    STIRLING
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * w + c)
}

/// `ln Γ(y)` for `y >= STIRLING_SHIFT`.
fn ln_gamma_stirling(y: f64) -> f64 {
    let inv = 1.0 / y;
    (y - 0.5) * y.ln() - y + HALF_LN_TWO_PI + inv * stirling_series(inv * inv)
}

/// sin(πx) with exact zeros at the integers.
pub fn sin_pi(x: f64) -> f64 {
    let n = x.round();
    let s = (PI * (x - n)).sin();
    if (n as i64) % 2 == 0 {
        s
    } else {
        -s
    }
}

/// Γ(x) for real x.
///
/// Relative error stays below 1e-13 on `[1e-3, 170]`. Non-positive integers
/// are poles; arguments above [`GAMMA_MAX_ARG`] overflow.
pub fn gamma(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(domain("gamma", x, "x must not be NaN"));
    }
    if x <= 0.0 && x == x.floor() {
        return Err(Error::Pole(x));
    }
    if x > GAMMA_MAX_ARG {
        return Err(Error::Overflow {
            function: "gamma",
            value: x,
        });
    }
    if x < 0.5 {
        // Γ(x) Γ(1-x) = π / sin(πx)
        let s = sin_pi(x);
        let ln_abs = PI.ln() - s.abs().ln() - ln_gamma_pos(1.0 - x);
        return Ok(s.signum() * ln_abs.exp());
    }
    let mut y = x;
    let mut prod = 1.0;
    while y < STIRLING_SHIFT {
        prod *= y;
        y += 1.0;
    }
    Ok(ln_gamma_stirling(y).exp() / prod)
}

fn ln_gamma_pos(x: f64) -> f64 {
    let mut y = x;
    let mut prod = 1.0;
    while y < STIRLING_SHIFT {
        prod *= y;
        y += 1.0;
    }
    ln_gamma_stirling(y) - prod.ln()
}

/// ln Γ(x) for x > 0; usable far beyond the overflow point of [`gamma`].
pub fn ln_gamma(x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(domain("ln_gamma", x, "x > 0"));
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    Ok(ln_gamma_pos(x))
}

/// ln sin(πz) on some branch; stable for large |Im z|.
fn ln_sin_pi(z: Complex64) -> Complex64 {
    let n = z.re.round();
    let w = Complex64::new(PI * (z.re - n), PI * z.im);
    let i = Complex64::i();
    let ln_2i = Complex64::new(2.0_f64.ln(), PI / 2.0);
    let base = if w.im > 40.0 {
        // sin w = e^{-iw} (e^{2iw} - 1) / (2i)
        -i * w + ((2.0 * i * w).exp() - 1.0).ln() - ln_2i
    } else if w.im < -40.0 {
        // sin w = e^{iw} (1 - e^{-2iw}) / (2i)
        i * w + (1.0 - (-2.0 * i * w).exp()).ln() - ln_2i
    } else {
        w.sin().ln()
    };
    if (n as i64) % 2 == 0 {
        base
    } else {
        base + Complex64::new(0.0, PI)
    }
}

/// ln Γ(z) for complex z, defined up to multiples of 2πi.
///
/// Poles return a real part of `+inf`, so `exp(-ln_gamma_complex(z))` is the
/// reciprocal Gamma function with its zeros intact.
pub fn ln_gamma_complex(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        if z.im == 0.0 && z.re == z.re.floor() {
            return Complex64::new(f64::INFINITY, 0.0);
        }
        return Complex64::new(PI.ln(), 0.0) - ln_sin_pi(z) - ln_gamma_complex(1.0 - z);
    }
    let mut y = z;
    let mut prod = Complex64::new(1.0, 0.0);
    let mut ln_prod = Complex64::new(0.0, 0.0);
    while y.re < STIRLING_SHIFT {
        prod *= y;
        y += 1.0;
        if prod.norm() > 1e250 {
            ln_prod += prod.ln();
            prod = Complex64::new(1.0, 0.0);
        }
    }
    ln_prod += prod.ln();
    let inv = y.inv();
    (y - 0.5) * y.ln() - y + HALF_LN_TWO_PI + inv * stirling_series_c(inv * inv) - ln_prod
}
