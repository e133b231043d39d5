//! Modified Bessel functions K₀, K₁ and I₋₁/₂.
//!
//! K₀ and K₁ use the ascending series for `x <= 2` and Steed's continued
//! fraction (Temme's CF2) above, where the result is produced in log form so
//! that the exponential factor never underflows before the caller sees it.

use std::f64::consts::{LN_2, PI};

use crate::error::{domain, Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_LIMIT: f64 = 2.0;
const CF_EPS: f64 = 1e-16;
const CF_MAX_ITER: usize = 10_000;

fn check_positive(function: &'static str, x: f64) -> Result<()> {
    if x > 0.0 {
        Ok(())
    } else {
        Err(domain(function, x, "x > 0"))
    }
}

/// K₀ and K₁ by the ascending series, `0 < x <= 2`.
fn k01_series(x: f64) -> (f64, f64) {
    let y = 0.25 * x * x;
    let ln_half = (0.5 * x).ln();

    // K0 = -(ln(x/2) + γ) I0 + Σ H_k y^k / (k!)^2
    // K1 = 1/x + ln(x/2) I1 - (x/4) Σ (ψ(k+1) + ψ(k+2)) y^k / (k! (k+1)!)
    let mut i0 = 1.0;
    let mut i1 = 1.0;
    let mut s0 = 0.0;
    let mut s1 = 1.0 - 2.0 * EULER_GAMMA;
    let mut t0 = 1.0; // y^k / (k!)^2
    let mut t1 = 1.0; // y^k / (k! (k+1)!)
    let mut harmonic = 0.0;
    let mut psi_k1 = -EULER_GAMMA; // ψ(k+1)
    for k in 1..60 {
        let kf = k as f64;
        t0 *= y / (kf * kf);
        t1 *= y / (kf * (kf + 1.0));
        harmonic += 1.0 / kf;
        psi_k1 += 1.0 / kf;
        let psi_k2 = psi_k1 + 1.0 / (kf + 1.0);
        i0 += t0;
        i1 += t1;
        s0 += harmonic * t0;
        s1 += (psi_k1 + psi_k2) * t1;
        if t0 < 1e-18 * i0 && t1 < 1e-18 * i1 {
            break;
        }
    }
    let i1 = 0.5 * x * i1;
    let k0 = -(ln_half + EULER_GAMMA) * i0 + s0;
    let k1 = 1.0 / x + ln_half * i1 - 0.25 * x * s1;
    (k0, k1)
}

/// ln K₀(x) and the ratio K₁(x)/K₀(x) by Steed's method, `x > 2`.
fn k01_steed(x: f64) -> Result<(f64, f64)> {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    let mut converged = false;
    for i in 2..CF_MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < CF_EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Convergence {
            method: "bessel_k continued fraction",
            residual: f64::NAN,
        });
    }
    let h = a1 * h;
    let ln_k0 = 0.5 * (PI / (2.0 * x)).ln() - x - s.ln();
    let ratio = (x + 0.5 - h) / x;
    Ok((ln_k0, ratio))
}

/// K₀(x) for x > 0; relative error below 1e-13.
pub fn bessel_k0(x: f64) -> Result<f64> {
    check_positive("bessel_k0", x)?;
    if x == f64::INFINITY {
        return Ok(0.0);
    }
    if x <= SERIES_LIMIT {
        return Ok(k01_series(x).0);
    }
    Ok(k01_steed(x)?.0.exp())
}

/// ln K₀(x) for x > 0, finite far past the point where K₀ underflows.
pub fn ln_bessel_k0(x: f64) -> Result<f64> {
    check_positive("ln_bessel_k0", x)?;
    if x == f64::INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    if x <= SERIES_LIMIT {
        return Ok(k01_series(x).0.ln());
    }
    Ok(k01_steed(x)?.0)
}

/// K₁(x) for x > 0.
pub fn bessel_k1(x: f64) -> Result<f64> {
    Ok(ln_bessel_k1(x)?.exp())
}

/// ln K₁(x) for x > 0.
pub fn ln_bessel_k1(x: f64) -> Result<f64> {
    check_positive("ln_bessel_k1", x)?;
    if x == f64::INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    if x <= SERIES_LIMIT {
        return Ok(k01_series(x).1.ln());
    }
    let (ln_k0, ratio) = k01_steed(x)?;
    Ok(ln_k0 + ratio.ln())
}

/// ln cosh(x), exact for large |x|.
pub fn ln_cosh(x: f64) -> f64 {
    let x = x.abs();
    x - LN_2 + (-2.0 * x).exp().ln_1p()
}

/// I₋₁/₂(z) = √(2/(πz)) cosh z for z > 0.
pub fn bessel_i_neg_half(z: f64) -> Result<f64> {
    check_positive("bessel_i_neg_half", z)?;
    let v = (0.5 * (2.0 / (PI * z)).ln() + ln_cosh(z)).exp();
    if v.is_infinite() {
        return Err(Error::Overflow {
            function: "bessel_i_neg_half",
            value: z,
        });
    }
    Ok(v)
}

/// ln(e^{-a} I₋₁/₂(b)) for b > 0, evaluated without forming either factor.
pub fn log_exp_bessel(a: f64, b: f64) -> Result<f64> {
    check_positive("log_exp_bessel", b)?;
    Ok(-a + 0.5 * (2.0 / (PI * b)).ln() + ln_cosh(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    // high-precision references for K0 and K1
    const TABLE: [(f64, f64, f64); 10] = [
        (0.01, 4.721_244_730_161_095, 99.973_894_118_296_25),
        (0.5, 0.924_419_071_227_665_9, 1.656_441_120_003_301),
        (1.0, 0.421_024_438_240_708_3, 0.601_907_230_197_234_6),
        (2.0, 0.113_893_872_749_533_4, 0.139_865_881_816_522_4),
        (2.5, 0.062_347_553_200_366_19, 0.073_890_816_347_747_06),
        (5.0, 3.691_098_334_042_594e-3, 4.044_613_445_452_164e-3),
        (10.0, 1.778_006_231_616_765e-5, 1.864_877_345_382_558_5e-5),
        (30.0, 2.132_477_496_463_056_4e-14, 2.167_732_001_891_549_4e-14),
        (50.0, 3.410_167_749_789_495_5e-23, 3.444_102_226_717_555_6e-23),
        (100.0, 4.656_628_229_175_902e-45, 4.679_853_735_636_909e-45),
    ];

    #[test]
    fn reference_values() {
        for (x, k0, k1) in TABLE {
            assert!(rel(bessel_k0(x).unwrap(), k0) < 1e-13, "K0({x})");
            assert!(rel(bessel_k1(x).unwrap(), k1) < 1e-13, "K1({x})");
            assert!((ln_bessel_k0(x).unwrap() - k0.ln()).abs() < 1e-13);
        }
    }

    /// K₀(x) = ∫₀^∞ exp(-x cosh t) dt by the trapezoid rule.
    fn k0_oracle(x: f64) -> f64 {
        let h = 1e-3_f64;
        let mut s = 0.5;
        let mut t = h;
        loop {
            let v = (-x * (t.cosh() - 1.0)).exp();
            s += v;
            if v < 1e-20 {
                break;
            }
            t += h;
        }
        s * h * (-x).exp()
    }

    #[test]
    fn matches_integral_representation() {
        for &x in &[0.05, 0.3, 1.0, 1.99, 2.01, 3.7, 10.0, 25.0] {
            let want = k0_oracle(x);
            assert!(rel(bessel_k0(x).unwrap(), want) < 1e-10, "x={x}");
        }
        assert!((bessel_k0(1.0).unwrap() - 0.421_024).abs() < 1e-6);
        assert!((bessel_k0(10.0).unwrap() - 1.78e-5).abs() < 1e-7);
    }

    #[test]
    fn log_variant_beyond_underflow() {
        // K0(x) ~ sqrt(π/(2x)) e^{-x} (1 - 1/(8x))
        let x = 2000.0;
        let want = 0.5 * (PI / (2.0 * x)).ln() - x + (1.0 - 1.0 / (8.0 * x)).ln();
        assert!((ln_bessel_k0(x).unwrap() - want).abs() < 1e-7);
        assert_eq!(bessel_k0(x).unwrap(), 0.0);
    }

    #[test]
    fn small_argument_divergence() {
        let a = bessel_k0(1e-8).unwrap();
        let b = bessel_k0(1e-16).unwrap();
        assert!(b > a && a > 18.0);
        // K0(x) ≈ -ln(x/2) - γ
        assert!((b - (-(0.5e-16_f64).ln() - EULER_GAMMA)).abs() < 1e-12);
    }

    #[test]
    fn monotone_and_positive() {
        let mut prev = f64::INFINITY;
        for i in 1..=5000 {
            let x = i as f64 * 0.01;
            let v = bessel_k0(x).unwrap();
            assert!(v > 0.0 && v < prev, "x={x}");
            prev = v;
        }
    }

    #[test]
    fn domain_errors() {
        assert!(bessel_k0(0.0).is_err());
        assert!(bessel_k0(-1.0).is_err());
        assert!(bessel_k0(f64::NAN).is_err());
        assert!(bessel_i_neg_half(0.0).is_err());
        assert!(log_exp_bessel(1.0, -2.0).is_err());
    }

    #[test]
    fn i_neg_half() {
        // series oracle: I_{-1/2}(z) = Σ (z/2)^{2k-1/2} / (k! Γ(k+1/2))
        let z: f64 = 1.0;
        let mut s = 0.0;
        let mut g = PI.sqrt(); // Γ(1/2)
        let mut fact = 1.0;
        for k in 0..30 {
            if k > 0 {
                fact *= k as f64;
                g *= k as f64 - 0.5;
            }
            s += (0.5 * z).powf(2.0 * k as f64 - 0.5) / (fact * g);
        }
        assert!(rel(bessel_i_neg_half(z).unwrap(), s) < 1e-14);
        assert!(rel(s, 1.231_200_214_592_967_4) < 1e-14);
        for &z in &[1e-3_f64, 0.7, 5.0, 40.0, 300.0] {
            let lhs = bessel_i_neg_half(z).unwrap() * (PI * z / 2.0).sqrt();
            assert!(rel(lhs, z.cosh()) < 1e-13, "z={z}");
        }
        assert!(bessel_i_neg_half(800.0).is_err());
    }

    #[test]
    fn fused_log_is_finite() {
        let v = log_exp_bessel(800.0, 800.0).unwrap();
        let want = (0.5 * (2.0 / (PI * 800.0)).sqrt()).ln();
        assert!((v - want).abs() < 1e-12);
        let direct = ((-3.0_f64).exp() * bessel_i_neg_half(2.0).unwrap()).ln();
        assert!((log_exp_bessel(3.0, 2.0).unwrap() - direct).abs() < 1e-14);
    }
}
