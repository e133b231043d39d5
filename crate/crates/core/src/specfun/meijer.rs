//! Meijer G-function for the two shapes used by the gain approximant.
//!
//! Convention: `G^{m,n}_{p,q}(z)` is the inverse Mellin transform of
//!
//! ```text
//! Π_{j<=m} Γ(b_j + s) Π_{j<=n} Γ(1 - a_j - s)
//! ---------------------------------------------  z^{-s}
//! Π_{j>n} Γ(a_j + s) Π_{j>m} Γ(1 - b_j - s)
//! ```
//!
//! so `G2012(z | a; b1, b2)` has Mellin transform `Γ(b1+s) Γ(b2+s) / Γ(a+s)`
//! and `G2123(z | 1, a+1; b1+1, b2+1, 0)` is its running integral
//! `∫₀^z G2012(t) dt`. Only that integrated form of G2123 is supported.
//!
//! Three strategies are tried in order:
//!
//! 1. the residue series over the two lower-pole families, accepted when the
//!    cancellation between families costs fewer than four digits;
//! 2. the large-z asymptotic expansion, accepted when its smallest term is
//!    below 1e-14 of the sum;
//! 3. trapezoidal quadrature of the Laplace-type representation
//!    `G2012 = z^{b2} e^{-z} / Γ(a-b1) ∫ e^{-zv} v^{a-b1-1} (1+v)^{b2-a} dv`
//!    (and its incomplete-gamma counterpart for G2123), after the substitution
//!    `v = e^u`.
//!
//! The lower parameters are either both real or a complex-conjugate pair; the
//! function value is real in both cases. Everything runs in the log domain.

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use super::gamma::ln_gamma_complex;
use super::incgamma::ln_gamma_pq;
use crate::error::{Error, Result};

/// Which of the two supported parameter shapes a spec describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Shape {
    /// `G^{2,0}_{1,2}(z | a; b1, b2)`
    G2012,
    /// `G^{2,1}_{2,3}(z | 1, a+1; b1+1, b2+1, 0)`
    G2123,
}

/// Parameter lists of a Meijer G-function.
#[derive(Debug, Clone, PartialEq)]
pub struct MeijerGSpec {
    shape: Shape,
    upper: Vec<f64>,
    lower: Vec<Complex64>,
}

/// Strategy that produced an [`Evaluation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    Series,
    Asymptotic,
    Quadrature,
    /// Residue series after nudging one lower parameter off a coincident pole.
    PerturbedSeries,
}

/// A Meijer-G value in sign/log-magnitude form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub ln_abs: f64,
    pub sign: f64,
    pub method: Method,
}

impl Evaluation {
    pub fn value(&self) -> f64 {
        self.sign * self.ln_abs.exp()
    }
}

/// Lower-parameter difference below which two pole families are treated as
/// coincident (up to an integer shift).
const COINCIDENT_TOL: f64 = 1e-9;
/// Offset applied to the second lower parameter when nothing else works.
const PERTURBATION: f64 = 1e-6;

const SERIES_MAX_Z: f64 = 60.0;
const SERIES_MAX_TERMS: usize = 2000;
const SERIES_MAX_CANCELLATION: f64 = 1e4;
const ASYMPTOTIC_TOL: f64 = 1e-14;
const QUAD_TOL: f64 = 1e-13;
const QUAD_MAX_HALVINGS: usize = 12;
/// Integrand values this far (in natural log) below the peak are dropped.
const QUAD_CUTOFF: f64 = 44.0;

impl MeijerGSpec {
    /// Validates raw parameter lists.
    ///
    /// G2012 takes `upper = [a]`, `lower = [b1, b2]`; G2123 takes
    /// `upper = [1, a+1]`, `lower = [b1+1, b2+1, 0]`.
    pub fn new(shape: Shape, upper: Vec<f64>, lower: Vec<Complex64>) -> Result<Self> {
        let (np, nq) = match shape {
            Shape::G2012 => (1, 2),
            Shape::G2123 => (2, 3),
        };
        if upper.len() != np || lower.len() != nq {
            return Err(Error::InvalidSpec(format!(
                "{shape:?} needs {np} upper and {nq} lower parameters, got {} and {}",
                upper.len(),
                lower.len()
            )));
        }
        if upper.iter().any(|v| !v.is_finite())
            || lower.iter().any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::InvalidSpec("parameters must be finite".into()));
        }
        if shape == Shape::G2123 && (upper[0] != 1.0 || lower[2] != Complex64::new(0.0, 0.0)) {
            return Err(Error::InvalidSpec(
                "G2123 is supported only as the running integral of G2012 (upper[0] = 1, lower[2] = 0)"
                    .into(),
            ));
        }
        let (b1, b2) = (lower[0], lower[1]);
        let both_real = b1.im == 0.0 && b2.im == 0.0;
        let conjugate = (b1 - b2.conj()).norm() <= 1e-12 * b1.norm().max(1.0);
        if !both_real && !conjugate {
            return Err(Error::InvalidSpec(format!(
                "lower parameters {b1} and {b2} must be real or a conjugate pair"
            )));
        }
        Ok(MeijerGSpec {
            shape,
            upper,
            lower,
        })
    }

    /// `G2012(· | a; b1, b2)`.
    pub fn g2012(a: f64, b1: Complex64, b2: Complex64) -> Result<Self> {
        Self::new(Shape::G2012, vec![a], vec![b1, b2])
    }

    /// `G2123(· | 1, a+1; b1+1, b2+1, 0)`, the running integral of `g2012(a, b1, b2)`.
    pub fn g2123(a: f64, b1: Complex64, b2: Complex64) -> Result<Self> {
        Self::new(
            Shape::G2123,
            vec![1.0, a + 1.0],
            vec![b1 + 1.0, b2 + 1.0, Complex64::new(0.0, 0.0)],
        )
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn lower(&self) -> &[Complex64] {
        &self.lower
    }

    /// Number of leading upper parameters that enter as Γ(1 - a - s).
    pub(crate) fn n(&self) -> usize {
        match self.shape {
            Shape::G2012 => 0,
            Shape::G2123 => 1,
        }
    }

    fn kernel(&self) -> Kernel {
        match self.shape {
            Shape::G2012 => Kernel {
                a: self.upper[0],
                b: [self.lower[0], self.lower[1]],
            },
            Shape::G2123 => Kernel {
                a: self.upper[1] - 1.0,
                b: [self.lower[0] - 1.0, self.lower[1] - 1.0],
            },
        }
    }
}

impl fmt::Display for MeijerGSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}(upper {:?}; lower [", self.shape, self.upper)?;
        for (i, b) in self.lower.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            if b.im == 0.0 {
                write!(f, "{}", b.re)?;
            } else {
                write!(f, "{}{:+}i", b.re, b.im)?;
            }
        }
        write!(f, "])")
    }
}

/// `G2012(z | a; b1, b2)` parameters underlying either shape.
#[derive(Debug, Clone, Copy)]
struct Kernel {
    a: f64,
    b: [Complex64; 2],
}

impl Kernel {
    fn coincident(&self) -> bool {
        let d = self.b[0] - self.b[1];
        (d - d.re.round()).norm() < COINCIDENT_TOL
    }

    /// Lower parameters ordered by real part.
    fn ordered(&self) -> (Complex64, Complex64) {
        if self.b[0].re <= self.b[1].re {
            (self.b[0], self.b[1])
        } else {
            (self.b[1], self.b[0])
        }
    }

    /// ln ∫₀^∞ G2012 = ln Γ(b1+1) Γ(b2+1) / Γ(a+1).
    fn ln_total(&self) -> Complex64 {
        ln_gamma_complex(self.b[0] + 1.0) + ln_gamma_complex(self.b[1] + 1.0)
            - ln_gamma_complex(Complex64::new(self.a + 1.0, 0.0))
    }
}

fn real_part(ln_value: Complex64) -> Option<(f64, f64)> {
    let c = ln_value.im.cos();
    if !ln_value.re.is_finite() && ln_value.re != f64::NEG_INFINITY {
        return None;
    }
    if c == 0.0 {
        return None;
    }
    Some((ln_value.re + c.abs().ln(), c.signum()))
}

/// Evaluates the function, reporting the strategy that succeeded.
pub fn evaluate(spec: &MeijerGSpec, z: f64) -> Result<Evaluation> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(crate::error::domain("meijer_g", z, "0 < z < inf"));
    }
    let k = spec.kernel();
    let shape = spec.shape;
    let coincident = k.coincident();

    if !coincident && z <= SERIES_MAX_Z {
        if let Some((ln_abs, sign)) = series(&k, shape, z) {
            return Ok(Evaluation {
                ln_abs,
                sign,
                method: Method::Series,
            });
        }
    }
    if let Some((ln_abs, sign)) = asymptotic(&k, shape, z) {
        return Ok(Evaluation {
            ln_abs,
            sign,
            method: Method::Asymptotic,
        });
    }
    let quad = quadrature(&k, shape, z);
    match quad {
        Ok((ln_abs, sign)) => Ok(Evaluation {
            ln_abs,
            sign,
            method: Method::Quadrature,
        }),
        Err(err) => {
            if coincident {
                let mut p = k;
                p.b[1] += PERTURBATION;
                if let Some((ln_abs, sign)) = series(&p, shape, z) {
                    log::debug!("meijer_g: perturbed coincident lower parameters at z = {z}");
                    return Ok(Evaluation {
                        ln_abs,
                        sign,
                        method: Method::PerturbedSeries,
                    });
                }
            }
            Err(err)
        }
    }
}

/// Value of the Meijer G-function at `z > 0`.
pub fn meijer_g(spec: &MeijerGSpec, z: f64) -> Result<f64> {
    Ok(evaluate(spec, z)?.value())
}

/// Natural log of the (positive) Meijer-G value; errors if the value is negative.
pub fn ln_meijer_g(spec: &MeijerGSpec, z: f64) -> Result<f64> {
    let e = evaluate(spec, z)?;
    if e.sign < 0.0 {
        return Err(Error::Convergence {
            method: "ln_meijer_g (negative value)",
            residual: e.value(),
        });
    }
    Ok(e.ln_abs)
}

/// Residue series over the poles of Γ(b1+s) and Γ(b2+s).
///
/// Family j contributes `Σ_k (-1)^k/k! Γ(d-k)/Γ(e-k) z^{b_j+k}` with
/// `d = b_other - b_j`, `e = a - b_j`; the integrated shape multiplies term k
/// by `z / (b_j + 1 + k)`.
fn series(k: &Kernel, shape: Shape, z: f64) -> Option<(f64, f64)> {
    let lz = z.ln();
    let mut starts = [Complex64::new(0.0, 0.0); 2];
    for j in 0..2 {
        let bj = k.b[j];
        let d = k.b[1 - j] - bj;
        let e = Complex64::new(k.a, 0.0) - bj;
        starts[j] = ln_gamma_complex(d) - ln_gamma_complex(e) + bj * lz;
    }
    let scale = starts
        .iter()
        .map(|s| s.re)
        .filter(|r| r.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if !scale.is_finite() {
        return None;
    }

    let mut sum = Complex64::new(0.0, 0.0);
    let mut abs_sum = 0.0;
    for j in 0..2 {
        if starts[j].re == f64::NEG_INFINITY {
            continue;
        }
        let bj = k.b[j];
        let d = k.b[1 - j] - bj;
        let e = Complex64::new(k.a, 0.0) - bj;
        let mut t = (starts[j] - scale).exp();
        let mut converged = false;
        for n in 0..SERIES_MAX_TERMS {
            let nf = n as f64;
            let term = match shape {
                Shape::G2012 => t,
                Shape::G2123 => t * z / (bj + 1.0 + nf),
            };
            sum += term;
            abs_sum += term.norm();
            if t == Complex64::new(0.0, 0.0)
                || (nf > z && term.norm() <= 1e-17 * abs_sum)
            {
                converged = true;
                break;
            }
            t *= -z / (nf + 1.0) * (e - nf - 1.0) / (d - nf - 1.0);
            if !(t.norm() < 1e250) {
                return None;
            }
        }
        if !converged {
            return None;
        }
    }
    if sum.re == 0.0 || abs_sum > SERIES_MAX_CANCELLATION * sum.re.abs() {
        return None;
    }
    Some((sum.re.abs().ln() + scale, sum.re.signum()))
}

/// Large-z expansion `G2012 ~ z^θ e^{-z} Σ c_k z^{-k}`, θ = b1 + b2 - a.
///
/// For the integrated shape the tail `∫_z^∞ G2012` has the same form with
/// coefficients `d_k = c_k + (θ - k + 1) d_{k-1}`, and the value is the total
/// mass minus that tail.
fn asymptotic(k: &Kernel, shape: Shape, z: f64) -> Option<(f64, f64)> {
    let a = Complex64::new(k.a, 0.0);
    let (p, q) = (a - k.b[0], a - k.b[1]);
    let theta = k.b[0] + k.b[1] - a;

    // c'_k and d'_k below carry the z^{-k} factor
    let mut c = Complex64::new(1.0, 0.0);
    let mut d = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(1.0, 0.0);
    let mut prev = f64::INFINITY;
    let mut accepted = false;
    for n in 1..200 {
        let nf = n as f64;
        c *= -(p + nf - 1.0) * (q + nf - 1.0) / (nf * z);
        let term = match shape {
            Shape::G2012 => c,
            Shape::G2123 => {
                d = c + (theta - nf + 1.0) * d / z;
                d
            }
        };
        let mag = term.norm();
        if mag > prev {
            break;
        }
        sum += term;
        prev = mag;
        if mag <= ASYMPTOTIC_TOL * sum.norm() {
            accepted = true;
            break;
        }
    }
    if !accepted {
        return None;
    }
    let ln_tail = theta * z.ln() - z + sum.ln();
    match shape {
        Shape::G2012 => real_part(ln_tail),
        Shape::G2123 => {
            let ln_total = k.ln_total();
            let ratio = (ln_tail - ln_total).exp();
            if !(ratio.norm() < 0.5) {
                return None;
            }
            real_part(ln_total + (Complex64::new(1.0, 0.0) - ratio).ln())
        }
    }
}

fn softplus(u: f64) -> f64 {
    if u > 0.0 {
        u + (-u).exp().ln_1p()
    } else {
        u.exp().ln_1p()
    }
}

/// Laplace-type integral representation, integrated over `u = ln v`.
fn quadrature(k: &Kernel, shape: Shape, z: f64) -> Result<(f64, f64)> {
    let (b1, b2) = k.ordered();
    let a = Complex64::new(k.a, 0.0);
    let alpha = a - b1;
    if !(alpha.re > 0.0) || (shape == Shape::G2123 && !(b1.re > -1.0)) {
        return Err(Error::Convergence {
            method: "quadrature (integral representation unavailable)",
            residual: f64::NAN,
        });
    }
    let ln_int = match shape {
        Shape::G2012 => {
            let f = |u: f64| -z * u.exp() + alpha * u + (b2 - a) * softplus(u);
            let u0 = (alpha.re.max(1.0) / z).ln();
            b2 * z.ln() - z - ln_gamma_complex(alpha) + integrate_ln(&f, u0)?
        }
        Shape::G2123 => {
            let s = b2 + 1.0;
            let f = |u: f64| {
                let x = z * (1.0 + u.exp());
                let ln_p = ln_gamma_pq(s, x).map_or(Complex64::new(f64::NAN, 0.0), |v| v.0);
                alpha * u - (a + 1.0) * softplus(u) + ln_p
            };
            let u0 = (alpha.re / (b1.re + 1.0)).ln();
            ln_gamma_complex(s) - ln_gamma_complex(alpha) + integrate_ln(&f, u0)?
        }
    };
    real_part(ln_int).ok_or(Error::Convergence {
        method: "quadrature",
        residual: f64::NAN,
    })
}

/// ln ∫ exp(f(u)) du over the real line for a unimodal integrand magnitude.
///
/// Hill-climbs to the peak of `Re f` from `u0`, then applies the trapezoid
/// rule on a grid anchored at the peak, halving the step until successive
/// sums agree to [`QUAD_TOL`].
fn integrate_ln(f: &dyn Fn(f64) -> Complex64, u0: f64) -> Result<Complex64> {
    let fail = |residual: f64| Error::Convergence {
        method: "quadrature",
        residual,
    };
    let re = |u: f64| {
        let v = f(u).re;
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };

    // hill climb on a coarse grid
    let step = 0.5;
    let mut u_best = if u0.is_finite() { u0 } else { 0.0 };
    let mut best = re(u_best);
    for dir in [1.0, -1.0] {
        let mut moved = false;
        for _ in 0..20_000 {
            let v = re(u_best + dir * step);
            if v > best {
                best = v;
                u_best += dir * step;
                moved = true;
            } else {
                break;
            }
        }
        if moved {
            break;
        }
    }
    if !best.is_finite() {
        return Err(fail(f64::NAN));
    }

    // golden-section refinement
    let (mut lo, mut hi) = (u_best - step, u_best + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (re(x1), re(x2));
    for _ in 0..60 {
        if f1 > f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = re(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = re(x2);
        }
    }
    let u_peak = 0.5 * (lo + hi);
    let peak = re(u_peak).max(best);

    // curvature sets the initial step
    let du = 1e-3;
    let curv = (re(u_peak + du) - 2.0 * re(u_peak) + re(u_peak - du)) / (du * du);
    let width = if curv < 0.0 { (-curv).sqrt().recip() } else { 1.0 };
    let mut h = (width / 1.5).min(1.0);

    // sum over u_peak + (k + offset) h, k in Z, stopping in each tail once
    // several consecutive terms are negligible
    let sweep = |h: f64, offset: f64| -> Result<Complex64> {
        let mut s = Complex64::new(0.0, 0.0);
        for dir in [1.0, -1.0] {
            let first = if offset == 0.0 && dir < 0.0 { 1 } else { 0 };
            let mut quiet = 0;
            let mut n = first;
            loop {
                let u = u_peak + dir * (n as f64 + offset) * h;
                let v = f(u);
                if !v.re.is_nan() && v.re - peak > -QUAD_CUTOFF {
                    s += (v - peak).exp();
                    quiet = 0;
                } else {
                    quiet += 1;
                    if quiet >= 4 {
                        break;
                    }
                }
                n += 1;
                if n > 2_000_000 {
                    return Err(fail(f64::INFINITY));
                }
            }
        }
        Ok(s)
    };
    let mut sum = sweep(h, 0.0)?;
    let mut estimate = sum * h;
    let mut change = f64::INFINITY;
    for _ in 0..QUAD_MAX_HALVINGS {
        let mid = sweep(h, 0.5)?;
        sum += mid;
        h *= 0.5;
        let next = sum * h;
        change = (next - estimate).norm() / next.norm();
        estimate = next;
        if change < QUAD_TOL {
            return Ok(estimate.ln() + peak);
        }
    }
    Err(fail(change))
}
