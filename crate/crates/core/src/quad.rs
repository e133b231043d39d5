//! Integration helpers built on the tanh-sinh rule of the `quadrature` crate.
//!
//! The rule itself is non-adaptive in the interval (about 350 evaluations
//! at most), so [`integrate`] bisects until each piece meets its share of the
//! tolerance, and [`integrate_log_scale`] handles integrands spread over many
//! decades by integrating `x f(x)` in `u = ln x` over unit panels.

/// Integral estimate with its error bound and cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: u64,
}

impl Integral {
    fn zero() -> Self {
        Integral {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        }
    }

    fn add(self, other: Integral) -> Self {
        Integral {
            value: self.value + other.value,
            error: self.error + other.error,
            evaluations: self.evaluations + other.evaluations,
        }
    }
}

const MAX_DEPTH: u32 = 30;

fn integrate_depth(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> Integral {
    let out = quadrature::integrate(f, a, b, tol);
    let whole = Integral {
        value: out.integral,
        error: out.error_estimate,
        evaluations: out.num_function_evaluations as u64,
    };
    if whole.error <= tol || depth >= MAX_DEPTH {
        return whole;
    }
    let mid = 0.5 * (a + b);
    let left = integrate_depth(f, a, mid, 0.5 * tol, depth + 1);
    let right = integrate_depth(f, mid, b, 0.5 * tol, depth + 1);
    let mut both = left.add(right);
    both.evaluations += whole.evaluations;
    both
}

/// ∫_a^b f(x) dx to absolute tolerance `tol`, bisecting where needed.
///
/// Non-finite integrand values (endpoint singularities) count as zero.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Integral {
    integrate_depth(&f, a, b, tol, 0)
}

/// ∫_lo^hi f(x) dx for `0 < lo < hi`, to relative tolerance `rel_tol`.
///
/// A coarse pass over unit panels in `ln x` sets the scale; panels whose
/// coarse error exceeds their share are then redone at the target.
pub fn integrate_log_scale(f: impl Fn(f64) -> f64, lo: f64, hi: f64, rel_tol: f64) -> Integral {
    assert!(lo > 0.0 && hi > lo, "integrate_log_scale needs 0 < lo < hi");
    let g = |u: f64| {
        let x = u.exp();
        x * f(x)
    };
    let (u0, u1) = (lo.ln(), hi.ln());
    let panels = ((u1 - u0).ceil() as usize).max(1);
    let width = (u1 - u0) / panels as f64;
    let edges: Vec<(f64, f64)> = (0..panels)
        .map(|k| (u0 + k as f64 * width, u0 + (k + 1) as f64 * width))
        .collect();

    let coarse: Vec<Integral> = edges
        .iter()
        .map(|&(a, b)| integrate_depth(&g, a, b, 1e-4, MAX_DEPTH))
        .collect();
    let scale: f64 = coarse.iter().map(|p| p.value.abs()).sum();
    let share = rel_tol * scale / panels as f64;
    let mut total = Integral::zero();
    for (&(a, b), c) in edges.iter().zip(&coarse) {
        total.evaluations += c.evaluations;
        if c.error <= share {
            total.value += c.value;
            total.error += c.error;
        } else {
            total = total.add(integrate_depth(&g, a, b, share, 0));
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_exponential() {
        let v = integrate(|x| x * x, 0.0, 3.0, 1e-12);
        assert!((v.value - 9.0).abs() < 1e-12);
        let v = integrate(|x| (-x).exp(), 0.0, 50.0, 1e-13);
        assert!((v.value - (1.0 - (-50.0_f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn endpoint_singularity() {
        // ∫₀¹ ln x dx = -1
        let v = integrate(|x: f64| x.ln(), 0.0, 1.0, 1e-12);
        assert!((v.value + 1.0).abs() < 1e-10);
    }

    #[test]
    fn wide_range_heavy_tail() {
        // ∫ 1/(1+x)^2 over [1e-12, 1e12] = 1/(1+1e-12) - 1/(1+1e12)
        let v = integrate_log_scale(|x| (1.0 + x).powi(-2), 1e-12, 1e12, 1e-11);
        let want = 1.0 / (1.0 + 1e-12) - 1.0 / (1.0 + 1e12);
        assert!((v.value - want).abs() < 1e-10, "{v:?}");
    }
}
