use proptest::prelude::*;
use risbrt::channel::{
    approximant_for, double_rayleigh_cdf, double_rayleigh_pdf, fit_approximant, gain_cdf,
    gain_moments, gain_pdf, ChannelConfig, GainMoments,
};
use risbrt::quad::integrate_log_scale;
use risbrt::Error;

fn moments(n: u32) -> GainMoments {
    gain_moments(&ChannelConfig::new(n).unwrap())
}

#[test]
fn gain_pdf_unit_mass() {
    for n in [1, 2, 3, 4, 7, 16, 64] {
        let p = approximant_for(n).unwrap();
        let mu1 = moments(n).mu1;
        let m = integrate_log_scale(|x| gain_pdf(x, &p).unwrap(), mu1 * 1e-8, mu1 * 60.0, 1e-11);
        assert!((m.value - 1.0).abs() < 1e-8, "N={n} mass={}", m.value);
    }
}

#[test]
fn cdf_is_integral_of_pdf() {
    let p = approximant_for(6).unwrap();
    for &x in &[2.0, 6.0, 9.4, 14.0] {
        let q = integrate_log_scale(|t| gain_pdf(t, &p).unwrap(), 1e-9, x, 1e-12).value;
        assert!((q - gain_cdf(x, &p).unwrap()).abs() < 1e-10, "x={x}");
    }
}

#[test]
fn approximant_close_to_exact_single_element_law() {
    // the four-moment fit is not the exact law for N = 1, but stays near it
    let p = approximant_for(1).unwrap();
    let mut worst = 0.0f64;
    for i in 1..200 {
        let x = i as f64 * 0.05;
        worst = worst.max((gain_cdf(x, &p).unwrap() - double_rayleigh_cdf(x).unwrap()).abs());
    }
    assert!(worst < 0.01, "{worst}");
    let m = integrate_log_scale(|x| double_rayleigh_pdf(x).unwrap(), 1e-12, 200.0, 1e-12).value;
    assert!((m - 1.0).abs() < 1e-10);
}

#[test]
fn fitted_values_for_small_n() {
    // reference values from an independent high-precision solve
    let p = approximant_for(1).unwrap();
    assert!((p.a2 - 1.00044).abs() < 1e-5);
    assert!((p.a3 - 1.08212).abs() < 1e-5);
    assert!((p.a4().re - 0.78798).abs() < 1e-5);
    assert!((p.a4().im.abs() - 0.26887).abs() < 1e-5);
    let p = approximant_for(10).unwrap();
    assert!((p.a3 - 21.7768).abs() < 1e-3);
    assert!((p.a4().re - 19.3858).abs() < 1e-3);
    assert!((p.a5().re - 16.5746).abs() < 1e-3);
}

#[test]
fn ill_conditioned_inputs() {
    let good = moments(4);
    for bad in [
        GainMoments { mu4: good.mu4 / 10.0, ..good },
        GainMoments { mu1: -1.0, ..good },
        GainMoments { mu3: f64::NAN, ..good },
    ] {
        assert!(matches!(fit_approximant(&bad), Err(Error::IllConditioned(_))), "{bad:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cdf_monotone_and_bounded(n in 1u32..40, x1 in 0.0f64..1.0, x2 in 0.0f64..1.0) {
        let p = approximant_for(n).unwrap();
        let mu1 = moments(n).mu1;
        let (lo, hi) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
        let a = gain_cdf(3.0 * mu1 * lo, &p).unwrap();
        let b = gain_cdf(3.0 * mu1 * hi, &p).unwrap();
        prop_assert!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b));
        prop_assert!(b >= a);
        prop_assert!(gain_pdf(3.0 * mu1 * lo, &p).unwrap() >= 0.0);
    }

    /// Fitting the moments of `c B` rescales `a2` and leaves the shape alone.
    #[test]
    fn fit_is_scale_equivariant(n in 1u32..64, c in 0.05f64..20.0) {
        let m = moments(n);
        let scaled = GainMoments {
            mu1: c * m.mu1,
            mu2: c.powi(2) * m.mu2,
            mu3: c.powi(3) * m.mu3,
            mu4: c.powi(4) * m.mu4,
        };
        let p = fit_approximant(&m).unwrap();
        let q = fit_approximant(&scaled).unwrap();
        prop_assert!((q.a2 / (c * p.a2) - 1.0).abs() < 1e-8);
        prop_assert!((q.a3 - p.a3).abs() < 1e-7 * p.a3.max(1.0));
        prop_assert!((q.a4() - p.a4()).norm() < 1e-7 * p.a3.max(1.0));
    }

    #[test]
    fn fit_reproduces_moments(n in 1u32..128) {
        let m = moments(n);
        let p = fit_approximant(&m).unwrap();
        for (k, want) in m.as_array().iter().enumerate() {
            let got = p.moment(k as f64 + 1.0).unwrap();
            prop_assert!((got / want - 1.0).abs() < 1e-9);
        }
    }
}
