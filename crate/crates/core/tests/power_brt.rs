use proptest::prelude::*;
use risbrt::brt::{
    brt_cdf, brt_cdf_clt, brt_mean_clt, brt_moment, brt_pdf, brt_pdf_clt, brt_pdf_n1, brt_summary,
    conversion_coefficient, BatteryProfile,
};
use risbrt::channel::{approximant_for, gain_cdf, gain_moments, ChannelConfig};
use risbrt::montecarlo::{ks_distance, simulate};
use risbrt::power::{
    avg_received_power, dbm_to_watts, power_cdf, power_cdf_clt, power_cdf_n1, power_pdf,
    power_pdf_clt, power_pdf_n1, ScenarioConfig,
};
use risbrt::quad::integrate_log_scale;
use risbrt::Error;

fn scenario(n: u32, ps_dbm: f64) -> ScenarioConfig {
    ScenarioConfig::new(dbm_to_watts(ps_dbm), 2.5, 2.5, 2.7, ChannelConfig::new(n).unwrap()).unwrap()
}

fn alpha() -> f64 {
    conversion_coefficient(&BatteryProfile::default())
}

#[test]
fn power_mean_matches_second_gain_moment() {
    let cfg = scenario(4, 15.0);
    let p = approximant_for(4).unwrap();
    let pbar = avg_received_power(&cfg);
    let mean = integrate_log_scale(|x| x * power_pdf(x, &cfg, &p).unwrap(), pbar * 1e-12, pbar * 1e4, 1e-10);
    let want = pbar * gain_moments(&cfg.channel).mu2;
    assert!((mean.value / want - 1.0).abs() < 5e-3);

    let cfg = scenario(1, 15.0);
    let pbar = avg_received_power(&cfg);
    let mass = integrate_log_scale(|x| power_pdf_n1(x, &cfg).unwrap(), pbar * 1e-24, pbar * 4e4, 1e-12);
    assert!((mass.value - 1.0).abs() < 1e-8);
    let mean = integrate_log_scale(|x| x * power_pdf_n1(x, &cfg).unwrap(), pbar * 1e-24, pbar * 4e4, 1e-12);
    assert!((mean.value / (4.0 * pbar) - 1.0).abs() < 1e-3);
}

#[test]
fn power_against_simulation() {
    let battery = BatteryProfile::default();
    let cfg = scenario(4, 15.0);
    let p = approximant_for(4).unwrap();
    let (power, _) = simulate(&cfg, &battery, 1_000_000, 11);
    assert!(ks_distance(&power, |x| power_cdf(x, &cfg, &p)).unwrap() <= 0.01);

    let cfg = scenario(1, 15.0);
    let (power, _) = simulate(&cfg, &battery, 1_000_000, 11);
    assert!(ks_distance(&power, |x| power_cdf_n1(x, &cfg)).unwrap() <= 0.005);
}

#[test]
fn clt_power_fit_improves_with_n() {
    let battery = BatteryProfile::default();
    let ks: Vec<f64> = [10u32, 20, 50, 100]
        .iter()
        .map(|&n| {
            let cfg = scenario(n, 15.0);
            let (power, _) = simulate(&cfg, &battery, 1_000_000, 5);
            ks_distance(&power, |x| power_cdf_clt(x, &cfg)).unwrap()
        })
        .collect();
    assert!(ks.windows(2).all(|w| w[1] <= w[0]), "{ks:?}");
}

#[test]
fn clt_densities_have_unit_mass() {
    let cfg = scenario(50, 15.0);
    let pbar = avg_received_power(&cfg);
    let scale = pbar * 6000.0;
    let m = integrate_log_scale(|x| power_pdf_clt(x, &cfg).unwrap(), scale * 1e-14, scale * 100.0, 1e-12);
    assert!((m.value - 1.0).abs() < 1e-6);
    let s = alpha() / scale;
    let m = integrate_log_scale(|t| brt_pdf_clt(t, &cfg, alpha()).unwrap(), s * 1e-2, s * 1e14, 1e-12);
    assert!((m.value - 1.0).abs() < 1e-6);
}

#[test]
fn single_element_brt_has_divergent_mean() {
    let cfg = scenario(1, 15.0);
    let a = alpha();
    let s = a / avg_received_power(&cfg);
    let m = integrate_log_scale(|t| brt_pdf_n1(t, &cfg, a).unwrap(), s * 1e-5, s * 1e20, 1e-12);
    assert!((m.value - 1.0).abs() < 1e-8);
    // partial means keep growing like (ln T)^2
    let partial: Vec<f64> = [1e2, 1e4, 1e6, 1e8]
        .iter()
        .map(|&t| integrate_log_scale(|x| x * brt_pdf_n1(x, &cfg, a).unwrap(), s * 1e-5, s * t, 1e-10).value)
        .collect();
    assert!(partial.windows(2).all(|w| w[1] > 1.3 * w[0]), "{partial:?}");
    let p = approximant_for(1).unwrap();
    assert!(matches!(brt_moment(1, &cfg, &p, a), Err(Error::MomentUndefined { .. })));
}

#[test]
fn mode_moves_left_with_more_elements() {
    let a = alpha();
    let mode = |n: u32| {
        let cfg = scenario(n, 15.0);
        let p = approximant_for(n).unwrap();
        (1..3000)
            .map(|i| i as f64 * 1e-3)
            .map(|t| (t, brt_pdf(t, &cfg, &p, a).unwrap()))
            .fold((0.0, 0.0), |b, v| if v.1 > b.1 { v } else { b })
            .0
    };
    let r = mode(4) / mode(8);
    assert!((r / 3.2 - 1.0).abs() < 0.25, "{r}");
}

#[test]
fn mean_decreases_with_n_and_approaches_clt() {
    let a = alpha();
    let means: Vec<f64> = (4..=64u32)
        .map(|n| brt_moment(1, &scenario(n, 20.0), &approximant_for(n).unwrap(), a).unwrap())
        .collect();
    assert!(means.windows(2).all(|w| w[1] < w[0]));
    let gaps: Vec<f64> = [8u32, 16, 32, 64]
        .iter()
        .map(|&n| {
            let cfg = scenario(n, 20.0);
            (brt_moment(1, &cfg, &approximant_for(n).unwrap(), a).unwrap() / brt_mean_clt(&cfg, a) - 1.0).abs()
        })
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn distance_scaling_of_means() {
    let a = alpha();
    let cfg = scenario(10, 20.0);
    let p = approximant_for(10).unwrap();
    let k = 1.7;
    let far = ScenarioConfig { d1: k * cfg.d1, d2: k * cfg.d2, ..cfg };
    let want = k.powf(2.0 * cfg.delta);
    assert!((brt_mean_clt(&far, a) / brt_mean_clt(&cfg, a) / want - 1.0).abs() < 1e-12);
    assert!((brt_moment(1, &far, &p, a).unwrap() / brt_moment(1, &cfg, &p, a).unwrap() / want - 1.0).abs() < 1e-12);
}

#[test]
fn summary_undefined_fields_for_small_n() {
    let a = alpha();
    let s = brt_summary(&scenario(2, 20.0), &approximant_for(2).unwrap(), a);
    assert!(s.mean.is_some() && s.kurtosis.is_none());
    let s = brt_summary(&scenario(1, 20.0), &approximant_for(1).unwrap(), a);
    assert!(s.mean.is_none() && s.aof.is_none());
    let aof: Vec<f64> = [8u32, 16, 32, 64]
        .iter()
        .map(|&n| brt_summary(&scenario(n, 20.0), &approximant_for(n).unwrap(), a).aof.unwrap())
        .collect();
    assert!(aof.windows(2).all(|w| w[1] < w[0]));
}

/// Relative agreement to 1e-10; both sides may underflow to zero together.
fn close(lhs: f64, rhs: f64) -> bool {
    lhs == rhs || ((lhs - rhs) / rhs).abs() < 1e-10
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn jacobian_and_complement(n in 1u32..64, u in -2.0f64..2.0, dbm in 5.0f64..40.0) {
        let cfg = scenario(n, dbm);
        let p = approximant_for(n).unwrap();
        let a = alpha();
        let mu1 = gain_moments(&cfg.channel).mu1;
        let tau = a / (avg_received_power(&cfg) * mu1 * mu1) * 10f64.powf(u);
        let x = a / tau;
        let lhs = brt_pdf(tau, &cfg, &p, a).unwrap();
        let rhs = a / (tau * tau) * power_pdf(x, &cfg, &p).unwrap();
        prop_assert!(close(lhs, rhs));
        let lhs = brt_pdf_clt(tau, &cfg, a).unwrap();
        let rhs = a / (tau * tau) * power_pdf_clt(x, &cfg).unwrap();
        prop_assert!(close(lhs, rhs));
        prop_assert_eq!(brt_cdf(tau, &cfg, &p, a).unwrap(), 1.0 - power_cdf(x, &cfg, &p).unwrap());
        prop_assert_eq!(
            power_cdf(x, &cfg, &p).unwrap(),
            gain_cdf((x / avg_received_power(&cfg)).sqrt(), &p).unwrap()
        );
        let c = brt_cdf_clt(tau, &cfg, a).unwrap();
        prop_assert!((0.0..=1.0).contains(&c));
    }
}
