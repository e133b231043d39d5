//! Monte Carlo reference for the gain, received power and recharging time.
//!
//! Every trial draws from its own ChaCha8 stream (key from the seed, stream
//! number = trial index), so a draw depends only on `(seed, trial_index)` and
//! the output does not change with the number of rayon workers.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::brt::{conversion_coefficient, BatteryProfile};
use crate::channel::ChannelConfig;
use crate::error::Result;
use crate::power::{avg_received_power, ScenarioConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Gain,
    Power,
    Brt,
}

/// Sorted draws of one quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSample {
    values: Vec<f64>,
    seed: u64,
    quantity: Quantity,
}

impl EmpiricalSample {
    /// Sorts `values` ascending.
    pub fn new(mut values: Vec<f64>, seed: u64, quantity: Quantity) -> Self {
        values.par_sort_unstable_by(f64::total_cmp);
        EmpiricalSample {
            values,
            seed,
            quantity,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn trials(&self) -> usize {
        self.values.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn quantity(&self) -> Quantity {
        self.quantity
    }

    /// Fraction of draws `<= x`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.values.partition_point(|&v| v <= x) as f64 / self.values.len() as f64
    }

    /// Linear-interpolated quantile, `q` in [0, 1].
    pub fn quantile(&self, q: f64) -> f64 {
        let n = self.values.len();
        let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
        let i = pos.floor() as usize;
        let j = (i + 1).min(n - 1);
        let t = pos - i as f64;
        self.values[i] * (1.0 - t) + self.values[j] * t
    }
}

/// Uniform on (0, 1] from the top 53 bits.
fn unit_open0(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Rayleigh magnitude with scale `sigma`, by inversion.
fn rayleigh(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    sigma * (-2.0 * unit_open0(rng).ln()).sqrt()
}

fn base_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn hops_from(base: &ChaCha8Rng, cfg: &ChannelConfig, trial_index: u64) -> impl Iterator<Item = (f64, f64)> {
    let mut rng = base.clone();
    rng.set_stream(trial_index);
    let s = cfg.rayleigh_scale();
    (0..cfg.n_elements()).map(move |_| {
        let h = rayleigh(&mut rng, s);
        let g = rayleigh(&mut rng, s);
        (h, g)
    })
}

fn gain_from(base: &ChaCha8Rng, cfg: &ChannelConfig, trial_index: u64) -> f64 {
    hops_from(base, cfg, trial_index).map(|(h, g)| h * g).sum()
}

/// Hop magnitudes `(|h_i|, |g_i|)` of one trial.
pub fn sample_hops(cfg: &ChannelConfig, trial_index: u64, seed: u64) -> Vec<(f64, f64)> {
    hops_from(&base_rng(seed), cfg, trial_index).collect()
}

/// One draw of `B = Σ |h_i||g_i|` with ideal phase alignment.
pub fn sample_gain(cfg: &ChannelConfig, trial_index: u64, seed: u64) -> f64 {
    gain_from(&base_rng(seed), cfg, trial_index)
}

fn gain_draws(cfg: &ChannelConfig, trials: usize, seed: u64) -> Vec<f64> {
    let base = base_rng(seed);
    (0..trials as u64)
        .into_par_iter()
        .map(|i| gain_from(&base, cfg, i))
        .collect()
}

/// `trials` draws of the gain.
pub fn simulate_gain(cfg: &ChannelConfig, trials: usize, seed: u64) -> EmpiricalSample {
    EmpiricalSample::new(gain_draws(cfg, trials, seed), seed, Quantity::Gain)
}

/// Received power `P̄_r B²` and recharging time `α / P_r` per trial.
pub fn simulate(
    cfg: &ScenarioConfig,
    battery: &BatteryProfile,
    trials: usize,
    seed: u64,
) -> (EmpiricalSample, EmpiricalSample) {
    power_and_brt(&simulate_gain(&cfg.channel, trials, seed), cfg, battery)
}

/// Power and recharging-time samples derived from an existing gain sample,
/// identical to [`simulate`] with the same seed and trial count.
pub fn power_and_brt(
    gain: &EmpiricalSample,
    cfg: &ScenarioConfig,
    battery: &BatteryProfile,
) -> (EmpiricalSample, EmpiricalSample) {
    let pbar = avg_received_power(cfg);
    let alpha = conversion_coefficient(battery);
    let power: Vec<f64> = gain.values().par_iter().map(|b| pbar * b * b).collect();
    let brt: Vec<f64> = power.par_iter().map(|p| alpha / p).collect();
    (
        EmpiricalSample::new(power, gain.seed(), Quantity::Power),
        EmpiricalSample::new(brt, gain.seed(), Quantity::Brt),
    )
}

/// Largest gap between the empirical and the model CDF at sample point `i`.
fn gap(i: usize, n: f64, f: f64) -> f64 {
    ((i + 1) as f64 / n - f).max(f - i as f64 / n)
}

/// Two-sided Kolmogorov–Smirnov statistic `sup |F_n - F|`.
///
/// Exact, but evaluates `cdf` only where needed: since `cdf` is
/// nondecreasing, a run of sample points `lo < i < hi` cannot exceed
/// `max(hi/n - F(x_lo), F(x_hi) - (lo+1)/n)` and is skipped once that bound
/// is below the current maximum.
pub fn ks_distance<F>(sample: &EmpiricalSample, cdf: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let v = sample.values();
    let n = v.len();
    let nf = n as f64;
    let f0 = cdf(v[0])?;
    let mut d = gap(0, nf, f0);
    if n == 1 {
        return Ok(d);
    }
    let f1 = cdf(v[n - 1])?;
    d = d.max(gap(n - 1, nf, f1));
    let mut stack = vec![(0usize, n - 1, f0, f1)];
    while let Some((lo, hi, flo, fhi)) = stack.pop() {
        if hi - lo < 2 {
            continue;
        }
        let bound = (hi as f64 / nf - flo).max(fhi - (lo + 1) as f64 / nf);
        if bound <= d {
            continue;
        }
        let mid = lo + (hi - lo) / 2;
        let fm = cdf(v[mid])?;
        d = d.max(gap(mid, nf, fm));
        stack.push((lo, mid, flo, fm));
        stack.push((mid, hi, fm, fhi));
    }
    Ok(d)
}

/// The same statistic evaluating `cdf` at every sample point.
pub fn ks_distance_exhaustive<F>(sample: &EmpiricalSample, cdf: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let nf = sample.trials() as f64;
    sample
        .values()
        .par_iter()
        .enumerate()
        .map(|(i, &x)| Ok(gap(i, nf, cdf(x)?)))
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

/// Raw moment estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub order: u32,
    pub value: f64,
    /// `√((mean(x^{2k}) - mean(x^k)²) / n)`; unreliable for heavy tails,
    /// where it keeps growing with the sample size.
    pub std_error: f64,
}

/// Raw moments `1..=n_max`.
pub fn empirical_moments(sample: &EmpiricalSample, n_max: u32) -> Vec<MomentEstimate> {
    let v = sample.values();
    let n = v.len() as f64;
    (1..=n_max)
        .map(|k| {
            let (s1, s2) = v.iter().fold((0.0, 0.0), |(a, b), &x| {
                let p = x.powi(k as i32);
                (a + p, b + p * p)
            });
            let value = s1 / n;
            let var = (s2 / n - value * value).max(0.0);
            MomentEstimate {
                order: k,
                value,
                std_error: (var / n).sqrt(),
            }
        })
        .collect()
}

/// Density histogram over `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub width: f64,
    pub density: Vec<f64>,
}

impl Histogram {
    /// Freedman–Diaconis bin width, at least 50 bins across `[lo, hi]`.
    /// Density is normalised by the full sample size.
    pub fn freedman_diaconis(sample: &EmpiricalSample, lo: f64, hi: f64) -> Histogram {
        let n = sample.trials();
        let iqr = sample.quantile(0.75) - sample.quantile(0.25);
        let fd = 2.0 * iqr / (n as f64).cbrt();
        let span = hi - lo;
        let mut bins = if fd > 0.0 { (span / fd).ceil() as usize } else { 50 };
        bins = bins.clamp(50, 1_000_000);
        let width = span / bins as f64;
        let mut counts = vec![0usize; bins];
        let v = sample.values();
        let start = v.partition_point(|&x| x < lo);
        for &x in &v[start..] {
            if x > hi {
                break;
            }
            let b = (((x - lo) / width) as usize).min(bins - 1);
            counts[b] += 1;
        }
        let density = counts
            .into_iter()
            .map(|c| c as f64 / (n as f64 * width))
            .collect();
        Histogram { lo, width, density }
    }

    /// Density of the bin containing `x`, zero outside the range.
    pub fn density_at(&self, x: f64) -> f64 {
        if x < self.lo {
            return 0.0;
        }
        let b = ((x - self.lo) / self.width) as usize;
        match self.density.get(b) {
            Some(d) => *d,
            None if b == self.density.len() && x <= self.lo + self.width * b as f64 => {
                self.density[b - 1]
            }
            None => 0.0,
        }
    }
}
