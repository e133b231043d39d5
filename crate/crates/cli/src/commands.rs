//! `pdf`, `cdf`, `sweep` and `mc-validate`.

use std::collections::HashMap;
use std::fmt;
use std::io::Write as _;
use std::path::Path;

use clap::ValueEnum;
use log::{info, warn};
use risbrt::brt::{
    brt_cdf, brt_cdf_clt, brt_cdf_n1, brt_mean_clt, brt_moment, brt_pdf, brt_pdf_clt, brt_pdf_n1,
    brt_summary, conversion_coefficient,
};
use risbrt::channel::{
    approximant_for, double_rayleigh_cdf, double_rayleigh_pdf, gain_cdf, gain_moments, gain_pdf,
    ApproximantParams,
};
use risbrt::montecarlo::{
    empirical_moments, ks_distance, power_and_brt, simulate_gain, EmpiricalSample, Histogram,
};
use risbrt::power::{
    avg_received_power, clt_gain_params, power_cdf, power_cdf_clt, power_cdf_n1, power_pdf,
    power_pdf_clt, power_pdf_n1, ScenarioConfig,
};
use risbrt::specfun::normal_cdf;
use risbrt::Error;
use serde::Serialize;

use crate::config::{RunConfig, Scale};
use crate::error::CliError;
use crate::output::{cell, open, round_sig, write_csv};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Gain,
    Power,
    Brt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    /// Four-moment approximant.
    Exact,
    /// Closed form for a single element.
    N1,
    /// Large-N Gaussian limit.
    Clt,
    /// Monte Carlo histogram or empirical CDF.
    Empirical,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Exact => "exact",
            Variant::N1 => "n1",
            Variant::Clt => "clt",
            Variant::Empirical => "empirical",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Curve {
    Pdf,
    Cdf,
}

/// Scenario, fitted approximant and conversion coefficient for one run.
pub struct Model {
    pub scenario: ScenarioConfig,
    pub params: ApproximantParams,
    pub alpha: f64,
}

impl Model {
    pub fn new(cfg: &RunConfig) -> Result<Self, CliError> {
        Ok(Model {
            scenario: cfg.scenario()?,
            params: approximant_for(cfg.n)?,
            alpha: conversion_coefficient(&cfg.battery()),
        })
    }

    fn n(&self) -> u32 {
        self.scenario.n_elements()
    }

    /// Recharging time at the mean squared gain, a natural time scale.
    fn brt_scale(&self) -> f64 {
        let mu1 = gain_moments(&self.scenario.channel).mu1;
        self.alpha / (avg_received_power(&self.scenario) * mu1 * mu1)
    }

    /// Default `(min, max)` for a target and grid scale.
    pub fn default_range(&self, target: Target, scale: Scale) -> (f64, f64) {
        let m = gain_moments(&self.scenario.channel);
        let sd = (m.mu2 - m.mu1 * m.mu1).max(0.0).sqrt();
        let b_hi = m.mu1 + 8.0 * sd;
        let hi = match target {
            Target::Gain => b_hi,
            Target::Power => avg_received_power(&self.scenario) * b_hi * b_hi,
            Target::Brt => match scale {
                Scale::Linear => 20.0 * self.brt_scale(),
                Scale::Log => 1e3 * self.brt_scale(),
            },
        };
        match scale {
            Scale::Linear => (0.0, hi),
            Scale::Log if target == Target::Brt => (1e-2 * self.brt_scale(), hi),
            Scale::Log => (hi * 1e-6, hi),
        }
    }

    pub fn evaluate(&self, target: Target, variant: Variant, curve: Curve, x: f64) -> risbrt::Result<f64> {
        let (cfg, p, a) = (&self.scenario, &self.params, self.alpha);
        match (target, variant, curve) {
            (Target::Gain, Variant::Exact, Curve::Pdf) => gain_pdf(x, p),
            (Target::Gain, Variant::Exact, Curve::Cdf) => gain_cdf(x, p),
            (Target::Gain, Variant::N1, Curve::Pdf) => double_rayleigh_pdf(x),
            (Target::Gain, Variant::N1, Curve::Cdf) => double_rayleigh_cdf(x),
            (Target::Gain, Variant::Clt, c) => folded_normal(x, self.n(), c),
            (Target::Power, Variant::Exact, Curve::Pdf) => power_pdf(x, cfg, p),
            (Target::Power, Variant::Exact, Curve::Cdf) => power_cdf(x, cfg, p),
            (Target::Power, Variant::N1, Curve::Pdf) => power_pdf_n1(x, cfg),
            (Target::Power, Variant::N1, Curve::Cdf) => power_cdf_n1(x, cfg),
            (Target::Power, Variant::Clt, Curve::Pdf) => power_pdf_clt(x, cfg),
            (Target::Power, Variant::Clt, Curve::Cdf) => power_cdf_clt(x, cfg),
            (Target::Brt, Variant::Exact, Curve::Pdf) => brt_pdf(x, cfg, p, a),
            (Target::Brt, Variant::Exact, Curve::Cdf) => brt_cdf(x, cfg, p, a),
            (Target::Brt, Variant::N1, Curve::Pdf) => brt_pdf_n1(x, cfg, a),
            (Target::Brt, Variant::N1, Curve::Cdf) => brt_cdf_n1(x, cfg, a),
            (Target::Brt, Variant::Clt, Curve::Pdf) => brt_pdf_clt(x, cfg, a),
            (Target::Brt, Variant::Clt, Curve::Cdf) => brt_cdf_clt(x, cfg, a),
            (_, Variant::Empirical, _) => unreachable!("empirical columns come from samples"),
        }
    }

    /// CDF used for goodness of fit: exact law for one element, approximant otherwise.
    pub fn model_cdf(&self, target: Target, x: f64) -> risbrt::Result<f64> {
        let variant = if self.n() == 1 { Variant::N1 } else { Variant::Exact };
        self.evaluate(target, variant, Curve::Cdf, x)
    }
}

/// Gaussian limit of the gain, folded at zero.
fn folded_normal(x: f64, n: u32, curve: Curve) -> risbrt::Result<f64> {
    let (mu, var) = clt_gain_params(n);
    let sd = var.sqrt();
    if x < 0.0 {
        return Ok(0.0);
    }
    Ok(match curve {
        Curve::Pdf => {
            let phi = |z: f64| (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
            (phi((x - mu) / sd) + phi((x + mu) / sd)) / sd
        }
        Curve::Cdf => (normal_cdf((x - mu) / sd) + normal_cdf((x + mu) / sd) - 1.0).clamp(0.0, 1.0),
    })
}

/// Gain, power and recharging-time samples for one run.
pub struct Samples {
    pub gain: EmpiricalSample,
    pub power: EmpiricalSample,
    pub brt: EmpiricalSample,
}

impl Samples {
    pub fn draw(cfg: &RunConfig, model: &Model) -> Self {
        let gain = simulate_gain(&model.scenario.channel, cfg.trials, cfg.seed);
        Samples::from_gain(gain, cfg, model)
    }

    pub fn from_gain(gain: EmpiricalSample, cfg: &RunConfig, model: &Model) -> Self {
        let (power, brt) = power_and_brt(&gain, &model.scenario, &cfg.battery());
        Samples { gain, power, brt }
    }

    pub fn get(&self, target: Target) -> &EmpiricalSample {
        match target {
            Target::Gain => &self.gain,
            Target::Power => &self.power,
            Target::Brt => &self.brt,
        }
    }
}

fn is_domain(e: &Error) -> bool {
    matches!(e, Error::Domain { .. } | Error::Pole(_) | Error::MomentUndefined { .. })
}

/// One column of a curve; domain errors leave the cell empty.
pub fn curve_column(
    model: &Model,
    target: Target,
    variant: Variant,
    curve: Curve,
    grid: &[f64],
    sample: Option<&EmpiricalSample>,
) -> Result<Vec<Option<f64>>, CliError> {
    if variant == Variant::N1 && model.n() != 1 {
        return Err(CliError::Usage(format!(
            "the n1 variant needs n = 1, got n = {}",
            model.n()
        )));
    }
    if variant == Variant::Empirical {
        let s = sample.expect("empirical column without a sample");
        return Ok(match curve {
            Curve::Pdf => {
                let h = Histogram::freedman_diaconis(s, grid[0], grid[grid.len() - 1]);
                grid.iter().map(|&x| Some(h.density_at(x))).collect()
            }
            Curve::Cdf => grid.iter().map(|&x| Some(s.cdf(x))).collect(),
        });
    }
    let mut out = Vec::with_capacity(grid.len());
    let mut skipped = 0;
    for &x in grid {
        match model.evaluate(target, variant, curve, x) {
            Ok(v) => out.push(Some(v)),
            Err(e) if is_domain(&e) => {
                skipped += 1;
                out.push(None);
            }
            Err(e) => return Err(e.into()),
        }
    }
    if skipped > 0 {
        warn!("{variant}: {skipped} grid point(s) outside the domain left empty");
    }
    Ok(out)
}

pub fn grid_for(cfg: &RunConfig, model: &Model, target: Target) -> Result<Vec<f64>, CliError> {
    let (dmin, dmax) = model.default_range(target, cfg.grid.scale);
    let (lo, hi) = (cfg.grid.min.unwrap_or(dmin), cfg.grid.max.unwrap_or(dmax));
    if !(lo < hi) {
        return Err(CliError::Usage(format!("empty grid [{lo}, {hi}]")));
    }
    if cfg.grid.scale == Scale::Log && lo <= 0.0 {
        return Err(CliError::Usage("a log grid needs grid_min > 0".into()));
    }
    Ok(cfg.grid.points_between(lo, hi))
}

/// `pdf` / `cdf`: header `x,<variants>`.
pub fn run_curve(cfg: &RunConfig, target: Target, variants: &[Variant], curve: Curve) -> Result<(), CliError> {
    let model = Model::new(cfg)?;
    let grid = grid_for(cfg, &model, target)?;
    let samples = if variants.contains(&Variant::Empirical) {
        if cfg.trials == 0 {
            return Err(CliError::Usage("the empirical variant needs trials > 0".into()));
        }
        Some(Samples::draw(cfg, &model))
    } else {
        None
    };
    let mut columns = Vec::new();
    for &v in variants {
        columns.push(curve_column(&model, target, v, curve, &grid, samples.as_ref().map(|s| s.get(target)))?);
    }
    let mut header = vec!["x".to_string()];
    header.extend(variants.iter().map(ToString::to_string));
    let rows: Vec<Vec<String>> = grid
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let mut row = vec![cell(Some(x), cfg.precision)];
            row.extend(columns.iter().map(|c| cell(c[i], cfg.precision)));
            row
        })
        .collect();
    write_csv(cfg.out.as_deref(), &header, &rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    N,
    #[value(name = "ps_dbm", alias = "ps-dbm")]
    PsDbm,
    #[value(name = "d1_frac", alias = "d1-frac")]
    D1Frac,
    #[value(name = "cb_mah", alias = "cb-mah")]
    CbMah,
}

impl Axis {
    fn apply(self, cfg: &mut RunConfig, v: f64) -> Result<(), CliError> {
        match self {
            Axis::N => {
                if v < 1.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
                    return Err(CliError::Usage(format!("n must be a positive integer, got {v}")));
                }
                cfg.n = v as u32;
            }
            Axis::PsDbm => cfg.ps_dbm = v,
            Axis::D1Frac => cfg.d1_frac = v,
            Axis::CbMah => cfg.cb_mah = v,
        }
        Ok(())
    }
}

/// Parses `a,b,c` or an inclusive range `start:stop:step`.
pub fn parse_values(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("invalid value list {spec:?}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = spec.split(':').collect();
    let values = match parts.as_slice() {
        [single] => single.split(',').map(num).collect::<Result<Vec<_>, _>>()?,
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if !(step > 0.0) || !(stop >= start) {
                return Err(bad());
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            if count > 100_000 {
                return Err(CliError::Usage(format!("{count} sweep values is too many")));
            }
            // recompute from the index so the values carry no accumulated drift
            (0..count).map(|i| round_sig(start + i as f64 * step, 12)).collect()
        }
        _ => return Err(bad()),
    };
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(bad());
    }
    Ok(values)
}

pub const SWEEP_COLUMNS: [&str; 10] = [
    "axis_value",
    "mean_hr",
    "mean_clt_hr",
    "variance",
    "skewness",
    "kurtosis",
    "aof",
    "mc_mean_hr",
    "mc_se",
    "ks",
];

/// Gain samples and their KS statistics keyed by element count, reused
/// across sweep rows. The recharging time is a decreasing function of the
/// gain, so its KS statistic equals that of the gain and depends on N only.
#[derive(Default)]
pub struct GainCache(HashMap<u32, (EmpiricalSample, f64)>);

impl GainCache {
    fn get(&mut self, cfg: &RunConfig, model: &Model) -> Result<&(EmpiricalSample, f64), CliError> {
        use std::collections::hash_map::Entry;
        Ok(match self.0.entry(cfg.n) {
            Entry::Occupied(e) => e.into_mut(),
            Entry::Vacant(e) => {
                let gain = simulate_gain(&model.scenario.channel, cfg.trials, cfg.seed);
                let ks = ks_distance(&gain, |b| model.model_cdf(Target::Gain, b))?;
                e.insert((gain, ks))
            }
        })
    }
}

fn sweep_row(cfg: &RunConfig, cache: &mut GainCache) -> Result<Vec<Option<f64>>, CliError> {
    cfg.validate()?;
    let model = Model::new(cfg)?;
    let s = brt_summary(&model.scenario, &model.params, model.alpha);
    let mut row = vec![
        s.mean,
        Some(brt_mean_clt(&model.scenario, model.alpha)),
        s.variance,
        s.skewness,
        s.kurtosis,
        s.aof,
    ];
    if cfg.trials > 0 {
        let (gain, ks) = cache.get(cfg, &model)?;
        let (_, brt) = power_and_brt(gain, &model.scenario, &cfg.battery());
        let m = empirical_moments(&brt, 1)[0];
        row.extend([Some(m.value), Some(m.std_error), Some(*ks)]);
    } else {
        row.extend([None, None, None]);
    }
    Ok(row)
}

/// Sweep rows; a failing row is logged and written with empty cells.
pub fn sweep_table(
    cfg: &RunConfig,
    axis: Axis,
    values: &[f64],
    extra: &[(&str, f64)],
) -> Result<(Vec<String>, Vec<Vec<String>>), CliError> {
    let mut header: Vec<String> = SWEEP_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend(extra.iter().map(|(k, _)| k.to_string()));
    let mut cache = GainCache::default();
    let mut rows = Vec::with_capacity(values.len());
    for &v in values {
        let mut row_cfg = cfg.clone();
        axis.apply(&mut row_cfg, v)?;
        let cells = match sweep_row(&row_cfg, &mut cache) {
            Ok(c) => c,
            Err(e) => {
                warn!("{axis:?} = {v}: {e}");
                vec![None; SWEEP_COLUMNS.len() - 1]
            }
        };
        info!("{axis:?} = {v} done");
        let mut row = vec![cell(Some(v), cfg.precision)];
        row.extend(cells.into_iter().map(|c| cell(c, cfg.precision)));
        row.extend(extra.iter().map(|(_, x)| cell(Some(*x), cfg.precision)));
        rows.push(row);
    }
    Ok((header, rows))
}

pub fn run_sweep(cfg: &RunConfig, axis: Axis, values: &[f64]) -> Result<(), CliError> {
    let (header, rows) = sweep_table(cfg, axis, values, &[])?;
    write_csv(cfg.out.as_deref(), &header, &rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Inconclusive,
    Fail,
    #[serde(rename = "undefined (divergent)")]
    Undefined,
    /// The moment exists but its estimator has infinite variance.
    #[serde(rename = "unchecked (infinite estimator variance)")]
    Unchecked,
}

#[derive(Debug, Serialize)]
pub struct KsCheck {
    pub quantity: &'static str,
    pub statistic: f64,
    pub threshold: f64,
    /// Kolmogorov 99% critical value `1.63/√n`.
    pub resolution: f64,
    pub status: Status,
}

#[derive(Debug, Serialize)]
pub struct MomentCheck {
    pub quantity: &'static str,
    pub order: u32,
    pub analytic: Option<f64>,
    pub empirical: f64,
    pub std_error: f64,
    pub z: Option<f64>,
    pub status: Status,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub n: u32,
    pub trials: usize,
    pub seed: u64,
    pub ps_dbm: f64,
    pub ks_gain: f64,
    pub ks_power: f64,
    pub ks_brt: f64,
    pub ks: Vec<KsCheck>,
    pub moments: Vec<MomentCheck>,
    /// Relative width `3 s.e. / |value|` a passing moment must resolve.
    pub moment_resolution: f64,
    pub status: Status,
}

pub const MOMENT_RESOLUTION: f64 = 0.01;

fn ks_status(d: f64, threshold: f64, resolution: f64) -> Status {
    if d <= threshold {
        Status::Pass
    } else if d <= threshold + resolution {
        Status::Inconclusive
    } else {
        Status::Fail
    }
}

fn moment_check(quantity: &'static str, analytic: Option<f64>, est: risbrt::montecarlo::MomentEstimate) -> MomentCheck {
    let (z, status) = match analytic {
        None => (None, Status::Undefined),
        Some(a) => {
            let z = (est.value - a).abs() / est.std_error;
            let status = if !(z <= 3.0) {
                Status::Fail
            } else if 3.0 * est.std_error <= MOMENT_RESOLUTION * a.abs() {
                Status::Pass
            } else {
                Status::Inconclusive
            };
            (Some(z), status)
        }
    };
    MomentCheck {
        quantity,
        order: est.order,
        analytic,
        empirical: est.value,
        std_error: est.std_error,
        z,
        status,
    }
}

pub fn validate_report(cfg: &RunConfig) -> Result<Report, CliError> {
    if cfg.trials < 2 {
        return Err(CliError::Usage("mc-validate needs at least 2 trials".into()));
    }
    let model = Model::new(cfg)?;
    let samples = Samples::draw(cfg, &model);
    let n = cfg.trials as f64;
    let threshold = if cfg.n == 1 { 0.005 } else { 0.01 };
    let resolution = 1.63 / n.sqrt();
    let mut ks = Vec::new();
    for (name, target) in [("gain", Target::Gain), ("power", Target::Power), ("brt", Target::Brt)] {
        let d = ks_distance(samples.get(target), |x| model.model_cdf(target, x))?;
        ks.push(KsCheck {
            quantity: name,
            statistic: d,
            threshold,
            resolution,
            status: ks_status(d, threshold, resolution),
        });
    }

    let mut moments = Vec::new();
    let g = gain_moments(&model.scenario.channel).as_array();
    for est in empirical_moments(&samples.gain, 4) {
        moments.push(moment_check("gain", Some(g[est.order as usize - 1]), est));
    }
    let pbar = avg_received_power(&model.scenario);
    for est in empirical_moments(&samples.power, 2) {
        let k = est.order as i32;
        moments.push(moment_check("power", Some(pbar.powi(k) * g[2 * k as usize - 1]), est));
    }
    let brt_m = |k: u32| brt_moment(k, &model.scenario, &model.params, model.alpha);
    for est in empirical_moments(&samples.brt, 4) {
        let k = est.order;
        let analytic = match brt_m(k) {
            Ok(v) => Some(v),
            Err(e) if is_domain(&e) => None,
            Err(e) => return Err(e.into()),
        };
        let mut check = moment_check("brt", analytic, est);
        if analytic.is_some() && brt_m(2 * k).is_err() {
            check.status = Status::Unchecked;
        }
        moments.push(check);
    }

    let statuses = ks.iter().map(|c| c.status).chain(moments.iter().map(|c| c.status));
    let mut status = Status::Pass;
    for s in statuses {
        match s {
            Status::Fail => status = Status::Fail,
            Status::Inconclusive if status == Status::Pass => status = Status::Inconclusive,
            _ => {}
        }
    }
    Ok(Report {
        n: cfg.n,
        trials: cfg.trials,
        seed: cfg.seed,
        ps_dbm: cfg.ps_dbm,
        ks_gain: ks[0].statistic,
        ks_power: ks[1].statistic,
        ks_brt: ks[2].statistic,
        ks,
        moments,
        moment_resolution: MOMENT_RESOLUTION,
        status,
    })
}

/// Rounds every float in a JSON tree to `digits` significant digits.
fn round_json(v: &mut serde_json::Value, digits: usize) {
    match v {
        serde_json::Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().unwrap_or(f64::NAN), digits);
            if let Some(r) = serde_json::Number::from_f64(x) {
                *n = r;
            }
        }
        serde_json::Value::Array(a) => a.iter_mut().for_each(|x| round_json(x, digits)),
        serde_json::Value::Object(o) => o.values_mut().for_each(|x| round_json(x, digits)),
        _ => {}
    }
}

pub fn write_report(report: &Report, digits: usize, path: Option<&Path>) -> Result<(), CliError> {
    let mut value = serde_json::to_value(report)?;
    round_json(&mut value, digits);
    let mut w = open(path)?;
    serde_json::to_writer_pretty(&mut w, &value)?;
    let io = |source| CliError::Io {
        path: path.map(Path::to_path_buf).unwrap_or_else(|| "<stdout>".into()),
        source,
    };
    writeln!(w).map_err(io)?;
    w.flush().map_err(io)
}

pub fn run_validate(cfg: &RunConfig) -> Result<(), CliError> {
    let report = validate_report(cfg)?;
    write_report(&report, cfg.precision, cfg.out.as_deref())?;
    match report.status {
        Status::Fail => Err(CliError::Validation(format!(
            "N = {}: at least one check failed",
            cfg.n
        ))),
        _ => Ok(()),
    }
}
