//! Run configuration: a flat `key = value` file with command-line overrides.

use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, ValueEnum};
use risbrt::brt::BatteryProfile;
use risbrt::channel::ChannelConfig;
use risbrt::power::{dbm_to_watts, ScenarioConfig};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scale {
    Linear,
    Log,
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scale::Linear => "linear",
            Scale::Log => "log",
        })
    }
}

impl FromStr for Scale {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "linear" => Ok(Scale::Linear),
            "log" => Ok(Scale::Log),
            _ => Err(CliError::Usage(format!("grid_scale must be linear or log, got {s:?}"))),
        }
    }
}

/// Evaluation grid. Unset bounds are chosen per target.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub points: usize,
    pub scale: Scale,
}

impl Grid {
    pub fn points_between(&self, min: f64, max: f64) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let t = i as f64 / last;
                match self.scale {
                    Scale::Linear => min + (max - min) * t,
                    Scale::Log => (min.ln() + (max.ln() - min.ln()) * t).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub ps_dbm: f64,
    pub n: u32,
    /// Source to receiver distance in meters.
    pub d_tot: f64,
    pub d1_frac: f64,
    /// Defaults to `1 - d1_frac`.
    pub d2_frac: Option<f64>,
    pub delta: f64,
    pub eta: f64,
    pub cb_mah: f64,
    pub dd: f64,
    pub vb: f64,
    pub trials: usize,
    pub seed: u64,
    pub grid: Grid,
    pub precision: usize,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            ps_dbm: 15.0,
            n: 4,
            d_tot: 5.0,
            d1_frac: 0.5,
            d2_frac: None,
            delta: 2.7,
            eta: 0.5,
            cb_mah: 10.0,
            dd: 0.4,
            vb: 1.2,
            trials: 1_000_000,
            seed: 2024,
            grid: Grid {
                min: None,
                max: None,
                points: 201,
                scale: Scale::Linear,
            },
            precision: 9,
            out: None,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Usage(format!("invalid value {value:?} for {key}")))
}

impl RunConfig {
    /// Parses a `key = value` file on top of the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        let mut seen = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("line {}: expected key = value, got {raw:?}", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if seen.contains(&key) {
                return Err(CliError::Usage(format!("line {}: duplicate key {key}", lineno + 1)));
            }
            seen.push(key);
            cfg.set(key, value)?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "ps_dbm" => self.ps_dbm = parse_value(key, value)?,
            "n" => self.n = parse_value(key, value)?,
            "d_tot" => self.d_tot = parse_value(key, value)?,
            "d1_frac" => self.d1_frac = parse_value(key, value)?,
            "d2_frac" => self.d2_frac = Some(parse_value(key, value)?),
            "delta" => self.delta = parse_value(key, value)?,
            "eta" => self.eta = parse_value(key, value)?,
            "cb_mah" => self.cb_mah = parse_value(key, value)?,
            "dd" => self.dd = parse_value(key, value)?,
            "vb" => self.vb = parse_value(key, value)?,
            "trials" => self.trials = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "grid_min" => self.grid.min = Some(parse_value(key, value)?),
            "grid_max" => self.grid.max = Some(parse_value(key, value)?),
            "grid_points" => self.grid.points = parse_value(key, value)?,
            "grid_scale" => self.grid.scale = value.parse()?,
            "precision" => self.precision = parse_value(key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            _ => return Err(CliError::Usage(format!("unknown configuration key {key:?}"))),
        }
        Ok(())
    }

    /// Inverse of [`RunConfig::parse`]; floats are written in shortest
    /// round-trip form.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: &dyn fmt::Display| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("ps_dbm", &self.ps_dbm);
        put("n", &self.n);
        put("d_tot", &self.d_tot);
        put("d1_frac", &self.d1_frac);
        if let Some(v) = self.d2_frac {
            put("d2_frac", &v);
        }
        put("delta", &self.delta);
        put("eta", &self.eta);
        put("cb_mah", &self.cb_mah);
        put("dd", &self.dd);
        put("vb", &self.vb);
        put("trials", &self.trials);
        put("seed", &self.seed);
        if let Some(v) = self.grid.min {
            put("grid_min", &v);
        }
        if let Some(v) = self.grid.max {
            put("grid_max", &v);
        }
        put("grid_points", &self.grid.points);
        put("grid_scale", &self.grid.scale);
        put("precision", &self.precision);
        if let Some(p) = &self.out {
            put("out", &p.display());
        }
        s
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Usage(msg));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if !(self.d1_frac > 0.0 && self.d1_frac < 1.0) {
            return bad(format!("d1_frac must lie in (0, 1), got {}", self.d1_frac));
        }
        if let Some(f) = self.d2_frac {
            if !(f > 0.0 && f < 1.0) {
                return bad(format!("d2_frac must lie in (0, 1), got {f}"));
            }
        }
        if !(self.d_tot > 0.0 && self.d_tot.is_finite()) {
            return bad(format!("d_tot must be positive, got {}", self.d_tot));
        }
        if !self.ps_dbm.is_finite() {
            return bad(format!("ps_dbm must be finite, got {}", self.ps_dbm));
        }
        if !(6..=17).contains(&self.precision) {
            return bad(format!("precision must lie in [6, 17], got {}", self.precision));
        }
        if self.grid.points < 2 {
            return bad(format!("grid_points must be at least 2, got {}", self.grid.points));
        }
        if let (Some(lo), Some(hi)) = (self.grid.min, self.grid.max) {
            if !(lo < hi) {
                return bad(format!("grid_min {lo} must be below grid_max {hi}"));
            }
        }
        if self.grid.scale == Scale::Log && self.grid.min.is_some_and(|v| v <= 0.0) {
            return bad("a log grid needs grid_min > 0".into());
        }
        self.battery().validate()?;
        self.scenario()?;
        Ok(())
    }

    pub fn d1(&self) -> f64 {
        self.d1_frac * self.d_tot
    }

    pub fn d2(&self) -> f64 {
        self.d2_frac.unwrap_or(1.0 - self.d1_frac) * self.d_tot
    }

    pub fn scenario(&self) -> Result<ScenarioConfig, CliError> {
        Ok(ScenarioConfig::new(
            dbm_to_watts(self.ps_dbm),
            self.d1(),
            self.d2(),
            self.delta,
            ChannelConfig::new(self.n)?,
        )?)
    }

    pub fn battery(&self) -> BatteryProfile {
        BatteryProfile {
            capacity: self.cb_mah * 1e-3,
            discharge_depth: self.dd,
            voltage: self.vb,
            rfeh_efficiency: self.eta,
        }
    }
}

/// `--config` plus one override flag per configuration key.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// Configuration file with `key = value` lines.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (directory for `fig`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte Carlo trials.
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Transmit power in dBm.
    #[arg(long = "ps_dbm", alias = "ps-dbm", global = true, allow_negative_numbers = true)]
    pub ps_dbm: Option<f64>,
    /// Number of reflecting elements.
    #[arg(long, short = 'n', global = true)]
    pub n: Option<u32>,
    /// Source to receiver distance in meters.
    #[arg(long = "d_tot", alias = "d-tot", global = true)]
    pub d_tot: Option<f64>,
    /// Source to RIS distance as a fraction of d_tot.
    #[arg(long = "d1_frac", alias = "d1-frac", global = true)]
    pub d1_frac: Option<f64>,
    /// RIS to receiver distance as a fraction of d_tot (default 1 - d1_frac).
    #[arg(long = "d2_frac", alias = "d2-frac", global = true)]
    pub d2_frac: Option<f64>,
    /// Path-loss exponent.
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    /// RF energy harvesting efficiency.
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    /// Battery capacity in mAh.
    #[arg(long = "cb_mah", alias = "cb-mah", global = true)]
    pub cb_mah: Option<f64>,
    /// Depth of discharge.
    #[arg(long, global = true)]
    pub dd: Option<f64>,
    /// Battery voltage.
    #[arg(long, global = true)]
    pub vb: Option<f64>,
    #[arg(long = "grid_min", alias = "grid-min", global = true)]
    pub grid_min: Option<f64>,
    #[arg(long = "grid_max", alias = "grid-max", global = true)]
    pub grid_max: Option<f64>,
    #[arg(long = "grid_points", alias = "grid-points", global = true)]
    pub grid_points: Option<usize>,
    #[arg(long = "grid_scale", alias = "grid-scale", global = true)]
    pub grid_scale: Option<Scale>,
    /// Significant digits in CSV and JSON output.
    #[arg(long, global = true)]
    pub precision: Option<usize>,
}

impl ConfigArgs {
    /// Defaults, then the config file, then flags.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                    path: path.clone(),
                    source,
                })?;
                RunConfig::parse(&text)?
            }
            None => RunConfig::default(),
        };
        macro_rules! apply {
            ($($field:ident => $target:expr),* $(,)?) => {
                $(if let Some(v) = self.$field.clone() { $target = v; })*
            };
        }
        apply!(
            seed => cfg.seed,
            trials => cfg.trials,
            ps_dbm => cfg.ps_dbm,
            n => cfg.n,
            d_tot => cfg.d_tot,
            d1_frac => cfg.d1_frac,
            delta => cfg.delta,
            eta => cfg.eta,
            cb_mah => cfg.cb_mah,
            dd => cfg.dd,
            vb => cfg.vb,
            grid_points => cfg.grid.points,
            grid_scale => cfg.grid.scale,
            precision => cfg.precision,
        );
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        if self.d2_frac.is_some() {
            cfg.d2_frac = self.d2_frac;
        }
        if self.grid_min.is_some() {
            cfg.grid.min = self.grid_min;
        }
        if self.grid_max.is_some() {
            cfg.grid.max = self.grid_max;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let cfg = RunConfig {
            ps_dbm: 17.3,
            d2_frac: Some(0.35),
            grid: Grid {
                min: Some(1e-7),
                max: Some(0.1 + 0.2),
                points: 33,
                scale: Scale::Log,
            },
            out: Some(PathBuf::from("runs/a.csv")),
            ..RunConfig::default()
        };
        let text = cfg.serialize();
        let back = RunConfig::parse(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.serialize(), text);
        assert_eq!(RunConfig::parse(&RunConfig::default().serialize()).unwrap(), RunConfig::default());
    }

    #[test]
    fn comments_and_errors() {
        let cfg = RunConfig::parse("# scenario\nn = 8  # elements\n\nps_dbm=20\n").unwrap();
        assert_eq!((cfg.n, cfg.ps_dbm), (8, 20.0));
        assert!(RunConfig::parse("n = 8\nn = 9\n").is_err());
        assert!(RunConfig::parse("colour = blue\n").is_err());
        assert!(RunConfig::parse("n = eight\n").is_err());
        assert!(RunConfig::parse("just text\n").is_err());
    }

    #[test]
    fn geometry_and_battery() {
        let cfg = RunConfig::default();
        assert_eq!((cfg.d1(), cfg.d2()), (2.5, 2.5));
        assert!((risbrt::brt::conversion_coefficient(&cfg.battery()) - 9.6e-3).abs() < 1e-15);
        let mut bad = cfg.clone();
        bad.precision = 20;
        assert!(bad.validate().is_err());
        let mut bad = cfg;
        bad.grid.min = Some(2.0);
        bad.grid.max = Some(1.0);
        assert!(bad.validate().is_err());
    }
}
