//! Figure presets. Each writes one or more CSV files into a directory.

use std::path::Path;

use clap::ValueEnum;
use log::info;

use crate::commands::{curve_column, sweep_table, Axis, Curve, Model, Samples, Target, Variant};
use crate::config::{RunConfig, Scale};
use crate::error::CliError;
use crate::output::{cell, write_csv};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// BRT density at 15 dBm for several element counts, with the Gaussian limit.
    Fig1,
    /// BRT density for N = 1, 2, 4 at 7, 15 and 40 dBm.
    Fig2,
    /// BRT CDF for N = 1, 2, 4, 8 at 7 and 30 dBm.
    Fig3,
    /// Mean BRT against transmit power.
    Fig4,
    /// Mean BRT against RIS position.
    Fig5,
    /// Mean BRT against battery capacity.
    Fig6,
    /// Amount of fading against element count.
    Fig7,
    All,
}

const ALL: [Preset; 7] = [
    Preset::Fig1,
    Preset::Fig2,
    Preset::Fig3,
    Preset::Fig4,
    Preset::Fig5,
    Preset::Fig6,
    Preset::Fig7,
];

type Column = (String, Vec<Option<f64>>);

fn write_curves(dir: &Path, name: &str, digits: usize, x_name: &str, grid: &[f64], cols: &[Column]) -> Result<(), CliError> {
    let mut header = vec![x_name.to_string()];
    header.extend(cols.iter().map(|(n, _)| n.clone()));
    let rows: Vec<Vec<String>> = grid
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let mut row = vec![cell(Some(x), digits)];
            row.extend(cols.iter().map(|(_, c)| cell(c[i], digits)));
            row
        })
        .collect();
    write_csv(Some(&dir.join(name)), &header, &rows)
}

/// Analytic column (the closed form for N = 1) plus, with trials, a Monte Carlo column.
fn brt_columns(cfg: &RunConfig, curve: Curve, grid: &[f64], tag: &str, cols: &mut Vec<Column>) -> Result<(), CliError> {
    let model = Model::new(cfg)?;
    let variant = if cfg.n == 1 { Variant::N1 } else { Variant::Exact };
    cols.push((format!("exact_{tag}"), curve_column(&model, Target::Brt, variant, curve, grid, None)?));
    if cfg.trials > 0 {
        let s = Samples::draw(cfg, &model);
        cols.push((
            format!("mc_{tag}"),
            curve_column(&model, Target::Brt, Variant::Empirical, curve, grid, Some(&s.brt))?,
        ));
    }
    Ok(())
}

fn grid(cfg: &RunConfig, lo: f64, hi: f64, scale: Scale) -> Vec<f64> {
    let mut g = cfg.grid.clone();
    g.scale = scale;
    g.points_between(cfg.grid.min.unwrap_or(lo), cfg.grid.max.unwrap_or(hi))
}

fn fig1(cfg: &RunConfig, dir: &Path) -> Result<(), CliError> {
    let mut base = cfg.clone();
    base.ps_dbm = 15.0;
    let g = grid(cfg, 1e-3, 10.0, Scale::Log);
    let mut cols = Vec::new();
    for n in [4u32, 6, 8, 10, 50] {
        base.n = n;
        brt_columns(&base, Curve::Pdf, &g, &format!("n{n}"), &mut cols)?;
        if n >= 10 {
            let model = Model::new(&base)?;
            cols.push((format!("clt_n{n}"), curve_column(&model, Target::Brt, Variant::Clt, Curve::Pdf, &g, None)?));
        }
    }
    write_curves(dir, "fig1.csv", cfg.precision, "tau_hr", &g, &cols)
}

fn fig2(cfg: &RunConfig, dir: &Path) -> Result<(), CliError> {
    let g = grid(cfg, 1e-3, 100.0, Scale::Log);
    let mut cols = Vec::new();
    let mut run = cfg.clone();
    for ps in [7.0, 15.0, 40.0] {
        for n in [1u32, 2, 4] {
            run.ps_dbm = ps;
            run.n = n;
            brt_columns(&run, Curve::Pdf, &g, &format!("ps{ps}_n{n}"), &mut cols)?;
        }
    }
    write_curves(dir, "fig2.csv", cfg.precision, "tau_hr", &g, &cols)
}

fn fig3(cfg: &RunConfig, dir: &Path) -> Result<(), CliError> {
    let g = grid(cfg, 0.0, 40.0, Scale::Linear);
    let mut cols = Vec::new();
    let mut run = cfg.clone();
    for ps in [7.0, 30.0] {
        for n in [1u32, 2, 4, 8] {
            run.ps_dbm = ps;
            run.n = n;
            brt_columns(&run, Curve::Cdf, &g, &format!("ps{ps}_n{n}"), &mut cols)?;
        }
    }
    write_curves(dir, "fig3.csv", cfg.precision, "tau_hr", &g, &cols)
}

fn sweep_files(
    cfg: &RunConfig,
    dir: &Path,
    fig: &str,
    axis: Axis,
    values: &[f64],
    ns: &[u32],
    extra: &[(&str, f64)],
) -> Result<(), CliError> {
    for &n in ns {
        let mut run = cfg.clone();
        run.n = n;
        let (header, rows) = sweep_table(&run, axis, values, extra)?;
        write_csv(Some(&dir.join(format!("{fig}_n{n}.csv"))), &header, &rows)?;
    }
    Ok(())
}

fn steps(start: f64, stop: f64, step: f64) -> Vec<f64> {
    crate::commands::parse_values(&format!("{start}:{stop}:{step}")).expect("static range")
}

fn run_one(preset: Preset, cfg: &RunConfig, dir: &Path) -> Result<(), CliError> {
    let mut at20 = cfg.clone();
    at20.ps_dbm = 20.0;
    match preset {
        Preset::Fig1 => fig1(cfg, dir),
        Preset::Fig2 => fig2(cfg, dir),
        Preset::Fig3 => fig3(cfg, dir),
        Preset::Fig4 => sweep_files(cfg, dir, "fig4", Axis::PsDbm, &steps(0.0, 40.0, 5.0), &[4, 8, 16, 32], &[]),
        Preset::Fig5 => sweep_files(&at20, dir, "fig5", Axis::D1Frac, &steps(0.1, 0.9, 0.05), &[5, 10, 20], &[]),
        Preset::Fig6 => sweep_files(&at20, dir, "fig6", Axis::CbMah, &steps(1.0, 20.0, 1.0), &[5, 10, 20], &[]),
        Preset::Fig7 => {
            // a single element has no finite mean, so the curve starts at N = 3;
            // the SISO reference is a constant column
            let (header, rows) = sweep_table(&at20, Axis::N, &steps(3.0, 64.0, 1.0), &[("siso_aof", 1.0)])?;
            write_csv(Some(&dir.join("fig7.csv")), &header, &rows)
        }
        Preset::All => unreachable!(),
    }
}

pub fn run(preset: Preset, cfg: &RunConfig) -> Result<(), CliError> {
    let dir = cfg.out.clone().unwrap_or_else(|| ".".into());
    std::fs::create_dir_all(&dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
    let list: Vec<Preset> = if preset == Preset::All { ALL.to_vec() } else { vec![preset] };
    for p in list {
        let start = std::time::Instant::now();
        run_one(p, cfg, &dir)?;
        info!("{p:?} written in {:.1} s", start.elapsed().as_secs_f64());
    }
    Ok(())
}
