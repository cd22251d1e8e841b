//! The four experiment drivers behind the CLI subcommands.

use crate::config::ExperimentConfig;
use crate::output::{Cell, CsvTable};
use anj::channels::{dbm_to_watts, watts_to_dbm};
use anj::energy_chain::channel_ready_prob;
use anj::error::{Error, Result};
use anj::mc_sim::{estimate, simulate_batched, SimScheme, DEFAULT_BATCHES};
use anj::secrecy::{evaluate, optimal_jamming_power, SecrecyReport, SecrecyVariant};
use rayon::prelude::*;
use std::path::PathBuf;

const ALL_VARIANTS: [SecrecyVariant; 3] = [
    SecrecyVariant::FdFinite,
    SecrecyVariant::HdFinite,
    SecrecyVariant::FdInfinite,
];

/// Closed-form evaluation of every variant across the sweep.
pub fn cmd_analyze(cfg: &ExperimentConfig) -> Result<String> {
    let points = cfg.sweep_points()?;
    let rows: Vec<Result<Vec<(String, String, SecrecyReport, f64)>>> = points
        .par_iter()
        .map(|(axis, label, point)| {
            let (params, storage) = point.to_model()?;
            let q_c = channel_ready_prob(&params)?;
            let mut out = Vec::new();
            for variant in ALL_VARIANTS {
                let report = evaluate(&params, &storage, variant)?;
                out.push((axis.clone(), label.clone(), report, q_c));
            }
            Ok(out)
        })
        .collect();

    let mut table = CsvTable::new(&[
        "sweep_axis",
        "sweep_value",
        "variant",
        "p_s_w",
        "p_j_w",
        "q_c",
        "ready_prob",
        "p_so",
        "p_nzsc",
        "kappa1",
        "kappa2",
        "varphi",
        "beta1",
        "beta2",
        "mu1",
        "mu2",
    ])
    .with_config_echo(&cfg.echo());
    for (point_rows, (_, _, point)) in rows.into_iter().zip(&points) {
        for (axis, label, r, q_c) in point_rows? {
            table.push(vec![
                axis.into(),
                label.into(),
                r.variant.label().into(),
                point.p_s_w.into(),
                point.p_j_w.into(),
                q_c.into(),
                r.ready_prob.into(),
                r.p_so.into(),
                r.p_nzsc.into(),
                r.constants.kappa1.into(),
                r.constants.kappa2.into(),
                r.constants.varphi.into(),
                r.constants.beta1.into(),
                r.constants.beta2.into(),
                r.constants.mu1.into(),
                r.constants.mu2.into(),
            ]);
        }
    }
    Ok(table.render())
}

/// Monte Carlo runs with the closed forms side by side.
pub fn cmd_simulate(cfg: &ExperimentConfig) -> Result<String> {
    if cfg.blocks < 10_000 {
        eprintln!(
            "warning: {} blocks resolve probabilities only to about {:.1e}; \
             expect noisy agreement ratios",
            cfg.blocks,
            1.0 / (cfg.blocks as f64).sqrt()
        );
    }
    if !cfg.mc_enabled {
        eprintln!(
            "warning: mc_enabled = false; emitting closed forms with empty empirical columns"
        );
    }
    let points = cfg.sweep_points()?;
    type SimRow = (
        String,
        String,
        SecrecyVariant,
        SecrecyReport,
        Option<SimStats>,
    );
    let rows: Vec<Result<Vec<SimRow>>> = points
        .par_iter()
        .map(|(axis, label, point)| {
            let (params, storage) = point.to_model()?;
            let mut out = Vec::new();
            for (variant, scheme) in [
                (SecrecyVariant::FdFinite, SimScheme::FullDuplex),
                (SecrecyVariant::HdFinite, SimScheme::HalfDuplex),
            ] {
                let report = evaluate(&params, &storage, variant)?;
                let sim = if cfg.mc_enabled {
                    let (stats, _) = simulate_batched(
                        scheme,
                        &params,
                        &storage,
                        point.blocks,
                        point.seed,
                        DEFAULT_BATCHES,
                    )?;
                    let emp = estimate(&stats)?;
                    let ready_emp: f64 = emp.occupancy[storage.tau()..].iter().sum();
                    Some(SimStats {
                        blocks: emp.blocks,
                        p_so: emp.p_so,
                        p_so_se: emp.p_so_se,
                        p_nzsc: emp.p_nzsc,
                        p_nzsc_se: emp.p_nzsc_se,
                        ready: ready_emp,
                        oeh_freq: emp.oeh_freq,
                    })
                } else {
                    None
                };
                out.push((axis.clone(), label.clone(), variant, report, sim));
            }
            Ok(out)
        })
        .collect();

    let mut table = CsvTable::new(&[
        "sweep_axis",
        "sweep_value",
        "variant",
        "blocks",
        "p_so_mc",
        "p_so_mc_se",
        "p_so",
        "p_so_dev_over_se",
        "p_nzsc_mc",
        "p_nzsc_mc_se",
        "p_nzsc",
        "p_nzsc_dev_over_se",
        "ready_mc",
        "ready_prob",
        "oeh_freq_mc",
    ])
    .with_config_echo(&cfg.echo());
    for point_rows in rows {
        for (axis, label, variant, r, sim) in point_rows? {
            let s = sim.unwrap_or(SimStats {
                blocks: 0,
                p_so: f64::NAN,
                p_so_se: f64::NAN,
                p_nzsc: f64::NAN,
                p_nzsc_se: f64::NAN,
                ready: f64::NAN,
                oeh_freq: f64::NAN,
            });
            table.push(vec![
                axis.into(),
                label.into(),
                variant.label().into(),
                Cell::Int(s.blocks),
                s.p_so.into(),
                s.p_so_se.into(),
                r.p_so.into(),
                dev_over_se(s.p_so, r.p_so, s.p_so_se).into(),
                s.p_nzsc.into(),
                s.p_nzsc_se.into(),
                r.p_nzsc.into(),
                dev_over_se(s.p_nzsc, r.p_nzsc, s.p_nzsc_se).into(),
                s.ready.into(),
                r.ready_prob.into(),
                s.oeh_freq.into(),
            ]);
        }
    }
    Ok(table.render())
}

struct SimStats {
    blocks: u64,
    p_so: f64,
    p_so_se: f64,
    p_nzsc: f64,
    p_nzsc_se: f64,
    ready: f64,
    oeh_freq: f64,
}

fn dev_over_se(emp: f64, closed: f64, se: f64) -> f64 {
    let dev = (emp - closed).abs();
    if se > 0.0 {
        dev / se
    } else if dev == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Exhaustive jamming-power search per sweep point, both schemes.
pub fn cmd_optimize_pj(cfg: &ExperimentConfig) -> Result<String> {
    let points = cfg.sweep_points()?;
    let grid = cfg.pj_grid_watts();
    type OptRow = (String, String, &'static str, f64, f64, usize);
    let rows: Vec<Result<Vec<OptRow>>> = points
        .par_iter()
        .map(|(axis, label, point)| {
            let (params, storage) = point.to_model()?;
            let mut out = Vec::new();
            for variant in [SecrecyVariant::FdFinite, SecrecyVariant::HdFinite] {
                let opt = optimal_jamming_power(&params, &storage, &grid, variant)?;
                out.push((
                    axis.clone(),
                    label.clone(),
                    variant.label(),
                    opt.p_j,
                    opt.p_so,
                    opt.rejected.len(),
                ));
            }
            Ok(out)
        })
        .collect();

    let mut table = CsvTable::new(&[
        "sweep_axis",
        "sweep_value",
        "variant",
        "p_j_star_w",
        "p_j_star_dbm",
        "p_so_min",
        "rejected_candidates",
    ])
    .with_config_echo(&cfg.echo());
    table.comment(&format!(
        "pj grid: {} points over [{}, {}] dBm",
        cfg.pj_grid_dbm.2, cfg.pj_grid_dbm.0, cfg.pj_grid_dbm.1
    ));
    for point_rows in rows {
        for (axis, label, variant, p_j, p_so, rejected) in point_rows? {
            table.push(vec![
                axis.into(),
                label.into(),
                variant.into(),
                p_j.into(),
                watts_to_dbm(p_j).into(),
                p_so.into(),
                Cell::Int(rejected as u64),
            ]);
        }
    }
    Ok(table.render())
}

/// Emit the sweep data behind one of the reference figures (2..=8).
pub fn cmd_reproduce(cfg: &ExperimentConfig, figure: u32) -> Result<Vec<(PathBuf, String)>> {
    let content = match figure {
        2 => fig2(cfg)?,
        3 => fig_antennas(cfg, false)?,
        4 => fig_antennas(cfg, true)?,
        5 => fig5(cfg)?,
        6 => fig6(cfg)?,
        7 => fig7(cfg)?,
        8 => fig8(cfg)?,
        other => {
            return Err(Error::Usage(format!(
                "figure {other} is not reproducible; expected 2..=8"
            )))
        }
    };
    Ok(vec![(PathBuf::from(format!("fig{figure}.csv")), content)])
}

fn ps_grid_dbm() -> Vec<f64> {
    (0..13).map(|i| 10.0 + 2.5 * i as f64).collect()
}

/// Outage vs source power for several storage shapes plus the bound.
fn fig2(cfg: &ExperimentConfig) -> Result<String> {
    let mut base = cfg.clone();
    base.apply("p_j_dbm", "10")?;
    let mut table = CsvTable::new(&["series", "p_s_dbm", "p_so"]).with_config_echo(&base.echo());
    let shapes = [(0.1, 100usize), (0.1, 400), (0.02, 50), (0.02, 100)];
    for (c1, levels) in shapes {
        let series = format!("c1={c1} L={levels}");
        let rows: Vec<Result<f64>> = ps_grid_dbm()
            .par_iter()
            .map(|&ps| {
                let mut point = base.clone();
                point.p_s_w = dbm_to_watts(ps);
                point.c1 = c1;
                point.levels = levels;
                let (params, storage) = point.to_model()?;
                Ok(evaluate(&params, &storage, SecrecyVariant::FdFinite)?.p_so)
            })
            .collect();
        for (ps, p_so) in ps_grid_dbm().iter().zip(rows) {
            table.push(vec![series.as_str().into(), (*ps).into(), p_so?.into()]);
        }
    }
    let rows: Vec<Result<f64>> = ps_grid_dbm()
        .par_iter()
        .map(|&ps| {
            let mut point = base.clone();
            point.p_s_w = dbm_to_watts(ps);
            let (params, storage) = point.to_model()?;
            Ok(evaluate(&params, &storage, SecrecyVariant::FdInfinite)?.p_so)
        })
        .collect();
    for (ps, p_so) in ps_grid_dbm().iter().zip(rows) {
        table.push(vec!["infinite".into(), (*ps).into(), p_so?.into()]);
    }
    Ok(table.render())
}

/// Outage (fig 3) or non-zero secrecy capacity (fig 4) vs source power for
/// antenna counts 4 and 8 under Rician (K = 5 dB) and Rayleigh fading.
fn fig_antennas(cfg: &ExperimentConfig, nzsc: bool) -> Result<String> {
    let mut base = cfg.clone();
    base.apply("p_j_dbm", "0")?;
    let metric = if nzsc { "p_nzsc" } else { "p_so" };
    let mut table = CsvTable::new(&["series", "p_s_dbm", metric]).with_config_echo(&base.echo());
    for n_j in [4u32, 8] {
        for k_db in [Some(5.0f64), None] {
            let series = match k_db {
                Some(k) => format!("nj={n_j} k={k}dB"),
                None => format!("nj={n_j} rayleigh"),
            };
            let rows: Vec<Result<f64>> = ps_grid_dbm()
                .par_iter()
                .map(|&ps| {
                    let mut point = base.clone();
                    point.p_s_w = dbm_to_watts(ps);
                    point.n_t = n_j / 2;
                    point.n_r = n_j / 2;
                    // K = -inf dB is the Rayleigh limit of the Rician model
                    point.k_rician = match k_db {
                        Some(k) => anj::channels::db_to_linear(k),
                        None => 0.0,
                    };
                    let (params, storage) = point.to_model()?;
                    let r = evaluate(&params, &storage, SecrecyVariant::FdFinite)?;
                    Ok(if nzsc { r.p_nzsc } else { r.p_so })
                })
                .collect();
            for (ps, v) in ps_grid_dbm().iter().zip(rows) {
                table.push(vec![series.as_str().into(), (*ps).into(), v?.into()]);
            }
        }
    }
    Ok(table.render())
}

/// Outage vs jamming power for three source powers, both schemes.
fn fig5(cfg: &ExperimentConfig) -> Result<String> {
    let mut table = CsvTable::new(&["series", "p_j_dbm", "p_so"]).with_config_echo(&cfg.echo());
    table.comment("infeasible jamming powers (threshold beyond capacity) are omitted");
    let grid: Vec<f64> = {
        let (start, stop, n) = cfg.pj_grid_dbm;
        (0..n)
            .map(|i| start + (stop - start) * i as f64 / (n - 1).max(1) as f64)
            .collect()
    };
    for ps in [20.0f64, 25.0, 30.0] {
        for (variant, tag) in [
            (SecrecyVariant::FdFinite, "fd"),
            (SecrecyVariant::HdFinite, "hd"),
        ] {
            let series = format!("{tag} ps={ps}dBm");
            let rows: Vec<Option<(f64, f64)>> = grid
                .par_iter()
                .map(|&pj| {
                    let mut point = cfg.clone();
                    point.p_s_w = dbm_to_watts(ps);
                    point.p_j_w = dbm_to_watts(pj);
                    let model = point.to_model().ok()?;
                    let r = evaluate(&model.0, &model.1, variant).ok()?;
                    Some((pj, r.p_so))
                })
                .collect();
            for row in rows.into_iter().flatten() {
                table.push(vec![series.as_str().into(), row.0.into(), row.1.into()]);
            }
        }
    }
    Ok(table.render())
}

fn optimum_for(cfg: &ExperimentConfig, variant: SecrecyVariant) -> Result<(f64, f64)> {
    let (params, storage) = cfg.to_model()?;
    let opt = optimal_jamming_power(&params, &storage, &cfg.pj_grid_watts(), variant)?;
    Ok((opt.p_j, opt.p_so))
}

/// Optimal outage vs source power, both schemes, two secrecy rates.
fn fig6(cfg: &ExperimentConfig) -> Result<String> {
    let mut table =
        CsvTable::new(&["series", "p_s_dbm", "p_j_star_dbm", "p_so"]).with_config_echo(&cfg.echo());
    for r_s in [0.1f64, 1.0] {
        for (variant, tag) in [
            (SecrecyVariant::FdFinite, "fd"),
            (SecrecyVariant::HdFinite, "hd"),
        ] {
            let series = format!("{tag} rs={r_s}");
            let rows: Vec<Result<(f64, f64)>> = ps_grid_dbm()
                .par_iter()
                .map(|&ps| {
                    let mut point = cfg.clone();
                    point.p_s_w = dbm_to_watts(ps);
                    point.r_s = r_s;
                    optimum_for(&point, variant)
                })
                .collect();
            for (ps, row) in ps_grid_dbm().iter().zip(rows) {
                let (p_j, p_so) = row?;
                table.push(vec![
                    series.as_str().into(),
                    (*ps).into(),
                    watts_to_dbm(p_j).into(),
                    p_so.into(),
                ]);
            }
        }
    }
    Ok(table.render())
}

/// Optimal outage vs source power for three antenna allocations.
fn fig7(cfg: &ExperimentConfig) -> Result<String> {
    let mut table =
        CsvTable::new(&["series", "p_s_dbm", "p_j_star_dbm", "p_so"]).with_config_echo(&cfg.echo());
    for (n_t, n_r) in [(2u32, 6u32), (4, 4), (6, 2)] {
        let series = format!("nt={n_t} nr={n_r}");
        let rows: Vec<Result<(f64, f64)>> = ps_grid_dbm()
            .par_iter()
            .map(|&ps| {
                let mut point = cfg.clone();
                point.p_s_w = dbm_to_watts(ps);
                point.n_t = n_t;
                point.n_r = n_r;
                optimum_for(&point, SecrecyVariant::FdFinite)
            })
            .collect();
        for (ps, row) in ps_grid_dbm().iter().zip(rows) {
            let (p_j, p_so) = row?;
            table.push(vec![
                series.as_str().into(),
                (*ps).into(),
                watts_to_dbm(p_j).into(),
                p_so.into(),
            ]);
        }
    }
    Ok(table.render())
}

/// Outage vs source power for several CSI qualities, at the jamming power
/// that is optimal under perfect CSI.
fn fig8(cfg: &ExperimentConfig) -> Result<String> {
    let mut table =
        CsvTable::new(&["series", "p_s_dbm", "p_j_star_dbm", "p_so"]).with_config_echo(&cfg.echo());
    let optima: Vec<Result<f64>> = ps_grid_dbm()
        .par_iter()
        .map(|&ps| {
            let mut point = cfg.clone();
            point.p_s_w = dbm_to_watts(ps);
            point.rho = 1.0;
            Ok(optimum_for(&point, SecrecyVariant::FdFinite)?.0)
        })
        .collect();
    let optima: Result<Vec<f64>> = optima.into_iter().collect();
    let optima = optima?;
    for rho in [1.0f64, 0.99, 0.9, 0.5, 0.0] {
        let series = format!("rho={rho}");
        let rows: Vec<Result<f64>> = ps_grid_dbm()
            .par_iter()
            .zip(&optima)
            .map(|(&ps, &p_j)| {
                let mut point = cfg.clone();
                point.p_s_w = dbm_to_watts(ps);
                point.p_j_w = p_j;
                point.rho = rho;
                let (params, storage) = point.to_model()?;
                Ok(evaluate(&params, &storage, SecrecyVariant::FdFinite)?.p_so)
            })
            .collect();
        for ((ps, p_j), row) in ps_grid_dbm().iter().zip(&optima).zip(rows) {
            table.push(vec![
                series.as_str().into(),
                (*ps).into(),
                watts_to_dbm(*p_j).into(),
                row?.into(),
            ]);
        }
    }
    Ok(table.render())
}
