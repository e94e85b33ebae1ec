//! Task dispatch and artifact output.

use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::Serialize;
use serde_json::json;
use threewave::functionals::Functionals;
use threewave::groundstate::{sharp_constant_direct, verify_pohozaev};
use threewave::morawetz::{averaged_estimate, build_cutoff, build_weights, morawetz_series};
use threewave::propagator::Propagator;
use threewave::{write_snapshot, FieldTriple64, GroundState64, Grid64, SystemParams64, Trajectory64};

use crate::config::{InitialKind, RunConfig, Task};
use crate::data::{ground_state, initial_data};
use crate::error::{LabError, LabResult};
use crate::experiments::{
    covariance_experiment, criterion_scan, observed_orders, scatter_consistent, scattering_indicator,
    threshold_sweep,
};

pub const DEFAULT_SEED: u64 = 0;

/// Command-line overrides of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

struct Ctx {
    cfg: RunConfig,
    out: PathBuf,
    seed: u64,
}

impl Ctx {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write_json(&self, name: &str, v: &impl Serialize) -> LabResult<()> {
        fs::write(self.path(name), serde_json::to_string_pretty(v)? + "\n")?;
        Ok(())
    }
}

/// Runs `task`, writing artifacts under the output directory.
pub fn run(task: Task, cfg: RunConfig, ov: Overrides) -> LabResult<()> {
    cfg.validate(task)?;
    let out = ov
        .out
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("runs").join(task.name()));
    fs::create_dir_all(&out)?;
    let seed = ov.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    let ctx = Ctx { cfg, out, seed };
    ctx.write_json("config.json", &ctx.cfg)?;
    info!("{} -> {}", task.name(), ctx.out.display());
    match task {
        Task::Groundstate => groundstate_task(&ctx),
        Task::Evolve => evolve_task(&ctx),
        Task::Morawetz => morawetz_task(&ctx),
        Task::Criterion => criterion_task(&ctx),
        Task::ThresholdSweep => sweep_task(&ctx),
        Task::Covariance => covariance_task(&ctx),
    }
}

/// `run` from a config path.
pub fn run_file(task: Task, config: &Path, ov: Overrides) -> LabResult<()> {
    run(task, RunConfig::load(config)?, ov)
}

fn gs_summary(r: &GroundState64) -> serde_json::Value {
    let ratios = verify_pohozaev(r);
    json!({
        "kappa": r.params.kappa(),
        "M_gs": r.m_gs,
        "K": r.kinetic,
        "V": r.potential,
        "E": r.energy,
        "C_GN": r.c_gn,
        "C_GN_direct": sharp_constant_direct(r),
        "ratios": { "M": ratios[0], "K_over_5M": ratios[1], "V_over_4M": ratios[2] },
        "me_threshold": r.me_threshold,
        "mk_threshold": r.mk_threshold,
        "weinstein_J2": r.j2_min,
        "residuals": r.residuals,
        "iterations": r.iterations,
    })
}

fn groundstate_task(ctx: &Ctx) -> LabResult<()> {
    let g = ctx.cfg.grid.build()?;
    let p = ctx.cfg.params()?;
    let r = ground_state(&p, &g, &ctx.cfg.groundstate)?;
    ctx.write_json("summary.json", &gs_summary(&r))?;
    let mut w = csv::Writer::from_path(ctx.path("profile.csv"))?;
    w.write_record(["r", "phi1", "phi2", "phi3"])?;
    let prof = r.profiles();
    for (j, rj) in g.axis_nodes().iter().enumerate() {
        w.serialize((rj, prof[0][j], prof[1][j], prof[2][j]))?;
    }
    w.flush()?;
    write_snapshot(&threewave::Snapshot64::new(0.0, p, r.q.clone()), ctx.path("q.snap"))?;
    Ok(())
}

/// Ground state on the run grid, solved only for ground-state data.
fn maybe_ground_state(ctx: &Ctx, g: &Grid64, p: &SystemParams64) -> LabResult<Option<GroundState64>> {
    if ctx.cfg.initial.kind == InitialKind::GroundState {
        return Ok(Some(ground_state(p, g, &ctx.cfg.groundstate)?));
    }
    Ok(None)
}

fn prepare(ctx: &Ctx) -> LabResult<(Grid64, SystemParams64, FieldTriple64)> {
    let g = ctx.cfg.grid.build()?;
    let p = ctx.cfg.params()?;
    let gs = maybe_ground_state(ctx, &g, &p)?;
    let u0 = initial_data(&ctx.cfg.initial, g, &p, gs.as_ref(), ctx.seed)?;
    Ok((g, p, u0))
}

fn write_series(path: &Path, traj: &Trajectory64) -> LabResult<()> {
    let g = traj.grid();
    let f = Functionals::new(g, traj.params);
    let mut w = csv::Writer::from_path(path)?;
    let mut head = vec!["t".to_string(), "M".into(), "K".into(), "V".into(), "E".into()];
    head.extend((1..=g.dim()).map(|a| format!("P{a}")));
    head.push("max_modulus".into());
    w.write_record(&head)?;
    for s in &traj.snapshots {
        let c = f.conserved(&s.fields)?;
        let mut row = vec![s.time, c.mass, c.kinetic, c.potential, c.energy];
        row.extend(&c.momentum);
        row.push(s.fields.max_modulus());
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_snapshots(ctx: &Ctx, traj: &Trajectory64) -> LabResult<()> {
    let dir = ctx.path("snapshots");
    fs::create_dir_all(&dir)?;
    for (k, s) in traj.snapshots.iter().enumerate() {
        write_snapshot(s, dir.join(format!("snap_{k:05}.bin")))?;
    }
    Ok(())
}

/// Evolves the configured data; a blow-up is reported after the partial
/// trajectory has been written.
fn evolve_recorded(ctx: &Ctx) -> LabResult<(Trajectory64, SystemParams64)> {
    let (g, p, u0) = prepare(ctx)?;
    let out = Propagator::new(&g, &p).evolve_until_blowup(&u0, &ctx.cfg.evolve.config())?;
    write_series(&ctx.path("timeseries.csv"), &out.trajectory)?;
    write_snapshots(ctx, &out.trajectory)?;
    if let Some(t) = out.blow_up {
        ctx.write_json("summary.json", &json!({ "blow_up": t, "aborted": true }))?;
        return Err(LabError::Numerical(format!("blow-up detected at t = {t}; run aborted")));
    }
    Ok((out.trajectory, p))
}

fn evolve_task(ctx: &Ctx) -> LabResult<()> {
    let (traj, p) = evolve_recorded(ctx)?;
    let f = Functionals::new(traj.grid(), p);
    let first = f.conserved(&traj.snapshots[0].fields)?;
    let last = f.conserved(traj.last())?;
    let defects = scattering_indicator(&traj, &p)?;
    ctx.write_json(
        "summary.json",
        &json!({
            "snapshots": traj.len(),
            "t_final": traj.snapshots.last().map(|s| s.time),
            "mass_drift": (last.mass - first.mass) / first.mass,
            "energy_drift": (last.energy - first.energy) / first.energy.abs().max(f64::MIN_POSITIVE),
            "cauchy_defects": defects,
            "scatter_consistent": scatter_consistent(&defects, first.energy),
        }),
    )
}

fn morawetz_task(ctx: &Ctx) -> LabResult<()> {
    let (traj, p) = evolve_recorded(ctx)?;
    let m = &ctx.cfg.morawetz;
    let span = traj.span();
    let wanted = m.t0.unwrap_or_else(|| (m.log_count_j as f64).exp());
    let t0 = if wanted > span {
        warn!("T0 = {wanted} clamped to the trajectory span {span}");
        span
    } else {
        wanted
    };
    let rep = averaged_estimate(&traj, m.r0, m.log_count_j, t0, m.eps, &p)?;

    let c = build_cutoff(m.eps)?;
    let w = build_weights(&c, m.r0, traj.grid())?;
    let series = morawetz_series(&traj, &c, &w, m.s_stride * m.r0)?;
    let mut out = csv::Writer::from_path(ctx.path("morawetz_terms.csv"))?;
    out.write_record([
        "t", "M", "A", "B", "C", "D", "E", "F", "K", "G", "H", "I", "J", "dM_dt", "dM_dt_fd",
    ])?;
    for (n, (t, mv, terms)) in series.iter().enumerate() {
        let fd = if n > 0 && n + 1 < series.len() {
            (series[n + 1].1 - series[n - 1].1) / (series[n + 1].0 - series[n - 1].0)
        } else {
            f64::NAN
        };
        out.serialize([
            *t, *mv, terms.a, terms.b, terms.c, terms.d, terms.e, terms.f, terms.k, terms.g, terms.h,
            terms.i, terms.j, terms.dm_dt(), fd,
        ])?;
    }
    out.flush()?;

    let d = traj.grid().dim();
    let mut cells = csv::Writer::from_path(ctx.path("morawetz_cells.csv"))?;
    let mut head = vec!["t".to_string(), "s".into(), "R".into()];
    head.extend((1..=d).map(|a| format!("xi{a}")));
    head.extend(["contribution".to_string(), "coercivity".into()]);
    cells.write_record(&head)?;
    for row in &rep.cells {
        let mut rec = vec![row.t.to_string(), row.s_index.to_string(), row.radius.to_string()];
        rec.extend(row.xi.iter().map(|x| x.to_string()));
        rec.push(row.contribution.to_string());
        rec.push(row.coercivity.map(|q| q.to_string()).unwrap_or_default());
        cells.write_record(&rec)?;
    }
    cells.flush()?;

    ctx.write_json(
        "summary.json",
        &json!({
            "r0": rep.r0,
            "log_count_J": rep.log_count_j,
            "T0": rep.t0,
            "T0_requested": wanted,
            "eps": rep.eps,
            "delta": rep.delta,
            "E0": rep.e0,
            "nu": rep.nu,
            "lhs": rep.lhs,
            "ratio": rep.ratio,
        }),
    )
}

fn criterion_task(ctx: &Ctx) -> LabResult<()> {
    let (traj, p) = evolve_recorded(ctx)?;
    let c = &ctx.cfg.criterion;
    let rep = criterion_scan(&traj, c.eps, c.t0, &p)?;
    let mut w = csv::Writer::from_path(ctx.path("criterion.csv"))?;
    for row in &rep.windows {
        w.serialize(row)?;
    }
    w.flush()?;
    let e0 = Functionals::new(traj.grid(), p).energy(&traj.snapshots[0].fields)?;
    ctx.write_json(
        "summary.json",
        &json!({
            "eps": rep.eps,
            "l": rep.l,
            "threshold": rep.threshold,
            "T0": rep.t0,
            "pass": rep.pass,
            "blocks": rep.blocks,
            "cauchy_defects": rep.defects,
            "scatter_consistent": scatter_consistent(&rep.defects, e0),
        }),
    )
}

fn sweep_task(ctx: &Ctx) -> LabResult<()> {
    let g = ctx.cfg.grid.build()?;
    let p = ctx.cfg.params()?;
    let gs = ground_state(&p, &g, &ctx.cfg.groundstate)?;
    let rows = threshold_sweep(&gs.q, &ctx.cfg.sweep.lambdas(), &ctx.cfg.evolve.config(), &p, &gs)?;
    let mut w = csv::Writer::from_path(ctx.path("sweep.csv"))?;
    w.write_record([
        "lambda", "me", "mk", "me_ratio", "mk_ratio", "regime", "blow_up", "defect_first",
        "defect_last", "defects_decreasing", "min_margin",
    ])?;
    for r in &rows {
        w.write_record([
            r.lambda.to_string(),
            r.me.to_string(),
            r.mk.to_string(),
            r.me_ratio.to_string(),
            r.mk_ratio.to_string(),
            r.regime.to_string(),
            r.blow_up.map(|t| t.to_string()).unwrap_or_default(),
            r.defect_first.to_string(),
            r.defect_last.to_string(),
            r.defects_decreasing.to_string(),
            r.min_margin.to_string(),
        ])?;
    }
    w.flush()?;
    ctx.write_json("summary.json", &json!({ "ground_state": gs_summary(&gs), "rows": rows }))
}

fn covariance_task(ctx: &Ctx) -> LabResult<()> {
    let (_, _, u0) = prepare(ctx)?;
    let c = &ctx.cfg.covariance;
    let rows = covariance_experiment(&u0, &c.xi, c.t_final, &c.dts, &c.kappas)?;
    let mut w = csv::Writer::from_path(ctx.path("covariance.csv"))?;
    w.write_record([
        "kappa1", "kappa2", "kappa3", "mass_resonant", "dt", "same_dt_defect", "reference_defect",
        "splitting_error",
    ])?;
    for r in &rows {
        w.serialize((
            r.kappa[0],
            r.kappa[1],
            r.kappa[2],
            r.mass_resonant,
            r.dt,
            r.same_dt_defect,
            r.reference_defect,
            r.splitting_error,
        ))?;
    }
    w.flush()?;
    ctx.write_json(
        "summary.json",
        &json!({
            "rows": rows,
            "reference_orders": observed_orders(&rows, |r| r.reference_defect),
        }),
    )
}
