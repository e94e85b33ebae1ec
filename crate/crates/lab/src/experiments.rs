//! Scattering diagnostics, threshold sweeps and the Galilean covariance test.

use std::fmt;

use serde::Serialize;
use threewave::functionals::{Functionals, Thresholds};
use threewave::groundstate::GroundStateResult;
use threewave::ops::integrate;
use threewave::propagator::{galilean_transform, EvolveConfig, Propagator};
use threewave::{Error, FieldTriple64, Result, SystemParams64, Trajectory64};

/// Cauchy-defect plateau, relative to `E0`, below which a run is labelled
/// scatter-consistent.
pub const SCATTER_PLATEAU: f64 = 1e-3;
/// Relative distance from both thresholds that still counts as the boundary.
pub const BOUNDARY_TOL: f64 = 1e-6;

/// `(∫ (Σ|ui|²)^{r/2})^{1/r}`.
pub fn spatial_norm(u: &FieldTriple64, r: f64) -> f64 {
    let half = 0.5 * r;
    let dens: Vec<f64> = (0..u.len())
        .map(|j| {
            let s: f64 = u.comps().iter().map(|c| c[j].norm_sqr()).sum();
            s.powf(half)
        })
        .collect();
    integrate(u.grid(), &dens).powf(1.0 / r)
}

/// Trapezoid integral of samples `(t_k, g_k)` over `[a, b]`, with `g`
/// interpolated linearly at endpoints that fall between samples.
fn integrate_samples(t: &[f64], g: &[f64], a: f64, b: f64) -> f64 {
    let at = |x: f64| -> f64 {
        let k = t.partition_point(|&s| s < x);
        if k == 0 {
            return g[0];
        }
        if k == t.len() {
            return g[t.len() - 1];
        }
        if t[k] == x {
            return g[k];
        }
        let w = (x - t[k - 1]) / (t[k] - t[k - 1]);
        g[k - 1] + w * (g[k] - g[k - 1])
    };
    let mut pts = vec![(a, at(a))];
    pts.extend(t.iter().zip(g).filter(|(&s, _)| s > a && s < b).map(|(&s, &v)| (s, v)));
    pts.push((b, at(b)));
    pts.windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum()
}

fn check_interval(traj: &Trajectory64, a: f64, b: f64) -> Result<()> {
    let times = traj.times();
    let (first, last) = match (times.first(), times.last()) {
        (Some(&f), Some(&l)) => (f, l),
        _ => return Err(Error::IntervalOutOfRange("empty trajectory".into())),
    };
    let tol = 1e-9 * (last - first).abs().max(1.0);
    if !(a <= b) || a < first - tol || b > last + tol {
        return Err(Error::IntervalOutOfRange(format!(
            "[{a}, {b}] not inside [{first}, {last}]"
        )));
    }
    Ok(())
}

/// `‖u‖_{L^q_t L^r_x}` over `interval`.
pub fn window_norm(traj: &Trajectory64, q: f64, r: f64, interval: (f64, f64)) -> Result<f64> {
    if !(q >= 1.0 && r >= 1.0 && q.is_finite() && r.is_finite()) {
        return Err(Error::InvalidParams(format!("need q, r in [1, inf), got ({q}, {r})")));
    }
    let (a, b) = interval;
    check_interval(traj, a, b)?;
    let t = traj.times();
    let g: Vec<f64> = traj
        .snapshots
        .iter()
        .map(|s| spatial_norm(&s.fields, r).powf(q))
        .collect();
    Ok(integrate_samples(&t, &g, a, b).powf(1.0 / q))
}

#[derive(Debug, Clone, Serialize)]
pub struct WindowRow {
    pub t0: f64,
    pub norm: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockRow {
    pub start: f64,
    pub end: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub eps: f64,
    /// Window length `ε^{−1/4}`.
    pub l: f64,
    /// `ε^{1/24}`.
    pub threshold: f64,
    pub t0: f64,
    pub windows: Vec<WindowRow>,
    pub blocks: Vec<BlockRow>,
    /// Every length-`T0` block holds a passing window.
    pub pass: bool,
    pub defects: Vec<f64>,
}

/// Slides `[t0 − l, t0]` over the recorded times `t0 ≥ t_first + l` and
/// checks `‖u‖_{L⁶_t L³_x} ≤ ε^{1/24}` on each window.
pub fn criterion_scan(traj: &Trajectory64, eps: f64, t0: f64, p: &SystemParams64) -> Result<CriterionReport> {
    if !(eps > 0.0 && eps < 1.0) || !(t0 > 0.0) {
        return Err(Error::InvalidParams(format!("need eps in (0, 1) and T0 > 0, got {eps}, {t0}")));
    }
    let l = eps.powf(-0.25);
    let threshold = eps.powf(1.0 / 24.0);
    let span = traj.span();
    if span < t0 + l - 1e-9 * span.max(1.0) {
        return Err(Error::SpanTooShort(format!(
            "span {span} < T0 + l = {}",
            t0 + l
        )));
    }
    let t = traj.times();
    let g: Vec<f64> = traj
        .snapshots
        .iter()
        .map(|s| spatial_norm(&s.fields, 3.0).powi(6))
        .collect();
    let start = t[0] + l;
    let tol = 1e-9 * span.max(1.0);
    let windows: Vec<WindowRow> = t
        .iter()
        .filter(|&&s| s >= start - tol)
        .map(|&end| {
            let norm = integrate_samples(&t, &g, (end - l).max(t[0]), end).powf(1.0 / 6.0);
            WindowRow {
                t0: end,
                norm,
                pass: norm <= threshold,
            }
        })
        .collect();
    let last = t[t.len() - 1];
    let mut blocks = Vec::new();
    let mut a = start;
    while a + t0 <= last + tol {
        let b = a + t0;
        let passed = windows
            .iter()
            .any(|w| w.t0 >= a - tol && w.t0 <= b + tol && w.pass);
        blocks.push(BlockRow { start: a, end: b, passed });
        a = b;
    }
    let pass = !blocks.is_empty() && blocks.iter().all(|b| b.passed);
    Ok(CriterionReport {
        eps,
        l,
        threshold,
        t0,
        windows,
        blocks,
        pass,
        defects: scattering_indicator(traj, p)?,
    })
}

/// `d_j = ‖v(t_{j+1}) − v(t_j)‖_{H¹}` with `v(t) = S(−t) u(t)`.
///
/// Evaluated as `‖S(−(t_{j+1} − t_j)) u(t_{j+1}) − u(t_j)‖_{H¹}`, which is
/// the same quantity because `S(−t_j)` is an `H¹` isometry, and needs only
/// short backward flows.
pub fn scattering_indicator(traj: &Trajectory64, p: &SystemParams64) -> Result<Vec<f64>> {
    if traj.is_empty() {
        return Ok(Vec::new());
    }
    let g = traj.grid();
    let prop = Propagator::new(g, p);
    let f = Functionals::new(g, *p);
    traj.snapshots
        .windows(2)
        .map(|w| {
            let back = prop.linear_flow(&w[1].fields, w[0].time - w[1].time)?;
            f.h1_distance(&back, &w[0].fields)
        })
        .collect()
}

/// Non-increasing (to rounding) and at least halved from first to last.
pub fn defects_decreasing(d: &[f64]) -> bool {
    if d.len() < 2 {
        return false;
    }
    let monotone = d.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-300);
    monotone && d[d.len() - 1] <= 0.5 * d[0]
}

pub fn scatter_consistent(d: &[f64], e0: f64) -> bool {
    defects_decreasing(d) && d[d.len() - 1] <= SCATTER_PLATEAU * e0.abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    SubThreshold,
    Boundary,
    OutsideHypotheses,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::SubThreshold => "sub-threshold",
            Regime::Boundary => "boundary",
            Regime::OutsideHypotheses => "outside theorem hypotheses",
        })
    }
}

pub fn classify(me: f64, mk: f64, th: &Thresholds<f64>) -> Regime {
    let near = |x: f64, y: f64| ((x - y) / y).abs() <= BOUNDARY_TOL;
    if near(me, th.me) && near(mk, th.mk) {
        Regime::Boundary
    } else if me < th.me && mk < th.mk {
        Regime::SubThreshold
    } else {
        Regime::OutsideHypotheses
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub me: f64,
    pub mk: f64,
    pub me_ratio: f64,
    pub mk_ratio: f64,
    pub regime: Regime,
    pub blow_up: Option<f64>,
    pub defect_first: f64,
    pub defect_last: f64,
    pub defects_decreasing: bool,
    /// `min_t (1 − M K(t) / MK_threshold)` over recorded times.
    pub min_margin: f64,
}

fn sweep_point(
    base: &FieldTriple64,
    lambda: f64,
    cfg: &EvolveConfig<f64>,
    p: &SystemParams64,
    th: &Thresholds<f64>,
) -> Result<SweepRow> {
    let u0 = base.scaled(lambda);
    let f = Functionals::new(u0.grid(), *p);
    let pc = f.product_checks(&u0, th)?;
    let out = Propagator::new(u0.grid(), p).evolve_until_blowup(&u0, cfg)?;
    let defects = scattering_indicator(&out.trajectory, p)?;
    let mut min_margin = f64::INFINITY;
    for s in &out.trajectory.snapshots {
        let mk = f.mass(&s.fields)? * f.kinetic(&s.fields)?;
        min_margin = min_margin.min(1.0 - mk / th.mk);
    }
    Ok(SweepRow {
        lambda,
        me: pc.me,
        mk: pc.mk,
        me_ratio: pc.me / th.me,
        mk_ratio: pc.mk / th.mk,
        regime: classify(pc.me, pc.mk, th),
        blow_up: out.blow_up,
        defect_first: defects.first().copied().unwrap_or(0.0),
        defect_last: defects.last().copied().unwrap_or(0.0),
        defects_decreasing: defects_decreasing(&defects),
        min_margin,
    })
}

/// Evolves `λ · base` for each `λ`; one thread per point.
pub fn threshold_sweep(
    base: &FieldTriple64,
    lambdas: &[f64],
    cfg: &EvolveConfig<f64>,
    p: &SystemParams64,
    gs: &GroundStateResult<f64>,
) -> Result<Vec<SweepRow>> {
    let th = gs.thresholds();
    std::thread::scope(|scope| {
        let handles: Vec<_> = lambdas
            .iter()
            .map(|&lambda| scope.spawn(move || sweep_point(base, lambda, cfg, p, &th)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CovarianceRow {
    pub kappa: [f64; 3],
    pub mass_resonant: bool,
    pub dt: f64,
    /// `‖E_dt(G u0) − G E_dt(u0)‖_{H¹}`.
    pub same_dt_defect: f64,
    /// `‖E_dt(G u0) − G E_ref(u0)‖_{H¹}` with `dt_ref = min dt / 8`.
    pub reference_defect: f64,
    /// `‖E_dt(u0) − E_ref(u0)‖_{H¹}`.
    pub splitting_error: f64,
}

fn covariance_rows(
    u0: &FieldTriple64,
    xi: &[f64],
    t_final: f64,
    dts: &[f64],
    kappa: [f64; 3],
) -> Result<Vec<CovarianceRow>> {
    let p = SystemParams64::from_array(kappa)?;
    let g = u0.grid();
    let prop = Propagator::new(g, &p);
    let f = Functionals::new(g, p);
    let steps = |dt: f64| EvolveConfig::new(dt, t_final, 1).steps();
    let dt_ref = dts.iter().copied().fold(f64::INFINITY, f64::min) / 8.0;
    let boosted0 = galilean_transform(u0, xi, 0.0, &p)?;
    let reference = prop.evolve_final(u0, dt_ref, steps(dt_ref)?)?;
    let reference_boosted = galilean_transform(&reference, xi, t_final, &p)?;
    dts.iter()
        .map(|&dt| {
            let n = steps(dt)?;
            let plain = prop.evolve_final(u0, dt, n)?;
            let lhs = prop.evolve_final(&boosted0, dt, n)?;
            let rhs = galilean_transform(&plain, xi, t_final, &p)?;
            Ok(CovarianceRow {
                kappa,
                mass_resonant: p.mass_resonant(),
                dt,
                same_dt_defect: f.h1_distance(&lhs, &rhs)?,
                reference_defect: f.h1_distance(&lhs, &reference_boosted)?,
                splitting_error: f.h1_distance(&plain, &reference)?,
            })
        })
        .collect()
}

/// Commutation defect of evolution and the Galilean transform, per `κ`
/// triple and step size. Triples run concurrently.
pub fn covariance_experiment(
    u0: &FieldTriple64,
    xi: &[f64],
    t_final: f64,
    dts: &[f64],
    kappas: &[[f64; 3]],
) -> Result<Vec<CovarianceRow>> {
    if !u0.grid().is_box() {
        return Err(Error::Unsupported("covariance needs a periodic box".into()));
    }
    let per_kappa: Result<Vec<Vec<CovarianceRow>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = kappas
            .iter()
            .map(|&k| scope.spawn(move || covariance_rows(u0, xi, t_final, dts, k)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("covariance worker panicked")).collect()
    });
    Ok(per_kappa?.into_iter().flatten().collect())
}

/// `log2(d(dt) / d(dt/2))` between consecutive rows of one `κ` triple.
pub fn observed_orders(rows: &[CovarianceRow], pick: impl Fn(&CovarianceRow) -> f64) -> Vec<f64> {
    rows.windows(2)
        .filter(|w| w[0].kappa == w[1].kappa)
        .map(|w| (pick(&w[0]) / pick(&w[1])).ln() / (w[0].dt / w[1].dt).ln())
        .collect()
}
