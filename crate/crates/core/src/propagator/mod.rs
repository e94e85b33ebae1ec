//! Strang split-step evolution.
//!
//! The linear part `i u_t + κ Δu = 0` is solved exactly per Fourier mode on
//! boxes and by Padé-factored implicit steps on radial meshes. The nonlinear part is the
//! pointwise three-wave ODE
//!
//! ```text
//! u1' = i conj(u2) u3,   u2' = i conj(u1) u3,   u3' = i u1 u2
//! ```
//!
//! integrated with classical RK4.

mod boost;
mod radial;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::{Field, FieldTriple};
use crate::functionals::Functionals;
use crate::grid::Grid;
use crate::ops::Spectral;
use crate::params::SystemParams;
use crate::scalar::{from_usize, lit, to_f64, Real};
use crate::snapshot::Snapshot;

pub use boost::{galilean_transform, normalization_lambda, phase_boost, rescale_to_e0, Rescaled};
pub use radial::{pade_zeros, RadialFlow, FLOW_TOL, PADE_ORDER};

/// Safety factor `c` in `dt <= c h^2 / max κ`.
pub const DT_SAFETY: f64 = 0.5;
/// RK4 substeps per nonlinear step.
pub const NONLINEAR_SUBSTEPS: usize = 4;
/// Blow-up is declared once the largest modulus exceeds this.
pub const BLOWUP_MODULUS: f64 = 1e6;
/// ... or the kinetic energy has grown by this factor.
pub const BLOWUP_KINETIC_GROWTH: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveConfig<T> {
    pub dt: T,
    pub t_final: T,
    pub record_every: usize,
}

impl<T: Real> EvolveConfig<T> {
    pub fn new(dt: T, t_final: T, record_every: usize) -> Self {
        Self {
            dt,
            t_final,
            record_every,
        }
    }

    /// Number of steps, provided `t_final / dt` is an integer up to rounding.
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > T::zero()) || !(self.t_final >= T::zero()) {
            return Err(Error::InvalidParams(format!(
                "need dt > 0 and T >= 0, got dt = {}, T = {}",
                self.dt, self.t_final
            )));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParams("record_every must be positive".into()));
        }
        let q = to_f64(self.t_final / self.dt);
        let n = q.round();
        if (q - n).abs() > 1e-9 * q.max(1.0) {
            return Err(Error::InvalidParams(format!(
                "T / dt = {q} is not an integer step count"
            )));
        }
        Ok(n as usize)
    }

    pub fn validate(&self, grid: &Grid<T>, p: &SystemParams<T>) -> Result<usize> {
        let cap = stability_cap(grid, p);
        if self.dt > cap {
            return Err(Error::StabilityCap {
                dt: to_f64(self.dt),
                cap: to_f64(cap),
            });
        }
        self.steps()
    }
}

/// `DT_SAFETY · h² / max κ`
pub fn stability_cap<T: Real>(grid: &Grid<T>, p: &SystemParams<T>) -> T {
    let h = grid.spacing();
    lit::<T>(DT_SAFETY) * h * h / p.max_kappa()
}

/// Recorded states of one run.
#[derive(Debug, Clone)]
pub struct Trajectory<T: Real> {
    pub params: SystemParams<T>,
    pub config: EvolveConfig<T>,
    pub snapshots: Vec<Snapshot<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn times(&self) -> Vec<T> {
        self.snapshots.iter().map(|s| s.time).collect()
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn grid(&self) -> &Grid<T> {
        self.snapshots[0].grid()
    }

    /// `t_last - t_first`
    pub fn span(&self) -> T {
        match (self.snapshots.first(), self.snapshots.last()) {
            (Some(a), Some(b)) => b.time - a.time,
            _ => T::zero(),
        }
    }

    pub fn last(&self) -> &FieldTriple<T> {
        &self.snapshots.last().expect("empty trajectory").fields
    }
}

/// Outcome of a run that may stop early.
#[derive(Debug, Clone)]
pub struct EvolveOutcome<T: Real> {
    pub trajectory: Trajectory<T>,
    /// Time at which the blow-up detector fired, if it did.
    pub blow_up: Option<T>,
}

enum Linear<T: Real> {
    Box(Spectral<T>),
    Radial(RadialFlow<T>),
}

/// Split-step propagator bound to one grid and parameter set.
pub struct Propagator<T: Real> {
    grid: Grid<T>,
    params: SystemParams<T>,
    linear: Linear<T>,
}

impl<T: Real> Propagator<T> {
    pub fn new(grid: &Grid<T>, params: &SystemParams<T>) -> Self {
        let linear = if grid.is_box() {
            Linear::Box(Spectral::new(grid))
        } else {
            Linear::Radial(RadialFlow::new(grid))
        };
        Self {
            grid: *grid,
            params: *params,
            linear,
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn params(&self) -> &SystemParams<T> {
        &self.params
    }

    pub fn spectral(&self) -> Option<&Spectral<T>> {
        match &self.linear {
            Linear::Box(s) => Some(s),
            Linear::Radial(_) => None,
        }
    }

    fn linear_component(&self, f: &[Complex<T>], kappa: T, t: T) -> Field<T> {
        match &self.linear {
            Linear::Box(s) => s.apply_multiplier(f, |j| {
                let ph = -kappa * s.k_squared()[j] * t;
                Complex::new(ph.cos(), ph.sin())
            }),
            Linear::Radial(r) => r.apply(f, kappa, t),
        }
    }

    /// `S(t) u = (e^{iκ1 tΔ} u1, e^{iκ2 tΔ} u2, e^{iκ3 tΔ} u3)`.
    pub fn linear_flow(&self, u: &FieldTriple<T>, t: T) -> Result<FieldTriple<T>> {
        self.check(u)?;
        if t == T::zero() {
            return Ok(u.clone());
        }
        let k = self.params.kappa();
        let [a, b, c] = [0, 1, 2].map(|i| self.linear_component(u.comp(i), k[i], t));
        FieldTriple::new(self.grid, a, b, c)
    }

    pub fn strang_step(&self, u: &FieldTriple<T>, dt: T) -> Result<FieldTriple<T>> {
        let half = dt * lit::<T>(0.5);
        let v = self.linear_flow(u, half)?;
        let v = nonlinear_substep(&v, dt);
        self.linear_flow(&v, half)
    }

    fn check(&self, u: &FieldTriple<T>) -> Result<()> {
        if u.grid() != &self.grid {
            return Err(Error::GridMismatch("field and propagator grids differ".into()));
        }
        Ok(())
    }

    /// Run to `cfg.t_final`; stops early (without error) on blow-up.
    pub fn evolve_until_blowup(
        &self,
        u0: &FieldTriple<T>,
        cfg: &EvolveConfig<T>,
    ) -> Result<EvolveOutcome<T>> {
        self.check(u0)?;
        let steps = cfg.validate(&self.grid, &self.params)?;
        let f = Functionals::new(&self.grid, self.params);
        let k0 = f.kinetic(u0)?;
        let k_limit = lit::<T>(BLOWUP_KINETIC_GROWTH) * k0.max(T::min_positive_value());
        let mut snaps = vec![Snapshot::new(T::zero(), self.params, u0.clone())];
        let mut u = u0.clone();
        let mut blow_up = None;
        for n in 1..=steps {
            u = self.strang_step(&u, cfg.dt)?;
            let t = cfg.dt * from_usize::<T>(n);
            let recording = n % cfg.record_every == 0;
            let mut blown = !u.is_finite() || u.max_modulus() > lit(BLOWUP_MODULUS);
            if !blown && (recording || n % 16 == 0) {
                let k = f.kinetic(&u)?;
                blown = !(k <= k_limit);
            }
            if blown {
                blow_up = Some(t);
                break;
            }
            if recording {
                snaps.push(Snapshot::new(t, self.params, u.clone()));
            }
        }
        Ok(EvolveOutcome {
            trajectory: Trajectory {
                params: self.params,
                config: *cfg,
                snapshots: snaps,
            },
            blow_up,
        })
    }

    /// Run to `cfg.t_final`; blow-up is an error.
    pub fn evolve(&self, u0: &FieldTriple<T>, cfg: &EvolveConfig<T>) -> Result<Trajectory<T>> {
        let out = self.evolve_until_blowup(u0, cfg)?;
        match out.blow_up {
            Some(t) => Err(Error::BlowUp(to_f64(t))),
            None => Ok(out.trajectory),
        }
    }

    /// Final state only, without recording.
    pub fn evolve_final(&self, u0: &FieldTriple<T>, dt: T, steps: usize) -> Result<FieldTriple<T>> {
        self.check(u0)?;
        let mut u = u0.clone();
        for _ in 0..steps {
            u = self.strang_step(&u, dt)?;
        }
        Ok(u)
    }
}

#[inline]
fn three_wave_rhs<T: Real>(u: [Complex<T>; 3]) -> [Complex<T>; 3] {
    let i = Complex::new(T::zero(), T::one());
    [
        i * u[1].conj() * u[2],
        i * u[0].conj() * u[2],
        i * u[0] * u[1],
    ]
}

/// RK4 for the pointwise ODE at one node.
pub fn three_wave_ode<T: Real>(mut u: [Complex<T>; 3], dt: T, substeps: usize) -> [Complex<T>; 3] {
    let h = dt / from_usize::<T>(substeps);
    let half = h * lit::<T>(0.5);
    let sixth = h / lit::<T>(6.0);
    let axpy = |u: &[Complex<T>; 3], k: &[Complex<T>; 3], s: T| -> [Complex<T>; 3] {
        std::array::from_fn(|i| u[i] + k[i] * s)
    };
    for _ in 0..substeps {
        let k1 = three_wave_rhs(u);
        let k2 = three_wave_rhs(axpy(&u, &k1, half));
        let k3 = three_wave_rhs(axpy(&u, &k2, half));
        let k4 = three_wave_rhs(axpy(&u, &k3, h));
        u = std::array::from_fn(|i| {
            u[i] + (k1[i] + (k2[i] + k3[i]) * lit::<T>(2.0) + k4[i]) * sixth
        });
    }
    u
}

/// Advance `i u_t = f(u)` by `dt` at every node.
pub fn nonlinear_substep<T: Real>(u: &FieldTriple<T>, dt: T) -> FieldTriple<T> {
    let mut out = u.clone();
    let n = u.len();
    let c = out.comps_mut();
    for j in 0..n {
        let v = three_wave_ode([c[0][j], c[1][j], c[2][j]], dt, NONLINEAR_SUBSTEPS);
        for i in 0..3 {
            c[i][j] = v[i];
        }
    }
    out
}

pub fn linear_flow<T: Real>(u: &FieldTriple<T>, t: T, p: &SystemParams<T>) -> Result<FieldTriple<T>> {
    Propagator::new(u.grid(), p).linear_flow(u, t)
}

pub fn strang_step<T: Real>(u: &FieldTriple<T>, dt: T, p: &SystemParams<T>) -> Result<FieldTriple<T>> {
    Propagator::new(u.grid(), p).strang_step(u, dt)
}

pub fn evolve<T: Real>(
    u0: &FieldTriple<T>,
    cfg: &EvolveConfig<T>,
    p: &SystemParams<T>,
) -> Result<Trajectory<T>> {
    Propagator::new(u0.grid(), p).evolve(u0, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn hyperbolic_closed_form() {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let dt = 0.1;
        let v = three_wave_ode([one, one, zero], dt, NONLINEAR_SUBSTEPS);
        let s = 1.0 / dt.cosh();
        assert!((v[0] - s).norm() < 1e-8);
        assert!((v[1] - s).norm() < 1e-8);
        assert!((v[2] - Complex64::new(0.0, dt.tanh())).norm() < 1e-8);
    }

    #[test]
    fn pure_third_component_is_fixed() {
        let z = Complex64::new(0.0, 0.0);
        let c = Complex64::new(0.3, -1.2);
        assert_eq!(three_wave_ode([z, z, c], 0.5, 4), [z, z, c]);
    }

    #[test]
    fn manley_rowe_pointwise() {
        let u = [Complex64::new(0.4, 0.1), Complex64::new(-0.2, 0.5), Complex64::new(0.3, 0.3)];
        let v = three_wave_ode(u, 0.01, 4);
        let mr = |u: &[Complex64; 3]| (u[0].norm_sqr() + u[2].norm_sqr(), u[1].norm_sqr() + u[2].norm_sqr());
        let (a, b) = mr(&u);
        let (c, d) = mr(&v);
        assert!((a - c).abs() < 1e-12 && (b - d).abs() < 1e-12);
    }

    #[test]
    fn plane_wave_linear_flow() {
        let g = Grid::periodic(1, PI, 16).unwrap();
        let p = SystemParams::new(1.5, 1.0, 1.0).unwrap();
        let k = 2.0;
        let u = FieldTriple::from_fn(g, |x: &[f64]| {
            [Complex64::from_polar(1.0, k * x[0]), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)]
        });
        let t = 0.37;
        let v = linear_flow(&u, t, &p).unwrap();
        let ph = Complex64::from_polar(1.0, -1.5 * k * k * t);
        for j in 0..16 {
            assert!((v.comp(0)[j] - ph * u.comp(0)[j]).norm() < 1e-13);
        }
        assert_eq!(linear_flow(&u, 0.0, &p).unwrap().comp(0), u.comp(0));
    }

    #[test]
    fn step_count_and_cap() {
        let g = Grid::periodic(1, PI, 16).unwrap();
        let p = SystemParams::new(1.0, 1.0, 2.0).unwrap();
        let cap = stability_cap(&g, &p);
        assert!((cap - 0.5 * (PI / 8.0).powi(2) / 2.0).abs() < 1e-15);
        let bad = EvolveConfig::new(cap * 1.01, 1.0, 1);
        let err = bad.validate(&g, &p).unwrap_err();
        assert!(err.to_string().contains("dt exceeds stability cap"));
        assert_eq!(EvolveConfig::new(0.01, 1.0, 1).steps().unwrap(), 100);
        assert!(EvolveConfig::new(0.03, 1.0, 1).steps().is_err());
    }

    #[test]
    fn radial_flow_nearly_preserves_mass() {
        // the high-order radial stencil is not self-adjoint in the r^4
        // weight, so CN keeps M only to truncation accuracy
        let g = Grid::radial(15.0, 256).unwrap();
        let p = SystemParams::new(1.0, 1.0, 2.0).unwrap();
        let u = FieldTriple::from_fn(g, |r: &[f64]| {
            let e = Complex64::new((-r[0] * r[0]).exp(), 0.0);
            [e, e * 0.5, e * 0.25]
        });
        let m0 = crate::functionals::mass(&u);
        let v = linear_flow(&u, 0.3, &p).unwrap();
        let m1 = crate::functionals::mass(&v);
        assert!(((m1 - m0) / m0).abs() < 1e-6);
    }
}
