//! Radial ground states of the elliptic system
//!
//! ```text
//!  φ1 − κ1 Δφ1 = φ2 φ3
//!  φ2 − κ2 Δφ2 = φ1 φ3
//! 2φ3 − κ3 Δφ3 = φ1 φ2
//! ```
//!
//! on the five-dimensional radial mesh, by Petviashvili iteration with one
//! stabilizing factor shared by the three components.

pub mod shooting;

use crate::banded::BandedLu;
use crate::error::{Error, Result};
use crate::field::FieldTriple;
use crate::functionals::{Functionals, Thresholds};
use crate::grid::Grid;
use crate::ops::RadialOps;
use crate::params::SystemParams;
use crate::scalar::{lit, to_f64, Real};

pub use shooting::{shoot, shooting_scalar, ShootingSolution, ShotOutcome};

/// Residual level required for convergence.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Most negative node value accepted in a converged profile.
pub const NEGATIVE_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 5000;
const SEED_AMPLITUDES: [f64; 3] = [3.0, 3.0, 2.0];
const SHIFTS: [f64; 3] = [1.0, 1.0, 2.0];

#[derive(Debug, Clone)]
pub struct SolverOptions<T> {
    pub tol: T,
    pub max_iter: usize,
    /// Relaxation `φ ← (1−ω)φ + ω T(φ)`; 1 is the plain iteration.
    pub relaxation: T,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            tol: lit(1e-12),
            max_iter: DEFAULT_MAX_ITER,
            relaxation: lit(0.5),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GroundStateResult<T: Real> {
    pub q: FieldTriple<T>,
    pub params: SystemParams<T>,
    pub residuals: [T; 3],
    pub mass: T,
    pub kinetic: T,
    pub potential: T,
    pub energy: T,
    pub m_gs: T,
    pub c_gn: T,
    pub me_threshold: T,
    pub mk_threshold: T,
    pub j2_min: T,
    pub iterations: usize,
}

impl<T: Real> GroundStateResult<T> {
    /// Real profiles `(φ1, φ2, φ3)`.
    pub fn profiles(&self) -> [Vec<T>; 3] {
        std::array::from_fn(|i| self.q.comp(i).iter().map(|z| z.re).collect())
    }

    pub fn thresholds(&self) -> Thresholds<T> {
        Thresholds {
            me: self.me_threshold,
            mk: self.mk_threshold,
        }
    }
}

/// `φi = a_i e^{-r^2}` with `a = (3, 3, 2)`.
pub fn default_seed<T: Real>(grid: &Grid<T>) -> Result<FieldTriple<T>> {
    let r = grid.axis_nodes();
    let p: [Vec<T>; 3] = std::array::from_fn(|i| {
        r.iter()
            .map(|&r| lit::<T>(SEED_AMPLITUDES[i]) * (-r * r).exp())
            .collect()
    });
    FieldTriple::from_real(*grid, &p[0], &p[1], &p[2])
}

fn dot<T: Real>(w: &[T], a: &[T], b: &[T]) -> T {
    w.iter()
        .zip(a)
        .zip(b)
        .fold(T::zero(), |s, ((&w, &x), &y)| s + w * x * y)
}

fn sup<T: Real>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |m, v| m.max(v.abs()))
}

fn nonlinearity<T: Real>(phi: &[Vec<T>; 3]) -> [Vec<T>; 3] {
    let n = phi[0].len();
    [
        (0..n).map(|j| phi[1][j] * phi[2][j]).collect(),
        (0..n).map(|j| phi[0][j] * phi[2][j]).collect(),
        (0..n).map(|j| phi[0][j] * phi[1][j]).collect(),
    ]
}

struct Elliptic<T: Real> {
    ops: RadialOps<T>,
    kappa: [T; 3],
    lu: [BandedLu<T>; 3],
    weights: Vec<T>,
}

impl<T: Real> Elliptic<T> {
    fn new(grid: &Grid<T>, p: &SystemParams<T>) -> Self {
        let ops = RadialOps::new(grid);
        let kappa = p.kappa();
        let lu = std::array::from_fn(|i| ops.shifted_operator(lit(SHIFTS[i]), kappa[i]).factor());
        Self {
            weights: grid.weights(),
            ops,
            kappa,
            lu,
        }
    }

    fn linear(&self, i: usize, f: &[T]) -> Vec<T> {
        let lap = self.ops.laplacian_real(f, self.kappa[i]);
        f.iter()
            .zip(lap)
            .map(|(&v, l)| lit::<T>(SHIFTS[i]) * v - l)
            .collect()
    }

    fn residuals(&self, phi: &[Vec<T>; 3]) -> [T; 3] {
        let nl = nonlinearity(phi);
        std::array::from_fn(|i| {
            let l = self.linear(i, &phi[i]);
            let diff: Vec<T> = l.iter().zip(&nl[i]).map(|(a, b)| *a - *b).collect();
            let scale = sup(&nl[i]).max(sup(&l)).max(T::min_positive_value());
            sup(&diff) / scale
        })
    }
}

/// Petviashvili solve on a radial mesh; `seed = None` uses [`default_seed`].
pub fn solve_ground_state<T: Real>(
    p: &SystemParams<T>,
    grid: &Grid<T>,
    seed: Option<&FieldTriple<T>>,
    opts: &SolverOptions<T>,
) -> Result<GroundStateResult<T>> {
    if !grid.is_radial() {
        return Err(Error::InvalidGrid("ground states are computed on the radial mesh".into()));
    }
    if !(opts.tol >= lit(1e-12) && opts.tol <= lit(1e-6)) {
        return Err(Error::InvalidParams(format!(
            "tol = {} outside [1e-12, 1e-6]",
            opts.tol
        )));
    }
    let seed = match seed {
        Some(s) => {
            if s.grid() != grid {
                return Err(Error::GridMismatch("seed lives on a different grid".into()));
            }
            s.clone()
        }
        None => default_seed(grid)?,
    };
    let sys = Elliptic::new(grid, p);
    let w = &sys.weights;
    let mut phi: [Vec<T>; 3] = std::array::from_fn(|i| seed.comp(i).iter().map(|z| z.re).collect());
    let floor = lit::<T>(1e-14);
    let omega = opts.relaxation;

    let mut change = T::infinity();
    let mut residuals = [T::infinity(); 3];
    for iter in 1..=opts.max_iter {
        if phi.iter().all(|f| sup(f) < floor) {
            return Err(Error::Collapse);
        }
        let nl = nonlinearity(&phi);
        let num = (0..3).fold(T::zero(), |s, i| s + dot(w, &sys.linear(i, &phi[i]), &phi[i]));
        let den = (0..3).fold(T::zero(), |s, i| s + dot(w, &nl[i], &phi[i]));
        if !(den.abs() > floor * num.abs().max(floor)) {
            return Err(Error::Collapse);
        }
        let s2 = (num / den).powi(2);
        let mut next: [Vec<T>; 3] = std::array::from_fn(|i| {
            let mut x = sys.lu[i].solve(&nl[i]);
            for (v, &old) in x.iter_mut().zip(&phi[i]) {
                *v = omega * s2 * *v + (T::one() - omega) * old;
            }
            x
        });
        let scale = next.iter().map(|f| sup(f)).fold(T::zero(), T::max);
        if !(scale > floor) || !scale.is_finite() {
            return Err(Error::Collapse);
        }
        change = (0..3)
            .map(|i| {
                next[i]
                    .iter()
                    .zip(&phi[i])
                    .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
            })
            .fold(T::zero(), T::max)
            / scale;
        std::mem::swap(&mut phi, &mut next);
        if change < opts.tol {
            residuals = sys.residuals(&phi);
            if residuals.iter().all(|&r| r < lit(RESIDUAL_TOL)) {
                return finish(p, grid, phi, residuals, iter);
            }
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        change: to_f64(change),
        residual: to_f64(residuals.iter().fold(T::zero(), |m, &r| m.max(r))),
    })
}

fn finish<T: Real>(
    p: &SystemParams<T>,
    grid: &Grid<T>,
    phi: [Vec<T>; 3],
    residuals: [T; 3],
    iterations: usize,
) -> Result<GroundStateResult<T>> {
    let min = phi
        .iter()
        .flat_map(|f| f.iter())
        .fold(T::infinity(), |m, &v| m.min(v));
    if min < -lit::<T>(NEGATIVE_TOL) {
        return Err(Error::NegativeExcess(to_f64(min)));
    }
    let q = FieldTriple::from_real(*grid, &phi[0], &phi[1], &phi[2])?;
    let f = Functionals::new(grid, *p);
    let mass = f.mass(&q)?;
    let kinetic = f.kinetic(&q)?;
    let potential = f.potential(&q)?;
    let energy = kinetic - potential;
    let j2_min = f.weinstein(&q)?.j2;
    Ok(GroundStateResult {
        q,
        params: *p,
        residuals,
        mass,
        kinetic,
        potential,
        energy,
        m_gs: mass,
        c_gn: sharp_constant_from_mass(mass),
        me_threshold: mass * energy,
        mk_threshold: mass * kinetic,
        j2_min,
        iterations,
    })
}

/// `(M/M, K/(5M), V/(4M))`, each 1 at an exact ground state.
pub fn verify_pohozaev<T: Real>(r: &GroundStateResult<T>) -> [T; 3] {
    [
        T::one(),
        r.kinetic / (lit::<T>(5.0) * r.mass),
        r.potential / (lit::<T>(4.0) * r.mass),
    ]
}

/// `4 · 5^{-5/4} · M^{-1/2}`
pub fn sharp_constant_from_mass<T: Real>(m_gs: T) -> T {
    lit::<T>(4.0) * lit::<T>(5.0).powf(lit(-1.25)) / m_gs.sqrt()
}

pub fn sharp_constant<T: Real>(r: &GroundStateResult<T>) -> T {
    sharp_constant_from_mass(r.m_gs)
}

/// `V / (M^{1/4} K^{5/4})` evaluated on the computed profile.
pub fn sharp_constant_direct<T: Real>(r: &GroundStateResult<T>) -> T {
    r.potential / (r.mass.powf(lit(0.25)) * r.kinetic.powf(lit(1.25)))
}

pub fn thresholds<T: Real>(r: &GroundStateResult<T>) -> Thresholds<T> {
    r.thresholds()
}
