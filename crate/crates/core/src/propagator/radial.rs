//! Linear flow `e^{i kappa t Delta}` on the radial mesh.
//!
//! Each substep applies the diagonal `[n/n]` Padé approximant of the
//! exponential, factored into `n` banded steps
//! `(I + z Δ / a_k)^{-1} (I − z Δ / a_k)` with `z = i kappa tau` and `a_k` the
//! zeros of the Padé numerator; `n = 1` is Crank–Nicolson. Every factor is
//! A-stable and unimodular on the imaginary axis.
//!
//! A request for time `t` is split into `m` equal substeps; `m` is doubled
//! until one more doubling changes the result by less than the tolerance.
//! The chosen substep count and the factorizations are cached per `t`, so
//! repeated half steps of a Strang loop factor only once.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex;

use crate::banded::{Banded, BandedLu};
use crate::field::Field;
use crate::grid::Grid;
use crate::ops::{RadialOps, LAP_HALF_WIDTH};
use crate::scalar::{lit, Real};

/// Relative sup-norm tolerance of the step-doubling control.
pub const FLOW_TOL: f64 = 1e-11;
/// Degree `n` of the diagonal Padé approximant.
pub const PADE_ORDER: usize = 4;
const MAX_DOUBLINGS: u32 = 16;

/// `(I + z/a Δ)` factored and `(I − z/a Δ)` for one Padé zero `a`.
type Factor<T> = (BandedLu<Complex<T>>, Banded<Complex<T>>);

struct Plan<T> {
    substeps: usize,
    factors: Vec<Factor<T>>,
}

/// Plans keyed by the bit patterns of `(κ, t)`.
type PlanCache<T> = Mutex<HashMap<(u64, u64), Arc<Plan<T>>>>;

pub struct RadialFlow<T: Real> {
    lap: Banded<T>,
    zeros: Vec<Complex<f64>>,
    cache: PlanCache<T>,
}

/// Zeros of `P(z) = Σ_j (2n−j)! n! / ((2n)! j! (n−j)!) z^j`, the numerator of
/// the `[n/n]` Padé approximant of `e^z`, by Durand–Kerner iteration.
pub fn pade_zeros(n: usize) -> Vec<Complex<f64>> {
    let fact = |k: usize| (1..=k).fold(1.0f64, |a, b| a * b as f64);
    let c: Vec<f64> = (0..=n)
        .map(|j| fact(2 * n - j) * fact(n) / (fact(2 * n) * fact(j) * fact(n - j)))
        .collect();
    // monic form
    let lead = c[n];
    let poly = |z: Complex<f64>| c.iter().rev().fold(Complex::new(0.0, 0.0), |acc, &cj| acc * z + cj / lead);
    let mut roots: Vec<Complex<f64>> = (0..n)
        .map(|k| Complex::new(0.4, 0.9).powu(k as u32) * (n as f64 + 1.0))
        .collect();
    for _ in 0..500 {
        let mut delta = 0.0f64;
        for k in 0..n {
            let den = (0..n)
                .filter(|&m| m != k)
                .fold(Complex::new(1.0, 0.0), |acc, m| acc * (roots[k] - roots[m]));
            let step = poly(roots[k]) / den;
            roots[k] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    roots
}

impl<T: Real> RadialFlow<T> {
    pub fn new(grid: &Grid<T>) -> Self {
        let ops = RadialOps::new(grid);
        Self {
            lap: Banded::from_rows(LAP_HALF_WIDTH, ops.laplacian_rows().to_vec()),
            zeros: pade_zeros(PADE_ORDER),
            cache: Mutex::new(HashMap::new()),
        }
    }

    fn plan(&self, kappa: T, tau: T, substeps: usize) -> Plan<T> {
        let add_identity = |m: Banded<Complex<T>>| {
            let rows = m
                .rows()
                .iter()
                .map(|r| {
                    let mut r = r.clone();
                    r[LAP_HALF_WIDTH] += Complex::new(T::one(), T::zero());
                    r
                })
                .collect();
            Banded::from_rows(LAP_HALF_WIDTH, rows)
        };
        let z = Complex::new(T::zero(), kappa * tau);
        let factors = self
            .zeros
            .iter()
            .map(|a| {
                let inv = Complex::new(lit::<T>(1.0 / a.norm_sqr()), T::zero())
                    * Complex::new(lit::<T>(a.re), lit::<T>(-a.im));
                let c = z * inv;
                let lhs = add_identity(self.lap.map(|v| c * v)).factor();
                let rhs = add_identity(self.lap.map(|v| -c * v));
                (lhs, rhs)
            })
            .collect();
        Plan { substeps, factors }
    }

    fn run(plan: &Plan<T>, f: &[Complex<T>]) -> Field<T> {
        let mut x = f.to_vec();
        for _ in 0..plan.substeps {
            for (lu, rhs) in &plan.factors {
                x = rhs.apply(&x);
                lu.solve_in_place(&mut x);
            }
        }
        x
    }

    /// `e^{i kappa t Delta} f`.
    pub fn apply(&self, f: &[Complex<T>], kappa: T, t: T) -> Field<T> {
        if t == T::zero() {
            return f.to_vec();
        }
        let key = (kappa.to_f64().unwrap().to_bits(), t.to_f64().unwrap().to_bits());
        if let Some(p) = self.cache.lock().unwrap().get(&key).cloned() {
            return Self::run(&p, f);
        }
        let scale = f.iter().fold(T::zero(), |m, v| m.max(v.norm()));
        let mut m = 1usize;
        let mut coarse = self.plan(kappa, t, m);
        let mut prev = Self::run(&coarse, f);
        for _ in 0..MAX_DOUBLINGS {
            let fine = self.plan(kappa, t / lit::<T>((2 * m) as f64), 2 * m);
            let next = Self::run(&fine, f);
            let err = prev
                .iter()
                .zip(&next)
                .fold(T::zero(), |e, (a, b)| e.max((*a - *b).norm()));
            m *= 2;
            coarse = fine;
            prev = next;
            if err <= lit::<T>(FLOW_TOL) * scale.max(T::min_positive_value()) {
                break;
            }
        }
        self.cache.lock().unwrap().insert(key, Arc::new(coarse));
        prev
    }
}
