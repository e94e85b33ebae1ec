//! Conserved quantities and variational functionals.
//!
//! ```text
//! M = ∫ ½|u1|² + ½|u2|² + |u3|²
//! K = Σ (κi/2) ∫ |∇ui|²
//! V = Re ∫ conj(u1) conj(u2) u3
//! E = K − V
//! P = Im ∫ Σ conj(ui) ∇ui
//! ```

use crate::error::{Error, Result};
use crate::field::FieldTriple;
use crate::ops::{integrate, Operators};
use crate::params::SystemParams;
use crate::scalar::{lit, to_f64, Real};

/// Below this `|V|` a field is treated as lying outside Ξ.
pub const POTENTIAL_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub struct ConservedSet<T> {
    pub mass: T,
    pub kinetic: T,
    pub potential: T,
    pub energy: T,
    pub momentum: Vec<T>,
}

/// `J2 = M K^5 / V^4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeinsteinValue<T> {
    pub j2: T,
}

/// Scattering thresholds `M(Q)E(Q)` and `M(Q)K(Q)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds<T> {
    pub me: T,
    pub mk: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductCheck<T> {
    pub me: T,
    pub mk: T,
    pub below_threshold: bool,
}

/// Functional evaluator holding cached differentiation operators.
#[derive(Clone)]
pub struct Functionals<T: Real> {
    ops: Operators<T>,
    params: SystemParams<T>,
}

impl<T: Real> Functionals<T> {
    pub fn new(grid: &crate::grid::Grid<T>, params: SystemParams<T>) -> Self {
        Self {
            ops: Operators::new(grid),
            params,
        }
    }

    pub fn params(&self) -> &SystemParams<T> {
        &self.params
    }

    pub fn operators(&self) -> &Operators<T> {
        &self.ops
    }

    fn check(&self, u: &FieldTriple<T>) -> Result<()> {
        if u.grid() != self.ops.grid() {
            return Err(Error::GridMismatch(
                "field lives on a different grid than the evaluator".into(),
            ));
        }
        Ok(())
    }

    pub fn mass(&self, u: &FieldTriple<T>) -> Result<T> {
        self.check(u)?;
        Ok(mass(u))
    }

    pub fn kinetic(&self, u: &FieldTriple<T>) -> Result<T> {
        self.check(u)?;
        let half = lit::<T>(0.5);
        let mut total = T::zero();
        for i in 0..3 {
            let grad = self.ops.gradient(u.comp(i));
            let dens: Vec<T> = (0..u.len())
                .map(|j| grad.iter().fold(T::zero(), |s, g| s + g[j].norm_sqr()))
                .collect();
            total += half * self.params.kappa_i(i) * integrate(u.grid(), &dens);
        }
        Ok(total)
    }

    pub fn potential(&self, u: &FieldTriple<T>) -> Result<T> {
        self.check(u)?;
        Ok(potential(u))
    }

    pub fn energy(&self, u: &FieldTriple<T>) -> Result<T> {
        Ok(self.kinetic(u)? - self.potential(u)?)
    }

    pub fn momentum(&self, u: &FieldTriple<T>) -> Result<Vec<T>> {
        self.check(u)?;
        let g = u.grid();
        if g.is_radial() {
            return Ok(vec![T::zero(); g.dim()]);
        }
        let mut p = vec![T::zero(); g.dim()];
        for i in 0..3 {
            let grad = self.ops.gradient(u.comp(i));
            for (a, ga) in grad.iter().enumerate() {
                let dens: Vec<T> = u
                    .comp(i)
                    .iter()
                    .zip(ga)
                    .map(|(v, dv)| (v.conj() * dv).im)
                    .collect();
                p[a] += integrate(g, &dens);
            }
        }
        Ok(p)
    }

    /// Grid `H¹` norm `(Σ ∫ |ui|² + |∇ui|²)^{1/2}`, without `κ` weights.
    pub fn h1_norm(&self, u: &FieldTriple<T>) -> Result<T> {
        self.check(u)?;
        let mut total = T::zero();
        for i in 0..3 {
            let grad = self.ops.gradient(u.comp(i));
            let dens: Vec<T> = (0..u.len())
                .map(|j| grad.iter().fold(u.comp(i)[j].norm_sqr(), |s, g| s + g[j].norm_sqr()))
                .collect();
            total += integrate(u.grid(), &dens);
        }
        Ok(total.sqrt())
    }

    /// `‖u − v‖_{H¹}`.
    pub fn h1_distance(&self, u: &FieldTriple<T>, v: &FieldTriple<T>) -> Result<T> {
        self.h1_norm(&u.sub(v)?)
    }

    pub fn conserved(&self, u: &FieldTriple<T>) -> Result<ConservedSet<T>> {
        let mass = self.mass(u)?;
        let kinetic = self.kinetic(u)?;
        let potential = self.potential(u)?;
        Ok(ConservedSet {
            mass,
            kinetic,
            potential,
            energy: kinetic - potential,
            momentum: self.momentum(u)?,
        })
    }

    pub fn weinstein(&self, u: &FieldTriple<T>) -> Result<WeinsteinValue<T>> {
        let v = self.potential(u)?;
        if v.abs() <= lit::<T>(POTENTIAL_FLOOR) || !v.is_finite() {
            return Err(Error::OutsideXi(to_f64(v.abs())));
        }
        let m = self.mass(u)?;
        let k = self.kinetic(u)?;
        Ok(WeinsteinValue {
            j2: m * k.powi(5) / v.powi(4),
        })
    }

    /// `C M^{1/4} K^{5/4} − V`, nonnegative by the sharp Gagliardo–Nirenberg
    /// inequality when `C` is the sharp constant.
    pub fn gn_gap(&self, u: &FieldTriple<T>, c_gn: T) -> Result<T> {
        let m = self.mass(u)?;
        let k = self.kinetic(u)?;
        let v = self.potential(u)?;
        Ok(c_gn * m.powf(lit(0.25)) * k.powf(lit(1.25)) - v)
    }

    /// `4 K(u^ξ) − 5 V(u)`.
    pub fn coercivity_gap(&self, u_boosted: &FieldTriple<T>, u: &FieldTriple<T>) -> Result<T> {
        Ok(lit::<T>(4.0) * self.kinetic(u_boosted)? - lit::<T>(5.0) * self.potential(u)?)
    }

    pub fn product_checks(&self, u: &FieldTriple<T>, th: &Thresholds<T>) -> Result<ProductCheck<T>> {
        let m = self.mass(u)?;
        let k = self.kinetic(u)?;
        let e = k - self.potential(u)?;
        let me = m * e;
        let mk = m * k;
        Ok(ProductCheck {
            me,
            mk,
            below_threshold: me < th.me && mk <= th.mk,
        })
    }
}

/// Pointwise `½|u1|² + ½|u2|² + |u3|²`.
pub fn mass_density<T: Real>(u: &FieldTriple<T>) -> Vec<T> {
    let half = lit::<T>(0.5);
    (0..u.len())
        .map(|j| half * (u.comp(0)[j].norm_sqr() + u.comp(1)[j].norm_sqr()) + u.comp(2)[j].norm_sqr())
        .collect()
}

/// Pointwise `Re(conj(u1) conj(u2) u3)`.
pub fn potential_density<T: Real>(u: &FieldTriple<T>) -> Vec<T> {
    (0..u.len())
        .map(|j| (u.comp(0)[j].conj() * u.comp(1)[j].conj() * u.comp(2)[j]).re)
        .collect()
}

pub fn mass<T: Real>(u: &FieldTriple<T>) -> T {
    integrate(u.grid(), &mass_density(u))
}

pub fn potential<T: Real>(u: &FieldTriple<T>) -> T {
    integrate(u.grid(), &potential_density(u))
}

pub fn kinetic<T: Real>(u: &FieldTriple<T>, p: &SystemParams<T>) -> Result<T> {
    Functionals::new(u.grid(), *p).kinetic(u)
}

pub fn energy<T: Real>(u: &FieldTriple<T>, p: &SystemParams<T>) -> Result<T> {
    Functionals::new(u.grid(), *p).energy(u)
}

pub fn momentum<T: Real>(u: &FieldTriple<T>, p: &SystemParams<T>) -> Result<Vec<T>> {
    Functionals::new(u.grid(), *p).momentum(u)
}

pub fn conserved<T: Real>(u: &FieldTriple<T>, p: &SystemParams<T>) -> Result<ConservedSet<T>> {
    Functionals::new(u.grid(), *p).conserved(u)
}

pub fn weinstein<T: Real>(u: &FieldTriple<T>, p: &SystemParams<T>) -> Result<WeinsteinValue<T>> {
    Functionals::new(u.grid(), *p).weinstein(u)
}

pub fn gn_gap<T: Real>(u: &FieldTriple<T>, p: &SystemParams<T>, c_gn: T) -> Result<T> {
    Functionals::new(u.grid(), *p).gn_gap(u, c_gn)
}

pub fn coercivity_gap<T: Real>(
    u_boosted: &FieldTriple<T>,
    u: &FieldTriple<T>,
    p: &SystemParams<T>,
) -> Result<T> {
    u_boosted.ensure_same_grid(u)?;
    Functionals::new(u.grid(), *p).coercivity_gap(u_boosted, u)
}

pub fn product_checks<T: Real>(
    u: &FieldTriple<T>,
    p: &SystemParams<T>,
    th: &Thresholds<T>,
) -> Result<ProductCheck<T>> {
    Functionals::new(u.grid(), *p).product_checks(u, th)
}
