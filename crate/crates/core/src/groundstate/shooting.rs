//! Scalar ground state `W'' + (d-1)/r W' = W - W^2` by shooting on `W(0)`.
//!
//! Serves as an independent reference for the vector solver: with
//! `kappa = (1, 1, 2)` the vector ground state is `(√2 W, √2 W, W)`.
//!
//! The ODE is integrated with an adaptive Dormand–Prince 5(4) pair. The
//! decaying solution is a separatrix, so after bisection the trajectory is
//! trusted only until it has fallen to a small fraction of `W(0)`; beyond
//! that point the profile is continued with the linear decay
//! `A e^{-r}(1 + 1/r)/r^2`, exact for the linearized equation in d = 5.

use crate::error::{Error, Result};
use crate::grid::{sphere_area, RADIAL_DIMENSION};
use crate::scalar::{lit, to_f64, Real};

const W0_LO: f64 = 1.0;
const W0_HI: f64 = 40.0;
const R_START: f64 = 1e-4;
const R_END: f64 = 40.0;
/// Switch to the asymptotic tail once `W < TAIL_FRACTION * W(0)`.
const TAIL_FRACTION: f64 = 1e-9;

// state: W, W', ∫r^4 W^2, ∫r^4 W'^2, ∫r^4 W^3
type State<T> = [T; 5];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShotOutcome {
    /// `W` crossed zero: `W(0)` too large.
    Overshoot,
    /// `W'` turned positive before decaying: `W(0)` too small.
    Undershoot,
    /// Reached the end of the interval while still decaying.
    Decayed,
}

/// Result of the shooting oracle.
#[derive(Debug, Clone)]
pub struct ShootingSolution<T> {
    pub w0: T,
    /// Radius where the ODE trajectory hands over to the asymptotic tail.
    pub r_match: T,
    /// Tail amplitude `A` in `A e^{-r}(1 + 1/r)/r^2`.
    pub tail_amplitude: T,
    /// `∫_{R^5} W^2`
    pub int_w2: T,
    /// `∫_{R^5} |∇W|^2`
    pub int_grad2: T,
    /// `∫_{R^5} W^3`
    pub int_w3: T,
    tol: T,
}

fn rhs<T: Real>(r: T, y: &State<T>) -> State<T> {
    let four = lit::<T>((RADIAL_DIMENSION - 1) as f64);
    let r4 = r.powi(4);
    [
        y[1],
        y[0] - y[0] * y[0] - four * y[1] / r,
        r4 * y[0] * y[0],
        r4 * y[1] * y[1],
        r4 * y[0] * y[0] * y[0],
    ]
}

fn series_start<T: Real>(w0: T, r: T) -> State<T> {
    let c = (w0 - w0 * w0) / lit::<T>(2.0 * RADIAL_DIMENSION as f64);
    let r5 = r.powi(5) / lit::<T>(5.0);
    [w0 + c * r * r, lit::<T>(2.0) * c * r, w0 * w0 * r5, T::zero(), w0 * w0 * w0 * r5]
}

/// One Dormand–Prince step; returns (5th-order solution, error estimate).
fn dopri_step<T: Real>(r: T, y: &State<T>, h: T) -> (State<T>, State<T>) {
    let c = |x: f64| lit::<T>(x);
    let add = |y: &State<T>, terms: &[(f64, &State<T>)]| -> State<T> {
        std::array::from_fn(|i| {
            y[i] + h * terms.iter().fold(T::zero(), |s, (a, k)| s + c(*a) * k[i])
        })
    };
    let k1 = rhs(r, y);
    let k2 = rhs(r + c(1.0 / 5.0) * h, &add(y, &[(1.0 / 5.0, &k1)]));
    let k3 = rhs(
        r + c(3.0 / 10.0) * h,
        &add(y, &[(3.0 / 40.0, &k1), (9.0 / 40.0, &k2)]),
    );
    let k4 = rhs(
        r + c(4.0 / 5.0) * h,
        &add(y, &[(44.0 / 45.0, &k1), (-56.0 / 15.0, &k2), (32.0 / 9.0, &k3)]),
    );
    let k5 = rhs(
        r + c(8.0 / 9.0) * h,
        &add(
            y,
            &[
                (19372.0 / 6561.0, &k1),
                (-25360.0 / 2187.0, &k2),
                (64448.0 / 6561.0, &k3),
                (-212.0 / 729.0, &k4),
            ],
        ),
    );
    let k6 = rhs(
        r + h,
        &add(
            y,
            &[
                (9017.0 / 3168.0, &k1),
                (-355.0 / 33.0, &k2),
                (46732.0 / 5247.0, &k3),
                (49.0 / 176.0, &k4),
                (-5103.0 / 18656.0, &k5),
            ],
        ),
    );
    let y5 = add(
        y,
        &[
            (35.0 / 384.0, &k1),
            (500.0 / 1113.0, &k3),
            (125.0 / 192.0, &k4),
            (-2187.0 / 6784.0, &k5),
            (11.0 / 84.0, &k6),
        ],
    );
    let k7 = rhs(r + h, &y5);
    let e = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    let ks = [&k1, &k2, &k3, &k4, &k5, &k6, &k7];
    let err = std::array::from_fn(|i| {
        h * ks
            .iter()
            .zip(e)
            .fold(T::zero(), |s, (k, ei)| s + c(ei) * k[i])
    });
    (y5, err)
}

struct Integrator<T> {
    r: T,
    y: State<T>,
    h: T,
    tol: T,
}

impl<T: Real> Integrator<T> {
    fn new(w0: T, tol: T) -> Self {
        let r = lit::<T>(R_START);
        Self {
            r,
            y: series_start(w0, r),
            h: lit::<T>(1e-4),
            tol,
        }
    }

    /// Advance to exactly `target`, adapting the step size on the way.
    fn advance_to(&mut self, target: T) {
        while self.r < target {
            let last = self.r + self.h >= target;
            let h = if last { target - self.r } else { self.h };
            let (y, err) = dopri_step(self.r, &self.y, h);
            let mut worst = T::zero();
            for i in 0..2 {
                let scale = self.tol * (T::one() + self.y[i].abs().max(y[i].abs()));
                worst = worst.max(err[i].abs() / scale);
            }
            if worst <= T::one() || h < lit(1e-12) {
                self.r = if last { target } else { self.r + h };
                self.y = y;
            }
            let fac = if worst == T::zero() {
                lit(5.0)
            } else {
                (lit::<T>(0.9) * worst.powf(lit(-0.2))).max(lit(0.2)).min(lit(5.0))
            };
            if !last || worst > T::one() {
                self.h = (h * fac).min(lit(0.25));
            }
        }
    }

    fn step_free(&mut self, stop: T) {
        let target = (self.r + self.h).min(stop);
        self.advance_to(target);
    }
}

/// Integrate from `r ~ 0` and classify the shot.
pub fn shoot<T: Real>(w0: T, tol: T) -> Result<ShotOutcome> {
    if w0 <= T::zero() {
        return Err(Error::BracketFailure(format!(
            "W(0) = {w0} lies on the trivial branch"
        )));
    }
    let end = lit::<T>(R_END);
    let mut it = Integrator::new(w0, tol);
    while it.r < end {
        it.step_free(end);
        if it.y[0] < T::zero() {
            return Ok(ShotOutcome::Overshoot);
        }
        if it.y[1] > T::zero() {
            return Ok(ShotOutcome::Undershoot);
        }
    }
    // the constant solution W = 1 never moves
    if it.y[0] > lit(0.5) {
        Ok(ShotOutcome::Undershoot)
    } else {
        Ok(ShotOutcome::Decayed)
    }
}

/// `e^{-r}(1 + 1/r)/r^2`
fn tail_shape<T: Real>(r: T) -> T {
    (-r).exp() * (T::one() + r.recip()) / (r * r)
}

/// Solve the scalar problem in dimension `d` (only `d = 5` is supported).
pub fn shooting_scalar<T: Real>(d: usize, tol: T) -> Result<ShootingSolution<T>> {
    if d != RADIAL_DIMENSION {
        return Err(Error::InvalidParams(format!(
            "shooting oracle is implemented for d = {RADIAL_DIMENSION}, got {d}"
        )));
    }
    let mut lo = lit::<T>(W0_LO);
    let mut hi = lit::<T>(W0_HI);
    if shoot(lo, tol)? != ShotOutcome::Undershoot || shoot(hi, tol)? != ShotOutcome::Overshoot {
        return Err(Error::BracketFailure(format!(
            "no sign change of the shooting functional on [{W0_LO}, {W0_HI}]"
        )));
    }
    for _ in 0..200 {
        let mid = lit::<T>(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match shoot(mid, tol)? {
            ShotOutcome::Overshoot => hi = mid,
            ShotOutcome::Undershoot => lo = mid,
            ShotOutcome::Decayed => {
                lo = mid;
                hi = mid;
                break;
            }
        }
        if hi - lo <= lit::<T>(4.0) * T::eps() * hi {
            break;
        }
    }
    let w0 = lit::<T>(0.5) * (lo + hi);

    // Follow both bracket ends and hand over before they separate.
    let mut a = Integrator::new(lo, tol);
    let mut b = Integrator::new(hi, tol);
    let switch = lit::<T>(TAIL_FRACTION) * w0;
    let step = lit::<T>(1e-3);
    let mut r = a.r;
    loop {
        let next = r + step;
        a.advance_to(next);
        b.advance_to(next);
        r = next;
        let wa = a.y[0];
        let wb = b.y[0];
        if wa < switch || (wa - wb).abs() > lit::<T>(1e-6) * wa.abs() {
            break;
        }
        if r > lit(R_END) {
            return Err(Error::BracketFailure("profile never reached its tail".into()));
        }
    }
    let mut sol = Integrator::new(w0, tol);
    sol.advance_to(r);
    let amp = sol.y[0] / tail_shape(r);

    let area = sphere_area::<T>(RADIAL_DIMENSION);
    let (t2, t1, t3) = tail_integrals(amp, r);
    Ok(ShootingSolution {
        w0,
        r_match: r,
        tail_amplitude: amp,
        int_w2: area * (sol.y[2] + t2),
        int_grad2: area * (sol.y[3] + t1),
        int_w3: area * (sol.y[4] + t3),
        tol,
    })
}

/// `∫_{r_c}^∞ r^4 (W^2, W'^2, W^3) dr` for the asymptotic tail, by Simpson.
fn tail_integrals<T: Real>(amp: T, rc: T) -> (T, T, T) {
    let n = 20_000usize;
    let span = lit::<T>(60.0);
    let h = span / lit::<T>(n as f64);
    let mut s = (T::zero(), T::zero(), T::zero());
    for j in 0..=n {
        let r = rc + h * lit::<T>(j as f64);
        let w = amp * tail_shape(r);
        // d/dr [e^{-r}(r^{-2} + r^{-3})] = -e^{-r}(r^{-2} + 3 r^{-3} + 3 r^{-4})
        let dw = -amp * (-r).exp() * (r.powi(-2) + lit::<T>(3.0) * r.powi(-3) + lit::<T>(3.0) * r.powi(-4));
        let wt = if j == 0 || j == n {
            T::one()
        } else if j % 2 == 1 {
            lit(4.0)
        } else {
            lit(2.0)
        };
        let r4 = r.powi(4) * wt;
        s.0 += r4 * w * w;
        s.1 += r4 * dw * dw;
        s.2 += r4 * w * w * w;
    }
    let f = h / lit::<T>(3.0);
    (s.0 * f, s.1 * f, s.2 * f)
}

impl<T: Real> ShootingSolution<T> {
    /// `W` at the given increasing radii.
    pub fn sample(&self, radii: &[T]) -> Vec<T> {
        let mut it = Integrator::new(self.w0, self.tol);
        radii
            .iter()
            .map(|&r| {
                if r >= self.r_match {
                    self.tail_amplitude * tail_shape(r)
                } else if r <= it.r {
                    series_start(self.w0, r)[0]
                } else {
                    it.advance_to(r);
                    it.y[0]
                }
            })
            .collect()
    }

    /// Mass, kinetic and potential of `(√2 W, √2 W, W)` at `kappa = (1, 1, 2)`.
    pub fn reduction_functionals(&self) -> (T, T, T) {
        let three = lit::<T>(3.0);
        (three * self.int_w2, three * self.int_grad2, lit::<T>(2.0) * self.int_w3)
    }

    pub fn w0_f64(&self) -> f64 {
        to_f64(self.w0)
    }
}
