use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, to_f64, Real};

/// Number of stored samples of `chi` on `[0, 1]`.
pub const CUTOFF_SAMPLES: usize = 1001;

/// Smooth radial cutoff: `chi = 1` on `[0, 1 - eps]`, `0` beyond `1`, and the
/// exp-based bump interpolant in between.
#[derive(Debug, Clone)]
pub struct Cutoff<T> {
    eps: T,
    samples: Vec<T>,
}

fn bump<T: Real>(t: T) -> T {
    if t <= T::zero() {
        T::zero()
    } else {
        (-t.recip()).exp()
    }
}

impl<T: Real> Cutoff<T> {
    pub fn eps(&self) -> T {
        self.eps
    }

    /// `chi(r)` at `r_k = k / (CUTOFF_SAMPLES - 1)`.
    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn eval(&self, r: T) -> T {
        let r = r.abs();
        let lo = T::one() - self.eps;
        if r <= lo {
            return T::one();
        }
        if r >= T::one() {
            return T::zero();
        }
        let t = (T::one() - r) / self.eps;
        let (a, b) = (bump(t), bump(T::one() - t));
        a / (a + b)
    }

    /// `d chi / dr` for `r >= 0`.
    pub fn derivative(&self, r: T) -> T {
        let r = r.abs();
        let lo = T::one() - self.eps;
        if r <= lo || r >= T::one() {
            return T::zero();
        }
        let t = (T::one() - r) / self.eps;
        let s = T::one() - t;
        let (a, b) = (bump(t), bump(s));
        let (da, db) = (a / (t * t), b / (s * s));
        // d/dt [a/(a+b)] with b = bump(1 - t)
        let dt = (da * b + a * db) / ((a + b) * (a + b));
        -dt / self.eps
    }
}

pub fn build_cutoff<T: Real>(eps: T) -> Result<Cutoff<T>> {
    if !(eps > lit(0.01) && eps < lit(0.5)) {
        return Err(Error::EpsilonRange(to_f64(eps)));
    }
    let mut c = Cutoff {
        eps,
        samples: Vec::new(),
    };
    let last = from_usize::<T>(CUTOFF_SAMPLES - 1);
    c.samples = (0..CUTOFF_SAMPLES).map(|k| c.eval(from_usize::<T>(k) / last)).collect();
    Ok(c)
}
