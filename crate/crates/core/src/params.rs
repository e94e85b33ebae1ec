use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Relative tolerance of the mass-resonance predicate.
pub const MASS_RESONANCE_RTOL: f64 = 1e-12;

/// Dispersion coefficients `(kappa_1, kappa_2, kappa_3)` of the system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams<T> {
    kappa: [T; 3],
    mass_resonant: bool,
}

impl<T: Real> SystemParams<T> {
    pub fn new(kappa1: T, kappa2: T, kappa3: T) -> Result<Self> {
        let kappa = [kappa1, kappa2, kappa3];
        if kappa.iter().any(|k| !(*k > T::zero()) || !k.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "dispersion coefficients must be positive, got ({kappa1}, {kappa2}, {kappa3})"
            )));
        }
        Ok(Self {
            kappa,
            mass_resonant: is_mass_resonant(kappa),
        })
    }

    pub fn from_array(k: [T; 3]) -> Result<Self> {
        Self::new(k[0], k[1], k[2])
    }

    pub fn kappa(&self) -> [T; 3] {
        self.kappa
    }

    pub fn kappa_i(&self, i: usize) -> T {
        self.kappa[i]
    }

    pub fn max_kappa(&self) -> T {
        self.kappa.iter().fold(T::zero(), |m, &k| m.max(k))
    }

    /// `kappa_1 kappa_2 kappa_3`
    pub fn kappa_product(&self) -> T {
        self.kappa[0] * self.kappa[1] * self.kappa[2]
    }

    pub fn mass_resonant(&self) -> bool {
        self.mass_resonant
    }

    /// `1/kappa_1 + 1/kappa_2 - 1/kappa_3`, zero exactly under mass resonance.
    pub fn resonance_mismatch(&self) -> T {
        self.kappa[0].recip() + self.kappa[1].recip() - self.kappa[2].recip()
    }
}

fn is_mass_resonant<T: Real>(k: [T; 3]) -> bool {
    let lhs = k[2].recip();
    let rhs = k[0].recip() + k[1].recip();
    (lhs - rhs).abs() <= lit::<T>(MASS_RESONANCE_RTOL) * lhs.abs().max(rhs.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resonance_flag() {
        assert!(SystemParams::new(2.0, 2.0, 1.0).unwrap().mass_resonant());
        assert!(!SystemParams::new(1.0, 1.0, 2.0).unwrap().mass_resonant());
        assert!(!SystemParams::new(1.0, 1.0, 1.0).unwrap().mass_resonant());
        assert!(SystemParams::new(1.0, 2.0, 2.0 / 3.0).unwrap().mass_resonant());
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(SystemParams::new(0.0, 1.0, 1.0).is_err());
        assert!(SystemParams::new(1.0, -1.0, 1.0).is_err());
        assert!(SystemParams::new(1.0, 1.0, f64::NAN).is_err());
    }
}
