use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::scalar::{czero, Real};

/// One complex scalar field sampled on a grid.
pub type Field<T> = Vec<Complex<T>>;

/// The state `u = (u^1, u^2, u^3)` on one shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldTriple<T> {
    grid: Grid<T>,
    comps: [Field<T>; 3],
}

impl<T: Real> FieldTriple<T> {
    pub fn new(grid: Grid<T>, u1: Field<T>, u2: Field<T>, u3: Field<T>) -> Result<Self> {
        for (i, f) in [&u1, &u2, &u3].into_iter().enumerate() {
            if f.len() != grid.len() {
                return Err(Error::GridMismatch(format!(
                    "component {} has {} samples, grid expects {}",
                    i + 1,
                    f.len(),
                    grid.len()
                )));
            }
        }
        Ok(Self {
            grid,
            comps: [u1, u2, u3],
        })
    }

    pub fn zeros(grid: Grid<T>) -> Self {
        let n = grid.len();
        Self {
            grid,
            comps: [vec![czero(); n], vec![czero(); n], vec![czero(); n]],
        }
    }

    /// Sample `f_i(coords)` at every node; `coords` is the per-node
    /// coordinate vector (radius only on radial meshes).
    pub fn from_fn<F>(grid: Grid<T>, mut f: F) -> Self
    where
        F: FnMut(&[T]) -> [Complex<T>; 3],
    {
        let coords = grid.coordinates();
        let n = grid.len();
        let mut out = Self::zeros(grid);
        let mut x = vec![T::zero(); coords.len()];
        for j in 0..n {
            for (a, ax) in coords.iter().enumerate() {
                x[a] = ax[j];
            }
            let v = f(&x);
            for i in 0..3 {
                out.comps[i][j] = v[i];
            }
        }
        out
    }

    /// Real profiles on a radial mesh.
    pub fn from_real(grid: Grid<T>, p1: &[T], p2: &[T], p3: &[T]) -> Result<Self> {
        let c = |p: &[T]| p.iter().map(|&v| Complex::new(v, T::zero())).collect::<Vec<_>>();
        Self::new(grid, c(p1), c(p2), c(p3))
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn comp(&self, i: usize) -> &Field<T> {
        &self.comps[i]
    }

    pub fn comp_mut(&mut self, i: usize) -> &mut Field<T> {
        &mut self.comps[i]
    }

    pub fn comps(&self) -> &[Field<T>; 3] {
        &self.comps
    }

    pub fn comps_mut(&mut self) -> &mut [Field<T>; 3] {
        &mut self.comps
    }

    pub fn into_comps(self) -> [Field<T>; 3] {
        self.comps
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn scaled(&self, s: T) -> Self {
        let mut out = self.clone();
        for c in out.comps.iter_mut() {
            for v in c.iter_mut() {
                *v *= s;
            }
        }
        out
    }

    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        for c in out.comps.iter_mut() {
            for v in c.iter_mut() {
                *v = v.conj();
            }
        }
        out
    }

    /// Componentwise `self - other`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.ensure_same_grid(other)?;
        let mut out = self.clone();
        for i in 0..3 {
            for (a, b) in out.comps[i].iter_mut().zip(&other.comps[i]) {
                *a -= *b;
            }
        }
        Ok(out)
    }

    pub fn ensure_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("field triples live on different grids".into()));
        }
        Ok(())
    }

    /// Largest modulus over all nodes and components.
    pub fn max_modulus(&self) -> T {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .fold(T::zero(), |m, v| m.max(v.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }
}
