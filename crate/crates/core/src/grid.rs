//! Periodic boxes and staggered radial meshes.

use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GridKind {
    PeriodicBox,
    Radial,
}

impl GridKind {
    pub fn code(self) -> u32 {
        match self {
            GridKind::PeriodicBox => 0,
            GridKind::Radial => 1,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        match code {
            0 => Some(GridKind::PeriodicBox),
            1 => Some(GridKind::Radial),
            _ => None,
        }
    }
}

/// Dimension of the radial mesh. Radial fields represent functions on R^5.
pub const RADIAL_DIMENSION: usize = 5;

/// Sample layout shared by the three components of a field triple.
///
/// A periodic box covers `[-L, L)^d` with `N` nodes per axis, samples stored
/// row-major with the last axis fastest. A radial mesh holds the staggered
/// nodes `r_j = (j + 1/2) r_max / N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T> {
    kind: GridKind,
    dim: usize,
    extent: T,
    points: usize,
}

impl<T: Real> Grid<T> {
    pub fn new(kind: GridKind, dim: usize, extent: T, points: usize) -> Result<Self> {
        if points < 8 {
            return Err(Error::InvalidGrid(format!("points = {points} < 8")));
        }
        if !(extent > T::zero()) || !extent.is_finite() {
            return Err(Error::InvalidGrid(format!("extent = {extent} must be positive")));
        }
        match kind {
            GridKind::PeriodicBox => {
                if !points.is_power_of_two() {
                    return Err(Error::InvalidGrid(format!(
                        "N = {points} is not a power of two"
                    )));
                }
                if !(1..=3).contains(&dim) {
                    return Err(Error::InvalidGrid(format!(
                        "periodic box dimension {dim} not in 1..=3"
                    )));
                }
            }
            GridKind::Radial => {
                if dim != RADIAL_DIMENSION {
                    return Err(Error::InvalidGrid(format!(
                        "radial grids are {RADIAL_DIMENSION}-dimensional, got d = {dim}"
                    )));
                }
            }
        }
        Ok(Self {
            kind,
            dim,
            extent,
            points,
        })
    }

    pub fn periodic(dim: usize, half_width: T, points: usize) -> Result<Self> {
        Self::new(GridKind::PeriodicBox, dim, half_width, points)
    }

    pub fn radial(r_max: T, points: usize) -> Result<Self> {
        Self::new(GridKind::Radial, RADIAL_DIMENSION, r_max, points)
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn is_radial(&self) -> bool {
        self.kind == GridKind::Radial
    }

    pub fn is_box(&self) -> bool {
        self.kind == GridKind::PeriodicBox
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Box half-width `L` or radial cutoff `r_max`.
    pub fn extent(&self) -> T {
        self.extent
    }

    /// Samples per axis.
    pub fn points(&self) -> usize {
        self.points
    }

    /// Number of axes actually sampled: `d` for boxes, 1 for radial meshes.
    pub fn axes(&self) -> usize {
        match self.kind {
            GridKind::PeriodicBox => self.dim,
            GridKind::Radial => 1,
        }
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.axes() as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> T {
        let n = from_usize::<T>(self.points);
        match self.kind {
            GridKind::PeriodicBox => lit::<T>(2.0) * self.extent / n,
            GridKind::Radial => self.extent / n,
        }
    }

    /// Volume of the periodic box, `(2L)^d`.
    pub fn box_volume(&self) -> T {
        (lit::<T>(2.0) * self.extent).powi(self.dim as i32)
    }

    /// Node coordinates along one axis: `-L + j h` for boxes, `(j + 1/2) h`
    /// for radial meshes.
    pub fn axis_nodes(&self) -> Vec<T> {
        let h = self.spacing();
        let half = lit::<T>(0.5);
        (0..self.points)
            .map(|j| match self.kind {
                GridKind::PeriodicBox => -self.extent + from_usize::<T>(j) * h,
                GridKind::Radial => (from_usize::<T>(j) + half) * h,
            })
            .collect()
    }

    /// Discrete Fourier wavenumbers in FFT order: `(pi/L) m` for
    /// `m = 0..N/2-1, -N/2..-1`.
    pub fn wavenumbers(&self) -> Vec<T> {
        let n = self.points as i64;
        let scale = T::PI() / self.extent;
        (0..n)
            .map(|m| {
                let m = if m < n / 2 { m } else { m - n };
                scale * T::from_i64(m).unwrap()
            })
            .collect()
    }

    /// Wavenumbers sorted ascending, `(pi/L) {-N/2, ..., N/2 - 1}`.
    pub fn wavenumbers_sorted(&self) -> Vec<T> {
        let mut k = self.wavenumbers();
        k.sort_by(|a, b| a.partial_cmp(b).unwrap());
        k
    }

    /// Multi-index of a flat sample index (last axis fastest).
    pub fn unflatten(&self, mut flat: usize, out: &mut [usize]) {
        let n = self.points;
        for a in (0..self.axes()).rev() {
            out[a] = flat % n;
            flat /= n;
        }
    }

    /// Coordinates of every sample; `coords[a][flat]` is the a-th coordinate.
    /// Radial meshes return a single axis holding `r`.
    pub fn coordinates(&self) -> Vec<Vec<T>> {
        let nodes = self.axis_nodes();
        let axes = self.axes();
        let len = self.len();
        let mut coords = vec![vec![T::zero(); len]; axes];
        let mut idx = vec![0usize; axes];
        for flat in 0..len {
            self.unflatten(flat, &mut idx);
            for a in 0..axes {
                coords[a][flat] = nodes[idx[a]];
            }
        }
        coords
    }

    /// Euclidean radius `|x|` at every sample.
    pub fn radii(&self) -> Vec<T> {
        match self.kind {
            GridKind::Radial => self.axis_nodes(),
            GridKind::PeriodicBox => {
                let c = self.coordinates();
                (0..self.len())
                    .map(|i| c.iter().map(|ax| ax[i] * ax[i]).fold(T::zero(), |s, v| s + v).sqrt())
                    .collect()
            }
        }
    }

    /// Quadrature weights: `h^d` on boxes, `|S^{d-1}| r^{d-1} dr` on radial
    /// meshes, so that `sum w f` approximates `int_{R^d} f`.
    pub fn weights(&self) -> Vec<T> {
        let h = self.spacing();
        match self.kind {
            GridKind::PeriodicBox => vec![h.powi(self.dim as i32); self.len()],
            GridKind::Radial => {
                let area = sphere_area::<T>(self.dim);
                self.axis_nodes()
                    .into_iter()
                    .map(|r| area * r.powi(self.dim as i32 - 1) * h)
                    .collect()
            }
        }
    }

    pub fn same_layout(&self, other: &Grid<T>) -> bool {
        self == other
    }

    pub fn check_len(&self, n: usize) -> Result<()> {
        if n != self.len() {
            return Err(Error::GridMismatch(format!(
                "field has {n} samples, grid expects {}",
                self.len()
            )));
        }
        Ok(())
    }
}

/// Surface area of the unit sphere `S^{d-1}` in R^d.
pub fn sphere_area<T: Real>(d: usize) -> T {
    lit::<T>(d as f64) * ball_volume::<T>(d)
}

/// Volume of the unit ball in R^d.
pub fn ball_volume<T: Real>(d: usize) -> T {
    // omega_d = pi^{d/2} / Gamma(d/2 + 1), via the two-step recursion
    // omega_d = 2 pi / d * omega_{d-2}.
    let mut w = if d.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut k = if d.is_multiple_of(2) { 2 } else { 3 };
    while k <= d {
        w *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    lit(w)
}
