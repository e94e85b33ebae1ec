//! Differential operators and quadrature on both grid kinds.
//!
//! Boxes use spectral differentiation. Radial meshes use centred differences
//! on the staggered nodes, with ghost values below r = 0 filled by even
//! reflection and everything beyond `r_max` taken as zero.

use num_complex::Complex;

use crate::banded::Banded;
use crate::error::Result;
use crate::fft::FftNd;
use crate::field::Field;
use crate::grid::Grid;
use crate::scalar::{czero, from_usize, lit, Real};

/// Quadrature of a real density over the grid.
pub fn integrate<T: Real>(grid: &Grid<T>, density: &[T]) -> T {
    match grid.kind() {
        crate::grid::GridKind::PeriodicBox => {
            let w = grid.spacing().powi(grid.dim() as i32);
            density.iter().fold(T::zero(), |s, &v| s + v) * w
        }
        crate::grid::GridKind::Radial => grid
            .weights()
            .iter()
            .zip(density)
            .fold(T::zero(), |s, (&w, &v)| s + w * v),
    }
}

/// Cached FFT plan and wavenumber tables for one periodic box.
#[derive(Clone)]
pub struct Spectral<T: Real> {
    grid: Grid<T>,
    fft: FftNd<T>,
    /// `k[a][flat]`: wavenumber along axis `a` at each spectral index.
    k: Vec<Vec<T>>,
    /// Same with the Nyquist mode zeroed, for odd derivatives of real data.
    k_odd: Vec<Vec<T>>,
    k2: Vec<T>,
}

impl<T: Real> Spectral<T> {
    pub fn new(grid: &Grid<T>) -> Self {
        assert!(grid.is_box(), "spectral operators need a periodic box");
        let axes = grid.axes();
        let n = grid.len();
        let k1 = grid.wavenumbers();
        let mut k = vec![vec![T::zero(); n]; axes];
        let mut k_odd = vec![vec![T::zero(); n]; axes];
        let mut k2 = vec![T::zero(); n];
        let nyquist = grid.points() / 2;
        let mut idx = vec![0usize; axes];
        for flat in 0..n {
            grid.unflatten(flat, &mut idx);
            for a in 0..axes {
                let v = k1[idx[a]];
                k[a][flat] = v;
                if idx[a] != nyquist {
                    k_odd[a][flat] = v;
                }
                k2[flat] += v * v;
            }
        }
        Self {
            grid: *grid,
            fft: FftNd::new(grid.points(), axes),
            k,
            k_odd,
            k2,
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn k(&self, axis: usize) -> &[T] {
        &self.k[axis]
    }

    pub fn k_squared(&self) -> &[T] {
        &self.k2
    }

    pub fn forward(&self, f: &[Complex<T>]) -> Field<T> {
        let mut x = f.to_vec();
        self.fft.forward(&mut x);
        x
    }

    pub fn inverse_in_place(&self, x: &mut [Complex<T>]) {
        self.fft.inverse(x);
    }

    /// `F^{-1}[m(k) F f]` where `m` receives the flat spectral index.
    pub fn apply_multiplier<M>(&self, f: &[Complex<T>], mut m: M) -> Field<T>
    where
        M: FnMut(usize) -> Complex<T>,
    {
        let mut x = self.forward(f);
        for (j, v) in x.iter_mut().enumerate() {
            *v *= m(j);
        }
        self.fft.inverse(&mut x);
        x
    }

    pub fn gradient(&self, f: &[Complex<T>]) -> Vec<Field<T>> {
        let fh = self.forward(f);
        (0..self.grid.axes())
            .map(|a| {
                let mut x: Field<T> = fh
                    .iter()
                    .zip(&self.k_odd[a])
                    .map(|(v, &k)| Complex::new(-v.im * k, v.re * k))
                    .collect();
                self.fft.inverse(&mut x);
                x
            })
            .collect()
    }

    pub fn laplacian(&self, f: &[Complex<T>], kappa: T) -> Field<T> {
        let mut x = self.forward(f);
        for (v, &k2) in x.iter_mut().zip(&self.k2) {
            *v *= -kappa * k2;
        }
        self.fft.inverse(&mut x);
        x
    }
}

/// Radial stencils on a staggered mesh in dimension `d`: fourth-order first
/// derivative, sixth-order Laplacian.
#[derive(Debug, Clone)]
pub struct RadialOps<T> {
    grid: Grid<T>,
    d1: Vec<Vec<T>>,
    lap: Vec<Vec<T>>,
}

/// Half-width of the first-derivative stencil.
pub const D1_HALF_WIDTH: usize = 2;
/// Half-width of the Laplacian stencil.
pub const LAP_HALF_WIDTH: usize = 3;

impl<T: Real> RadialOps<T> {
    pub fn new(grid: &Grid<T>) -> Self {
        assert!(grid.is_radial(), "radial stencils need a radial mesh");
        let n = grid.points();
        let h = grid.spacing();
        let r = grid.axis_nodes();
        let dm1 = from_usize::<T>(grid.dim() - 1);
        let c1: Vec<T> = [1.0, -8.0, 0.0, 8.0, -1.0]
            .iter()
            .map(|&c| lit::<T>(c / 12.0) / h)
            .collect();
        let c1_6: Vec<T> = [-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0]
            .iter()
            .map(|&c| lit::<T>(c / 60.0) / h)
            .collect();
        let c2_6: Vec<T> = [2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0]
            .iter()
            .map(|&c| lit::<T>(c / 180.0) / (h * h))
            .collect();
        let mut d1 = Vec::with_capacity(n);
        let mut lap = Vec::with_capacity(n);
        for j in 0..n {
            d1.push(fold_even(j, c1.clone()));
            let l: Vec<T> = (0..c2_6.len()).map(|m| c2_6[m] + dm1 / r[j] * c1_6[m]).collect();
            lap.push(fold_even(j, l));
        }
        Self {
            grid: *grid,
            d1,
            lap,
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    /// Rows of `d/dr`, column offsets `-2..=2`.
    pub fn derivative_rows(&self) -> &[Vec<T>] {
        &self.d1
    }

    /// Rows of `d^2/dr^2 + (d-1)/r d/dr`, column offsets `-3..=3`.
    pub fn laplacian_rows(&self) -> &[Vec<T>] {
        &self.lap
    }

    pub fn derivative(&self, f: &[Complex<T>]) -> Field<T> {
        apply_rows(&self.d1, f)
    }

    pub fn derivative_real(&self, f: &[T]) -> Vec<T> {
        apply_rows_real(&self.d1, f)
    }

    pub fn laplacian(&self, f: &[Complex<T>], kappa: T) -> Field<T> {
        apply_rows(&self.lap, f).into_iter().map(|v| v * kappa).collect()
    }

    pub fn laplacian_real(&self, f: &[T], kappa: T) -> Vec<T> {
        apply_rows_real(&self.lap, f).into_iter().map(|v| v * kappa).collect()
    }

    /// `c - kappa * Delta` as a banded matrix.
    pub fn shifted_operator(&self, c: T, kappa: T) -> Banded<T> {
        Banded::from_rows(
            LAP_HALF_WIDTH,
            self.lap
                .iter()
                .map(|row| {
                    let mut out: Vec<T> = row.iter().map(|&v| -kappa * v).collect();
                    out[LAP_HALF_WIDTH] += c;
                    out
                })
                .collect(),
        )
    }
}

/// Fold ghost columns below r = 0 onto their mirror nodes, `f_{-k} = f_{k-1}`.
fn fold_even<T: Real>(j: usize, mut row: Vec<T>) -> Vec<T> {
    let b = row.len() / 2;
    for m in 0..b {
        let col = j as isize + m as isize - b as isize;
        if col < 0 {
            let mirror = (-col - 1) as usize;
            let target = mirror + b - j;
            let v = row[m];
            row[target] += v;
            row[m] = T::zero();
        }
    }
    row
}

fn apply_rows<T: Real>(rows: &[Vec<T>], f: &[Complex<T>]) -> Field<T> {
    let n = f.len();
    (0..n)
        .map(|j| {
            let b = rows[j].len() / 2;
            let mut acc = czero::<T>();
            for (m, &c) in rows[j].iter().enumerate() {
                let col = j as isize + m as isize - b as isize;
                if col >= 0 && (col as usize) < n {
                    acc += f[col as usize] * c;
                }
            }
            acc
        })
        .collect()
}

fn apply_rows_real<T: Real>(rows: &[Vec<T>], f: &[T]) -> Vec<T> {
    let n = f.len();
    (0..n)
        .map(|j| {
            let b = rows[j].len() / 2;
            let mut acc = T::zero();
            for (m, &c) in rows[j].iter().enumerate() {
                let col = j as isize + m as isize - b as isize;
                if col >= 0 && (col as usize) < n {
                    acc += f[col as usize] * c;
                }
            }
            acc
        })
        .collect()
}

/// Spatial gradient. Boxes return one field per axis; radial meshes return
/// the single radial derivative.
pub fn gradient<T: Real>(f: &[Complex<T>], grid: &Grid<T>) -> Result<Vec<Field<T>>> {
    grid.check_len(f.len())?;
    Ok(if grid.is_box() {
        Spectral::new(grid).gradient(f)
    } else {
        vec![RadialOps::new(grid).derivative(f)]
    })
}

/// `kappa * Delta f`.
pub fn laplacian_kappa<T: Real>(f: &[Complex<T>], kappa: T, grid: &Grid<T>) -> Result<Field<T>> {
    grid.check_len(f.len())?;
    Ok(if grid.is_box() {
        Spectral::new(grid).laplacian(f, kappa)
    } else {
        RadialOps::new(grid).laplacian(f, kappa)
    })
}

/// Differentiation back-end chosen by grid kind; built once and reused.
#[derive(Clone)]
pub enum Operators<T: Real> {
    Box(Spectral<T>),
    Radial(RadialOps<T>),
}

impl<T: Real> Operators<T> {
    pub fn new(grid: &Grid<T>) -> Self {
        if grid.is_box() {
            Operators::Box(Spectral::new(grid))
        } else {
            Operators::Radial(RadialOps::new(grid))
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        match self {
            Operators::Box(s) => s.grid(),
            Operators::Radial(r) => r.grid(),
        }
    }

    pub fn gradient(&self, f: &[Complex<T>]) -> Vec<Field<T>> {
        match self {
            Operators::Box(s) => s.gradient(f),
            Operators::Radial(r) => vec![r.derivative(f)],
        }
    }

    pub fn laplacian(&self, f: &[Complex<T>], kappa: T) -> Field<T> {
        match self {
            Operators::Box(s) => s.laplacian(f, kappa),
            Operators::Radial(r) => r.laplacian(f, kappa),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cfield(v: impl Iterator<Item = f64>) -> Field<f64> {
        v.map(|x| Complex::new(x, 0.0)).collect()
    }

    #[test]
    fn plane_wave_derivatives_are_exact() {
        let g = Grid::<f64>::periodic(1, PI, 16).unwrap();
        let x = g.axis_nodes();
        let k = 3.0;
        let f: Field<f64> = x.iter().map(|&x| Complex::new(0.0, k * x).exp()).collect();
        let df = gradient(&f, &g).unwrap().remove(0);
        let lf = laplacian_kappa(&f, 2.0, &g).unwrap();
        for j in 0..16 {
            let expect = Complex::new(0.0, k) * f[j];
            assert!((df[j] - expect).norm() < 1e-12);
            assert!((lf[j] + 2.0 * k * k * f[j]).norm() < 1e-11);
        }
    }

    #[test]
    fn constants_have_no_derivative() {
        let g = Grid::<f64>::periodic(2, 3.0, 16).unwrap();
        let f = vec![Complex::new(1.5, -0.5); g.len()];
        for comp in gradient(&f, &g).unwrap() {
            assert!(comp.iter().all(|v| v.norm() < 1e-13));
        }
        assert!(laplacian_kappa(&f, 1.0, &g).unwrap().iter().all(|v| v.norm() < 1e-13));
    }

    fn radial_errors(n: usize) -> (f64, f64) {
        let g = Grid::<f64>::radial(8.0, n).unwrap();
        let r = g.axis_nodes();
        let f = cfield(r.iter().map(|r| (-r * r).exp()));
        let df = gradient(&f, &g).unwrap().remove(0);
        let lf = laplacian_kappa(&f, 1.5, &g).unwrap();
        let mut e1: f64 = 0.0;
        let mut e2: f64 = 0.0;
        for j in 0..n {
            let e = (-r[j] * r[j]).exp();
            e1 = e1.max((df[j].re + 2.0 * r[j] * e).abs());
            e2 = e2.max((lf[j].re - 1.5 * (4.0 * r[j] * r[j] - 10.0) * e).abs());
        }
        (e1, e2)
    }

    #[test]
    fn radial_gaussian_fourth_order() {
        let (a1, a2) = radial_errors(128);
        let (b1, b2) = radial_errors(256);
        let p1 = (a1 / b1).log2();
        let p2 = (a2 / b2).log2();
        assert!(p1 >= 3.5, "derivative order {p1}");
        assert!(p2 >= 3.5, "laplacian order {p2}");
        assert!(b2 < 1e-4, "{a1} {b1} {a2} {b2}");
    }

    #[test]
    fn shifted_operator_matches_stencil() {
        let g = Grid::<f64>::radial(10.0, 64).unwrap();
        let ops = RadialOps::new(&g);
        let f: Vec<f64> = g.axis_nodes().iter().map(|r| (-r * r / 4.0).exp()).collect();
        let a = ops.shifted_operator(2.0, 0.7).apply(&f);
        let lap = ops.laplacian_real(&f, 0.7);
        for j in 0..64 {
            assert!((a[j] - (2.0 * f[j] - lap[j])).abs() < 1e-12);
        }
        let back = ops.shifted_operator(2.0, 0.7).factor().solve(&a);
        for j in 0..64 {
            assert!((back[j] - f[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn box_integration_by_parts() {
        let g = Grid::<f64>::periodic(2, 4.0, 32).unwrap();
        let c = g.coordinates();
        let f: Field<f64> = (0..g.len())
            .map(|j| {
                let (x, y) = (c[0][j], c[1][j]);
                Complex::new((-(x * x + y * y)).exp(), (-(x - 0.5).powi(2) - y * y).exp() * x)
            })
            .collect();
        let h: Field<f64> = (0..g.len())
            .map(|j| {
                let (x, y) = (c[0][j], c[1][j]);
                Complex::new((-(x * x + y * y)).exp() * y, 0.3 * (-(x * x + y * y)).exp())
            })
            .collect();
        let sp = Spectral::new(&g);
        let lf = sp.laplacian(&f, 1.0);
        let lhs: f64 = integrate(&g, &lf.iter().zip(&h).map(|(a, b)| (a * b.conj()).re).collect::<Vec<_>>());
        let gf = sp.gradient(&f);
        let gh = sp.gradient(&h);
        let rhs: f64 = integrate(
            &g,
            &(0..g.len())
                .map(|j| (gf[0][j] * gh[0][j].conj() + gf[1][j] * gh[1][j].conj()).re)
                .collect::<Vec<_>>(),
        );
        assert!((lhs + rhs).abs() < 1e-10 * rhs.abs().max(1e-30), "{lhs} {rhs}");
    }
}
