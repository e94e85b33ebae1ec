//! Linear (non-periodic) convolution on a box lattice via zero padding.
//!
//! `(K * g)(x_j) = h^d sum_k K(x_j - x_k) g(x_k)` where `K` is sampled at the
//! lattice offsets `(j - k) h`. Padding every axis to `2N` makes the circular
//! product exact for those offsets.

use num_complex::Complex;

use crate::fft::FftNd;
use crate::grid::Grid;
use crate::scalar::{czero, Real};

#[derive(Clone)]
pub struct LinearConv<T: Real> {
    n: usize,
    dim: usize,
    h: T,
    cell: T,
    fft: FftNd<T>,
}

/// Spectrum of a padded kernel.
#[derive(Clone)]
pub struct KernelHat<T>(Vec<Complex<T>>);

impl<T: Real> LinearConv<T> {
    pub fn new(grid: &Grid<T>) -> Self {
        let n = grid.points();
        let dim = grid.dim();
        let h = grid.spacing();
        Self {
            n,
            dim,
            h,
            cell: h.powi(dim as i32),
            fft: FftNd::new(2 * n, dim),
        }
    }

    fn padded_index(&self, flat: usize) -> usize {
        let p = 2 * self.n;
        let mut out = 0;
        let mut rest = flat;
        let mut scale = 1;
        for _ in 0..self.dim {
            let i = rest % self.n;
            rest /= self.n;
            out += i * scale;
            scale *= p;
        }
        out
    }

    /// Sample `k(z)` at every lattice offset and transform.
    pub fn kernel(&self, mut k: impl FnMut(&[T]) -> T) -> KernelHat<T> {
        let p = 2 * self.n;
        let total = p.pow(self.dim as u32);
        let mut buf = vec![czero::<T>(); total];
        let mut z = vec![T::zero(); self.dim];
        for (flat, v) in buf.iter_mut().enumerate() {
            let mut rest = flat;
            let mut skip = false;
            for a in (0..self.dim).rev() {
                let m = rest % p;
                rest /= p;
                if m == self.n {
                    skip = true;
                }
                let off = if m < self.n { m as f64 } else { m as f64 - p as f64 };
                z[a] = T::from_f64(off).unwrap() * self.h;
            }
            if !skip {
                *v = Complex::new(k(&z), T::zero());
            }
        }
        self.fft.forward(&mut buf);
        KernelHat(buf)
    }

    /// `K * g` on the original lattice.
    pub fn apply(&self, hat: &KernelHat<T>, g: &[T]) -> Vec<T> {
        let total = hat.0.len();
        let mut buf = vec![czero::<T>(); total];
        for (j, &v) in g.iter().enumerate() {
            buf[self.padded_index(j)] = Complex::new(v, T::zero());
        }
        self.fft.forward(&mut buf);
        for (b, k) in buf.iter_mut().zip(&hat.0) {
            *b *= *k;
        }
        self.fft.inverse(&mut buf);
        (0..g.len()).map(|j| buf[self.padded_index(j)].re * self.cell).collect()
    }

    /// `∫∫ f(x) K(x - y) g(y) dx dy`.
    pub fn pair(&self, f: &[T], hat: &KernelHat<T>, g: &[T]) -> T {
        let c = self.apply(hat, g);
        f.iter().zip(&c).fold(T::zero(), |s, (&a, &b)| s + a * b) * self.cell
    }

    pub fn cell(&self) -> T {
        self.cell
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn padded_len(&self) -> usize {
        (2 * self.n).pow(self.dim as u32)
    }
}
