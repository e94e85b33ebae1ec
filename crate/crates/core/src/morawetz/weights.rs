//! Convolution weights `phi`, `phi_one_weight`, `psi` and `a`.
//!
//! `phi` and `phi_one_weight` are autocorrelations of `chi^2` (resp. `chi^3`
//! against `chi^2`) at scale `R`, normalized by the volume of the radius-`R`
//! ball. They are computed by FFT on a fine auxiliary box of period `4R`,
//! which holds the full support `|x| < 2R` without wrap-around, and read off
//! along the first axis. `psi` and `a` follow by cumulative quadrature.

use num_complex::Complex;

use super::cutoff::Cutoff;
use crate::error::{Error, Result};
use crate::fft::FftNd;
use crate::grid::{ball_volume, Grid};
use crate::scalar::{czero, from_usize, lit, to_f64, Real};

#[derive(Debug, Clone)]
pub struct MorawetzWeights<T> {
    pub radius: T,
    pub dim: usize,
    pub eps: T,
    /// Abscissa spacing; sample `k` sits at `r = k * step`.
    pub step: T,
    pub phi: Vec<T>,
    pub phi_one_weight: Vec<T>,
    pub psi: Vec<T>,
    pub a: Vec<T>,
}

/// Fine-grid points per `R`.
fn resolution(dim: usize, eps: f64) -> usize {
    let want = 32.0 / eps;
    let cap = if dim == 1 { 4096 } else { 256 };
    let mut m = 64;
    while (m as f64) < want && m < cap {
        m *= 2;
    }
    m
}

/// Cumulative integral `F_k = int_0^{r_k} f` on a uniform abscissa with
/// six-point panels. `parity` (+1 or -1) fills the ghosts below zero; past
/// the end `f` is continued by its last value.
pub(crate) fn cumulative<T: Real>(f: &[T], h: T, parity: T) -> Vec<T> {
    let n = f.len() as isize;
    let at = |i: isize| {
        if i < 0 {
            parity * f[(-i) as usize]
        } else if i >= n {
            f[(n - 1) as usize]
        } else {
            f[i as usize]
        }
    };
    let w = [11.0, -93.0, 802.0, 802.0, -93.0, 11.0].map(lit::<T>);
    let c = h / lit(1440.0);
    let mut out = vec![T::zero(); f.len()];
    for k in 0..n - 1 {
        let panel = (0..6).fold(T::zero(), |s, m| s + w[m] * at(k - 2 + m as isize));
        out[(k + 1) as usize] = out[k as usize] + panel * c;
    }
    out
}

/// Six-point Lagrange interpolation of an even profile at `r >= 0`.
pub(crate) fn interp_even<T: Real>(f: &[T], step: T, r: T) -> T {
    let n = f.len() as isize;
    let s = r.abs() / step;
    let mut i0 = s.floor().to_isize().unwrap_or(n) - 2;
    if i0 + 5 >= n {
        i0 = n - 6;
    }
    let sample = |i: isize| if i < 0 { f[(-i) as usize] } else { f[i as usize] };
    let mut acc = T::zero();
    for a in 0..6isize {
        let xa = lit::<T>((i0 + a) as f64);
        let mut w = T::one();
        for b in 0..6isize {
            if b != a {
                let xb = lit::<T>((i0 + b) as f64);
                w *= (s - xb) / (xa - xb);
            }
        }
        acc += sample(i0 + a) * w;
    }
    acc
}

fn autocorrelation<T: Real>(c: &Cutoff<T>, dim: usize, m: usize, radius: T) -> (Vec<T>, Vec<T>) {
    let p = 4 * m;
    let hf = radius / from_usize::<T>(m);
    let total = p.pow(dim as u32);
    let fft = FftNd::<T>::new(p, dim);
    let mut sq = vec![czero::<T>(); total];
    let mut cu = vec![czero::<T>(); total];
    for flat in 0..total {
        let mut rest = flat;
        let mut r2 = T::zero();
        for _ in 0..dim {
            let j = rest % p;
            rest /= p;
            let off = if j < p / 2 { j as f64 } else { j as f64 - p as f64 };
            let x = lit::<T>(off) * hf;
            r2 += x * x;
        }
        let chi = c.eval(r2.sqrt() / radius);
        sq[flat] = Complex::new(chi * chi, T::zero());
        cu[flat] = Complex::new(chi * chi * chi, T::zero());
    }
    fft.forward(&mut sq);
    fft.forward(&mut cu);
    let mut phi: Vec<Complex<T>> = sq.iter().map(|v| v * v).collect();
    let mut phi1: Vec<Complex<T>> = sq.iter().zip(&cu).map(|(a, b)| a * b).collect();
    fft.inverse(&mut phi);
    fft.inverse(&mut phi1);
    let norm = hf.powi(dim as i32) / (ball_volume::<T>(dim) * radius.powi(dim as i32));
    let stride = p.pow(dim as u32 - 1);
    let read = |v: &[Complex<T>]| (0..=2 * m).map(|k| v[k * stride].re * norm).collect::<Vec<T>>();
    (read(&phi), read(&phi1))
}

pub fn build_weights<T: Real>(c: &Cutoff<T>, radius: T, g: &Grid<T>) -> Result<MorawetzWeights<T>> {
    let dim = g.dim();
    if !g.is_box() || !(1..=2).contains(&dim) {
        return Err(Error::Unsupported("Morawetz weights need a box with d in {1, 2}".into()));
    }
    let limit = g.extent() / lit(4.0);
    if !(radius > T::zero()) || radius > limit {
        return Err(Error::SupportOverflow {
            radius: to_f64(radius),
            limit: to_f64(limit),
        });
    }
    let m = resolution(dim, to_f64(c.eps()));
    let step = radius / from_usize::<T>(m);
    let (phi_core, phi1_core) = autocorrelation(c, dim, m, radius);
    let diameter = lit::<T>(2.0) * g.extent() * from_usize::<T>(dim).sqrt();
    let len = (diameter / step).ceil().to_usize().unwrap() + 8;
    let len = len.max(phi_core.len() + 8);
    let pad = |v: Vec<T>| {
        let mut v = v;
        // exact zero beyond 2R
        *v.last_mut().unwrap() = T::zero();
        v.resize(len, T::zero());
        v
    };
    let phi = pad(phi_core);
    let phi_one_weight = pad(phi1_core);
    let big_phi = cumulative(&phi, step, T::one());
    let psi: Vec<T> = big_phi
        .iter()
        .enumerate()
        .map(|(k, &v)| if k == 0 { phi[0] } else { v / (from_usize::<T>(k) * step) })
        .collect();
    let a = cumulative(&big_phi, step, -T::one());
    Ok(MorawetzWeights {
        radius,
        dim,
        eps: c.eps(),
        step,
        phi,
        phi_one_weight,
        psi,
        a,
    })
}

impl<T: Real> MorawetzWeights<T> {
    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn abscissa(&self) -> Vec<T> {
        (0..self.len()).map(|k| from_usize::<T>(k) * self.step).collect()
    }

    pub fn phi_at(&self, r: T) -> T {
        interp_even(&self.phi, self.step, r)
    }

    pub fn phi_one_at(&self, r: T) -> T {
        interp_even(&self.phi_one_weight, self.step, r)
    }

    pub fn psi_at(&self, r: T) -> T {
        interp_even(&self.psi, self.step, r)
    }

    pub fn a_at(&self, r: T) -> T {
        interp_even(&self.a, self.step, r)
    }

    /// `Δa = (d - 1) psi + phi`.
    pub fn lap_a_at(&self, r: T) -> T {
        from_usize::<T>(self.dim - 1) * self.psi_at(r) + self.phi_at(r)
    }

    /// Sup over interior samples of `|a'' + (d-1) a'/r - ((d-1) psi + phi)|`,
    /// with the derivatives of the sampled `a` taken by sixth-order
    /// differences.
    pub fn laplacian_residual(&self) -> T {
        let h = self.step;
        let n = self.len() as isize;
        let d1 = from_usize::<T>(self.dim - 1);
        let at = |i: isize| self.a[i.unsigned_abs()];
        let c2 = [2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0].map(lit::<T>);
        let c1 = [-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0].map(lit::<T>);
        let mut worst = T::zero();
        for k in 1..n - 4 {
            let (mut s2, mut s1) = (T::zero(), T::zero());
            for m in 0..7isize {
                s2 += c2[m as usize] * at(k + m - 3);
                s1 += c1[m as usize] * at(k + m - 3);
            }
            let a2 = s2 / (lit::<T>(180.0) * h * h);
            let a1 = s1 / (lit::<T>(60.0) * h);
            let r = from_usize::<T>(k as usize) * h;
            let lhs = a2 + d1 * a1 / r;
            let rhs = d1 * self.psi[k as usize] + self.phi[k as usize];
            worst = worst.max((lhs - rhs).abs());
        }
        worst
    }

    pub fn min_psi_minus_phi(&self) -> T {
        self.psi
            .iter()
            .zip(&self.phi)
            .fold(T::infinity(), |m, (&p, &f)| m.min(p - f))
    }

    pub fn sup_phi_minus_phi_one(&self) -> T {
        self.phi
            .iter()
            .zip(&self.phi_one_weight)
            .fold(T::zero(), |m, (&p, &q)| m.max((p - q).abs()))
    }

    /// Sup of `|phi'|` by centred differences.
    pub fn sup_grad_phi(&self) -> T {
        let two_h = lit::<T>(2.0) * self.step;
        self.phi
            .windows(3)
            .fold(T::zero(), |m, w| m.max(((w[2] - w[0]) / two_h).abs()))
    }
}
