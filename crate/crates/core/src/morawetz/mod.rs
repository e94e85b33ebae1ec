//! Interaction Morawetz diagnostics on periodic boxes with `d ∈ {1, 2}`.
//!
//! With `A = Im Σ conj(u^i) ∇u^i`, `n = Σ |u^i|²/κ_i`, `N = κ̄ n` where
//! `κ̄ = κ1 κ2 κ3`, the functional is
//!
//! ```text
//! M(t) = 2 ∫∫ A(x) · ∇a(x - y) N(y) dx dy
//! ```
//!
//! and its time derivative splits into
//!
//! ```text
//! A = -∫∫ Δ(Σ κ_i |u^i|²)(x) Δa(x - y) N(y)
//! B = -2 ∫∫ Re Z(x) Δa(x - y) N(y),            Z = conj(u1 u2) u3
//! C = 4 ∫∫ L(x) φ(x - y) N(y),                  L = Σ κ_i |∇u^i|²
//! D = 4 ∫∫ R^{jk}(x) P_jk (ψ - φ)(x - y) N(y),  R^{jk} = Σ κ_i Re(∂_k u^i conj ∂_j u^i)
//! E = -4 κ̄ ∫∫ A(x) · A(y) φ(x - y)
//! F = -4 κ̄ ∫∫ A^j(x) P_jk (ψ - φ)(x - y) A^k(y)
//! K = -4 γ ∫∫ A(x) · ∇a(x - y) Im Z(y),         γ = κ2 κ3 + κ1 κ3 - κ1 κ2
//! ```
//!
//! `K` vanishes exactly under mass resonance. `B` regroups as `G + H + I`
//! through `(d-1)ψ + φ = d φ₁ + (d-1)(ψ - φ) + d (φ - φ₁)`, and `J` is `C + E`
//! evaluated cell by cell over a lattice of window centres `s`, each in the
//! Galilean frame that zeroes the windowed momentum.

mod conv;
mod cutoff;
mod weights;

use crate::error::{Error, Result};
use crate::field::FieldTriple;
use crate::functionals::mass;
use crate::grid::{ball_volume, Grid};
use crate::ops::Spectral;
use crate::params::SystemParams;
use crate::propagator::Trajectory;
use crate::scalar::{from_usize, lit, Real};

pub use conv::{KernelHat, LinearConv};
pub use cutoff::{build_cutoff, Cutoff, CUTOFF_SAMPLES};
pub use weights::{build_weights, MorawetzWeights};

/// Relative guard on the frame-selector denominator.
pub const XI_GUARD: f64 = 1e-14;
/// Window-centre stride in units of `R`.
pub const S_STRIDE: f64 = 0.5;
/// Log-uniform `R` nodes in the averaged estimate.
pub const R_NODES: usize = 16;

fn require_interaction_grid<T: Real>(g: &Grid<T>) -> Result<()> {
    if !g.is_box() || !(1..=2).contains(&g.dim()) {
        return Err(Error::Unsupported(
            "interaction Morawetz quantities need a box with d in {1, 2}".into(),
        ));
    }
    Ok(())
}

/// Pointwise densities entering every Morawetz quantity.
#[derive(Debug, Clone)]
pub struct Densities<T> {
    pub dim: usize,
    /// `Σ |u^i|²/κ_i`
    pub n: Vec<T>,
    /// `κ̄ n`
    pub big_n: Vec<T>,
    /// `A^j`
    pub momentum: Vec<Vec<T>>,
    /// `Σ κ_i |∇u^i|²`
    pub kinetic: Vec<T>,
    /// `R^{jk}` at `j * d + k`
    pub stress: Vec<Vec<T>>,
    /// `Δ(Σ κ_i |u^i|²)`
    pub lap_w: Vec<T>,
    pub re_z: Vec<T>,
    pub im_z: Vec<T>,
}

impl<T: Real> Densities<T> {
    pub fn new(u: &FieldTriple<T>, p: &SystemParams<T>) -> Result<Self> {
        let g = u.grid();
        require_interaction_grid(g)?;
        Ok(Self::with_spectral(u, p, &Spectral::new(g)))
    }

    pub fn with_spectral(u: &FieldTriple<T>, p: &SystemParams<T>, sp: &Spectral<T>) -> Self {
        let d = u.grid().dim();
        let len = u.len();
        let kbar = p.kappa_product();
        let two = lit::<T>(2.0);
        let mut out = Self {
            dim: d,
            n: vec![T::zero(); len],
            big_n: vec![T::zero(); len],
            momentum: vec![vec![T::zero(); len]; d],
            kinetic: vec![T::zero(); len],
            stress: vec![vec![T::zero(); len]; d * d],
            lap_w: vec![T::zero(); len],
            re_z: vec![T::zero(); len],
            im_z: vec![T::zero(); len],
        };
        for i in 0..3 {
            let k = p.kappa_i(i);
            let f = u.comp(i);
            let grad = sp.gradient(f);
            let lap = sp.laplacian(f, T::one());
            for x in 0..len {
                let v = f[x];
                out.n[x] += v.norm_sqr() / k;
                let mut g2 = T::zero();
                for j in 0..d {
                    out.momentum[j][x] += (v.conj() * grad[j][x]).im;
                    g2 += grad[j][x].norm_sqr();
                    for l in 0..d {
                        out.stress[j * d + l][x] += k * (grad[l][x] * grad[j][x].conj()).re;
                    }
                }
                out.kinetic[x] += k * g2;
                // Δ|u|² = 2 Re(conj(u) Δu) + 2 |∇u|²
                out.lap_w[x] += k * two * ((v.conj() * lap[x]).re + g2);
            }
        }
        let (a, b, c) = (u.comp(0), u.comp(1), u.comp(2));
        for x in 0..len {
            out.big_n[x] = kbar * out.n[x];
            let z = (a[x] * b[x]).conj() * c[x];
            out.re_z[x] = z.re;
            out.im_z[x] = z.im;
        }
        out
    }
}

/// `χ²((x - s)/R)` at every node.
fn window<T: Real>(coords: &[Vec<T>], s: &[T], radius: T, c: &Cutoff<T>) -> Vec<T> {
    let len = coords[0].len();
    (0..len)
        .map(|x| {
            let r2 = coords.iter().zip(s).fold(T::zero(), |acc, (ax, &sa)| {
                let dx = ax[x] - sa;
                acc + dx * dx
            });
            let chi = c.eval(r2.sqrt() / radius);
            chi * chi
        })
        .collect()
}

fn weighted<T: Real>(f: &[T], w: &[T], cell: T) -> T {
    f.iter().zip(w).fold(T::zero(), |s, (&a, &b)| s + a * b) * cell
}

fn xi_from_windowed<T: Real>(mom: &[T], n_w: T, big_n_w: T, total_mass: T) -> Vec<T> {
    if !(big_n_w >= lit::<T>(XI_GUARD) * total_mass) || n_w == T::zero() {
        return vec![T::zero(); mom.len()];
    }
    mom.iter().map(|&m| -m / n_w).collect()
}

/// Galilean frame in which the `χ²`-windowed momentum around `s` vanishes.
///
/// `ξ = -κ̄ ∫ A χ² / ∫ N χ²`, or zero when `∫ N χ²` is below
/// `XI_GUARD` times the global mass.
pub fn select_xi<T: Real>(
    u: &FieldTriple<T>,
    s: &[T],
    radius: T,
    c: &Cutoff<T>,
    p: &SystemParams<T>,
) -> Result<Vec<T>> {
    let dens = Densities::new(u, p)?;
    let g = u.grid();
    if s.len() != g.dim() {
        return Err(Error::InvalidParams("window centre has wrong dimension".into()));
    }
    let cell = g.spacing().powi(g.dim() as i32);
    let w = window(&g.coordinates(), s, radius, c);
    let mom: Vec<T> = dens.momentum.iter().map(|a| weighted(a, &w, cell)).collect();
    let n_w = weighted(&dens.n, &w, cell);
    let big_n_w = weighted(&dens.big_n, &w, cell);
    Ok(xi_from_windowed(&mom, n_w, big_n_w, mass(u)))
}

/// Kernels sampled on the lattice of grid offsets.
struct Kernels<T: Real> {
    conv: LinearConv<T>,
    lap_a: KernelHat<T>,
    phi: KernelHat<T>,
    phi_one: KernelHat<T>,
    psi_minus_phi: KernelHat<T>,
    phi_minus_phi_one: KernelHat<T>,
    /// `P_jk (ψ - φ)` at `j * d + k`
    proj: Vec<KernelHat<T>>,
    /// `∂_j a = z_j ψ(|z|)`
    grad_a: Vec<KernelHat<T>>,
}

fn norm<T: Real>(z: &[T]) -> T {
    z.iter().fold(T::zero(), |s, &v| s + v * v).sqrt()
}

impl<T: Real> Kernels<T> {
    fn new(g: &Grid<T>, w: &MorawetzWeights<T>) -> Self {
        let conv = LinearConv::new(g);
        let d = g.dim();
        let proj = (0..d * d)
            .map(|jk| {
                let (j, k) = (jk / d, jk % d);
                conv.kernel(|z| {
                    let r = norm(z);
                    if r == T::zero() {
                        return T::zero();
                    }
                    let delta = if j == k { T::one() } else { T::zero() };
                    (delta - z[j] * z[k] / (r * r)) * (w.psi_at(r) - w.phi_at(r))
                })
            })
            .collect();
        let grad_a = (0..d)
            .map(|j| conv.kernel(|z| z[j] * w.psi_at(norm(z))))
            .collect();
        Self {
            lap_a: conv.kernel(|z| w.lap_a_at(norm(z))),
            phi: conv.kernel(|z| w.phi_at(norm(z))),
            phi_one: conv.kernel(|z| w.phi_one_at(norm(z))),
            psi_minus_phi: conv.kernel(|z| {
                let r = norm(z);
                w.psi_at(r) - w.phi_at(r)
            }),
            phi_minus_phi_one: conv.kernel(|z| {
                let r = norm(z);
                w.phi_at(r) - w.phi_one_at(r)
            }),
            proj,
            grad_a,
            conv,
        }
    }
}

fn check_weights<T: Real>(g: &Grid<T>, w: &MorawetzWeights<T>) -> Result<()> {
    require_interaction_grid(g)?;
    if w.dim != g.dim() {
        return Err(Error::GridMismatch(format!(
            "weights built for d = {}, field has d = {}",
            w.dim,
            g.dim()
        )));
    }
    Ok(())
}

fn functional_from<T: Real>(dens: &Densities<T>, k: &Kernels<T>) -> T {
    let two = lit::<T>(2.0);
    (0..dens.dim).fold(T::zero(), |s, j| {
        s + two * k.conv.pair(&dens.momentum[j], &k.grad_a[j], &dens.big_n)
    })
}

/// `M(t) = 2 ∫∫ A(x) · ∇a(x - y) N(y) dx dy`.
pub fn morawetz_functional<T: Real>(
    u: &FieldTriple<T>,
    w: &MorawetzWeights<T>,
    p: &SystemParams<T>,
) -> Result<T> {
    let g = u.grid();
    check_weights(g, w)?;
    let dens = Densities::new(u, p)?;
    Ok(functional_from(&dens, &Kernels::new(g, w)))
}

/// One window centre of the `s`-lattice.
#[derive(Debug, Clone)]
pub struct FrameCell<T> {
    pub s: Vec<T>,
    /// Trapezoid weight of the lattice point.
    pub weight: T,
    pub xi: Vec<T>,
    /// `∫ N χ²`
    pub windowed_n: T,
    /// `∫ L^ξ χ²` with `L^ξ = Σ κ_i |∇u^{i,ξ}|²`
    pub windowed_kinetic: T,
    /// `K(χ_R u^ξ)`
    pub ball_kinetic: T,
    /// `V(χ_R u)`
    pub ball_potential: T,
}

impl<T: Real> FrameCell<T> {
    /// `(4K - dV)/K` on the ball.
    pub fn coercivity(&self, d: usize) -> T {
        (lit::<T>(4.0) * self.ball_kinetic - from_usize::<T>(d) * self.ball_potential) / self.ball_kinetic
    }
}

/// Lattice of window centres covering `[-L, L]^d` with stride close to
/// `stride`, with trapezoid weights.
pub fn s_lattice<T: Real>(g: &Grid<T>, stride: T) -> Vec<(Vec<T>, T)> {
    let l = g.extent();
    let d = g.dim();
    let k = (lit::<T>(2.0) * l / stride).ceil().to_usize().unwrap().max(1);
    let h = lit::<T>(2.0) * l / from_usize::<T>(k);
    let pts = k + 1;
    let half = lit::<T>(0.5);
    (0..pts.pow(d as u32))
        .map(|flat| {
            let mut rest = flat;
            let mut s = vec![T::zero(); d];
            let mut w = h.powi(d as i32);
            for a in (0..d).rev() {
                let i = rest % pts;
                rest /= pts;
                s[a] = -l + from_usize::<T>(i) * h;
                if i == 0 || i == k {
                    w *= half;
                }
            }
            (s, w)
        })
        .collect()
}

struct CellContext<'a, T: Real> {
    u: &'a FieldTriple<T>,
    dens: &'a Densities<T>,
    grad: [Vec<crate::field::Field<T>>; 3],
    coords: Vec<Vec<T>>,
    params: SystemParams<T>,
    cell: T,
    total_mass: T,
}

impl<'a, T: Real> CellContext<'a, T> {
    fn new(u: &'a FieldTriple<T>, dens: &'a Densities<T>, sp: &Spectral<T>, p: &SystemParams<T>) -> Self {
        let g = u.grid();
        Self {
            u,
            dens,
            grad: std::array::from_fn(|i| sp.gradient(u.comp(i))),
            coords: g.coordinates(),
            params: *p,
            cell: g.spacing().powi(g.dim() as i32),
            total_mass: mass(u),
        }
    }

    fn cell(&self, s: Vec<T>, weight: T, radius: T, c: &Cutoff<T>) -> FrameCell<T> {
        let d = self.dens.dim;
        let len = self.u.len();
        let mut chi = vec![T::zero(); len];
        let mut dchi = vec![vec![T::zero(); len]; d];
        for x in 0..len {
            let mut r2 = T::zero();
            for a in 0..d {
                let dx = self.coords[a][x] - s[a];
                r2 += dx * dx;
            }
            let r = r2.sqrt();
            chi[x] = c.eval(r / radius);
            if r > T::zero() {
                let dr = c.derivative(r / radius) / radius;
                for a in 0..d {
                    dchi[a][x] = dr * (self.coords[a][x] - s[a]) / r;
                }
            }
        }
        let w2: Vec<T> = chi.iter().map(|&v| v * v).collect();
        let mom: Vec<T> = self.dens.momentum.iter().map(|a| weighted(a, &w2, self.cell)).collect();
        let n_w = weighted(&self.dens.n, &w2, self.cell);
        let big_n_w = weighted(&self.dens.big_n, &w2, self.cell);
        let xi = xi_from_windowed(&mom, n_w, big_n_w, self.total_mass);
        let xi2 = xi.iter().fold(T::zero(), |s, &v| s + v * v);
        // [L^ξ] = [L] + 2 ξ·[A] + |ξ|² [n]
        let two = lit::<T>(2.0);
        let windowed_kinetic = weighted(&self.dens.kinetic, &w2, self.cell)
            + two * xi.iter().zip(&mom).fold(T::zero(), |s, (&a, &b)| s + a * b)
            + xi2 * n_w;
        // K(χ u^ξ) = Σ κ_i/2 ∫ |∇χ u + χ (∇u + i ξ/κ_i u)|²
        let mut ball_kinetic = T::zero();
        for i in 0..3 {
            let k = self.params.kappa_i(i);
            let f = self.u.comp(i);
            let mut acc = T::zero();
            for x in 0..len {
                for a in 0..d {
                    let v = f[x] * dchi[a][x]
                        + (self.grad[i][a][x] + f[x] * num_complex::Complex::new(T::zero(), xi[a] / k)) * chi[x];
                    acc += v.norm_sqr();
                }
            }
            ball_kinetic += k * lit::<T>(0.5) * acc * self.cell;
        }
        let ball_potential = self
            .dens
            .re_z
            .iter()
            .zip(&chi)
            .fold(T::zero(), |s, (&z, &c)| s + z * c * c * c)
            * self.cell;
        FrameCell {
            s,
            weight,
            xi,
            windowed_n: big_n_w,
            windowed_kinetic,
            ball_kinetic,
            ball_potential,
        }
    }
}

/// Window cells over the `s`-lattice at scale `R`.
pub fn frame_cells<T: Real>(
    u: &FieldTriple<T>,
    radius: T,
    c: &Cutoff<T>,
    p: &SystemParams<T>,
    stride: T,
) -> Result<Vec<FrameCell<T>>> {
    let g = u.grid();
    require_interaction_grid(g)?;
    let sp = Spectral::new(g);
    let dens = Densities::with_spectral(u, p, &sp);
    let ctx = CellContext::new(u, &dens, &sp, p);
    Ok(s_lattice(g, stride)
        .into_iter()
        .map(|(s, w)| ctx.cell(s, w, radius, c))
        .collect())
}

/// Labelled pieces of `dM/dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermDecomposition<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
    pub e: T,
    pub f: T,
    /// Non-resonant remainder; zero under mass resonance.
    pub k: T,
    pub g: T,
    pub h: T,
    pub i: T,
    /// `C + E` over the `s`-lattice in the selected frames.
    pub j: T,
}

impl<T: Real> TermDecomposition<T> {
    pub fn sum_a_to_f(&self) -> T {
        self.a + self.b + self.c + self.d + self.e + self.f
    }

    /// `dM/dt`: all six terms plus the non-resonant remainder.
    pub fn dm_dt(&self) -> T {
        self.sum_a_to_f() + self.k
    }

    pub fn c_plus_e(&self) -> T {
        self.c + self.e
    }

    pub fn d_plus_f(&self) -> T {
        self.d + self.f
    }

    /// `A + G + H + I + J`, the lower bound once `D + F ≥ 0` is dropped.
    pub fn regrouped(&self) -> T {
        self.a + self.g + self.h + self.i + self.j
    }
}

fn terms_from<T: Real>(
    dens: &Densities<T>,
    k: &Kernels<T>,
    p: &SystemParams<T>,
    j_term: T,
) -> TermDecomposition<T> {
    let d = dens.dim;
    let cv = &k.conv;
    let kbar = p.kappa_product();
    let [k1, k2, k3] = p.kappa();
    let gamma = k2 * k3 + k1 * k3 - k1 * k2;
    let two = lit::<T>(2.0);
    let four = lit::<T>(4.0);
    let df = from_usize::<T>(d);

    let lap_a_n = cv.apply(&k.lap_a, &dens.big_n);
    let dot = |f: &[T], g: &[T]| f.iter().zip(g).fold(T::zero(), |s, (&a, &b)| s + a * b) * cv.cell();
    let a = -dot(&dens.lap_w, &lap_a_n);
    let b = -two * dot(&dens.re_z, &lap_a_n);
    let c = four * cv.pair(&dens.kinetic, &k.phi, &dens.big_n);
    let mut dd = T::zero();
    let mut f = T::zero();
    for jk in 0..d * d {
        let (j, l) = (jk / d, jk % d);
        dd += cv.pair(&dens.stress[jk], &k.proj[jk], &dens.big_n);
        f += cv.pair(&dens.momentum[j], &k.proj[jk], &dens.momentum[l]);
    }
    let mut e = T::zero();
    let mut kk = T::zero();
    for j in 0..d {
        e += cv.pair(&dens.momentum[j], &k.phi, &dens.momentum[j]);
        kk += cv.pair(&dens.momentum[j], &k.grad_a[j], &dens.im_z);
    }
    TermDecomposition {
        a,
        b,
        c,
        d: four * dd,
        e: -four * kbar * e,
        f: -four * kbar * f,
        k: -four * gamma * kk,
        g: -two * df * cv.pair(&dens.re_z, &k.phi_one, &dens.big_n),
        h: -two * (df - T::one()) * cv.pair(&dens.re_z, &k.psi_minus_phi, &dens.big_n),
        i: -two * df * cv.pair(&dens.re_z, &k.phi_minus_phi_one, &dens.big_n),
        j: j_term,
    }
}

fn j_from_cells<T: Real>(cells: &[FrameCell<T>], radius: T, d: usize) -> T {
    let norm = lit::<T>(4.0) / (ball_volume::<T>(d) * radius.powi(d as i32));
    cells
        .iter()
        .fold(T::zero(), |s, c| s + c.weight * c.windowed_kinetic * c.windowed_n)
        * norm
}

/// Every labelled term at one time; `J` uses window centres of stride
/// `s_stride`.
pub fn term_decomposition<T: Real>(
    u: &FieldTriple<T>,
    c: &Cutoff<T>,
    w: &MorawetzWeights<T>,
    p: &SystemParams<T>,
    s_stride: T,
) -> Result<TermDecomposition<T>> {
    let g = u.grid();
    check_weights(g, w)?;
    let sp = Spectral::new(g);
    let dens = Densities::with_spectral(u, p, &sp);
    let ctx = CellContext::new(u, &dens, &sp, p);
    let cells: Vec<FrameCell<T>> = s_lattice(g, s_stride)
        .into_iter()
        .map(|(s, wt)| ctx.cell(s, wt, w.radius, c))
        .collect();
    let j = j_from_cells(&cells, w.radius, g.dim());
    Ok(terms_from(&dens, &Kernels::new(g, w), p, j))
}

/// Functional and terms at every snapshot of a trajectory for one `R`,
/// reusing the kernels.
pub fn morawetz_series<T: Real>(
    traj: &Trajectory<T>,
    c: &Cutoff<T>,
    w: &MorawetzWeights<T>,
    s_stride: T,
) -> Result<Vec<(T, T, TermDecomposition<T>)>> {
    if traj.is_empty() {
        return Err(Error::SpanTooShort("empty trajectory".into()));
    }
    let g = traj.grid();
    check_weights(g, w)?;
    let p = traj.params;
    let sp = Spectral::new(g);
    let kernels = Kernels::new(g, w);
    traj.snapshots
        .iter()
        .map(|snap| {
            let u = &snap.fields;
            let dens = Densities::with_spectral(u, &p, &sp);
            let ctx = CellContext::new(u, &dens, &sp, &p);
            let cells: Vec<FrameCell<T>> = s_lattice(g, s_stride)
                .into_iter()
                .map(|(s, wt)| ctx.cell(s, wt, w.radius, c))
                .collect();
            let j = j_from_cells(&cells, w.radius, g.dim());
            let m = functional_from(&dens, &kernels);
            Ok((snap.time, m, terms_from(&dens, &kernels, &p, j)))
        })
        .collect()
}

/// One `(t, s, R)` row of the averaged estimate.
#[derive(Debug, Clone)]
pub struct CellRow<T> {
    pub t: T,
    pub s_index: usize,
    pub radius: T,
    pub xi: Vec<T>,
    /// `R^{-d} w_s ∫L^ξχ² ∫Nχ²`
    pub contribution: T,
    pub coercivity: Option<T>,
}

#[derive(Debug, Clone)]
pub struct MorawetzReport<T> {
    pub r0: T,
    pub log_count_j: u32,
    pub t0: T,
    pub eps: T,
    pub radii: Vec<T>,
    /// Measured `δ′`: the smallest `(4K - dV)/K` over populated cells.
    pub delta: T,
    pub e0: T,
    /// `R₀ e^J / (J T₀) + ε`
    pub nu: T,
    pub lhs: T,
    /// `lhs / (ν E₀²)`
    pub ratio: T,
    pub cells: Vec<CellRow<T>>,
}

/// Cells whose ball kinetic energy is below this fraction of the largest
/// one are left out of the `δ′` minimum.
pub const COERCIVITY_FLOOR: f64 = 1e-6;

/// Time- and log-`R`-averaged left side of the interaction Morawetz
/// inequality over `t ∈ [t_first, t_first + T₀]`, `R ∈ [R₀, R₀ e^J]`.
pub fn averaged_estimate<T: Real>(
    traj: &Trajectory<T>,
    r0: T,
    log_count_j: u32,
    t0: T,
    eps: T,
    p: &SystemParams<T>,
) -> Result<MorawetzReport<T>> {
    if traj.len() < 2 {
        return Err(Error::SpanTooShort("need at least two snapshots".into()));
    }
    let span = traj.span();
    if !(t0 > T::zero()) || t0 > span * (T::one() + lit(1e-9)) {
        return Err(Error::SpanTooShort(format!(
            "T0 = {} but the trajectory spans {}",
            t0, span
        )));
    }
    if log_count_j == 0 || !(r0 > T::zero()) {
        return Err(Error::InvalidParams("need J >= 1 and R0 > 0".into()));
    }
    let g = traj.grid();
    require_interaction_grid(g)?;
    let c = build_cutoff(eps)?;
    let d = g.dim();
    let jf = from_usize::<T>(log_count_j as usize);
    let nodes = from_usize::<T>(R_NODES);
    let radii: Vec<T> = (0..R_NODES)
        .map(|k| r0 * (jf * (from_usize::<T>(k) + lit(0.5)) / nodes).exp())
        .collect();
    let dlog = jf / nodes;

    let t_start = traj.snapshots[0].time;
    let t_end = t_start + t0;
    let tol = span * lit(1e-9);
    let snaps: Vec<_> = traj.snapshots.iter().filter(|s| s.time <= t_end + tol).collect();
    if snaps.len() < 2 {
        return Err(Error::SpanTooShort("T0 covers fewer than two snapshots".into()));
    }
    let sp = Spectral::new(g);
    let half = lit::<T>(0.5);
    let mut rows = Vec::new();
    let mut integral = T::zero();
    let mut delta = T::infinity();
    for (n, snap) in snaps.iter().enumerate() {
        let wt = {
            let left = if n > 0 { snap.time - snaps[n - 1].time } else { T::zero() };
            let right = if n + 1 < snaps.len() { snaps[n + 1].time - snap.time } else { T::zero() };
            (left + right) * half
        };
        let u = &snap.fields;
        let dens = Densities::with_spectral(u, p, &sp);
        let ctx = CellContext::new(u, &dens, &sp, p);
        for &radius in &radii {
            let cells: Vec<FrameCell<T>> = s_lattice(g, radius * lit(S_STRIDE))
                .into_iter()
                .map(|(s, w)| ctx.cell(s, w, radius, &c))
                .collect();
            let kmax = cells.iter().fold(T::zero(), |m, c| m.max(c.ball_kinetic));
            let scale = radius.powi(-(d as i32));
            let mut sum = T::zero();
            for (idx, cell) in cells.into_iter().enumerate() {
                let contribution = scale * cell.weight * cell.windowed_kinetic * cell.windowed_n;
                sum += contribution;
                let coercivity = if kmax > T::zero() && cell.ball_kinetic > lit::<T>(COERCIVITY_FLOOR) * kmax {
                    let q = cell.coercivity(d);
                    delta = delta.min(q);
                    Some(q)
                } else {
                    None
                };
                rows.push(CellRow {
                    t: snap.time,
                    s_index: idx,
                    radius,
                    xi: cell.xi,
                    contribution,
                    coercivity,
                });
            }
            integral += wt * dlog * sum;
        }
    }
    if !delta.is_finite() {
        delta = T::zero();
    }
    let e0 = crate::functionals::energy(&snaps[0].fields, p)?;
    let lhs = delta / (jf * t0) * integral;
    let nu = r0 * jf.exp() / (jf * t0) + eps;
    let ratio = if e0 == T::zero() { T::zero() } else { lhs / (nu * e0 * e0) };
    Ok(MorawetzReport {
        r0,
        log_count_j,
        t0,
        eps,
        radii,
        delta,
        e0,
        nu,
        lhs,
        ratio,
        cells: rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagator::phase_boost;
    use num_complex::Complex64;

    fn field(g: Grid<f64>) -> FieldTriple<f64> {
        FieldTriple::from_fn(g, |x: &[f64]| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            let e = (-r2 / 1.5).exp();
            let e3 = (-(r2 - 1.6 * x[0] + 0.64) / 1.5).exp();
            [
                Complex64::from_polar(0.6 * e, 0.4 * x[0]),
                Complex64::from_polar(0.5 * e, -0.3 * x[0]),
                Complex64::new(0.3 * e3, 0.2 * e3 * x[0]),
            ]
        })
    }

    #[test]
    fn real_field_has_zero_frame_and_functional() {
        let g = Grid::periodic(2, 8.0, 32).unwrap();
        let u = FieldTriple::from_fn(g, |x: &[f64]| {
            let e = (-(x[0] * x[0] + x[1] * x[1])).exp();
            [Complex64::new(e, 0.0); 3]
        });
        let p = SystemParams::new(1.0, 1.0, 0.5).unwrap();
        let c = build_cutoff(0.2).unwrap();
        assert!(select_xi(&u, &[0.5, 0.0], 1.5, &c, &p).unwrap().iter().all(|v| v.abs() < 1e-12));
        let w = build_weights(&c, 1.5, &g).unwrap();
        assert!(morawetz_functional(&u, &w, &p).unwrap().abs() < 1e-12);
    }

    #[test]
    fn guard_returns_zero_far_from_data() {
        let g = Grid::periodic(1, 20.0, 128).unwrap();
        let u = field(g);
        let p = SystemParams::new(1.0, 1.0, 0.5).unwrap();
        let c = build_cutoff(0.2).unwrap();
        assert_eq!(select_xi(&u, &[18.0], 1.0, &c, &p).unwrap(), vec![0.0]);
    }

    #[test]
    fn conjugation_flips_functional() {
        let g = Grid::periodic(1, 8.0, 64).unwrap();
        let u = field(g);
        let p = SystemParams::new(1.0, 1.0, 0.5).unwrap();
        let c = build_cutoff(0.2).unwrap();
        let w = build_weights(&c, 1.5, &g).unwrap();
        let m = morawetz_functional(&u, &w, &p).unwrap();
        let mc = morawetz_functional(&u.conj(), &w, &p).unwrap();
        assert!(m.abs() > 1e-6);
        assert!((m + mc).abs() < 1e-12 * m.abs());
    }

    #[test]
    fn boosted_window_momentum_vanishes() {
        let g = Grid::periodic(1, 8.0, 64).unwrap();
        let u = field(g);
        let p = SystemParams::new(1.0, 1.0, 0.5).unwrap();
        let c = build_cutoff(0.2).unwrap();
        let s = [0.3];
        let xi = select_xi(&u, &s, 1.5, &c, &p).unwrap();
        let v = phase_boost(&u, &xi, &p).unwrap();
        let mom = |u: &FieldTriple<f64>| {
            let dens = Densities::new(u, &p).unwrap();
            let w = window(&g.coordinates(), &s, 1.5, &c);
            weighted(&dens.momentum[0], &w, g.spacing())
        };
        assert!(mom(&u).abs() > 1e-3);
        assert!(mom(&v).abs() < 1e-10 * (mom(&u).abs() + 1e-3));
    }

    #[test]
    fn d_plus_f_nonnegative_and_k_vanishes_under_resonance() {
        let g = Grid::periodic(2, 8.0, 16).unwrap();
        let u = field(g);
        let p = SystemParams::new(1.0, 1.0, 0.5).unwrap();
        let c = build_cutoff(0.25).unwrap();
        let w = build_weights(&c, 2.0, &g).unwrap();
        let t = term_decomposition(&u, &c, &w, &p, 1.0).unwrap();
        assert!(t.d_plus_f() >= -1e-10);
        assert!(t.k.abs() < 1e-12);
        assert!((t.g + t.h + t.i - t.b).abs() < 1e-9 * t.b.abs().max(1e-12));
    }

    #[test]
    fn s_lattice_weights_sum_to_box_volume() {
        let g = Grid::periodic(2, 3.0, 8).unwrap();
        let total: f64 = s_lattice(&g, 0.7).iter().map(|(_, w)| w).sum();
        assert!((total - 36.0).abs() < 1e-12);
    }
}
