//! Phase boosts, Galilean transforms and the `M = E` normalization.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::{Field, FieldTriple};
use crate::functionals::Functionals;
use crate::grid::Grid;
use crate::ops::Spectral;
use crate::params::SystemParams;
use crate::scalar::{cis, czero, from_usize, lit, to_f64, Real};

/// Post-check tolerance of [`rescale_to_e0`].
pub const NORMALIZATION_TOL: f64 = 1e-8;

fn require_box<T: Real>(grid: &Grid<T>, what: &str) -> Result<()> {
    if !grid.is_box() {
        return Err(Error::Unsupported(format!("{what} needs a periodic box")));
    }
    Ok(())
}

fn check_xi<T: Real>(grid: &Grid<T>, xi: &[T]) -> Result<()> {
    if xi.len() != grid.dim() {
        return Err(Error::InvalidParams(format!(
            "boost has {} components, grid dimension is {}",
            xi.len(),
            grid.dim()
        )));
    }
    Ok(())
}

/// `u^ξ = (e^{ix·ξ/κ1} u1, e^{ix·ξ/κ2} u2, e^{ix·ξ/κ3} u3)`.
pub fn phase_boost<T: Real>(u: &FieldTriple<T>, xi: &[T], p: &SystemParams<T>) -> Result<FieldTriple<T>> {
    let g = u.grid();
    require_box(g, "phase boost")?;
    check_xi(g, xi)?;
    let coords = g.coordinates();
    let xdotxi: Vec<T> = (0..g.len())
        .map(|j| (0..g.dim()).fold(T::zero(), |s, a| s + coords[a][j] * xi[a]))
        .collect();
    let mut out = u.clone();
    for i in 0..3 {
        let k = p.kappa_i(i);
        for (v, &x) in out.comp_mut(i).iter_mut().zip(&xdotxi) {
            *v *= cis(x / k);
        }
    }
    Ok(out)
}

/// Component `i` becomes `e^{ix·ξ/κi} e^{−it|ξ|²/κi} ui(x − 2tξ)`; the
/// translation is a Fourier shift.
pub fn galilean_transform<T: Real>(
    u: &FieldTriple<T>,
    xi: &[T],
    t: T,
    p: &SystemParams<T>,
) -> Result<FieldTriple<T>> {
    let g = u.grid();
    require_box(g, "Galilean transform")?;
    check_xi(g, xi)?;
    let two_t = lit::<T>(2.0) * t;
    let shifted = if t == T::zero() {
        u.clone()
    } else {
        let sp = Spectral::new(g);
        let shift = |j: usize| {
            let ph = (0..g.dim()).fold(T::zero(), |s, a| s + sp.k(a)[j] * xi[a] * two_t);
            cis(-ph)
        };
        let [a, b, c] = [0, 1, 2].map(|i| sp.apply_multiplier(u.comp(i), shift));
        FieldTriple::new(*g, a, b, c)?
    };
    let xi2 = xi.iter().fold(T::zero(), |s, &v| s + v * v);
    let mut out = phase_boost(&shifted, xi, p)?;
    for i in 0..3 {
        let ph = cis(-t * xi2 / p.kappa_i(i));
        for v in out.comp_mut(i).iter_mut() {
            *v *= ph;
        }
    }
    Ok(out)
}

/// `λ = √(M/E)`.
pub fn normalization_lambda<T: Real>(mass: T, energy: T) -> Result<T> {
    if !(energy > T::zero()) {
        return Err(Error::CannotNormalize(to_f64(energy)));
    }
    Ok((mass / energy).sqrt())
}

#[derive(Debug, Clone)]
pub struct Rescaled<T: Real> {
    pub lambda: T,
    pub u: FieldTriple<T>,
}

/// `u_λ(x) = λ² u(λx)` with `M(u_λ) = E(u_λ)`.
///
/// Starts from `λ = √(M/E)`; if resampling error leaves `|M − E|/M` above
/// the tolerance, `λ` is refined by secant steps on the discrete functionals.
pub fn rescale_to_e0<T: Real>(u0: &FieldTriple<T>, p: &SystemParams<T>) -> Result<Rescaled<T>> {
    let f = Functionals::new(u0.grid(), *p);
    let m = f.mass(u0)?;
    let e = f.energy(u0)?;
    let lambda = normalization_lambda(m, e)?;
    let tol = lit::<T>(NORMALIZATION_TOL);
    let mismatch = |u: &FieldTriple<T>| -> Result<T> {
        let m = f.mass(u)?;
        Ok((m - f.energy(u)?) / m)
    };
    if ((m - e) / m).abs() < tol * lit(0.01) {
        return Ok(Rescaled {
            lambda: T::one(),
            u: u0.clone(),
        });
    }
    let mut l1 = lambda;
    let mut u1 = dilate(u0, l1)?;
    let mut g1 = mismatch(&u1)?;
    let mut l0 = T::one();
    let mut g0 = (m - e) / m;
    for _ in 0..12 {
        if g1.abs() < tol {
            return Ok(Rescaled { lambda: l1, u: u1 });
        }
        if g1 == g0 {
            break;
        }
        let l2 = l1 - g1 * (l1 - l0) / (g1 - g0);
        if !(l2 > T::zero()) {
            break;
        }
        l0 = l1;
        g0 = g1;
        l1 = l2;
        u1 = dilate(u0, l1)?;
        g1 = mismatch(&u1)?;
    }
    if g1.abs() < tol {
        return Ok(Rescaled { lambda: l1, u: u1 });
    }
    Err(Error::NormalizationCheck(to_f64(g1.abs())))
}

/// `λ² u(λx)` resampled onto the same grid.
pub fn dilate<T: Real>(u: &FieldTriple<T>, lambda: T) -> Result<FieldTriple<T>> {
    let g = u.grid();
    let l2 = lambda * lambda;
    let comps: [Field<T>; 3] = std::array::from_fn(|i| {
        let f = if g.is_box() {
            resample_box(u.comp(i), g, lambda)
        } else {
            resample_radial(u.comp(i), g, lambda)
        };
        f.into_iter().map(|v| v * l2).collect()
    });
    let [a, b, c] = comps;
    FieldTriple::new(*g, a, b, c)
}

/// Trigonometric interpolation weights for evaluating at `y` from the box
/// nodes; zero outside the box.
fn trig_weights<T: Real>(grid: &Grid<T>, y: T) -> Vec<T> {
    let n = grid.points();
    let l = grid.extent();
    if y < -l || y >= l {
        return vec![T::zero(); n];
    }
    let nodes = grid.axis_nodes();
    let base = T::PI() / l;
    let half = n / 2;
    let inv_n = from_usize::<T>(n).recip();
    nodes
        .iter()
        .map(|&x| {
            let d = y - x;
            // 1 + 2 Σ_{m<N/2} cos(m base d) + cos(N/2 base d)
            let mut s = T::one();
            for m in 1..half {
                s += lit::<T>(2.0) * (from_usize::<T>(m) * base * d).cos();
            }
            s += (from_usize::<T>(half) * base * d).cos();
            s * inv_n
        })
        .collect()
}

fn resample_box<T: Real>(f: &[Complex<T>], grid: &Grid<T>, lambda: T) -> Field<T> {
    let n = grid.points();
    let d = grid.dim();
    let nodes = grid.axis_nodes();
    let w: Vec<Vec<T>> = nodes.iter().map(|&x| trig_weights(grid, lambda * x)).collect();
    let mut cur = f.to_vec();
    let mut line = vec![czero::<T>(); n];
    for axis in 0..d {
        let stride = n.pow((d - 1 - axis) as u32);
        let block = stride * n;
        let mut next = vec![czero::<T>(); cur.len()];
        for start in (0..cur.len()).step_by(block) {
            for off in 0..stride {
                let base = start + off;
                for (m, v) in line.iter_mut().enumerate() {
                    *v = cur[base + m * stride];
                }
                for (j, wj) in w.iter().enumerate() {
                    let mut acc = czero::<T>();
                    for (m, &c) in wj.iter().enumerate() {
                        acc += line[m] * c;
                    }
                    next[base + j * stride] = acc;
                }
            }
        }
        cur = next;
    }
    cur
}

/// Six-point Lagrange interpolation with even reflection at the origin and
/// zero beyond `r_max`.
fn resample_radial<T: Real>(f: &[Complex<T>], grid: &Grid<T>, lambda: T) -> Field<T> {
    let n = grid.points() as isize;
    let h = grid.spacing();
    let sample = |idx: isize| -> Complex<T> {
        let j = if idx < 0 { -idx - 1 } else { idx };
        if j >= n {
            czero()
        } else {
            f[j as usize]
        }
    };
    grid.axis_nodes()
        .iter()
        .map(|&r| {
            let s = lambda * r / h - lit::<T>(0.5);
            if s > from_usize::<T>(n as usize + 3) {
                return czero();
            }
            let i0 = s.floor().to_isize().unwrap() - 2;
            let mut acc = czero::<T>();
            for a in 0..6isize {
                let xa = lit::<T>((i0 + a) as f64);
                let mut wgt = T::one();
                for b in 0..6isize {
                    if b != a {
                        let xb = lit::<T>((i0 + b) as f64);
                        wgt *= (s - xb) / (xa - xb);
                    }
                }
                acc += sample(i0 + a) * wgt;
            }
            acc
        })
        .collect()
}
