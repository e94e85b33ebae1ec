//! Initial data.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use threewave::groundstate::solve_ground_state;
use threewave::propagator::rescale_to_e0;
use threewave::{FieldTriple64, GroundState64, Grid64, SystemParams64};

use crate::config::{GroundStateSpec, InitialKind, InitialSpec};
use crate::error::LabResult;

fn envelope(x: &[f64], amp: f64, width: f64) -> f64 {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    amp * (-r2 / width).exp()
}

/// `(e, i e, (0.5 + 0.3i) e)` with `e = amp · exp(−|x|²/width)`.
pub fn gaussian_triple(g: Grid64, amp: f64, width: f64) -> FieldTriple64 {
    FieldTriple64::from_fn(g, |x| {
        let e = envelope(x, amp, width);
        [
            Complex64::new(e, 0.0),
            Complex64::new(0.0, e),
            Complex64::new(0.5 * e, 0.3 * e),
        ]
    })
}

/// `(0, 0, g)`: solves the linear and the nonlinear system alike.
pub fn trivial_data(g: Grid64, amp: f64, width: f64) -> FieldTriple64 {
    FieldTriple64::from_fn(g, |x| {
        let z = Complex64::new(0.0, 0.0);
        [z, z, Complex64::new(envelope(x, amp, width), 0.0)]
    })
}

/// Sum of four Gaussian bumps per component with random complex weights
/// and centres within a quarter of the extent.
pub fn random_field(g: Grid64, amp: f64, width: f64, seed: u64) -> FieldTriple64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reach = 0.25 * g.extent();
    let dim = g.axes();
    let bumps: Vec<[(Complex64, Vec<f64>); 4]> = (0..3)
        .map(|_| {
            std::array::from_fn(|_| {
                let w = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * amp;
                let c = if g.is_radial() {
                    vec![0.0]
                } else {
                    (0..dim).map(|_| rng.gen_range(-reach..reach)).collect()
                };
                (w, c)
            })
        })
        .collect();
    FieldTriple64::from_fn(g, |x| {
        std::array::from_fn(|i| {
            bumps[i].iter().fold(Complex64::new(0.0, 0.0), |s, (w, c)| {
                let r2: f64 = x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
                s + w * (-r2 / width).exp()
            })
        })
    })
}

pub fn ground_state(p: &SystemParams64, g: &Grid64, spec: &GroundStateSpec) -> LabResult<GroundState64> {
    Ok(solve_ground_state(p, g, None, &spec.options())?)
}

/// Builds the configured data; `gs` is required for ground-state data.
pub fn initial_data(
    spec: &InitialSpec,
    g: Grid64,
    p: &SystemParams64,
    gs: Option<&GroundState64>,
    seed: u64,
) -> LabResult<FieldTriple64> {
    let u = match spec.kind {
        InitialKind::Gaussian => gaussian_triple(g, spec.amplitude, spec.width),
        InitialKind::Trivial => trivial_data(g, spec.amplitude, spec.width),
        InitialKind::Random => random_field(g, spec.amplitude, spec.width, seed),
        InitialKind::GroundState => {
            let q = gs.ok_or_else(|| {
                crate::error::LabError::Validation("ground-state data needs a ground state".into())
            })?;
            q.q.scaled(spec.scale)
        }
    };
    if spec.normalize {
        return Ok(rescale_to_e0(&u, p)?.u);
    }
    Ok(u)
}
