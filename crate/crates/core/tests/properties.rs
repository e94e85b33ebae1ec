use std::sync::OnceLock;

use num_complex::Complex64;
use proptest::prelude::*;
use threewave::functionals::{self, Functionals};
use threewave::groundstate::{sharp_constant, solve_ground_state, SolverOptions};
use threewave::morawetz::{build_cutoff, build_weights, select_xi, term_decomposition};
use threewave::propagator::{phase_boost, three_wave_ode, Propagator};
use threewave::{FieldTriple64, Grid64, GroundState64, Snapshot64, SystemParams64};

/// Three Gaussian bumps with complex amplitudes and linear phases.
#[derive(Debug, Clone)]
struct Bumps {
    amp: [(f64, f64); 3],
    centre: [f64; 3],
    width: [f64; 3],
    tilt: [f64; 3],
}

fn bumps() -> impl Strategy<Value = Bumps> {
    (
        prop::array::uniform3((-1.0..1.0f64, -1.0..1.0f64)),
        prop::array::uniform3(-1.0..1.0f64),
        prop::array::uniform3(0.5..2.0f64),
        prop::array::uniform3(-1.0..1.0f64),
    )
        .prop_map(|(amp, centre, width, tilt)| Bumps { amp, centre, width, tilt })
}

impl Bumps {
    fn field(&self, g: Grid64) -> FieldTriple64 {
        FieldTriple64::from_fn(g, |x| {
            std::array::from_fn(|i| {
                let r2: f64 = x.iter().enumerate().map(|(a, v)| (v - self.centre[i] * (a == 0) as u8 as f64).powi(2)).sum();
                let (re, im) = self.amp[i];
                Complex64::new(re, im) * (-r2 / self.width[i]).exp() * Complex64::from_polar(1.0, self.tilt[i] * x[0])
            })
        })
    }

    fn radial(&self, g: Grid64) -> FieldTriple64 {
        FieldTriple64::from_fn(g, |x| {
            std::array::from_fn(|i| {
                let (re, im) = self.amp[i];
                Complex64::new(re, im) * (-(x[0] - self.centre[i].abs()).powi(2) / self.width[i]).exp()
            })
        })
    }
}

fn kappa() -> impl Strategy<Value = SystemParams64> {
    prop::array::uniform3(0.3..3.0f64).prop_map(|k| SystemParams64::from_array(k).unwrap())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn ground_state() -> &'static GroundState64 {
    static GS: OnceLock<GroundState64> = OnceLock::new();
    GS.get_or_init(|| {
        let p = SystemParams64::new(1.0, 1.0, 2.0).unwrap();
        let g = Grid64::radial(20.0, 1024).unwrap();
        solve_ground_state(&p, &g, None, &SolverOptions::default()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn resonance_flag_matches_predicate(k in prop::array::uniform3(0.1..10.0f64)) {
        let p = SystemParams64::from_array(k).unwrap();
        let mismatch = (1.0 / k[0] + 1.0 / k[1] - 1.0 / k[2]).abs() * k[2];
        prop_assert_eq!(p.mass_resonant(), mismatch < 1e-12);
        let k3 = 1.0 / (1.0 / k[0] + 1.0 / k[1]);
        prop_assert!(SystemParams64::new(k[0], k[1], k3).unwrap().mass_resonant());
    }

    #[test]
    fn grid_layout(l in 0.5..20.0f64, log_n in 3u32..8, d in 1usize..4) {
        let n = 1usize << log_n;
        let g = Grid64::periodic(d, l, n).unwrap();
        prop_assert!(rel(g.spacing(), 2.0 * l / n as f64) < 1e-15);
        prop_assert_eq!(g.len(), n.pow(d as u32));
        let r = Grid64::radial(l, n).unwrap();
        for (j, x) in r.axis_nodes().iter().enumerate() {
            prop_assert!(rel(*x, (j as f64 + 0.5) * l / n as f64) < 1e-14);
        }
    }

    #[test]
    fn functional_signs_and_energy_split(b in bumps(), p in kappa()) {
        let g = Grid64::periodic(2, 6.0, 32).unwrap();
        let u = b.field(g);
        let c = functionals::conserved(&u, &p).unwrap();
        prop_assert!(c.mass >= 0.0 && c.kinetic >= 0.0);
        prop_assert_eq!(c.energy, c.kinetic - c.potential);
    }

    #[test]
    fn resonant_phase_rotation_keeps_functionals(b in bumps(), t1 in -3.0..3.0f64, t2 in -3.0..3.0f64, p in kappa()) {
        let g = Grid64::periodic(1, 6.0, 64).unwrap();
        let u = b.field(g);
        let mut v = u.clone();
        for (i, th) in [t1, t2, t1 + t2].into_iter().enumerate() {
            let rot = Complex64::from_polar(1.0, th);
            v.comp_mut(i).iter_mut().for_each(|z| *z *= rot);
        }
        let (a, c) = (functionals::conserved(&u, &p).unwrap(), functionals::conserved(&v, &p).unwrap());
        prop_assert!(rel(a.mass, c.mass) < 1e-12);
        prop_assert!(rel(a.kinetic, c.kinetic) < 1e-12);
        prop_assert!((a.potential - c.potential).abs() < 1e-12 * a.mass.max(1e-3));
    }

    #[test]
    fn weinstein_scale_invariance(b in bumps(), mu in 0.2..5.0f64, nu in 0.5..3.0f64) {
        // Sampling μ u(ν r) on the grid shrunk by ν reuses the same node values.
        let g = Grid64::radial(12.0, 256).unwrap();
        let gs = Grid64::radial(12.0 / nu, 256).unwrap();
        let u = b.radial(g);
        let mut v = FieldTriple64::zeros(gs);
        for i in 0..3 {
            for (a, z) in v.comp_mut(i).iter_mut().zip(u.comp(i)) {
                *a = z * mu;
            }
        }
        let p = SystemParams64::new(1.0, 2.0, 0.7).unwrap();
        let (Ok(a), Ok(c)) = (functionals::weinstein(&u, &p), functionals::weinstein(&v, &p)) else {
            return Ok(());
        };
        prop_assert!(rel(a.j2, c.j2) < 1e-6);
    }

    #[test]
    fn momentum_under_phase_boost(b in bumps(), xi in prop::array::uniform2(-0.8..0.8f64), p in kappa()) {
        let g = Grid64::periodic(2, 8.0, 64).unwrap();
        let u = b.field(g);
        let v = phase_boost(&u, &xi, &p).unwrap();
        let pu = functionals::momentum(&u, &p).unwrap();
        let pv = functionals::momentum(&v, &p).unwrap();
        let cell = g.spacing().powi(2);
        let shift: f64 = (0..3)
            .map(|i| u.comp(i).iter().map(|z| z.norm_sqr()).sum::<f64>() * cell / p.kappa_i(i))
            .sum();
        for a in 0..2 {
            prop_assert!((pv[a] - pu[a] - xi[a] * shift).abs() < 1e-8 * (1.0 + shift));
        }
        prop_assert!(rel(functionals::mass(&u), functionals::mass(&v)) < 1e-12);
    }

    #[test]
    fn manley_rowe_and_trivial_node(
        z in prop::array::uniform3((-1.0..1.0f64, -1.0..1.0f64)),
        dt in 1e-4..1e-2f64,
    ) {
        let u = z.map(|(a, b)| Complex64::new(a, b));
        let v = three_wave_ode(u, dt, 4);
        let mr = |u: &[Complex64; 3]| [u[0].norm_sqr() + u[2].norm_sqr(), u[1].norm_sqr() + u[2].norm_sqr()];
        let (a, c) = (mr(&u), mr(&v));
        prop_assert!((a[0] - c[0]).abs() < 1e-12 && (a[1] - c[1]).abs() < 1e-12);
        let w = [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), u[2]];
        prop_assert_eq!(three_wave_ode(w, dt, 4), w);
    }

    #[test]
    fn linear_flow_is_a_unitary_group(b in bumps(), s in -1.0..1.0f64, t in -1.0..1.0f64, p in kappa()) {
        let g = Grid64::periodic(1, 8.0, 64).unwrap();
        let prop = Propagator::new(&g, &p);
        let u = b.field(g);
        let a = prop.linear_flow(&prop.linear_flow(&u, s).unwrap(), t).unwrap();
        let c = prop.linear_flow(&u, s + t).unwrap();
        prop_assert!(functionals::mass(&a.sub(&c).unwrap()).sqrt() < 1e-12 * (1.0 + functionals::mass(&u).sqrt()));
        let f = Functionals::new(&g, p);
        prop_assert!(rel(f.h1_norm(&a).unwrap(), f.h1_norm(&u).unwrap()) < 1e-12);
    }

    #[test]
    fn snapshot_round_trip(b in bumps(), t in 0.0..10.0f64, p in kappa()) {
        let g = Grid64::periodic(2, 3.0, 8).unwrap();
        let s = Snapshot64::new(t, p, b.field(g));
        prop_assert_eq!(Snapshot64::from_bytes(&s.to_bytes()).unwrap(), s);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gagliardo_nirenberg_gap_is_nonnegative(b in bumps()) {
        let gs = ground_state();
        let g = *gs.q.grid();
        let f = Functionals::new(&g, gs.params);
        prop_assert!(f.gn_gap(&b.radial(g), sharp_constant(gs)).unwrap() >= -1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cutoff_shape(eps in 0.02..0.49f64, r in 0.0..2.0f64, dr in 0.0..0.5f64) {
        let c = build_cutoff(eps).unwrap();
        prop_assert_eq!(c.eval(0.0), 1.0);
        prop_assert!(c.eval(r + dr) <= c.eval(r) + 1e-15);
        if r > 1.0 {
            prop_assert_eq!(c.eval(r), 0.0);
        }
        if r <= 1.0 - eps {
            prop_assert_eq!(c.eval(r), 1.0);
        }
    }

    #[test]
    fn weight_calculus(eps in 0.1..0.5f64, radius in 0.8..2.0f64, d in 1usize..3) {
        let g = Grid64::periodic(d, 8.0, 32).unwrap();
        let w = build_weights(&build_cutoff(eps).unwrap(), radius, &g).unwrap();
        prop_assert!(w.min_psi_minus_phi() >= -1e-10);
        prop_assert!(w.laplacian_residual() < 1e-6);
        prop_assert!(w.sup_phi_minus_phi_one() <= 4.0 * eps);
    }

    #[test]
    fn coercive_terms_and_boost_invariance(b in bumps(), eta in -0.6..0.6f64, p in kappa()) {
        let g = Grid64::periodic(1, 8.0, 64).unwrap();
        let c = build_cutoff(0.25).unwrap();
        let w = build_weights(&c, 1.5, &g).unwrap();
        let u = b.field(g);
        let t = term_decomposition(&u, &c, &w, &p, 0.75).unwrap();
        prop_assert!(t.d_plus_f() >= -1e-10);
        prop_assert!(t.c_plus_e() >= -1e-10);
        let v = phase_boost(&u, &[eta], &p).unwrap();
        let tv = term_decomposition(&v, &c, &w, &p, 0.75).unwrap();
        prop_assert!((tv.c_plus_e() - t.c_plus_e()).abs() <= 1e-8 * t.c_plus_e().abs().max(1e-6));
    }

    #[test]
    fn real_fields_select_the_rest_frame(b in bumps(), s in -2.0..2.0f64, p in kappa()) {
        let g = Grid64::periodic(1, 8.0, 64).unwrap();
        let mut u = b.field(g);
        for i in 0..3 {
            u.comp_mut(i).iter_mut().for_each(|z| *z = Complex64::new(z.norm(), 0.0));
        }
        let xi = select_xi(&u, &[s], 1.5, &build_cutoff(0.25).unwrap(), &p).unwrap();
        prop_assert!(xi[0].abs() < 1e-12);
    }
}
