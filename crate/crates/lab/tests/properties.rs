use proptest::prelude::*;
use threewave::propagator::{EvolveConfig, Propagator};
use threewave::{FieldTriple64, Grid64, SystemParams64};
use threewave_lab::experiments::criterion_scan;
use threewave_lab::RunConfig;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn config_round_trips_through_toml(
        kappa in prop::array::uniform3(0.1..5.0f64),
        dt in 1e-5..1e-2f64,
        points in prop::sample::select(vec![16usize, 32, 64, 128]),
        seed in 0..=i64::MAX as u64,
        eps in 0.02..0.49f64,
    ) {
        let mut c = RunConfig::default();
        c.params.kappa = kappa;
        c.evolve.dt = dt;
        c.grid.points = points;
        c.seed = Some(seed);
        c.morawetz.eps = eps;
        let text = toml::to_string(&c).unwrap();
        prop_assert_eq!(text.parse::<RunConfig>().unwrap(), c);
    }

    #[test]
    fn window_length_is_eps_to_minus_quarter(eps in 1e-4..0.9f64) {
        let p = SystemParams64::new(1.0, 1.0, 0.5).unwrap();
        let g = Grid64::periodic(1, 4.0, 16).unwrap();
        let l = eps.powf(-0.25);
        let traj = Propagator::new(&g, &p)
            .evolve(&FieldTriple64::zeros(g), &EvolveConfig::new(0.125, (2.0 * l + 1.0).ceil(), 2))
            .unwrap();
        let rep = criterion_scan(&traj, eps, 0.5, &p).unwrap();
        prop_assert_eq!(rep.l, l);
    }
}
