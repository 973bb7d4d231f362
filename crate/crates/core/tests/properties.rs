use pilot_brownian::bath::{discretize_ohmic, integrate_full_microscopic, BathState, CoherentSample, CutoffShape};
use pilot_brownian::coherent::CoherentState;
use pilot_brownian::kostin::{evolve_kostin, Drive, KostinState};
use pilot_brownian::langevin::{integrate_gle, GleConfig, MemoryMethod};
use pilot_brownian::potential::PotentialSpec;
use pilot_brownian::relax::{evolve_fp_osmotic, evolve_fp_paired, h_functional, Boundary, FieldGrid, Velocity};
use pilot_brownian::rng::stream;
use pilot_brownian::thermal::{Occupation, ThermalSampler};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

fn gaussian(c: f64, s: f64) -> impl Fn(f64) -> f64 {
    move |x| (-(x - c) * (x - c) / (2.0 * s * s)).exp()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn relaxation_conserves_mass_and_lowers_h(
        c in -2.0f64..2.0, s in 0.3f64..1.5, v in -1.0f64..1.0,
        periodic in any::<bool>(), paired in any::<bool>()
    ) {
        // A uniform drift into a reflecting wall compresses |psi|^2 without bound.
        let (boundary, v) = if periodic { (Boundary::Periodic, v) } else { (Boundary::Reflecting, 0.0) };
        let grid = FieldGrid::new(
            -5.0, 5.0, 128, boundary, 0.5,
            Velocity::Uniform { v }, gaussian(c, s), gaussian(0.0, 1.5),
        ).unwrap();
        let dt = grid.stable_dt();
        let mass0 = grid.integrate(&grid.rho);
        let mut g = grid;
        let mut h = h_functional(&g);
        for _ in 0..40 {
            g = if paired { evolve_fp_paired(&g, dt, 5) } else { evolve_fp_osmotic(&g, dt, 5) }.unwrap();
            let next = h_functional(&g);
            prop_assert!(next <= h + 1e-10, "H rose from {h} to {next}");
            h = next;
        }
        prop_assert!((g.integrate(&g.rho) - mass0).abs() <= 1e-10 * mass0);
    }

    #[test]
    fn kostin_conserves_norm_and_damps_energy(
        x0 in -2.5f64..2.5, v0 in -1.0f64..1.0, gamma0 in 0.0f64..0.5
    ) {
        let packet = CoherentState::from_center(1.0, 1.0, x0, v0, 0.0, 0.0).unwrap();
        let state = KostinState::coherent(
            -12.0, 12.0, 256, &packet, gamma0, PotentialSpec::Harmonic { k: 1.0 }, Drive::None,
        ).unwrap();
        let later = evolve_kostin(&state, 2e-3, 1500).unwrap();
        prop_assert!((later.norm() - 1.0).abs() < 1e-10);
        prop_assert!(later.energy() <= state.energy() + 1e-6);
    }

    #[test]
    fn sampled_baths_are_reproducible(seed in any::<u64>(), realization in 0u64..1000) {
        let spec = discretize_ohmic(1.0, 2.0, 50, CutoffShape::Sharp, 2.0).unwrap();
        let sampler = ThermalSampler::new(3.0, seed, 1).unwrap().with_occupation(Occupation::Bose);
        let a = sampler.sample_bath(&mut stream(seed, realization), &spec, 0.0);
        let b = sampler.sample_bath(&mut stream(seed, realization), &spec, 0.0);
        prop_assert_eq!(a, b);
    }
}

#[test]
fn gle_matches_the_full_microscopic_model() {
    let spec = discretize_ohmic(0.5, 2.0, 80, CutoffShape::Lorentzian, 10.0).unwrap();
    let n = spec.n_modes();
    let potential = PotentialSpec::Harmonic { k: 1.0 };
    let mut rng = stream(5, 0);
    let mut normal = || -> f64 { rng.sample(StandardNormal) };
    let bath = BathState {
        positions: (0..n)
            .map(|i| normal() / (spec.mode_mass[i].sqrt() * spec.mode_freq[i]))
            .collect(),
        velocities: (0..n).map(|i| normal() / spec.mode_mass[i].sqrt()).collect(),
    };
    let sample = CoherentSample::from_classical(&spec, &bath.positions, &bath.velocities, 0.0).unwrap();
    let dt = 0.005;
    let cfg = GleConfig {
        potential: potential.clone(),
        x0: 0.7,
        v0: -0.2,
        t_end: 10.0,
        dt,
        memory: MemoryMethod::History,
        ..GleConfig::default()
    };
    let gle = integrate_gle(&spec, &sample, &cfg).unwrap();
    let micro = integrate_full_microscopic(&spec, &potential, 0.7, -0.2, &bath, 0.0, 10.0, dt).unwrap();
    for i in 1..gle.len() {
        let dev = (gle.positions[i] - micro.positions[i]).abs();
        assert!(
            dev <= 10.0 * dt * dt * gle.times[i],
            "deviation {dev} at t = {}",
            gle.times[i]
        );
    }
}
