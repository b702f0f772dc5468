use std::f64::consts::PI;

use damposc_core::classical::{fit_physical_amplitudes, GeneratorTrajectory, InitialConditions, OscillatorParams};
use damposc_core::propagator::{kernel_convergence, propagate_harmonic};
use damposc_core::quantum::{density, evolve, init_ground_gaussian, EvolutionConfig, Grid1D};
use damposc_core::verify::{
    constancy_horizon, hamiltonian_drift, physical_hamiltonian_deviation, run_suite, VerifyOptions, VerifySetup,
    H_CONSTANCY_TOLERANCE, H_ZERO_TOLERANCE,
};
use damposc_core::Execution;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_params(rng: &mut impl Rng) -> (OscillatorParams, InitialConditions) {
    loop {
        let lambda: f64 = rng.gen_range(0.01..5.0);
        let omega = rng.gen_range(0.1..5.0);
        if (lambda - omega).abs() < 1e-2 * omega {
            continue;
        }
        let params = OscillatorParams::natural(lambda, omega).unwrap();
        let ic = InitialConditions::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)).unwrap();
        return (params, ic);
    }
}

#[test]
fn physical_motion_has_zero_energy() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let (p, ic) = random_params(&mut rng);
        let dev = physical_hamiltonian_deviation(&p, &ic, 0.0).unwrap();
        assert!(dev < H_ZERO_TOLERANCE, "{p:?} {ic:?}: {dev}");
    }
}

#[test]
fn fitted_trajectories_have_no_growing_modes() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..50 {
        let (p, ic) = random_params(&mut rng);
        let traj = fit_physical_amplitudes(&p, &ic).unwrap();
        assert_eq!(traj.b1(), Complex64::new(0.0, 0.0));
        assert_eq!(traj.b2(), Complex64::new(0.0, 0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]
    #[test]
    fn energy_is_conserved_with_growing_modes(
        lambda in 0.01f64..5.0, omega in 0.1f64..5.0,
        re in proptest::array::uniform4(-1.0f64..1.0), im in proptest::array::uniform2(-1.0f64..1.0),
    ) {
        prop_assume!((lambda - omega).abs() > 1e-2 * omega);
        let p = OscillatorParams::natural(lambda, omega).unwrap();
        let c = Complex64::new;
        let traj = if lambda < omega {
            GeneratorTrajectory::new(p, c(re[0], im[0]), c(re[0], -im[0]), c(re[1], im[1]), c(re[1], -im[1]))
        } else {
            GeneratorTrajectory::new(p, c(re[0], 0.0), c(re[1], 0.0), c(re[2], 0.0), c(re[3], 0.0))
        };
        let drift = hamiltonian_drift(&traj, constancy_horizon(&p)).unwrap();
        prop_assert!(drift.relative < H_CONSTANCY_TOLERANCE, "{:?}", drift);
        // plain f64 stays within a small multiple of its rounding floor
        prop_assert!(drift.relative_f64 < H_CONSTANCY_TOLERANCE.max(16.0 * drift.floor), "{:?}", drift);
    }
}

#[test]
fn kernel_propagation_matches_grid_solver() {
    let p = OscillatorParams::natural(0.0, 1.0).unwrap();
    let g = Grid1D::standard();
    let f = init_ground_gaussian(&p, &g, -1.0).unwrap();
    let quarter = p.period() / 4.0;
    let cfg = EvolutionConfig::one_period(&p).with_steps(250);
    let pde = evolve(&f, &p, &cfg, 250).unwrap().pop().unwrap();
    assert!((pde.time - quarter).abs() < 1e-12);
    let kernel = propagate_harmonic(&p, &f, quarter, Execution::default()).unwrap();
    let worst = density(&pde)
        .iter()
        .zip(density(&kernel))
        .map(|(a, b)| (a.1 - b.1).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-3, "{worst}");
}

#[test]
fn halving_dx_barely_changes_final_density() {
    let p = OscillatorParams::natural(0.01, 1.0).unwrap();
    let cfg = EvolutionConfig::one_period(&p);
    let run = |g: Grid1D| {
        let f = init_ground_gaussian(&p, &g, -1.0).unwrap();
        density(&evolve(&f, &p, &cfg, cfg.n_steps).unwrap().pop().unwrap())
    };
    let coarse = run(Grid1D::standard());
    let fine = run(Grid1D::standard().refined());
    // refined grid keeps every coarse node at even indices
    let worst = coarse
        .iter()
        .enumerate()
        .map(|(i, (x, r))| {
            assert!((fine[2 * i].0 - x).abs() < 1e-12);
            (fine[2 * i].1 - r).abs()
        })
        .fold(0.0, f64::max);
    assert!(worst < 1e-4, "{worst}");
}

#[test]
fn execution_modes_agree_bitwise() {
    let p = OscillatorParams::natural(0.05, 1.0).unwrap();
    let setup = VerifySetup {
        params: p,
        ic: InitialConditions::new(-1.0, 0.0).unwrap(),
        grid: Grid1D::new(-8.0, 8.0, 256).unwrap(),
        evolution: EvolutionConfig::one_period(&p),
    };
    let run = |execution| {
        run_suite(
            &setup,
            &VerifyOptions {
                execution,
                ..Default::default()
            },
        )
        .unwrap()
    };
    let a = run(Execution::Parallel);
    let b = run(Execution::Sequential);
    for (x, y) in a.checks.iter().zip(&b.checks) {
        assert_eq!(x.name, y.name);
        assert_eq!(x.measured.to_bits(), y.measured.to_bits(), "{}", x.name);
    }
    let g = Grid1D::new(-10.0, 10.0, 512).unwrap();
    let p0 = p.with_lambda(0.0);
    let slices = [16, 64, 256];
    assert_eq!(
        kernel_convergence(&p0, PI / 4.0, &slices, &g, Execution::Parallel).unwrap(),
        kernel_convergence(&p0, PI / 4.0, &slices, &g, Execution::Sequential).unwrap()
    );
}
