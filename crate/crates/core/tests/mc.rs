use approx::assert_abs_diff_eq;
use fdrisk::duality::closed_form;
use fdrisk::mc::*;
use fdrisk::*;
use proptest::prelude::*;

fn ensemble(n: usize, paths: usize, seed: u64, antithetic: bool) -> Ensemble {
    let grid = Grid::uniform(1.0, n).unwrap();
    simulate_paths(&grid, EnsembleConfig { paths, dim: 1, seed, antithetic }).unwrap()
}

#[test]
fn fixed_seed_is_bit_identical() {
    let a = ensemble(10, 2, 7, false);
    let b = ensemble(10, 2, 7, false);
    assert_eq!(a.path(0), b.path(0));
    assert_eq!(a.path(1), b.path(1));
    let c = ensemble(10, 2, 8, false);
    assert_ne!(a.path(0), c.path(0));
}

#[test]
fn paths_start_at_zero_and_blocks_are_prefix_stable() {
    let small = ensemble(4, 100, 3, false);
    let big = ensemble(4, PATH_BLOCK + 100, 3, false);
    for i in 0..100 {
        assert_eq!(small.state(0, i), &[0.0]);
        assert_eq!(small.path(i), big.path(i));
    }
}

#[test]
fn antithetic_pairs_are_negated() {
    let e = ensemble(6, 10, 1, true);
    for i in (0..10).step_by(2) {
        for k in 0..6 {
            assert_eq!(e.increment(k, i + 1, 0), -e.increment(k, i, 0));
        }
    }
}

#[test]
fn increments_have_brownian_moments() {
    let m = 20_000;
    let e = ensemble(4, m, 11, false);
    let dt = 0.25;
    for k in 0..4 {
        let inc: Vec<f64> = (0..m).map(|i| e.increment(k, i, 0)).collect();
        let mean = inc.iter().sum::<f64>() / m as f64;
        let var = inc.iter().map(|x| x * x).sum::<f64>() / m as f64;
        assert!(mean.abs() < 5.0 * (dt / m as f64).sqrt(), "mean {mean}");
        // sd of the sample second moment is dt sqrt(2/m)
        assert!((var - dt).abs() < 5.0 * dt * (2.0 / m as f64).sqrt(), "var {var}");
    }
}

#[test]
fn ensemble_rejects_bad_configs() {
    let grid = Grid::uniform(1.0, 10).unwrap();
    let odd = simulate_paths(&grid, EnsembleConfig { paths: 3, dim: 1, seed: 0, antithetic: true });
    assert!(matches!(odd, Err(Error::InvalidArgument(_))));
    let huge = simulate_paths(&grid, EnsembleConfig { paths: MAX_ENSEMBLE_CELLS, dim: 1, seed: 0, antithetic: false });
    assert!(matches!(huge, Err(Error::Capacity(_))));
    let none = simulate_paths(&grid, EnsembleConfig { paths: 0, dim: 1, seed: 0, antithetic: false });
    assert!(none.is_err());
}

#[test]
fn monomial_counts() {
    // C(d + p, p)
    assert_eq!(monomial_exponents(1, 3).len(), 4);
    assert_eq!(monomial_exponents(2, 2).len(), 6);
    assert_eq!(monomial_exponents(3, 3).len(), 20);
    assert_eq!(monomial_exponents(2, 0), vec![vec![0, 0]]);
}

#[test]
fn regression_recovers_a_polynomial() {
    let basis = Basis::new(1, 3, 1.0);
    let xs: Vec<f64> = (0..50).map(|i| -2.0 + 0.08 * i as f64).collect();
    let mut rows = vec![0.0; xs.len() * basis.len()];
    for (r, &x) in rows.chunks_mut(basis.len()).zip(&xs) {
        basis.eval_into(&[x], r);
    }
    let y: Vec<f64> = xs.iter().map(|x| 1.0 - 2.0 * x + 0.5 * x * x * x).collect();
    let beta = LeastSquares::new(&rows, basis.len(), 0).unwrap().solve(&rows, &y);
    for (b, e) in beta.iter().zip([1.0, -2.0, 0.0, 0.5]) {
        assert_abs_diff_eq!(*b, e, epsilon = 1e-9);
    }
}

#[test]
fn singular_regression_is_reported() {
    let rows = vec![1.0, 2.0, 2.0, 4.0, 3.0, 6.0];
    let err = LeastSquares::new(&rows, 2, 5).unwrap_err();
    assert!(matches!(err, Error::Numerical { level: 5, .. }));
}

#[test]
fn mean_stderr_pairs_antithetic_samples() {
    let (m, se) = mean_stderr(&[1.0, -1.0, 2.0, -2.0], true);
    assert_eq!(m, 0.0);
    assert_eq!(se, 0.0);
    let (m, se) = mean_stderr(&[1.0, 3.0], false);
    assert_eq!(m, 2.0);
    assert_abs_diff_eq!(se, 1.0, epsilon = 1e-15);
}

#[test]
fn zero_driver_constant_claim_is_exact() {
    let e = ensemble(20, 1000, 2, false);
    let sol = mc_solve_bsde(&e, &DriverSpec::constant(0.0), &ClaimSpec::constant(3.0, 1.0), 0.0, 1.0, McConfig::default()).unwrap();
    assert_abs_diff_eq!(sol.estimate, -3.0, epsilon = 1e-12);
    assert!(sol.values.iter().all(|&v| (v + 3.0).abs() < 1e-12));
}

#[test]
fn linear_driver_linear_claim() {
    let e = ensemble(50, 20_000, 5, true);
    let sol = mc_solve_bsde(&e, &DriverSpec::linear(0.3, 0.1), &ClaimSpec::linear(1.0, 0.0, 1.0), 0.0, 1.0, McConfig::default()).unwrap();
    assert_abs_diff_eq!(sol.estimate, -0.2, epsilon = 5e-3);
    assert!(sol.stderr < 1e-2);
}

#[test]
fn entropic_driver() {
    let e = ensemble(50, 20_000, 5, true);
    let sol = mc_solve_bsde(&e, &DriverSpec::entropic(1.0, 0.0), &ClaimSpec::linear(1.0, 0.0, 1.0), 0.0, 1.0, McConfig::default()).unwrap();
    assert_abs_diff_eq!(sol.estimate, 0.5, epsilon = 2e-2);
}

#[test]
fn call_under_linear_driver_matches_bachelier() {
    let e = ensemble(50, 40_000, 9, true);
    let d = DriverSpec::linear(0.3, 0.0);
    let c = ClaimSpec::call(0.1, 1.0);
    let sol = mc_solve_bsde(&e, &d, &c, 0.0, 1.0, McConfig::default()).unwrap();
    let exact = closed_form(&d, &c, 0.0, 1.0, &[0.0]).unwrap();
    assert!((sol.estimate - exact).abs() < 1e-2 + 4.0 * sol.stderr, "{} vs {exact}", sol.estimate);
}

#[test]
fn volterra_constant_in_first_argument_is_the_bsde() {
    let e = ensemble(30, 5000, 4, false);
    let c = ClaimSpec::call(0.0, 1.0);
    let cfg = McConfig::default();
    let bsde = mc_solve_bsde(&e, &DriverSpec::linear(0.3, 0.1), &c, 0.0, 1.0, cfg).unwrap();
    let bsvie = mc_solve_bsvie(&e, &DriverSpec::volterra_linear(0.3, 0.1), &c, &[0.0], 1.0, cfg).unwrap();
    assert_abs_diff_eq!(bsde.estimate, bsvie[0].estimate, epsilon = 1e-12);
}

#[test]
fn volterra_closed_forms() {
    let e = ensemble(50, 20_000, 6, true);
    let cfg = McConfig::default();
    let vl = mc_solve_bsde(&e, &DriverSpec::volterra_linear(0.0, 1.0), &ClaimSpec::constant(0.0, 1.0), 0.0, 1.0, cfg).unwrap();
    assert_abs_diff_eq!(vl.estimate, 1.0, epsilon = 1e-9);
    let vq = mc_solve_bsde(&e, &DriverSpec::volterra_quadratic(1.0, 0.0), &ClaimSpec::linear(1.0, 0.0, 1.0), 0.0, 1.0, cfg).unwrap();
    assert_abs_diff_eq!(vq.estimate, 0.5, epsilon = 2e-2);
}

#[test]
fn bsvie_surface_over_s() {
    let e = ensemble(10, 4000, 1, true);
    let d = DriverSpec::volterra_linear(0.2, 0.1);
    let c = ClaimSpec::linear(1.0, 0.0, 1.0);
    let s = [0.0, 0.3, 0.5];
    let sols = mc_solve_bsvie(&e, &d, &c, &s, 1.0, McConfig::default()).unwrap();
    for (sol, &si) in sols.iter().zip(&s) {
        assert_eq!(sol.level, e.grid().index_of(si).unwrap());
        let exact: f64 = (0..e.paths())
            .map(|i| closed_form(&d, &c, si, 1.0, e.state(sol.level, i)).unwrap())
            .sum::<f64>()
            / e.paths() as f64;
        assert_abs_diff_eq!(sol.estimate, exact, epsilon = 5e-3);
    }
}

#[test]
fn claim_before_horizon_gets_deterministic_tail() {
    let e = ensemble(10, 2000, 3, true);
    let sol = mc_solve_bsde(&e, &DriverSpec::constant(0.2), &ClaimSpec::linear(1.0, 0.0, 0.5), 0.0, 1.0, McConfig::default()).unwrap();
    assert_abs_diff_eq!(sol.estimate, 0.2, epsilon = 1e-12);
}

#[test]
fn two_dimensional_linear_driver() {
    let grid = Grid::uniform(1.0, 20).unwrap();
    let e = simulate_paths(&grid, EnsembleConfig { paths: 4000, dim: 2, seed: 12, antithetic: true }).unwrap();
    let d = DriverSpec::Linear { b: vec![0.3, -0.2], a: TimeFn::Const(0.05) };
    let c = ClaimSpec { horizon: 1.0, kind: ClaimKind::Linear { z: vec![1.0, 2.0], c: 0.1 } };
    let sol = mc_solve_bsde(&e, &d, &c, 0.0, 1.0, McConfig::default()).unwrap();
    let exact = closed_form(&d, &c, 0.0, 1.0, &[0.0, 0.0]).unwrap();
    // 0.05 - 0.1 - (0.3 - 0.4)
    assert_abs_diff_eq!(exact, 0.05, epsilon = 1e-15);
    assert_abs_diff_eq!(sol.estimate, exact, epsilon = 5e-3);
}

#[test]
fn dimension_mismatch_is_rejected() {
    let e = ensemble(4, 10, 0, false);
    let c = ClaimSpec { horizon: 1.0, kind: ClaimKind::Linear { z: vec![1.0, 2.0], c: 0.0 } };
    assert!(mc_solve_bsde(&e, &DriverSpec::constant(0.0), &c, 0.0, 1.0, McConfig::default()).is_err());
}

#[test]
fn path_claims_run_on_mc() {
    let e = ensemble(10, 4000, 8, true);
    let running_max = ClaimSpec::path(|p| (0..p.len()).map(|k| p.at(k)[0]).fold(f64::MIN, f64::max), 1.0);
    let sol = mc_solve_bsde(&e, &DriverSpec::constant(0.0), &running_max, 0.0, 1.0, McConfig::default()).unwrap();
    // E[max B] = sqrt(2/pi) in continuous time; the 10-step grid sits below it
    assert!(-sol.estimate > 0.5 && -sol.estimate < (2.0 / std::f64::consts::PI).sqrt());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn translation_invariance(m in -2.0f64..2.0, seed in 0u64..1000) {
        let e = ensemble(8, 400, seed, true);
        let d = DriverSpec::entropic(1.0, 0.1);
        let c = ClaimSpec::call(0.0, 1.0);
        let cfg = McConfig::default();
        let a = mc_solve_bsde(&e, &d, &c, 0.0, 1.0, cfg).unwrap().estimate;
        let b = mc_solve_bsde(&e, &d, &c.shifted(m), 0.0, 1.0, cfg).unwrap().estimate;
        prop_assert!((b - (a - m)).abs() < 1e-9);
    }

    #[test]
    fn seeds_reproduce(seed in 0u64..10_000) {
        let x = ensemble(5, 64, seed, seed % 2 == 0);
        let y = ensemble(5, 64, seed, seed % 2 == 0);
        prop_assert_eq!(x.level(5), y.level(5));
    }
}
