use approx::assert_abs_diff_eq;
use fdrisk::diagnostics::{claim_corpus, Backend, ClaimTemplate};
use fdrisk::tree::*;
use fdrisk::*;
use proptest::prelude::*;

/// Non-recombining recursion over every path; independent of the engine.
fn brute_force(k: usize, b: f64, n: usize, horizon: f64, x: &dyn Fn(f64) -> f64, g: &dyn Fn(f64, f64) -> f64) -> f64 {
    let dt = horizon / n as f64;
    let h = dt.sqrt();
    if k == n {
        return -x(b);
    }
    let up = brute_force(k + 1, b + h, n, horizon, x, g);
    let dn = brute_force(k + 1, b - h, n, horizon, x, g);
    let z = (up - dn) / (2.0 * h);
    0.5 * (up + dn) + g(k as f64 * dt, z) * dt
}

const ABS_CALL_N6: f64 = -6.22792743663003398e-2;
const ENT_CALL_N6: f64 = -2.31343161241114509e-1;
const LIN_EXP_PUT_N6: f64 = 3.29260568357225392e-1;

#[test]
fn oracle_reproduces_frozen_values() {
    let call = |b: f64| (b - 0.1f64).max(0.0);
    assert_eq!(brute_force(0, 0.0, 6, 1.0, &call, &|_, z| 0.5 * z.abs() + 0.1), ABS_CALL_N6);
    assert_eq!(brute_force(0, 0.0, 6, 1.0, &call, &|_, z| 0.5 * z * z), ENT_CALL_N6);
    let put = |b: f64| (0.2 - b).max(0.0);
    assert_eq!(brute_force(0, 0.0, 6, 1.0, &put, &|t, z| 0.3 * z + (-t).exp()), LIN_EXP_PUT_N6);
}

#[test]
fn engine_matches_frozen_oracle() {
    let tree = Tree::uniform(1.0, 6).unwrap();
    let call = ClaimSpec::call(0.1, 1.0);
    assert_abs_diff_eq!(tree_solve(&tree, &DriverSpec::abs(0.5, 0.1), &call, 1.0).unwrap().root(), ABS_CALL_N6, epsilon = 1e-14);
    assert_abs_diff_eq!(tree_solve(&tree, &DriverSpec::entropic(1.0, 0.0), &call, 1.0).unwrap().root(), ENT_CALL_N6, epsilon = 1e-14);
    let lin = DriverSpec::Linear { b: vec![0.3], a: TimeFn::Exp { scale: 1.0, rate: -1.0 } };
    let put = ClaimSpec::put(0.2, 1.0);
    assert_abs_diff_eq!(tree_solve(&tree, &lin, &put, 1.0).unwrap().root(), LIN_EXP_PUT_N6, epsilon = 1e-14);
}

#[test]
fn constant_driver_zero_claim() {
    let tree = Tree::uniform(1.0, 4).unwrap();
    let sol = tree_solve(&tree, &DriverSpec::constant(0.5), &ClaimSpec::constant(0.0, 1.0), 1.0).unwrap();
    assert_abs_diff_eq!(sol.root(), 0.5, epsilon = 1e-15);
}

#[test]
fn zero_driver_constant_claim() {
    let tree = Tree::uniform(1.0, 5).unwrap();
    let sol = tree_solve(&tree, &DriverSpec::constant(0.0), &ClaimSpec::constant(1.7, 1.0), 1.0).unwrap();
    for k in 0..=5 {
        assert!(sol.y_at(k).iter().all(|&y| y == -1.7));
    }
}

#[test]
fn linear_volterra_levels() {
    let tree = Tree::uniform(1.0, 8).unwrap();
    let sol = tree_solve(&tree, &DriverSpec::volterra_linear(0.0, 1.0), &ClaimSpec::constant(0.0, 1.0), 1.0).unwrap();
    for k in 0..=8 {
        // direct summation of b over the remaining steps
        let expected: f64 = (k..8).map(|_| 1.0 * tree.dt()).sum();
        for &y in sol.y_at(k) {
            assert_abs_diff_eq!(y, expected, epsilon = 1e-14);
        }
    }
}

#[test]
fn closed_forms_on_fine_tree() {
    let tree = Tree::uniform(1.0, 256).unwrap();
    let x = ClaimSpec::linear(1.0, 0.0, 1.0);
    assert_abs_diff_eq!(tree_solve(&tree, &DriverSpec::linear(0.3, 0.1), &x, 1.0).unwrap().root(), -0.2, epsilon = 1e-12);
    assert_abs_diff_eq!(tree_solve(&tree, &DriverSpec::entropic(1.0, 0.0), &x, 1.0).unwrap().root(), 0.5, epsilon = 1e-12);
    assert_abs_diff_eq!(tree_solve(&tree, &DriverSpec::volterra_quadratic(1.0, 0.0), &x, 1.0).unwrap().root(), 0.5, epsilon = 1e-12);
    assert_abs_diff_eq!(tree_solve(&tree, &DriverSpec::volterra_linear(0.2, 0.1), &x, 1.0).unwrap().root(), -0.1, epsilon = 1e-12);
}

#[test]
fn bachelier_limit() {
    // Linear driver, call: E_Q[-(B_1 - K)^+] + a with B_1 ~ N(b, 1) under Q
    let tree = Tree::uniform(1.0, 2000).unwrap();
    let d = DriverSpec::linear(0.3, 0.1);
    let c = ClaimSpec::call(0.1, 1.0);
    let closed = fdrisk::duality::closed_form(&d, &c, 0.0, 1.0, &[0.0]).unwrap();
    assert_abs_diff_eq!(tree_solve(&tree, &d, &c, 1.0).unwrap().root(), closed, epsilon = 2e-3);
}

#[test]
fn claims_before_the_horizon() {
    let tree = Tree::uniform(1.0, 8).unwrap();
    let x = ClaimSpec::call(0.0, 0.5);
    let d = DriverSpec::abs(0.5, 0.2);
    let short = tree_rho(&tree, &d, &x, 0.0, 0.5).unwrap()[0];
    let long = tree_rho(&tree, &d, &x, 0.0, 1.0).unwrap()[0];
    assert_abs_diff_eq!(long - short, 0.1, epsilon = 1e-14);
}

#[test]
fn f32_tree() {
    let tree = Tree32::uniform(1.0, 64).unwrap();
    let x = Claim32::linear(1.0, 0.0, 1.0);
    let v = tree_solve(&tree, &Driver32::linear(0.3, 0.1), &x, 1.0).unwrap().root();
    assert!((v + 0.2).abs() < 1e-5, "{v}");
    let e = tree_solve(&tree, &Driver32::entropic(1.0, 0.0), &x, 1.0).unwrap().root();
    assert!((e - 0.5).abs() < 1e-5, "{e}");
}

#[test]
fn tree_rejects_bad_input() {
    assert!(TreeModel::new(TimeGrid::from_times(vec![0.0, 0.1, 1.0]).unwrap()).is_err());
    let tree = Tree::uniform(1.0, 4).unwrap();
    assert!(tree_solve(&tree, &DriverSpec::constant(0.0), &ClaimSpec::call(0.0, 1.0), 0.5).is_err());
    assert!(tree_solve(&tree, &DriverSpec::constant(0.0), &ClaimSpec::path(|_p: PathRef<'_, f64>| 0.0, 1.0), 1.0).is_err());
    assert!(matches!(TreeMeasure::from_fn(&tree, 0, 4, |_, _, _| 2.0), Err(Error::Positivity { .. })));
}

#[test]
fn pasting_identities() {
    let tree = Tree::uniform(1.0, 6).unwrap();
    let p1 = TreeMeasure::identity(&tree, 0, 3).unwrap();
    let p2 = TreeMeasure::identity(&tree, 3, 6).unwrap();
    let s = tree_pasting(&p1, &p2).unwrap();
    for k in 0..6 {
        for j in 0..=k {
            assert_eq!(s.q(k, j), 0.0);
        }
    }
    let r = TreeMeasure::from_fn(&tree, 3, 6, |k, j, _| 0.1 * (k + j) as f64).unwrap();
    let s = tree_pasting(&p1, &r).unwrap();
    for k in 3..6 {
        for j in 0..=k {
            assert_eq!(s.q(k, j), r.q(k, j));
        }
    }
    assert!(tree_pasting(&p1, &TreeMeasure::identity(&tree, 4, 6).unwrap()).is_err());
}

#[test]
fn penalties() {
    let tree = Tree::uniform(1.0, 8).unwrap();
    let lin = DriverSpec::linear(0.3, 0.1);
    let at_b = TreeMeasure::from_fn(&tree, 2, 6, |_, _, _| 0.3).unwrap();
    for a in tree_penalty(&tree, &lin, &at_b, 0.25, 0.75).unwrap() {
        assert_abs_diff_eq!(a, -0.1 * 0.5, epsilon = 1e-15);
    }
    // rho_st(0) = a (t - s) is attained at q = b
    let rho0 = tree_rho(&tree, &lin, &ClaimSpec::constant(0.0, 0.75), 0.25, 0.75).unwrap();
    assert_abs_diff_eq!(rho0[0], 0.05, epsilon = 1e-15);
    let p = TreeMeasure::identity(&tree, 2, 6).unwrap();
    assert!(tree_penalty(&tree, &lin, &p, 0.25, 0.75).unwrap().iter().all(|a| a.is_infinite()));
    let ent = DriverSpec::entropic(1.0, 0.0);
    assert!(tree_penalty(&tree, &ent, &p, 0.25, 0.75).unwrap().iter().all(|&a| a == 0.0));
    let one = TreeMeasure::from_fn(&tree, 0, 8, |_, _, _| 1.0).unwrap();
    assert_abs_diff_eq!(tree_penalty(&tree, &ent, &one, 0.0, 1.0).unwrap()[0], 0.5, epsilon = 1e-14);
}

fn q_grid() -> Vec<f64> {
    (0..41).map(|i| -2.0 + 0.1 * i as f64).collect()
}

#[test]
fn dual_equals_primal_for_linear() {
    let tree = Tree::uniform(1.0, 8).unwrap();
    let d = DriverSpec::linear(0.3, 0.1);
    for c in [ClaimSpec::linear(1.0, 0.0, 1.0), ClaimSpec::call(0.1, 1.0), ClaimSpec::put(-0.2, 0.75)] {
        let dual = tree_dual_sup(&tree, &d, &c, 0.0, 1.0, &q_grid(), DualOptions::default()).unwrap();
        let primal = tree_rho(&tree, &d, &c, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(dual.values[0], primal[0], epsilon = 1e-10);
    }
}

#[test]
fn entropic_dual_gap() {
    let tree = Tree::uniform(1.0, 8).unwrap();
    let d = DriverSpec::entropic(1.0, 0.0);
    let zero = ClaimSpec::constant(0.0, 1.0);
    assert_eq!(tree_rho(&tree, &d, &zero, 0.0, 1.0).unwrap()[0], 0.0);
    assert!(tree_dual_sup(&tree, &d, &zero, 0.0, 1.0, &q_grid(), DualOptions::default()).unwrap().values[0] >= -1e-15);
    let x = ClaimSpec::linear(1.0, 0.0, 1.0);
    let primal = tree_rho(&tree, &d, &x, 0.0, 1.0).unwrap()[0];
    for newton in [false, true] {
        let dual = tree_dual_sup(&tree, &d, &x, 0.0, 1.0, &q_grid(), DualOptions { newton_refine: newton }).unwrap().values[0];
        assert!(dual <= primal + 1e-12);
        assert!(primal - dual <= 2e-2);
    }
}

#[test]
fn dual_rejects_grid_beyond_positivity() {
    let tree = Tree::uniform(1.0, 4).unwrap();
    let d = DriverSpec::entropic(1.0, 0.0);
    assert!(tree_dual_sup(&tree, &d, &ClaimSpec::constant(0.0, 1.0), 0.0, 1.0, &[-3.0, 0.0], DualOptions::default()).is_err());
}

fn node_claim(tree: &Tree, level: usize, values: &[f64]) -> Claim {
    ClaimSpec::node_values(values[..=level].to_vec(), tree.sqrt_dt(), tree.time(level))
}

fn drivers() -> Vec<Driver> {
    vec![
        DriverSpec::linear(-0.4, 0.2),
        DriverSpec::entropic(1.5, 0.1),
        DriverSpec::abs(0.7, -0.1),
        DriverSpec::volterra_linear(0.3, -0.2),
        DriverSpec::volterra_quadratic(0.8, 0.05),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn monotone(values in prop::collection::vec(-1.0f64..1.0, 7), bumps in prop::collection::vec(0.0f64..0.5, 7), s_level in 0usize..6) {
        let tree = Tree::uniform(1.0, 6).unwrap();
        let x = node_claim(&tree, 6, &values);
        let bigger: Vec<f64> = values.iter().zip(&bumps).map(|(a, b)| a + b).collect();
        let y = node_claim(&tree, 6, &bigger);
        let s = tree.time(s_level);
        // quadratic generators see claims scaled so that |dg/dz| sqrt(dt) stays below one
        let small = |v: &[f64]| node_claim(&tree, 6, &v.iter().map(|a| 0.2 * a).collect::<Vec<_>>());
        for d in drivers() {
            let quadratic = matches!(d, DriverSpec::Entropic { .. } | DriverSpec::VolterraQuadratic { .. });
            let (x, y) = if quadratic { (small(&values), small(&bigger)) } else { (x.clone(), y.clone()) };
            let rx = tree_rho(&tree, &d, &x, s, 1.0).unwrap();
            let ry = tree_rho(&tree, &d, &y, s, 1.0).unwrap();
            for (a, b) in rx.iter().zip(&ry) {
                prop_assert!(b <= &(a + 1e-12));
            }
        }
    }

    #[test]
    fn translation_invariant(values in prop::collection::vec(-1.0f64..1.0, 7), m in -2.0f64..2.0) {
        let tree = Tree::uniform(1.0, 6).unwrap();
        let x = node_claim(&tree, 6, &values);
        for d in drivers() {
            let a = tree_rho(&tree, &d, &x, 0.0, 1.0).unwrap()[0];
            let b = tree_rho(&tree, &d, &x.shifted(m), 0.0, 1.0).unwrap()[0];
            prop_assert!((b - (a - m)).abs() < 1e-12);
        }
    }

    #[test]
    fn pasted_density_has_unit_mass(qs in prop::collection::vec(-2.0f64..2.0, 21), split in 1usize..6) {
        let tree = Tree::uniform(1.0, 6).unwrap();
        let q = TreeMeasure::from_fn(&tree, 0, split, |k, j, _| qs[k * (k + 1) / 2 + j]).unwrap();
        let r = TreeMeasure::from_fn(&tree, split, 6, |k, j, _| -qs[k * (k + 1) / 2 + j] * 0.5).unwrap();
        let s = tree_pasting(&q, &r).unwrap();
        let mut mass = 0.0;
        for code in 0u32..64 {
            let moves: Vec<bool> = (0..6).map(|i| code >> i & 1 == 1).collect();
            mass += s.path_density(&moves) / 64.0;
        }
        prop_assert!((mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weak_duality(values in prop::collection::vec(-1.0f64..1.0, 9), qs in prop::collection::vec(-1.5f64..1.5, 36)) {
        let tree = Tree::uniform(1.0, 8).unwrap();
        let x = node_claim(&tree, 8, &values);
        let layer: Vec<f64> = values.iter().map(|v| -v).collect();
        let q = TreeMeasure::from_fn(&tree, 0, 8, |k, j, _| qs[k * (k + 1) / 2 + j]).unwrap();
        for d in [DriverSpec::entropic(1.0, 0.1), DriverSpec::abs(1.5, 0.0), DriverSpec::volterra_quadratic(1.0, 0.0)] {
            let primal = tree_rho(&tree, &d, &x, 0.0, 1.0).unwrap()[0];
            let pen = tree_penalty(&tree, &d, &q, 0.0, 1.0).unwrap()[0];
            let eq = q.expect(&layer, 8, 0)[0];
            prop_assert!(eq - pen <= primal + 1e-12, "{d:?}: {} > {primal}", eq - pen);
            let dual = tree_dual_sup(&tree, &d, &x, 0.0, 1.0, &q_grid(), DualOptions::default()).unwrap().values[0];
            prop_assert!(dual <= primal + 1e-12);
        }
    }

    #[test]
    fn corpus_claims_live_on_the_tree(seed in 0u64..1000) {
        let tree = Tree::uniform(1.0, 4).unwrap();
        for t in claim_corpus(seed, 10, true) {
            let c = t.at(&Backend::Tree(&tree), 3).unwrap();
            prop_assert_eq!(c.validate(tree.grid()).unwrap(), 3);
            if let ClaimTemplate::RandomNodes { .. } = t {
                let is_nodes = matches!(c.kind, ClaimKind::NodeValues { .. });
                prop_assert!(is_nodes);
            }
        }
    }
}
