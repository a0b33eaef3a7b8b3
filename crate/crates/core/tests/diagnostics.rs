use approx::assert_abs_diff_eq;
use fdrisk::diagnostics::*;
use fdrisk::mc::{simulate_paths, EnsembleConfig};
use fdrisk::*;

fn times(tree: &Tree) -> Vec<f64> {
    tree.grid().times().to_vec()
}

fn volterra_b(c0: f64, ct: f64) -> Driver {
    DriverSpec::VolterraLinear { a: vec![KernelFn::Const(0.0)], b: KernelFn::Affine { c0, ct, cs: 0.0 } }
}

fn abs_family(tree: &Tree, f: impl Fn(f64) -> f64) -> Driver {
    DriverSpec::Family(Family::from_fn(tree.grid(), |u| DriverSpec::abs(f(u), 0.0)).unwrap())
}

#[test]
fn triples_and_pairs_enumerate_ordered_times() {
    let t = [0.0, 0.5, 1.0];
    assert_eq!(all_triples(&t).len(), 10);
    assert_eq!(all_pairs(&t).len(), 6);
    assert!(all_triples(&t).iter().all(|&(s, t, u)| s <= t && t <= u));
}

#[test]
fn corpus_is_seeded() {
    assert_eq!(claim_corpus(3, 12, true), claim_corpus(3, 12, true));
    assert_ne!(claim_corpus(3, 12, true), claim_corpus(4, 12, true));
    assert!(claim_corpus(3, 12, false).iter().all(|c| !c.is_tree_only()));
}

#[test]
fn single_drivers_are_strongly_time_consistent() {
    let tree = Tree::uniform(1.0, 6).unwrap();
    let b = Backend::Tree(&tree);
    let claims = claim_corpus(1, 10, true);
    let tr = all_triples(&times(&tree));
    for d in [DriverSpec::linear(0.3, 0.1), DriverSpec::entropic(1.0, 0.2), DriverSpec::abs(0.5, 0.0), DriverSpec::constant(0.3)] {
        let rep = check_time_consistency(Property::StrongTc, &b, &d, &claims, &tr, 1e-10).unwrap();
        assert!(rep.passed(), "{d:?}: {}", rep.worst_violation);
        assert!(rep.worst_violation <= 1e-10);
    }
}

#[test]
fn weak_and_order_consistency() {
    let tree = Tree::uniform(1.0, 6).unwrap();
    let b = Backend::Tree(&tree);
    let claims = claim_corpus(2, 6, true);
    let tr = all_triples(&times(&tree));
    for kind in [Property::WeakTc, Property::OrderTc, Property::SubTc] {
        for d in [DriverSpec::entropic(1.0, 0.0), DriverSpec::constant(0.2)] {
            let rep = check_time_consistency(kind, &b, &d, &claims, &tr, 1e-10).unwrap();
            assert!(rep.passed(), "{kind:?} {d:?}: {}", rep.worst_violation);
        }
    }
}

#[test]
fn non_tc_properties_are_rejected() {
    let tree = Tree::uniform(1.0, 2).unwrap();
    let b = Backend::Tree(&tree);
    assert!(check_time_consistency(Property::Cocycle, &b, &DriverSpec::constant(0.0), &[], &[], 0.0).is_err());
}

#[test]
fn increasing_family_is_sub_consistent_decreasing_is_not() {
    let tree = Tree::uniform(1.0, 8).unwrap();
    let b = Backend::Tree(&tree);
    let claims = claim_corpus(5, 20, true);
    let tr = all_triples(&times(&tree));
    let inc = check_time_consistency(Property::SubTc, &b, &abs_family(&tree, |u| u), &claims, &tr, 1e-10).unwrap();
    assert!(inc.passed(), "{}", inc.worst_violation);
    let dec = check_time_consistency(Property::SubTc, &b, &abs_family(&tree, |u| 1.0 - u), &claims, &tr, 1e-10).unwrap();
    assert!(!dec.passed());
    assert!(dec.worst_violation > 1e-3);
}

#[test]
fn volterra_drivers_decreasing_in_first_argument() {
    let tree = Tree::uniform(1.0, 8).unwrap();
    let b = Backend::Tree(&tree);
    let claims = [ClaimTemplate::Constant(0.0)];
    let tr = all_triples(&times(&tree));
    let dec = check_time_consistency(Property::SubTc, &b, &volterra_b(1.0, -1.0), &claims, &tr, 1e-10).unwrap();
    assert!(dec.passed(), "{}", dec.worst_violation);
    // b(t, s) = t: violation (t - s)(u - t), largest at (0, 1/2, 1)
    let inc = check_time_consistency(Property::SubTc, &b, &volterra_b(0.0, 1.0), &claims, &tr, 1e-10).unwrap();
    assert!(!inc.passed());
    assert_abs_diff_eq!(inc.worst_violation, 0.25, epsilon = 1e-12);
    let w = &inc.rows[inc.witness.unwrap()];
    assert_eq!((w.s, w.t, w.u), (0.0, 0.5, 1.0));
}

#[test]
fn restriction_and_normalization_follow_the_zero_section() {
    let tree = Tree::uniform(1.0, 4).unwrap();
    let b = Backend::Tree(&tree);
    let claims = claim_corpus(9, 5, true);
    let pairs = all_pairs(&times(&tree));
    let drivers = [
        DriverSpec::entropic(1.0, 0.0),
        DriverSpec::linear(-0.4, 0.0),
        DriverSpec::abs(0.3, 0.0),
        DriverSpec::constant(0.2),
        DriverSpec::Linear { b: vec![0.1], a: TimeFn::Exp { scale: 1.0, rate: -1.0 } },
    ];
    for d in &drivers {
        let normalized = d.is_normalized_on(tree.grid(), 1e-12);
        let r = check_structure(Property::Restriction, &b, d, &claims, &pairs, 1e-10).unwrap();
        let n = check_structure(Property::Normalization, &b, d, &[], &pairs, 1e-10).unwrap();
        assert_eq!(r.passed(), normalized, "{d:?}");
        assert_eq!(n.passed(), normalized, "{d:?}");
    }
    let r = check_structure(Property::Restriction, &b, &DriverSpec::constant(0.2), &claims, &[(0.5, 1.0)], 0.0).unwrap();
    assert_abs_diff_eq!(r.worst_violation, 0.1, epsilon = 1e-12);
}

#[test]
fn constant_driver_gamma_on_the_tree() {
    let tree = Tree::uniform(1.0, 10).unwrap();
    let b = Backend::Tree(&tree);
    let rep = gamma_surface(&b, &DriverSpec::constant(0.1), &ClaimSpec::call(0.0, 0.5), 0.0, 0.5, &[0.5, 0.8, 1.0]).unwrap();
    for r in &rep.rows {
        assert_abs_diff_eq!(r.gamma, 0.1 * (r.u - 0.5), epsilon = 1e-12);
        assert_abs_diff_eq!(r.closed_form.unwrap(), 0.1 * (r.u - 0.5), epsilon = 1e-15);
    }
    assert!(rep.max_abs_error().unwrap() < 1e-12);
}

#[test]
fn exponential_zero_section_gamma_on_mc() {
    let grid = Grid::uniform(1.0, 50).unwrap();
    let e = simulate_paths(&grid, EnsembleConfig { paths: 4000, dim: 1, seed: 21, antithetic: true }).unwrap();
    let b = Backend::Mc(&e, McConfig::default());
    let d = DriverSpec::Abs { kappa: 0.5, a: TimeFn::Exp { scale: 1.0, rate: -1.0 } };
    let rep = gamma_surface(&b, &d, &ClaimSpec::call(0.0, 0.5), 0.0, 0.5, &[1.0]).unwrap();
    let exact = (-0.5f64).exp() * (1.0 - (-0.5f64).exp());
    assert_abs_diff_eq!(exact, 0.238651, epsilon = 1e-6);
    assert_abs_diff_eq!(rep.rows[0].closed_form.unwrap(), exact, epsilon = 1e-14);
    // left-point sums over 25 steps sit above the integral by about dt/2 * 0.24
    assert_abs_diff_eq!(rep.rows[0].gamma, exact, epsilon = 5e-3);
}

#[test]
fn horizon_comparison_with_a_nonnegative_tail() {
    let tree = Tree::uniform(1.0, 8).unwrap();
    let zero = ClaimSpec::constant(0.0, 0.5);
    let later = ClaimSpec::constant(0.0, 1.0);
    let rep = check_horizon_comparison(&tree, &DriverSpec::constant(0.0), &DriverSpec::constant(0.1), &zero, &later, 1e-10).unwrap();
    assert!(rep.passed());
    assert_abs_diff_eq!(rep.worst_signed, 0.0, epsilon = 1e-12);
    let h = comparison_hypotheses(&tree, &DriverSpec::constant(0.0), &DriverSpec::constant(0.1), &zero, &later, &[-1.0, 0.0, 1.0]).unwrap();
    assert!(h.hold(0.0));
}

#[test]
fn horizon_comparison_detects_a_negative_tail() {
    let tree = Tree::uniform(1.0, 8).unwrap();
    let zero = ClaimSpec::constant(0.0, 0.5);
    let later = ClaimSpec::constant(0.0, 1.0);
    let d2 = DriverSpec::constant(-0.1);
    let h = comparison_hypotheses(&tree, &DriverSpec::constant(-0.2), &d2, &zero, &later, &[0.0]).unwrap();
    assert!(!h.hold(0.0));
    let rep = check_horizon_comparison(&tree, &DriverSpec::constant(-0.2), &d2, &zero, &later, 1e-10).unwrap();
    assert!(!rep.passed());
    // xi_1 - Y^2 at T1 = 0.1 * 0.5
    assert_abs_diff_eq!(rep.worst_signed, 0.05, epsilon = 1e-12);
}

#[test]
fn tree_driver_recovery_is_exact_for_one_step() {
    let tree = Tree::uniform(1.0, 16).unwrap();
    let b = Backend::Tree(&tree);
    let s = [0.0, 0.25, 0.5];
    let z = [-1.0, 0.0, 0.5, 2.0];
    for d in [
        DriverSpec::Linear { b: vec![0.3], a: TimeFn::Affine { c0: 0.1, c1: 0.2 } },
        DriverSpec::entropic(1.5, 0.0),
        DriverSpec::abs(0.7, 0.05),
    ] {
        let rep = recover_driver(&b, &d, 1.0, &s, &z, tree.dt(), false).unwrap();
        assert_eq!(rep.rows.len(), 12);
        assert!(rep.max_error() < 1e-12, "{d:?}: {}", rep.max_error());
    }
}

#[test]
fn recovery_rejects_off_grid_windows() {
    let tree = Tree::uniform(1.0, 8).unwrap();
    let b = Backend::Tree(&tree);
    let d = DriverSpec::entropic(1.0, 0.0);
    assert!(recover_driver(&b, &d, 1.0, &[0.0], &[1.0], 0.01, false).is_err());
    assert!(recover_driver(&b, &d, 1.0, &[0.0], &[], 0.125, false).is_err());
    assert!(recover_driver(&b, &d, 1.0, &[0.875], &[1.0], 0.25, false).is_err());
    assert!(recover_driver(&b, &d, 1.0, &[0.75], &[1.0], 0.25, true).is_err());
}

#[test]
fn mc_driver_recovery_orders_ordered_drivers() {
    let grid = Grid::uniform(1.0, 32).unwrap();
    let e = simulate_paths(&grid, EnsembleConfig { paths: 8000, dim: 1, seed: 2, antithetic: true }).unwrap();
    let b = Backend::Mc(&e, McConfig::default());
    let s = [0.0, 0.25, 0.5];
    let z = [-1.0, 0.0, 1.0];
    let eps = 4.0 / 32.0;
    let lo = recover_driver(&b, &DriverSpec::entropic(1.0, 0.0), 1.0, &s, &z, eps, false).unwrap();
    let hi = recover_driver(&b, &DriverSpec::entropic(1.0, 0.2), 1.0, &s, &z, eps, false).unwrap();
    assert!(lo.max_error() < 0.05, "{}", lo.max_error());
    for (a, c) in lo.rows.iter().zip(&hi.rows) {
        assert!(c.g_hat >= a.g_hat - 0.05);
    }
}

fn sample(count: usize) -> PenaltySample {
    let q_grid = (0..41).map(|i| -2.0 + 0.1 * i as f64).collect();
    PenaltySample { count, seed: 11, q_max: 2.0, q_grid, claims: claim_corpus(4, 3, true) }
}

#[test]
fn entropic_penalty_cocycle() {
    let tree = Tree::uniform(1.0, 6).unwrap();
    let tr = all_triples(&times(&tree));
    let d = DriverSpec::entropic(1.0, 0.1);
    for kind in [Property::Cocycle, Property::WeakCocycle, Property::SubPenalty] {
        let rep = check_penalty_relations(kind, &tree, &d, &tr, &sample(8), 1e-9).unwrap();
        assert!(rep.passed(), "{kind:?}: {}", rep.worst_violation);
    }
}

#[test]
fn penalty_sample_respects_the_positivity_bound() {
    let tree = Tree::uniform(1.0, 4).unwrap();
    let mut s = sample(1);
    s.q_max = 2.0;
    assert!(check_penalty_relations(Property::Cocycle, &tree, &DriverSpec::entropic(1.0, 0.0), &[(0.0, 0.5, 1.0)], &s, 1e-9).is_err());
}

#[test]
fn sub_penalty_matches_sub_consistency_for_families() {
    let tree = Tree::uniform(1.0, 6).unwrap();
    let tr = all_triples(&times(&tree));
    let b = Backend::Tree(&tree);
    let claims = claim_corpus(6, 10, true);
    for (d, expect) in [
        (abs_family(&tree, |u| u), true),
        (abs_family(&tree, |u| 1.0 - u), false),
        (volterra_b(1.0, -1.0), true),
        (volterra_b(0.0, 1.0), false),
    ] {
        let tc = check_time_consistency(Property::SubTc, &b, &d, &claims, &tr, 1e-10).unwrap();
        let pen = check_penalty_relations(Property::SubPenalty, &tree, &d, &tr, &sample(8), 1e-10).unwrap();
        assert_eq!(tc.passed(), expect, "{d:?}");
        assert_eq!(pen.passed(), expect, "{d:?}: {}", pen.worst_violation);
    }
}

#[test]
fn acceptance_sets_shrink_with_the_horizon() {
    let tree = Tree::uniform(1.0, 4).unwrap();
    let b = Backend::Tree(&tree);
    let tr = all_triples(&times(&tree));
    let claims = [ClaimTemplate::Constant(0.15), ClaimTemplate::Constant(0.3), ClaimTemplate::Call { strike: 0.0 }];
    let rep = check_acceptance_inclusion(&b, &DriverSpec::constant(0.2), &claims, &tr, 1e-12).unwrap();
    assert!(rep.passed());
    // X = 0.15 over (0, 0, 1): rejected on [0, 1], accepted on [0, 0]
    assert!(rep.memberships.iter().any(|&(su, st)| !su && st));
    let norm = check_acceptance_inclusion(&b, &DriverSpec::entropic(1.0, 0.0), &claims, &tr, 1e-12).unwrap();
    assert!(norm.passed());
    assert!(norm.memberships.iter().all(|&(su, st)| su == st));
}
