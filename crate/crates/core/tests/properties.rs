use proptest::prelude::*;

use varinf::analysis::check_comparison;
use varinf::exponent::{exponent_from_family, exponent_from_samples, ExponentField};
use varinf::gadgets::{g_eval, g_inverse, g_prime, monotonicity_inequality_gap, GFunctionParams};
use varinf::grid::{diff_sup_norm, make_domain, sup_norm, BoundaryData, GridFunction, Node, Shape};
use varinf::operator::{full_operator_discrete_with, normalized_inf_discrete_with, SchemeOptions, Stencil};
use varinf::solvers::{energy, energy_gradient, minimize_energy, solve_direct, Problem, SourceSign};
use varinf::suite;

fn grid_values(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, n * n)
}

fn bump_field(n: usize) -> ExponentField {
    let d = make_domain(n, n, 1.0 / (n - 1) as f64, Shape::Rectangle).unwrap();
    exponent_from_family(&d, &suite::bump_exponent()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sup_norm_axioms(a in grid_values(6), b in grid_values(6), c in grid_values(6), s in -3.0f64..3.0) {
        let d = make_domain(6, 6, 0.2, Shape::Rectangle).unwrap();
        let u = GridFunction::from_values(&d, a).unwrap();
        let v = GridFunction::from_values(&d, b).unwrap();
        let w = GridFunction::from_values(&d, c).unwrap();
        prop_assert!(sup_norm(&u) >= 0.0);
        prop_assert_eq!(diff_sup_norm(&u, &u).unwrap(), 0.0);
        prop_assert_eq!(diff_sup_norm(&u, &v).unwrap(), diff_sup_norm(&v, &u).unwrap());
        prop_assert!((sup_norm(&u.map(|x| s * x)) - s.abs() * sup_norm(&u)).abs() <= 1e-15 * sup_norm(&u));
        let tri = diff_sup_norm(&u, &v).unwrap() + diff_sup_norm(&v, &w).unwrap();
        prop_assert!(diff_sup_norm(&u, &w).unwrap() <= tri + 1e-15);
    }

    #[test]
    fn boundary_lipschitz_of_affine_data(e0 in -2.0f64..2.0, e1 in -2.0f64..2.0, c in -1.0f64..1.0) {
        let d = make_domain(9, 9, 0.125, Shape::Rectangle).unwrap();
        let f = BoundaryData::from_fn(&d, |x| e0 * x[0] + e1 * x[1] + c).unwrap();
        let l = f.lipschitz_constant();
        prop_assert!(l <= e0.hypot(e1) * (1.0 + 1e-12) + 1e-15);
        prop_assert!(l >= e0.abs().max(e1.abs()) * (1.0 - 1e-12));
    }

    #[test]
    fn operator_is_affine_equivariant(vals in grid_values(7), a in 0.1f64..10.0, b in -5.0f64..5.0) {
        let d = make_domain(7, 7, 1.0 / 6.0, Shape::Rectangle).unwrap();
        let u = GridFunction::from_values(&d, vals).unwrap();
        let v = u.map(|x| a * x + b);
        for stencil in [Stencil::Axis4, Stencil::Directional] {
            let su = SchemeOptions { stencil, guard: Some(1e-9), ..SchemeOptions::default() };
            let sv = SchemeOptions { guard: Some(a * 1e-9), ..su };
            for &idx in d.interior() {
                let node = d.node(idx);
                let nu = normalized_inf_discrete_with(&u, node, &su).unwrap();
                let nv = normalized_inf_discrete_with(&v, node, &sv).unwrap();
                prop_assert!((nv - a * nu).abs() <= 1e-9 * (1.0 + a * nu.abs()) / d.h().powi(2));
            }
        }
    }

    #[test]
    fn axis_stencil_is_monotone_in_neighbors(vals in grid_values(5), bump in 0.0f64..1.0, which in 0usize..4) {
        let d = make_domain(5, 5, 0.25, Shape::Rectangle).unwrap();
        let u = GridFunction::from_values(&d, vals).unwrap();
        let opts = SchemeOptions { stencil: Stencil::Axis4, ..SchemeOptions::default() };
        let node = Node::new(2, 2);
        let nb = [Node::new(1, 2), Node::new(3, 2), Node::new(2, 1), Node::new(2, 3)][which];
        let mut v = u.clone();
        v.set(d.index(nb), u.at(nb) + bump);
        let before = normalized_inf_discrete_with(&u, node, &opts).unwrap();
        let after = normalized_inf_discrete_with(&v, node, &opts).unwrap();
        prop_assert!(after >= before);
    }

    #[test]
    fn monotone_scheme_is_monotone_for_variable_exponent(
        vals in grid_values(9),
        bump in 0.0f64..1.0,
        which in 0usize..4,
        ci in 2usize..7,
        cj in 2usize..7,
    ) {
        let field = bump_field(9);
        let d = field.domain().clone();
        let u = GridFunction::from_values(&d, vals).unwrap();
        let opts = SchemeOptions { guard: Some(1e-6), ..SchemeOptions::monotone() };
        let node = Node::new(ci, cj);
        let nb = [Node::new(ci - 1, cj), Node::new(ci + 1, cj), Node::new(ci, cj - 1), Node::new(ci, cj + 1)][which];
        let mut v = u.clone();
        v.set(d.index(nb), u.at(nb) + bump);
        let before = full_operator_discrete_with(&u, node, &field, &opts).unwrap();
        let after = full_operator_discrete_with(&v, node, &field, &opts).unwrap();
        prop_assert!(after >= before - 1e-12 * before.abs().max(1.0), "{} < {}", after, before);
        // and strictly decreasing in the center value
        let mut w = u.clone();
        w.set(d.index(node), u.at(node) + bump);
        let center = full_operator_discrete_with(&w, node, &field, &opts).unwrap();
        prop_assert!(center <= before + 1e-12 * before.abs().max(1.0));
    }

    #[test]
    fn exponent_validation(vals in prop::collection::vec(0.5f64..4.0, 25), nan in proptest::bool::weighted(0.1)) {
        let d = make_domain(5, 5, 0.25, Shape::Rectangle).unwrap();
        let mut p = vals.clone();
        if nan {
            p[7] = f64::NAN;
        }
        let bad = nan || p.iter().any(|&v| v <= 1.0);
        let r = exponent_from_samples(&d, p);
        prop_assert_eq!(r.is_err(), bad);
        if let Ok(field) = r {
            prop_assert!(field.p_min() > 1.0);
            prop_assert!(varinf::exponent::validate(&field).ok());
        }
    }

    #[test]
    fn inequality_gap_is_nonnegative(
        a in prop::collection::vec(-1.0f64..1.0, 3),
        b in prop::collection::vec(-1.0f64..1.0, 3),
        q in 2.0f64..20.0,
    ) {
        // scale into the unit ball so both sides stay O(1)
        let s = 1.0 / 3f64.sqrt();
        let a: Vec<f64> = a.iter().map(|v| v * s).collect();
        let b: Vec<f64> = b.iter().map(|v| v * s).collect();
        prop_assert!(monotonicity_inequality_gap(&a, &b, q).unwrap() >= -1e-12);
    }

    #[test]
    fn g_inverse_round_trip(t in 0.0f64..50.0, alpha in 0.1f64..20.0, a in 1.01f64..1.99) {
        let p = GFunctionParams::new(alpha, a).unwrap();
        let g = g_eval(t, &p);
        prop_assert!((g_inverse(g, &p) - t).abs() <= 1e-12 * (1.0 + t));
        prop_assert!(g_prime(t, &p) >= 1.0);
        prop_assert!(g >= t);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn direct_solution_obeys_max_principle(c in prop::array::uniform4(-1.0f64..1.0), p in 1.5f64..6.0) {
        let d = make_domain(9, 9, 0.125, Shape::Rectangle).unwrap();
        let f = BoundaryData::from_fn(&d, |x| c[0] * x[0] + c[1] * x[1] * x[1] + c[2] * (4.0 * x[0] * x[1]).sin() + c[3]).unwrap();
        let problem = Problem::new(f.clone(), ExponentField::constant(&d, p).unwrap()).unwrap();
        let (u, _) = solve_direct(&problem).unwrap();
        let tol = 10.0 * problem.tolerances.residual_tol;
        for &i in d.interior() {
            prop_assert!(u.get(i) <= f.max() + tol && u.get(i) >= f.min() - tol);
        }
    }

    #[test]
    fn shifted_data_shift_solution(shift in 0.0f64..2.0, seed in 0usize..10) {
        let problem = suite::regression_problems(9).unwrap().remove(seed).problem.with_scheme(SchemeOptions::monotone());
        let (u, _) = solve_direct(&problem).unwrap();
        let (v, _) = solve_direct(&problem.shifted(shift)).unwrap();
        let r = check_comparison(&u, &v, 10.0 * problem.tolerances.residual_tol).unwrap();
        prop_assert!(r.passed);
        prop_assert_eq!(check_comparison(&u, &u.map(|x| x + shift), 0.0).unwrap().max_violation, 0.0);
    }

    #[test]
    fn minimization_never_raises_energy(seed in 0usize..10, k in 1.0f64..5.0, eps in 0.0f64..0.5) {
        let problem = suite::regression_problems(9).unwrap().remove(seed).problem.with_epsilon(eps).unwrap();
        let k = k.max(2.0 / problem.exponent.p_min());
        let (_, report) = minimize_energy(&problem, k, SourceSign::Upper, None).unwrap();
        prop_assert!(report.warnings.iter().all(|w| !w.contains("energy")), "{:?}", report.warnings);
        let h = &report.energy_history;
        for w in h.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0));
        }
    }

    #[test]
    fn energy_gradient_matches_differences(vals in grid_values(9), eps in 0.0f64..0.6, sign in 0usize..3) {
        let field = bump_field(9);
        let d = field.domain().clone();
        let u = GridFunction::from_values(&d, vals.iter().map(|v| 0.5 * v).collect()).unwrap();
        let k = 16.0 / field.p_max();
        let sign = [SourceSign::Lower, SourceSign::Equation, SourceSign::Upper][sign];
        let g = energy_gradient(&u, k, &field, eps, sign).unwrap();
        let step = 1e-6;
        let mut err: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for &idx in d.interior() {
            let mut up = u.clone();
            up.set(idx, u.get(idx) + step);
            let mut dn = u.clone();
            dn.set(idx, u.get(idx) - step);
            let fd = (energy(&up, k, &field, eps, sign).unwrap() - energy(&dn, k, &field, eps, sign).unwrap()) / (2.0 * step);
            err = err.max((fd - g.get(idx)).abs());
            scale = scale.max(g.get(idx).abs());
        }
        prop_assert!(err <= 1e-5 * scale, "relative error {}", err / scale);
    }
}
