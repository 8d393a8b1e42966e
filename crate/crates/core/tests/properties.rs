use escobar::cli::Expr;
use escobar::functionals::{
    boundary_normalize, escobar_quotient, h_min, lambda_from_nu, nu_lambda_bridge, quotient_with_m, w_functional,
    Extended, LambdaFromNu,
};
use escobar::geometry::{
    conformal_change, conformal_law_residual, gromov_mean_curvature, weighted_scalar_curvature, Grid, MeasureSpace,
    ScalarField,
};
use escobar::minimizer::{geomspace, minimize_quotient, random_smooth_field, MinimizerConfig};
use proptest::prelude::*;

fn space(m: f64, phi: impl Fn(&[f64]) -> f64) -> MeasureSpace {
    let grid = Grid::half_torus(&[6, 6, 7], &[1.0, 1.0, 1.0]).unwrap();
    MeasureSpace::flat_based(grid, m, phi).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn quotient_is_homogeneous(m in 0.2f64..3.0, a in -1.0f64..1.0, seed in 0u64..1000, c in 1e-3f64..1e3, flip in any::<bool>()) {
        let s = space(m, |x| a * x[2]);
        let w = random_smooth_field(&s, seed);
        let c = if flip { -c } else { c };
        let q = escobar_quotient(&s, &w).unwrap().q;
        let qc = escobar_quotient(&s, &w.scaled(c)).unwrap().q;
        prop_assert!(close(q, qc, 1e-12), "{q} vs {qc}");
    }

    #[test]
    fn normalization_makes_boundary_norm_one(m in 0.2f64..3.0, seed in 0u64..1000, c in 1e-2f64..1e2) {
        let s = space(m, |x| 0.5 * x[2]);
        let w = random_smooth_field(&s, seed).scaled(c);
        let b = escobar_quotient(&s, &boundary_normalize(&s, &w).unwrap()).unwrap();
        prop_assert!((b.boundary_norm - 1.0).abs() < 1e-12);
        prop_assert!(close(b.q, escobar_quotient(&s, &w).unwrap().q, 1e-12));
    }

    #[test]
    fn quotient_is_continuous_in_m(m in 0.2f64..3.0, seed in 0u64..1000) {
        let s = space(m, |x| 0.3 * x[2]);
        let w = random_smooth_field(&s, seed);
        let lo = quotient_with_m(&s, m - 1e-6, &w).unwrap().q;
        let hi = quotient_with_m(&s, m + 1e-6, &w).unwrap().q;
        prop_assert!((lo - hi).abs() <= 1e-4 * lo.abs().max(1.0), "{lo} vs {hi}");
    }

    #[test]
    fn conformal_changes_compose(m in 0.2f64..3.0, s1 in 0u64..1000, s2 in 0u64..1000, seed in 0u64..1000) {
        let s = space(m, |x| 0.2 * x[2]);
        let a = random_smooth_field(&s, s1).scaled(0.3);
        let b = random_smooth_field(&s, s2).scaled(0.3);
        let w = random_smooth_field(&s, seed);
        let two_steps = conformal_change(&conformal_change(&s, &a).unwrap(), &b).unwrap();
        let one_step = conformal_change(&s, &a.add(&b)).unwrap();
        let q2 = escobar_quotient(&two_steps, &w).unwrap().q;
        let q1 = escobar_quotient(&one_step, &w).unwrap().q;
        prop_assert!(close(q1, q2, 1e-12));
    }

    #[test]
    fn constant_conformal_factor_is_exact(m in 0.2f64..3.0, c in -2.0f64..2.0, seed in 0u64..1000) {
        let s = space(m, |x| 0.4 * x[2]);
        let sigma = ScalarField::constant(s.grid(), c);
        let w = random_smooth_field(&s, seed);
        prop_assert!(conformal_law_residual(&s, &sigma, &w).unwrap() < 1e-12);
        prop_assert_eq!(conformal_law_residual(&s, &ScalarField::zeros(s.grid()), &w).unwrap(), 0.0);
    }

    #[test]
    fn w_conformal_law_is_exact(m in 0.1f64..3.0, tau in 0.01f64..100.0, seed in 0u64..1000) {
        let s = space(m, |x| 0.4 * x[2]);
        let sigma = random_smooth_field(&s, seed + 1).scaled(0.5);
        let w = random_smooth_field(&s, seed);
        let lifted = ScalarField::new(w.values.iter().zip(&sigma.values).map(|(v, g)| v * (0.5 * g).exp()).collect());
        let lhs = w_functional(&conformal_change(&s, &sigma).unwrap(), &w, tau).unwrap();
        let rhs = w_functional(&s, &lifted, tau).unwrap();
        prop_assert!(close(lhs, rhs, 1e-11));
    }

    #[test]
    fn curvature_splits_into_linear_and_quadratic_parts(m in 0.2f64..3.0, a in -2.0f64..2.0, b in -1.0f64..1.0) {
        let phi = move |x: &[f64]| a * x[2] * x[2] + b * (std::f64::consts::TAU * x[0]).sin();
        let r1 = weighted_scalar_curvature(&space(m, phi)).unwrap().values;
        let r2 = weighted_scalar_curvature(&space(m, |x| 2.0 * phi(x))).unwrap().values;
        let r3 = weighted_scalar_curvature(&space(m, |x| 3.0 * phi(x))).unwrap().values;
        // R(kφ) = k·L + k²·Q, so R(3φ) − 3R(2φ) + 3R(φ) = 0
        for i in 0..r1.len() {
            prop_assert!((r3[i] - 3.0 * r2[i] + 3.0 * r1[i]).abs() < 1e-9 * (1.0 + r3[i].abs()));
        }
    }

    #[test]
    fn mean_curvature_is_additive(m in 0.2f64..3.0, a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let f = move |x: &[f64]| a * x[2] * x[2];
        let g = move |x: &[f64]| b * x[2] + 0.3 * x[0].cos();
        let hf = gromov_mean_curvature(&space(m, f)).unwrap();
        let hg = gromov_mean_curvature(&space(m, g)).unwrap();
        let hs = gromov_mean_curvature(&space(m, |x| f(x) + g(x))).unwrap();
        for k in 0..hs.faces.len() {
            for i in 0..hs.faces[k].len() {
                prop_assert!((hs.faces[k][i] - hf.faces[k][i] - hg.faces[k][i]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn lateral_potential_has_no_mean_curvature(m in 0.2f64..3.0, b in -2.0f64..2.0) {
        let h = gromov_mean_curvature(&space(m, move |x| b * (std::f64::consts::TAU * x[1]).cos())).unwrap();
        prop_assert!(h.faces.iter().flatten().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn bridge_round_trips(lam in 1e-3f64..1e3, m in 0.05f64..5.0, n in 3usize..8) {
        let nu = nu_lambda_bridge(Extended::Finite(lam), m, n).unwrap();
        prop_assert!(nu.finite().unwrap() > -1.0);
        match lambda_from_nu(nu, m, n).unwrap() {
            LambdaFromNu::Exact(back) => prop_assert!(close(back, lam, 1e-12)),
            LambdaFromNu::Negative => prop_assert!(false),
        }
    }

    #[test]
    fn h_min_is_a_lower_bound(p in 0.05f64..4.0, q in 0.05f64..4.0, b in 0.01f64..100.0, c in 0.01f64..100.0, t in 1e-3f64..1e3) {
        let (tau0, min) = h_min(p, q, b, c).unwrap();
        let h = |t: f64| b * t.powf(p) + c * t.powf(-q);
        prop_assert!(close(h(tau0), min, 1e-12));
        prop_assert!(h(t) >= min * (1.0 - 1e-12));
    }

    #[test]
    fn expressions_match_direct_evaluation(a in -5.0f64..5.0, b in -5.0f64..5.0, x in -3.0f64..3.0, t in 0.0f64..3.0) {
        let src = format!("{a}*x1^2 - ({b})*sin(t) + exp(-t)/2");
        let e = Expr::parse(&src, 3).unwrap();
        let direct = a * x * x - b * t.sin() + (-t).exp() / 2.0;
        prop_assert!(close(e.eval(&[x, 0.0, t]), direct, 1e-14));
    }

    #[test]
    fn geomspace_is_monotone(lo in 1e-6f64..1.0, ratio in 1.5f64..1e4, count in 2usize..40) {
        let v = geomspace(lo, lo * ratio, count);
        prop_assert_eq!(v.len(), count);
        prop_assert!(close(v[0], lo, 1e-14) && close(v[count - 1], lo * ratio, 1e-12));
        prop_assert!(v.windows(2).all(|w| w[1] > w[0]));
    }
}

#[test]
fn descent_trace_is_non_increasing() {
    let grid = Grid::half_torus(&[8, 8, 9], &[1.0, 1.0, 1.0]).unwrap();
    let s = MeasureSpace::flat_based(grid, 0.5, |x| 2.0 * x[2]).unwrap();
    let r = minimize_quotient(&s, &MinimizerConfig { restarts: 2, ..Default::default() }).unwrap();
    assert!(r.converged);
    for w in r.trace.windows(2) {
        assert!(w[1].value <= w[0].value + 1e-12 * w[0].value.abs(), "{} → {}", w[0].value, w[1].value);
    }
    assert!(r.field.values.iter().all(|v| *v >= 0.0));
    let b = escobar_quotient(&s, &r.field).unwrap();
    assert!((b.boundary_norm - 1.0).abs() < 1e-10);
    assert_eq!(b.q, r.lambda_estimate);
}

#[test]
fn constant_conformal_factor_leaves_the_minimum_unchanged() {
    let grid = Grid::half_torus(&[8, 8, 9], &[1.0, 1.0, 1.0]).unwrap();
    let s = MeasureSpace::flat_based(grid, 0.5, |x| 2.0 * x[2]).unwrap();
    let cfg = MinimizerConfig { restarts: 2, ..Default::default() };
    let a = minimize_quotient(&s, &cfg).unwrap();
    let changed = conformal_change(&s, &ScalarField::constant(s.grid(), 0.7)).unwrap();
    let b = minimize_quotient(&changed, &cfg).unwrap();
    assert!((a.lambda_estimate - b.lambda_estimate).abs() < 1e-9 * a.lambda_estimate.abs(), "{} vs {}", a.lambda_estimate, b.lambda_estimate);
}
