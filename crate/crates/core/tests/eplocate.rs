use epforge::eplocate::{
    asymptotic_constants, ep2_one_param, ep4_asymptotic, ep4_even, ep5_odd, ep5_odd_by_a, ep_multi_newton,
    newton_equations, verify_candidate, z_polynomial, EPCandidate, EpError, Eliminated,
};
use epforge::secular::lemma_coeffs_even;

#[test]
fn z_branches_mirror_each_other() {
    for k in 2..=12 {
        let plus = z_polynomial(k, 1);
        let minus = z_polynomial(k, -1);
        for (i, (a, b)) in plus.coeffs().iter().zip(minus.coeffs()).enumerate() {
            if i % 2 == 0 {
                assert_eq!(a, b);
            } else {
                assert_eq!(*a, -b.clone());
            }
        }
    }
}

#[test]
fn both_b_expressions_agree_on_their_branch() {
    for k in 2..=12 {
        let sol = ep4_even(k).unwrap();
        let k1 = (k - 1) as f64;
        for (sign, b_offset) in [(1, -1.0), (-1, 1.0)] {
            for &x in &sol.branch(sign).roots {
                let cubic = k1 * x.powi(3) - 2.0 * k1 * x + if sign == 1 { 1.0 } else { -1.0 };
                assert!((cubic - (b_offset - 1.0 / x)).abs() < 1e-10, "K={k} x={x}");
            }
        }
    }
}

fn contains(set: &[EPCandidate], p: &[f64], tol: f64) -> bool {
    set.iter()
        .any(|c| c.params.iter().zip(p).all(|(a, b)| (a - b).abs() < tol))
}

#[test]
fn candidates_are_mirror_symmetric() {
    for k in 2..=9 {
        let even = ep4_even(k).unwrap().candidates;
        let odd = ep5_odd(k.min(6)).unwrap().candidates;
        for set in [&even, &odd] {
            for c in set.iter().filter(|c| c.verified) {
                let neg: Vec<f64> = c.params.iter().map(|x| -x).collect();
                assert!(contains(set, &neg, 1e-9), "K={k} {:?}", c.params);
            }
        }
    }
}

#[test]
fn each_root_of_the_quartic_yields_a_verified_point() {
    for k in 2..=10 {
        let sol = ep4_even(k).unwrap();
        let roots: Vec<f64> = sol.branches.iter().flat_map(|b| b.roots.clone()).collect();
        assert_eq!(sol.candidates.len(), roots.len(), "K={k}");
        assert!(sol.candidates.iter().all(|c| c.verified && c.order == 4 && c.n == 2 * k));
        for r in roots {
            assert!(sol.candidates.iter().any(|c| (c.params[0] - r).abs() < 1e-12));
        }
    }
}

#[test]
fn eight_site_point_from_the_closed_form() {
    // Z_(+8) has the exact root x = 1, paired with B = -1 - 1/x = -2.
    let sol = ep4_even(4).unwrap();
    assert!(contains(&sol.candidates, &[1.0, -2.0], 1e-12));
    let c = sol.candidates.iter().find(|c| c.params == vec![1.0, -2.0]).unwrap();
    assert!(c.max_residual() == 0.0);
}

/// `g * Z_(+2K)(x)` with `g = 1/(K - 1)`: `x^4 - 2x^2 + g(2x + 1)`.
fn scaled_z(x: f64, g: f64) -> f64 {
    x.powi(4) - 2.0 * x * x + g * (2.0 * x + 1.0)
}

#[test]
fn asymptotic_series_leaves_fourth_order_residual() {
    let c = asymptotic_constants();
    let printed = [-0.3232233045, 0.07040776030, -0.02179855231];
    for (a, b) in c.iter().zip(printed) {
        assert!((a - b).abs() < 1e-9);
    }
    let series = |g: f64, c: [f64; 3]| -std::f64::consts::SQRT_2 + c[0] * g + c[1] * g * g + c[2] * g.powi(3);
    let mut wrong = c;
    wrong[2] += 1e-3;
    for g in [1e-1, 3e-2, 1e-2, 3e-3] {
        let r = scaled_z(series(g, c), g).abs() / g.powi(4);
        assert!(r < 0.2, "g={g}: {r}");
    }
    let g = 3e-3;
    assert!(scaled_z(series(g, wrong), g).abs() / g.powi(4) > 1.0);
}

#[test]
fn asymptotic_values_approach_the_exact_root() {
    for k in [8, 20, 50, 200] {
        let exact = ep4_even(k).unwrap().branch(1).roots[0];
        let mut last = f64::INFINITY;
        for order in 1..=3 {
            let err = (ep4_asymptotic(k, order).unwrap().value - exact).abs();
            assert!(err < last, "K={k} order={order}");
            last = err;
        }
    }
    assert!(matches!(ep4_asymptotic(5, 4), Err(EpError::Order(4))));
    assert!(ep4_asymptotic(5, 1).unwrap().g <= 1.0);
}

#[test]
fn elimination_orders_locate_the_same_points() {
    for k in 2..=5 {
        let by_b = ep5_odd(k).unwrap();
        let by_a = ep5_odd_by_a(k).unwrap();
        assert_eq!(by_b.eliminated, Eliminated::A);
        assert_eq!(by_a.eliminated, Eliminated::B);
        let vb: Vec<&EPCandidate> = by_b.candidates.iter().filter(|c| c.verified).collect();
        let va: Vec<&EPCandidate> = by_a.candidates.iter().filter(|c| c.verified).collect();
        assert_eq!(vb.len(), va.len(), "K={k}");
        for c in &vb {
            assert!(contains(&by_a.candidates, &c.params, 1e-8), "K={k} {:?}", c.params);
        }
    }
}

#[test]
fn ep2_points_are_unit() {
    for n in (4..=24).step_by(2) {
        let c = ep2_one_param(n).unwrap();
        let a: Vec<f64> = c.iter().map(|c| c.params[0]).collect();
        assert_eq!(a, vec![-1.0, 1.0], "n={n}");
        assert!(c.iter().all(|c| c.verified && c.order == 2));
    }
}

#[test]
fn newton_reproduces_the_two_parameter_closed_form() {
    let closed = ep4_even(3).unwrap().candidates;
    let report = ep_multi_newton(6, 2, None).unwrap();
    assert_eq!(report.outcomes.len(), 81);
    for c in &report.candidates {
        assert!(c.verified);
        assert!(contains(&closed, &c.params, 1e-8), "{:?}", c.params);
    }
    for c in closed.iter().filter(|c| c.params.iter().all(|x| x.abs() <= 2.0)) {
        assert!(contains(&report.candidates, &c.params, 1e-8), "{:?}", c.params);
    }
}

#[test]
fn newton_equations_are_the_trailing_coefficients() {
    let eqs = newton_equations(6, 2).unwrap();
    let (ck, ck1) = lemma_coeffs_even(3).unwrap();
    assert!(eqs.contains(&ck) && eqs.contains(&ck1));
}

#[test]
fn ordinary_points_are_not_verified() {
    let eqs = {
        let (ck, ck1) = lemma_coeffs_even(3).unwrap();
        vec![ck1, ck]
    };
    let c = verify_candidate(6, vec![0.3, 0.2], 4, &eqs).unwrap();
    assert!(!c.verified);
    assert!(c.max_residual() > 1e-3);
}

#[test]
fn small_k_is_rejected() {
    assert!(matches!(ep4_even(1), Err(EpError::SmallK(1))));
    assert!(matches!(ep5_odd(1), Err(EpError::SmallK(1))));
}

#[test]
fn seeds_of_wrong_length_are_rejected() {
    assert!(matches!(
        ep_multi_newton(7, 3, Some(vec![vec![0.0, 1.0]])),
        Err(EpError::ParamCount(2))
    ));
}
