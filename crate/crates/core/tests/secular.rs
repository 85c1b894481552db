use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use epforge::lattice::{build_hamiltonian, HamiltonianSpec};
use epforge::polyalg::MultiPoly;
use epforge::secular::{param_names, secular_low_coeffs_exact, secular_symbolic};

fn lu_det(spec: &HamiltonianSpec, e: f64) -> Complex64 {
    let h = build_hamiltonian(spec).unwrap().to_dense();
    let n = spec.n;
    let m = DMatrix::<Complex64>::identity(n, n) * Complex64::new(e, 0.0) - h;
    m.lu().determinant()
}

#[test]
fn symbolic_form_matches_numeric_determinant() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 2..=12 {
        for p in 0..=n / 2 {
            let form = secular_symbolic(n, p).unwrap();
            // Sum of |terms|, the natural scale for cancellation.
            let abs_form = MultiPoly::from_terms(
                form.full.vars(),
                form.full.terms().map(|(e, c)| (e.clone(), num_traits::Signed::abs(c))),
            );
            for _ in 0..10 {
                let e: f64 = rng.gen_range(-2.5..2.5);
                let params: Vec<f64> = (0..p).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let mut point = vec![e];
                point.extend(&params);
                let sym = form.full.eval_f64(&point);
                let scale = abs_form.eval_f64(&point.iter().map(|x| x.abs()).collect::<Vec<_>>());
                let det = lu_det(&HamiltonianSpec::new(n, params).unwrap(), e);
                assert!((sym - det.re).abs() <= 1e-10 * scale.max(1.0), "n={n} p={p}");
                assert!(det.im.abs() <= 1e-10 * scale.max(1.0));
            }
        }
    }
}

fn negate_params(poly: &MultiPoly, p: usize) -> MultiPoly {
    let mut out = poly.clone();
    for name in param_names(p) {
        let neg = -MultiPoly::var(poly.vars(), &name).unwrap();
        out = out.substitute(&name, &neg).unwrap();
    }
    out
}

#[test]
fn invariant_under_joint_parameter_reflection() {
    for n in 2..=11 {
        for p in 1..=n / 2 {
            let form = secular_symbolic(n, p).unwrap();
            assert_eq!(negate_params(&form.full, p), form.full, "n={n} p={p}");
        }
    }
}

#[test]
fn reduced_form_reconstructs_full_form() {
    for n in 2..=13 {
        let form = secular_symbolic(n, 2.min(n / 2)).unwrap();
        let mut vars = vec!["E".to_string()];
        vars.extend(form.params());
        let mut with_x = vars.clone();
        with_x.push("x".into());
        let e = MultiPoly::var(&with_x, "E").unwrap();
        let rebuilt = form
            .reduced
            .with_vars(&with_x)
            .unwrap()
            .substitute("x", &e.pow(2))
            .unwrap();
        let rebuilt = if n % 2 == 1 { &rebuilt * &e } else { rebuilt };
        assert_eq!(rebuilt.with_vars(&vars).unwrap(), form.full, "n={n}");
        assert_eq!(form.coeffs.len(), n / 2);
    }
}

#[test]
fn odd_chains_have_the_energy_factor() {
    for n in (3..=21).step_by(2) {
        let form = secular_symbolic(n, 2.min(n / 2)).unwrap();
        let parts = form.full.coeffs_in("E").unwrap();
        assert!(parts[0].is_zero(), "n={n}");
    }
}

#[test]
fn exact_series_matches_symbolic_coefficients() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for n in 2..=14 {
        let p = (n / 2).min(3);
        let form = secular_symbolic(n, p).unwrap();
        let by_power = form.full.coeffs_in("E").unwrap();
        for _ in 0..5 {
            let params: Vec<f64> = (0..p).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let spec = HamiltonianSpec::new(n, params.clone()).unwrap();
            let low = secular_low_coeffs_exact(&spec, 4.min(n + 1)).unwrap();
            for (k, v) in low.iter().enumerate() {
                let mut point = vec![0.0];
                point.extend(&params);
                let exact = by_power.get(k).map_or(0.0, |c| c.eval_exact_f64(&point));
                assert!((v - exact).abs() <= 1e-15 * exact.abs().max(1.0), "n={n} k={k}");
            }
        }
    }
}

#[test]
fn coefficients_are_even_in_energy() {
    for n in 2..=12 {
        let form = secular_symbolic(n, (n / 2).min(2)).unwrap();
        let parts = form.full.coeffs_in("E").unwrap();
        for (k, c) in parts.iter().enumerate() {
            if (n - k) % 2 == 1 {
                assert!(c.is_zero(), "n={n} power {k}");
            }
        }
    }
}
