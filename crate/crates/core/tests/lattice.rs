use nalgebra::SymmetricEigen;
use proptest::prelude::*;

use epforge::lattice::{build_hamiltonian, build_kinetic, HamiltonianSpec, LatticeError};

fn spec_strategy() -> impl Strategy<Value = HamiltonianSpec> {
    (2usize..=40)
        .prop_flat_map(|n| (Just(n), prop::collection::vec(-3.0f64..3.0, 0..=n / 2), any::<bool>()))
        .prop_map(|(n, params, shift)| HamiltonianSpec::new(n, params).unwrap().with_kinetic_shift(shift))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(5000))]

    #[test]
    fn pt_symmetric_entries(spec in spec_strategy()) {
        let h = build_hamiltonian(&spec).unwrap();
        let n = spec.n;
        for j in 0..n {
            for k in 0..n {
                prop_assert_eq!(h.get(j, k), h.get(n - 1 - j, n - 1 - k).conj());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn characteristic_polynomial_is_real(spec in spec_strategy()) {
        // det(E - H) coefficients from the three-term recurrence in complex arithmetic.
        let h = build_hamiltonian(&spec).unwrap();
        let n = spec.n;
        let mut prev = vec![num_complex::Complex64::new(0.0, 0.0); n + 1];
        let mut cur = prev.clone();
        cur[0] = 1.0.into();
        for d in &h.diag {
            let mut next = vec![num_complex::Complex64::new(0.0, 0.0); n + 1];
            for i in 0..n {
                next[i + 1] += cur[i];
                next[i] -= d * cur[i];
                next[i] -= prev[i];
            }
            prev = cur;
            cur = next;
        }
        let scale = cur.iter().map(|c| c.norm()).fold(1.0, f64::max);
        for c in &cur {
            prop_assert!(c.im.abs() <= 1e-12 * scale, "{:?}", cur);
        }
    }
}

#[test]
fn kinetic_spectrum_matches_cosine_law() {
    for n in 1..=200 {
        let t = build_kinetic(n).unwrap().to_dense();
        let mut ev: Vec<f64> = SymmetricEigen::new(t).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        for (k, e) in ev.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos();
            assert!((e - exact).abs() < 1e-10, "n = {n}, k = {k}");
        }
    }
}

#[test]
fn kinetic_shift_translates_the_diagonal() {
    let base = HamiltonianSpec::new(7, vec![0.4, -1.1]).unwrap();
    let a = build_hamiltonian(&base).unwrap();
    let b = build_hamiltonian(&base.clone().with_kinetic_shift(true)).unwrap();
    for (x, y) in a.diag.iter().zip(&b.diag) {
        assert_eq!(*y - *x, 2.0.into());
    }
}

#[test]
fn invalid_specs_are_rejected() {
    assert!(matches!(HamiltonianSpec::new(1, vec![]), Err(LatticeError::Dimension { .. })));
    assert!(matches!(
        HamiltonianSpec::new(5, vec![1.0, 1.0, 1.0]),
        Err(LatticeError::TooManyParams { .. })
    ));
    assert!(HamiltonianSpec::new(4, vec![f64::NAN]).is_err());
    assert!(HamiltonianSpec::new(4, vec![1.0]).unwrap().with_center(0.5).is_err());
    assert!(HamiltonianSpec::new(5, vec![1.0]).unwrap().with_center(0.5).is_ok());
}
