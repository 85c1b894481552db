use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use epforge::polyalg::{
    default_precision, isolate_real_roots, resultant, solve_quartic_exact, MultiPoly, SturmSequence, UniPoly,
};

const XYZ: [&str; 3] = ["x", "y", "z"];

fn poly_strategy() -> impl Strategy<Value = MultiPoly> {
    prop::collection::vec(((0u32..3, 0u32..3, 0u32..3), -20i64..=20), 0..6).prop_map(|terms| {
        MultiPoly::from_terms(
            &XYZ,
            terms.into_iter().map(|((a, b, c), k)| (vec![a, b, c], BigInt::from(k))),
        )
    })
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ring_axioms(a in poly_strategy(), b in poly_strategy(), c in poly_strategy()) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn evaluation_is_a_homomorphism(a in poly_strategy(), b in poly_strategy(),
                                    x in -5i64..5, y in -5i64..5, z in -5i64..5) {
        let pt = [q(x), q(y), q(z)];
        prop_assert_eq!((&a * &b).eval_rational(&pt), a.eval_rational(&pt) * b.eval_rational(&pt));
        prop_assert_eq!((&a - &b).eval_rational(&pt), a.eval_rational(&pt) - b.eval_rational(&pt));
    }

    #[test]
    fn display_parse_round_trip(a in poly_strategy()) {
        let back = MultiPoly::parse_with_vars(&a.to_string(), &XYZ).unwrap();
        prop_assert_eq!(back, a);
    }
}

/// Sylvester determinant by exact Gaussian elimination.
fn sylvester_det(p: &[i64], r: &[i64]) -> BigRational {
    let (m, n) = (p.len() - 1, r.len() - 1);
    let size = m + n;
    let mut mat = vec![vec![BigRational::zero(); size]; size];
    for r in 0..n {
        for (i, c) in p.iter().rev().enumerate() {
            mat[r][r + i] = q(*c);
        }
    }
    for row in 0..m {
        for (i, c) in r.iter().rev().enumerate() {
            mat[n + row][row + i] = q(*c);
        }
    }
    let mut det = BigRational::one();
    for col in 0..size {
        let Some(piv) = (col..size).find(|&r| !mat[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if piv != col {
            mat.swap(piv, col);
            det = -det;
        }
        det *= mat[col][col].clone();
        for r in col + 1..size {
            let f = &mat[r][col] / &mat[col][col];
            for c in col..size {
                let v = &f * &mat[col][c];
                mat[r][c] -= v;
            }
        }
    }
    det
}

fn uni_in_x(coeffs: &[i64]) -> MultiPoly {
    MultiPoly::from_terms(
        &["x"],
        coeffs.iter().enumerate().map(|(k, c)| (vec![k as u32], BigInt::from(*c))),
    )
}

fn random_coeffs(rng: &mut ChaCha8Rng, degrees: std::ops::RangeInclusive<usize>) -> Vec<i64> {
    let deg = rng.gen_range(degrees);
    let mut c: Vec<i64> = (0..=deg).map(|_| rng.gen_range(-6..=6)).collect();
    if c[deg] == 0 {
        c[deg] = 1;
    }
    c
}

#[test]
fn resultant_matches_sylvester_determinant() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..300 {
        let p = random_coeffs(&mut rng, 1..=5);
        let qc = random_coeffs(&mut rng, 1..=5);
        let r = resultant(&uni_in_x(&p), &uni_in_x(&qc), "x").unwrap();
        assert!(r.is_constant());
        assert_eq!(BigRational::from_integer(r.constant_term()), sylvester_det(&p, &qc), "{p:?} {qc:?}");
    }
}

#[test]
fn resultant_specialises_with_the_parameter() {
    let vars = ["x", "y"];
    let p = MultiPoly::parse_with_vars("x^3*y - 2*x^2 + y^2*x + 3", &vars).unwrap();
    let qp = MultiPoly::parse_with_vars("x^2 + y*x - 5*y + 1", &vars).unwrap();
    let r = resultant(&p, &qp, "x").unwrap();
    for y in [-3i64, -1, 1, 2, 4] {
        let ps = p.substitute_int("y", y).unwrap().with_vars(&["x"]).unwrap();
        let qs = qp.substitute_int("y", y).unwrap().with_vars(&["x"]).unwrap();
        let pc: Vec<i64> = ps.to_unipoly("x").unwrap().primitive_int_raw();
        let qc: Vec<i64> = qs.to_unipoly("x").unwrap().primitive_int_raw();
        let expected = sylvester_det(&pc, &qc);
        let got = r.substitute_int("y", y).unwrap().constant_term();
        assert_eq!(BigRational::from_integer(got), expected, "y = {y}");
    }
}

trait RawInts {
    fn primitive_int_raw(&self) -> Vec<i64>;
}

impl RawInts for UniPoly {
    fn primitive_int_raw(&self) -> Vec<i64> {
        self.coeffs()
            .iter()
            .map(|c| {
                assert!(c.is_integer());
                i64::try_from(c.to_integer()).unwrap()
            })
            .collect()
    }
}

#[test]
fn planted_common_factor_gives_zero_resultant() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let f = random_coeffs(&mut rng, 1..=2);
        let g = random_coeffs(&mut rng, 1..=3);
        let h = random_coeffs(&mut rng, 1..=3);
        let (f, g, h) = (uni_in_x(&f), uni_in_x(&g), uni_in_x(&h));
        assert!(resultant(&(&f * &g), &(&f * &h), "x").unwrap().is_zero());
    }
}

#[test]
fn resultant_vanishes_iff_gcd_is_nonconstant() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..300 {
        let p = random_coeffs(&mut rng, 1..=4);
        let qc = random_coeffs(&mut rng, 1..=4);
        let zero = resultant(&uni_in_x(&p), &uni_in_x(&qc), "x").unwrap().is_zero();
        let g = UniPoly::from_i64(&p).gcd(&UniPoly::from_i64(&qc));
        assert_eq!(zero, g.degree().unwrap_or(0) > 0, "{p:?} {qc:?}");
    }
}

#[test]
fn planted_factor_in_two_variables() {
    let vars = ["x", "y"];
    let f = MultiPoly::parse_with_vars("x*y - 2*x + y^2 + 1", &vars).unwrap();
    let g = MultiPoly::parse_with_vars("x^2 - 3*y", &vars).unwrap();
    let h = MultiPoly::parse_with_vars("x + y^3 - 1", &vars).unwrap();
    assert!(resultant(&(&f * &g), &(&f * &h), "x").unwrap().is_zero());
    assert!(!resultant(&g, &h, "x").unwrap().is_zero());
}

#[test]
fn quartic_solver_agrees_with_sturm_isolation() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let prec = default_precision();
    for _ in 0..1000 {
        let mut c: Vec<i64> = (0..5).map(|_| rng.gen_range(-9..=9)).collect();
        if c[4] == 0 {
            c[4] = rng.gen_range(1..=9);
        }
        let p = UniPoly::from_i64(&c);
        let iso = isolate_real_roots(&p, &prec).unwrap();
        let real: Vec<_> = solve_quartic_exact(&p, &prec)
            .unwrap()
            .into_iter()
            .filter(|r| r.is_real)
            .collect();
        assert_eq!(iso.len(), real.len(), "{c:?}");
        assert_eq!(SturmSequence::new(&p.squarefree_part()).count_all(), iso.len(), "{c:?}");
        for (a, b) in iso.iter().zip(&real) {
            let br = b.bracket.as_ref().unwrap();
            assert!(a.overlaps(br), "{c:?}");
            assert_eq!(a.multiplicity, b.multiplicity);
            assert!((a.refined - b.value.re).abs() < 1e-9 * (1.0 + a.refined.abs()), "{c:?}");
        }
    }
}

#[test]
fn repeated_roots_keep_multiplicity() {
    // (x - 1)^2 (x + 2)^2
    let p = &(&UniPoly::from_i64(&[-1, 1]) * &UniPoly::from_i64(&[-1, 1]))
        * &(&UniPoly::from_i64(&[2, 1]) * &UniPoly::from_i64(&[2, 1]));
    let roots = isolate_real_roots(&p, &default_precision()).unwrap();
    assert_eq!(roots.len(), 2);
    assert!(roots.iter().all(|r| r.multiplicity == 2));
    assert!(roots[0].contains(&q(-2)) && roots[1].contains(&q(1)));
}
