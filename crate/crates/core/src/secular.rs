//! Exact secular polynomials `det(E*I - H)` of the Hamiltonian family.
//!
//! The determinant is produced by the three-term recurrence
//! `p_k = (E - d_k) p_{k-1} - p_{k-2}` with Gaussian-integer coefficients
//! (the diagonal entries are `-i*A`, `-i*B`, ..., `+i*B`, `+i*A`). Imaginary
//! parts must cancel; that is checked, not assumed.

use serde::Serialize;

use crate::polyalg::{MultiPoly, PolyError};

/// Largest dimension handled symbolically.
pub const MAX_SYMBOLIC_N: usize = 64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SecularError {
    #[error("N = {0} outside the symbolic range 2..=64")]
    DimensionRange(usize),
    #[error("{p} parameters exceed floor(N/2) for N = {n}")]
    TooManyParams { n: usize, p: usize },
    #[error("closed-form coefficients need K >= 2, got {0}")]
    SmallK(usize),
    #[error("no printed coefficient set for N = {n}, p = {p}")]
    UnsupportedAppendix { n: usize, p: usize },
    #[error("imaginary part of the secular polynomial did not cancel")]
    ImaginaryResidue,
    #[error("closed-form grouping did not divide exactly")]
    NonIntegral,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Name of the `k`-th parameter, counted from the ends of the diagonal.
/// `E` is reserved for the energy, so the sequence runs A, B, C, D, F, G, ...
pub fn param_name(k: usize) -> String {
    const LETTERS: &[u8] = b"ABCDFGHIJKLMNOPQRSTUVWYZ";
    match LETTERS.get(k) {
        Some(&c) => (c as char).to_string(),
        None => format!("P{k}"),
    }
}

pub fn param_names(p: usize) -> Vec<String> {
    (0..p).map(param_name).collect()
}

/// Secular polynomial in full and reduced form.
///
/// `full` lives in `(E, params...)`. `reduced` lives in `(x, params...)` with
/// `full = reduced(E^2)` for even N and `full = E * reduced(E^2)` for odd N.
/// `coeffs[j-1]` is `c_j`, the coefficient of `x^(K-j)` in `reduced`,
/// expressed over the parameters only.
#[derive(Clone, Debug, Serialize)]
pub struct SecularForm {
    pub n: usize,
    pub param_count: usize,
    pub full: MultiPoly,
    pub reduced: MultiPoly,
    pub coeffs: Vec<MultiPoly>,
}

impl SecularForm {
    /// K = floor(N/2), the degree of the reduced polynomial.
    pub fn k(&self) -> usize {
        self.n / 2
    }

    /// `c_j` for `0 <= j <= K`, with `c_0 = 1`.
    pub fn c(&self, j: usize) -> MultiPoly {
        if j == 0 {
            MultiPoly::one(&param_names(self.param_count))
        } else {
            self.coeffs[j - 1].clone()
        }
    }

    pub fn params(&self) -> Vec<String> {
        param_names(self.param_count)
    }

    /// The layout `E^N + (...)*E^(N-2) + ...`.
    pub fn to_text(&self) -> String {
        self.full
            .display_collected("E")
            .expect("full form is declared over E")
    }

    /// Numeric values `c_1..c_K` at a parameter point.
    pub fn coeff_values(&self, params: &[f64]) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.eval_f64(params)).collect()
    }
}

struct Gaussian {
    re: MultiPoly,
    im: MultiPoly,
}

/// Exact `det(E*I - H)` for the `p`-parameter family at dimension `n`.
pub fn secular_symbolic(n: usize, p: usize) -> Result<SecularForm, SecularError> {
    if !(2..=MAX_SYMBOLIC_N).contains(&n) {
        return Err(SecularError::DimensionRange(n));
    }
    if p > n / 2 {
        return Err(SecularError::TooManyParams { n, p });
    }
    let names = param_names(p);
    let mut vars = vec!["E".to_string()];
    vars.extend(names.iter().cloned());
    let e = MultiPoly::var(&vars, "E")?;
    let pvars: Vec<MultiPoly> = names
        .iter()
        .map(|v| MultiPoly::var(&vars, v))
        .collect::<Result<_, _>>()?;
    let zero = MultiPoly::zero(&vars);

    let mut prev = Gaussian {
        re: zero.clone(),
        im: zero.clone(),
    };
    let mut cur = Gaussian {
        re: MultiPoly::one(&vars),
        im: zero.clone(),
    };
    for site in 0..n {
        // d = -i a on the left end, +i a on the right end, else 0.
        let (a, left) = if site < p {
            (Some(&pvars[site]), true)
        } else if site >= n - p {
            (Some(&pvars[n - 1 - site]), false)
        } else {
            (None, true)
        };
        let mut re = &e * &cur.re;
        let mut im = &e * &cur.im;
        if let Some(a) = a {
            let a_im = a * &cur.im;
            let a_re = a * &cur.re;
            if left {
                // (E + i a)(R + i I)
                re = &re - &a_im;
                im = &im + &a_re;
            } else {
                // (E - i a)(R + i I)
                re = &re + &a_im;
                im = &im - &a_re;
            }
        }
        let next = Gaussian {
            re: &re - &prev.re,
            im: &im - &prev.im,
        };
        prev = cur;
        cur = next;
    }
    if !cur.im.is_zero() {
        return Err(SecularError::ImaginaryResidue);
    }
    let full = cur.re;
    let reduced_e = if n % 2 == 1 {
        full.divide_by_var_power("E", 1)?
    } else {
        full.clone()
    };
    let reduced = reduced_e.compress_even("E", "x")?;
    let k = n / 2;
    let xc = reduced.coeffs_in("x")?;
    let mut coeffs = Vec::with_capacity(k);
    for j in 1..=k {
        let c = xc.get(k - j).cloned().unwrap_or_else(|| MultiPoly::zero(reduced.vars()));
        coeffs.push(c.with_vars(&names)?);
    }
    Ok(SecularForm {
        n,
        param_count: p,
        full,
        reduced,
        coeffs,
    })
}

fn ab() -> (MultiPoly, MultiPoly, MultiPoly) {
    let vars = ["A", "B"];
    let a = MultiPoly::var(&vars, "A").unwrap();
    let b = MultiPoly::var(&vars, "B").unwrap();
    let one = MultiPoly::one(&vars);
    (a, b, one)
}

fn int(c: i64) -> MultiPoly {
    MultiPoly::constant(&["A", "B"], c)
}

fn sign_k(k: usize, p: MultiPoly) -> MultiPoly {
    if k % 2 == 1 {
        -p
    } else {
        p
    }
}

/// Closed forms of `(c_K, c_{K-1})` at even N = 2K for the two-parameter family.
pub fn lemma_coeffs_even(k: usize) -> Result<(MultiPoly, MultiPoly), SecularError> {
    if k < 2 {
        return Err(SecularError::SmallK(k));
    }
    let (a, b, one) = ab();
    let kk = k as i64;
    let s = (&one + &(&a * &b)).pow(2);
    let a2 = a.pow(2);
    let ck = &s - &a2;
    // 2 * (-1)^K c_{K-1}
    let twice = &(&(&(&int(2) * &b.pow(2)) + &(&int(kk * (kk - 1)) * &a2)) - &int(2 * (2 * kk - 1)))
        - &(&int((kk - 1) * (kk - 2)) * &s);
    let ck1 = twice
        .div_exact(&int(2))
        .ok_or(SecularError::NonIntegral)?;
    Ok((sign_k(k, ck), sign_k(k, ck1)))
}

/// Closed forms of `(c_K, c_{K-1})` at odd N = 2K + 1 for the two-parameter family.
pub fn lemma_coeffs_odd(k: usize) -> Result<(MultiPoly, MultiPoly), SecularError> {
    if k < 2 {
        return Err(SecularError::SmallK(k));
    }
    let (a, b, one) = ab();
    let kk = k as i64;
    let s = (&one + &(&a * &b)).pow(2);
    let a2 = a.pow(2);
    let ck = &(&(&int(kk - 1) * &s) + &int(2)) - &(&int(kk) * &a2);
    // 6 * (-1)^K c_{K-1}
    let six = &(&(&(&int(6 * (kk - 1)) * &b.pow(2)) + &(&int((kk + 1) * kk * (kk - 1)) * &a2))
        - &int(6 * kk * kk))
        - &(&int(kk * (kk - 1) * (kk - 2)) * &s);
    let ck1 = six.div_exact(&int(6)).ok_or(SecularError::NonIntegral)?;
    Ok((sign_k(k, ck), sign_k(k, ck1)))
}

/// Coefficient list of a three- or four-parameter model, plus the split
/// `c_j = k0 + k1*D + k2*D^2` for the four-parameter case.
#[derive(Clone, Debug, Serialize)]
pub struct AppendixCoeffs {
    pub n: usize,
    pub param_count: usize,
    pub coeffs: Vec<MultiPoly>,
    pub d_split: Option<Vec<[MultiPoly; 3]>>,
}

pub fn appendix_coeffs(n: usize, p: usize) -> Result<AppendixCoeffs, SecularError> {
    if !matches!((n, p), (7, 3) | (8, 3) | (8, 4)) {
        return Err(SecularError::UnsupportedAppendix { n, p });
    }
    let form = secular_symbolic(n, p)?;
    let d_split = if p == 4 {
        let abc = param_names(3);
        let mut split = Vec::with_capacity(form.coeffs.len());
        for c in &form.coeffs {
            let parts = c.coeffs_in("D")?;
            if parts.len() > 3 {
                return Err(SecularError::NonIntegral);
            }
            let get = |i: usize| -> Result<MultiPoly, SecularError> {
                match parts.get(i) {
                    Some(q) => Ok(q.with_vars(&abc)?),
                    None => Ok(MultiPoly::zero(&abc)),
                }
            };
            split.push([get(0)?, get(1)?, get(2)?]);
        }
        Some(split)
    } else {
        None
    };
    Ok(AppendixCoeffs {
        n,
        param_count: p,
        coeffs: form.coeffs,
        d_split,
    })
}

/// Numeric `det(E*I - H)` and its derivative via the recurrence, for any N.
pub fn secular_value(
    diag: &[num_complex::Complex64],
    e: num_complex::Complex64,
) -> (num_complex::Complex64, num_complex::Complex64) {
    use num_complex::Complex64;
    let mut p_prev = Complex64::new(0.0, 0.0);
    let mut p = Complex64::new(1.0, 0.0);
    let mut d_prev = Complex64::new(0.0, 0.0);
    let mut d = Complex64::new(0.0, 0.0);
    for &dk in diag {
        let np = (e - dk) * p - p_prev;
        let nd = p + (e - dk) * d - d_prev;
        p_prev = p;
        p = np;
        d_prev = d;
        d = nd;
    }
    (p, d)
}

/// Exact coefficients of `E^0 .. E^(terms-1)` of `det(E*I - H)` at a numeric
/// parameter point, rounded once to `f64`.
///
/// Works for any N: the recurrence runs on power series truncated at `terms`,
/// over Gaussian rationals built from the exact binary values of the inputs.
pub fn secular_low_coeffs_exact(
    spec: &crate::lattice::HamiltonianSpec,
    terms: usize,
) -> Result<Vec<f64>, crate::lattice::LatticeError> {
    use num_rational::BigRational;
    use num_traits::Zero;

    spec.validate()?;
    let q = |x: f64| BigRational::from_float(x).expect("finite");
    let zero = BigRational::zero();
    let series = |re: Vec<BigRational>, im: Vec<BigRational>| (re, im);
    let mut prev = series(vec![zero.clone(); terms], vec![zero.clone(); terms]);
    let mut cur = {
        let mut re = vec![zero.clone(); terms];
        if terms > 0 {
            re[0] = BigRational::from_integer(1.into());
        }
        series(re, vec![zero.clone(); terms])
    };
    let diag = spec.diagonal();
    for d in diag {
        let (dr, di) = (q(d.re), q(d.im));
        let mut re = vec![zero.clone(); terms];
        let mut im = vec![zero.clone(); terms];
        for k in 0..terms {
            // E * cur
            if k > 0 {
                re[k] += &cur.0[k - 1];
                im[k] += &cur.1[k - 1];
            }
            // - d * cur, d = dr + i di
            re[k] -= &dr * &cur.0[k] - &di * &cur.1[k];
            im[k] -= &dr * &cur.1[k] + &di * &cur.0[k];
            re[k] -= &prev.0[k];
            im[k] -= &prev.1[k];
        }
        prev = cur;
        cur = (re, im);
    }
    Ok(cur.0.iter().map(crate::polyalg::rational_to_f64).collect())
}
