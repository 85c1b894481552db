//! Real-root isolation with Sturm sequences over exact rationals, and the
//! closed-form solution of polynomials up to degree four.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::multipoly::rational_to_f64;
use super::unipoly::UniPoly;
use super::PolyError;

/// A real root enclosed in an exact rational bracket.
#[derive(Clone, Debug, PartialEq)]
pub struct IsolatedRoot {
    pub lo: BigRational,
    pub hi: BigRational,
    /// Nearest `f64` to the bracket midpoint.
    pub refined: f64,
    pub multiplicity: u32,
}

impl IsolatedRoot {
    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn overlaps(&self, other: &IsolatedRoot) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }
}

impl Serialize for IsolatedRoot {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("IsolatedRoot", 4)?;
        st.serialize_field("lo", &self.lo.to_string())?;
        st.serialize_field("hi", &self.hi.to_string())?;
        st.serialize_field("value", &self.refined)?;
        st.serialize_field("multiplicity", &self.multiplicity)?;
        st.end()
    }
}

/// Default bracket width.
pub fn default_precision() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(10u64).pow(12))
}

/// `10^-digits` as an exact rational.
pub fn precision_digits(digits: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(10u32).pow(digits))
}

/// Sturm chain of a square-free polynomial.
pub struct SturmSequence {
    chain: Vec<UniPoly>,
}

impl SturmSequence {
    pub fn new(p: &UniPoly) -> Self {
        let mut chain = vec![p.clone(), p.derivative()];
        loop {
            let n = chain.len();
            if chain[n - 1].is_zero() {
                chain.pop();
                break;
            }
            if chain[n - 1].degree() == Some(0) {
                break;
            }
            let (_, r) = chain[n - 2].div_rem(&chain[n - 1]);
            // Positive rescaling keeps signs and tames coefficient growth.
            let r = if r.is_zero() {
                r
            } else {
                let l = r.leading().abs();
                r.scale(&-(BigRational::one() / l))
            };
            chain.push(r);
        }
        SturmSequence { chain }
    }

    fn variations_at(&self, x: &BigRational) -> usize {
        let mut count = 0;
        let mut last = 0;
        for p in &self.chain {
            let s = p.sign_at(x);
            if s != 0 {
                if last != 0 && s != last {
                    count += 1;
                }
                last = s;
            }
        }
        count
    }

    fn variations_at_infinity(&self, positive: bool) -> usize {
        let mut count = 0;
        let mut last = 0;
        for p in &self.chain {
            let d = p.degree().unwrap_or(0);
            let mut s = if p.leading().is_positive() { 1 } else { -1 };
            if !positive && d % 2 == 1 {
                s = -s;
            }
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
        count
    }

    /// Number of distinct roots in the half-open interval `(a, b]`.
    pub fn count(&self, a: &BigRational, b: &BigRational) -> usize {
        self.variations_at(a).saturating_sub(self.variations_at(b))
    }

    /// Total number of distinct real roots.
    pub fn count_all(&self) -> usize {
        self.variations_at_infinity(false)
            .saturating_sub(self.variations_at_infinity(true))
    }
}

/// Cauchy bound: every root satisfies |x| < bound.
fn root_bound(p: &UniPoly) -> BigRational {
    let lc = p.leading().abs();
    let m = p.coeffs()[..p.coeffs().len() - 1]
        .iter()
        .map(|c| c.abs() / &lc)
        .fold(BigRational::zero(), |a, b| if b > a { b } else { a });
    // Round up to a power of two to keep bisection points dyadic.
    let target = m + BigRational::one();
    let mut b = BigRational::one();
    while b <= target {
        b = &b * BigRational::from_integer(2.into());
    }
    b
}

fn half() -> BigRational {
    BigRational::new(1.into(), 2.into())
}

fn isolate_squarefree(f: &UniPoly, precision: &BigRational, multiplicity: u32) -> Vec<IsolatedRoot> {
    let sturm = SturmSequence::new(f);
    let bound = root_bound(f);
    let mut stack = vec![(-bound.clone(), bound)];
    let mut isolated = Vec::new();
    while let Some((lo, hi)) = stack.pop() {
        let n = sturm.count(&lo, &hi);
        match n {
            0 => {}
            1 => isolated.push((lo, hi)),
            _ => {
                let mid = (&lo + &hi) * half();
                stack.push((lo, mid.clone()));
                stack.push((mid, hi));
            }
        }
    }
    let mut out: Vec<IsolatedRoot> = isolated
        .into_iter()
        .map(|(lo, hi)| refine(f, &sturm, lo, hi, precision, multiplicity))
        .collect();
    out.sort_by(|a, b| a.lo.cmp(&b.lo));
    out
}

/// Narrows `(lo, hi]`, known to contain exactly one root, below `precision`.
fn refine(
    f: &UniPoly,
    sturm: &SturmSequence,
    mut lo: BigRational,
    mut hi: BigRational,
    precision: &BigRational,
    multiplicity: u32,
) -> IsolatedRoot {
    if f.sign_at(&hi) == 0 {
        lo = hi.clone();
    }
    while &(&hi - &lo) >= precision {
        let mid = (&lo + &hi) * half();
        let sm = f.sign_at(&mid);
        if sm == 0 {
            lo = mid.clone();
            hi = mid;
            break;
        }
        let left_has = if f.sign_at(&lo) != 0 {
            f.sign_at(&lo) != sm
        } else {
            sturm.count(&lo, &mid) == 1
        };
        if left_has {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mid = (&lo + &hi) * half();
    IsolatedRoot {
        refined: rational_to_f64(&mid),
        lo,
        hi,
        multiplicity,
    }
}

/// Every real root of `p`, each in a bracket narrower than `precision`, with
/// multiplicities from the square-free decomposition. Sorted ascending.
pub fn isolate_real_roots(p: &UniPoly, precision: &BigRational) -> Result<Vec<IsolatedRoot>, PolyError> {
    if p.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    if !precision.is_positive() {
        return Err(PolyError::BadPrecision);
    }
    let mut out = Vec::new();
    for (mult, f) in p.squarefree_decomposition() {
        out.extend(isolate_squarefree(&f, precision, mult));
    }
    out.sort_by(|a, b| a.lo.cmp(&b.lo));
    Ok(out)
}

/// One root of a polynomial of degree at most four.
#[derive(Clone, Debug, Serialize)]
pub struct QuarticRoot {
    pub value: Complex64,
    pub is_real: bool,
    pub multiplicity: u32,
    /// Certified bracket for real roots.
    pub bracket: Option<IsolatedRoot>,
}

fn cbrt_c(z: Complex64) -> Complex64 {
    if z.norm() == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    z.powf(1.0 / 3.0)
}

/// Roots of a monic-normalised polynomial of degree 1..=4 in closed form.
fn closed_form_roots(c: &[f64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    let lc = c[n];
    let a: Vec<f64> = c.iter().map(|x| x / lc).collect();
    let z = |x: f64| Complex64::new(x, 0.0);
    match n {
        1 => vec![z(-a[0])],
        2 => {
            let (b, cc) = (a[1], a[0]);
            let d = z(b * b - 4.0 * cc).sqrt();
            // Stable pairing.
            let q = if b >= 0.0 { -(z(b) + d) / 2.0 } else { -(z(b) - d) / 2.0 };
            if q.norm() == 0.0 {
                vec![z(0.0), z(0.0)]
            } else {
                vec![q, z(cc) / q]
            }
        }
        3 => {
            // x^3 + b x^2 + c x + d, x = t - b/3
            let (b, cc, d) = (a[2], a[1], a[0]);
            let p = cc - b * b / 3.0;
            let q = 2.0 * b * b * b / 27.0 - b * cc / 3.0 + d;
            let disc = z(q * q / 4.0 + p * p * p / 27.0).sqrt();
            let mut u = cbrt_c(-z(q) / 2.0 + disc);
            if u.norm() < 1e-300 {
                u = cbrt_c(-z(q) / 2.0 - disc);
            }
            let w = Complex64::new(-0.5, 3f64.sqrt() / 2.0);
            let mut out = Vec::with_capacity(3);
            let mut uk = u;
            for _ in 0..3 {
                let t = if uk.norm() < 1e-300 { z(0.0) } else { uk - z(p) / (3.0 * uk) };
                out.push(t - b / 3.0);
                uk *= w;
            }
            out
        }
        4 => {
            // Ferrari: x = t - b/4, t^4 + p t^2 + q t + r = 0.
            let (b, cc, d, e) = (a[3], a[2], a[1], a[0]);
            let p = cc - 3.0 * b * b / 8.0;
            let q = d - b * cc / 2.0 + b * b * b / 8.0;
            let r = e - b * d / 4.0 + b * b * cc / 16.0 - 3.0 * b.powi(4) / 256.0;
            let shift = -b / 4.0;
            let ts: Vec<Complex64> = if q.abs() < 1e-14 * (1.0 + p.abs() + r.abs()) {
                // biquadratic
                let s = closed_form_roots(&[r, p, 1.0]);
                s.iter().flat_map(|&u| [u.sqrt(), -u.sqrt()]).collect()
            } else {
                // resolvent cubic 8m^3 + 8p m^2 + (2p^2 - 8r) m - q^2 = 0
                let ms = closed_form_roots(&[-q * q, 2.0 * p * p - 8.0 * r, 8.0 * p, 8.0]);
                let m = ms
                    .into_iter()
                    .max_by(|x, y| x.norm().partial_cmp(&y.norm()).unwrap())
                    .unwrap();
                let s = (2.0 * m).sqrt();
                let mut v = Vec::with_capacity(4);
                for sign in [1.0, -1.0] {
                    // t^2 + sign*s*t + (p/2 + m - sign*q/(2s)) = 0
                    let c0 = z(p / 2.0) + m - sign * z(q) / (2.0 * s);
                    let bb = sign * s;
                    let disc = (bb * bb - 4.0 * c0).sqrt();
                    v.push((-bb + disc) / 2.0);
                    v.push((-bb - disc) / 2.0);
                }
                v
            };
            ts.into_iter().map(|t| t + shift).collect()
        }
        _ => unreachable!("degree checked by caller"),
    }
}

fn newton_polish(p: &UniPoly, mut z: Complex64) -> Complex64 {
    let dp = p.derivative();
    for _ in 0..50 {
        let f = p.eval_complex(z);
        let d = dp.eval_complex(z);
        if d.norm() == 0.0 {
            break;
        }
        let step = f / d;
        z -= step;
        if step.norm() <= 1e-16 * (1.0 + z.norm()) {
            break;
        }
    }
    z
}

/// All roots of a polynomial of degree 1..=4 via the closed-form formulas.
///
/// Each square-free factor is solved separately so that repeated roots keep
/// exact multiplicities. Real roots are identified by an exact Sturm count and
/// returned with certified brackets at `precision`.
pub fn solve_quartic_exact(p: &UniPoly, precision: &BigRational) -> Result<Vec<QuarticRoot>, PolyError> {
    match p.degree() {
        Some(d) if (1..=4).contains(&d) => {}
        _ => return Err(PolyError::QuarticDegree(p.degree().unwrap_or(0))),
    }
    let mut out = Vec::new();
    for (mult, f) in p.squarefree_decomposition() {
        let coeffs = f.coeffs_f64();
        let mut roots: Vec<Complex64> = closed_form_roots(&coeffs)
            .into_iter()
            .map(|z| newton_polish(&f, z))
            .collect();
        let sturm = SturmSequence::new(&f);
        let n_real = sturm.count_all();
        roots.sort_by(|a, b| a.im.abs().partial_cmp(&b.im.abs()).unwrap());
        let brackets = isolate_squarefree(&f, precision, mult);
        debug_assert_eq!(brackets.len(), n_real);
        let mut real_vals: Vec<f64> = roots[..n_real].iter().map(|z| z.re).collect();
        real_vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (v, br) in real_vals.into_iter().zip(brackets) {
            out.push(QuarticRoot {
                value: Complex64::new(v, 0.0),
                is_real: true,
                multiplicity: mult,
                bracket: Some(br),
            });
        }
        for z in &roots[n_real..] {
            out.push(QuarticRoot {
                value: *z,
                is_real: false,
                multiplicity: mult,
                bracket: None,
            });
        }
    }
    out.sort_by(|a, b| {
        (!a.is_real)
            .cmp(&!b.is_real)
            .then(a.value.re.partial_cmp(&b.value.re).unwrap())
            .then(a.value.im.partial_cmp(&b.value.im).unwrap())
    });
    Ok(out)
}
