//! Exceptional points of maximal order at the band centre `E = 0`.
//!
//! An EP of order M at E = 0 makes the reduced secular polynomial divisible by
//! `x^floor(M/2)`, so the locating equations are the trailing coefficients
//! `c_{K-m+1} = ... = c_K = 0`. Two-parameter cases are solved in closed form
//! (even N) or by elimination (odd N); larger parameter counts use damped
//! Newton iteration from a grid of seeds.

use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::lattice::{HamiltonianSpec, LatticeError};
use crate::polyalg::{
    isolate_real_roots, precision_digits, resultant, IsolatedRoot, MultiPoly, PolyError, UniPoly,
};
use crate::secular::{
    appendix_coeffs, lemma_coeffs_even, lemma_coeffs_odd, param_names, secular_low_coeffs_exact,
    secular_symbolic, SecularError, MAX_SYMBOLIC_N,
};

/// Threshold on residuals for a candidate to count as verified.
pub const VERIFY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EpError {
    #[error("N = {0} has the wrong parity for this construction")]
    Parity(usize),
    #[error("K = {0} is too small (need K >= 2)")]
    SmallK(usize),
    #[error("expansion order {0} not available (use 1, 2 or 3)")]
    Order(usize),
    #[error("both elimination orders collapsed to the zero polynomial")]
    DegenerateElimination,
    #[error("{0} parameters not supported by the Newton search (use 1..=4)")]
    ParamCount(usize),
    #[error(transparent)]
    Secular(#[from] SecularError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// A located exceptional point with its verification data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EPCandidate {
    pub n: usize,
    pub params: Vec<f64>,
    pub order: usize,
    /// Defining equations evaluated exactly at `params`.
    pub residuals: Vec<f64>,
    /// Low-order coefficients of `det(E - H)` that must vanish, from an
    /// independent exact recurrence.
    pub divisibility_residuals: Vec<f64>,
    pub verified: bool,
    /// Set when a trailing parameter vanishes, so the point already belongs
    /// to a family with fewer parameters.
    #[serde(default)]
    pub lower_dimensional: bool,
}

impl EPCandidate {
    pub fn max_residual(&self) -> f64 {
        self.residuals
            .iter()
            .chain(&self.divisibility_residuals)
            .fold(0.0, |m, r| m.max(r.abs()))
    }

    /// CSV row `n,order,verified,max_residual,params...`.
    pub fn csv_row(&self) -> String {
        let mut s = format!(
            "{},{},{},{:.3e}",
            self.n,
            self.order,
            self.verified,
            self.max_residual()
        );
        for p in &self.params {
            s.push_str(&format!(",{:.15e}", p));
        }
        s
    }
}

/// Builds a candidate, evaluating `equations` (over the parameter names) and
/// the vanishing of the low-order secular coefficients at E = 0.
pub fn verify_candidate(
    n: usize,
    params: Vec<f64>,
    order: usize,
    equations: &[MultiPoly],
) -> Result<EPCandidate, EpError> {
    let residuals: Vec<f64> = equations.iter().map(|q| q.eval_exact_f64(&params)).collect();
    let m = order / 2;
    let spec = HamiltonianSpec::new(n, params.clone())?;
    let divisibility_residuals = secular_low_coeffs_exact(&spec, 2 * m)?;
    let verified = residuals
        .iter()
        .chain(&divisibility_residuals)
        .all(|r| r.abs() < VERIFY_TOL);
    let lower_dimensional = params.len() > 1 && params.last().is_some_and(|v| v.abs() < 1e-8);
    Ok(EPCandidate {
        n,
        params,
        order,
        residuals,
        divisibility_residuals,
        verified,
        lower_dimensional,
    })
}

fn dedup_points(points: &mut Vec<Vec<f64>>, tol: f64) {
    let mut kept: Vec<Vec<f64>> = Vec::new();
    for p in points.drain(..) {
        let dup = kept
            .iter()
            .any(|q| q.iter().zip(&p).all(|(a, b)| (a - b).abs() < tol));
        if !dup {
            kept.push(p);
        }
    }
    *points = kept;
}

fn sort_points(points: &mut [Vec<f64>]) {
    points.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.partial_cmp(y).unwrap())
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
}

fn root_precision() -> BigRational {
    precision_digits(30)
}

fn roots_f64(p: &UniPoly) -> Result<Vec<f64>, EpError> {
    Ok(isolate_real_roots(p, &root_precision())?
        .iter()
        .map(|r: &IsolatedRoot| r.refined)
        .collect())
}

fn int_poly(coeffs: &[i64]) -> UniPoly {
    UniPoly::from_i64(coeffs)
}

/// `Z_(+-2K)(x) = (K-1)x^4 - 2(K-1)x^2 +- 2x + 1`, low-order coefficients first.
pub fn z_polynomial(k: usize, sign: i32) -> UniPoly {
    let k1 = k as i64 - 1;
    int_poly(&[1, 2 * sign as i64, -2 * k1, 0, k1])
}

/// Real roots of one branch of the quartic.
#[derive(Clone, Debug, Serialize)]
pub struct ZBranch {
    pub sign: i32,
    pub roots: Vec<f64>,
}

/// Fourth-order EPs of the two-parameter chain at N = 2K.
#[derive(Clone, Debug, Serialize)]
pub struct Ep4Solution {
    pub k: usize,
    pub branches: Vec<ZBranch>,
    pub candidates: Vec<EPCandidate>,
}

impl Ep4Solution {
    pub fn branch(&self, sign: i32) -> &ZBranch {
        self.branches.iter().find(|b| b.sign == sign).expect("both branches present")
    }
}

/// Locates all real EP4 points of the `(A, B)` chain at even N = 2K.
///
/// Each real root `A = x` of `Z_(+2K)` or `Z_(-2K)` is paired with the values
/// of B suggested by the closed form; only pairs that satisfy both defining
/// equations are kept.
pub fn ep4_even(k: usize) -> Result<Ep4Solution, EpError> {
    if k < 2 {
        return Err(EpError::SmallK(k));
    }
    let (ck, ck1) = lemma_coeffs_even(k)?;
    let eqs = [ck1, ck];
    let k1 = (k - 1) as f64;
    let mut branches = Vec::new();
    let mut points = Vec::new();
    for sign in [1, -1] {
        let roots = roots_f64(&z_polynomial(k, sign))?;
        for &x in &roots {
            let cubic = k1 * x * x * x - 2.0 * k1 * x;
            for b in [cubic + 1.0, cubic - 1.0, 1.0 - 1.0 / x, -1.0 - 1.0 / x] {
                if eqs.iter().all(|q| q.eval_exact_f64(&[x, b]).abs() < VERIFY_TOL) {
                    points.push(vec![x, b]);
                }
            }
        }
        branches.push(ZBranch { sign, roots });
    }
    dedup_points(&mut points, 1e-9);
    sort_points(&mut points);
    let candidates = points
        .into_iter()
        .map(|p| verify_candidate(2 * k, p, 4, &eqs))
        .collect::<Result<_, _>>()?;
    Ok(Ep4Solution {
        k,
        branches,
        candidates,
    })
}

/// Coefficients of `x = -sqrt(2) + c1 g + c2 g^2 + c3 g^3`, `g = 1/(K-1)`,
/// for the most negative root of `Z_(+2K)`.
pub fn asymptotic_constants() -> [f64; 3] {
    let r2 = std::f64::consts::SQRT_2;
    [
        -(4.0 - r2) / 8.0,
        (29.0 * r2 - 32.0) / 128.0,
        -7.0 * (64.0 - 43.0 * r2) / 1024.0,
    ]
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticApproximant {
    pub k: usize,
    pub order: usize,
    pub g: f64,
    pub value: f64,
}

/// Large-K approximation of the most negative EP4 coordinate, truncated after
/// `order` correction terms (1, 2 or 3).
pub fn ep4_asymptotic(k: usize, order: usize) -> Result<AsymptoticApproximant, EpError> {
    if k < 2 {
        return Err(EpError::SmallK(k));
    }
    if !(1..=3).contains(&order) {
        return Err(EpError::Order(order));
    }
    let g = 1.0 / (k as f64 - 1.0);
    let c = asymptotic_constants();
    let mut value = -std::f64::consts::SQRT_2;
    let mut gp = 1.0;
    for ci in &c[..order] {
        gp *= g;
        value += ci * gp;
    }
    Ok(AsymptoticApproximant {
        k,
        order,
        g,
        value,
    })
}

/// Which parameter was eliminated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Eliminated {
    A,
    B,
}

/// Fifth-order EPs of the two-parameter chain at N = 2K + 1.
#[derive(Clone, Debug, Serialize)]
pub struct Ep5Solution {
    pub k: usize,
    pub eliminated: Eliminated,
    /// Primitive univariate polynomial in the square of the surviving
    /// parameter (or in the parameter itself if it is not even).
    pub polynomial: UniPoly,
    pub squared: bool,
    /// Positive real roots for the surviving parameter.
    pub positive_roots: Vec<f64>,
    pub candidates: Vec<EPCandidate>,
}

fn polish_2x2(eqs: &[MultiPoly; 2], jac: &[[MultiPoly; 2]; 2], mut p: [f64; 2]) -> [f64; 2] {
    for _ in 0..8 {
        let f = [eqs[0].eval_f64(&p), eqs[1].eval_f64(&p)];
        let j = [
            [jac[0][0].eval_f64(&p), jac[0][1].eval_f64(&p)],
            [jac[1][0].eval_f64(&p), jac[1][1].eval_f64(&p)],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let da = (f[0] * j[1][1] - f[1] * j[0][1]) / det;
        let db = (j[0][0] * f[1] - j[1][0] * f[0]) / det;
        let next = [p[0] - da, p[1] - db];
        let before = eqs[0].eval_exact_f64(&p).abs() + eqs[1].eval_exact_f64(&p).abs();
        let after = eqs[0].eval_exact_f64(&next).abs() + eqs[1].eval_exact_f64(&next).abs();
        if !(after < before) {
            break;
        }
        p = next;
    }
    p
}

fn quadratic_real_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a == 0.0 {
        return if b == 0.0 { vec![] } else { vec![-c / b] };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return vec![];
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    if q == 0.0 {
        return vec![0.0];
    }
    vec![q / a, c / q]
}

fn ep5_by(k: usize, eliminated: Eliminated) -> Result<Option<Ep5Solution>, EpError> {
    let (ck, ck1) = lemma_coeffs_odd(k)?;
    let (gone, keep) = match eliminated {
        Eliminated::A => ("A", "B"),
        Eliminated::B => ("B", "A"),
    };
    let r = resultant(&ck1, &ck, gone)?;
    if r.is_zero() {
        return Ok(None);
    }
    let r = r.with_vars(&[keep])?.primitive_part();
    let squared = r.is_even_in(keep)?;
    let uni = if squared {
        r.compress_even(keep, "y")?.to_unipoly("y")?
    } else {
        r.to_unipoly(keep)?
    };
    let roots = roots_f64(&uni)?;
    let mut positive: Vec<f64> = if squared {
        roots.iter().filter(|&&y| y > 0.0).map(|y| y.sqrt()).collect()
    } else {
        roots.iter().filter(|&&v| v > 0.0).copied().collect()
    };
    positive.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // c_K is quadratic in the eliminated parameter:
    // (-1)^K c_K = (K-1)(1 + AB)^2 + 2 - K A^2.
    let kf = k as f64;
    let eqs = [ck1.clone(), ck.clone()];
    let jac = [
        [ck1.derivative("A")?, ck1.derivative("B")?],
        [ck.derivative("A")?, ck.derivative("B")?],
    ];
    let mut points = Vec::new();
    let survivors: Vec<f64> = if squared {
        positive.iter().flat_map(|&v| [v, -v]).collect()
    } else {
        roots.clone()
    };
    for &v in &survivors {
        let solved: Vec<[f64; 2]> = match eliminated {
            Eliminated::A => {
                let b = v;
                quadratic_real_roots((kf - 1.0) * b * b - kf, 2.0 * (kf - 1.0) * b, kf + 1.0)
                    .into_iter()
                    .map(|a| [a, b])
                    .collect()
            }
            Eliminated::B => {
                let a = v;
                quadratic_real_roots(
                    (kf - 1.0) * a * a,
                    2.0 * (kf - 1.0) * a,
                    kf + 1.0 - kf * a * a,
                )
                .into_iter()
                .map(|b| [a, b])
                .collect()
            }
        };
        for p in solved {
            let p = polish_2x2(&eqs, &jac, p);
            if eqs.iter().all(|q| q.eval_exact_f64(&p).abs() < VERIFY_TOL) {
                points.push(p.to_vec());
            }
        }
    }
    dedup_points(&mut points, 1e-9);
    sort_points(&mut points);
    let candidates = points
        .into_iter()
        .map(|p| verify_candidate(2 * k + 1, p, 5, &eqs))
        .collect::<Result<_, _>>()?;
    Ok(Some(Ep5Solution {
        k,
        eliminated,
        polynomial: uni,
        squared,
        positive_roots: positive,
        candidates,
    }))
}

/// Locates the real EP5 points of the `(A, B)` chain at odd N = 2K + 1 by
/// eliminating A; falls back to eliminating B if the resultant vanishes.
pub fn ep5_odd(k: usize) -> Result<Ep5Solution, EpError> {
    if k < 2 {
        return Err(EpError::SmallK(k));
    }
    match ep5_by(k, Eliminated::A)? {
        Some(s) => Ok(s),
        None => ep5_by(k, Eliminated::B)?.ok_or(EpError::DegenerateElimination),
    }
}

/// Same as [`ep5_odd`] with B eliminated, giving a polynomial in `A^2`.
pub fn ep5_odd_by_a(k: usize) -> Result<Ep5Solution, EpError> {
    if k < 2 {
        return Err(EpError::SmallK(k));
    }
    match ep5_by(k, Eliminated::B)? {
        Some(s) => Ok(s),
        None => ep5_by(k, Eliminated::A)?.ok_or(EpError::DegenerateElimination),
    }
}

/// Second-order EPs of the one-parameter chain (`B = 0`) at even N: the
/// last coefficient reduces to `(-1)^K (1 - A^2)`.
pub fn ep2_one_param(n: usize) -> Result<Vec<EPCandidate>, EpError> {
    if n % 2 == 1 {
        return Err(EpError::Parity(n));
    }
    let k = n / 2;
    if k < 2 {
        return Err(EpError::SmallK(k));
    }
    let (ck, _) = lemma_coeffs_even(k)?;
    let eq = ck.substitute_int("B", 0)?.with_vars(&["A"])?;
    let roots = roots_f64(&eq.to_unipoly("A")?)?;
    roots
        .into_iter()
        .map(|a| verify_candidate(n, vec![a], 2, std::slice::from_ref(&eq)))
        .collect()
}

/// How a Newton run from one seed ended.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum SeedOutcome {
    Converged { params: Vec<f64>, iterations: usize },
    SingularJacobian,
    Stalled,
    MaxIterations,
}

#[derive(Clone, Debug, Serialize)]
pub struct NewtonReport {
    pub n: usize,
    pub param_count: usize,
    pub seeds: Vec<Vec<f64>>,
    pub outcomes: Vec<SeedOutcome>,
    pub candidates: Vec<EPCandidate>,
}

/// `points^p` seeds evenly spaced over `[-2, 2]^p`.
pub fn default_seeds(p: usize, points: usize) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = (0..points)
        .map(|i| -2.0 + 4.0 * i as f64 / (points.max(2) - 1) as f64)
        .collect();
    let mut out = vec![vec![]];
    for _ in 0..p {
        out = out
            .into_iter()
            .flat_map(|s| {
                axis.iter().map(move |&v| {
                    let mut t = s.clone();
                    t.push(v);
                    t
                })
            })
            .collect();
    }
    out
}

/// The `p` trailing coefficients `c_{K-p+1}, ..., c_K`.
pub fn newton_equations(n: usize, p: usize) -> Result<Vec<MultiPoly>, EpError> {
    if !(1..=4).contains(&p) {
        return Err(EpError::ParamCount(p));
    }
    let coeffs = match appendix_coeffs(n, p) {
        Ok(c) => c.coeffs,
        Err(SecularError::UnsupportedAppendix { .. }) => secular_symbolic(n, p)?.coeffs,
        Err(e) => return Err(e.into()),
    };
    let k = n / 2;
    if p > k {
        return Err(SecularError::TooManyParams { n, p }.into());
    }
    Ok(coeffs[k - p..].to_vec())
}

const NEWTON_MAX_ITER: usize = 200;
const NEWTON_HALVINGS: usize = 40;
const NEWTON_STEP_TOL: f64 = 1e-13;

fn newton_from(eqs: &[MultiPoly], jac: &[Vec<MultiPoly>], seed: &[f64]) -> SeedOutcome {
    let p = seed.len();
    let mut x = seed.to_vec();
    let norm = |x: &[f64]| eqs.iter().map(|q| q.eval_f64(x).powi(2)).sum::<f64>().sqrt();
    let mut fx = norm(&x);
    for it in 0..NEWTON_MAX_ITER {
        if fx == 0.0 {
            return SeedOutcome::Converged {
                params: x,
                iterations: it,
            };
        }
        let f = DVector::from_iterator(p, eqs.iter().map(|q| q.eval_f64(&x)));
        let j = DMatrix::from_fn(p, p, |r, c| jac[r][c].eval_f64(&x));
        let Some(delta) = j.lu().solve(&(-f)) else {
            return SeedOutcome::SingularJacobian;
        };
        if delta.iter().any(|d| !d.is_finite()) {
            return SeedOutcome::SingularJacobian;
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=NEWTON_HALVINGS {
            let trial: Vec<f64> = x.iter().zip(delta.iter()).map(|(a, d)| a + t * d).collect();
            let ft = norm(&trial);
            if ft < fx {
                accepted = Some((trial, ft));
                break;
            }
            t *= 0.5;
        }
        let step = t * delta.norm();
        match accepted {
            Some((trial, ft)) => {
                x = trial;
                fx = ft;
            }
            None => {
                // No descent left: converged if the full step is already negligible.
                return if delta.norm() < NEWTON_STEP_TOL * (1.0 + x.iter().map(|v| v.abs()).fold(0.0, f64::max)) {
                    SeedOutcome::Converged {
                        params: x,
                        iterations: it,
                    }
                } else {
                    SeedOutcome::Stalled
                };
            }
        }
        if step < NEWTON_STEP_TOL {
            return SeedOutcome::Converged {
                params: x,
                iterations: it + 1,
            };
        }
    }
    SeedOutcome::MaxIterations
}

/// Damped Newton search for maximal-order EPs of the `p`-parameter chain.
///
/// Converged points are deduplicated at 1e-6 and verified; the EP order is
/// `2p` for even N and `2p + 1` for odd N.
pub fn ep_multi_newton(
    n: usize,
    p: usize,
    seeds: Option<Vec<Vec<f64>>>,
) -> Result<NewtonReport, EpError> {
    if !(2..=MAX_SYMBOLIC_N).contains(&n) {
        return Err(SecularError::DimensionRange(n).into());
    }
    let eqs = newton_equations(n, p)?;
    let names = param_names(p);
    let jac: Vec<Vec<MultiPoly>> = eqs
        .iter()
        .map(|q| names.iter().map(|v| q.derivative(v)).collect::<Result<_, _>>())
        .collect::<Result<_, _>>()?;
    let seeds = seeds.unwrap_or_else(|| default_seeds(p, 9));
    for s in &seeds {
        if s.len() != p {
            return Err(EpError::ParamCount(s.len()));
        }
    }
    let outcomes: Vec<SeedOutcome> = seeds.par_iter().map(|s| newton_from(&eqs, &jac, s)).collect();
    let mut points: Vec<Vec<f64>> = outcomes
        .iter()
        .filter_map(|o| match o {
            SeedOutcome::Converged { params, .. } => Some(params.clone()),
            _ => None,
        })
        .collect();
    dedup_points(&mut points, 1e-6);
    sort_points(&mut points);
    let order = if n % 2 == 0 { 2 * p } else { 2 * p + 1 };
    let candidates = points
        .into_iter()
        .map(|pt| verify_candidate(n, pt, order, &eqs))
        .collect::<Result<_, _>>()?;
    Ok(NewtonReport {
        n,
        param_count: p,
        seeds,
        outcomes,
        candidates,
    })
}
