//! Resultants of multivariate polynomials by the subresultant pseudo-remainder
//! sequence. Coefficients live in the integer polynomial ring of the remaining
//! variables, and every division in the sequence is exact.

use super::multipoly::MultiPoly;
use super::PolyError;

type Coeffs = Vec<MultiPoly>;

fn degree(p: &Coeffs) -> Option<usize> {
    p.iter().rposition(|c| !c.is_zero())
}

fn trim(mut p: Coeffs) -> Coeffs {
    while p.last().map_or(false, |c| c.is_zero()) {
        p.pop();
    }
    p
}

/// Pseudo-remainder: `lc(g)^(deg f - deg g + 1) * f mod g`.
fn prem(f: &Coeffs, g: &Coeffs, zero: &MultiPoly) -> Coeffs {
    let dg = degree(g).expect("nonzero divisor");
    let lg = &g[dg];
    let mut r = trim(f.clone());
    let df = match degree(&r) {
        Some(d) if d >= dg => d,
        _ => return r,
    };
    let mut steps = 0;
    while let Some(dr) = degree(&r) {
        if dr < dg {
            break;
        }
        let lr = r[dr].clone();
        let shift = dr - dg;
        let mut next: Coeffs = r.iter().map(|c| c * lg).collect();
        for (j, gc) in g.iter().enumerate() {
            next[j + shift] = &next[j + shift] - &(&lr * gc);
        }
        next[dr] = zero.clone();
        r = trim(next);
        steps += 1;
    }
    let missing = (df - dg + 1) - steps;
    if missing > 0 {
        let f = lg.pow(missing as u32);
        r = r.iter().map(|c| c * &f).collect();
    }
    r
}

fn div_all(p: &Coeffs, d: &MultiPoly) -> Coeffs {
    p.iter()
        .map(|c| c.div_exact(d).expect("subresultant division is exact"))
        .collect()
}

/// Resultant of `p` and `q` with respect to `var`.
///
/// The result is expressed over the merged variable list of the inputs, with
/// `var` still declared but absent. It is zero exactly when `p` and `q` have a
/// common factor of positive degree in `var`.
pub fn resultant(p: &MultiPoly, q: &MultiPoly, var: &str) -> Result<MultiPoly, PolyError> {
    let mut vars: Vec<String> = p.vars().to_vec();
    for v in q.vars() {
        if !vars.contains(v) {
            vars.push(v.clone());
        }
    }
    if !vars.iter().any(|v| v == var) {
        return Err(PolyError::UnknownVariable(var.to_string()));
    }
    let p = p.with_vars(&vars)?;
    let q = q.with_vars(&vars)?;
    let dp = p.degree_in(var)?.unwrap_or(0);
    let dq = q.degree_in(var)?.unwrap_or(0);
    if dp == 0 || dq == 0 {
        return Err(PolyError::ZeroDegree(var.to_string()));
    }
    let zero = MultiPoly::zero(&vars);
    let one = MultiPoly::one(&vars);

    let mut a = p.coeffs_in(var)?;
    let mut b = q.coeffs_in(var)?;
    let mut sign_neg = false;
    if dp < dq {
        std::mem::swap(&mut a, &mut b);
        if dp % 2 == 1 && dq % 2 == 1 {
            sign_neg = true;
        }
    }
    let mut g = one.clone();
    let mut h = one.clone();
    loop {
        let da = degree(&a).unwrap();
        let db = degree(&b).unwrap();
        let delta = da - db;
        if da % 2 == 1 && db % 2 == 1 {
            sign_neg = !sign_neg;
        }
        let r = prem(&a, &b, &zero);
        a = b;
        let denom = &g * &h.pow(delta as u32);
        b = div_all(&r, &denom);
        g = a[degree(&a).unwrap()].clone();
        h = match delta {
            0 => h,
            1 => g.clone(),
            d => g
                .pow(d as u32)
                .div_exact(&h.pow(d as u32 - 1))
                .expect("subresultant division is exact"),
        };
        match degree(&b) {
            None => return Ok(zero),
            Some(0) => {
                let da = degree(&a).unwrap() as u32;
                let lb = &b[0];
                let num = lb.pow(da);
                let res = if da == 0 {
                    num
                } else {
                    num.div_exact(&h.pow(da - 1))
                        .expect("subresultant division is exact")
                };
                return Ok(if sign_neg { -res } else { res });
            }
            Some(_) => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> MultiPoly {
        s.parse().unwrap()
    }

    #[test]
    fn linear_pair() {
        // Sylvester-determinant convention: res(x - a, x - b) = a - b.
        let r = resultant(&p("x - 1"), &p("x + 1"), "x").unwrap();
        assert_eq!(r.constant_term(), 2.into());
        assert!(r.is_constant());
        let swapped = resultant(&p("x + 1"), &p("x - 1"), "x").unwrap();
        assert_eq!(swapped.constant_term(), (-2).into());
    }

    #[test]
    fn common_factor_gives_zero() {
        let f = p("(x - A)*(x^2 + B)");
        let g = p("(x - A)*(x + 3)");
        assert!(resultant(&f, &g, "x").unwrap().is_zero());
    }

    #[test]
    fn eliminates_to_norm() {
        // res_x(x^2 - 2, y - x) = y^2 - 2
        let r = resultant(&p("x^2 - 2"), &p("y - x"), "x").unwrap();
        assert_eq!(r.with_vars(&["y"]).unwrap(), p("y^2 - 2"));
    }

    #[test]
    fn zero_degree_is_an_error() {
        assert!(matches!(
            resultant(&p("A + 1"), &p("x + A"), "x"),
            Err(PolyError::ZeroDegree(_))
        ));
    }
}
