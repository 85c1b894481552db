//! Sparse multivariate polynomials with arbitrary-precision integer coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::unipoly::UniPoly;
use super::PolyError;

/// Exponent vector, one slot per declared variable.
pub type Exponents = Vec<u32>;

/// Polynomial in `vars` with integer coefficients.
///
/// Terms are keyed by exponent vectors in lexicographic order following the
/// variable list, so the last entry of `terms` is the lex-leading term.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiPoly {
    vars: Vec<String>,
    terms: BTreeMap<Exponents, BigInt>,
}

impl MultiPoly {
    pub fn zero<S: AsRef<str>>(vars: &[S]) -> Self {
        MultiPoly {
            vars: vars.iter().map(|v| v.as_ref().to_string()).collect(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant<S: AsRef<str>>(vars: &[S], c: impl Into<BigInt>) -> Self {
        let mut p = Self::zero(vars);
        let c = c.into();
        if !c.is_zero() {
            p.terms.insert(vec![0; p.vars.len()], c);
        }
        p
    }

    pub fn one<S: AsRef<str>>(vars: &[S]) -> Self {
        Self::constant(vars, 1)
    }

    /// The polynomial consisting of the single variable `name`.
    pub fn var<S: AsRef<str>>(vars: &[S], name: &str) -> Result<Self, PolyError> {
        let mut p = Self::zero(vars);
        let idx = p.index_of(name)?;
        let mut e = vec![0; p.vars.len()];
        e[idx] = 1;
        p.terms.insert(e, BigInt::one());
        Ok(p)
    }

    pub fn monomial<S: AsRef<str>>(vars: &[S], exps: Exponents, c: impl Into<BigInt>) -> Self {
        assert_eq!(exps.len(), vars.len(), "exponent vector length mismatch");
        let mut p = Self::zero(vars);
        let c = c.into();
        if !c.is_zero() {
            p.terms.insert(exps, c);
        }
        p
    }

    /// Builds a polynomial from raw terms, merging duplicates and dropping zeros.
    pub fn from_terms<S: AsRef<str>, I>(vars: &[S], terms: I) -> Self
    where
        I: IntoIterator<Item = (Exponents, BigInt)>,
    {
        let mut p = Self::zero(vars);
        for (e, c) in terms {
            assert_eq!(e.len(), p.vars.len(), "exponent vector length mismatch");
            p.add_term(e, c);
        }
        p
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &BigInt)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&k| k == 0))
    }

    /// Constant term (zero if absent).
    pub fn constant_term(&self) -> BigInt {
        self.terms
            .get(&vec![0; self.vars.len()])
            .cloned()
            .unwrap_or_default()
    }

    pub fn index_of(&self, name: &str) -> Result<usize, PolyError> {
        self.vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| PolyError::UnknownVariable(name.to_string()))
    }

    fn add_term(&mut self, e: Exponents, c: BigInt) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Re-expresses the polynomial over `vars`, which must contain every
    /// variable that actually occurs in `self`.
    pub fn with_vars<S: AsRef<str>>(&self, vars: &[S]) -> Result<Self, PolyError> {
        let target: Vec<String> = vars.iter().map(|v| v.as_ref().to_string()).collect();
        if target == self.vars {
            return Ok(self.clone());
        }
        let mut map = Vec::with_capacity(self.vars.len());
        for (i, v) in self.vars.iter().enumerate() {
            match target.iter().position(|t| t == v) {
                Some(j) => map.push(Some(j)),
                None => {
                    if self.terms.keys().any(|e| e[i] != 0) {
                        return Err(PolyError::VariableInUse(v.clone()));
                    }
                    map.push(None);
                }
            }
        }
        let mut out = MultiPoly {
            vars: target,
            terms: BTreeMap::new(),
        };
        for (e, c) in &self.terms {
            let mut ne = vec![0; out.vars.len()];
            for (i, &k) in e.iter().enumerate() {
                if let Some(j) = map[i] {
                    ne[j] = k;
                }
            }
            out.terms.insert(ne, c.clone());
        }
        Ok(out)
    }

    /// Union of the two variable lists, keeping `self`'s order first.
    fn merged_vars(&self, other: &Self) -> Vec<String> {
        let mut vars = self.vars.clone();
        for v in &other.vars {
            if !vars.contains(v) {
                vars.push(v.clone());
            }
        }
        vars
    }

    fn aligned(&self, other: &Self) -> (Self, Self) {
        if self.vars == other.vars {
            return (self.clone(), other.clone());
        }
        let vars = self.merged_vars(other);
        (
            self.with_vars(&vars).expect("superset"),
            other.with_vars(&vars).expect("superset"),
        )
    }

    /// Variables that occur with a nonzero exponent.
    pub fn used_vars(&self) -> Vec<String> {
        self.vars
            .iter()
            .enumerate()
            .filter(|(i, _)| self.terms.keys().any(|e| e[*i] != 0))
            .map(|(_, v)| v.clone())
            .collect()
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        if c.is_zero() {
            return Self::zero(&self.vars);
        }
        MultiPoly {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(e, k)| (e.clone(), k * c))
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut result = Self::one(&self.vars);
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = &result * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn degree_in(&self, var: &str) -> Result<Option<u32>, PolyError> {
        let i = self.index_of(var)?;
        Ok(self.terms.keys().map(|e| e[i]).max())
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Coefficients of `var^0, var^1, ...`, each over the same variable list
    /// with `var` absent.
    pub fn coeffs_in(&self, var: &str) -> Result<Vec<MultiPoly>, PolyError> {
        let i = self.index_of(var)?;
        let deg = match self.degree_in(var)? {
            Some(d) => d as usize,
            None => return Ok(Vec::new()),
        };
        let mut out = vec![Self::zero(&self.vars); deg + 1];
        for (e, c) in &self.terms {
            let k = e[i] as usize;
            let mut ne = e.clone();
            ne[i] = 0;
            out[k].terms.insert(ne, c.clone());
        }
        Ok(out)
    }

    /// Inverse of [`coeffs_in`](Self::coeffs_in).
    pub fn from_coeffs_in(var: &str, coeffs: &[MultiPoly], vars: &[String]) -> Result<Self, PolyError> {
        let mut out = Self::zero(vars);
        let i = out.index_of(var)?;
        for (k, c) in coeffs.iter().enumerate() {
            let c = c.with_vars(vars)?;
            for (e, v) in c.terms {
                if e[i] != 0 {
                    return Err(PolyError::VariableInUse(var.to_string()));
                }
                let mut ne = e;
                ne[i] = k as u32;
                out.add_term(ne, v);
            }
        }
        Ok(out)
    }

    /// Replaces `var` by `value`. The variable stays declared (with zero exponent).
    pub fn substitute(&self, var: &str, value: &MultiPoly) -> Result<Self, PolyError> {
        let coeffs = self.coeffs_in(var)?;
        let vars = self.merged_vars(value);
        let value = value.with_vars(&vars)?;
        // Horner in `value`.
        let mut acc = Self::zero(&vars);
        for c in coeffs.iter().rev() {
            acc = &(&acc * &value) + &c.with_vars(&vars)?;
        }
        Ok(acc)
    }

    /// Substitutes an integer for `var`.
    pub fn substitute_int(&self, var: &str, value: impl Into<BigInt>) -> Result<Self, PolyError> {
        let v = Self::constant(&self.vars, value);
        self.substitute(var, &v)
    }

    pub fn derivative(&self, var: &str) -> Result<Self, PolyError> {
        let i = self.index_of(var)?;
        let mut out = Self::zero(&self.vars);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut ne = e.clone();
                ne[i] -= 1;
                out.add_term(ne, c * BigInt::from(e[i]));
            }
        }
        Ok(out)
    }

    /// Whether every occurring power of `var` is even.
    pub fn is_even_in(&self, var: &str) -> Result<bool, PolyError> {
        let i = self.index_of(var)?;
        Ok(self.terms.keys().all(|e| e[i] % 2 == 0))
    }

    /// For a polynomial even in `var`, rewrites `var^2k` as `new_var^k`.
    /// `new_var` replaces `var` in the variable list.
    pub fn compress_even(&self, var: &str, new_var: &str) -> Result<Self, PolyError> {
        let i = self.index_of(var)?;
        if !self.is_even_in(var)? {
            return Err(PolyError::NotEven(var.to_string()));
        }
        let mut vars = self.vars.clone();
        vars[i] = new_var.to_string();
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| {
                let mut ne = e.clone();
                ne[i] /= 2;
                (ne, c.clone())
            })
            .collect();
        Ok(MultiPoly { vars, terms })
    }

    /// Divides every exponent of `var` by `k` when all exponents are at least `k`
    /// (i.e. removes a factor `var^k`). Fails if not divisible.
    pub fn divide_by_var_power(&self, var: &str, k: u32) -> Result<Self, PolyError> {
        let i = self.index_of(var)?;
        let mut out = Self::zero(&self.vars);
        for (e, c) in &self.terms {
            if e[i] < k {
                return Err(PolyError::NotDivisible);
            }
            let mut ne = e.clone();
            ne[i] -= k;
            out.terms.insert(ne, c.clone());
        }
        Ok(out)
    }

    /// Evaluates at a point given in the order of `vars()`.
    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.vars.len(), "point dimension mismatch");
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut t = c.to_f64().unwrap_or(f64::NAN);
                for (x, &k) in point.iter().zip(e) {
                    if k > 0 {
                        t *= x.powi(k as i32);
                    }
                }
                t
            })
            .sum()
    }

    /// Exact evaluation at a rational point.
    pub fn eval_rational(&self, point: &[BigRational]) -> BigRational {
        assert_eq!(point.len(), self.vars.len(), "point dimension mismatch");
        let mut acc = BigRational::zero();
        for (e, c) in &self.terms {
            let mut t = BigRational::from_integer(c.clone());
            for (x, &k) in point.iter().zip(e) {
                if k > 0 {
                    t *= num_traits::pow(x.clone(), k as usize);
                }
            }
            acc += t;
        }
        acc
    }

    /// Evaluates exactly at the rational values of the given floats and rounds the
    /// result once. This gives the true value at the stored `f64` point.
    pub fn eval_exact_f64(&self, point: &[f64]) -> f64 {
        let rp: Vec<BigRational> = point
            .iter()
            .map(|&x| BigRational::from_float(x).unwrap_or_else(BigRational::zero))
            .collect();
        rational_to_f64(&self.eval_rational(&rp))
    }

    /// Gcd of all coefficients (zero for the zero polynomial), always nonnegative.
    pub fn content(&self) -> BigInt {
        self.terms
            .values()
            .fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Divides by the content and makes the lex-leading coefficient positive.
    pub fn primitive_part(&self) -> Self {
        let mut g = self.content();
        if g.is_zero() {
            return self.clone();
        }
        if self.terms.values().next_back().map_or(false, |c| c.is_negative()) {
            g = -g;
        }
        MultiPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c / &g)).collect(),
        }
    }

    fn leading(&self) -> Option<(&Exponents, &BigInt)> {
        self.terms.iter().next_back()
    }

    /// Exact division. Returns `None` when `divisor` does not divide `self`.
    pub fn div_exact(&self, divisor: &MultiPoly) -> Option<MultiPoly> {
        let (mut rem, d) = self.aligned(divisor);
        let (de, dc) = {
            let (e, c) = d.leading()?;
            (e.clone(), c.clone())
        };
        let mut q = Self::zero(&rem.vars);
        while let Some((re, rc)) = rem.leading() {
            if re.iter().zip(&de).any(|(a, b)| a < b) {
                return None;
            }
            let (qc, r) = rc.div_rem(&dc);
            if !r.is_zero() {
                return None;
            }
            let qe: Exponents = re.iter().zip(&de).map(|(a, b)| a - b).collect();
            let t = MultiPoly::monomial(&rem.vars, qe.clone(), qc.clone());
            rem = &rem - &(&t * &d);
            q.add_term(qe, qc);
        }
        Some(q)
    }

    /// Converts to a univariate polynomial in `var` when no other variable occurs.
    pub fn to_unipoly(&self, var: &str) -> Result<UniPoly, PolyError> {
        let i = self.index_of(var)?;
        let mut coeffs = Vec::new();
        for (e, c) in &self.terms {
            if e.iter().enumerate().any(|(j, &k)| j != i && k != 0) {
                return Err(PolyError::NotUnivariate(var.to_string()));
            }
            let k = e[i] as usize;
            if coeffs.len() <= k {
                coeffs.resize(k + 1, BigInt::zero());
            }
            coeffs[k] = c.clone();
        }
        Ok(UniPoly::from_ints(&coeffs))
    }

    pub fn from_unipoly_int(p: &UniPoly, var: &str) -> Result<Self, PolyError> {
        let vars = [var];
        let mut out = Self::zero(&vars);
        for (k, c) in p.coeffs().iter().enumerate() {
            if !c.is_integer() {
                return Err(PolyError::NonIntegerCoefficient);
            }
            out.add_term(vec![k as u32], c.to_integer());
        }
        Ok(out)
    }

    /// Human-readable layout grouping terms by powers of `var`, highest first,
    /// e.g. `E^6 + (-5 + A^2 + B^2)*E^4 + ...`.
    pub fn display_collected(&self, var: &str) -> Result<String, PolyError> {
        let coeffs = self.coeffs_in(var)?;
        let mut parts: Vec<String> = Vec::new();
        for (k, c) in coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let pw = match k {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{k}"),
            };
            let body = if pw.is_empty() {
                c.to_string()
            } else if c.is_constant() {
                let v = c.constant_term();
                if v.is_one() {
                    pw
                } else if v == -BigInt::one() {
                    format!("-{pw}")
                } else {
                    format!("{v}*{pw}")
                }
            } else {
                format!("({c})*{pw}")
            };
            parts.push(body);
        }
        if parts.is_empty() {
            return Ok("0".to_string());
        }
        let mut out = parts[0].clone();
        for p in &parts[1..] {
            if let Some(rest) = p.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(rest);
            } else {
                out.push_str(" + ");
                out.push_str(p);
            }
        }
        Ok(out)
    }

    /// Parses with a fixed variable list; unknown identifiers are an error.
    pub fn parse_with_vars<S: AsRef<str>>(s: &str, vars: &[S]) -> Result<Self, PolyError> {
        let p: MultiPoly = s.parse()?;
        p.with_vars(vars).map_err(|e| match e {
            PolyError::VariableInUse(v) => PolyError::UnknownVariable(v),
            other => other,
        })
    }
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    if let Some(v) = r.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Fall back on scaled conversion for huge numerators/denominators.
    let n = r.numer().to_f64().unwrap_or(f64::NAN);
    let d = r.denom().to_f64().unwrap_or(f64::NAN);
    n / d
}

fn binop(a: &MultiPoly, b: &MultiPoly, sign: i32) -> MultiPoly {
    let (mut x, y) = a.aligned(b);
    for (e, c) in y.terms {
        if sign > 0 {
            x.add_term(e, c);
        } else {
            x.add_term(e, -c);
        }
    }
    x
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        binop(self, rhs, 1)
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        binop(self, rhs, -1)
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        let (x, y) = self.aligned(rhs);
        let mut out = MultiPoly::zero(&x.vars);
        for (ea, ca) in &x.terms {
            for (eb, cb) in &y.terms {
                let e: Exponents = ea.iter().zip(eb).map(|(p, q)| p + q).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        MultiPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for MultiPoly {
            type Output = MultiPoly;
            fn $m(self, rhs: MultiPoly) -> MultiPoly {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&MultiPoly> for MultiPoly {
            type Output = MultiPoly;
            fn $m(self, rhs: &MultiPoly) -> MultiPoly {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        -&self
    }
}

fn fmt_monomial(vars: &[String], e: &[u32]) -> String {
    let mut parts = Vec::new();
    for (v, &k) in vars.iter().zip(e) {
        match k {
            0 => {}
            1 => parts.push(v.clone()),
            _ => parts.push(format!("{v}^{k}")),
        }
    }
    parts.join("*")
}

impl fmt::Display for MultiPoly {
    /// Terms by ascending total degree, then by variable order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut items: Vec<(&Exponents, &BigInt)> = self.terms.iter().collect();
        items.sort_by(|(a, _), (b, _)| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            da.cmp(&db).then_with(|| b.cmp(a))
        });
        for (i, (e, c)) in items.into_iter().enumerate() {
            let mono = fmt_monomial(&self.vars, e);
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if mono.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{mag}*{mono}")?;
            }
        }
        Ok(())
    }
}

/// JSON form: variable list plus a list of `[exponents, coefficient-string]` pairs.
#[derive(Serialize, Deserialize)]
struct MultiPolyRepr {
    variables: Vec<String>,
    terms: Vec<(Exponents, String)>,
}

impl Serialize for MultiPoly {
    fn serialize<Ser: serde::Serializer>(&self, s: Ser) -> Result<Ser::Ok, Ser::Error> {
        MultiPolyRepr {
            variables: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), c.to_string()))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MultiPoly {
    fn deserialize<De: serde::Deserializer<'de>>(d: De) -> Result<Self, De::Error> {
        use serde::de::Error;
        let r = MultiPolyRepr::deserialize(d)?;
        let mut terms = Vec::with_capacity(r.terms.len());
        for (e, c) in r.terms {
            if e.len() != r.variables.len() {
                return Err(De::Error::custom("exponent vector length mismatch"));
            }
            let c: BigInt = c.parse().map_err(De::Error::custom)?;
            terms.push((e, c));
        }
        Ok(MultiPoly::from_terms(&r.variables, terms))
    }
}

// Parser: sums of products of integers, identifiers and parenthesised
// sub-expressions, each optionally raised to a nonnegative integer power.

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: Vec<String>,
}

enum Node {
    Int(BigInt),
    Var(String),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Neg(Box<Node>),
    Pow(Box<Node>, u32),
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn err(&self, msg: &str) -> PolyError {
        PolyError::Parse(format!("{msg} at byte {}", self.pos))
    }

    fn expr(&mut self) -> Result<Node, PolyError> {
        let mut lhs = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Node::Neg(Box::new(self.term()?))
            }
            Some(b'+') => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node, PolyError> {
        let mut lhs = self.power()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = Node::Mul(Box::new(lhs), Box::new(self.power()?));
                }
                // implicit multiplication: `2A`, `2(A+B)`, `A B`
                Some(c) if c == b'(' || c.is_ascii_alphanumeric() || c == b'_' => {
                    lhs = Node::Mul(Box::new(lhs), Box::new(self.power()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn power(&mut self) -> Result<Node, PolyError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(self.err("expected exponent"));
            }
            let k: u32 = std::str::from_utf8(&self.src[start..self.pos])
                .unwrap()
                .parse()
                .map_err(|_| self.err("exponent too large"))?;
            return Ok(Node::Pow(Box::new(base), k));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, PolyError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let n: BigInt = std::str::from_utf8(&self.src[start..self.pos])
                    .unwrap()
                    .parse()
                    .map_err(|_| self.err("bad integer"))?;
                Ok(Node::Int(n))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string();
                if !self.vars.contains(&name) {
                    self.vars.push(name.clone());
                }
                Ok(Node::Var(name))
            }
            _ => Err(self.err("unexpected token")),
        }
    }
}

fn build(node: &Node, vars: &[String]) -> MultiPoly {
    match node {
        Node::Int(n) => MultiPoly::constant(vars, n.clone()),
        Node::Var(v) => MultiPoly::var(vars, v).expect("collected"),
        Node::Add(a, b) => &build(a, vars) + &build(b, vars),
        Node::Sub(a, b) => &build(a, vars) - &build(b, vars),
        Node::Mul(a, b) => &build(a, vars) * &build(b, vars),
        Node::Neg(a) => -&build(a, vars),
        Node::Pow(a, k) => build(a, vars).pow(*k),
    }
}

impl FromStr for MultiPoly {
    type Err = PolyError;

    /// Variables are taken in order of first appearance. Identifiers are
    /// maximal alphanumeric runs, so `AB` is one variable; write `A*B` or `A B`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser {
            src: s.as_bytes(),
            pos: 0,
            vars: Vec::new(),
        };
        let node = p.expr()?;
        if p.peek().is_some() {
            return Err(p.err("trailing input"));
        }
        Ok(build(&node, &p.vars))
    }
}
