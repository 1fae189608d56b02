//! Sparse multivariate polynomials with a small text format.
//!
//! Text grammar: `term (± term)*` where a term is a product of factors
//! (`*` or whitespace separated) and a factor is a number, `n/d`, or `var^k`.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub trait Coeff: Clone + Debug + PartialEq + Num + Neg<Output = Self> + FromPrimitive {}
impl<C> Coeff for C where C: Clone + Debug + PartialEq + Num + Neg<Output = C> + FromPrimitive {}

pub type Rational = Ratio<i128>;

#[derive(Clone, PartialEq)]
pub struct Poly<C, const N: usize> {
    terms: BTreeMap<[u32; N], C>,
}

/// Polynomial in `(p, q)`.
pub type PlanarPoly<C> = Poly<C, 2>;

pub const PLANAR_VARS: [&str; 2] = ["p", "q"];

impl<C: Coeff, const N: usize> Poly<C, N> {
    pub fn zero() -> Self {
        Self { terms: BTreeMap::new() }
    }

    pub fn constant(c: C) -> Self {
        Self::monomial([0; N], c)
    }

    pub fn monomial(exps: [u32; N], c: C) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exps, c);
        }
        Self { terms }
    }

    pub fn var(i: usize) -> Self {
        let mut e = [0; N];
        e[i] = 1;
        Self::monomial(e, C::one())
    }

    pub fn from_terms<I: IntoIterator<Item = ([u32; N], C)>>(it: I) -> Self {
        let mut out = Self::zero();
        for (e, c) in it {
            out.add_term(e, c);
        }
        out
    }

    pub fn add_term(&mut self, exps: [u32; N], c: C) {
        let entry = self.terms.entry(exps).or_insert_with(C::zero);
        *entry = entry.clone() + c;
        if entry.is_zero() {
            self.terms.remove(&exps);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32; N], &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: [u32; N]) -> C {
        self.terms.get(&exps).cloned().unwrap_or_else(C::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum::<u32>()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|e| e[i]).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &C) -> Self {
        Self::from_terms(self.terms.iter().map(|(e, a)| (*e, a.clone() * c.clone())))
    }

    pub fn derivative(&self, i: usize) -> Self {
        Self::from_terms(self.terms.iter().filter(|(e, _)| e[i] > 0).map(|(e, c)| {
            let mut e2 = *e;
            e2[i] -= 1;
            let k = C::from_u32(e[i]).expect("exponent fits the coefficient ring");
            (e2, c.clone() * k)
        }))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::constant(C::one());
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Poly<D, N> {
        Poly::from_terms(self.terms.iter().map(|(e, c)| (*e, f(c))))
    }

    /// Evaluates with a coefficient embedding `f` into a ring of values.
    pub fn eval_with<V>(&self, x: &[V; N], f: impl Fn(&C) -> V) -> V
    where
        V: Copy + Num,
    {
        let mut powers: Vec<Vec<V>> = Vec::with_capacity(N);
        for (i, &xi) in x.iter().enumerate() {
            let d = self.degree_in(i) as usize;
            let mut v = Vec::with_capacity(d + 1);
            v.push(V::one());
            for k in 1..=d {
                v.push(v[k - 1] * xi);
            }
            powers.push(v);
        }
        let mut acc = V::zero();
        for (e, c) in &self.terms {
            let mut t = f(c);
            for i in 0..N {
                t = t * powers[i][e[i] as usize];
            }
            acc = acc + t;
        }
        acc
    }

    /// Substitutes variable `i` by the polynomial `r`.
    pub fn substitute(&self, i: usize, r: &Self) -> Self {
        let mut out = Self::zero();
        let d = self.degree_in(i);
        let mut rp = vec![Self::constant(C::one())];
        for k in 1..=d as usize {
            let next = &rp[k - 1] * r;
            rp.push(next);
        }
        for (e, c) in &self.terms {
            let mut e2 = *e;
            e2[i] = 0;
            let rest = Self::monomial(e2, c.clone());
            out = &out + &(&rest * &rp[e[i] as usize]);
        }
        out
    }

    pub fn format_with(&self, names: &[&str; N], fmt_coeff: impl Fn(&C) -> (bool, String)) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut keys: Vec<&[u32; N]> = self.terms.keys().collect();
        keys.sort_by(|a, b| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        let mut out = String::new();
        for (idx, e) in keys.into_iter().enumerate() {
            let (negative, mag) = fmt_coeff(&self.terms[e]);
            if idx == 0 {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(if negative { " - " } else { " + " });
            }
            let mut factors: Vec<String> = Vec::new();
            let constant = e.iter().all(|&k| k == 0);
            if mag != "1" || constant {
                factors.push(mag);
            }
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => factors.push(names[i].to_string()),
                    _ => factors.push(format!("{}^{}", names[i], k)),
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }
}

impl<const N: usize> Poly<Rational, N> {
    pub fn to_real<T: Real>(&self) -> Poly<T, N> {
        self.map_coeffs(|c| rational_to_real(c))
    }

    pub fn to_text(&self, names: &[&str; N]) -> String {
        self.format_with(names, |c| (c.is_negative(), format_rational(&c.abs())))
    }
}

impl<T: Real, const N: usize> Poly<T, N> {
    pub fn eval(&self, x: [T; N]) -> T {
        self.eval_with(&x, |c| *c)
    }
}

impl<C: Coeff + Debug, const N: usize> Debug for Poly<C, N> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

impl<C: Coeff, const N: usize> Add for &Poly<C, N> {
    type Output = Poly<C, N>;
    fn add(self, rhs: Self) -> Poly<C, N> {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl<C: Coeff, const N: usize> Sub for &Poly<C, N> {
    type Output = Poly<C, N>;
    fn sub(self, rhs: Self) -> Poly<C, N> {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, -c.clone());
        }
        out
    }
}

impl<C: Coeff, const N: usize> Mul for &Poly<C, N> {
    type Output = Poly<C, N>;
    fn mul(self, rhs: Self) -> Poly<C, N> {
        let mut out = Poly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let mut e = [0; N];
                for i in 0..N {
                    e[i] = ea[i] + eb[i];
                }
                out.add_term(e, ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<C: Coeff, const N: usize> Neg for &Poly<C, N> {
    type Output = Poly<C, N>;
    fn neg(self) -> Poly<C, N> {
        self.map_coeffs(|c| -c.clone())
    }
}

pub fn rational_to_real<T: Real>(c: &Rational) -> T {
    let n = c.numer().to_f64().unwrap_or(f64::NAN);
    let d = c.denom().to_f64().unwrap_or(f64::NAN);
    // Dividing in T keeps exact small rationals exact.
    nalgebra::convert::<f64, T>(n) / nalgebra::convert::<f64, T>(d)
}

/// Exact decimal when the denominator is `2^a 5^b`, otherwise `n/d`.
pub fn format_rational(c: &Rational) -> String {
    let (n, d) = (*c.numer(), *c.denom());
    if d == 1 {
        return n.to_string();
    }
    let (mut a, mut b, mut r) = (0u32, 0u32, d);
    while r % 2 == 0 {
        r /= 2;
        a += 1;
    }
    while r % 5 == 0 {
        r /= 5;
        b += 1;
    }
    if r == 1 {
        let k = a.max(b);
        if let Some(scaled) = 10i128.checked_pow(k).and_then(|p| n.checked_mul(p / d)) {
            let neg = scaled < 0;
            let digits = scaled.unsigned_abs().to_string();
            let k = k as usize;
            let padded =
                if digits.len() <= k { format!("{}{}", "0".repeat(k + 1 - digits.len()), digits) } else { digits };
            let (int, frac) = padded.split_at(padded.len() - k);
            return format!("{}{}.{}", if neg { "-" } else { "" }, int, frac);
        }
    }
    format!("{n}/{d}")
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Caret,
    Star,
    Slash,
    Plus,
    Minus,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        match c {
            '^' => out.push((Tok::Caret, col)),
            '*' => out.push((Tok::Star, col)),
            '/' => out.push((Tok::Slash, col)),
            '+' => out.push((Tok::Plus, col)),
            '-' | '\u{2212}' => out.push((Tok::Minus, col)),
            _ if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                let mut exp: i32 = 0;
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    let mut sign = 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        sign = if chars[j] == '-' { -1 } else { 1 };
                        j += 1;
                    }
                    let ds = j;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    if j > ds {
                        let s: String = chars[ds..j].iter().collect();
                        exp = sign * s.parse::<i32>().map_err(|_| perr(col, "exponent too large"))?;
                        i = j;
                    }
                }
                let s: String = chars[start..i].iter().take_while(|c| c.is_ascii_digit() || **c == '.').collect();
                out.push((Tok::Num(parse_decimal(&s, exp, col)?), col));
                continue;
            }
            _ if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), col));
                continue;
            }
            _ => return Err(perr(col, &format!("unexpected character '{c}'"))),
        }
        i += 1;
    }
    Ok(out)
}

fn perr(column: usize, message: &str) -> Error {
    Error::Parse { column, message: message.to_string() }
}

fn parse_decimal(s: &str, exp: i32, col: usize) -> Result<Rational> {
    let mut parts = s.splitn(2, '.');
    let int = parts.next().unwrap_or("");
    let frac = parts.next().unwrap_or("");
    if frac.contains('.') || (int.is_empty() && frac.is_empty()) {
        return Err(perr(col, &format!("malformed number '{s}'")));
    }
    let digits = format!("{int}{frac}");
    let mantissa: i128 = digits.parse().map_err(|_| perr(col, "number too large"))?;
    let scale = frac.len() as i32 - exp;
    let overflow = || perr(col, "number out of range");
    if scale >= 0 {
        let d = 10i128.checked_pow(scale as u32).ok_or_else(overflow)?;
        Ok(Ratio::new(mantissa, d))
    } else {
        let m = 10i128.checked_pow((-scale) as u32).and_then(|p| mantissa.checked_mul(p)).ok_or_else(overflow)?;
        Ok(Ratio::from_integer(m))
    }
}

fn resolve_var<const N: usize>(name: &str, names: &[&str; N]) -> Option<usize> {
    let canonical = match name {
        "θ" => "theta",
        "φ" | "ϕ" => "phi",
        other => other,
    };
    names.iter().position(|n| *n == canonical)
}

/// Parses polynomial text over the given variable names with exact coefficients.
pub fn parse_poly<const N: usize>(text: &str, names: &[&str; N]) -> Result<Poly<Rational, N>> {
    let toks = tokenize(text)?;
    let end_col = text.chars().count() + 1;
    if toks.is_empty() {
        return Err(perr(1, "empty expression"));
    }
    let mut out = Poly::zero();
    let mut i = 0;
    let mut first = true;
    while i < toks.len() {
        let mut sign = Rational::one();
        match &toks[i].0 {
            Tok::Plus | Tok::Minus => {
                if matches!(toks[i].0, Tok::Minus) {
                    sign = -sign;
                }
                i += 1;
            }
            _ if !first => return Err(perr(toks[i].1, "expected '+' or '-' between terms")),
            _ => {}
        }
        first = false;
        let mut coeff = sign;
        let mut exps = [0u32; N];
        let mut nfactors = 0;
        loop {
            if i >= toks.len() {
                break;
            }
            let (tok, col) = &toks[i];
            match tok {
                Tok::Num(v) => {
                    let mut v = *v;
                    i += 1;
                    if i < toks.len() && toks[i].0 == Tok::Slash {
                        let scol = toks[i].1;
                        i += 1;
                        match toks.get(i) {
                            Some((Tok::Num(d), dcol)) => {
                                if d.is_zero() {
                                    return Err(perr(*dcol, "division by zero"));
                                }
                                v /= *d;
                                i += 1;
                            }
                            _ => return Err(perr(scol + 1, "expected a number after '/'")),
                        }
                    }
                    coeff *= v;
                }
                Tok::Ident(name) => {
                    let idx = resolve_var(name, names).ok_or_else(|| {
                        perr(*col, &format!("unknown variable '{name}' (expected one of {})", names.join(", ")))
                    })?;
                    i += 1;
                    let mut k = 1u32;
                    if i < toks.len() && toks[i].0 == Tok::Caret {
                        let ccol = toks[i].1;
                        i += 1;
                        match toks.get(i) {
                            Some((Tok::Num(e), ecol)) => {
                                if !e.is_integer() || e.is_negative() {
                                    return Err(perr(*ecol, "exponent must be a non-negative integer"));
                                }
                                k = e.to_integer().try_into().map_err(|_| perr(*ecol, "exponent too large"))?;
                                i += 1;
                            }
                            _ => return Err(perr(ccol + 1, "expected an integer exponent after '^'")),
                        }
                    }
                    exps[idx] += k;
                }
                Tok::Star if nfactors > 0 => {
                    i += 1;
                    if !matches!(toks.get(i).map(|t| &t.0), Some(Tok::Num(_)) | Some(Tok::Ident(_))) {
                        let c = toks.get(i).map(|t| t.1).unwrap_or(end_col);
                        return Err(perr(c, "expected a factor after '*'"));
                    }
                    continue;
                }
                Tok::Plus | Tok::Minus if nfactors > 0 => break,
                _ => return Err(perr(*col, "expected a number or variable")),
            }
            nfactors += 1;
        }
        if nfactors == 0 {
            return Err(perr(end_col, "expected a term"));
        }
        out.add_term(exps, coeff);
    }
    Ok(out)
}

pub fn parse_planar(text: &str) -> Result<PlanarPoly<Rational>> {
    parse_poly(text, &PLANAR_VARS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_examples() {
        let h = parse_planar("0.5*p^2 + 0.5*q^2").unwrap();
        assert_eq!(h.coeff([2, 0]), Ratio::new(1, 2));
        assert_eq!(h.coeff([0, 2]), Ratio::new(1, 2));
        let h = parse_planar("q^4").unwrap();
        assert_eq!(h.coeff([0, 4]), Ratio::one());
        let h = parse_planar("0.5*p^2+0.5*q^2+q^4").unwrap();
        assert_eq!(h.len(), 3);
        let h = parse_planar("-3/4 p^2 q - 2*q*q").unwrap();
        assert_eq!(h.coeff([2, 1]), Ratio::new(-3, 4));
        assert_eq!(h.coeff([0, 2]), Ratio::from_integer(-2));
    }

    #[test]
    fn reports_columns() {
        match parse_planar("p^2 + x") {
            Err(Error::Parse { column, .. }) => assert_eq!(column, 7),
            other => panic!("{other:?}"),
        }
        match parse_planar("p^ + q") {
            Err(Error::Parse { column, .. }) => assert_eq!(column, 3),
            other => panic!("{other:?}"),
        }
        assert!(parse_planar("").is_err());
        assert!(parse_planar("p q +").is_err());
        assert!(parse_planar("1/0").is_err());
    }

    #[test]
    fn prints_canonically() {
        let h = parse_planar("q^4 + 0.5*q^2 + 0.5*p^2 - 1/3").unwrap();
        assert_eq!(h.to_text(&PLANAR_VARS), "q^4 + 0.5*p^2 + 0.5*q^2 - 1/3");
        assert_eq!(parse_planar("0.125*p").unwrap().to_text(&PLANAR_VARS), "0.125*p");
        assert_eq!(parse_planar("-p*q").unwrap().to_text(&PLANAR_VARS), "-p*q");
        assert_eq!(parse_planar("p - p").unwrap().to_text(&PLANAR_VARS), "0");
    }

    #[test]
    fn arithmetic() {
        let p = PlanarPoly::<Rational>::var(0);
        let q = PlanarPoly::<Rational>::var(1);
        let s = &(&p + &q) * &(&p - &q);
        assert_eq!(s, &p.pow(2) - &q.pow(2));
        assert_eq!(s.derivative(0), p.scale(&Ratio::from_integer(2)));
        let sub = s.substitute(1, &p);
        assert!(sub.is_zero());
        let f = parse_planar("p^2 q + 2").unwrap().to_real::<f64>();
        assert_eq!(f.eval([3.0, 0.5]), 6.5);
    }
}
