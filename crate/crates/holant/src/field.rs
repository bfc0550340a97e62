//! Exact arithmetic in the eighth cyclotomic field Q(zeta8) = Q(i, sqrt2).
//!
//! Elements are stored as `c0 + c1*z + c2*z^2 + c3*z^3` with `z^4 = -1`.
//! An approximate complex mode lives in [`Value`]; it never mixes with exact
//! values implicitly.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_complex::Complex64;
use num_rational::BigRational;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rat = BigRational;

/// Tolerance used by approximate comparisons.
pub const APPROX_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("zero input")]
    ZeroInput,
    #[error("element {0} is not of the form q*z8^k or q*sqrt2*z8^k")]
    NotDecomposable(String),
    #[error("cannot factor magnitude {0} within the trial-division budget")]
    FactorLimit(String),
    #[error("exact and approximate values cannot be combined")]
    ModeMismatch,
    #[error("bad field literal {literal:?}: {reason}")]
    Parse { literal: String, reason: String },
}

/// Exact element of Q(zeta8).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldElem {
    c: [Rat; 4],
}

fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

impl FieldElem {
    pub fn new(c0: Rat, c1: Rat, c2: Rat, c3: Rat) -> Self {
        FieldElem { c: [c0, c1, c2, c3] }
    }

    pub fn from_coeffs(c: [Rat; 4]) -> Self {
        FieldElem { c }
    }

    pub fn coeffs(&self) -> &[Rat; 4] {
        &self.c
    }

    pub fn from_rat(q: Rat) -> Self {
        FieldElem::new(q, Rat::zero(), Rat::zero(), Rat::zero())
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rat(rat(n))
    }

    pub fn frac(n: i64, d: i64) -> Self {
        Self::from_rat(Rat::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn i() -> Self {
        zeta8_pow(2)
    }

    pub fn sqrt2() -> Self {
        FieldElem::new(Rat::zero(), rat(1), Rat::zero(), rat(-1))
    }

    /// Gaussian rational `re + im*i`.
    pub fn gaussian(re: Rat, im: Rat) -> Self {
        FieldElem::new(re, Rat::zero(), im, Rat::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|q| q.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.c[0].is_one() && self.c[1..].iter().all(|q| q.is_zero())
    }

    pub fn as_rational(&self) -> Option<&Rat> {
        if self.c[1..].iter().all(|q| q.is_zero()) {
            Some(&self.c[0])
        } else {
            None
        }
    }

    /// Complex conjugation, z -> z^7.
    pub fn conj(&self) -> Self {
        let [c0, c1, c2, c3] = &self.c;
        FieldElem::new(c0.clone(), -c3, -c2, -c1)
    }

    /// Galois automorphism z -> z^k for odd k.
    pub fn galois(&self, k: i64) -> Self {
        let k = k.rem_euclid(8);
        assert!(k % 2 == 1, "galois exponent must be odd");
        let mut out = FieldElem::zero();
        for (j, q) in self.c.iter().enumerate() {
            if !q.is_zero() {
                out += &(zeta8_pow(k * j as i64) * &FieldElem::from_rat(q.clone()));
            }
        }
        out
    }

    /// |x|^2 = x * conj(x), an element of the real subfield Q(sqrt2).
    pub fn norm_sq(&self) -> Self {
        self * &self.conj()
    }

    /// True when x lies in Q(sqrt2), the fixed field of conjugation.
    pub fn is_real(&self) -> bool {
        self.c[2].is_zero() && self.c[3] == -self.c[1].clone()
    }

    pub fn is_unimodular(&self) -> bool {
        self.norm_sq().is_one()
    }

    pub fn inv(&self) -> Result<Self, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        // x * conj(x) is real; multiply by its sqrt2-conjugate to land in Q.
        let n = self.norm_sq();
        let n_bar = n.galois(5);
        let q = (&n * &n_bar)
            .as_rational()
            .cloned()
            .expect("norm of a field element is rational");
        Ok(&(&self.conj() * &n_bar) * &FieldElem::from_rat(q.recip()))
    }

    pub fn try_div(&self, other: &Self) -> Result<Self, FieldError> {
        Ok(self * &other.inv()?)
    }

    pub fn scale(&self, q: &Rat) -> Self {
        FieldElem::from_coeffs([&self.c[0] * q, &self.c[1] * q, &self.c[2] * q, &self.c[3] * q])
    }

    pub fn square(&self) -> Self {
        self * self
    }

    /// Integer power; negative exponents go through the exact inverse.
    pub fn pow(&self, e: i64) -> Result<Self, FieldError> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut n = e.unsigned_abs();
        let mut acc = FieldElem::one();
        let mut b = base;
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &b;
            }
            b = &b * &b;
            n >>= 1;
        }
        Ok(acc)
    }

    /// Multiplicative order if x is a root of unity.
    pub fn root_of_unity_order(&self) -> Result<Option<u32>, FieldError> {
        if self.is_zero() {
            return Err(FieldError::ZeroInput);
        }
        let mut p = self.clone();
        for n in 1..=8u32 {
            if p.is_one() {
                return Ok(Some(n));
            }
            p = &p * self;
        }
        Ok(None)
    }

    /// Exponent k with x = z8^k, if x is an eighth root of unity.
    pub fn zeta8_log(&self) -> Option<u32> {
        (0..8).find(|&k| *self == zeta8_pow(k as i64))
    }

    /// Exponent k with x = i^k.
    pub fn i_log(&self) -> Option<u32> {
        self.zeta8_log().filter(|k| k % 2 == 0).map(|k| k / 2)
    }

    pub fn to_complex(&self) -> Complex64 {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let f = |q: &Rat| q.to_f64().unwrap_or(f64::NAN);
        let (c0, c1, c2, c3) = (f(&self.c[0]), f(&self.c[1]), f(&self.c[2]), f(&self.c[3]));
        Complex64::new(c0 + h * c1 - h * c3, c2 + h * c1 + h * c3)
    }

    /// Square root inside the field, if one exists.
    pub fn sqrt(&self) -> Option<Self> {
        if self.is_zero() {
            return Some(FieldElem::zero());
        }
        // Tower Q(sqrt2)(i): write x = A + B*i with A, B real.
        let two = FieldElem::from_int(2);
        let a = (self + &self.conj()).try_div(&two).ok()?;
        let b = (self - &self.conj()).try_div(&(&two * &FieldElem::i())).ok()?;
        let cands: Vec<FieldElem> = if b.is_zero() {
            let mut v = Vec::new();
            if let Some(p) = sqrt_real(&a) {
                v.push(p);
            }
            if let Some(q) = sqrt_real(&-&a) {
                v.push(&q * &FieldElem::i());
            }
            v
        } else {
            let mut v = Vec::new();
            if let Some(n) = sqrt_real(&(&a.square() + &b.square())) {
                for n in [n.clone(), -&n] {
                    let half = (&a + &n).try_div(&two).ok()?;
                    if let Some(p) = sqrt_real(&half) {
                        if p.is_zero() {
                            continue;
                        }
                        let q = b.try_div(&(&two * &p)).ok()?;
                        v.push(&p + &(&q * &FieldElem::i()));
                    }
                }
            }
            v
        };
        cands.into_iter().find(|s| s.square() == *self)
    }
}

fn rat_sqrt(q: &Rat) -> Option<Rat> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    if &(&n * &n) == q.numer() && &(&d * &d) == q.denom() {
        Some(Rat::new(n, d))
    } else {
        None
    }
}

/// Square root of an element of Q(sqrt2) inside Q(sqrt2).
fn sqrt_real(x: &FieldElem) -> Option<FieldElem> {
    if !x.is_real() {
        return None;
    }
    let p = x.c[0].clone();
    let q = x.c[1].clone();
    let from_uv = |u: Rat, v: Rat| &FieldElem::from_rat(u) + &FieldElem::sqrt2().scale(&v);
    let mut cands = Vec::new();
    if q.is_zero() {
        if let Some(u) = rat_sqrt(&p) {
            cands.push(from_uv(u, Rat::zero()));
        }
        if let Some(v) = rat_sqrt(&(&p / rat(2))) {
            cands.push(from_uv(Rat::zero(), v));
        }
    } else if let Some(disc) = rat_sqrt(&(&p * &p - rat(2) * &q * &q)) {
        for s in [disc.clone(), -disc] {
            if let Some(u) = rat_sqrt(&((&p + &s) / rat(2))) {
                if !u.is_zero() {
                    let v = &q / (rat(2) * &u);
                    cands.push(from_uv(u, v));
                }
            }
        }
    }
    cands.into_iter().find(|s| s.square() == *x)
}

/// z8^k in canonical form.
pub fn zeta8_pow(k: i64) -> FieldElem {
    let k = k.rem_euclid(8) as usize;
    let mut c = [Rat::zero(), Rat::zero(), Rat::zero(), Rat::zero()];
    if k < 4 {
        c[k] = rat(1);
    } else {
        c[k - 4] = rat(-1);
    }
    FieldElem { c }
}

impl Zero for FieldElem {
    fn zero() -> Self {
        FieldElem::new(Rat::zero(), Rat::zero(), Rat::zero(), Rat::zero())
    }
    fn is_zero(&self) -> bool {
        FieldElem::is_zero(self)
    }
}

impl One for FieldElem {
    fn one() -> Self {
        FieldElem::from_int(1)
    }
}

impl Default for FieldElem {
    fn default() -> Self {
        FieldElem::zero()
    }
}

impl From<i64> for FieldElem {
    fn from(n: i64) -> Self {
        FieldElem::from_int(n)
    }
}

impl From<Rat> for FieldElem {
    fn from(q: Rat) -> Self {
        FieldElem::from_rat(q)
    }
}

impl<'a> Add<&'a FieldElem> for &'a FieldElem {
    type Output = FieldElem;
    fn add(self, o: &FieldElem) -> FieldElem {
        FieldElem::from_coeffs([
            &self.c[0] + &o.c[0],
            &self.c[1] + &o.c[1],
            &self.c[2] + &o.c[2],
            &self.c[3] + &o.c[3],
        ])
    }
}

impl<'a> Sub<&'a FieldElem> for &'a FieldElem {
    type Output = FieldElem;
    fn sub(self, o: &FieldElem) -> FieldElem {
        FieldElem::from_coeffs([
            &self.c[0] - &o.c[0],
            &self.c[1] - &o.c[1],
            &self.c[2] - &o.c[2],
            &self.c[3] - &o.c[3],
        ])
    }
}

/// Integer numerators over one common denominator.
fn over_common_denominator(c: &[Rat; 4]) -> ([BigInt; 4], BigInt) {
    let d = c.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let nums = std::array::from_fn(|k| c[k].numer() * (&d / c[k].denom()));
    (nums, d)
}

impl<'a> Mul<&'a FieldElem> for &'a FieldElem {
    type Output = FieldElem;
    fn mul(self, o: &FieldElem) -> FieldElem {
        // integer convolution mod z^4 + 1, one reduction per output coefficient
        let (a, da) = over_common_denominator(&self.c);
        let (b, db) = over_common_denominator(&o.c);
        let mut out: [BigInt; 4] = Default::default();
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                let p = x * y;
                let k = i + j;
                if k < 4 {
                    out[k] += p;
                } else {
                    out[k - 4] -= p;
                }
            }
        }
        let den = da * db;
        let c = if den.is_one() {
            out.map(Rat::from_integer)
        } else {
            out.map(|n| Rat::new(n, den.clone()))
        };
        FieldElem { c }
    }
}

impl<'a> Neg for &'a FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        FieldElem::from_coeffs([-&self.c[0], -&self.c[1], -&self.c[2], -&self.c[3]])
    }
}

impl Neg for FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        -&self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<FieldElem> for FieldElem {
            type Output = FieldElem;
            fn $m(self, o: FieldElem) -> FieldElem {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a FieldElem> for FieldElem {
            type Output = FieldElem;
            fn $m(self, o: &FieldElem) -> FieldElem {
                (&self).$m(o)
            }
        }
        impl<'a> $tr<FieldElem> for &'a FieldElem {
            type Output = FieldElem;
            fn $m(self, o: FieldElem) -> FieldElem {
                self.$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl AddAssign<&FieldElem> for FieldElem {
    fn add_assign(&mut self, o: &FieldElem) {
        for k in 0..4 {
            self.c[k] += &o.c[k];
        }
    }
}

impl SubAssign<&FieldElem> for FieldElem {
    fn sub_assign(&mut self, o: &FieldElem) {
        for k in 0..4 {
            self.c[k] -= &o.c[k];
        }
    }
}

impl MulAssign<&FieldElem> for FieldElem {
    fn mul_assign(&mut self, o: &FieldElem) {
        *self = &*self * o;
    }
}

impl std::iter::Sum for FieldElem {
    fn sum<I: Iterator<Item = FieldElem>>(iter: I) -> Self {
        let mut acc = FieldElem::zero();
        for x in iter {
            acc += &x;
        }
        acc
    }
}

impl std::iter::Product for FieldElem {
    fn product<I: Iterator<Item = FieldElem>>(iter: I) -> Self {
        let mut acc = FieldElem::one();
        for x in iter {
            acc *= &x;
        }
        acc
    }
}

// Printing uses the basis 1, I, R2, I*R2:
// c1*z + c3*z^3 = (c1-c3)/2*R2 + (c1+c3)/2*I*R2.
impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let two = rat(2);
        let parts = [
            (self.c[0].clone(), ""),
            (self.c[2].clone(), "I"),
            ((&self.c[1] - &self.c[3]) / &two, "R2"),
            ((&self.c[1] + &self.c[3]) / &two, "I*R2"),
        ];
        let mut first = true;
        for (q, unit) in parts.iter() {
            if q.is_zero() {
                continue;
            }
            let neg = q.is_negative();
            let mag = q.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            if unit.is_empty() {
                write!(f, "{}", mag)?;
            } else if mag.is_one() {
                write!(f, "{}", unit)?;
            } else {
                write!(f, "{}*{}", mag, unit)?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

fn parse_err(lit: &str, reason: impl Into<String>) -> FieldError {
    FieldError::Parse { literal: lit.to_string(), reason: reason.into() }
}

fn parse_rat(s: &str, lit: &str) -> Result<Rat, FieldError> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    if let Some((ip, fp)) = n.split_once('.') {
        if d != "1" {
            return Err(parse_err(lit, "decimal numerator with denominator"));
        }
        let digits = format!("{}{}", ip, fp);
        let num: BigInt = digits.parse().map_err(|_| parse_err(lit, format!("bad number {s:?}")))?;
        let den = num_traits::pow(BigInt::from(10), fp.len());
        return Ok(Rat::new(num, den));
    }
    let num: BigInt = n.parse().map_err(|_| parse_err(lit, format!("bad number {n:?}")))?;
    let den: BigInt = d.parse().map_err(|_| parse_err(lit, format!("bad number {d:?}")))?;
    if den.is_zero() {
        return Err(parse_err(lit, "zero denominator"));
    }
    Ok(Rat::new(num, den))
}

fn parse_factor(tok: &str, lit: &str) -> Result<FieldElem, FieldError> {
    let t = tok.trim();
    match t {
        "I" | "i" => return Ok(FieldElem::i()),
        "R2" => return Ok(FieldElem::sqrt2()),
        "Z8" => return Ok(zeta8_pow(1)),
        _ => {}
    }
    if let Some(k) = t.strip_prefix("Z8^") {
        let k: i64 = k.trim().parse().map_err(|_| parse_err(lit, format!("bad exponent in {t:?}")))?;
        return Ok(zeta8_pow(k));
    }
    Ok(FieldElem::from_rat(parse_rat(t, lit)?))
}

fn parse_term(term: &str, lit: &str) -> Result<FieldElem, FieldError> {
    let mut acc = FieldElem::one();
    for part in term.split('*') {
        if part.trim().is_empty() {
            return Err(parse_err(lit, "empty factor"));
        }
        acc = &acc * &parse_factor(part, lit)?;
    }
    Ok(acc)
}

impl FromStr for FieldElem {
    type Err = FieldError;
    fn from_str(lit: &str) -> Result<Self, FieldError> {
        let s: String = lit.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(parse_err(lit, "empty literal"));
        }
        // Split on + and - that are not the leading sign or part of an exponent.
        let bytes = s.as_bytes();
        let mut terms = Vec::new();
        let mut start = 0;
        for i in 1..bytes.len() {
            let ch = bytes[i];
            if (ch == b'+' || ch == b'-') && bytes[i - 1] != b'^' && bytes[i - 1] != b'*' {
                terms.push(&s[start..i]);
                start = i;
            }
        }
        terms.push(&s[start..]);
        let mut acc = FieldElem::zero();
        for t in terms {
            let (neg, body) = match t.as_bytes()[0] {
                b'-' => (true, &t[1..]),
                b'+' => (false, &t[1..]),
                _ => (false, t),
            };
            if body.is_empty() {
                return Err(parse_err(lit, "dangling sign"));
            }
            let v = parse_term(body, lit)?;
            if neg {
                acc -= &v;
            } else {
                acc += &v;
            }
        }
        Ok(acc)
    }
}

/// A value tagged with its arithmetic mode.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Exact(FieldElem),
    Approx(Complex64),
}

impl Value {
    pub fn to_approx(&self) -> Value {
        match self {
            Value::Exact(x) => Value::Approx(x.to_complex()),
            Value::Approx(z) => Value::Approx(*z),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Value::Exact(_))
    }

    fn zip<F, G>(&self, o: &Value, fe: F, fa: G) -> Result<Value, FieldError>
    where
        F: FnOnce(&FieldElem, &FieldElem) -> Result<FieldElem, FieldError>,
        G: FnOnce(Complex64, Complex64) -> Result<Complex64, FieldError>,
    {
        match (self, o) {
            (Value::Exact(a), Value::Exact(b)) => Ok(Value::Exact(fe(a, b)?)),
            (Value::Approx(a), Value::Approx(b)) => Ok(Value::Approx(fa(*a, *b)?)),
            _ => Err(FieldError::ModeMismatch),
        }
    }

    pub fn add(&self, o: &Value) -> Result<Value, FieldError> {
        self.zip(o, |a, b| Ok(a + b), |a, b| Ok(a + b))
    }

    pub fn sub(&self, o: &Value) -> Result<Value, FieldError> {
        self.zip(o, |a, b| Ok(a - b), |a, b| Ok(a - b))
    }

    pub fn mul(&self, o: &Value) -> Result<Value, FieldError> {
        self.zip(o, |a, b| Ok(a * b), |a, b| Ok(a * b))
    }

    pub fn div(&self, o: &Value) -> Result<Value, FieldError> {
        self.zip(o, |a, b| a.try_div(b), |a, b| {
            if b.norm() < APPROX_EPS {
                Err(FieldError::DivisionByZero)
            } else {
                Ok(a / b)
            }
        })
    }

    pub fn conj(&self) -> Value {
        match self {
            Value::Exact(x) => Value::Exact(x.conj()),
            Value::Approx(z) => Value::Approx(z.conj()),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Value::Exact(x) => x.is_zero(),
            Value::Approx(z) => z.norm() < APPROX_EPS,
        }
    }

    /// Equality: exact for exact values, within `APPROX_EPS` otherwise.
    pub fn same(&self, o: &Value) -> Result<bool, FieldError> {
        match (self, o) {
            (Value::Exact(a), Value::Exact(b)) => Ok(a == b),
            (Value::Approx(a), Value::Approx(b)) => Ok((a - b).norm() < APPROX_EPS),
            _ => Err(FieldError::ModeMismatch),
        }
    }

    pub fn on_unit_circle(&self) -> bool {
        match self {
            Value::Exact(x) => x.is_unimodular(),
            Value::Approx(z) => (z.norm() - 1.0).abs() < APPROX_EPS,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(x) => write!(f, "{}", x),
            Value::Approx(z) => write!(f, "~({},{})", z.re, z.im),
        }
    }
}

impl FromStr for Value {
    type Err = FieldError;
    fn from_str(s: &str) -> Result<Self, FieldError> {
        let t = s.trim();
        if let Some(body) = t.strip_prefix("~(").and_then(|b| b.strip_suffix(')')) {
            let (re, im) = body.split_once(',').ok_or_else(|| parse_err(s, "expected ~(re,im)"))?;
            let re: f64 = re.trim().parse().map_err(|_| parse_err(s, "bad real part"))?;
            let im: f64 = im.trim().parse().map_err(|_| parse_err(s, "bad imaginary part"))?;
            return Ok(Value::Approx(Complex64::new(re, im)));
        }
        Ok(Value::Exact(t.parse()?))
    }
}

/// x = magnitude * phase with magnitude a product of prime powers with
/// half-integer exponents and phase an eighth root of unity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MagPhase {
    /// prime -> twice the exponent
    pub twice_exponents: BTreeMap<BigUint, i64>,
    /// phase is zeta16^phase16; always even for elements of the field.
    pub phase16: u32,
}

impl MagPhase {
    pub fn magnitude_is_one(&self) -> bool {
        self.twice_exponents.is_empty()
    }

    pub fn reconstruct(&self) -> FieldElem {
        let mut q = Rat::one();
        let mut half_two = false;
        for (p, e2) in &self.twice_exponents {
            let pb = BigInt::from_biguint(Sign::Plus, p.clone());
            let full = e2.div_euclid(2);
            let rem = e2.rem_euclid(2);
            let pw = Rat::from_integer(num_traits::pow(pb, full.unsigned_abs() as usize));
            q *= if full < 0 { pw.recip() } else { pw };
            if rem == 1 {
                debug_assert!(*p == BigUint::from(2u32));
                half_two = true;
            }
        }
        let mut x = FieldElem::from_rat(q);
        if half_two {
            x = &x * &FieldElem::sqrt2();
        }
        &x * &zeta8_pow((self.phase16 / 2) as i64)
    }
}

const TRIAL_LIMIT: u64 = 2_000_000;

fn factor_into(n: &BigUint, sign: i64, out: &mut BTreeMap<BigUint, i64>) -> Result<(), FieldError> {
    let mut n = n.clone();
    let mut p = 2u64;
    while !n.is_one() {
        if p > TRIAL_LIMIT {
            return Err(FieldError::FactorLimit(n.to_string()));
        }
        let pb = BigUint::from(p);
        if &pb * &pb > n {
            *out.entry(n.clone()).or_insert(0) += 2 * sign;
            break;
        }
        while (&n % &pb).is_zero() {
            n /= &pb;
            *out.entry(pb.clone()).or_insert(0) += 2 * sign;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    Ok(())
}

/// Decompose x as q*z8^k or q*sqrt2*z8^k with q a positive rational.
pub fn mag_phase(x: &FieldElem) -> Result<MagPhase, FieldError> {
    if x.is_zero() {
        return Err(FieldError::ZeroInput);
    }
    for k in 0..8i64 {
        let y = x * &zeta8_pow(-k);
        let (q, root2) = if y.c[1].is_zero() && y.c[2].is_zero() && y.c[3].is_zero() {
            (y.c[0].clone(), false)
        } else if y.c[0].is_zero() && y.c[2].is_zero() && y.c[3] == -y.c[1].clone() {
            (y.c[1].clone(), true)
        } else {
            continue;
        };
        if !q.is_positive() {
            continue;
        }
        let mut ex = BTreeMap::new();
        factor_into(&q.numer().magnitude().clone(), 1, &mut ex)?;
        factor_into(&q.denom().magnitude().clone(), -1, &mut ex)?;
        if root2 {
            *ex.entry(BigUint::from(2u32)).or_insert(0) += 1;
        }
        ex.retain(|_, e| *e != 0);
        return Ok(MagPhase { twice_exponents: ex, phase16: (2 * k) as u32 });
    }
    Err(FieldError::NotDecomposable(x.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fe(s: &str) -> FieldElem {
        s.parse().unwrap()
    }

    #[test]
    fn powers_of_zeta() {
        assert_eq!(zeta8_pow(2), FieldElem::new(rat(0), rat(0), rat(1), rat(0)));
        assert_eq!(zeta8_pow(4), FieldElem::from_int(-1));
        assert_eq!(&zeta8_pow(1) + &zeta8_pow(7), FieldElem::sqrt2());
        assert_eq!(zeta8_pow(-1), zeta8_pow(7));
    }

    #[test]
    fn basic_arith() {
        let one_i = fe("1+I");
        let one_mi = fe("1-I");
        assert_eq!(&one_i * &one_mi, FieldElem::from_int(2));
        assert_eq!(FieldElem::i().inv().unwrap(), -FieldElem::i());
        assert_eq!(FieldElem::sqrt2().square(), FieldElem::from_int(2));
        assert_eq!(FieldElem::zero().inv(), Err(FieldError::DivisionByZero));
    }

    #[test]
    fn inverse_of_generic_element() {
        let x = fe("3/2 - 2*Z8^1 + 5*I + 7/3*Z8^3");
        assert!((&x * &x.inv().unwrap()).is_one());
    }

    #[test]
    fn root_of_unity_orders() {
        assert_eq!(FieldElem::i().root_of_unity_order().unwrap(), Some(4));
        assert_eq!(zeta8_pow(1).root_of_unity_order().unwrap(), Some(8));
        assert_eq!(FieldElem::from_int(2).root_of_unity_order().unwrap(), None);
        assert_eq!(FieldElem::from_int(-1).root_of_unity_order().unwrap(), Some(2));
        assert!(FieldElem::zero().root_of_unity_order().is_err());
    }

    #[test]
    fn mag_phase_examples() {
        let m = mag_phase(&FieldElem::from_int(-3)).unwrap();
        assert_eq!(m.phase16, 8);
        assert_eq!(m.twice_exponents.get(&BigUint::from(3u32)), Some(&2));
        let m = mag_phase(&fe("1+I")).unwrap();
        assert_eq!(m.phase16, 2);
        assert_eq!(m.twice_exponents.get(&BigUint::from(2u32)), Some(&1));
        assert_eq!(m.reconstruct(), fe("1+I"));
        assert!(matches!(mag_phase(&fe("1+2*I")), Err(FieldError::NotDecomposable(_))));
    }

    #[test]
    fn literal_round_trip() {
        for s in ["0", "1/2 + 3/2*I", "-R2", "Z8^3", "2*I*R2 - 5", "-1/3*Z8^5 + 7"] {
            let x = fe(s);
            assert_eq!(fe(&x.to_string()), x, "{s}");
        }
        assert_eq!(fe("Z8^1"), fe("1/2*R2 + 1/2*I*R2"));
        assert_eq!(fe("0.25"), FieldElem::frac(1, 4));
        assert!("1+".parse::<FieldElem>().is_err());
        assert!("abc".parse::<FieldElem>().is_err());
    }

    #[test]
    fn sqrt_cases() {
        for s in ["4", "-9", "2", "I", "2*I", "-2", "3+2*R2", "9/4*I", "0"] {
            let x = fe(s);
            let r = x.sqrt().unwrap_or_else(|| panic!("no sqrt for {s}"));
            assert_eq!(r.square(), x);
        }
        for s in ["3", "1+I", "Z8^1", "5*I"] {
            assert!(fe(s).sqrt().is_none(), "{s}");
        }
        // (1 + z8)^2 is a square by construction
        let y = &FieldElem::one() + &zeta8_pow(1);
        assert_eq!(y.square().sqrt().unwrap().square(), y.square());
    }

    #[test]
    fn value_modes_do_not_mix() {
        let a: Value = "1".parse().unwrap();
        let b: Value = "~(1,0)".parse().unwrap();
        assert_eq!(a.add(&b), Err(FieldError::ModeMismatch));
        assert!(a.to_approx().same(&b).unwrap());
    }

    #[test]
    fn conj_and_complex() {
        let x = fe("1/2*R2 + 1/2*I*R2");
        let z = x.to_complex();
        assert!((z.re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((z.im - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(x.is_unimodular());
        assert!(fe("1+I").norm_sq() == FieldElem::from_int(2));
    }
}
