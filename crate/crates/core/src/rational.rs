//! Exact rationals over arbitrary-precision integers, plus the small
//! machine-word [`Fraction`] used by the Farey and search code.
//!
//! [`Rational`] is always stored in lowest terms with a positive
//! denominator, so equality is structural and every value has exactly one
//! textual form `num/den`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::numtheory;

/// gcd of two naturals.
///
/// `num-bigint` only ships Stein's binary algorithm, which degrades to one
/// subtraction per bit when the operands have very different sizes. Euclidean
/// remainder steps are taken until the sizes are close, and single-word
/// operands finish in machine arithmetic.
pub(crate) fn big_gcd(a: &BigUint, b: &BigUint) -> BigUint {
    let (mut a, mut b) = if a >= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    };
    loop {
        if b.is_zero() {
            return a;
        }
        if let Some(small) = b.to_u64() {
            let r = (&a % small).to_u64().expect("remainder below a u64");
            return BigUint::from(numtheory::gcd_u64(small, r));
        }
        if a.bits() > b.bits() + 32 {
            let r = &a % &b;
            a = std::mem::replace(&mut b, r);
        } else {
            return a.gcd(&b);
        }
    }
}

fn big_gcd_signed(a: &BigInt, b: &BigInt) -> BigInt {
    BigInt::from(big_gcd(a.magnitude(), b.magnitude()))
}

/// Exact rational number in canonical form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Rational {
    num: BigInt,
    den: BigInt,
}

impl Rational {
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self> {
        let (num, den) = (num.into(), den.into());
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::reduce(num, den))
    }

    fn reduce(mut num: BigInt, mut den: BigInt) -> Self {
        if den.is_negative() {
            num = -num;
            den = -den;
        }
        if num.is_zero() {
            return Self::zero();
        }
        let g = big_gcd_signed(&num, &den);
        if !g.is_one() {
            num /= &g;
            den /= &g;
        }
        Rational { num, den }
    }

    /// Wraps a pair the caller has already reduced.
    pub(crate) fn from_canonical(num: BigInt, den: BigInt) -> Self {
        debug_assert!(den.is_positive());
        // a full gcd on megabit operands would dominate debug runs
        debug_assert!(
            den.bits() > 1 << 14
                || big_gcd_signed(&num, &den).is_one()
                || num.is_zero() && den.is_one()
        );
        Rational { num, den }
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational {
            num: n.into(),
            den: BigInt::one(),
        }
    }

    pub fn zero() -> Self {
        Self::from_integer(0)
    }

    pub fn one() -> Self {
        Self::from_integer(1)
    }

    /// `1/n` for a nonzero integer.
    pub fn unit(n: i64) -> Result<Self> {
        Self::new(1, n)
    }

    pub fn numer(&self) -> &BigInt {
        &self.num
    }

    pub fn denom(&self) -> &BigInt {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.num.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.num.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.den.is_one()
    }

    pub fn floor(&self) -> BigInt {
        self.num.div_floor(&self.den)
    }

    pub fn abs(&self) -> Self {
        Rational {
            num: self.num.abs(),
            den: self.den.clone(),
        }
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let (mut num, mut den) = (self.den.clone(), self.num.clone());
        if den.is_negative() {
            num = -num;
            den = -den;
        }
        Ok(Rational { num, den })
    }

    pub fn checked_div(&self, rhs: &Rational) -> Result<Self> {
        Ok(self * &rhs.recip()?)
    }

    /// Multiplies by an integer without a general gcd on the numerator.
    pub fn mul_int(&self, k: &BigInt) -> Self {
        if k.is_zero() || self.is_zero() {
            return Self::zero();
        }
        let g = big_gcd_signed(k, &self.den);
        Rational::from_canonical(&self.num * (k / &g), &self.den / &g)
    }

    pub fn div_int(&self, k: &BigInt) -> Result<Self> {
        if k.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.is_zero() {
            return Ok(Self::zero());
        }
        let g = big_gcd_signed(k, &self.num);
        let (mut num, mut den) = (&self.num / &g, &self.den * (k / &g));
        if den.is_negative() {
            num = -num;
            den = -den;
        }
        Ok(Rational::from_canonical(num, den))
    }

    /// Nearest-ish double; within one unit in the last place for any
    /// magnitude of numerator and denominator.
    pub fn to_f64(&self) -> f64 {
        if self.num.is_zero() {
            return 0.0;
        }
        if let (Some(n), Some(d)) = (self.num.to_i64(), self.den.to_i64()) {
            if n.unsigned_abs() < 1 << 53 && d < 1 << 53 {
                return n as f64 / d as f64;
            }
        }
        let nb = self.num.bits() as i64;
        let db = self.den.bits() as i64;
        let shift = 66 - (nb - db);
        let mag = self.num.magnitude();
        let den = self.den.magnitude();
        let q = if shift >= 0 {
            (mag << shift as usize) / den
        } else {
            mag / (den << (-shift) as usize)
        };
        let mut v = q.to_f64().unwrap_or(f64::INFINITY);
        let mut e = -shift;
        while e > 0 {
            let step = e.min(1000);
            v *= 2f64.powi(step as i32);
            e -= step;
        }
        while e < 0 {
            let step = e.max(-1000);
            v *= 2f64.powi(step as i32);
            e -= step;
        }
        if self.num.is_negative() {
            -v
        } else {
            v
        }
    }

    /// Exact value of a finite double.
    pub fn from_f64(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(invalid(format!("{x} is not finite")));
        }
        if x == 0.0 {
            return Ok(Self::zero());
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1 } else { 1 };
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, exp) = if exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1 << 52), exp - 1075)
        };
        let m = BigInt::from(sign) * BigInt::from(mant);
        Ok(if exp >= 0 {
            Self::from_integer(m << exp as usize)
        } else {
            Self::reduce(m, BigInt::one() << (-exp) as usize)
        })
    }

    fn add_impl(&self, rhs: &Rational) -> Rational {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den == rhs.den {
            return Self::reduce(&self.num + &rhs.num, self.den.clone());
        }
        let g = big_gcd_signed(&self.den, &rhs.den);
        if g.is_one() {
            let num = &self.num * &rhs.den + &rhs.num * &self.den;
            return Rational::from_canonical(num, &self.den * &rhs.den);
        }
        let b_g = &self.den / &g;
        let d_g = &rhs.den / &g;
        let t = &self.num * &d_g + &rhs.num * &b_g;
        if t.is_zero() {
            return Self::zero();
        }
        let g2 = big_gcd_signed(&t, &g);
        if g2.is_one() {
            Rational::from_canonical(t, b_g * &rhs.den)
        } else {
            Rational::from_canonical(t / &g2, b_g * (&rhs.den / &g2))
        }
    }

    fn mul_impl(&self, rhs: &Rational) -> Rational {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero();
        }
        let g1 = big_gcd_signed(&self.num, &rhs.den);
        let g2 = big_gcd_signed(&rhs.num, &self.den);
        let num = (&self.num / &g1) * (&rhs.num / &g2);
        let den = (&self.den / &g2) * (&rhs.den / &g1);
        Rational::from_canonical(num, den)
    }
}

/// The four field operations, dispatched by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

pub fn arith(op: ArithOp, a: &Rational, b: &Rational) -> Result<Rational> {
    Ok(match op {
        ArithOp::Add => a + b,
        ArithOp::Sub => a - b,
        ArithOp::Mul => a * b,
        ArithOp::Div => a.checked_div(b)?,
    })
}

/// Total order by cross-multiplication.
pub fn compare(a: &Rational, b: &Rational) -> Ordering {
    a.cmp(b)
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        let sa = self.num.sign();
        let sb = other.num.sign();
        if sa != sb {
            let rank = |s: Sign| match s {
                Sign::Minus => 0,
                Sign::NoSign => 1,
                Sign::Plus => 2,
            };
            return rank(sa).cmp(&rank(sb));
        }
        if self.den == other.den {
            return self.num.cmp(&other.num);
        }
        (&self.num * &other.den).cmp(&(&other.num * &self.den))
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Default for Rational {
    fn default() -> Self {
        Self::zero()
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational {
            num: -self.num,
            den: self.den,
        }
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        -self.clone()
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $imp:expr) => {
        impl $tr<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                $imp(self, rhs)
            }
        }
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                $imp(&self, &rhs)
            }
        }
        impl $tr<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                $imp(&self, rhs)
            }
        }
        impl $tr<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                $imp(self, &rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a: &Rational, b: &Rational| a.add_impl(b));
forward_binop!(Sub, sub, |a: &Rational, b: &Rational| a.add_impl(&-b));
forward_binop!(Mul, mul, |a: &Rational, b: &Rational| a.mul_impl(b));

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        *self = self.add_impl(rhs);
    }
}

impl AddAssign<Rational> for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        *self = self.add_impl(&rhs);
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        *self = self.add_impl(&-rhs);
    }
}

impl MulAssign<&Rational> for Rational {
    fn mul_assign(&mut self, rhs: &Rational) {
        *self = self.mul_impl(rhs);
    }
}

impl<'a> std::iter::Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl std::iter::Sum<Rational> for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Self::from_integer(n)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Self::from_integer(n)
    }
}

impl From<Fraction> for Rational {
    fn from(f: Fraction) -> Self {
        Rational::from_canonical(f.num.into(), f.den.into())
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Accepts `p/q`, integers, and base-10 decimals with an optional exponent
/// (`0.37`, `-1.5e-3`). Decimals convert exactly, never through a double.
impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = || Error::Parse { input: s.to_string() };
        let t = s.trim();
        if let Some((p, q)) = t.split_once('/') {
            let p: BigInt = parse_integer(p.trim()).ok_or_else(err)?;
            let q: BigInt = parse_integer(q.trim()).ok_or_else(err)?;
            return Rational::new(p, q).map_err(|_| err());
        }
        parse_decimal(t).ok_or_else(err)
    }
}

fn parse_integer(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.strip_prefix('+').unwrap_or(s).parse().ok()
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, body) = match mantissa.as_bytes().first()? {
        b'-' => (true, &mantissa[1..]),
        b'+' => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let all_digits = |x: &str| x.bytes().all(|b| b.is_ascii_digit());
    if !all_digits(int_part) || !all_digits(frac_part) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut num: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().ok()?
    };
    if negative {
        num = -num;
    }
    let scale = exp as i64 - frac_part.len() as i64;
    let ten = BigInt::from(10);
    if scale >= 0 {
        Some(Rational::from_integer(num * num_traits::pow(ten, scale as usize)))
    } else {
        Rational::new(num, num_traits::pow(ten, (-scale) as usize)).ok()
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Reduced fraction `num/den` with `den >= 1`, in machine integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fraction {
    num: i64,
    den: i64,
}

impl Fraction {
    /// Normalises sign and reduces; fails only for a zero denominator.
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::DivisionByZero);
        }
        let g = numtheory::gcd(num, den) as i64;
        let (mut n, mut d) = (num / g, den / g);
        if d < 0 {
            n = -n;
            d = -d;
        }
        Ok(Fraction { num: n, den: d })
    }

    pub fn integer(n: i64) -> Self {
        Fraction { num: n, den: 1 }
    }

    pub fn num(&self) -> i64 {
        self.num
    }

    pub fn den(&self) -> i64 {
        self.den
    }

    pub fn to_rational(self) -> Rational {
        self.into()
    }

    /// Exact comparison via 128-bit cross products.
    pub fn cmp_exact(&self, other: &Fraction) -> Ordering {
        (self.num as i128 * other.den as i128).cmp(&(other.num as i128 * self.den as i128))
    }
}

impl Ord for Fraction {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_exact(other)
    }
}

impl PartialOrd for Fraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl Serialize for Fraction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// `(a + c)/(b + d)`. Stern–Brocot neighbours give a reduced result
/// directly; other inputs are reduced.
pub fn mediant(a: Fraction, b: Fraction) -> Fraction {
    Fraction::new(a.num + b.num, a.den + b.den).expect("positive denominators")
}
