//! Exact p-adic arithmetic on rationals.
//!
//! Norms are carried as integer exponents (`|x|_p = p^(-v)`), never as
//! floating point values, so every comparison is an integer comparison.

mod cyclotomic;
mod rational;

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};

pub use cyclotomic::{root_of_unity, Cyclotomic};
pub use rational::Rational;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

pub(crate) fn require_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        invalid(format!("{p} is not prime"))
    }
}

/// `base^exp` with overflow reported as an argument error.
pub(crate) fn checked_pow(base: u64, exp: u32) -> Result<u64> {
    base.checked_pow(exp).ok_or_else(|| Error::InvalidArgument(format!("{base}^{exp} overflows the supported range")))
}

/// Multiplicity of the prime `p` in a nonzero integer.
fn int_valuation(n: &BigInt, p: u64) -> i64 {
    debug_assert!(!n.is_zero());
    let p = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

/// `v_p(x)`, or `None` for zero. No primality check.
pub(crate) fn valuation(x: &Rational, p: u64) -> Option<i64> {
    if x.is_zero() {
        None
    } else {
        Some(int_valuation(x.numer(), p) - int_valuation(x.denom(), p))
    }
}

/// A non-archimedean norm value `base^(-exp)`; `exp == None` encodes the
/// norm of zero.
///
/// Ordering compares the represented real values: a smaller exponent is a
/// larger norm and zero is the least element.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct UltraNorm {
    base: u64,
    exp: Option<i64>,
}

impl UltraNorm {
    pub fn zero(base: u64) -> Self {
        UltraNorm { base, exp: None }
    }

    pub fn one(base: u64) -> Self {
        UltraNorm { base, exp: Some(0) }
    }

    pub fn from_exp(base: u64, exp: i64) -> Self {
        UltraNorm { base, exp: Some(exp) }
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    /// The valuation exponent; `None` stands for `+inf`.
    pub fn exp(&self) -> Option<i64> {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.exp.is_none()
    }

    /// The norm as an exact rational `base^(-exp)`.
    pub fn value(&self) -> Rational {
        match self.exp {
            None => Rational::zero(),
            Some(e) => {
                let b = Rational::from(self.base as i64);
                b.pow(-(e as i32)).expect("nonzero base")
            }
        }
    }

    pub fn pow(self, q: u32) -> UltraNorm {
        UltraNorm { base: self.base, exp: self.exp.map(|e| e * q as i64) }
    }
}

/// Product of norms: exponents add.
impl std::ops::Mul for UltraNorm {
    type Output = UltraNorm;

    fn mul(self, other: UltraNorm) -> UltraNorm {
        debug_assert_eq!(self.base, other.base);
        let exp = match (self.exp, other.exp) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        UltraNorm { base: self.base, exp }
    }
}

impl Ord for UltraNorm {
    fn cmp(&self, other: &Self) -> Ordering {
        self.base.cmp(&other.base).then_with(|| match (self.exp, other.exp) {
            (None, None) => Ordering::Equal,
            (None, Some(_)) => Ordering::Less,
            (Some(_), None) => Ordering::Greater,
            (Some(a), Some(b)) => b.cmp(&a),
        })
    }
}

impl PartialOrd for UltraNorm {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for UltraNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exp {
            None => write!(f, "0"),
            Some(e) => write!(f, "{}^{}", self.base, -e),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct NormWire<E> {
    base: u64,
    exp: E,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ExpWire<T> {
    Finite(T),
    Infinite(String),
}

fn exp_from_wire<T, E: de::Error>(w: ExpWire<T>) -> std::result::Result<Option<T>, E> {
    match w {
        ExpWire::Finite(v) => Ok(Some(v)),
        ExpWire::Infinite(s) if s == "inf" => Ok(None),
        ExpWire::Infinite(s) => Err(E::custom(format!("bad exponent {s:?}"))),
    }
}

impl Serialize for UltraNorm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let exp = match self.exp {
            Some(e) => ExpWire::Finite(e),
            None => ExpWire::Infinite("inf".to_string()),
        };
        NormWire { base: self.base, exp }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for UltraNorm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = NormWire::<ExpWire<i64>>::deserialize(d)?;
        Ok(UltraNorm { base: w.base, exp: exp_from_wire(w.exp)? })
    }
}

/// A norm value `base^(-exp)` whose exponent may be a fraction, as produced
/// by taking `q`-th roots in the `L^q` seminorms.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FractionalNorm {
    base: u64,
    exp: Option<Rational>,
}

impl FractionalNorm {
    pub fn new(base: u64, exp: Option<Rational>) -> Self {
        FractionalNorm { base, exp }
    }

    /// The `q`-th root of an integral norm.
    pub fn root(norm: UltraNorm, q: u32) -> Self {
        FractionalNorm { base: norm.base, exp: norm.exp.map(|e| Rational::new(e, q as i64)) }
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn exp(&self) -> Option<&Rational> {
        self.exp.as_ref()
    }

    pub fn is_zero(&self) -> bool {
        self.exp.is_none()
    }
}

impl Serialize for FractionalNorm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let exp = match &self.exp {
            Some(e) => ExpWire::Finite(e.clone()),
            None => ExpWire::Infinite("inf".to_string()),
        };
        NormWire { base: self.base, exp }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FractionalNorm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = NormWire::<ExpWire<Rational>>::deserialize(d)?;
        Ok(FractionalNorm { base: w.base, exp: exp_from_wire(w.exp)? })
    }
}

/// `|x|_p` as an exact exponent.
pub fn padic_valuation(x: &Rational, p: u64) -> Result<UltraNorm> {
    require_prime(p)?;
    Ok(UltraNorm { base: p, exp: valuation(x, p) })
}

/// Returns `m` when the denominator of `x` equals `r^m`.
pub(crate) fn denominator_power(x: &Rational, r: u64) -> Result<u32> {
    let mut d = x.denom().clone();
    let rb = BigInt::from(r);
    let mut m = 0u32;
    while !d.is_one() {
        let (q, rem) = d.div_rem(&rb);
        if !rem.is_zero() {
            return Err(Error::Domain(format!("{x} is not in Z[1/{r}]")));
        }
        d = q;
        m += 1;
    }
    Ok(m)
}

/// An element of `Z[1/r]/Z`, stored as its representative in `[0, 1)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct FracClass {
    r: u64,
    value: Rational,
}

impl FracClass {
    pub fn zero(r: u64) -> Self {
        FracClass { r, value: Rational::zero() }
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn value(&self) -> &Rational {
        &self.value
    }

    /// The exponent `m` of the denominator `r^m`.
    pub fn order_exponent(&self) -> u32 {
        denominator_power(&self.value, self.r).expect("invariant: denominator is a power of r")
    }

    /// Addition in `Q/Z`.
    pub fn add(&self, other: &FracClass) -> FracClass {
        debug_assert_eq!(self.r, other.r);
        let mut v = &self.value + &other.value;
        if v >= Rational::one() {
            v = v - Rational::one();
        }
        FracClass { r: self.r, value: v }
    }

    pub fn neg(&self) -> FracClass {
        if self.value.is_zero() {
            self.clone()
        } else {
            FracClass { r: self.r, value: Rational::one() - &self.value }
        }
    }
}

/// The fractional part `[x]_r`: the sum of the negative-power digits of the
/// `r`-adic expansion of `x ∈ Z[1/r]`.
pub fn frac_part(x: &Rational, r: u64) -> Result<FracClass> {
    require_prime(r)?;
    denominator_power(x, r)?;
    let rem = x.numer().mod_floor(x.denom());
    let value = Rational::from_bigints(rem, x.denom().clone())?;
    Ok(FracClass { r, value })
}
