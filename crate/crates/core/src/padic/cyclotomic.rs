use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::ser::SerializeMap;
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use super::{checked_pow, require_prime, FracClass, Rational};
use crate::error::{invalid, Result};

/// An element of the cyclotomic field `Q(ζ)` with `ζ` a primitive
/// `r^level`-th root of unity, written in the power basis
/// `1, ζ, …, ζ^(φ(r^level) − 1)`.
///
/// Elements are kept reduced modulo `Φ_{r^M}(x) = Σ_{j<r} x^(j·r^(M−1))` and at
/// the smallest level that contains them, so equality is coefficientwise.
/// Level-0 elements are plain rationals and combine with elements of any `r`.
#[derive(Clone)]
pub struct Cyclotomic {
    r: u64,
    level: u32,
    coeffs: Vec<Rational>,
}

fn phi(r: u64, level: u32) -> usize {
    if level == 0 {
        1
    } else {
        ((r - 1) * r.pow(level - 1)) as usize
    }
}

impl Cyclotomic {
    pub fn rational(r: u64, q: Rational) -> Self {
        Cyclotomic { r, level: 0, coeffs: vec![q] }
    }

    pub fn zero(r: u64) -> Self {
        Self::rational(r, Rational::zero())
    }

    pub fn one(r: u64) -> Self {
        Self::rational(r, Rational::one())
    }

    /// `ζ_{r^level}^exponent`, the exponent taken modulo `r^level`.
    pub fn zeta_pow(r: u64, level: u32, exponent: u64) -> Result<Self> {
        require_prime(r)?;
        let order = checked_pow(r, level)?;
        let mut dense = vec![Rational::zero(); order as usize];
        dense[(exponent % order) as usize] = Rational::one();
        Ok(Self::from_dense(r, level, dense))
    }

    /// Builds `Σ coeff·ζ^k` from arbitrary exponents (reduced modulo `r^level`).
    pub fn from_terms(r: u64, level: u32, terms: &[(u64, Rational)]) -> Result<Self> {
        require_prime(r)?;
        let order = checked_pow(r, level)?;
        let mut dense = vec![Rational::zero(); order as usize];
        for (k, c) in terms {
            dense[(k % order) as usize] += c;
        }
        Ok(Self::from_dense(r, level, dense))
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Power-basis coefficients, `φ(r^level)` of them.
    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.level == 0 && self.coeffs[0].is_zero()
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        (self.level == 0).then(|| &self.coeffs[0])
    }

    /// Reduces a vector indexed by all exponents `0..r^level` and normalizes.
    fn from_dense(r: u64, level: u32, mut dense: Vec<Rational>) -> Self {
        if level > 0 {
            let stride = r.pow(level - 1) as usize;
            let cut = phi(r, level);
            for t in 0..stride {
                let c = std::mem::take(&mut dense[cut + t]);
                if c.is_zero() {
                    continue;
                }
                for j in 0..(r as usize - 1) {
                    dense[t + j * stride] -= &c;
                }
            }
            // ζ^(φ+t) for t ≥ stride never occurs: φ + stride = r^level
            dense.truncate(cut);
        }
        Cyclotomic { r, level, coeffs: dense }.normalized()
    }

    /// Drops to the smallest level containing the element.
    fn normalized(mut self) -> Self {
        while self.level > 0 {
            if self.level == 1 {
                if self.coeffs[1..].iter().all(Rational::is_zero) {
                    self.coeffs.truncate(1);
                    self.level = 0;
                    continue;
                }
                break;
            }
            // level ≥ 2: basis index r·a + b; the subfield is spanned by b = 0
            let r = self.r as usize;
            let in_subfield = self.coeffs.iter().enumerate().all(|(k, c)| k % r == 0 || c.is_zero());
            if !in_subfield {
                break;
            }
            self.coeffs = self.coeffs.into_iter().step_by(r).collect();
            self.level -= 1;
        }
        self
    }

    fn lift(&self, level: u32) -> Vec<Rational> {
        debug_assert!(level >= self.level);
        if level == self.level {
            return self.coeffs.clone();
        }
        let step = self.r.pow(level - self.level) as usize;
        let mut out = vec![Rational::zero(); phi(self.r, level)];
        for (k, c) in self.coeffs.iter().enumerate() {
            out[k * step] = c.clone();
        }
        out
    }

    fn common_r(&self, other: &Self) -> Result<u64> {
        match (self.level, other.level) {
            (0, _) => Ok(other.r),
            (_, 0) => Ok(self.r),
            _ if self.r == other.r => Ok(self.r),
            _ => invalid(format!("cyclotomic fields of {} and {} do not mix", self.r, other.r)),
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        let r = self.common_r(other)?;
        let level = self.level.max(other.level);
        let mut a = Cyclotomic { r, ..self.clone() }.lift(level);
        for (x, y) in a.iter_mut().zip(Cyclotomic { r, ..other.clone() }.lift(level)) {
            *x += &y;
        }
        Ok(Cyclotomic { r, level, coeffs: a }.normalized())
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        let r = self.common_r(other)?;
        if let Some(q) = self.as_rational() {
            return Ok(Cyclotomic { r, ..other.scale(q) });
        }
        if let Some(q) = other.as_rational() {
            return Ok(Cyclotomic { r, ..self.scale(q) });
        }
        let level = self.level.max(other.level);
        let order = r.pow(level) as usize;
        let a = self.lift(level);
        let b = other.lift(level);
        let mut dense = vec![Rational::zero(); order];
        for (i, x) in a.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            for (j, y) in b.iter().enumerate().filter(|(_, y)| !y.is_zero()) {
                dense[(i + j) % order] += &(x * y);
            }
        }
        Ok(Self::from_dense(r, level, dense))
    }

    pub fn scale(&self, q: &Rational) -> Self {
        if q.is_zero() {
            return Self::zero(self.r);
        }
        Cyclotomic { r: self.r, level: self.level, coeffs: self.coeffs.iter().map(|c| c * q).collect() }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.r);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// `ζ ↦ ζ^a` applied to `self`, for `a` prime to `r`.
    fn conjugate(&self, a: u64) -> Self {
        let order = self.r.pow(self.level);
        let terms: Vec<(u64, Rational)> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| ((k as u64 * a) % order, c.clone()))
            .collect();
        Self::from_terms(self.r, self.level, &terms).expect("valid field")
    }

    /// The multiplicative inverse, by descending the tower of cyclotomic
    /// fields: the product of the nontrivial conjugates of `self` over the
    /// next field down is `N(self)/self`, and the relative norm `N(self)` lies
    /// in that smaller field.
    pub fn inverse(&self) -> Option<Self> {
        if let Some(q) = self.as_rational() {
            return q.recip().map(|q| Self::rational(self.r, q));
        }
        let (r, m) = (self.r, self.level);
        let exponents: Vec<u64> =
            if m == 1 { (2..r).collect() } else { (1..r).map(|j| 1 + j * r.pow(m - 1)).collect() };
        let mut others = Self::one(r);
        for a in exponents {
            others = &others * &self.conjugate(a);
        }
        let norm = self * &others;
        debug_assert!(norm.level < m);
        Some(&others * &norm.inverse()?)
    }

    pub fn try_div(&self, other: &Self) -> Option<Self> {
        other.inverse().and_then(|inv| self.try_mul(&inv).ok())
    }
}

/// `ζ_{r^m}^a` for the class `a / r^m` in `Z[1/r]/Z`.
///
/// This is a group homomorphism from `(Z[1/r]/Z, +)` into the roots of unity
/// of `r`-power order.
pub fn root_of_unity(e: &FracClass) -> Cyclotomic {
    let m = e.order_exponent();
    let a = e.value().numer();
    let a = u64::try_from(a).expect("invariant: 0 <= value < 1 with small denominator");
    Cyclotomic::zeta_pow(e.r(), m, a).expect("r is prime by FracClass invariant")
}

impl PartialEq for Cyclotomic {
    fn eq(&self, other: &Self) -> bool {
        self.level == other.level && (self.level == 0 || self.r == other.r) && self.coeffs == other.coeffs
    }
}

impl Eq for Cyclotomic {}

impl fmt::Debug for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(q) = self.as_rational() {
            return write!(f, "{q}");
        }
        let n = self.r.pow(self.level);
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                _ => write!(f, "({c})·ζ{n}^{k}")?,
            }
        }
        Ok(())
    }
}

macro_rules! cyc_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl<'a, 'b> $trait<&'b Cyclotomic> for &'a Cyclotomic {
            type Output = Cyclotomic;
            /// Panics when both operands are irrational over different `r`.
            fn $method(self, rhs: &'b Cyclotomic) -> Cyclotomic {
                let f: fn(&Cyclotomic, &Cyclotomic) -> Result<Cyclotomic> = $body;
                f(self, rhs).expect("cyclotomic operands over different primes")
            }
        }
        impl $trait<Cyclotomic> for Cyclotomic {
            type Output = Cyclotomic;
            fn $method(self, rhs: Cyclotomic) -> Cyclotomic {
                (&self).$method(&rhs)
            }
        }
    };
}

cyc_binop!(Add, add, |a, b| a.try_add(b));
cyc_binop!(Mul, mul, |a, b| a.try_mul(b));
cyc_binop!(Sub, sub, |a, b| a.try_add(&-b));

impl Neg for &Cyclotomic {
    type Output = Cyclotomic;
    fn neg(self) -> Cyclotomic {
        self.scale(&Rational::from(-1))
    }
}

impl Neg for Cyclotomic {
    type Output = Cyclotomic;
    fn neg(self) -> Cyclotomic {
        -&self
    }
}

struct NonZeroCoeffs<'a>(&'a [Rational]);

impl Serialize for NonZeroCoeffs<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let nz: Vec<_> = self.0.iter().enumerate().filter(|(_, c)| !c.is_zero()).collect();
        let mut map = s.serialize_map(Some(nz.len()))?;
        for (k, c) in nz {
            map.serialize_entry(&k.to_string(), c)?;
        }
        map.end()
    }
}

impl Serialize for Cyclotomic {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(3))?;
        map.serialize_entry("r", &self.r)?;
        map.serialize_entry("level", &self.level)?;
        map.serialize_entry("coeffs", &NonZeroCoeffs(&self.coeffs))?;
        map.end()
    }
}

impl<'de> Deserialize<'de> for Cyclotomic {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Wire {
            r: u64,
            level: u32,
            coeffs: BTreeMap<String, Rational>,
        }
        let w = Wire::deserialize(d)?;
        let n = phi(w.r, w.level);
        let mut terms = Vec::new();
        for (k, c) in w.coeffs {
            let k: usize = k.parse().map_err(|_| de::Error::custom(format!("bad exponent {k:?}")))?;
            if k >= n {
                return Err(de::Error::custom(format!("exponent {k} outside the power basis")));
            }
            terms.push((k as u64, c));
        }
        Cyclotomic::from_terms(w.r, w.level, &terms).map_err(de::Error::custom)
    }
}
