//! Linear maps on measure values, pushforward along them, and convolution
//! on the additive group `G`.

use std::collections::BTreeMap;

use super::{integrate, Measure, MeasureValue, Shape};
use crate::clopen::LocallyConstantFn;
use crate::error::{Error, Result};
use crate::padic::{Rational, UltraNorm};

/// A `K`-linear map between value spaces, as a matrix acting on the
/// row-major list of entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueMap {
    input: Shape,
    output: Shape,
    rows: Vec<Vec<Rational>>,
}

impl ValueMap {
    pub fn new(input: Shape, output: Shape, rows: Vec<Vec<Rational>>) -> Result<Self> {
        if rows.len() != output.len() || rows.iter().any(|r| r.len() != input.len()) {
            return Err(Error::ShapeMismatch(format!(
                "a map {input:?} -> {output:?} needs a {} x {} matrix",
                output.len(),
                input.len()
            )));
        }
        Ok(ValueMap { input, output, rows })
    }

    pub fn scalar(shape: Shape, c: Rational) -> Self {
        let n = shape.len();
        let rows =
            (0..n).map(|i| (0..n).map(|j| if i == j { c.clone() } else { Rational::zero() }).collect()).collect();
        ValueMap { input: shape, output: shape, rows }
    }

    pub fn identity(shape: Shape) -> Self {
        Self::scalar(shape, Rational::one())
    }

    /// `Mat_n(K) → K`, `b ↦ Σ_j b_jj`.
    pub fn trace(n: usize) -> Self {
        let row = (0..n * n).map(|k| if k % (n + 1) == 0 { Rational::one() } else { Rational::zero() }).collect();
        ValueMap { input: Shape::Matrix(n), output: Shape::Scalar, rows: vec![row] }
    }

    pub fn input(&self) -> Shape {
        self.input
    }

    pub fn output(&self) -> Shape {
        self.output
    }

    pub fn apply(&self, v: &MeasureValue) -> Result<MeasureValue> {
        if v.shape() != self.input {
            return Err(Error::ShapeMismatch(format!("map expects {:?}, got {:?}", self.input, v.shape())));
        }
        let x = v.entries();
        let out = self.rows.iter().map(|row| row.iter().zip(&x).map(|(a, b)| a * *b).sum()).collect();
        Ok(MeasureValue::from_entries(self.output, out))
    }

    /// Operator norm for the max-entry norms on both sides: the largest
    /// matrix entry.
    pub fn norm(&self, p: u64) -> UltraNorm {
        let flat: Vec<Rational> = self.rows.iter().flatten().cloned().collect();
        MeasureValue::Vector(flat).norm(p)
    }
}

impl Measure {
    /// `ν = F(μ)`, i.e. `ν(A) = F(μ(A))`.
    pub fn pushforward(&self, f: &ValueMap) -> Result<Measure> {
        if f.input != self.shape {
            return Err(Error::ShapeMismatch(format!("map expects {:?}, measure has {:?}", f.input, self.shape)));
        }
        let density = match &self.nf.density {
            Some(d) => Some((self.nf.depth, d.iter().map(|v| f.apply(v)).collect::<Result<Vec<_>>>()?)),
            None => None,
        };
        let atoms = self.nf.atoms.iter().map(|(x, m)| Ok((x.clone(), f.apply(m)?))).collect::<Result<_>>()?;
        Measure::from_parts(self.ambient, self.p, f.output, density, atoms)
    }
}

/// `F(∫ f dμ) = ∫ f dF(μ)` for a scalar step function `f`.
pub fn pushforward_intertwines(
    f: &LocallyConstantFn<MeasureValue>,
    mu: &Measure,
    map: &ValueMap,
) -> Result<(MeasureValue, MeasureValue, bool)> {
    if f.atoms().any(|(_, v)| v.shape() != Shape::Scalar) {
        return Err(Error::ShapeMismatch("the integrand must be scalar".into()));
    }
    let lhs = map.apply(&integrate(f, mu)?)?;
    let rhs = integrate(f, &mu.pushforward(map)?)?;
    let ok = lhs == rhs;
    Ok((lhs, rhs, ok))
}

/// `[μ*ν](A) = (μ×ν)({(x,y) : x+y ∈ A})`.
///
/// Continuous parts convolve cyclically on the balls of a common depth `D`
/// (indices add modulo `r^D`), a continuous part against a point mass is a
/// shift, and point masses multiply into point masses at the sum.
pub fn convolve(mu: &Measure, nu: &Measure) -> Result<Measure> {
    let ambient = mu.ambient;
    ambient.check_same(&nu.ambient)?;
    if mu.p != nu.p {
        return Err(Error::InvalidArgument("factors use different value primes".into()));
    }
    let shape = Shape::product(mu.shape, nu.shape)?;
    let depth = [mu, nu].iter().filter(|m| m.nf.density.is_some()).map(|m| m.nf.depth).max();
    let density = match depth {
        None => None,
        Some(depth) => {
            let n = ambient.count(depth);
            let at = |m: &Measure, k: u64| -> Option<MeasureValue> {
                m.nf.density.as_ref().map(|d| d[(k % ambient.count(m.nf.depth)) as usize].clone())
            };
            let unit = Rational::from(ambient.r() as i64).pow(-(depth as i32)).expect("r > 0");
            let mut out = vec![MeasureValue::zero(shape); n as usize];
            for k in 0..n {
                let acc = &mut out[k as usize];
                for i in 0..n {
                    let j = (k + n - i) % n;
                    if let (Some(a), Some(b)) = (at(mu, i), at(nu, j)) {
                        acc.add_assign(&a.checked_mul(&b)?.scale(&unit));
                    }
                }
                for (t, m) in &nu.nf.atoms {
                    if let Some(a) = at(mu, (k + n - ambient.point_index(t, depth)?) % n) {
                        acc.add_assign(&a.checked_mul(m)?);
                    }
                }
                for (s, m) in &mu.nf.atoms {
                    if let Some(b) = at(nu, (k + n - ambient.point_index(s, depth)?) % n) {
                        acc.add_assign(&m.checked_mul(&b)?);
                    }
                }
            }
            Some((depth, out))
        }
    };
    let mut atoms: BTreeMap<Rational, MeasureValue> = BTreeMap::new();
    for (s, a) in &mu.nf.atoms {
        for (t, b) in &nu.nf.atoms {
            let v = a.checked_mul(b)?;
            let x = s + t;
            match atoms.get_mut(&x) {
                Some(acc) => acc.add_assign(&v),
                None => {
                    atoms.insert(x, v);
                }
            }
        }
    }
    Measure::from_parts(ambient, mu.p, shape, density, atoms)
}
