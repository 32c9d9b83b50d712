use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::padic::{valuation, Rational, UltraNorm};

/// The shape of the values a measure takes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Scalar,
    Vector(usize),
    /// Square `n × n` matrices.
    Matrix(usize),
}

impl Shape {
    pub fn len(&self) -> usize {
        match *self {
            Shape::Scalar => 1,
            Shape::Vector(n) => n,
            Shape::Matrix(n) => n * n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The shape of `a · b` when the product is defined.
    pub fn product(a: Shape, b: Shape) -> Result<Shape> {
        match (a, b) {
            (Shape::Scalar, s) | (s, Shape::Scalar) => Ok(s),
            (Shape::Matrix(n), Shape::Matrix(m)) if n == m => Ok(a),
            (Shape::Matrix(n), Shape::Vector(m)) if n == m => Ok(b),
            _ => Err(Error::ShapeMismatch(format!("{a:?} · {b:?} is undefined"))),
        }
    }
}

/// A value in `K`, `K^n` or `Mat_n(K)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MeasureValue {
    Scalar(Rational),
    Vector(Vec<Rational>),
    Matrix(Vec<Vec<Rational>>),
}

impl MeasureValue {
    pub fn scalar(q: Rational) -> Self {
        MeasureValue::Scalar(q)
    }

    pub fn zero(shape: Shape) -> Self {
        Self::from_entries(shape, vec![Rational::zero(); shape.len()])
    }

    pub fn identity(n: usize) -> Self {
        MeasureValue::Matrix(
            (0..n).map(|i| (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect()).collect(),
        )
    }

    pub fn diagonal(entries: Vec<Rational>) -> Self {
        let n = entries.len();
        let mut m = vec![vec![Rational::zero(); n]; n];
        for (i, e) in entries.into_iter().enumerate() {
            m[i][i] = e;
        }
        MeasureValue::Matrix(m)
    }

    /// Rebuilds a value from row-major entries.
    pub fn from_entries(shape: Shape, entries: Vec<Rational>) -> Self {
        debug_assert_eq!(entries.len(), shape.len());
        match shape {
            Shape::Scalar => MeasureValue::Scalar(entries.into_iter().next().expect("one entry")),
            Shape::Vector(_) => MeasureValue::Vector(entries),
            Shape::Matrix(n) => {
                let mut it = entries.into_iter();
                MeasureValue::Matrix((0..n).map(|_| it.by_ref().take(n).collect()).collect())
            }
        }
    }

    pub fn shape(&self) -> Shape {
        match self {
            MeasureValue::Scalar(_) => Shape::Scalar,
            MeasureValue::Vector(v) => Shape::Vector(v.len()),
            MeasureValue::Matrix(m) => Shape::Matrix(m.len()),
        }
    }

    /// Row-major entries.
    pub fn entries(&self) -> Vec<&Rational> {
        match self {
            MeasureValue::Scalar(q) => vec![q],
            MeasureValue::Vector(v) => v.iter().collect(),
            MeasureValue::Matrix(m) => m.iter().flatten().collect(),
        }
    }

    pub fn as_scalar(&self) -> Option<&Rational> {
        match self {
            MeasureValue::Scalar(q) => Some(q),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries().iter().all(|e| e.is_zero())
    }

    fn validate(&self) -> Result<()> {
        match self {
            MeasureValue::Scalar(_) => Ok(()),
            MeasureValue::Vector(v) if v.is_empty() => Err(Error::ShapeMismatch("empty vector".into())),
            MeasureValue::Matrix(m) if m.is_empty() || m.iter().any(|row| row.len() != m.len()) => {
                Err(Error::ShapeMismatch("matrices must be square and nonempty".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn checked_add(&self, other: &MeasureValue) -> Result<MeasureValue> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch(format!("cannot add {:?} and {:?}", self.shape(), other.shape())));
        }
        let entries = self.entries().into_iter().zip(other.entries()).map(|(a, b)| a + b).collect();
        Ok(Self::from_entries(self.shape(), entries))
    }

    pub(crate) fn add_assign(&mut self, other: &MeasureValue) {
        *self = self.checked_add(other).expect("shapes agree by construction");
    }

    pub fn neg(&self) -> MeasureValue {
        self.scale(&Rational::from(-1))
    }

    pub fn scale(&self, q: &Rational) -> MeasureValue {
        Self::from_entries(self.shape(), self.entries().into_iter().map(|e| e * q).collect())
    }

    /// `self · other`: scalar times anything, matrix times matrix, or matrix
    /// times vector.
    pub fn checked_mul(&self, other: &MeasureValue) -> Result<MeasureValue> {
        match (self, other) {
            (MeasureValue::Scalar(a), b) => Ok(b.scale(a)),
            (a, MeasureValue::Scalar(b)) => Ok(a.scale(b)),
            (MeasureValue::Matrix(a), MeasureValue::Matrix(b)) if a.len() == b.len() => {
                let n = a.len();
                Ok(MeasureValue::Matrix(
                    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| &a[i][k] * &b[k][j]).sum()).collect()).collect(),
                ))
            }
            (MeasureValue::Matrix(a), MeasureValue::Vector(v)) if a.len() == v.len() => {
                Ok(MeasureValue::Vector(a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()))
            }
            _ => Err(Error::ShapeMismatch(format!("{:?} · {:?} is undefined", self.shape(), other.shape()))),
        }
    }

    /// The max-entry norm `max |entry|_p`.
    pub fn norm(&self, p: u64) -> UltraNorm {
        self.entries()
            .into_iter()
            .filter_map(|e| valuation(e, p))
            .min()
            .map_or(UltraNorm::zero(p), |v| UltraNorm::from_exp(p, v))
    }

    pub fn trace(&self) -> Result<Rational> {
        match self {
            MeasureValue::Matrix(m) => Ok((0..m.len()).map(|i| &m[i][i]).sum()),
            _ => Err(Error::InvalidArgument("trace needs a matrix value".into())),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ValueWire {
    Scalar(Rational),
    Vector(Vec<Rational>),
    Matrix(Vec<Vec<Rational>>),
}

impl Serialize for MeasureValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            MeasureValue::Scalar(q) => q.serialize(s),
            MeasureValue::Vector(v) => v.serialize(s),
            MeasureValue::Matrix(m) => m.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for MeasureValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = match ValueWire::deserialize(d)? {
            ValueWire::Scalar(q) => MeasureValue::Scalar(q),
            ValueWire::Vector(v) => MeasureValue::Vector(v),
            ValueWire::Matrix(m) => MeasureValue::Matrix(m),
        };
        v.validate().map_err(de::Error::custom)?;
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn products_follow_shapes() {
        let m = MeasureValue::Matrix(vec![vec![q(1, 1), q(2, 1)], vec![q(3, 1), q(4, 1)]]);
        let v = MeasureValue::Vector(vec![q(1, 1), q(1, 1)]);
        assert_eq!(m.checked_mul(&v).unwrap(), MeasureValue::Vector(vec![q(3, 1), q(7, 1)]));
        assert_eq!(
            m.checked_mul(&m).unwrap(),
            MeasureValue::Matrix(vec![vec![q(7, 1), q(10, 1)], vec![q(15, 1), q(22, 1)]])
        );
        assert!(v.checked_mul(&m).is_err());
        assert!(MeasureValue::identity(3).checked_mul(&m).is_err());
        assert_eq!(m.trace().unwrap(), q(5, 1));
    }

    #[test]
    fn max_entry_norm() {
        let m = MeasureValue::Matrix(vec![vec![q(4, 1), q(1, 2)], vec![q(0, 1), q(6, 1)]]);
        assert_eq!(m.norm(2), UltraNorm::from_exp(2, -1));
        assert!(MeasureValue::zero(Shape::Vector(3)).norm(5).is_zero());
    }

    #[test]
    fn json_shapes() {
        let v: MeasureValue = serde_json::from_str(r#"[["1","0"],["0","2"]]"#).unwrap();
        assert_eq!(v, MeasureValue::diagonal(vec![q(1, 1), q(2, 1)]));
        assert!(serde_json::from_str::<MeasureValue>(r#"[["1"],["0","2"]]"#).is_err());
        assert!(serde_json::from_str::<MeasureValue>("[]").is_err());
        assert_eq!(serde_json::to_string(&MeasureValue::scalar(q(1, 3))).unwrap(), "\"1/3\"");
        let s: Shape = serde_json::from_str(r#"{"matrix":2}"#).unwrap();
        assert_eq!(s, Shape::Matrix(2));
        assert_eq!(serde_json::to_string(&Shape::Scalar).unwrap(), "\"scalar\"");
    }
}
