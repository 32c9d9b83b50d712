//! Finitely supported vectors and matrices over `K`: the `c_0` pairing,
//! rank-one operators `[a,b]`, transposition, trace, and traces of
//! matrix-valued measures.

use std::collections::BTreeMap;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::clopen::Ball;
use crate::error::{Error, Result};
use crate::measures::{Measure, MeasureValue, Shape, ValueMap};
use crate::padic::{require_prime, valuation, Rational, UltraNorm};

fn sup_norm<'a>(p: u64, xs: impl Iterator<Item = &'a Rational>) -> UltraNorm {
    xs.filter_map(|x| valuation(x, p)).min().map_or(UltraNorm::zero(p), |v| UltraNorm::from_exp(p, v))
}

fn check_prime(a: u64, b: u64) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("operands use different primes {a} and {b}")))
    }
}

/// `x = Σ x_j e_j` with finitely many nonzero `x_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinVector {
    p: u64,
    entries: BTreeMap<u64, Rational>,
}

impl FinVector {
    pub fn new(p: u64, entries: impl IntoIterator<Item = (u64, Rational)>) -> Result<Self> {
        require_prime(p)?;
        let mut map = BTreeMap::new();
        for (i, v) in entries {
            if map.insert(i, v).is_some() {
                return Err(Error::InvalidArgument(format!("index {i} given twice")));
            }
        }
        map.retain(|_, v: &mut Rational| !v.is_zero());
        Ok(FinVector { p, entries: map })
    }

    /// `(x_0, x_1, …)`.
    pub fn dense(p: u64, xs: &[Rational]) -> Result<Self> {
        Self::new(p, xs.iter().cloned().enumerate().map(|(i, x)| (i as u64, x)))
    }

    pub fn basis(p: u64, i: u64) -> Result<Self> {
        Self::new(p, [(i, Rational::one())])
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn get(&self, i: u64) -> Rational {
        self.entries.get(&i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn entries(&self) -> &BTreeMap<u64, Rational> {
        &self.entries
    }

    pub fn norm(&self) -> UltraNorm {
        sup_norm(self.p, self.entries.values())
    }
}

/// `(a, b) = Σ_j a_j b_j`.
pub fn pairing(a: &FinVector, b: &FinVector) -> Result<Rational> {
    check_prime(a.p, b.p)?;
    Ok(a.entries.iter().filter_map(|(j, x)| b.entries.get(j).map(|y| x * y)).sum())
}

/// A finitely supported matrix `F e_i = Σ_j F_ij e_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinMatrix {
    p: u64,
    entries: BTreeMap<(u64, u64), Rational>,
}

impl FinMatrix {
    pub fn new(p: u64, entries: impl IntoIterator<Item = ((u64, u64), Rational)>) -> Result<Self> {
        require_prime(p)?;
        let mut map = BTreeMap::new();
        for (ij, v) in entries {
            if map.insert(ij, v).is_some() {
                return Err(Error::InvalidArgument(format!("entry {ij:?} given twice")));
            }
        }
        map.retain(|_, v: &mut Rational| !v.is_zero());
        Ok(FinMatrix { p, entries: map })
    }

    pub fn zero(p: u64) -> Result<Self> {
        Self::new(p, [])
    }

    /// The identity restricted to the indices `0..n`.
    pub fn identity(p: u64, n: u64) -> Result<Self> {
        Self::new(p, (0..n).map(|i| ((i, i), Rational::one())))
    }

    pub fn dense(p: u64, rows: &[Vec<Rational>]) -> Result<Self> {
        let cells = rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, v)| ((i as u64, j as u64), v.clone())));
        Self::new(p, cells)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn get(&self, i: u64, j: u64) -> Rational {
        self.entries.get(&(i, j)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn entries(&self) -> &BTreeMap<(u64, u64), Rational> {
        &self.entries
    }

    /// `[W(F)]_ij = F_ji`.
    pub fn transpose(&self) -> FinMatrix {
        FinMatrix { p: self.p, entries: self.entries.iter().map(|(&(i, j), v)| ((j, i), v.clone())).collect() }
    }

    pub fn trace(&self) -> Rational {
        self.entries.iter().filter(|((i, j), _)| i == j).map(|(_, v)| v.clone()).sum()
    }

    /// `sup_ij |F_ij|_p`, which is the operator norm on `c_0`.
    pub fn op_norm(&self) -> UltraNorm {
        sup_norm(self.p, self.entries.values())
    }

    pub fn add(&self, other: &FinMatrix) -> Result<FinMatrix> {
        check_prime(self.p, other.p)?;
        let mut e = self.entries.clone();
        for (ij, v) in &other.entries {
            let s = e.get(ij).map_or_else(|| v.clone(), |x| x + v);
            e.insert(*ij, s);
        }
        FinMatrix::new(self.p, e)
    }

    pub fn scale(&self, c: &Rational) -> FinMatrix {
        let e = self.entries.iter().map(|(ij, v)| (*ij, v * c)).filter(|(_, v)| !v.is_zero()).collect();
        FinMatrix { p: self.p, entries: e }
    }

    /// `F e_i` applied to a vector: `(xF)_j = Σ_i x_i F_ij`.
    pub fn apply(&self, x: &FinVector) -> Result<FinVector> {
        check_prime(self.p, x.p)?;
        let mut out: BTreeMap<u64, Rational> = BTreeMap::new();
        for (&(i, j), v) in &self.entries {
            if let Some(xi) = x.entries.get(&i) {
                let acc = out.entry(j).or_insert_with(Rational::zero);
                *acc += &(xi * v);
            }
        }
        FinVector::new(self.p, out)
    }

    /// The `n × n` block on indices `0..n` as a matrix value; entries outside
    /// the block are an error.
    pub fn to_value(&self, n: usize) -> Result<MeasureValue> {
        if self.entries.keys().any(|&(i, j)| i >= n as u64 || j >= n as u64) {
            return Err(Error::ShapeMismatch(format!("matrix does not fit in {n} x {n}")));
        }
        let rows = (0..n as u64).map(|i| (0..n as u64).map(|j| self.get(i, j)).collect()).collect();
        Ok(MeasureValue::Matrix(rows))
    }

    pub fn from_value(p: u64, v: &MeasureValue) -> Result<FinMatrix> {
        match v {
            MeasureValue::Matrix(rows) => FinMatrix::dense(p, rows),
            _ => Err(Error::ShapeMismatch("expected a matrix value".into())),
        }
    }
}

/// `[a,b]` with `F_lj = a_l b_j`.
pub fn rank_one(a: &FinVector, b: &FinVector) -> Result<FinMatrix> {
    check_prime(a.p, b.p)?;
    let cells = a.entries.iter().flat_map(|(l, x)| b.entries.iter().map(move |(j, y)| ((*l, *j), x * y)));
    FinMatrix::new(a.p, cells)
}

/// `(Tr μ)(A) = Tr μ(A)` for a matrix-valued measure.
pub fn trace_measure(mu: &Measure) -> Result<Measure> {
    match mu.shape() {
        Shape::Matrix(n) => mu.pushforward(&ValueMap::trace(n)),
        s => Err(Error::InvalidArgument(format!("trace needs a matrix-valued measure, got {s:?}"))),
    }
}

/// Balls `A` up to `level` where `|Tr μ(A)|_p ≤ u(μ(A))` fails (none expected).
pub fn trace_bound_violations(mu: &Measure, level: i64) -> Result<Vec<Ball>> {
    let tr = trace_measure(mu)?;
    let mut bad = Vec::new();
    for b in mu.ambient().balls_up_to(level)? {
        if tr.eval_ball(&b)?.norm(mu.p()) > mu.eval_ball(&b)?.norm(mu.p()) {
            bad.push(b);
        }
    }
    Ok(bad)
}

#[derive(Serialize, Deserialize)]
struct VecEntry {
    i: u64,
    v: Rational,
}

#[derive(Serialize, Deserialize)]
struct MatEntry {
    i: u64,
    j: u64,
    v: Rational,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Wire<E> {
    p: u64,
    entries: Vec<E>,
}

impl Serialize for FinVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let entries = self.entries.iter().map(|(i, v)| VecEntry { i: *i, v: v.clone() }).collect();
        Wire { p: self.p, entries }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FinVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = Wire::<VecEntry>::deserialize(d)?;
        FinVector::new(w.p, w.entries.into_iter().map(|e| (e.i, e.v))).map_err(de::Error::custom)
    }
}

impl Serialize for FinMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let entries = self.entries.iter().map(|(&(i, j), v)| MatEntry { i, j, v: v.clone() }).collect();
        Wire { p: self.p, entries }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FinMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = Wire::<MatEntry>::deserialize(d)?;
        FinMatrix::new(w.p, w.entries.into_iter().map(|e| ((e.i, e.j), e.v))).map_err(de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clopen::{Ambient, ClopenSet};
    use proptest::prelude::*;

    fn q(n: i64) -> Rational {
        Rational::from(n)
    }

    fn v(p: u64, xs: &[i64]) -> FinVector {
        FinVector::dense(p, &xs.iter().map(|&x| q(x)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn pairing_examples() {
        let e1 = FinVector::basis(5, 1).unwrap();
        let e2 = FinVector::basis(5, 2).unwrap();
        assert_eq!(pairing(&e1, &e1).unwrap(), q(1));
        assert_eq!(pairing(&e1, &e2).unwrap(), q(0));
        assert_eq!(pairing(&v(5, &[1, 2]), &v(5, &[3, 4])).unwrap(), q(11));
        assert!(pairing(&e1, &FinVector::basis(3, 1).unwrap()).is_err());
    }

    #[test]
    fn rank_one_examples() {
        let f = rank_one(&FinVector::basis(5, 1).unwrap(), &FinVector::basis(5, 2).unwrap()).unwrap();
        assert_eq!(f.entries().len(), 1);
        assert_eq!(f.get(1, 2), q(1));
        assert_eq!(rank_one(&v(5, &[0, 0]), &v(5, &[3, 4])).unwrap(), FinMatrix::zero(5).unwrap());
        let f = rank_one(&v(5, &[1, 2]), &v(5, &[3, 4])).unwrap();
        assert_eq!(f, FinMatrix::dense(5, &[vec![q(3), q(4)], vec![q(6), q(8)]]).unwrap());
    }

    #[test]
    fn trace_examples() {
        assert_eq!(FinMatrix::identity(3, 5).unwrap().trace(), q(5));
        assert_eq!(FinMatrix::zero(3).unwrap().trace(), q(0));
        let (a, b) = (v(3, &[1, 2]), v(3, &[3, 4]));
        assert_eq!(rank_one(&a, &b).unwrap().trace(), pairing(&a, &b).unwrap());
    }

    #[test]
    fn op_norm_examples() {
        assert_eq!(FinMatrix::identity(2, 3).unwrap().op_norm(), UltraNorm::one(2));
        assert!(FinMatrix::zero(2).unwrap().op_norm().is_zero());
        let f = FinMatrix::dense(2, &[vec![q(4), Rational::new(1, 2)]]).unwrap();
        assert_eq!(f.op_norm(), UltraNorm::from_exp(2, -1));
    }

    #[test]
    fn trace_measure_examples() {
        let g = Ambient::new(3, 0).unwrap();
        let whole = ClopenSet::whole(g);
        let mu = Measure::haar(g, 5, MeasureValue::diagonal(vec![q(1), q(2)])).unwrap();
        assert_eq!(trace_measure(&mu).unwrap().eval(&whole).unwrap(), MeasureValue::scalar(q(3)));
        let off = Measure::haar(g, 5, MeasureValue::Matrix(vec![vec![q(0), q(7)], vec![q(1), q(0)]])).unwrap();
        let t = trace_measure(&off).unwrap();
        assert!(g.balls_up_to(2).unwrap().iter().all(|b| t.eval_ball(b).unwrap().is_zero()));
        let (a, b) = (v(5, &[1, 2]), v(5, &[3, 4]));
        let r1 = Measure::haar(g, 5, rank_one(&a, &b).unwrap().to_value(2).unwrap()).unwrap();
        let expect = Measure::haar(g, 5, MeasureValue::scalar(pairing(&a, &b).unwrap())).unwrap();
        let t = trace_measure(&r1).unwrap();
        for x in g.balls_up_to(2).unwrap() {
            assert_eq!(t.eval_ball(&x).unwrap(), expect.eval_ball(&x).unwrap());
        }
        assert!(trace_bound_violations(&r1, 3).unwrap().is_empty());
        assert!(trace_measure(&Measure::unit_haar(g, 5).unwrap()).is_err());
    }

    #[test]
    fn json_form() {
        let f = FinMatrix::dense(5, &[vec![q(0), Rational::new(1, 2)]]).unwrap();
        let text = serde_json::to_string(&f).unwrap();
        assert_eq!(text, r#"{"p":5,"entries":[{"i":0,"j":1,"v":"1/2"}]}"#);
        assert_eq!(serde_json::from_str::<FinMatrix>(&text).unwrap(), f);
        let dup = r#"{"p":5,"entries":[{"i":0,"j":1,"v":"1"},{"i":0,"j":1,"v":"2"}]}"#;
        assert!(serde_json::from_str::<FinMatrix>(dup).is_err());
    }

    fn small_vec() -> impl Strategy<Value = Vec<(u64, i64, i64)>> {
        prop::collection::vec((0u64..6, -50i64..50, 1i64..30), 0..6)
    }

    fn build(p: u64, xs: &[(u64, i64, i64)]) -> FinVector {
        let mut m = BTreeMap::new();
        for (i, n, d) in xs {
            m.insert(*i, Rational::new(*n, *d));
        }
        FinVector::new(p, m).unwrap()
    }

    proptest! {
        #[test]
        fn trace_of_rank_one_is_the_pairing(a in small_vec(), b in small_vec()) {
            let (a, b) = (build(3, &a), build(3, &b));
            prop_assert_eq!(rank_one(&a, &b).unwrap().trace(), pairing(&a, &b).unwrap());
            prop_assert_eq!(rank_one(&b, &a).unwrap().trace(), pairing(&a, &b).unwrap());
            let f = rank_one(&a, &b).unwrap();
            prop_assert_eq!(f.transpose().transpose(), f.clone());
            prop_assert_eq!(f.transpose(), rank_one(&b, &a).unwrap());
            let t = f.trace();
            prop_assert!(t.is_zero() || crate::padic::padic_valuation(&t, 3).unwrap() <= f.op_norm());
        }

        #[test]
        fn trace_is_linear(a in small_vec(), b in small_vec(), c in small_vec(), d in small_vec(), s in -9i64..9, t in -9i64..9) {
            let f = rank_one(&build(5, &a), &build(5, &b)).unwrap();
            let h = rank_one(&build(5, &c), &build(5, &d)).unwrap();
            let lhs = f.scale(&q(s)).add(&h.scale(&q(t))).unwrap().trace();
            prop_assert_eq!(lhs, q(s) * f.trace() + q(t) * h.trace());
        }
    }
}
