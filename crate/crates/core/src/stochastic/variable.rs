use std::collections::{BTreeMap, BTreeSet};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::padic::{require_prime, valuation, Cyclotomic, Rational};

/// One independent coordinate of `Ω`: finitely many labelled outcomes with
/// `K`-valued masses summing to one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    outcomes: Vec<String>,
    masses: Vec<Rational>,
}

impl Factor {
    pub fn new(outcomes: Vec<String>, masses: Vec<Rational>) -> Result<Self> {
        if outcomes.is_empty() || outcomes.len() != masses.len() {
            return invalid("a factor needs one mass per outcome and at least one outcome");
        }
        if outcomes.iter().collect::<BTreeSet<_>>().len() != outcomes.len() {
            return invalid("outcome labels must be distinct");
        }
        Ok(Factor { outcomes, masses })
    }

    /// Outcomes `+` and `-` with mass `1/2` each.
    pub fn rademacher() -> Self {
        let half = Rational::new(1, 2);
        Factor { outcomes: vec!["+".into(), "-".into()], masses: vec![half.clone(), half] }
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn masses(&self) -> &[Rational] {
        &self.masses
    }
}

/// A finite product probability space `Ω = Π Ω_f` with `P = ⊗ P_f`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiniteProbSpace {
    p: u64,
    factors: Vec<Factor>,
}

impl FiniteProbSpace {
    /// Checks `P_f(Ω_f) = 1` and `|P_f(ω)|_p ≤ 1` for every factor. Together
    /// they give `P(Ω) = 1` and `‖P‖ = 1`: every event is a sum of products of
    /// masses, each of norm at most one, and `Ω` itself has norm one.
    pub fn new(p: u64, factors: Vec<Factor>) -> Result<Self> {
        require_prime(p)?;
        for (i, f) in factors.iter().enumerate() {
            let total: Rational = f.masses.iter().cloned().sum();
            if !total.is_one() {
                return invalid(format!("factor {i} has total mass {total}, not 1"));
            }
            if f.masses.iter().any(|m| valuation(m, p).is_some_and(|v| v < 0)) {
                return invalid(format!("factor {i} has a mass of {p}-adic norm above 1"));
            }
        }
        Ok(FiniteProbSpace { p, factors })
    }

    /// `n` independent signs; needs `|1/2|_p = 1`, i.e. `p ≠ 2`.
    pub fn rademacher(p: u64, n: usize) -> Result<Self> {
        if p == 2 {
            return Err(Error::UnsupportedPrime(p));
        }
        Self::new(p, vec![Factor::rademacher(); n])
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// `P({ω})`.
    pub fn prob(&self, omega: &[usize]) -> Result<Rational> {
        self.check_outcome(omega)?;
        Ok(omega.iter().zip(&self.factors).map(|(&o, f)| f.masses[o].clone()).fold(Rational::one(), |a, b| a * b))
    }

    fn check_outcome(&self, omega: &[usize]) -> Result<()> {
        if omega.len() != self.factors.len() || omega.iter().zip(&self.factors).any(|(&o, f)| o >= f.outcomes.len()) {
            return invalid("not an outcome of this space");
        }
        Ok(())
    }
}

impl<'de> Deserialize<'de> for FiniteProbSpace {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            p: u64,
            factors: Vec<Factor>,
        }
        let w = Wire::deserialize(d)?;
        let factors = w
            .factors
            .into_iter()
            .map(|f| Factor::new(f.outcomes, f.masses))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        FiniteProbSpace::new(w.p, factors).map_err(serde::de::Error::custom)
    }
}

/// A product of indicators `Π 1[ω_f = o]` over distinct factors, with every
/// `o ≥ 1` (outcome `0` is spelled `1 − Σ_{o≥1} 1[ω_f = o]`).
type Monomial = BTreeMap<usize, usize>;

fn mul_monomials(a: &Monomial, b: &Monomial) -> Option<Monomial> {
    let mut out = a.clone();
    for (f, o) in b {
        match out.insert(*f, *o) {
            Some(prev) if prev != *o => return None,
            _ => {}
        }
    }
    Some(out)
}

/// A `Q(ζ_{r^∞})`-valued function on `Ω`, stored in the unique expansion over
/// the indicator monomials. Equal functions have equal expansions, so `==` is
/// pointwise equality on `Ω`.
#[derive(Clone, Debug)]
pub struct RandomVariable {
    space: Arc<FiniteProbSpace>,
    r: u64,
    terms: BTreeMap<Monomial, Cyclotomic>,
}

impl PartialEq for RandomVariable {
    fn eq(&self, other: &Self) -> bool {
        self.same_space(other) && self.terms == other.terms
    }
}

impl RandomVariable {
    pub fn zero(space: Arc<FiniteProbSpace>, r: u64) -> Self {
        RandomVariable { space, r, terms: BTreeMap::new() }
    }

    pub fn constant(space: Arc<FiniteProbSpace>, c: Cyclotomic) -> Self {
        let r = c.r();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::new(), c);
        }
        RandomVariable { space, r, terms }
    }

    pub fn rational(space: Arc<FiniteProbSpace>, r: u64, q: Rational) -> Self {
        Self::constant(space, Cyclotomic::rational(r, q))
    }

    /// `1[ω_f = o]`.
    pub fn indicator(space: Arc<FiniteProbSpace>, r: u64, f: usize, o: usize) -> Result<Self> {
        let n = space
            .factors
            .get(f)
            .map(|x| x.outcomes.len())
            .ok_or_else(|| Error::InvalidArgument(format!("no factor {f}")))?;
        if o >= n {
            return invalid(format!("factor {f} has no outcome {o}"));
        }
        let mut terms = BTreeMap::new();
        if o == 0 {
            terms.insert(Monomial::new(), Cyclotomic::one(r));
            for k in 1..n {
                terms.insert(Monomial::from([(f, k)]), Cyclotomic::rational(r, Rational::from(-1)));
            }
        } else {
            terms.insert(Monomial::from([(f, o)]), Cyclotomic::one(r));
        }
        Ok(RandomVariable { space, r, terms })
    }

    /// The sign `+1 / −1` of a two-outcome factor.
    pub fn sign(space: Arc<FiniteProbSpace>, r: u64, f: usize) -> Result<Self> {
        let minus = Self::indicator(space.clone(), r, f, 1)?;
        Ok(&Self::rational(space, r, Rational::one()) - &minus.scale_rational(&Rational::from(2)))
    }

    pub fn space(&self) -> &Arc<FiniteProbSpace> {
        &self.space
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    fn same_space(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.space, &other.space) || self.space == other.space
    }

    fn assert_compatible(&self, other: &Self) {
        assert!(self.same_space(other), "random variables on different probability spaces");
    }

    fn from_terms(space: Arc<FiniteProbSpace>, r: u64, terms: BTreeMap<Monomial, Cyclotomic>) -> Self {
        let terms = terms.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        RandomVariable { space, r, terms }
    }

    pub fn scale(&self, c: &Cyclotomic) -> Self {
        let terms = self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect();
        Self::from_terms(self.space.clone(), self.r, terms)
    }

    pub fn scale_rational(&self, q: &Rational) -> Self {
        let terms = self.terms.iter().map(|(m, x)| (m.clone(), x.scale(q))).collect();
        Self::from_terms(self.space.clone(), self.r, terms)
    }

    /// Factors the variable depends on.
    pub fn active_factors(&self) -> BTreeSet<usize> {
        self.terms.keys().flat_map(|m| m.keys().copied()).collect()
    }

    /// `M(ξ) = Σ_ω ξ(ω) P({ω})`, using independence: the expectation of a
    /// monomial is the product of the masses of its outcomes.
    pub fn expectation(&self) -> Cyclotomic {
        let mut acc = Cyclotomic::zero(self.r);
        for (m, c) in &self.terms {
            let w = m.iter().fold(Rational::one(), |a, (&f, &o)| a * &self.space.factors[f].masses[o]);
            acc = &acc + &c.scale(&w);
        }
        acc
    }

    pub fn value_at(&self, omega: &[usize]) -> Result<Cyclotomic> {
        self.space.check_outcome(omega)?;
        Ok(self.value_on(|f| omega[f]))
    }

    fn value_on(&self, omega: impl Fn(usize) -> usize) -> Cyclotomic {
        let mut acc = Cyclotomic::zero(self.r);
        for (m, c) in &self.terms {
            if m.iter().all(|(&f, &o)| omega(f) == o) {
                acc = &acc + c;
            }
        }
        acc
    }

    /// Calls `visit(assignment, probability)` for every joint outcome of
    /// `factors` (other coordinates are summed out).
    fn enumerate(
        space: &FiniteProbSpace,
        factors: &[usize],
        mut visit: impl FnMut(&BTreeMap<usize, usize>, &Rational),
    ) -> Result<()> {
        let mut count: u64 = 1;
        for &f in factors {
            count = count.saturating_mul(space.factors[f].outcomes.len() as u64);
        }
        if count > 1 << 20 {
            return invalid(format!("{count} outcomes exceed the enumeration limit of 2^20"));
        }
        let mut assign: BTreeMap<usize, usize> = factors.iter().map(|&f| (f, 0)).collect();
        for _ in 0..count {
            let prob = assign.iter().fold(Rational::one(), |a, (&f, &o)| a * &space.factors[f].masses[o]);
            visit(&assign, &prob);
            for &f in factors {
                let o = assign.get_mut(&f).expect("listed");
                *o += 1;
                if *o < space.factors[f].outcomes.len() {
                    break;
                }
                *o = 0;
            }
        }
        Ok(())
    }

    /// `M(ξ)` by summing `ξ(ω) P({ω})` over all outcomes of the factors
    /// `ξ` depends on; an independent check of [`expectation`](Self::expectation).
    pub fn expectation_by_enumeration(&self) -> Result<Cyclotomic> {
        let factors: Vec<usize> = self.active_factors().into_iter().collect();
        let mut acc = Cyclotomic::zero(self.r);
        Self::enumerate(&self.space, &factors, |a, prob| {
            acc = &acc + &self.value_on(|f| a.get(&f).copied().unwrap_or(0)).scale(prob);
        })?;
        Ok(acc)
    }

    /// Compares values outcome by outcome over the factors either side
    /// depends on; an independent check of `==`.
    pub fn equal_pointwise(&self, other: &Self) -> Result<bool> {
        self.assert_compatible(other);
        let factors: Vec<usize> = self.active_factors().union(&other.active_factors()).copied().collect();
        let mut same = true;
        Self::enumerate(&self.space, &factors, |a, _| {
            let at = |f: usize| a.get(&f).copied().unwrap_or(0);
            same &= self.value_on(at) == other.value_on(at);
        })?;
        Ok(same)
    }
}

impl Add<&RandomVariable> for &RandomVariable {
    type Output = RandomVariable;

    /// # Panics
    /// If the operands live on different spaces or in different cyclotomic fields.
    fn add(self, rhs: &RandomVariable) -> RandomVariable {
        self.assert_compatible(rhs);
        let mut terms = self.terms.clone();
        for (m, c) in &rhs.terms {
            let v = match terms.get(m) {
                Some(x) => x + c,
                None => c.clone(),
            };
            terms.insert(m.clone(), v);
        }
        RandomVariable::from_terms(self.space.clone(), self.r, terms)
    }
}

impl Neg for &RandomVariable {
    type Output = RandomVariable;

    fn neg(self) -> RandomVariable {
        self.scale_rational(&Rational::from(-1))
    }
}

impl Sub<&RandomVariable> for &RandomVariable {
    type Output = RandomVariable;

    fn sub(self, rhs: &RandomVariable) -> RandomVariable {
        self + &(-rhs)
    }
}

impl Mul<&RandomVariable> for &RandomVariable {
    type Output = RandomVariable;

    /// # Panics
    /// If the operands live on different spaces or in different cyclotomic fields.
    fn mul(self, rhs: &RandomVariable) -> RandomVariable {
        self.assert_compatible(rhs);
        let mut terms: BTreeMap<Monomial, Cyclotomic> = BTreeMap::new();
        for (a, x) in &self.terms {
            for (b, y) in &rhs.terms {
                if let Some(m) = mul_monomials(a, b) {
                    let v = x * y;
                    let v = match terms.remove(&m) {
                        Some(acc) => &acc + &v,
                        None => v,
                    };
                    terms.insert(m, v);
                }
            }
        }
        RandomVariable::from_terms(self.space.clone(), self.r, terms)
    }
}

#[derive(Serialize)]
struct OnWire<'a> {
    factor: usize,
    outcome: &'a str,
}

#[derive(Serialize)]
struct TermWire<'a> {
    on: Vec<OnWire<'a>>,
    coeff: &'a Cyclotomic,
}

impl Serialize for RandomVariable {
    /// `{"terms":[{"on":[{"factor":f,"outcome":label}],"coeff":…}]}`: the sum
    /// of `coeff` times the indicator that every listed factor shows its label.
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a> {
            terms: Vec<TermWire<'a>>,
        }
        let terms = self
            .terms
            .iter()
            .map(|(m, coeff)| TermWire {
                on: m
                    .iter()
                    .map(|(&f, &o)| OnWire { factor: f, outcome: &self.space.factors[f].outcomes[o] })
                    .collect(),
                coeff,
            })
            .collect();
        Wire { terms }.serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn signs(p: u64, n: usize) -> Arc<FiniteProbSpace> {
        Arc::new(FiniteProbSpace::rademacher(p, n).unwrap())
    }

    #[test]
    fn space_validation() {
        assert!(FiniteProbSpace::rademacher(2, 3).is_err());
        let bad = Factor::new(vec!["a".into(), "b".into()], vec![Rational::new(1, 3), Rational::new(1, 3)]).unwrap();
        assert!(FiniteProbSpace::new(5, vec![bad]).is_err());
        let big = Factor::new(vec!["a".into(), "b".into()], vec![Rational::new(1, 5), Rational::new(4, 5)]).unwrap();
        assert!(FiniteProbSpace::new(5, vec![big.clone()]).is_err());
        assert!(FiniteProbSpace::new(3, vec![big]).is_ok());
        assert!(Factor::new(vec!["a".into(), "a".into()], vec![Rational::one(), Rational::zero()]).is_err());
    }

    #[test]
    fn expectation_examples() {
        let sp = signs(5, 2);
        let s = RandomVariable::sign(sp.clone(), 3, 0).unwrap();
        assert!(s.expectation().is_zero());
        let c = RandomVariable::rational(sp.clone(), 3, Rational::new(7, 2));
        assert_eq!(c.expectation(), Cyclotomic::rational(3, Rational::new(7, 2)));
        assert_eq!((&s * &s).expectation(), Cyclotomic::one(3));
        assert_eq!(&s * &s, RandomVariable::rational(sp, 3, Rational::one()));
    }

    #[test]
    fn expectation_agrees_with_enumeration() {
        let f3 = Factor::new(
            vec!["x".into(), "y".into(), "z".into()],
            vec![Rational::new(1, 3), Rational::new(1, 3), Rational::new(1, 3)],
        )
        .unwrap();
        let sp = Arc::new(FiniteProbSpace::new(5, vec![Factor::rademacher(), f3, Factor::rademacher()]).unwrap());
        let z = Cyclotomic::zeta_pow(3, 2, 4).unwrap();
        let a = &RandomVariable::sign(sp.clone(), 3, 0).unwrap().scale(&z)
            + &RandomVariable::indicator(sp.clone(), 3, 1, 0).unwrap();
        let b =
            &RandomVariable::indicator(sp.clone(), 3, 1, 2).unwrap() - &RandomVariable::sign(sp.clone(), 3, 2).unwrap();
        for v in [&a, &b, &(&a * &b), &(&(&a * &a) + &b)] {
            assert_eq!(v.expectation(), v.expectation_by_enumeration().unwrap());
        }
        // the indicator decomposition is exact pointwise
        let total = (0..3).fold(RandomVariable::zero(sp.clone(), 3), |acc, o| {
            &acc + &RandomVariable::indicator(sp.clone(), 3, 1, o).unwrap()
        });
        assert_eq!(total, RandomVariable::rational(sp.clone(), 3, Rational::one()));
        let prod = &a * &b;
        for w0 in 0..2 {
            for w1 in 0..3 {
                for w2 in 0..2 {
                    let w = [w0, w1, w2];
                    assert_eq!(prod.value_at(&w).unwrap(), &a.value_at(&w).unwrap() * &b.value_at(&w).unwrap());
                }
            }
        }
        assert!(prod.equal_pointwise(&(&b * &a)).unwrap());
        assert!(!a.equal_pointwise(&b).unwrap());
    }
}
