//! Clopen balls of a compact ball `G = r^(-m0)·Z_r`, the ring they generate,
//! and locally constant functions on it.
//!
//! A ball at level `n` is `{x : |x − c|_r ≤ r^(-n)}`. Inside `G` it is
//! identified by its depth `d = n + m0` and the index `r^m0·c mod r^d`.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::padic::{checked_pow, denominator_power, require_prime, valuation, Rational};

/// The compact ball `r^(-m0)·Z_r` every other object lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ambient {
    r: u64,
    m0: u32,
}

impl Ambient {
    pub fn new(r: u64, m0: u32) -> Result<Self> {
        require_prime(r)?;
        checked_pow(r, m0)?;
        Ok(Ambient { r, m0 })
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn m0(&self) -> u32 {
        self.m0
    }

    /// The level of `G` itself.
    pub fn top_level(&self) -> i64 {
        -(self.m0 as i64)
    }

    pub fn whole(&self) -> Ball {
        Ball { r: self.r, m0: self.m0, depth: 0, index: 0 }
    }

    pub fn depth_of(&self, level: i64) -> Result<u32> {
        let d = level + self.m0 as i64;
        if d < 0 {
            return invalid(format!("level {level} is coarser than the ambient ball"));
        }
        let d = u32::try_from(d).map_err(|_| Error::InvalidArgument("level too deep".into()))?;
        checked_pow(self.r, d)?;
        Ok(d)
    }

    pub fn level_of(&self, depth: u32) -> i64 {
        depth as i64 - self.m0 as i64
    }

    /// Number of balls of the given depth.
    pub fn count(&self, depth: u32) -> u64 {
        self.r.pow(depth)
    }

    /// All balls at `level`, in canonical order.
    pub fn atoms(&self, level: i64) -> Result<Vec<Ball>> {
        let depth = self.depth_of(level)?;
        Ok((0..self.count(depth)).map(|index| Ball { r: self.r, m0: self.m0, depth, index }).collect())
    }

    /// All balls at levels from the top down to `level`.
    pub fn balls_up_to(&self, level: i64) -> Result<Vec<Ball>> {
        let mut out = Vec::new();
        for l in self.top_level()..=level {
            out.extend(self.atoms(l)?);
        }
        Ok(out)
    }

    /// `r^m0·x` for a point of `G`; errors outside `Z[1/r]` or outside `G`.
    pub(crate) fn scaled(&self, x: &Rational) -> Result<BigInt> {
        denominator_power(x, self.r)?;
        let y = x * &Rational::integer(BigInt::from(self.r).pow(self.m0));
        if !y.is_integer() {
            return Err(Error::Domain(format!("{x} lies outside the ambient ball")));
        }
        Ok(y.numer().clone())
    }

    pub fn contains_point(&self, x: &Rational) -> Result<bool> {
        match self.scaled(x) {
            Ok(_) => Ok(true),
            Err(Error::Domain(msg)) if msg.contains("outside the ambient") => Ok(false),
            Err(e) => Err(e),
        }
    }

    pub(crate) fn point_index(&self, x: &Rational, depth: u32) -> Result<u64> {
        let y = self.scaled(x)?;
        let m = BigInt::from(self.count(depth));
        Ok(u64::try_from(y.mod_floor(&m)).expect("residue fits"))
    }

    /// The ball of the given level containing `x`.
    pub fn ball_of(&self, x: &Rational, level: i64) -> Result<Ball> {
        let depth = self.depth_of(level)?;
        Ok(Ball { r: self.r, m0: self.m0, depth, index: self.point_index(x, depth)? })
    }

    pub(crate) fn check_same(&self, other: &Ambient) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            invalid(format!("ambient mismatch: r={} m0={} vs r={} m0={}", self.r, self.m0, other.r, other.m0))
        }
    }
}

/// A clopen ball inside the ambient ball, keyed by its least nonnegative
/// center. Orders by `(level, center)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ball {
    r: u64,
    m0: u32,
    depth: u32,
    index: u64,
}

impl Ball {
    pub fn new(r: u64, m0: u32, level: i64, center: &Rational) -> Result<Self> {
        let amb = Ambient::new(r, m0)?;
        let depth = amb.depth_of(level)?;
        let y = amb.scaled(center)?;
        let index = u64::try_from(&y)
            .ok()
            .filter(|&i| i < amb.count(depth))
            .ok_or_else(|| Error::InvalidArgument(format!("{center} is not the canonical center at level {level}")))?;
        Ok(Ball { r, m0, depth, index })
    }

    pub fn ambient(&self) -> Ambient {
        Ambient { r: self.r, m0: self.m0 }
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn level(&self) -> i64 {
        self.depth as i64 - self.m0 as i64
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn center(&self) -> Rational {
        Rational::new(self.index as i64, self.r.pow(self.m0) as i64)
    }

    pub fn children(&self) -> Vec<Ball> {
        let step = self.r.pow(self.depth);
        (0..self.r).map(|j| Ball { depth: self.depth + 1, index: self.index + j * step, ..*self }).collect()
    }

    pub fn parent(&self) -> Option<Ball> {
        (self.depth > 0).then(|| self.ancestor(self.depth - 1))
    }

    /// The enclosing ball at a depth no greater than this one's.
    pub fn ancestor(&self, depth: u32) -> Ball {
        debug_assert!(depth <= self.depth);
        Ball { depth, index: self.index % self.r.pow(depth), ..*self }
    }

    pub fn contains_ball(&self, other: &Ball) -> bool {
        self.r == other.r
            && self.m0 == other.m0
            && self.depth <= other.depth
            && other.index % self.r.pow(self.depth) == self.index
    }

    pub fn intersects(&self, other: &Ball) -> bool {
        self.contains_ball(other) || other.contains_ball(self)
    }

    /// All sub-balls at `level` (the ball itself when `level` equals its own).
    pub fn descendants(&self, level: i64) -> Result<Vec<Ball>> {
        let depth = self.ambient().depth_of(level)?;
        if depth < self.depth {
            return invalid(format!("level {level} is coarser than the ball at level {}", self.level()));
        }
        let step = self.r.pow(self.depth);
        Ok((0..self.r.pow(depth - self.depth)).map(|t| Ball { depth, index: self.index + t * step, ..*self }).collect())
    }

    /// `v_r(x − center) ≥ level`.
    pub fn contains(&self, x: &Rational) -> Result<bool> {
        denominator_power(x, self.r)?;
        Ok(match valuation(&(x - &self.center()), self.r) {
            None => true,
            Some(v) => v >= self.level(),
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BallWire {
    r: u64,
    m0: u32,
    level: i64,
    center: Rational,
}

impl Serialize for Ball {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BallWire { r: self.r, m0: self.m0, level: self.level(), center: self.center() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Ball {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = BallWire::deserialize(d)?;
        Ball::new(w.r, w.m0, w.level, &w.center).map_err(de::Error::custom)
    }
}

/// Boolean operations on clopen sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetOp {
    Union,
    Intersect,
    Difference,
    Complement,
}

/// A clopen subset of the ambient ball in canonical form: pairwise disjoint
/// balls, no complete family of siblings, sorted by `(level, center)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ClopenSet {
    ambient: Ambient,
    balls: Vec<Ball>,
}

/// Absorbs nested balls and merges complete sibling families.
pub fn canonicalize(ambient: Ambient, balls: &[Ball]) -> Result<ClopenSet> {
    for b in balls {
        ambient.check_same(&b.ambient())?;
    }
    let raw: BTreeSet<Ball> = balls.iter().copied().collect();
    let mut set: BTreeSet<Ball> =
        raw.iter().filter(|b| (0..b.depth).all(|d| !raw.contains(&b.ancestor(d)))).copied().collect();
    let max_depth = set.iter().map(|b| b.depth).max().unwrap_or(0);
    for depth in (1..=max_depth).rev() {
        let mut families: BTreeMap<Ball, u64> = BTreeMap::new();
        for b in set.iter().filter(|b| b.depth == depth) {
            *families.entry(b.parent().expect("depth > 0")).or_default() += 1;
        }
        for (parent, n) in families {
            if n == ambient.r {
                for c in parent.children() {
                    set.remove(&c);
                }
                set.insert(parent);
            }
        }
    }
    Ok(ClopenSet { ambient, balls: set.into_iter().collect() })
}

/// `x` minus every ball in `holes`, as a list of disjoint balls.
fn subtract(x: Ball, holes: &[Ball]) -> Vec<Ball> {
    if holes.iter().any(|h| h.contains_ball(&x)) {
        return Vec::new();
    }
    let inside: Vec<Ball> = holes.iter().filter(|h| x.contains_ball(h)).copied().collect();
    if inside.is_empty() {
        return vec![x];
    }
    x.children().into_iter().flat_map(|c| subtract(c, &inside)).collect()
}

impl ClopenSet {
    pub fn empty(ambient: Ambient) -> Self {
        ClopenSet { ambient, balls: Vec::new() }
    }

    pub fn whole(ambient: Ambient) -> Self {
        ClopenSet { ambient, balls: vec![ambient.whole()] }
    }

    pub fn from_ball(ball: Ball) -> Self {
        canonicalize(ball.ambient(), &[ball]).expect("single ball")
    }

    pub fn from_balls(ambient: Ambient, balls: &[Ball]) -> Result<Self> {
        canonicalize(ambient, balls)
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn balls(&self) -> &[Ball] {
        &self.balls
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    /// The finest level among the balls, `None` for the empty set.
    pub fn max_level(&self) -> Option<i64> {
        self.balls.iter().map(Ball::level).max()
    }

    pub fn contains_point(&self, x: &Rational) -> Result<bool> {
        for b in &self.balls {
            if b.contains(x)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    pub fn contains_ball(&self, ball: &Ball) -> bool {
        self.balls.iter().any(|b| b.contains_ball(ball))
    }

    pub fn union(&self, other: &ClopenSet) -> Result<ClopenSet> {
        self.ambient.check_same(&other.ambient)?;
        let all: Vec<Ball> = self.balls.iter().chain(&other.balls).copied().collect();
        canonicalize(self.ambient, &all)
    }

    pub fn intersect(&self, other: &ClopenSet) -> Result<ClopenSet> {
        self.ambient.check_same(&other.ambient)?;
        let mut out = Vec::new();
        for a in &self.balls {
            for b in &other.balls {
                if a.contains_ball(b) {
                    out.push(*b);
                } else if b.contains_ball(a) {
                    out.push(*a);
                }
            }
        }
        canonicalize(self.ambient, &out)
    }

    pub fn difference(&self, other: &ClopenSet) -> Result<ClopenSet> {
        self.ambient.check_same(&other.ambient)?;
        let out: Vec<Ball> = self.balls.iter().flat_map(|&b| subtract(b, &other.balls)).collect();
        canonicalize(self.ambient, &out)
    }

    /// Complement relative to the ambient ball.
    pub fn complement(&self) -> ClopenSet {
        ClopenSet::whole(self.ambient).difference(self).expect("same ambient")
    }

    /// Applies `op`; `other` is ignored for `Complement`.
    pub fn set_op(&self, other: &ClopenSet, op: SetOp) -> Result<ClopenSet> {
        match op {
            SetOp::Union => self.union(other),
            SetOp::Intersect => self.intersect(other),
            SetOp::Difference => self.difference(other),
            SetOp::Complement => Ok(self.complement()),
        }
    }

    pub fn is_disjoint(&self, other: &ClopenSet) -> bool {
        self.balls.iter().all(|a| other.balls.iter().all(|b| !a.intersects(b)))
    }

    pub fn is_subset(&self, other: &ClopenSet) -> bool {
        self.balls.iter().all(|b| other.contains_ball(b))
    }

    /// The level-`level` balls whose union is the set.
    pub fn refine(&self, level: i64) -> Result<Vec<Ball>> {
        if let Some(m) = self.max_level() {
            if level < m {
                return invalid(format!("cannot refine to level {level}, the set has a ball at level {m}"));
            }
        }
        let mut out = Vec::new();
        for b in &self.balls {
            out.extend(b.descendants(level)?);
        }
        out.sort();
        Ok(out)
    }
}

#[derive(Serialize, Deserialize)]
struct SetWire {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m0: Option<u32>,
    balls: Vec<Ball>,
}

impl Serialize for ClopenSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let empty = self.balls.is_empty();
        SetWire { r: empty.then_some(self.ambient.r), m0: empty.then_some(self.ambient.m0), balls: self.balls.clone() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ClopenSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = SetWire::deserialize(d)?;
        let ambient = match (w.balls.first(), w.r, w.m0) {
            (Some(b), _, _) => b.ambient(),
            (None, Some(r), Some(m0)) => Ambient::new(r, m0).map_err(de::Error::custom)?,
            (None, _, _) => return Err(de::Error::custom("empty set needs \"r\" and \"m0\"")),
        };
        canonicalize(ambient, &w.balls).map_err(de::Error::custom)
    }
}

/// `f = Σ_k a_k·Ch_{A_k}` with the `A_k` the level-`level` atoms of `domain`;
/// the function is zero off its domain.
#[derive(Clone, Debug, PartialEq)]
pub struct LocallyConstantFn<V> {
    domain: ClopenSet,
    level: i64,
    values: BTreeMap<Ball, V>,
}

impl<V: Clone> LocallyConstantFn<V> {
    pub fn new(domain: ClopenSet, level: i64, values: BTreeMap<Ball, V>) -> Result<Self> {
        let atoms = domain.refine(level)?;
        if atoms.len() != values.len() || atoms.iter().any(|a| !values.contains_key(a)) {
            return invalid("values must cover exactly the atoms of the domain at the given level");
        }
        Ok(LocallyConstantFn { domain, level, values })
    }

    pub fn from_fn(domain: ClopenSet, level: i64, mut f: impl FnMut(&Ball) -> V) -> Result<Self> {
        let values = domain.refine(level)?.into_iter().map(|a| (a, f(&a))).collect();
        Ok(LocallyConstantFn { domain, level, values })
    }

    pub fn constant(domain: ClopenSet, level: i64, value: V) -> Result<Self> {
        Self::from_fn(domain, level, |_| value.clone())
    }

    pub fn ambient(&self) -> Ambient {
        self.domain.ambient
    }

    pub fn domain(&self) -> &ClopenSet {
        &self.domain
    }

    pub fn level(&self) -> i64 {
        self.level
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&Ball, &V)> {
        self.values.iter()
    }

    /// The value on a ball at or below the function's level; `None` off the
    /// domain or when the ball is too coarse to carry a single value.
    pub fn value_on(&self, ball: &Ball) -> Option<&V> {
        let depth = self.domain.ambient.depth_of(self.level).ok()?;
        if ball.depth < depth {
            return None;
        }
        self.values.get(&ball.ancestor(depth))
    }

    pub fn value_at(&self, x: &Rational) -> Result<Option<&V>> {
        let amb = self.domain.ambient;
        if !amb.contains_point(x)? {
            return Ok(None);
        }
        Ok(self.values.get(&amb.ball_of(x, self.level)?))
    }

    pub fn refine(&self, level: i64) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (ball, v) in &self.values {
            for d in ball.descendants(level)? {
                values.insert(d, v.clone());
            }
        }
        Ok(LocallyConstantFn { domain: self.domain.clone(), level, values })
    }

    pub fn map<W: Clone>(&self, mut f: impl FnMut(&V) -> W) -> LocallyConstantFn<W> {
        LocallyConstantFn {
            domain: self.domain.clone(),
            level: self.level,
            values: self.values.iter().map(|(b, v)| (*b, f(v))).collect(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct AtomValue<V> {
    atom: Ball,
    value: V,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FnWire<V> {
    level: i64,
    values: Vec<AtomValue<V>>,
}

impl<V: Serialize + Clone> Serialize for LocallyConstantFn<V> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FnWire {
            level: self.level,
            values: self.values.iter().map(|(atom, value)| AtomValue { atom: *atom, value: value.clone() }).collect(),
        }
        .serialize(s)
    }
}

impl<'de, V: Deserialize<'de> + Clone> Deserialize<'de> for LocallyConstantFn<V> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = FnWire::<V>::deserialize(d)?;
        let first = w.values.first().ok_or_else(|| de::Error::custom("a function needs at least one atom"))?;
        let ambient = first.atom.ambient();
        let atoms: Vec<Ball> = w.values.iter().map(|av| av.atom).collect();
        if atoms.iter().any(|a| a.level() != w.level) {
            return Err(de::Error::custom("every atom must sit at the function's level"));
        }
        let domain = canonicalize(ambient, &atoms).map_err(de::Error::custom)?;
        let n = w.values.len();
        let values: BTreeMap<Ball, V> = w.values.into_iter().map(|av| (av.atom, av.value)).collect();
        if values.len() != n {
            return Err(de::Error::custom("duplicate atom"));
        }
        LocallyConstantFn::new(domain, w.level, values).map_err(de::Error::custom)
    }
}

/// A locally constant function on `G × H`, given on the product of the
/// level-`left_level` atoms of `G` and the level-`right_level` atoms of `H`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductFn<V> {
    left: Ambient,
    right: Ambient,
    left_level: i64,
    right_level: i64,
    left_atoms: Vec<Ball>,
    right_atoms: Vec<Ball>,
    /// row-major: `values[i * right_atoms.len() + j]`
    values: Vec<V>,
}

impl<V: Clone> ProductFn<V> {
    pub fn from_fn(
        left: Ambient,
        left_level: i64,
        right: Ambient,
        right_level: i64,
        mut f: impl FnMut(&Ball, &Ball) -> V,
    ) -> Result<Self> {
        let left_atoms = left.atoms(left_level)?;
        let right_atoms = right.atoms(right_level)?;
        let mut values = Vec::with_capacity(left_atoms.len() * right_atoms.len());
        for a in &left_atoms {
            for b in &right_atoms {
                values.push(f(a, b));
            }
        }
        Ok(ProductFn { left, right, left_level, right_level, left_atoms, right_atoms, values })
    }

    pub fn left(&self) -> Ambient {
        self.left
    }

    pub fn right(&self) -> Ambient {
        self.right
    }

    pub fn left_level(&self) -> i64 {
        self.left_level
    }

    pub fn right_level(&self) -> i64 {
        self.right_level
    }

    pub fn left_atoms(&self) -> &[Ball] {
        &self.left_atoms
    }

    pub fn right_atoms(&self) -> &[Ball] {
        &self.right_atoms
    }

    pub fn get(&self, i: usize, j: usize) -> &V {
        &self.values[i * self.right_atoms.len() + j]
    }

    /// The value on a rectangle of balls at or below the function's levels.
    pub fn value_on(&self, x: &Ball, y: &Ball) -> Option<&V> {
        let dl = self.left.depth_of(self.left_level).ok()?;
        let dr = self.right.depth_of(self.right_level).ok()?;
        if x.depth < dl || y.depth < dr || x.ambient() != self.left || y.ambient() != self.right {
            return None;
        }
        let i = x.ancestor(dl).index as usize;
        let j = y.ancestor(dr).index as usize;
        Some(self.get(i, j))
    }

    /// Refines both factors to finer levels.
    pub fn refine(&self, left_level: i64, right_level: i64) -> Result<Self> {
        if left_level < self.left_level || right_level < self.right_level {
            return invalid("refinement must not coarsen");
        }
        ProductFn::from_fn(self.left, left_level, self.right, right_level, |x, y| {
            self.value_on(x, y).expect("finer atoms").clone()
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FactorWire {
    r: u64,
    m0: u32,
    level: i64,
}

#[derive(Serialize, Deserialize)]
struct CellWire<V> {
    x: Ball,
    y: Ball,
    value: V,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProductFnWire<V> {
    left: FactorWire,
    right: FactorWire,
    values: Vec<CellWire<V>>,
}

impl<V: Serialize + Clone> Serialize for ProductFn<V> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut values = Vec::with_capacity(self.values.len());
        for (i, x) in self.left_atoms.iter().enumerate() {
            for (j, y) in self.right_atoms.iter().enumerate() {
                values.push(CellWire { x: *x, y: *y, value: self.get(i, j).clone() });
            }
        }
        ProductFnWire {
            left: FactorWire { r: self.left.r, m0: self.left.m0, level: self.left_level },
            right: FactorWire { r: self.right.r, m0: self.right.m0, level: self.right_level },
            values,
        }
        .serialize(s)
    }
}

impl<'de, V: Deserialize<'de> + Clone> Deserialize<'de> for ProductFn<V> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = ProductFnWire::<V>::deserialize(d)?;
        let left = Ambient::new(w.left.r, w.left.m0).map_err(de::Error::custom)?;
        let right = Ambient::new(w.right.r, w.right.m0).map_err(de::Error::custom)?;
        let mut cells: BTreeMap<(Ball, Ball), V> = BTreeMap::new();
        for c in w.values {
            cells.insert((c.x, c.y), c.value);
        }
        let mut missing = None;
        let f = ProductFn::from_fn(left, w.left.level, right, w.right.level, |x, y| match cells.get(&(*x, *y)) {
            Some(v) => Some(v.clone()),
            None => {
                missing = Some((*x, *y));
                None
            }
        })
        .map_err(de::Error::custom)?;
        if let Some((x, y)) = missing {
            return Err(de::Error::custom(format!(
                "missing value on ({}, {}) x ({}, {})",
                x.level(),
                x.center(),
                y.level(),
                y.center()
            )));
        }
        let expected = f.left_atoms.len() * f.right_atoms.len();
        if cells.len() != expected {
            return Err(de::Error::custom("values must cover exactly the product atoms"));
        }
        Ok(ProductFn {
            left: f.left,
            right: f.right,
            left_level: f.left_level,
            right_level: f.right_level,
            left_atoms: f.left_atoms,
            right_atoms: f.right_atoms,
            values: f.values.into_iter().map(|v| v.expect("checked")).collect(),
        })
    }
}
