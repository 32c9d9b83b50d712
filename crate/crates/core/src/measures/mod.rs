//! Finitely additive measures on the clopen ring of `r^(-m0)·Z_r` with values
//! in `K`, `K^n` or `Mat_n(K)` (`K ⊃ Q` normed by `|·|_p`), together with
//! their exact norms and the Monna–Springer integral of step functions.
//!
//! Every measure is reduced at construction to a normal form: a density
//! against the unit Haar measure that is constant on the balls of one depth
//! `D`, plus finitely many point masses. A ball of depth `e ≥ D` inside a
//! density atom with value `c` has mass `c·r^(-e)`.
//!
//! Since `r ≠ p` whenever a density is present, `|r^(-e)|_p = 1`; together
//! with the ultrametric inequality this makes all the suprema defining
//! `‖A‖_μ` and `N_μ` finite maxima:
//!
//! * `‖A‖_μ = max( u(c(a)) over density atoms a meeting A, u(m_s) over point masses s ∈ A )`
//! * `N_μ(x) = max( u(c(a_x)), u(m_x) )`.

mod product;
mod transform;
mod value;

use std::collections::BTreeMap;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::clopen::{Ambient, Ball, ClopenSet, LocallyConstantFn};
use crate::error::{invalid, Error, Result};
use crate::padic::{require_prime, valuation, FractionalNorm, Rational, UltraNorm};

pub use product::{fubini_check, FubiniReport, ProductMeasure};
pub use transform::{convolve, pushforward_intertwines, ValueMap};
pub use value::{MeasureValue, Shape};

/// How a measure was specified.
#[derive(Clone, Debug, PartialEq)]
pub enum MeasureKind {
    /// Translation-invariant, with `h(G) = total`.
    Haar {
        total: MeasureValue,
    },
    /// `μ(A) = ∫_A f dh` against the Haar measure with `h(G) = 1`.
    Density {
        density: LocallyConstantFn<MeasureValue>,
    },
    Atomic {
        atoms: BTreeMap<Rational, MeasureValue>,
    },
    Sum {
        components: Vec<Measure>,
    },
}

#[derive(Clone, Debug, PartialEq)]
struct NormalForm {
    depth: u32,
    /// One value per ball of depth `depth`, indexed like the balls.
    density: Option<Vec<MeasureValue>>,
    atoms: BTreeMap<Rational, MeasureValue>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Measure {
    ambient: Ambient,
    p: u64,
    shape: Shape,
    kind: MeasureKind,
    nf: NormalForm,
}

/// `r^(-e)`.
pub(crate) fn inv_pow(r: u64, e: u32) -> Rational {
    Rational::from(r as i64).pow(-(e as i32)).expect("r > 0")
}

fn check_shape(expected: Shape, v: &MeasureValue) -> Result<()> {
    if v.shape() == expected {
        Ok(())
    } else {
        Err(Error::ShapeMismatch(format!("expected {expected:?}, found {:?}", v.shape())))
    }
}

fn require_coprime(ambient: Ambient, p: u64) -> Result<()> {
    if ambient.r() == p {
        invalid(format!("a Haar-based measure needs r != p (got r = p = {p})"))
    } else {
        Ok(())
    }
}

impl Measure {
    pub fn haar(ambient: Ambient, p: u64, total: MeasureValue) -> Result<Self> {
        require_prime(p)?;
        require_coprime(ambient, p)?;
        let nf = NormalForm { depth: 0, density: Some(vec![total.clone()]), atoms: BTreeMap::new() };
        Ok(Measure { ambient, p, shape: total.shape(), kind: MeasureKind::Haar { total }, nf })
    }

    /// The Haar measure with `h(G) = 1`.
    pub fn unit_haar(ambient: Ambient, p: u64) -> Result<Self> {
        Self::haar(ambient, p, MeasureValue::scalar(Rational::one()))
    }

    pub fn density(p: u64, density: LocallyConstantFn<MeasureValue>) -> Result<Self> {
        require_prime(p)?;
        let ambient = density.ambient();
        require_coprime(ambient, p)?;
        let shape = density
            .atoms()
            .next()
            .map(|(_, v)| v.shape())
            .ok_or_else(|| Error::InvalidArgument("density with empty domain".into()))?;
        for (_, v) in density.atoms() {
            check_shape(shape, v)?;
        }
        let depth = ambient.depth_of(density.level())?;
        let mut values = vec![MeasureValue::zero(shape); ambient.count(depth) as usize];
        for (ball, v) in density.atoms() {
            values[ball.index() as usize] = v.clone();
        }
        let nf = NormalForm { depth, density: Some(values), atoms: BTreeMap::new() };
        Ok(Measure { ambient, p, shape, kind: MeasureKind::Density { density }, nf })
    }

    /// Point masses; repeated points are summed.
    pub fn atomic(
        ambient: Ambient,
        p: u64,
        shape: Shape,
        atoms: impl IntoIterator<Item = (Rational, MeasureValue)>,
    ) -> Result<Self> {
        require_prime(p)?;
        let mut map: BTreeMap<Rational, MeasureValue> = BTreeMap::new();
        for (x, m) in atoms {
            check_shape(shape, &m)?;
            if !ambient.contains_point(&x)? {
                return Err(Error::Domain(format!("atom {x} lies outside the ambient ball")));
            }
            match map.get_mut(&x) {
                Some(acc) => acc.add_assign(&m),
                None => {
                    map.insert(x, m);
                }
            }
        }
        let nf_atoms = map.iter().filter(|(_, m)| !m.is_zero()).map(|(x, m)| (x.clone(), m.clone())).collect();
        let nf = NormalForm { depth: 0, density: None, atoms: nf_atoms };
        Ok(Measure { ambient, p, shape, kind: MeasureKind::Atomic { atoms: map }, nf })
    }

    pub fn zero(ambient: Ambient, p: u64, shape: Shape) -> Result<Self> {
        Self::atomic(ambient, p, shape, [])
    }

    pub fn sum(components: Vec<Measure>) -> Result<Self> {
        let first = components.first().ok_or_else(|| Error::InvalidArgument("empty sum".into()))?;
        let (ambient, p, shape) = (first.ambient, first.p, first.shape);
        for c in &components {
            ambient.check_same(&c.ambient)?;
            if c.p != p {
                return invalid("summands use different value primes");
            }
            if c.shape != shape {
                return Err(Error::ShapeMismatch("summands have different shapes".into()));
            }
        }
        let depth = components.iter().filter(|c| c.nf.density.is_some()).map(|c| c.nf.depth).max();
        let density = depth.map(|depth| {
            let n = ambient.count(depth);
            (0..n)
                .map(|i| {
                    let mut acc = MeasureValue::zero(shape);
                    for c in &components {
                        if let Some(d) = &c.nf.density {
                            acc.add_assign(&d[(i % ambient.count(c.nf.depth)) as usize]);
                        }
                    }
                    acc
                })
                .collect()
        });
        let mut atoms: BTreeMap<Rational, MeasureValue> = BTreeMap::new();
        for c in &components {
            for (x, m) in &c.nf.atoms {
                match atoms.get_mut(x) {
                    Some(acc) => acc.add_assign(m),
                    None => {
                        atoms.insert(x.clone(), m.clone());
                    }
                }
            }
        }
        atoms.retain(|_, m| !m.is_zero());
        let nf = NormalForm { depth: depth.unwrap_or(0), density, atoms };
        Ok(Measure { ambient, p, shape, kind: MeasureKind::Sum { components }, nf })
    }

    /// Rebuilds a measure from a density table and point masses.
    fn from_parts(
        ambient: Ambient,
        p: u64,
        shape: Shape,
        density: Option<(u32, Vec<MeasureValue>)>,
        atoms: BTreeMap<Rational, MeasureValue>,
    ) -> Result<Self> {
        let continuous = match density {
            Some((depth, values)) => {
                let level = ambient.level_of(depth);
                let f = LocallyConstantFn::from_fn(ClopenSet::whole(ambient), level, |b| {
                    values[b.index() as usize].clone()
                })?;
                Some(Measure::density(p, f)?)
            }
            None => None,
        };
        let atoms: Vec<_> = atoms.into_iter().filter(|(_, m)| !m.is_zero()).collect();
        match (continuous, atoms.is_empty()) {
            (Some(c), true) => Ok(c),
            (None, _) => Measure::atomic(ambient, p, shape, atoms),
            (Some(c), false) => Measure::sum(vec![c, Measure::atomic(ambient, p, shape, atoms)?]),
        }
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn kind(&self) -> &MeasureKind {
        &self.kind
    }

    /// The level at which the continuous part is constant, if there is one.
    pub fn density_level(&self) -> Option<i64> {
        self.nf.density.as_ref().map(|_| self.ambient.level_of(self.nf.depth))
    }

    /// Point masses of the normal form (nonzero only).
    pub fn point_masses(&self) -> &BTreeMap<Rational, MeasureValue> {
        &self.nf.atoms
    }

    fn density_index(&self, ball: &Ball) -> usize {
        (ball.index() % self.ambient.count(self.nf.depth)) as usize
    }

    /// Values of the density on the density atoms meeting `ball`.
    fn density_values_on(&self, ball: &Ball) -> Vec<&MeasureValue> {
        let Some(d) = &self.nf.density else { return Vec::new() };
        if ball.depth() >= self.nf.depth {
            return vec![&d[self.density_index(ball)]];
        }
        let step = self.ambient.count(ball.depth());
        let n = self.ambient.count(self.nf.depth - ball.depth());
        (0..n).map(|t| &d[(ball.index() + t * step) as usize]).collect()
    }

    fn point_masses_in<'a>(&'a self, ball: &'a Ball) -> impl Iterator<Item = (&'a Rational, &'a MeasureValue)> + 'a {
        self.nf.atoms.iter().filter(move |(x, _)| ball.contains(x).expect("atoms lie in Z[1/r]"))
    }

    pub fn eval_ball(&self, ball: &Ball) -> Result<MeasureValue> {
        self.ambient.check_same(&ball.ambient())?;
        let mut acc = MeasureValue::zero(self.shape);
        if let Some(d) = &self.nf.density {
            if ball.depth() >= self.nf.depth {
                acc = d[self.density_index(ball)].scale(&inv_pow(self.ambient.r(), ball.depth()));
            } else {
                for v in self.density_values_on(ball) {
                    acc.add_assign(v);
                }
                acc = acc.scale(&inv_pow(self.ambient.r(), self.nf.depth));
            }
        }
        for (_, m) in self.point_masses_in(ball) {
            acc.add_assign(m);
        }
        Ok(acc)
    }

    /// `μ(A)`.
    pub fn eval(&self, set: &ClopenSet) -> Result<MeasureValue> {
        self.ambient.check_same(&set.ambient())?;
        let mut acc = MeasureValue::zero(self.shape);
        for b in set.balls() {
            acc.add_assign(&self.eval_ball(b)?);
        }
        Ok(acc)
    }

    /// `‖A‖_{μ,u} = sup { u(μ(B)) : B ⊆ A, B clopen }`, exactly.
    pub fn ball_norm(&self, set: &ClopenSet) -> Result<UltraNorm> {
        self.ambient.check_same(&set.ambient())?;
        let mut best = UltraNorm::zero(self.p);
        for b in set.balls() {
            for v in self.density_values_on(b) {
                best = best.max(v.norm(self.p));
            }
            for (_, m) in self.point_masses_in(b) {
                best = best.max(m.norm(self.p));
            }
        }
        Ok(best)
    }

    /// The depth past which the ball chain at `x` meets no other point mass
    /// and no longer splits density atoms.
    fn stationary_depth(&self, x: &Rational) -> Result<u32> {
        let y = self.ambient.scaled(x)?;
        let mut depth = if self.nf.density.is_some() { self.nf.depth } else { 0 };
        for s in self.nf.atoms.keys().filter(|s| *s != x) {
            let ys = self.ambient.scaled(s)?;
            let v = valuation(&Rational::integer(&y - &ys), self.ambient.r()).expect("distinct points");
            depth = depth.max(v as u32 + 1);
        }
        Ok(depth)
    }

    /// `N_μ(x) = inf_{x ∈ B} ‖B‖_μ`, evaluated along the descending ball chain
    /// at `x` down to the depth where it becomes stationary.
    pub fn n_mu(&self, x: &Rational) -> Result<UltraNorm> {
        if !self.ambient.contains_point(x)? {
            return Err(Error::Domain(format!("{x} lies outside the ambient ball")));
        }
        let last = self.stationary_depth(x)?;
        let mut current = UltraNorm::zero(self.p);
        for depth in 0..=last {
            let ball = self.ambient.ball_of(x, self.ambient.level_of(depth))?;
            let n = self.ball_norm(&ClopenSet::from_ball(ball))?;
            debug_assert!(depth == 0 || n <= current, "ball norms decrease along a chain");
            current = n;
        }
        Ok(current)
    }

    /// Depth at which all point masses sit in distinct balls and the density
    /// is constant on balls.
    pub(crate) fn working_depth(&self) -> Result<u32> {
        let mut depth = if self.nf.density.is_some() { self.nf.depth } else { 0 };
        let pts: Vec<_> = self.nf.atoms.keys().map(|x| self.ambient.scaled(x)).collect::<Result<_>>()?;
        for (i, a) in pts.iter().enumerate() {
            for b in &pts[i + 1..] {
                let v = valuation(&Rational::integer(a - b), self.ambient.r()).expect("distinct");
                depth = depth.max(v as u32 + 1);
            }
        }
        Ok(depth)
    }

    /// Points at which `sup_{x ∈ A} N_μ(x)` is attained. `A` is cut into
    /// balls holding at most one point mass each; every ball contributes one
    /// point carrying no mass, then its point mass if it has one.
    fn representative_points(&self, set: &ClopenSet, extra_level: Option<i64>) -> Result<Vec<Sample>> {
        let mut level = self.ambient.level_of(self.working_depth()?);
        if let Some(m) = set.max_level() {
            level = level.max(m);
        }
        if let Some(e) = extra_level {
            level = level.max(e);
        }
        let step = Rational::from(self.ambient.r() as i64).pow(level as i32).expect("r > 0");
        let mut out = Vec::new();
        for b in set.refine(level)? {
            let mut massless = b.center();
            if self.nf.atoms.contains_key(&massless) {
                massless += &step;
            }
            out.push(Sample { ball: b, point: massless, atom: false });
            for (x, _) in self.point_masses_in(&b) {
                out.push(Sample { ball: b, point: x.clone(), atom: true });
            }
        }
        Ok(out)
    }

    /// `‖Ch_A‖_{N_μ} = sup_{x ∈ A} N_μ(x)`, computed pointwise through `n_mu`.
    pub fn indicator_norm(&self, set: &ClopenSet) -> Result<UltraNorm> {
        let mut best = UltraNorm::zero(self.p);
        for s in self.representative_points(set, None)? {
            best = best.max(self.n_mu(&s.point)?);
        }
        Ok(best)
    }

    /// `‖μ‖_u`; the set-side and point-side suprema are both computed and
    /// must agree.
    pub fn total_norm(&self) -> Result<UltraNorm> {
        let whole = ClopenSet::whole(self.ambient);
        let by_sets = self.ball_norm(&whole)?;
        let by_points = self.indicator_norm(&whole)?;
        if by_sets != by_points {
            return Err(Error::IdentityViolation(format!(
                "total norm: sup over sets {by_sets} differs from sup of N {by_points}"
            )));
        }
        Ok(by_sets)
    }

    /// `{x : N_μ(x) ≥ p^(-k)}` as a canonical union of balls plus isolated points.
    pub fn level_set(&self, k: i64) -> Result<(ClopenSet, Vec<Rational>)> {
        let eps = UltraNorm::from_exp(self.p, k);
        let whole = ClopenSet::whole(self.ambient);
        let mut balls = Vec::new();
        let mut points = Vec::new();
        for s in self.representative_points(&whole, None)? {
            if self.n_mu(&s.point)? < eps {
                continue;
            }
            if s.atom {
                points.push(s.point);
            } else {
                balls.push(s.ball);
            }
        }
        let set = ClopenSet::from_balls(self.ambient, &balls)?;
        let mut isolated = Vec::new();
        for x in points {
            if !set.contains_point(&x)? {
                isolated.push(x);
            }
        }
        Ok((set, isolated))
    }

    /// `ν(A) = ∫_A w dμ` for a scalar step function `w` (zero off its domain).
    pub fn weighted_by(&self, w: &LocallyConstantFn<Rational>) -> Result<Measure> {
        self.ambient.check_same(&w.ambient())?;
        let weight_at_ball = |b: &Ball| w.value_on(b).cloned().unwrap_or_else(Rational::zero);
        let density = match &self.nf.density {
            Some(d) => {
                let depth = self.nf.depth.max(self.ambient.depth_of(w.level())?);
                let values = self
                    .ambient
                    .atoms(self.ambient.level_of(depth))?
                    .iter()
                    .map(|b| d[self.density_index(b)].scale(&weight_at_ball(b)))
                    .collect();
                Some((depth, values))
            }
            None => None,
        };
        let mut atoms = BTreeMap::new();
        for (x, m) in &self.nf.atoms {
            let wx = w.value_at(x)?.cloned().unwrap_or_else(Rational::zero);
            atoms.insert(x.clone(), m.scale(&wx));
        }
        Measure::from_parts(self.ambient, self.p, self.shape, density, atoms)
    }
}

/// `∫_G f dμ = Σ_k f(A_k)·μ(A_k)` over the atoms of `f`.
pub fn integrate(f: &LocallyConstantFn<MeasureValue>, mu: &Measure) -> Result<MeasureValue> {
    mu.ambient.check_same(&f.ambient())?;
    let mut acc: Option<MeasureValue> = None;
    for (ball, v) in f.atoms() {
        let term = v.checked_mul(&mu.eval_ball(ball)?)?;
        match &mut acc {
            Some(a) => *a = a.checked_add(&term)?,
            None => acc = Some(term),
        }
    }
    Ok(acc.unwrap_or_else(|| MeasureValue::zero(mu.shape)))
}

/// `‖f‖_{q,u} = [sup_x u(f(x))^q N_μ(x)]^(1/q)`; the exponent may be fractional.
pub fn lq_norm(f: &LocallyConstantFn<MeasureValue>, mu: &Measure, q: u32) -> Result<FractionalNorm> {
    if q == 0 {
        return invalid("q must be at least 1");
    }
    mu.ambient.check_same(&f.ambient())?;
    let mut best = UltraNorm::zero(mu.p);
    for s in mu.representative_points(f.domain(), Some(f.level()))? {
        let fx = f.value_on(&s.ball).expect("ball refines an atom of f");
        best = best.max(fx.norm(mu.p).pow(q) * mu.n_mu(&s.point)?);
    }
    Ok(FractionalNorm::root(best, q))
}

struct Sample {
    ball: Ball,
    point: Rational,
    /// Whether `point` carries a point mass.
    atom: bool,
}

/// One threshold `ε = p^(-k)` of an integrability report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpsilonSet {
    pub k: i64,
    /// `{x : u(f(x))·N_μ(x) ≥ ε}` away from point masses.
    pub balls: ClopenSet,
    /// Point masses where the product reaches `ε`.
    pub points: Vec<Rational>,
    /// `min N_μ` over the set: it lies inside `{N_μ ≥ δ}`.
    pub delta: Option<UltraNorm>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegrabilityReport {
    /// `f` is constant on every working-level atom where `N_μ > 0`.
    pub constant_on_support: bool,
    pub levels: Vec<EpsilonSet>,
    pub integrable: bool,
}

/// Checks the integrability criterion at locally constant scale for every
/// `ε = p^(-k)` from the largest attained value down to `k_max`.
pub fn integrability_report(
    f: &LocallyConstantFn<MeasureValue>,
    mu: &Measure,
    k_max: i64,
) -> Result<IntegrabilityReport> {
    mu.ambient.check_same(&f.ambient())?;
    let p = mu.p;
    let mut samples = Vec::new();
    for s in mu.representative_points(f.domain(), Some(f.level()))? {
        let fx = f.value_on(&s.ball).expect("ball refines an atom of f");
        let n = mu.n_mu(&s.point)?;
        samples.push((s, fx.norm(p) * n, n));
    }
    let top = samples.iter().filter_map(|s| s.1.exp()).min().unwrap_or(0).min(k_max);
    let mut levels = Vec::new();
    let mut integrable = true;
    for k in top..=k_max {
        let eps = UltraNorm::from_exp(p, k);
        let mut balls = Vec::new();
        let mut points = Vec::new();
        let mut delta: Option<UltraNorm> = None;
        for (s, value, n) in &samples {
            if *value < eps {
                continue;
            }
            if s.atom {
                points.push(s.point.clone());
            } else {
                balls.push(s.ball);
            }
            delta = Some(delta.map_or(*n, |d| d.min(*n)));
        }
        if delta.is_some_and(|d| d.is_zero()) {
            integrable = false;
        }
        let balls = ClopenSet::from_balls(mu.ambient, &balls)?;
        let mut isolated = Vec::new();
        for x in points {
            if !balls.contains_point(&x)? {
                isolated.push(x);
            }
        }
        levels.push(EpsilonSet { k, balls, points: isolated, delta });
    }
    Ok(IntegrabilityReport { constant_on_support: true, levels, integrable })
}

#[derive(Serialize, Deserialize)]
struct AtomWire {
    point: Rational,
    mass: MeasureValue,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum KindWire {
    Haar { total: MeasureValue },
    Density { density: LocallyConstantFn<MeasureValue> },
    Atomic { atoms: Vec<AtomWire> },
    Sum { components: Vec<Measure> },
}

#[derive(Serialize, Deserialize)]
struct MeasureWire {
    r: u64,
    m0: u32,
    p: u64,
    shape: Shape,
    #[serde(flatten)]
    kind: KindWire,
}

impl Serialize for Measure {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let kind = match &self.kind {
            MeasureKind::Haar { total } => KindWire::Haar { total: total.clone() },
            MeasureKind::Density { density } => KindWire::Density { density: density.clone() },
            MeasureKind::Atomic { atoms } => KindWire::Atomic {
                atoms: atoms.iter().map(|(x, m)| AtomWire { point: x.clone(), mass: m.clone() }).collect(),
            },
            MeasureKind::Sum { components } => KindWire::Sum { components: components.clone() },
        };
        MeasureWire { r: self.ambient.r(), m0: self.ambient.m0(), p: self.p, shape: self.shape, kind }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Measure {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = MeasureWire::deserialize(d)?;
        let build = || -> Result<Measure> {
            let ambient = Ambient::new(w.r, w.m0)?;
            let m = match w.kind {
                KindWire::Haar { total } => Measure::haar(ambient, w.p, total)?,
                KindWire::Density { density } => {
                    ambient.check_same(&density.ambient())?;
                    Measure::density(w.p, density)?
                }
                KindWire::Atomic { atoms } => {
                    Measure::atomic(ambient, w.p, w.shape, atoms.into_iter().map(|a| (a.point, a.mass)))?
                }
                KindWire::Sum { components } => {
                    let m = Measure::sum(components)?;
                    ambient.check_same(&m.ambient)?;
                    m
                }
            };
            if m.shape != w.shape || m.p != w.p {
                return Err(Error::ShapeMismatch("declared shape or prime disagrees with the payload".into()));
            }
            Ok(m)
        };
        build().map_err(de::Error::custom)
    }
}

#[cfg(test)]
mod tests;
