use std::sync::Arc;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use super::{FiniteProbSpace, RandomVariable};
use crate::clopen::{Ambient, Ball, ClopenSet, LocallyConstantFn, ProductFn};
use crate::error::{Error, Result};
use crate::measures::{integrate, Measure, MeasureValue, Shape};
use crate::padic::{Cyclotomic, Rational};

/// An elementary orthogonal stochastic measure on the balls of one level:
/// `ξ(A_k)(ω) = c_k·s_k(ω)` with `s_k` an independent sign, so that
/// `M(ξ(A)ξ(B)) = μ(A ∩ B)` whenever `μ(A_k) = c_k²`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthStochMeasure {
    structure: Measure,
    atom_level: i64,
    atoms: Vec<Ball>,
    c: Vec<Rational>,
    /// The sign factor driving each atom; `None` when `c_k = 0`.
    factor: Vec<Option<usize>>,
    space: Arc<FiniteProbSpace>,
}

impl OrthStochMeasure {
    /// One sign per atom of `μ` at `level` with nonzero mass, and
    /// `c_k = √μ(A_k)`.
    ///
    /// Masses must be squares of rationals. For Haar measure on `Z_r` this
    /// holds at even levels, where every atom has mass `r^(-2m)`.
    pub fn build(mu: &Measure, level: i64) -> Result<Self> {
        if mu.shape() != Shape::Scalar {
            return Err(Error::ShapeMismatch("the structure measure must be scalar".into()));
        }
        if mu.p() == 2 {
            return Err(Error::UnsupportedPrime(2));
        }
        let mut c = Vec::new();
        for a in mu.ambient().atoms(level)? {
            let m = mu.eval_ball(&a)?;
            let m = m.as_scalar().expect("scalar measure");
            let root = m.sqrt().ok_or_else(|| Error::NonSquareAtom { atom: describe(&a) })?;
            c.push(root);
        }
        Self::from_parts(mu.clone(), level, c)
    }

    /// Assembles `ξ` from coefficients without checking them against `μ`;
    /// [`verify_m_conditions`] tells whether the result is orthogonal with
    /// structure measure `μ`.
    pub fn from_parts(structure: Measure, atom_level: i64, c: Vec<Rational>) -> Result<Self> {
        let atoms = structure.ambient().atoms(atom_level)?;
        if c.len() != atoms.len() {
            return Err(Error::InvalidArgument(format!("{} coefficients for {} atoms", c.len(), atoms.len())));
        }
        let mut next = 0;
        let factor = c
            .iter()
            .map(|ck| {
                (!ck.is_zero()).then(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect();
        let space = Arc::new(FiniteProbSpace::rademacher(structure.p(), next)?);
        Ok(OrthStochMeasure { structure, atom_level, atoms, c, factor, space })
    }

    pub fn structure(&self) -> &Measure {
        &self.structure
    }

    pub fn ambient(&self) -> Ambient {
        self.structure.ambient()
    }

    pub fn atom_level(&self) -> i64 {
        self.atom_level
    }

    pub fn atoms(&self) -> &[Ball] {
        &self.atoms
    }

    pub fn coefficients(&self) -> &[Rational] {
        &self.c
    }

    pub fn space(&self) -> &Arc<FiniteProbSpace> {
        &self.space
    }

    pub fn p(&self) -> u64 {
        self.structure.p()
    }

    fn zero_rv(&self) -> RandomVariable {
        RandomVariable::zero(self.space.clone(), self.ambient().r())
    }

    /// `ξ(A_k)` for the `k`-th atom.
    pub fn atom_variable(&self, k: usize) -> RandomVariable {
        match self.factor[k] {
            Some(f) => RandomVariable::sign(self.space.clone(), self.ambient().r(), f)
                .expect("factor exists")
                .scale_rational(&self.c[k]),
            None => self.zero_rv(),
        }
    }

    /// `ξ(A) = Σ_{A_k ⊆ A} ξ(A_k)`; `A` must be a union of atoms.
    pub fn xi(&self, set: &ClopenSet) -> Result<RandomVariable> {
        self.ambient().check_same(&set.ambient())?;
        if set.max_level().is_some_and(|l| l > self.atom_level) {
            return Err(Error::RefineRequired(format!(
                "set reaches level {} below the atom level {}",
                set.max_level().unwrap(),
                self.atom_level
            )));
        }
        let mut acc = self.zero_rv();
        for a in set.refine(self.atom_level)? {
            acc = &acc + &self.atom_variable(a.index() as usize);
        }
        Ok(acc)
    }

    /// Value of `f` on each atom; `f` must be constant on atoms.
    fn atom_values(&self, f: &LocallyConstantFn<Rational>) -> Result<Vec<Rational>> {
        self.ambient().check_same(&f.ambient())?;
        if f.level() > self.atom_level {
            return Err(Error::RefineRequired(format!(
                "integrand has level {} below the atom level {}; rebuild the measure at a finer level",
                f.level(),
                self.atom_level
            )));
        }
        Ok(self.atoms.iter().map(|a| f.value_on(a).cloned().unwrap_or_else(Rational::zero)).collect())
    }

    /// `∫ f dξ = Σ_k f(A_k)·ξ(A_k)`.
    pub fn integral(&self, f: &LocallyConstantFn<Rational>) -> Result<RandomVariable> {
        let vals = self.atom_values(f)?;
        let mut acc = self.zero_rv();
        for (k, v) in vals.iter().enumerate() {
            if !v.is_zero() {
                acc = &acc + &self.atom_variable(k).scale_rational(v);
            }
        }
        Ok(acc)
    }
}

fn show(set: &ClopenSet) -> String {
    let balls: Vec<String> = set.balls().iter().map(describe).collect();
    format!("{{{}}}", balls.join(", "))
}

fn describe(b: &Ball) -> String {
    format!("level {} center {}", b.level(), b.center())
}

/// Outcome of one identity over a family of cases.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConditionReport {
    pub name: String,
    pub checked: usize,
    /// Descriptions of failing cases (capped at 20).
    pub failures: Vec<String>,
}

impl ConditionReport {
    fn new(name: &str) -> Self {
        ConditionReport { name: name.into(), checked: 0, failures: Vec::new() }
    }

    fn record(&mut self, ok: bool, case: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok && self.failures.len() < 20 {
            self.failures.push(case());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MReport {
    pub conditions: Vec<ConditionReport>,
}

impl MReport {
    pub fn passed(&self) -> bool {
        self.conditions.iter().all(|c| c.passed())
    }
}

/// Checks (M1)–(M4) and the additivity of `A ↦ M(ξ(A)²)` over every pair of
/// the given sets, with `ξ` and `μ` supplied as functions.
pub fn verify_m_conditions_with(
    sets: &[ClopenSet],
    empty: &ClopenSet,
    mut xi: impl FnMut(&ClopenSet) -> Result<RandomVariable>,
    mut mu: impl FnMut(&ClopenSet) -> Result<Cyclotomic>,
) -> Result<MReport> {
    let mut m1 = ConditionReport::new("M1 empty set");
    let mut m2 = ConditionReport::new("M2 additivity");
    let mut m3 = ConditionReport::new("M3 covariance");
    let mut m4 = ConditionReport::new("M4 orthogonality");
    let mut add = ConditionReport::new("structure additivity");

    m1.record(xi(empty)?.is_zero(), || "xi(empty) is not zero".into());
    let vars: Vec<RandomVariable> = sets.iter().map(&mut xi).collect::<Result<_>>()?;
    let squares: Vec<Cyclotomic> = vars.iter().map(|v| (v * v).expectation()).collect();
    for (i, a) in sets.iter().enumerate() {
        for (j, b) in sets.iter().enumerate() {
            let cov = (&vars[i] * &vars[j]).expectation();
            let inter = a.intersect(b)?;
            let expect = mu(&inter)?;
            m3.record(cov == expect, || {
                format!("M(xi(A)xi(B)) = {cov}, mu(A∩B) = {expect} for A={} B={}", show(a), show(b))
            });
            if inter.is_empty() {
                m4.record(cov.is_zero(), || format!("M(xi(A)xi(B)) = {cov} for disjoint A={} B={}", show(a), show(b)));
                if i < j {
                    let u = a.union(b)?;
                    let xu = xi(&u)?;
                    m2.record(xu == &vars[i] + &vars[j], || {
                        format!("xi(A∪B) != xi(A)+xi(B) for A={} B={}", show(a), show(b))
                    });
                    let lhs = (&xu * &xu).expectation();
                    let rhs = &squares[i] + &squares[j];
                    add.record(lhs == rhs, || {
                        format!("M(xi(A∪B)^2) = {lhs} but sum {rhs} for A={} B={}", show(a), show(b))
                    });
                }
            }
        }
    }
    Ok(MReport { conditions: vec![m1, m2, m3, m4, add] })
}

/// (M1)–(M4) over all balls of level at most `max_level`.
pub fn verify_m_conditions(xi: &OrthStochMeasure, max_level: i64) -> Result<MReport> {
    let g = xi.ambient();
    let sets: Vec<ClopenSet> = g.balls_up_to(max_level)?.into_iter().map(ClopenSet::from_ball).collect();
    let r = g.r();
    verify_m_conditions_with(
        &sets,
        &ClopenSet::empty(g),
        |a| xi.xi(a),
        |a| {
            let v = xi.structure.eval(a)?;
            Ok(Cyclotomic::rational(r, v.as_scalar().expect("scalar").clone()))
        },
    )
}

/// Both sides of an identity and whether they agree.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityCheck<T> {
    pub lhs: T,
    pub rhs: T,
    pub holds: bool,
}

impl<T: PartialEq> IdentityCheck<T> {
    fn new(lhs: T, rhs: T) -> Self {
        let holds = lhs == rhs;
        IdentityCheck { lhs, rhs, holds }
    }
}

/// `M(∫f dξ · ∫g dξ) = ∫ f·g dμ`.
pub fn isometry_identity_check(
    f: &LocallyConstantFn<Rational>,
    g: &LocallyConstantFn<Rational>,
    xi: &OrthStochMeasure,
) -> Result<IdentityCheck<Cyclotomic>> {
    let lhs = (&xi.integral(f)? * &xi.integral(g)?).expectation();
    let level = f.level().max(g.level());
    let amb = xi.ambient();
    let fg = LocallyConstantFn::from_fn(ClopenSet::whole(amb), level, |b| {
        let fv = f.value_on(b).cloned().unwrap_or_else(Rational::zero);
        let gv = g.value_on(b).cloned().unwrap_or_else(Rational::zero);
        MeasureValue::scalar(fv * gv)
    })?;
    let rhs = integrate(&fg, &xi.structure)?;
    let rhs = Cyclotomic::rational(amb.r(), rhs.as_scalar().expect("scalar").clone());
    Ok(IdentityCheck::new(lhs, rhs))
}

/// `ρ(A) = ∫ Ch_A g dξ` together with `ν(A) = ∫_A g² dμ`; `ρ` is again an
/// elementary orthogonal measure, driven by the same signs, with structure
/// measure `ν`.
#[derive(Clone, Debug, PartialEq)]
pub struct Weighted {
    pub rho: OrthStochMeasure,
    pub nu: Measure,
}

pub fn weighted_measure(xi: &OrthStochMeasure, g: &LocallyConstantFn<Rational>) -> Result<Weighted> {
    let gv = xi.atom_values(g)?;
    let amb = xi.ambient();
    let g2 = LocallyConstantFn::from_fn(ClopenSet::whole(amb), xi.atom_level, |b| {
        let v = &gv[b.index() as usize];
        v * v
    })?;
    let nu = xi.structure.weighted_by(&g2)?;
    let c = xi.c.iter().zip(&gv).map(|(c, g)| c * g).collect();
    let rho = OrthStochMeasure { structure: nu.clone(), c, ..xi.clone() };
    Ok(Weighted { rho, nu })
}

/// `∫ f dρ = ∫ f·g dξ`.
pub fn weighted_integral_identity(
    xi: &OrthStochMeasure,
    g: &LocallyConstantFn<Rational>,
    w: &Weighted,
    f: &LocallyConstantFn<Rational>,
) -> Result<IdentityCheck<RandomVariable>> {
    let fv = xi.atom_values(f)?;
    let gv = xi.atom_values(g)?;
    let lhs = w.rho.integral(f)?;
    let fg = LocallyConstantFn::from_fn(ClopenSet::whole(xi.ambient()), xi.atom_level, |b| {
        let k = b.index() as usize;
        &fv[k] * &gv[k]
    })?;
    Ok(IdentityCheck::new(lhs, xi.integral(&fg)?))
}

/// `ξ(A) = ∫ Ch_A / g dρ`, refused when `g` vanishes on an atom of `A`.
pub fn invert_weighted(w: &Weighted, g: &LocallyConstantFn<Rational>, set: &ClopenSet) -> Result<RandomVariable> {
    let rho = &w.rho;
    let gv = rho.atom_values(g)?;
    let inside = set.refine(rho.atom_level.max(set.max_level().unwrap_or(rho.atom_level)))?;
    if inside.iter().any(|b| b.level() > rho.atom_level) {
        return Err(Error::RefineRequired("set is finer than the atom level".into()));
    }
    let mut recip = vec![Rational::zero(); rho.atoms.len()];
    for b in &inside {
        let k = b.index() as usize;
        recip[k] = gv[k].recip().ok_or_else(|| Error::DivisionByZero { atom: describe(b) })?;
    }
    let h = LocallyConstantFn::from_fn(ClopenSet::whole(rho.ambient()), rho.atom_level, |b| {
        recip[b.index() as usize].clone()
    })?;
    rho.integral(&h)
}

/// `(t-atom, ∫ g(t, ·) dξ)` for every atom of `g`'s first factor.
pub fn kernel_integrals(g: &ProductFn<Rational>, xi: &OrthStochMeasure) -> Result<Vec<(Ball, RandomVariable)>> {
    xi.ambient().check_same(&g.right())?;
    let mut out = Vec::new();
    for (i, t) in g.left_atoms().iter().enumerate() {
        let gt = LocallyConstantFn::from_fn(ClopenSet::whole(g.right()), g.right_level(), |y| {
            g.get(i, y.index() as usize).clone()
        })?;
        out.push((*t, xi.integral(&gt)?));
    }
    Ok(out)
}

/// `∫_T z(t) (∫_G g(t,y) ξ(dy)) h(dt) = ∫_G q(y) ξ(dy)` with
/// `q(y) = ∫_T z(t) g(t,y) h(dt)`.
pub fn stochastic_fubini(
    z: &LocallyConstantFn<Rational>,
    g: &ProductFn<Rational>,
    xi: &OrthStochMeasure,
    h: &Measure,
) -> Result<IdentityCheck<RandomVariable>> {
    h.ambient().check_same(&g.left())?;
    h.ambient().check_same(&z.ambient())?;
    if h.shape() != Shape::Scalar {
        return Err(Error::ShapeMismatch("h must be scalar".into()));
    }
    let t_level = z.level().max(g.left_level());
    let g = g.refine(t_level, g.right_level())?;
    let weights: Vec<Rational> = g
        .left_atoms()
        .iter()
        .map(|t| {
            let zt = z.value_on(t).cloned().unwrap_or_else(Rational::zero);
            Ok(zt * h.eval_ball(t)?.as_scalar().expect("scalar").clone())
        })
        .collect::<Result<_>>()?;

    let mut lhs = RandomVariable::zero(xi.space.clone(), xi.ambient().r());
    for ((_, eta), w) in kernel_integrals(&g, xi)?.iter().zip(&weights) {
        lhs = &lhs + &eta.scale_rational(w);
    }
    let q = LocallyConstantFn::from_fn(ClopenSet::whole(g.right()), g.right_level(), |y| {
        let j = y.index() as usize;
        weights.iter().enumerate().map(|(i, w)| w * g.get(i, j)).sum::<Rational>()
    })?;
    Ok(IdentityCheck::new(lhs, xi.integral(&q)?))
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct XiWire {
    atom_level: i64,
    atoms: Vec<Ball>,
    c: Vec<Rational>,
    p: u64,
    measure: Measure,
}

impl Serialize for OrthStochMeasure {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        XiWire {
            atom_level: self.atom_level,
            atoms: self.atoms.clone(),
            c: self.c.clone(),
            p: self.p(),
            measure: self.structure.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for OrthStochMeasure {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = XiWire::deserialize(d)?;
        if w.p != w.measure.p() {
            return Err(de::Error::custom("\"p\" disagrees with the measure"));
        }
        let xi = OrthStochMeasure::from_parts(w.measure, w.atom_level, w.c).map_err(de::Error::custom)?;
        if xi.atoms != w.atoms {
            return Err(de::Error::custom("\"atoms\" must list every ball of the atom level in order"));
        }
        Ok(xi)
    }
}
