use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Entry, SelfTestConfig};
use crate::clopen::{Ambient, Ball, ClopenSet, LocallyConstantFn, ProductFn};
use crate::error::{Error, Result};
use crate::measures::{convolve, fubini_check, Measure, MeasureValue, ProductMeasure, Shape};
use crate::operators::{pairing, rank_one, trace_bound_violations, trace_measure, FinMatrix, FinVector};
use crate::padic::{padic_valuation, Cyclotomic, Rational};
use crate::spectral::{
    char_functional, character_eval, spectral_demo, spectral_recover, synthesize, SpectralSpec, Times,
};
use crate::stochastic::{
    invert_weighted, isometry_identity_check, stochastic_fubini, verify_m_conditions, weighted_integral_identity,
    weighted_measure, OrthStochMeasure,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Ultrametric,
    NCharacterization,
    MConditions,
    Isometry,
    WeightedInversion,
    StochasticFubini,
    Product,
    Trace,
    Characters,
    Spectral,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::Ultrametric,
        Suite::NCharacterization,
        Suite::MConditions,
        Suite::Isometry,
        Suite::WeightedInversion,
        Suite::StochasticFubini,
        Suite::Product,
        Suite::Trace,
        Suite::Characters,
        Suite::Spectral,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Ultrametric => "ultrametric",
            Suite::NCharacterization => "n-characterization",
            Suite::MConditions => "m-conditions",
            Suite::Isometry => "isometry",
            Suite::WeightedInversion => "weighted-inversion",
            Suite::StochasticFubini => "stochastic-fubini",
            Suite::Product => "product",
            Suite::Trace => "trace",
            Suite::Characters => "characters",
            Suite::Spectral => "spectral",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite {s:?}")))
    }
}

pub(super) fn run(suite: Suite, config: &SelfTestConfig) -> Vec<Entry> {
    // Each suite gets its own stream so adding cases to one leaves the others
    // unchanged.
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ salt(suite.name()));
    let mut out = Vec::new();
    let ctx = &mut Ctx { rng: &mut rng, config, out: &mut out };
    match suite {
        Suite::Ultrametric => ultrametric(ctx),
        Suite::NCharacterization => n_characterization(ctx),
        Suite::MConditions => m_conditions(ctx),
        Suite::Isometry => isometry(ctx),
        Suite::WeightedInversion => weighted_inversion(ctx),
        Suite::StochasticFubini => fubini(ctx),
        Suite::Product => product(ctx),
        Suite::Trace => trace(ctx),
        Suite::Characters => characters(ctx),
        Suite::Spectral => spectral(ctx),
    }
    out
}

fn salt(name: &str) -> u64 {
    // FNV-1a; only needs to be stable.
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3))
}

struct Ctx<'a> {
    rng: &'a mut ChaCha8Rng,
    config: &'a SelfTestConfig,
    out: &'a mut Vec<Entry>,
}

impl Ctx<'_> {
    fn tally(&self, identity: &str, case: impl Into<String>) -> Tally {
        Tally { identity: identity.into(), case: case.into(), checked: 0, failure: None }
    }

    fn push(&mut self, t: Tally) {
        self.out.push(Entry {
            passed: t.failure.is_none(),
            identity: t.identity,
            case: t.case,
            checked: t.checked,
            detail: t.failure,
        });
    }

    /// A setup step that failed outright.
    fn broken(&mut self, identity: &str, case: impl Into<String>, e: Error) {
        let mut t = self.tally(identity, case);
        t.check(Err(e), String::new);
        self.push(t);
    }

    fn pairs(&self) -> Vec<(u64, u64)> {
        self.config.primes.clone()
    }
}

struct Tally {
    identity: String,
    case: String,
    checked: usize,
    failure: Option<String>,
}

impl Tally {
    fn check(&mut self, outcome: Result<bool>, detail: impl FnOnce() -> String) {
        self.checked += 1;
        if self.failure.is_some() {
            return;
        }
        match outcome {
            Ok(true) => {}
            Ok(false) => self.failure = Some(detail()),
            Err(e) => self.failure = Some(format!("{}: {e}", e.kind())),
        }
    }
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn pow(b: u64, e: u32) -> i64 {
    (b as i64).pow(e)
}

/// `±(u/v)·p^k` with small units `u, v` and `|k| ≤ 4`, or zero.
fn rational_near(rng: &mut ChaCha8Rng, p: u64) -> Rational {
    if rng.gen_ratio(1, 20) {
        return Rational::zero();
    }
    let u: i64 = rng.gen_range(1..=500);
    let v: i64 = rng.gen_range(1..=500);
    let k: i32 = rng.gen_range(-4..=4);
    let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
    Rational::new(sign * u, v) * Rational::from(p as i64).pow(k).expect("p > 0")
}

fn small(rng: &mut ChaCha8Rng) -> Rational {
    q(rng.gen_range(-12..=12), rng.gen_range(1..=9))
}

fn nonzero_small(rng: &mut ChaCha8Rng) -> Rational {
    loop {
        let x = small(rng);
        if !x.is_zero() {
            return x;
        }
    }
}

fn step(rng: &mut ChaCha8Rng, g: Ambient, level: i64) -> Result<LocallyConstantFn<Rational>> {
    LocallyConstantFn::from_fn(ClopenSet::whole(g), level, |_| small(rng))
}

fn scalar_density(rng: &mut ChaCha8Rng, g: Ambient, p: u64, level: i64) -> Result<Measure> {
    let f = LocallyConstantFn::from_fn(ClopenSet::whole(g), level, |_| {
        if rng.gen_ratio(1, 5) {
            MeasureValue::scalar(Rational::zero())
        } else {
            MeasureValue::scalar(rational_near(rng, p))
        }
    })?;
    Measure::density(p, f)
}

/// A few atoms, some deep inside `Z_r`, with assorted `p`-adic sizes.
fn scalar_atomic(rng: &mut ChaCha8Rng, g: Ambient, p: u64) -> Result<Measure> {
    let r = g.r();
    let pts = [q(0, 1), q(1, 1), q(1 + pow(r, 3), 1), q(pow(r, 2), 1), q(2 + 3 * pow(r, 3), 1)];
    let atoms: Vec<_> = pts.into_iter().map(|x| (x, MeasureValue::scalar(rational_near(rng, p)))).collect();
    Measure::atomic(g, p, Shape::Scalar, atoms)
}

fn ball_sets(g: Ambient, max_level: i64) -> Result<Vec<ClopenSet>> {
    Ok(g.balls_up_to(max_level)?.into_iter().map(ClopenSet::from_ball).collect())
}

fn valuation_oracle(x: &Rational, p: u64) -> Option<i64> {
    fn count(n: &BigInt, p: &BigInt) -> i64 {
        let mut n = n.abs();
        let mut k = 0;
        while (&n % p).is_zero() {
            n /= p;
            k += 1;
        }
        k
    }
    if x.is_zero() {
        return None;
    }
    let pb = BigInt::from(p);
    Some(count(x.numer(), &pb) - count(x.denom(), &pb))
}

fn ultrametric(ctx: &mut Ctx) {
    let primes: BTreeSet<u64> =
        [2, 3, 5].into_iter().chain(ctx.config.primes.iter().flat_map(|&(r, p)| [r, p])).collect();
    let n = ctx.config.random_cases.max(1000);
    for p in primes {
        let case = format!("p={p}, {n} random rationals");
        let mut oracle = ctx.tally("|x|_p agrees with direct prime counting", case.clone());
        let mut mult = ctx.tally("|xy|_p = |x|_p |y|_p", case.clone());
        let mut tri = ctx.tally("|x+y|_p <= max(|x|_p, |y|_p)", case.clone());
        let mut iso = ctx.tally("|x+y|_p = max when |x|_p != |y|_p", case);
        let xs: Vec<Rational> = (0..n).map(|_| rational_near(ctx.rng, p)).collect();
        for (i, x) in xs.iter().enumerate() {
            let y = &xs[(i * 7 + 3) % n];
            let norm = |z: &Rational| padic_valuation(z, p);
            let nx = norm(x);
            oracle.check(nx.clone().map(|v| v.exp() == valuation_oracle(x, p)), || format!("x = {x}"));
            let (Ok(nx), Ok(ny)) = (nx, norm(y)) else { continue };
            mult.check(norm(&(x * y)).map(|v| v == nx * ny), || format!("x = {x}, y = {y}"));
            let bound = nx.max(ny);
            let sum = norm(&(x + y));
            tri.check(sum.clone().map(|s| s <= bound), || format!("x = {x}, y = {y}"));
            if nx != ny {
                iso.check(sum.map(|s| s == bound), || format!("x = {x}, y = {y}"));
            }
        }
        for t in [oracle, mult, tri, iso] {
            ctx.push(t);
        }
    }
}

fn n_characterization(ctx: &mut Ctx) {
    let max_level = ctx.config.max_level;
    for (r, p) in ctx.pairs() {
        let fixtures = (|| -> Result<Vec<(&str, Measure)>> {
            let g = Ambient::new(r, 0)?;
            let haar = Measure::unit_haar(g, p)?;
            let density = scalar_density(ctx.rng, g, p, 2)?;
            let atomic = scalar_atomic(ctx.rng, g, p)?;
            let mixed = Measure::sum(vec![scalar_density(ctx.rng, g, p, 1)?, scalar_atomic(ctx.rng, g, p)?])?;
            Ok(vec![("haar", haar), ("density", density), ("atomic", atomic), ("density+atomic", mixed)])
        })();
        let identity = "sup of N over a ball equals the ball norm";
        let fixtures = match fixtures {
            Ok(f) => f,
            Err(e) => {
                ctx.broken(identity, format!("(r,p)=({r},{p})"), e);
                continue;
            }
        };
        for (name, mu) in fixtures {
            let mut t = ctx.tally(identity, format!("(r,p)=({r},{p}) {name}, balls to level {max_level}"));
            match ball_sets(mu.ambient(), max_level) {
                Ok(sets) => {
                    for a in &sets {
                        let lhs = mu.indicator_norm(a);
                        let rhs = mu.ball_norm(a);
                        let ok = lhs.as_ref().ok().zip(rhs.as_ref().ok()).map(|(l, r)| l == r);
                        let res = match (ok, lhs.as_ref().err(), rhs.as_ref().err()) {
                            (Some(b), _, _) => Ok(b),
                            (None, Some(e), _) | (None, None, Some(e)) => Err(e.clone()),
                            (None, None, None) => unreachable!(),
                        };
                        t.check(res, || format!("{a:?}: sup N = {lhs:?}, ball norm = {rhs:?}"));
                    }
                }
                Err(e) => t.check(Err(e), String::new),
            }
            ctx.push(t);
        }
    }
}

fn m_conditions(ctx: &mut Ctx) {
    for (r, p) in ctx.pairs() {
        for level in (0..=ctx.config.max_level.min(2)).step_by(2) {
            for total in [1, 4] {
                let case = format!("(r,p)=({r},{p}) haar total {total}, atom level {level}");
                let built = Ambient::new(r, 0)
                    .and_then(|g| Measure::haar(g, p, MeasureValue::scalar(q(total, 1))))
                    .and_then(|mu| OrthStochMeasure::build(&mu, level));
                let xi = match built {
                    Ok(xi) => xi,
                    Err(e @ Error::UnsupportedPrime(_)) => {
                        ctx.out.push(Entry {
                            identity: "construction".into(),
                            case,
                            checked: 0,
                            passed: true,
                            detail: Some(format!("skipped: {e}")),
                        });
                        continue;
                    }
                    Err(e) => {
                        ctx.broken("construction", case, e);
                        continue;
                    }
                };
                match verify_m_conditions(&xi, level) {
                    Ok(rep) => {
                        for c in rep.conditions {
                            ctx.out.push(Entry {
                                passed: c.passed(),
                                detail: c.failures.first().cloned(),
                                identity: c.name,
                                case: case.clone(),
                                checked: c.checked,
                            });
                        }
                    }
                    Err(e) => ctx.broken("verification", case, e),
                }
            }
        }
    }
}

/// `ξ` for unit Haar on `Z_r` at level 2, or `None` when `p = 2`.
fn haar_xi(r: u64, p: u64) -> Option<Result<OrthStochMeasure>> {
    let built =
        Ambient::new(r, 0).and_then(|g| Measure::unit_haar(g, p)).and_then(|mu| OrthStochMeasure::build(&mu, 2));
    match built {
        Err(Error::UnsupportedPrime(_)) => None,
        other => Some(other),
    }
}

fn isometry(ctx: &mut Ctx) {
    let n = ctx.config.random_cases;
    for (r, p) in ctx.pairs() {
        let case = format!("(r,p)=({r},{p}) unit haar, {n} step-function pairs");
        let Some(xi) = haar_xi(r, p) else { continue };
        let xi = match xi {
            Ok(xi) => xi,
            Err(e) => {
                ctx.broken("construction", case, e);
                continue;
            }
        };
        let mut t = ctx.tally("M(∫f dξ · ∫g dξ) = ∫ fg dμ", case.clone());
        let mut enum_t = ctx.tally("expectation by independence matches enumeration of Ω", case);
        let g = xi.ambient();
        for i in 0..n {
            let (lf, lg) = (ctx.rng.gen_range(0..=2), ctx.rng.gen_range(0..=2));
            let pair = step(ctx.rng, g, lf).and_then(|f| Ok((f, step(ctx.rng, g, lg)?)));
            let (f, h) = match pair {
                Ok(x) => x,
                Err(e) => {
                    t.check(Err(e), String::new);
                    continue;
                }
            };
            match isometry_identity_check(&f, &h, &xi) {
                Ok(c) => t.check(Ok(c.holds), || format!("case {i}: {} vs {}", c.lhs, c.rhs)),
                Err(e) => t.check(Err(e), String::new),
            }
            // Enumeration is exponential in the atoms; only the small field.
            if xi.atoms().len() <= 9 && i < 20 {
                let res = xi.integral(&f).and_then(|a| {
                    let prod = &a * &xi.integral(&h)?;
                    Ok(prod.expectation_by_enumeration()? == prod.expectation())
                });
                enum_t.check(res, || format!("case {i}"));
            }
        }
        ctx.push(t);
        if enum_t.checked > 0 {
            ctx.push(enum_t);
        }
    }
}

fn nowhere_zero(rng: &mut ChaCha8Rng, g: Ambient, level: i64) -> Result<LocallyConstantFn<Rational>> {
    LocallyConstantFn::from_fn(ClopenSet::whole(g), level, |_| nonzero_small(rng))
}

fn weighted_inversion(ctx: &mut Ctx) {
    let rounds = (ctx.config.random_cases / 20).max(5);
    for (r, p) in ctx.pairs() {
        let case = format!("(r,p)=({r},{p}) unit haar, {rounds} weights");
        let Some(xi) = haar_xi(r, p) else { continue };
        let xi = match xi {
            Ok(xi) => xi,
            Err(e) => {
                ctx.broken("construction", case, e);
                continue;
            }
        };
        let mut inv = ctx.tally("ξ(A) = ∫ Ch_A / g dρ on every ball to the atom level", case.clone());
        let mut fw = ctx.tally("∫ f dρ = ∫ f g dξ", case.clone());
        let mut rho_m = ctx.tally("ρ satisfies (M1)-(M4) with structure ∫ g² dμ", case.clone());
        let mut zero = ctx.tally("inversion refuses a weight vanishing on the set", case);
        let g_amb = xi.ambient();
        let balls = match ball_sets(g_amb, xi.atom_level()) {
            Ok(b) => b,
            Err(e) => {
                ctx.broken("setup", inv.case, e);
                continue;
            }
        };
        for round in 0..rounds {
            let level = ctx.rng.gen_range(0..=xi.atom_level());
            let g = match nowhere_zero(ctx.rng, g_amb, level) {
                Ok(g) => g,
                Err(e) => {
                    inv.check(Err(e), String::new);
                    continue;
                }
            };
            let w = match weighted_measure(&xi, &g) {
                Ok(w) => w,
                Err(e) => {
                    inv.check(Err(e), String::new);
                    continue;
                }
            };
            for a in &balls {
                let res = invert_weighted(&w, &g, a).and_then(|v| Ok(v == xi.xi(a)?));
                inv.check(res, || format!("round {round}, {a:?}"));
            }
            let lf = ctx.rng.gen_range(0..=2);
            let f = step(ctx.rng, g_amb, lf);
            fw.check(f.and_then(|f| weighted_integral_identity(&xi, &g, &w, &f)).map(|c| c.holds), || {
                format!("round {round}")
            });
            if round < 2 {
                let rep = verify_m_conditions(&w.rho, xi.atom_level());
                rho_m.check(rep.map(|r| r.passed()), || format!("round {round}"));
            }
            // Put a zero on one atom and ask for the ball above it.
            let atoms = xi.atoms().to_vec();
            let k = ctx.rng.gen_range(0..atoms.len());
            let res = (|| {
                let gz = LocallyConstantFn::from_fn(ClopenSet::whole(g_amb), xi.atom_level(), |b| {
                    if b.index() as usize == k {
                        Rational::zero()
                    } else {
                        Rational::one()
                    }
                })?;
                let wz = weighted_measure(&xi, &gz)?;
                let set = ClopenSet::from_ball(atoms[k].ancestor(0));
                Ok(matches!(invert_weighted(&wz, &gz, &set), Err(Error::DivisionByZero { .. })))
            })();
            zero.check(res, || format!("round {round}, atom {k}"));
        }
        for t in [inv, fw, rho_m, zero] {
            ctx.push(t);
        }
    }
}

fn fubini(ctx: &mut Ctx) {
    // Z_3 × Z_3; the value prime comes from the configuration when it pairs
    // with r = 3.
    let ps: BTreeSet<u64> = ctx.config.primes.iter().filter(|(r, _)| *r == 3).map(|(_, p)| *p).collect();
    let ps = if ps.is_empty() { BTreeSet::from([5]) } else { ps };
    let n = (ctx.config.random_cases / 2).max(50);
    for p in ps {
        let case = format!("Z_3 x Z_3, p={p}, {n} (z, g) pairs");
        let Some(xi) = haar_xi(3, p) else { continue };
        let setup = xi.and_then(|xi| {
            let t = Ambient::new(3, 0)?;
            Ok((xi, Measure::unit_haar(t, p)?, scalar_density(ctx.rng, t, p, 1)?))
        });
        let (xi, haar, dens) = match setup {
            Ok(x) => x,
            Err(e) => {
                ctx.broken("construction", case, e);
                continue;
            }
        };
        let mut t = ctx.tally("∫ z (∫ g dξ) dh = ∫ (∫ z g dh) dξ", case.clone());
        let mut pw = ctx.tally("both sides agree at every ω ∈ Ω", case);
        let g_amb = xi.ambient();
        for i in 0..n {
            let h = if i % 2 == 0 { &haar } else { &dens };
            let (lz, lt, ly) = (ctx.rng.gen_range(0..=1), ctx.rng.gen_range(0..=1), ctx.rng.gen_range(0..=1));
            let res = (|| {
                let z = step(ctx.rng, g_amb, lz)?;
                let g = ProductFn::from_fn(g_amb, lt, g_amb, ly, |_, _| small(ctx.rng))?;
                stochastic_fubini(&z, &g, &xi, h)
            })();
            match res {
                Ok(c) => {
                    t.check(Ok(c.holds), || format!("case {i}"));
                    pw.check(c.lhs.equal_pointwise(&c.rhs), || format!("case {i}"));
                }
                Err(e) => t.check(Err(e), String::new),
            }
        }
        ctx.push(t);
        ctx.push(pw);
    }
}

fn product(ctx: &mut Ctx) {
    for (r, p) in ctx.pairs() {
        let setup = (|| -> Result<Vec<(String, Measure, Measure)>> {
            let g = Ambient::new(r, 0)?;
            let haar = Measure::unit_haar(g, p)?;
            let dens = scalar_density(ctx.rng, g, p, 1)?;
            let atoms = scalar_atomic(ctx.rng, g, p)?;
            Ok(vec![
                ("haar x atomic".into(), haar.clone(), atoms.clone()),
                ("density x haar".into(), dens.clone(), haar),
                ("atomic x density".into(), atoms, dens),
            ])
        })();
        let pairs = match setup {
            Ok(x) => x,
            Err(e) => {
                ctx.broken("construction", format!("(r,p)=({r},{p})"), e);
                continue;
            }
        };
        for (name, mu, nu) in pairs {
            let case = format!("(r,p)=({r},{p}) {name}");
            let g = mu.ambient();
            let mut rect = ctx.tally("Fubini, both orders, on rectangle indicators to level 2", case.clone());
            let mut rand_f = ctx.tally("Fubini, both orders, on random step functions", case.clone());
            let mut nid = ctx.tally("N_{μ×ν}(x,y) = N_μ(x) N_ν(y)", case);
            let balls = g.balls_up_to(2).unwrap_or_default();
            for a in &balls {
                for b in &balls {
                    let res = ProductFn::from_fn(g, a.level(), g, b.level(), |x, y| {
                        let inside = x == a && y == b;
                        MeasureValue::scalar(if inside { Rational::one() } else { Rational::zero() })
                    })
                    .and_then(|f| {
                        let rep = fubini_check(&f, &mu, &nu)?;
                        let direct = ProductMeasure::new(mu.clone(), nu.clone())?
                            .eval_rect(&ClopenSet::from_ball(*a), &ClopenSet::from_ball(*b))?;
                        Ok(rep.holds && rep.inner_right.is_some() && rep.product == direct)
                    });
                    rect.check(res, || format!("{a:?} x {b:?}"));
                }
            }
            for i in 0..20 {
                let (ll, rl) = (ctx.rng.gen_range(0..=2), ctx.rng.gen_range(0..=2));
                let res = ProductFn::from_fn(g, ll, g, rl, |_, _| MeasureValue::scalar(small(ctx.rng)))
                    .and_then(|f| fubini_check(&f, &mu, &nu))
                    .map(|rep| rep.holds);
                rand_f.check(res, || format!("case {i}"));
            }
            let mut points: BTreeSet<Rational> = g.atoms(2).unwrap_or_default().iter().map(Ball::center).collect();
            points.extend(mu.point_masses().keys().cloned());
            points.extend(nu.point_masses().keys().cloned());
            match ProductMeasure::new(mu.clone(), nu.clone()) {
                Ok(pm) => {
                    for x in &points {
                        for y in &points {
                            nid.check(pm.n_identity_holds(x, y), || format!("({x}, {y})"));
                        }
                    }
                }
                Err(e) => nid.check(Err(e), String::new),
            }
            for t in [rect, rand_f, nid] {
                ctx.push(t);
            }
        }
    }
}

fn random_vector(rng: &mut ChaCha8Rng, p: u64) -> Result<FinVector> {
    let len = rng.gen_range(0..=6);
    let mut idx: Vec<u64> = (0..10).collect();
    idx.shuffle(rng);
    FinVector::new(p, idx.into_iter().take(len).map(|i| (i, rational_near(rng, p))))
}

fn random_matrix(rng: &mut ChaCha8Rng, p: u64) -> Result<FinMatrix> {
    let n = rng.gen_range(0..=12);
    let cells: BTreeSet<(u64, u64)> = (0..n).map(|_| (rng.gen_range(0..5), rng.gen_range(0..5))).collect();
    FinMatrix::new(p, cells.into_iter().map(|c| (c, rational_near(rng, p))))
}

fn matrix_value(rng: &mut ChaCha8Rng, p: u64) -> MeasureValue {
    MeasureValue::Matrix((0..2).map(|_| (0..2).map(|_| rational_near(rng, p)).collect()).collect())
}

fn trace(ctx: &mut Ctx) {
    let ps: BTreeSet<u64> = ctx.config.primes.iter().map(|&(_, p)| p).collect();
    let n = ctx.config.random_cases.max(1000);
    for p in ps {
        let case = format!("p={p}, {n} random pairs");
        let mut r1 = ctx.tally("Tr [a,b] = (a,b)", case.clone());
        let mut sym = ctx.tally("(a,b) = Tr [b,a] and W([a,b]) = [b,a]", case.clone());
        let mut bound = ctx.tally("|Tr F|_p <= ‖F‖", case.clone());
        let mut lin = ctx.tally("Tr(aF + bH) = a Tr F + b Tr H", case.clone());
        let mut inv = ctx.tally("W(W(F)) = F", case);
        for i in 0..n {
            let res = (|| {
                let a = random_vector(ctx.rng, p)?;
                let b = random_vector(ctx.rng, p)?;
                let ab = rank_one(&a, &b)?;
                let ba = rank_one(&b, &a)?;
                let pair = pairing(&a, &b)?;
                Ok((ab.trace() == pair, pair == ba.trace() && ab.transpose() == ba))
            })();
            match res {
                Ok((x, y)) => {
                    r1.check(Ok(x), || format!("case {i}"));
                    sym.check(Ok(y), || format!("case {i}"));
                }
                Err(e) => r1.check(Err(e), String::new),
            }
            let res = (|| {
                let f = random_matrix(ctx.rng, p)?;
                let h = random_matrix(ctx.rng, p)?;
                let (s, t) = (rational_near(ctx.rng, p), rational_near(ctx.rng, p));
                let tr_norm = padic_valuation(&f.trace(), p)?;
                let combo = f.scale(&s).add(&h.scale(&t))?;
                Ok((
                    tr_norm <= f.op_norm(),
                    combo.trace() == &s * &f.trace() + &t * &h.trace(),
                    f.transpose().transpose() == f,
                ))
            })();
            match res {
                Ok((x, y, z)) => {
                    bound.check(Ok(x), || format!("case {i}"));
                    lin.check(Ok(y), || format!("case {i}"));
                    inv.check(Ok(z), || format!("case {i}"));
                }
                Err(e) => bound.check(Err(e), String::new),
            }
        }
        for t in [r1, sym, bound, lin, inv] {
            ctx.push(t);
        }
    }

    let max_level = ctx.config.max_level;
    for (r, p) in ctx.pairs() {
        let case = format!("(r,p)=({r},{p}) 2x2 density + atoms, balls to level {max_level}");
        let setup = (|| {
            let g = Ambient::new(r, 0)?;
            let f = LocallyConstantFn::from_fn(ClopenSet::whole(g), 2, |_| matrix_value(ctx.rng, p))?;
            let atoms = [q(1, 1), q(1 + pow(r, 4), 1)].into_iter().map(|x| (x, matrix_value(ctx.rng, p)));
            let mu = Measure::sum(vec![Measure::density(p, f)?, Measure::atomic(g, p, Shape::Matrix(2), atoms)?])?;
            let tm = trace_measure(&mu)?;
            Ok((mu, tm, g.balls_up_to(max_level)?))
        })();
        let (mu, tm, balls) = match setup {
            Ok(x) => x,
            Err(e) => {
                ctx.broken("construction", case, e);
                continue;
            }
        };
        let mut add = ctx.tally("Tr μ(A ⊔ B) = Tr μ(A) + Tr μ(B) on disjoint balls", case.clone());
        let mut pt = ctx.tally("(Tr μ)(A) = Tr(μ(A))", case.clone());
        let mut tb = ctx.tally("|Tr μ(A)|_p <= u(μ(A))", case);
        let vals: Vec<Result<Rational>> =
            balls.iter().map(|b| Ok(tm.eval_ball(b)?.as_scalar().cloned().expect("scalar"))).collect();
        for (b, v) in balls.iter().zip(&vals) {
            pt.check(mu.eval_ball(b).and_then(|m| Ok(v.clone()? == m.trace()?)), || format!("{b:?}"));
        }
        for (i, a) in balls.iter().enumerate() {
            for (j, b) in balls.iter().enumerate().skip(i + 1) {
                if a.intersects(b) {
                    continue;
                }
                let res = (|| {
                    let u = ClopenSet::from_ball(*a).union(&ClopenSet::from_ball(*b))?;
                    let lhs = tm.eval(&u)?;
                    let rhs = vals[i].clone()? + vals[j].clone()?;
                    Ok(lhs.as_scalar() == Some(&rhs))
                })();
                add.check(res, || format!("{a:?}, {b:?}"));
            }
        }
        tb.check(trace_bound_violations(&mu, max_level).map(|v| v.is_empty()), || "violations".into());
        for t in [add, pt, tb] {
            ctx.push(t);
        }
    }
}

fn grid(r: u64, k: u32) -> Vec<Rational> {
    let d = pow(r, k);
    (0..d).map(|a| q(a, d)).collect()
}

fn characters(ctx: &mut Ctx) {
    let mut rs: Vec<(u64, u64)> = ctx.pairs();
    rs.sort_by_key(|&(r, _)| r);
    rs.dedup_by_key(|&mut (r, _)| r);
    for (r, p) in rs {
        let case = format!("r={r}");
        let mut hom = ctx.tally("χ(x+y) = χ(x)χ(y) on a/r^3", case.clone());
        let mut bil = ctx.tally("χ_{s+t}(x) = χ_s(x)χ_t(x) and χ_s(x) = χ_x(s) on a/r^2", case.clone());
        let mut ints = ctx.tally("χ = 1 on Z_r", case.clone());
        let xs = grid(r, 3);
        let one = Rational::one();
        let chars: Vec<Result<Cyclotomic>> = xs.iter().map(|x| character_eval(&one, x, r)).collect();
        for (i, x) in xs.iter().enumerate() {
            for (j, y) in xs.iter().enumerate() {
                let res = (|| Ok(character_eval(&one, &(x + y), r)? == &chars[i].clone()? * &chars[j].clone()?))();
                hom.check(res, || format!("x={x}, y={y}"));
            }
        }
        let small_grid: Vec<Rational> = grid(r, 2).into_iter().chain([q(-1, pow(r, 2)), q(7, 1)]).collect();
        for s in &small_grid {
            for t in &small_grid {
                for x in &small_grid {
                    let res = (|| {
                        let lhs = character_eval(&(s + t), x, r)?;
                        let rhs = &character_eval(s, x, r)? * &character_eval(t, x, r)?;
                        Ok(lhs == rhs && character_eval(s, x, r)? == character_eval(x, s, r)?)
                    })();
                    bil.check(res, || format!("s={s}, t={t}, x={x}"));
                }
            }
        }
        for n in -5..=5 {
            ints.check(character_eval(&one, &q(n, 1), r).map(|c| c == Cyclotomic::one(r)), || format!("x={n}"));
        }
        for t in [hom, bil, ints] {
            ctx.push(t);
        }

        let case = format!("(r,p)=({r},{p}) unit haar on Z_r");
        let mut haar_t = ctx.tally("Haar functional is 1 for ord(s) >= 0, 0 for ord(s) = -1", case);
        match Ambient::new(r, 0).and_then(|g| Measure::unit_haar(g, p)) {
            Ok(haar) => {
                let mut inputs: Vec<(Rational, bool)> = vec![(Rational::zero(), true)];
                for k in 0..3 {
                    for a in 1..pow(r, 1) * 2 {
                        let s = q(a, 1) * Rational::from(r as i64).pow(k).expect("r > 0");
                        inputs.push((s, true));
                    }
                }
                for a in 1..pow(r, 2) {
                    if a % r as i64 != 0 {
                        inputs.push((q(a, r as i64), false));
                        inputs.push((q(-a, r as i64), false));
                    }
                }
                for (s, integral) in inputs {
                    let want = if integral { Cyclotomic::one(r) } else { Cyclotomic::zero(r) };
                    haar_t.check(char_functional(&haar, &s).map(|v| v == want), || format!("s={s}"));
                }
            }
            Err(e) => haar_t.check(Err(e), String::new),
        }
        ctx.push(haar_t);

        let n = 50;
        let case = format!("(r,p)=({r},{p}) {n} random density pairs");
        let mut conv = ctx.tally("(μ*ν)^ = μ^ ν^", case);
        let freqs: Vec<Rational> = (0..=3).flat_map(|k| grid(r, k)).collect::<BTreeSet<_>>().into_iter().collect();
        for i in 0..n {
            let res = (|| {
                let g = Ambient::new(r, 0)?;
                let (lm, ln) = (ctx.rng.gen_range(0..=2), ctx.rng.gen_range(0..=2));
                let mu = scalar_density(ctx.rng, g, p, lm)?;
                let nu = scalar_density(ctx.rng, g, p, ln)?;
                let m = convolve(&mu, &nu)?;
                let picks: Vec<&Rational> = freqs.choose_multiple(ctx.rng, 12).collect();
                for s in picks {
                    let lhs = char_functional(&m, s)?;
                    let rhs = &char_functional(&mu, s)? * &char_functional(&nu, s)?;
                    if lhs != rhs {
                        return Ok(false);
                    }
                }
                Ok(true)
            })();
            conv.check(res, || format!("case {i}"));
        }
        ctx.push(conv);
    }
}

const SQUARES: [(i64, i64); 6] = [(1, 1), (1, 4), (4, 1), (9, 4), (1, 9), (16, 9)];

fn spectral(ctx: &mut Ctx) {
    for (r, p) in ctx.pairs() {
        let ri = r as i64;
        // The pool of frequencies; the random draw picks six of them.
        let mut pool: BTreeSet<Rational> =
            [q(0, 1), q(1, 1), q(2, 1), q(-1, 1), q(1, ri), q(2, ri), q(1, ri * ri), q(ri, 1)].into_iter().collect();
        pool.insert(q(-1, ri));
        let mut pool: Vec<Rational> = pool.into_iter().collect();
        pool.shuffle(ctx.rng);
        pool.truncate(6);
        pool.sort();
        let subsets: Vec<Vec<Rational>> = (1u32..1 << pool.len())
            .filter(|m| m.count_ones() <= 4)
            .map(|m| pool.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, y)| y.clone()).collect())
            .collect();
        let case = format!("(r,p)=({r},{p}) all {} specs over pool {:?}", subsets.len(), pool);
        let mut masses = ctx.tally("recovered masses equal the spectral masses", case.clone());
        let mut cov = ctx.tally("B(t,q) = μ^(t+q) on the time grid", case.clone());
        let mut comp = ctx.tally("recovered ξ equals the synthesizing ξ on each frequency", case.clone());
        let mut mc = ctx.tally("recovered ξ satisfies (M1)-(M4)", case.clone());
        let mut spur = ctx.tally("a spurious candidate is recovered with mass 0", case);
        for (i, freqs) in subsets.iter().enumerate() {
            let ms: Vec<Rational> = freqs
                .iter()
                .map(|_| {
                    let (a, b) = *SQUARES.choose(ctx.rng).expect("nonempty");
                    q(a, b)
                })
                .collect();
            let spec = match SpectralSpec::new(r, p, freqs.clone(), ms) {
                Ok(s) => s,
                Err(e) => {
                    masses.check(Err(e), String::new);
                    continue;
                }
            };
            match spectral_demo(&spec, &Times::Auto) {
                Ok(d) => {
                    let label = || format!("spec {i}: {freqs:?}");
                    masses.check(Ok(d.masses_match), label);
                    cov.check(Ok(d.covariance_matches_functional), label);
                    comp.check(Ok(d.components_match), label);
                    mc.check(Ok(d.m_conditions.passed()), label);
                }
                Err(e @ Error::UnsupportedPrime(_)) => {
                    masses.check(Err(e), String::new);
                    break;
                }
                Err(e) => masses.check(Err(e), String::new),
            }
            // One frequency left out of the spectrum but offered to recovery.
            if freqs.len() < pool.len() && i % 3 == 0 {
                let extra = pool.iter().find(|y| !freqs.contains(y)).expect("pool is larger").clone();
                let res = (|| {
                    let proc = synthesize(&spec)?;
                    let mut cands = freqs.clone();
                    cands.push(extra.clone());
                    let rec = spectral_recover(|t, s| proc.covariance(t, s), r, &cands, &Times::Auto)?;
                    let got = rec.rational_masses();
                    let mut want = spec.masses().to_vec();
                    want.push(Rational::zero());
                    Ok(got.as_deref() == Some(&want[..]))
                })();
                spur.check(res, || format!("spec {i} with extra {extra}"));
            }
        }
        for t in [masses, cov, comp, mc, spur] {
            ctx.push(t);
        }
    }
}
