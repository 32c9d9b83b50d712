//! Additive characters of `Q_r` with exact cyclotomic values, characteristic
//! functionals, and stationary processes `η(t) = ∫ χ(t·y) ξ(dy)` over finite
//! atomic spectral measures, with recovery of the spectral data from the
//! covariance.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::clopen::{Ambient, ClopenSet};
use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::measures::{Measure, MeasureValue, Shape};
use crate::padic::{
    checked_pow, denominator_power, frac_part, require_prime, root_of_unity, valuation, Cyclotomic, Rational,
};
use crate::stochastic::{verify_m_conditions_with, MReport, OrthStochMeasure, RandomVariable};

/// `χ_s(x) = ζ^{[s·x]}`: the root of unity attached to the fractional part
/// of `s·x` in `Z[1/r]/Z`.
pub fn character_eval(s: &Rational, x: &Rational, r: u64) -> Result<Cyclotomic> {
    Ok(root_of_unity(&frac_part(&(s * x), r)?))
}

/// `μ̂(s) = ∫ χ_s(z) μ(dz)` for a scalar measure.
///
/// `χ_s` is constant on balls of radius `|s|_r^(-1)`, so the integral is a
/// finite sum over the balls of that level (or of the top level, if coarser).
pub fn char_functional(mu: &Measure, s: &Rational) -> Result<Cyclotomic> {
    if mu.shape() != Shape::Scalar {
        return Err(Error::ShapeMismatch("characteristic functionals need a scalar measure".into()));
    }
    let g = mu.ambient();
    denominator_power(s, g.r())?;
    let level = valuation(s, g.r()).map_or(g.top_level(), |v| (-v).max(g.top_level()));
    // Group the masses by root of unity before touching the field.
    let mut classes = Vec::new();
    for b in g.atoms(level)? {
        let m = mu.eval_ball(&b)?.as_scalar().expect("scalar").clone();
        if !m.is_zero() {
            classes.push((frac_part(&(s * &b.center()), g.r())?, m));
        }
    }
    let order = classes.iter().map(|(c, _)| c.order_exponent()).max().unwrap_or(0);
    let scale = Rational::from(checked_pow(g.r(), order)? as i64);
    let terms: Vec<(u64, Rational)> = classes
        .into_iter()
        .map(|(c, m)| {
            let k = c.value() * &scale;
            (u64::try_from(k.numer()).expect("integral exponent below r^order"), m)
        })
        .collect();
    Cyclotomic::from_terms(g.r(), order, &terms)
}

/// A finite spectral measure `Σ m_k δ_{y_k}` with square masses.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpectralSpec {
    r: u64,
    p: u64,
    frequencies: Vec<Rational>,
    masses: Vec<Rational>,
}

impl SpectralSpec {
    pub fn new(r: u64, p: u64, frequencies: Vec<Rational>, masses: Vec<Rational>) -> Result<Self> {
        require_prime(r)?;
        require_prime(p)?;
        if r == p {
            return invalid("time and value primes must differ");
        }
        if frequencies.is_empty() || frequencies.len() != masses.len() {
            return invalid("one mass per frequency, at least one frequency");
        }
        for (i, y) in frequencies.iter().enumerate() {
            denominator_power(y, r)?;
            if frequencies[..i].contains(y) {
                return invalid(format!("frequency {y} repeats"));
            }
        }
        for m in &masses {
            if m.is_zero() || m.sqrt().is_none() {
                return Err(Error::NonSquareAtom { atom: format!("mass {m}") });
            }
        }
        Ok(SpectralSpec { r, p, frequencies, masses })
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn frequencies(&self) -> &[Rational] {
        &self.frequencies
    }

    pub fn masses(&self) -> &[Rational] {
        &self.masses
    }

    /// The smallest ball `r^(-m0)·Z_r` holding every frequency.
    pub fn ambient(&self) -> Result<Ambient> {
        ambient_for(self.r, &self.frequencies)
    }

    /// `μ_spec = Σ m_k δ_{y_k}`.
    pub fn measure(&self) -> Result<Measure> {
        let pts = self.frequencies.iter().cloned().zip(self.masses.iter().cloned().map(MeasureValue::scalar));
        Measure::atomic(self.ambient()?, self.p, Shape::Scalar, pts)
    }
}

impl<'de> Deserialize<'de> for SpectralSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            r: u64,
            p: u64,
            frequencies: Vec<Rational>,
            masses: Vec<Rational>,
        }
        let w = Wire::deserialize(d)?;
        SpectralSpec::new(w.r, w.p, w.frequencies, w.masses).map_err(serde::de::Error::custom)
    }
}

fn ambient_for(r: u64, points: &[Rational]) -> Result<Ambient> {
    let mut m0 = 0;
    for y in points {
        m0 = m0.max(denominator_power(y, r)?);
    }
    Ambient::new(r, m0)
}

/// The least level at which the points lie in pairwise distinct balls.
fn separating_level(r: u64, points: &[Rational], top: i64) -> i64 {
    let mut level = top;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            let v = valuation(&(a - b), r).expect("distinct points");
            level = level.max(v + 1);
        }
    }
    level
}

/// `η(t) = Σ_k χ(t·y_k)·ξ({y_k})` for an orthogonal `ξ` with structure
/// measure `μ_spec`.
#[derive(Clone, Debug, PartialEq)]
pub struct StationaryProcess {
    spec: SpectralSpec,
    xi: OrthStochMeasure,
    /// `ξ` restricted to the atom carrying each frequency.
    components: Vec<RandomVariable>,
}

pub fn synthesize(spec: &SpectralSpec) -> Result<StationaryProcess> {
    let mu = spec.measure()?;
    let g = mu.ambient();
    let level = separating_level(spec.r, &spec.frequencies, g.top_level());
    let xi = OrthStochMeasure::build(&mu, level)?;
    let components =
        spec.frequencies.iter().map(|y| xi.xi(&ClopenSet::from_ball(g.ball_of(y, level)?))).collect::<Result<_>>()?;
    Ok(StationaryProcess { spec: spec.clone(), xi, components })
}

impl StationaryProcess {
    pub fn spec(&self) -> &SpectralSpec {
        &self.spec
    }

    pub fn xi(&self) -> &OrthStochMeasure {
        &self.xi
    }

    /// `ξ({y_k})`.
    pub fn components(&self) -> &[RandomVariable] {
        &self.components
    }

    pub fn sample(&self, t: &Rational) -> Result<RandomVariable> {
        let mut acc = RandomVariable::zero(self.xi.space().clone(), self.spec.r);
        for (y, c) in self.spec.frequencies.iter().zip(&self.components) {
            acc = &acc + &c.scale(&character_eval(t, y, self.spec.r)?);
        }
        Ok(acc)
    }

    /// `B(t, q) = M(η(t)·η(q))`.
    pub fn covariance(&self, t: &Rational, q: &Rational) -> Result<Cyclotomic> {
        Ok((&self.sample(t)? * &self.sample(q)?).expectation())
    }
}

/// How to pick the sampling times for recovery.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Times {
    /// `t_i = i / r^M`, `i < n`, with `M` separating the candidates; the
    /// character matrix is then a Vandermonde matrix in distinct roots of unity.
    Auto,
    Explicit(Vec<Rational>),
}

/// `t_i = i·r^(-M)` where `M` exceeds every `v_r(y_j − y_k)`.
pub fn auto_times(r: u64, candidates: &[Rational]) -> Vec<Rational> {
    let m = separating_level(r, candidates, 0);
    let step = Rational::from(r as i64).pow(-(m as i32)).expect("r > 0");
    (0..candidates.len()).map(|i| Rational::from(i as i64) * &step).collect()
}

/// Spectral data read back from the covariance of a process.
#[derive(Clone, Debug, PartialEq)]
pub struct Recovery {
    r: u64,
    candidates: Vec<Rational>,
    times: Vec<Rational>,
    /// `X_ik = χ(t_i·y_k)`.
    chars: Vec<Vec<Cyclotomic>>,
    masses: Vec<Cyclotomic>,
}

/// Solves `Σ_k χ(t_i·y_k)·m_k = B(t_i, 0)` for the candidate masses.
pub fn spectral_recover(
    covariance: impl Fn(&Rational, &Rational) -> Result<Cyclotomic>,
    r: u64,
    candidates: &[Rational],
    times: &Times,
) -> Result<Recovery> {
    require_prime(r)?;
    if candidates.is_empty() {
        return invalid("no candidate frequencies");
    }
    for (i, y) in candidates.iter().enumerate() {
        denominator_power(y, r)?;
        if candidates[..i].contains(y) {
            return invalid(format!("candidate {y} repeats"));
        }
    }
    let times = match times {
        Times::Auto => auto_times(r, candidates),
        Times::Explicit(t) if t.len() == candidates.len() => t.clone(),
        Times::Explicit(t) => {
            return invalid(format!("{} times for {} candidates", t.len(), candidates.len()));
        }
    };
    let chars = times
        .iter()
        .map(|t| candidates.iter().map(|y| character_eval(t, y, r)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let zero = Rational::zero();
    let b = times.iter().map(|t| covariance(t, &zero)).collect::<Result<Vec<_>>>()?;
    let masses = linalg::solve(&chars, &b).map_err(|_| Error::TimesDegenerate)?;
    Ok(Recovery { r, candidates: candidates.to_vec(), times, chars, masses })
}

impl Recovery {
    pub fn candidates(&self) -> &[Rational] {
        &self.candidates
    }

    pub fn times(&self) -> &[Rational] {
        &self.times
    }

    pub fn masses(&self) -> &[Cyclotomic] {
        &self.masses
    }

    /// The masses as rationals, when they all are.
    pub fn rational_masses(&self) -> Option<Vec<Rational>> {
        self.masses.iter().map(|m| m.as_rational().cloned()).collect()
    }

    pub fn ambient(&self) -> Result<Ambient> {
        ambient_for(self.r, &self.candidates)
    }

    /// The least level at which balls separate the candidates.
    pub fn level(&self) -> Result<i64> {
        Ok(separating_level(self.r, &self.candidates, self.ambient()?.top_level()))
    }

    /// `μ(A) = Σ_{y_k ∈ A} m_k`.
    pub fn measure_of(&self, set: &ClopenSet) -> Result<Cyclotomic> {
        let mut acc = Cyclotomic::zero(self.r);
        for (y, m) in self.candidates.iter().zip(&self.masses) {
            if set.contains_point(y)? {
                acc = &acc + m;
            }
        }
        Ok(acc)
    }

    /// `ξ(A) = Σ_i α_i η(t_i)` where `Σ_i α_i χ(t_i·y_k) = Ch_A(y_k)`: the
    /// indicator of `A` on the candidates, written through the process.
    pub fn xi(&self, proc: &StationaryProcess, set: &ClopenSet) -> Result<RandomVariable> {
        let e: Vec<Cyclotomic> = self
            .candidates
            .iter()
            .map(|y| Ok(if set.contains_point(y)? { Cyclotomic::one(self.r) } else { Cyclotomic::zero(self.r) }))
            .collect::<Result<_>>()?;
        let alpha = linalg::solve(&linalg::transpose(&self.chars), &e).map_err(|_| Error::TimesDegenerate)?;
        let mut acc = RandomVariable::zero(proc.xi.space().clone(), self.r);
        for (a, t) in alpha.iter().zip(&self.times) {
            if !a.is_zero() {
                acc = &acc + &proc.sample(t)?.scale(a);
            }
        }
        Ok(acc)
    }

    /// (M1)–(M4) for the recovered `ξ` against the recovered masses, over the
    /// balls containing a candidate down to the separating level. Balls
    /// missing every candidate carry nothing on either side.
    pub fn verify(&self, proc: &StationaryProcess) -> Result<MReport> {
        let g = self.ambient()?;
        let mut balls = BTreeSet::new();
        for y in &self.candidates {
            for level in g.top_level()..=self.level()? {
                balls.insert(g.ball_of(y, level)?);
            }
        }
        let sets: Vec<ClopenSet> = balls.into_iter().map(ClopenSet::from_ball).collect();
        verify_m_conditions_with(&sets, &ClopenSet::empty(g), |a| self.xi(proc, a), |a| self.measure_of(a))
    }
}

/// Everything `pam spectral demo` reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SpectralDemo {
    pub frequencies: Vec<Rational>,
    pub times: Vec<Rational>,
    pub masses: Vec<Cyclotomic>,
    pub masses_match: bool,
    pub covariance: Vec<CovarianceEntry>,
    pub covariance_matches_functional: bool,
    pub components_match: bool,
    pub m_conditions: MReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CovarianceEntry {
    pub t: Rational,
    pub q: Rational,
    pub value: Cyclotomic,
}

impl SpectralDemo {
    pub fn passed(&self) -> bool {
        self.masses_match && self.covariance_matches_functional && self.components_match && self.m_conditions.passed()
    }
}

/// Synthesize, tabulate the covariance on the time grid, recover the spectral
/// data with the true frequencies as candidates, and check the result.
pub fn spectral_demo(spec: &SpectralSpec, times: &Times) -> Result<SpectralDemo> {
    let proc = synthesize(spec)?;
    let rec = spectral_recover(|t, q| proc.covariance(t, q), spec.r, &spec.frequencies, times)?;
    let mu = spec.measure()?;
    let mut covariance = Vec::new();
    let mut matches = true;
    for t in rec.times() {
        for q in rec.times() {
            let value = proc.covariance(t, q)?;
            matches &= value == char_functional(&mu, &(t + q))?;
            covariance.push(CovarianceEntry { t: t.clone(), q: q.clone(), value });
        }
    }
    let masses_match = rec.rational_masses().as_deref() == Some(spec.masses());
    let g = rec.ambient()?;
    let level = rec.level()?;
    let mut components_match = true;
    for (y, c) in spec.frequencies.iter().zip(proc.components()) {
        components_match &= rec.xi(&proc, &ClopenSet::from_ball(g.ball_of(y, level)?))? == *c;
    }
    Ok(SpectralDemo {
        frequencies: spec.frequencies.clone(),
        times: rec.times().to_vec(),
        masses: rec.masses().to_vec(),
        masses_match,
        covariance,
        covariance_matches_functional: matches,
        components_match,
        m_conditions: rec.verify(&proc)?,
    })
}
