//! A deterministic run of every identity the library promises, for a set of
//! `(r, p)` prime pairs, plus checks of user-supplied fixtures.

mod suites;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::operators::{pairing, rank_one, FinMatrix, FinVector};
use crate::padic::require_prime;
use crate::stochastic::{verify_m_conditions, OrthStochMeasure};

pub use suites::Suite;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SelfTestConfig {
    /// `(r, p)`: the prime of the space and the prime of the value norm.
    pub primes: Vec<(u64, u64)>,
    pub max_level: i64,
    pub random_cases: usize,
    pub seed: u64,
}

impl Default for SelfTestConfig {
    fn default() -> Self {
        SelfTestConfig { primes: vec![(3, 5), (5, 3), (2, 5)], max_level: 3, random_cases: 200, seed: 0 }
    }
}

impl SelfTestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.primes.is_empty() {
            return invalid("no prime pairs");
        }
        for &(r, p) in &self.primes {
            require_prime(r)?;
            require_prime(p)?;
            if r == p {
                return invalid(format!("pair ({r}, {p}) is not coprime"));
            }
        }
        if !(0..=4).contains(&self.max_level) {
            return invalid("maxLevel must lie in 0..=4");
        }
        Ok(())
    }
}

/// One identity checked over a family of cases.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Entry {
    pub identity: String,
    pub case: String,
    pub checked: usize,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub entries: Vec<Entry>,
}

impl SuiteReport {
    fn new(suite: &str, mut entries: Vec<Entry>) -> Self {
        entries.sort_by(|a, b| (&a.identity, &a.case).cmp(&(&b.identity, &b.case)));
        SuiteReport { suite: suite.into(), passed: entries.iter().all(|e| e.passed), entries }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub config: SelfTestConfig,
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
}

/// Runs one suite. Each suite draws from its own generator derived from the
/// seed, so results do not depend on which other suites run.
pub fn run_suite(suite: Suite, config: &SelfTestConfig) -> Result<SuiteReport> {
    config.validate()?;
    Ok(SuiteReport::new(suite.name(), suites::run(suite, config)))
}

pub fn run(config: &SelfTestConfig) -> Result<Report> {
    let mut suites = Suite::ALL.iter().map(|s| run_suite(*s, config)).collect::<Result<Vec<_>>>()?;
    suites.sort_by(|a, b| a.suite.cmp(&b.suite));
    Ok(Report { config: config.clone(), passed: suites.iter().all(|s| s.passed), suites })
}

/// A stored object together with the suite that should accept it.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Fixture {
    /// An orthogonal stochastic measure to be checked against (M1)–(M4).
    Xi {
        xi: OrthStochMeasure,
        #[serde(rename = "maxLevel")]
        max_level: i64,
    },
    /// A matrix claimed to equal `[a, b]`.
    RankOne { a: FinVector, b: FinVector, matrix: FinMatrix },
}

pub fn run_fixture(fixture: &Fixture) -> Result<SuiteReport> {
    match fixture {
        Fixture::Xi { xi, max_level } => {
            let rep = verify_m_conditions(xi, *max_level)?;
            let entries = rep
                .conditions
                .into_iter()
                .map(|c| Entry {
                    passed: c.passed(),
                    detail: c.failures.first().cloned(),
                    identity: c.name,
                    case: format!("fixture, balls up to level {max_level}"),
                    checked: c.checked,
                })
                .collect();
            Ok(SuiteReport::new("m-conditions", entries))
        }
        Fixture::RankOne { a, b, matrix } => {
            let expect = rank_one(a, b)?;
            let swapped = rank_one(b, a)?;
            let mk = |identity: &str, ok: bool, detail: String| Entry {
                identity: identity.into(),
                case: "fixture".into(),
                checked: 1,
                passed: ok,
                detail: (!ok).then_some(detail),
            };
            let entries = vec![
                mk(
                    "rank-one entries [a,b]_lj = a_l b_j",
                    *matrix == expect,
                    format!("expected {:?}", expect.entries()),
                ),
                mk("transpose W([a,b]) = [b,a]", matrix.transpose() == swapped, "transpose differs from [b,a]".into()),
                mk(
                    "trace of rank-one equals pairing",
                    matrix.trace() == pairing(a, b)?,
                    format!("trace {} vs pairing {}", matrix.trace(), pairing(a, b)?),
                ),
            ];
            Ok(SuiteReport::new("trace", entries))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SelfTestConfig {
        SelfTestConfig { primes: vec![(3, 5)], max_level: 1, random_cases: 10, seed: 7 }
    }

    #[test]
    fn config_validation() {
        assert!(SelfTestConfig::default().validate().is_ok());
        let bad = |primes| SelfTestConfig { primes, ..SelfTestConfig::default() }.validate().is_err();
        assert!(bad(vec![]));
        assert!(bad(vec![(3, 3)]));
        assert!(bad(vec![(4, 5)]));
        assert!(SelfTestConfig { max_level: 9, ..small() }.validate().is_err());
        let c: SelfTestConfig =
            serde_json::from_str(r#"{"primes":[[3,5]],"maxLevel":1,"randomCases":10,"seed":7}"#).unwrap();
        assert_eq!(c, small());
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn small_run_is_green_and_deterministic() {
        for s in [Suite::Ultrametric, Suite::MConditions, Suite::Trace, Suite::WeightedInversion] {
            let a = run_suite(s, &small()).unwrap();
            assert!(a.passed, "{a:?}");
            assert_eq!(a, run_suite(s, &small()).unwrap());
        }
    }

    #[test]
    fn fixtures_flag_corruption() {
        let g = crate::clopen::Ambient::new(3, 0).unwrap();
        let mu = crate::measures::Measure::unit_haar(g, 5).unwrap();
        let xi = OrthStochMeasure::build(&mu, 2).unwrap();
        assert!(run_fixture(&Fixture::Xi { xi: xi.clone(), max_level: 2 }).unwrap().passed);
        let mut c = xi.coefficients().to_vec();
        c[4] = &c[4] + &crate::Rational::one();
        let bad = OrthStochMeasure::from_parts(mu, 2, c).unwrap();
        let rep = run_fixture(&Fixture::Xi { xi: bad, max_level: 2 }).unwrap();
        assert!(!rep.passed);
        assert!(rep.entries.iter().any(|e| e.identity == "M3 covariance" && !e.passed));

        let a = FinVector::dense(5, &[crate::Rational::from(1), crate::Rational::from(2)]).unwrap();
        let b = FinVector::dense(5, &[crate::Rational::from(0), crate::Rational::from(3)]).unwrap();
        let m = rank_one(&a, &b).unwrap();
        assert!(run_fixture(&Fixture::RankOne { a: a.clone(), b: b.clone(), matrix: m.clone() }).unwrap().passed);
        let rep = run_fixture(&Fixture::RankOne { a, b, matrix: m.transpose() }).unwrap();
        assert!(!rep.passed);
    }
}
