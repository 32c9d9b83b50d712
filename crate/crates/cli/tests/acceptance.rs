//! Runs every acceptance criterion once, in order, against its time budget.
//! Prints one `PASS`/`FAIL` line per criterion and exits non-zero if any failed.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use pam_core::selftest::{run_suite, SelfTestConfig, Suite};

struct Verdict {
    ok: bool,
    note: String,
}

fn suite(s: Suite) -> impl FnOnce() -> Verdict {
    move || match run_suite(s, &SelfTestConfig::default()) {
        Ok(rep) => {
            let checked: usize = rep.entries.iter().map(|e| e.checked).sum();
            let failed: Vec<_> = rep.entries.iter().filter(|e| !e.passed).collect();
            let note = match failed.first() {
                None => format!("{} identities, {checked} checks", rep.entries.len()),
                Some(e) => format!(
                    "{} failing, first: {} [{}] {}",
                    failed.len(),
                    e.identity,
                    e.case,
                    e.detail.as_deref().unwrap_or("")
                ),
            };
            Verdict { ok: rep.passed, note }
        }
        Err(e) => Verdict { ok: false, note: format!("error: {e}") },
    }
}

fn pam_fixture(name: &str) -> Result<i32, String> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name);
    let out = Command::new(env!("CARGO_BIN_EXE_pam"))
        .args(["selftest", "--fixture"])
        .arg(&path)
        .output()
        .map_err(|e| e.to_string())?;
    out.status.code().ok_or_else(|| "terminated by signal".to_string())
}

fn mutations() -> Verdict {
    let expect = [
        ("corrupt_xi_perturbed_c.json", 2),
        ("corrupt_xi_perturbed_measure_atom.json", 2),
        ("corrupt_rank_one_transposed.json", 2),
        ("fixture_xi_valid.json", 0),
        ("fixture_rank_one_valid.json", 0),
    ];
    let mut bad = Vec::new();
    for (name, want) in expect {
        match pam_fixture(name) {
            Ok(code) if code == want => {}
            Ok(code) => bad.push(format!("{name}: exit {code}, wanted {want}")),
            Err(e) => bad.push(format!("{name}: {e}")),
        }
    }
    Verdict {
        ok: bad.is_empty(),
        note: if bad.is_empty() { "3 corruptions caught, 2 controls clean".into() } else { bad.join("; ") },
    }
}

fn main() -> ExitCode {
    type Check = Box<dyn FnOnce() -> Verdict>;
    let criteria: Vec<(&str, u64, Check)> = vec![
        ("ultrametric axioms", 1, Box::new(suite(Suite::Ultrametric))),
        ("N_mu characterization on balls", 5, Box::new(suite(Suite::NCharacterization))),
        ("M-conditions for constructed xi", 10, Box::new(suite(Suite::MConditions))),
        ("isometry of the stochastic integral", 30, Box::new(suite(Suite::Isometry))),
        ("weighted inversion roundtrip", 10, Box::new(suite(Suite::WeightedInversion))),
        ("stochastic Fubini", 30, Box::new(suite(Suite::StochasticFubini))),
        ("product measure Fubini and N-identity", 10, Box::new(suite(Suite::Product))),
        ("trace suite", 5, Box::new(suite(Suite::Trace))),
        ("characters and characteristic functionals", 20, Box::new(suite(Suite::Characters))),
        ("spectral roundtrip", 60, Box::new(suite(Suite::Spectral))),
        ("mutation sensitivity", 10, Box::new(mutations)),
    ];
    let mut all = true;
    for (i, (name, limit, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let v = check();
        let took = start.elapsed();
        let in_time = took < Duration::from_secs(limit);
        let ok = v.ok && in_time;
        all &= ok;
        let timing = if in_time { String::new() } else { format!(" (over the {limit} s limit)") };
        println!(
            "{} {:>2} {name}: {:.2}s / {limit}s{timing}; {}",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            took.as_secs_f64(),
            v.note
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
