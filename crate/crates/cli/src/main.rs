use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use pam_core::clopen::{ClopenSet, LocallyConstantFn, ProductFn};
use pam_core::measures::{convolve, fubini_check, integrate, lq_norm, Measure, MeasureValue, ProductMeasure};
use pam_core::operators::{trace_measure, FinMatrix};
use pam_core::padic::padic_valuation;
use pam_core::selftest::{self, Fixture, SelfTestConfig, Suite};
use pam_core::spectral::{char_functional, spectral_demo, SpectralSpec, Times};
use pam_core::stochastic::{verify_m_conditions, OrthStochMeasure};
use pam_core::{Error, Rational};

/// Exact p-adic measure and integration toolkit.
#[derive(Parser)]
#[command(name = "pam", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// |x|_p of a rational.
    Norm {
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long)]
        p: u64,
        #[command(flatten)]
        out: Out,
    },
    /// Measure operations.
    Measure {
        #[command(subcommand)]
        command: MeasureCommand,
    },
    /// μ(A) and ‖A‖_μ (same as `measure eval`).
    #[command(name = "measure-eval")]
    MeasureEval(EvalArgs),
    /// N_μ(x).
    Nmu {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[command(flatten)]
        out: Out,
    },
    /// ∫ f dμ.
    Integrate {
        #[arg(long = "fn")]
        function: PathBuf,
        #[arg(long)]
        measure: PathBuf,
        #[command(flatten)]
        out: Out,
    },
    /// The L^q seminorm of f.
    Lq {
        #[arg(long = "fn")]
        function: PathBuf,
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        q: u32,
        #[command(flatten)]
        out: Out,
    },
    /// Fubini and the product norm identity for μ × ν.
    #[command(name = "product-check")]
    ProductCheck {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        /// A step function on the product, checked against Fubini.
        #[arg(long = "fn")]
        function: Option<PathBuf>,
        /// A point (x, y) at which to compare N_{μ×ν} with N_μ·N_ν.
        #[arg(long, allow_hyphen_values = true, requires = "y")]
        x: Option<String>,
        #[arg(long, allow_hyphen_values = true, requires = "x")]
        y: Option<String>,
        #[command(flatten)]
        out: Out,
    },
    /// μ * ν.
    Convolve {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[command(flatten)]
        out: Out,
    },
    /// Trace and operator norm of a finite matrix.
    Trace {
        #[arg(long)]
        matrix: PathBuf,
        #[command(flatten)]
        out: Out,
    },
    /// A ↦ Tr μ(A) for a matrix-valued measure.
    #[command(name = "trace-measure")]
    TraceMeasure {
        #[arg(long)]
        measure: PathBuf,
        #[command(flatten)]
        out: Out,
    },
    /// Orthogonal stochastic measures.
    Stochastic {
        #[command(subcommand)]
        command: StochasticCommand,
    },
    #[command(name = "stochastic-build")]
    StochasticBuild(BuildArgs),
    #[command(name = "stochastic-verify")]
    StochasticVerify(VerifyArgs),
    #[command(name = "stochastic-integrate")]
    StochasticIntegrate(StochIntegrateArgs),
    /// μ^(s) = ∫ χ_s dμ.
    Charfun {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        s: String,
        #[command(flatten)]
        out: Out,
    },
    /// Stationary processes.
    Spectral {
        #[command(subcommand)]
        command: SpectralCommand,
    },
    #[command(name = "spectral-demo")]
    SpectralDemo(DemoArgs),
    /// Runs every property suite, or checks a stored fixture.
    Selftest {
        /// `default` or a path to a JSON config.
        #[arg(long, default_value = "default")]
        config: String,
        /// Only this suite.
        #[arg(long)]
        suite: Option<String>,
        /// A stored object to check instead of the suites.
        #[arg(long, conflicts_with = "suite")]
        fixture: Option<PathBuf>,
        #[command(flatten)]
        out: Out,
    },
}

#[derive(Subcommand)]
enum MeasureCommand {
    /// μ(A) and ‖A‖_μ.
    Eval(EvalArgs),
}

#[derive(Subcommand)]
enum StochasticCommand {
    /// ξ with c_k = √μ(A_k) at the given level.
    Build(BuildArgs),
    /// (M1)–(M4) over every ball pair to the given level.
    Verify(VerifyArgs),
    /// ∫ f dξ.
    Integrate(StochIntegrateArgs),
}

#[derive(Subcommand)]
enum SpectralCommand {
    /// Synthesize, tabulate the covariance and recover the spectral data.
    Demo(DemoArgs),
}

#[derive(Args)]
struct Out {
    /// Write the JSON result here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    measure: PathBuf,
    #[arg(long)]
    set: PathBuf,
    #[command(flatten)]
    out: Out,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    measure: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    level: i64,
    /// Must agree with the measure's value prime when given.
    #[arg(long)]
    prime: Option<u64>,
    #[command(flatten)]
    out: Out,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    xi: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    max_level: i64,
    #[command(flatten)]
    out: Out,
}

#[derive(Args)]
struct StochIntegrateArgs {
    #[arg(long = "fn")]
    function: PathBuf,
    #[arg(long)]
    xi: PathBuf,
    #[command(flatten)]
    out: Out,
}

#[derive(Args)]
struct DemoArgs {
    #[arg(long)]
    spec: PathBuf,
    /// `auto` or a comma-separated list of rationals.
    #[arg(long, default_value = "auto")]
    times: String,
    #[command(flatten)]
    out: Out,
}

/// A usage or input failure, reported with exit code 1.
struct Failure {
    kind: String,
    detail: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { kind: e.kind().into(), detail: e.to_string() }
    }
}

fn failure(kind: &str, detail: impl Into<String>) -> Failure {
    Failure { kind: kind.into(), detail: detail.into() }
}

/// The JSON result and whether every identity it reports held.
struct Outcome {
    value: Value,
    holds: bool,
}

fn ok(value: impl Serialize) -> Result<Outcome, Failure> {
    checked(value, true)
}

fn checked(value: impl Serialize, holds: bool) -> Result<Outcome, Failure> {
    let value = serde_json::to_value(value).map_err(|e| failure("internal", e.to_string()))?;
    Ok(Outcome { value, holds })
}

fn read<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| failure("io", format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| failure("parse", format!("{}: {e}", path.display())))
}

fn rational(s: &str) -> Result<Rational, Failure> {
    Ok(s.trim().parse::<Rational>()?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            return report_failure(failure("usage", e.to_string().trim_end()));
        }
    };
    let (result, out) = run(cli.command);
    match result.and_then(|o| emit(&o.value, out.as_deref()).map(|()| o.holds)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(f) => report_failure(f),
    }
}

fn report_failure(f: Failure) -> ExitCode {
    println!("{}", json!({ "error": f.kind, "detail": f.detail }));
    ExitCode::from(1)
}

fn emit(value: &Value, out: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| failure("internal", e.to_string()))?;
    match out {
        Some(path) => fs::write(path, text + "\n").map_err(|e| failure("io", format!("{}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run(command: Command) -> (Result<Outcome, Failure>, Option<PathBuf>) {
    use Command as C;
    match command {
        C::Norm { x, p, out } => (norm(&x, p), out.out),
        C::Measure { command: MeasureCommand::Eval(a) } | C::MeasureEval(a) => (measure_eval(&a), a.out.out),
        C::Nmu { measure, point, out } => (nmu(&measure, &point), out.out),
        C::Integrate { function, measure, out } => (integrate_cmd(&function, &measure), out.out),
        C::Lq { function, measure, q, out } => (lq(&function, &measure, q), out.out),
        C::ProductCheck { left, right, function, x, y, out } => {
            (product_check(&left, &right, function.as_deref(), x.zip(y)), out.out)
        }
        C::Convolve { a, b, out } => (convolve_cmd(&a, &b), out.out),
        C::Trace { matrix, out } => (trace(&matrix), out.out),
        C::TraceMeasure { measure, out } => (trace_measure_cmd(&measure), out.out),
        C::Stochastic { command: StochasticCommand::Build(a) } | C::StochasticBuild(a) => (build(&a), a.out.out),
        C::Stochastic { command: StochasticCommand::Verify(a) } | C::StochasticVerify(a) => (verify(&a), a.out.out),
        C::Stochastic { command: StochasticCommand::Integrate(a) } | C::StochasticIntegrate(a) => {
            (stochastic_integrate(&a), a.out.out)
        }
        C::Charfun { measure, s, out } => (charfun(&measure, &s), out.out),
        C::Spectral { command: SpectralCommand::Demo(a) } | C::SpectralDemo(a) => (demo(&a), a.out.out),
        C::Selftest { config, suite, fixture, out } => {
            (run_selftest(&config, suite.as_deref(), fixture.as_deref()), out.out)
        }
    }
}

fn norm(x: &str, p: u64) -> Result<Outcome, Failure> {
    ok(json!({ "norm": padic_valuation(&rational(x)?, p)? }))
}

fn measure_eval(a: &EvalArgs) -> Result<Outcome, Failure> {
    let mu: Measure = read(&a.measure)?;
    let set: ClopenSet = read(&a.set)?;
    ok(json!({ "value": mu.eval(&set)?, "norm": mu.ball_norm(&set)? }))
}

fn nmu(measure: &Path, point: &str) -> Result<Outcome, Failure> {
    let mu: Measure = read(measure)?;
    ok(json!({ "norm": mu.n_mu(&rational(point)?)? }))
}

fn integrate_cmd(function: &Path, measure: &Path) -> Result<Outcome, Failure> {
    let f: LocallyConstantFn<MeasureValue> = read(function)?;
    let mu: Measure = read(measure)?;
    let v = integrate(&f, &mu)?;
    ok(json!({ "norm": v.norm(mu.p()), "value": v }))
}

fn lq(function: &Path, measure: &Path, q: u32) -> Result<Outcome, Failure> {
    let f: LocallyConstantFn<MeasureValue> = read(function)?;
    let mu: Measure = read(measure)?;
    ok(json!({ "norm": lq_norm(&f, &mu, q)? }))
}

fn product_check(
    left: &Path,
    right: &Path,
    function: Option<&Path>,
    point: Option<(String, String)>,
) -> Result<Outcome, Failure> {
    let mu: Measure = read(left)?;
    let nu: Measure = read(right)?;
    if function.is_none() && point.is_none() {
        return Err(failure("invalid-argument", "give --fn, or --x and --y"));
    }
    let mut out = serde_json::Map::new();
    let mut holds = true;
    if let Some(path) = function {
        let f: ProductFn<MeasureValue> = read(path)?;
        let rep = fubini_check(&f, &mu, &nu)?;
        holds &= rep.holds;
        out.insert("fubini".into(), serde_json::to_value(rep).expect("serializable"));
    }
    if let Some((x, y)) = point {
        let (x, y) = (rational(&x)?, rational(&y)?);
        let pm = ProductMeasure::new(mu.clone(), nu.clone())?;
        let lhs = pm.n_mu(&x, &y)?;
        let rhs = mu.n_mu(&x)? * nu.n_mu(&y)?;
        holds &= lhs == rhs;
        out.insert("nIdentity".into(), json!({ "lhs": lhs, "rhs": rhs, "holds": lhs == rhs }));
    }
    checked(out, holds)
}

fn convolve_cmd(a: &Path, b: &Path) -> Result<Outcome, Failure> {
    let mu: Measure = read(a)?;
    let nu: Measure = read(b)?;
    ok(convolve(&mu, &nu)?)
}

fn trace(matrix: &Path) -> Result<Outcome, Failure> {
    let f: FinMatrix = read(matrix)?;
    let tr = f.trace();
    let tr_norm = padic_valuation(&tr, f.p())?;
    let bound = tr_norm <= f.op_norm();
    checked(json!({ "trace": tr, "traceNorm": tr_norm, "opNorm": f.op_norm(), "bound": bound }), bound)
}

fn trace_measure_cmd(measure: &Path) -> Result<Outcome, Failure> {
    let mu: Measure = read(measure)?;
    ok(trace_measure(&mu)?)
}

fn build(a: &BuildArgs) -> Result<Outcome, Failure> {
    let mu: Measure = read(&a.measure)?;
    if let Some(p) = a.prime {
        if p != mu.p() {
            return Err(failure("invalid-argument", format!("--prime {p} but the measure uses p = {}", mu.p())));
        }
    }
    ok(OrthStochMeasure::build(&mu, a.level)?)
}

fn verify(a: &VerifyArgs) -> Result<Outcome, Failure> {
    let xi: OrthStochMeasure = read(&a.xi)?;
    let rep = verify_m_conditions(&xi, a.max_level)?;
    let holds = rep.passed();
    checked(json!({ "passed": holds, "conditions": rep.conditions }), holds)
}

fn stochastic_integrate(a: &StochIntegrateArgs) -> Result<Outcome, Failure> {
    let f: LocallyConstantFn<Rational> = read(&a.function)?;
    let xi: OrthStochMeasure = read(&a.xi)?;
    let eta = xi.integral(&f)?;
    ok(json!({ "expectation": eta.expectation(), "value": eta }))
}

fn charfun(measure: &Path, s: &str) -> Result<Outcome, Failure> {
    let mu: Measure = read(measure)?;
    ok(json!({ "value": char_functional(&mu, &rational(s)?)? }))
}

fn demo(a: &DemoArgs) -> Result<Outcome, Failure> {
    let spec: SpectralSpec = read(&a.spec)?;
    let times = match a.times.trim() {
        "auto" => Times::Auto,
        list => Times::Explicit(list.split(',').map(rational).collect::<Result<_, _>>()?),
    };
    let d = spectral_demo(&spec, &times)?;
    let holds = d.passed();
    checked(d, holds)
}

fn run_selftest(config: &str, suite: Option<&str>, fixture: Option<&Path>) -> Result<Outcome, Failure> {
    if let Some(path) = fixture {
        let fx: Fixture = read(path)?;
        let rep = selftest::run_fixture(&fx)?;
        let holds = rep.passed;
        return checked(rep, holds);
    }
    let mut config: SelfTestConfig = match config {
        "default" => SelfTestConfig::default(),
        path => read(Path::new(path))?,
    };
    if let Ok(seed) = std::env::var("PAM_SEED") {
        config.seed = seed.trim().parse().map_err(|_| failure("invalid-argument", format!("PAM_SEED={seed:?}")))?;
    }
    match suite {
        Some(name) => {
            let rep = selftest::run_suite(name.parse::<Suite>()?, &config)?;
            let holds = rep.passed;
            checked(json!({ "config": config, "passed": holds, "suites": [rep] }), holds)
        }
        None => {
            let rep = selftest::run(&config)?;
            let holds = rep.passed;
            checked(rep, holds)
        }
    }
}
