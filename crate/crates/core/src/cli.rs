//! Command-line front end: configuration, dispatch on the prime, and the
//! versioned JSON report.
//!
//! Exit codes: 0 when every check passes, 1 on a failed check or a theorem
//! violation, 2 when precision does not decide, 64 on usage errors and
//! unmet preconditions.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::coleman::{
    check_membership, check_rho, classify_and_generators, det_factorization_check, image_conditions_module, rebase,
    x_k, Rho,
};
use crate::error::{Error, Result};
use crate::interpolation::{change_basis, random_conditions, random_poly, InterpolationModule};
use crate::mellin::Outcome;
use crate::padic::{is_small_prime, Padic};
use crate::phi_module::{p_pow, FilteredPhiModule};
use crate::profile::PrecisionProfile;
use crate::scalar::PadicField;
use crate::series::XSeries;
use crate::suites::{
    annihilator_suite, interpolation_suite, mellin_suite, operators_suite, relations_suite, Check, SuiteReport,
};
use crate::wach::{build_wach, divisor_check, hodge_filtration, log_matrix, WachKind};

/// Version of the report layout.
pub const SCHEMA: u64 = 1;

/// Environment variable holding a default profile `N,D,DX`.
pub const PROFILE_ENV: &str = "COLEMAN_PROFILE";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INDETERMINATE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(
    name = "coleman",
    about = "Checks for Wach modules, log-matrices and Coleman-map images"
)]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Subcommand, Debug)]
enum CliCommand {
    /// Run a randomized verification suite.
    Verify(Flags),
    /// Compute a log-matrix and its elementary-divisor checks.
    Logmatrix(Flags),
    /// Describe the image of the Coleman maps of a modular form.
    Image(Flags),
    /// Build a random interpolation module.
    Submodule(Flags),
    /// The weight-two functional and its kernel.
    Rho(Flags),
}

/// Flags shared by every command; unset flags fall back to the
/// configuration file, then to defaults.
#[derive(Args, Debug, Default, Clone)]
struct Flags {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    k: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    ap: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    r: Option<i64>,
    #[arg(long)]
    eta: Option<u64>,
    #[arg(long, value_enum)]
    kind: Option<KindName>,
    #[arg(long, value_enum)]
    suite: Option<SuiteName>,
    /// `N,D,DX`.
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    cases: Option<usize>,
    /// Rank of a random interpolation module.
    #[arg(long)]
    d: Option<usize>,
    /// Number of interpolation conditions.
    #[arg(long)]
    conditions: Option<usize>,
    /// Skip the Weil bound on `a_p`.
    #[arg(long)]
    formal: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Subcommands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    #[default]
    Verify,
    Logmatrix,
    Image,
    Submodule,
    Rho,
}

/// Built-in Wach data selectable from the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum KindName {
    Twist,
    Ap0,
    Weight2,
}

/// Verification suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SuiteName {
    Operators,
    Mellin,
    Annihilator,
    Interpolation,
    Relations,
}

/// A fully resolved run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub p: u64,
    pub k: Option<i64>,
    pub ap: Option<i64>,
    pub r: Option<i64>,
    pub eta: u64,
    pub kind: Option<KindName>,
    pub suite: Option<SuiteName>,
    pub profile: PrecisionProfile,
    pub seed: u64,
    pub cases: Option<usize>,
    pub d: Option<usize>,
    pub conditions: Option<usize>,
    pub formal: bool,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: Command::Verify,
            p: 3,
            k: None,
            ap: None,
            r: None,
            eta: 0,
            kind: None,
            suite: None,
            profile: PrecisionProfile::default(),
            seed: 0,
            cases: None,
            d: None,
            conditions: None,
            formal: false,
            out: None,
        }
    }
}

/// Contents of a configuration file; every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    command: Option<Command>,
    p: Option<u64>,
    k: Option<i64>,
    ap: Option<i64>,
    r: Option<i64>,
    eta: Option<u64>,
    kind: Option<KindName>,
    suite: Option<SuiteName>,
    profile: Option<String>,
    seed: Option<u64>,
    cases: Option<usize>,
    d: Option<usize>,
    conditions: Option<usize>,
    formal: Option<bool>,
    out: Option<PathBuf>,
}

fn check_prime(p: u64) -> Result<u64> {
    if matches!(p, 3 | 5 | 7 | 11 | 13) && is_small_prime(p) {
        Ok(p)
    } else {
        Err(Error::InvalidPrime(p))
    }
}

fn default_profile() -> Result<PrecisionProfile> {
    match std::env::var(PROFILE_ENV) {
        Ok(s) => PrecisionProfile::parse(&s),
        Err(_) => Ok(PrecisionProfile::default()),
    }
}

/// Reads a JSON configuration file. An empty file gives the defaults.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))?;
    let file: FileConfig = if text.trim().is_empty() {
        FileConfig::default()
    } else {
        serde_json::from_str(&text)
            .map_err(|e| Error::Usage(format!("invalid configuration {}: {e}", path.display())))?
    };
    let d = RunConfig::default();
    Ok(RunConfig {
        command: file.command.unwrap_or(d.command),
        p: check_prime(file.p.unwrap_or(d.p))?,
        k: file.k,
        ap: file.ap,
        r: file.r,
        eta: file.eta.unwrap_or(d.eta),
        kind: file.kind,
        suite: file.suite,
        profile: match file.profile {
            Some(s) => PrecisionProfile::parse(&s)?,
            None => default_profile()?,
        },
        seed: file.seed.unwrap_or(d.seed),
        cases: file.cases,
        d: file.d,
        conditions: file.conditions,
        formal: file.formal.unwrap_or(false),
        out: file.out,
    })
}

fn resolve(command: Command, f: &Flags) -> Result<RunConfig> {
    let mut c = match &f.config {
        Some(path) => load_config(path)?,
        None => RunConfig {
            profile: default_profile()?,
            ..RunConfig::default()
        },
    };
    c.command = command;
    if let Some(p) = f.p {
        c.p = p;
    }
    c.p = check_prime(c.p)?;
    c.k = f.k.or(c.k);
    c.ap = f.ap.or(c.ap);
    c.r = f.r.or(c.r);
    c.eta = f.eta.unwrap_or(c.eta);
    c.kind = f.kind.or(c.kind);
    c.suite = f.suite.or(c.suite);
    if let Some(s) = &f.profile {
        c.profile = PrecisionProfile::parse(s)?;
    }
    c.seed = f.seed.unwrap_or(c.seed);
    c.cases = f.cases.or(c.cases);
    c.d = f.d.or(c.d);
    c.conditions = f.conditions.or(c.conditions);
    c.formal |= f.formal;
    c.out = f.out.clone().or(c.out);
    Ok(c)
}

fn parse(argv: &[String]) -> std::result::Result<(Command, Flags), clap::Error> {
    let cli = Cli::try_parse_from(std::iter::once("coleman".to_string()).chain(argv.iter().cloned()))?;
    Ok(match cli.command {
        CliCommand::Verify(f) => (Command::Verify, f),
        CliCommand::Logmatrix(f) => (Command::Logmatrix, f),
        CliCommand::Image(f) => (Command::Image, f),
        CliCommand::Submodule(f) => (Command::Submodule, f),
        CliCommand::Rho(f) => (Command::Rho, f),
    })
}

/// Parses argument strings (without the program name) into a configuration.
pub fn parse_args(argv: &[String]) -> Result<RunConfig> {
    let (command, flags) = parse(argv).map_err(|e| Error::Usage(e.render().to_string()))?;
    resolve(command, &flags)
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_)
        | Error::InvalidPrime(_)
        | Error::InvalidUnit(_)
        | Error::InvalidForm(_)
        | Error::OrdinaryUnsupported
        | Error::Domain(_)
        | Error::DuplicatePoint(_) => EXIT_USAGE,
        Error::Indeterminate(_) | Error::PrecisionExhausted(_) => EXIT_INDETERMINATE,
        _ => EXIT_FAIL,
    }
}

/// Exit code for an outcome.
pub fn outcome_code(o: Outcome) -> i32 {
    match o {
        Outcome::Pass => EXIT_PASS,
        Outcome::Fail => EXIT_FAIL,
        Outcome::Indeterminate => EXIT_INDETERMINATE,
    }
}

/// Result of a run: exit code, JSON report, and a one-line summary.
#[derive(Clone, Debug)]
pub struct Execution {
    pub code: i32,
    pub report: Option<Value>,
    pub summary: String,
    pub out: Option<PathBuf>,
}

impl Execution {
    /// The report as text; identical runs give identical bytes.
    pub fn report_text(&self) -> Option<String> {
        self.report
            .as_ref()
            .map(|r| serde_json::to_string_pretty(r).expect("JSON values serialize"))
    }
}

/// Runs one command from argument strings (without the program name).
pub fn run(argv: &[String]) -> Execution {
    let (command, flags) = match parse(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_PASS,
                _ => EXIT_USAGE,
            };
            return Execution {
                code,
                report: None,
                summary: e.render().to_string(),
                out: None,
            };
        }
    };
    match resolve(command, &flags) {
        Ok(cfg) => run_config(&cfg),
        Err(e) => Execution {
            code: exit_code(&e),
            report: None,
            summary: e.to_string(),
            out: None,
        },
    }
}

/// Runs a resolved configuration.
pub fn run_config(cfg: &RunConfig) -> Execution {
    let result = match cfg.p {
        3 => execute::<Padic<3>>(cfg),
        5 => execute::<Padic<5>>(cfg),
        7 => execute::<Padic<7>>(cfg),
        11 => execute::<Padic<11>>(cfg),
        13 => execute::<Padic<13>>(cfg),
        p => Err(Error::InvalidPrime(p)),
    };
    let name = serde_json::to_value(cfg.command).expect("command serializes");
    let mut report = json!({
        "schema": SCHEMA,
        "command": name,
        "config": serde_json::to_value(cfg).expect("configuration serializes"),
        "profile": cfg.profile.to_json(),
    });
    let (code, summary) = match result {
        Ok((checks, data, precision)) => {
            let outcome = checks.outcome();
            report["outcome"] = json!(outcome.label());
            report["precision"] = json!(precision.or(checks.precision()));
            report["checks"] = checks.to_json();
            report["data"] = data;
            let failing: Vec<String> = checks
                .sorted()
                .into_iter()
                .filter(|c| c.outcome != Outcome::Pass)
                .map(|c| format!("{} ({})", c.id, c.outcome.label()))
                .collect();
            let mut s = format!(
                "coleman {}: {} ({} checks)",
                name.as_str().unwrap_or(""),
                outcome.label(),
                checks.checks.len()
            );
            if !failing.is_empty() {
                s.push_str(&format!("; not passing: {}", failing.join(", ")));
            }
            (outcome_code(outcome), s)
        }
        Err(e) => {
            report["outcome"] = json!("error");
            report["error"] = json!(e.to_string());
            report["precision"] = Value::Null;
            (exit_code(&e), format!("coleman {}: {e}", name.as_str().unwrap_or("")))
        }
    };
    Execution {
        code,
        report: Some(report),
        summary,
        out: cfg.out.clone(),
    }
}

fn require(v: Option<i64>, name: &str) -> Result<i64> {
    v.ok_or_else(|| Error::Usage(format!("--{name} is required")))
}

fn modular_module<S: PadicField>(cfg: &RunConfig, k: i64, ap: i64) -> Result<FilteredPhiModule<S>> {
    if cfg.formal {
        FilteredPhiModule::modular_formal(k, ap)
    } else {
        FilteredPhiModule::build_modular(k, ap)
    }
}

type Outputs = (SuiteReport, Value, Option<i64>);

fn execute<S: PadicField>(cfg: &RunConfig) -> Result<Outputs> {
    cfg.profile.check_scalar::<S>()?;
    match cfg.command {
        Command::Verify => verify::<S>(cfg),
        Command::Logmatrix => logmatrix::<S>(cfg),
        Command::Image => image::<S>(cfg),
        Command::Submodule => submodule::<S>(cfg),
        Command::Rho => rho::<S>(cfg),
    }
}

fn verify<S: PadicField>(cfg: &RunConfig) -> Result<Outputs> {
    let suite = cfg.suite.ok_or_else(|| Error::Usage("--suite is required".into()))?;
    let pr = &cfg.profile;
    let r = match suite {
        SuiteName::Operators => operators_suite::<S>(pr, cfg.seed, cfg.cases.unwrap_or(50))?,
        SuiteName::Mellin => mellin_suite::<S>(pr, cfg.seed, cfg.cases.unwrap_or(25), 10)?,
        SuiteName::Annihilator => annihilator_suite::<S>(pr, cfg.seed, cfg.cases.unwrap_or(10), 3)?,
        SuiteName::Interpolation => interpolation_suite::<S>(cfg.seed, cfg.cases.unwrap_or(100), 20)?,
        SuiteName::Relations => {
            let m = modular_module::<S>(cfg, require(cfg.k, "k")?, require(cfg.ap, "ap")?)?;
            relations_suite(&m)?
        }
    };
    Ok((r, json!({"suite": suite}), None))
}

fn wach_kind(cfg: &RunConfig) -> Result<WachKind> {
    match cfg.kind.ok_or_else(|| Error::Usage("--kind is required".into()))? {
        KindName::Twist => Ok(WachKind::Twist(require(cfg.r, "r")?)),
        KindName::Ap0 => Ok(WachKind::Ap0 {
            k: require(cfg.k, "k")?,
        }),
        KindName::Weight2 => Ok(WachKind::Weight2 {
            ap: require(cfg.ap, "ap")?,
        }),
    }
}

fn logmatrix<S: PadicField>(cfg: &RunConfig) -> Result<Outputs> {
    let w = build_wach::<S>(wach_kind(cfg)?, &cfg.profile)?;
    let hodge = hodge_filtration(&w, &cfg.profile)?;
    let l = log_matrix(&w, &cfg.profile)?;
    let div = divisor_check(&l)?;
    let m0 = l.m.at_zero();
    let scaled = m0.scale(&p_pow::<S>(l.shift));
    let mut r = SuiteReport::default();
    r.push(Check::boolean(
        "logmatrix/m0_equals_a_transpose",
        l.checks.m0_is_a_transpose,
        json!({}),
    ));
    r.push(Check::boolean(
        "logmatrix/gamma1_component",
        l.checks.gamma1_component,
        json!({}),
    ));
    r.push(Check::new(
        "logmatrix/roundtrip",
        if l.checks.roundtrip_precision.is_some() {
            Outcome::Pass
        } else {
            Outcome::Fail
        },
        l.checks.roundtrip_precision,
        json!({}),
    ));
    r.push(Check::new(
        "logmatrix/hodge_weights",
        if hodge.weights == l.weights {
            Outcome::Pass
        } else {
            Outcome::Fail
        },
        Some(hodge.precision),
        json!({"weights": hodge.weights, "dims": hodge.dims}),
    ));
    r.push(Check::new(
        "logmatrix/divisor",
        div.outcome(),
        None,
        json!(div.summary()),
    ));
    let data = json!({
        "log_matrix": l.to_json(),
        "M0": m0.to_json(),
        "M0_times_p_shift": scaled.to_json(),
        "divisor": div.to_json(),
    });
    Ok((r, data, Some(l.precision())))
}

fn image<S: PadicField>(cfg: &RunConfig) -> Result<Outputs> {
    let (k, ap) = (require(cfg.k, "k")?, require(cfg.ap, "ap")?);
    let m = modular_module::<S>(cfg, k, ap)?;
    let data = image_conditions_module(&m, cfg.eta, &cfg.profile)?;
    let gens = classify_and_generators(&data)?;
    let mut r = SuiteReport::default();
    r.push(Check::boolean(
        "image/i1_i2_disjoint",
        data.i1.iter().all(|i| !data.i2.contains(i)),
        json!({}),
    ));
    r.push(Check::boolean("image/x1_x2_divides_xk", gens.divides_x_k, json!({})));
    r.push(Check::new(
        "image/det_factorization",
        det_factorization_check(&data)?,
        None,
        json!({}),
    ));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let xk = x_k::<S>(k);
    let mut member = true;
    for _ in 0..cfg.cases.unwrap_or(10) {
        let f: XSeries<S> = &xk * &random_poly(&mut rng, 4);
        let g: XSeries<S> = &xk * &random_poly(&mut rng, 4);
        member &= check_membership(&f, &g, &data)?.member();
    }
    r.push(Check::boolean("image/xk_multiples_are_members", member, json!({})));
    let rs: Vec<S> = data.r.iter().map(|(_, x)| *x).collect();
    let (b, _) = change_basis(&rs)?;
    let rebased = rebase(&m, &data, b)?;
    r.push(Check::boolean(
        "image/change_basis_empties_i1_i2",
        rebased.i1.is_empty() && rebased.i2.is_empty(),
        json!({"I3": rebased.i3}),
    ));
    let out = json!({
        "image": data.to_json(),
        "projection_first": gens.first.to_json(),
        "projection_second": gens.second.to_json(),
        "rebased": rebased.to_json(),
    });
    Ok((r, out, Some(data.precision.min(rebased.precision))))
}

fn submodule<S: PadicField>(cfg: &RunConfig) -> Result<Outputs> {
    let d = cfg.d.unwrap_or(2);
    if !(1..=4).contains(&d) {
        return Err(Error::Usage("--d must lie in 1..=4".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let s = InterpolationModule::<S>::build(d, random_conditions(&mut rng, d, cfg.conditions.unwrap_or(2)))?;
    let mut r = SuiteReport::default();
    r.push(Check::boolean("submodule/determinant", s.det_unit().is_ok(), json!({})));
    let mut rows_ok = true;
    for row in &s.basis {
        rows_ok &= s.satisfies(row)?;
    }
    r.push(Check::boolean(
        "submodule/basis_satisfies_conditions",
        rows_ok,
        json!({}),
    ));
    let images: Vec<Value> = (0..d)
        .map(|c| s.projection_image(c).map(|i| i.to_json()))
        .collect::<Result<_>>()?;
    r.push(Check::boolean(
        "submodule/projection_images",
        true,
        json!({"count": images.len()}),
    ));
    Ok((r, json!({"module": s.to_json(), "projections": images}), None))
}

fn rho<S: PadicField>(cfg: &RunConfig) -> Result<Outputs> {
    let ap = require(cfg.ap, "ap")?;
    let p = S::PRIME as i64;
    let m = modular_module::<S>(cfg, 2, ap)?;
    let data = image_conditions_module(&m, 0, &cfg.profile)?;
    let rho = Rho {
        coeff_f: S::from_i64(-(p - 1)),
        coeff_g: S::from_i64(2 - ap),
    };
    let kernel_ok = check_rho(&rho, &data).is_ok();
    let mut r = SuiteReport::default();
    r.push(Check::boolean("rho/kernel_is_image_line", kernel_ok, json!({})));
    let (g, h) = rho.as_gh();
    let out = json!({
        "on_F_G": [rho.coeff_f.to_json(), rho.coeff_g.to_json()],
        "on_g_h": [g.to_json(), h.to_json()],
        "image_line": data.conditions[0].to_json(),
    });
    Ok((r, out, Some(data.precision)))
}
