//! Command-line driver for the weighted trigonometric approximation check
//! suite.
//!
//! Subcommands:
//! - `classify-weight` — class membership and estimated constants for a
//!   weight at a norm index, printed as JSON on stdout.
//! - `run <config.json>` — execute a suite configuration: every check runs
//!   first, then one CSV per check and a `summary.json` are written into the
//!   configured output directory.
//! - `list-checks` — the check vocabulary with one-line descriptions.
//! - `print-constants` — the envelope-constant table for a
//!   `(weight, p, order)` triple.
//!
//! Exit codes: `0` success (all verdicts pass), `2` configuration or parse
//! error, `3` non-integrable weight exponent, `4` at least one check verdict
//! did not pass, `5` numerical solver failure.
//!
//! The environment variable `APX_THREADS` (a positive integer) caps internal
//! parallelism.
//!
//! Determinism: for a fixed configuration (including its seed), CSV bodies
//! are byte-identical across runs; wall-clock information appears only in
//! the `metadata` field of `summary.json`.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use apx_core::constants::explicit_constants;
use apx_core::harness::{run_check, CheckId, CheckReport, CheckSpec};
use apx_core::testfn;
use apx_core::weights::{classify_weight, Weight};
use apx_core::ApxError;
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};

const EXIT_OK: u8 = 0;
const EXIT_CONFIG: u8 = 2;
const EXIT_EXPONENT: u8 = 3;
const EXIT_VERDICT: u8 = 4;
const EXIT_SOLVER: u8 = 5;

#[derive(Parser)]
#[command(
    name = "apx",
    version,
    about = "Checks for weighted trigonometric approximation: weight classification, \
             operator envelopes, moduli of smoothness, and norm inequalities"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify a weight at a norm index and report its estimated constants
    #[command(name = "classify-weight")]
    ClassifyWeight(ClassifyArgs),
    /// Execute a JSON suite configuration and write CSV/JSON reports
    Run(RunArgs),
    /// List the available check identifiers with descriptions
    #[command(name = "list-checks")]
    ListChecks,
    /// Print the envelope-constant table for a (weight, p, order) triple
    #[command(name = "print-constants")]
    PrintConstants(ConstantsArgs),
}

#[derive(Args)]
struct ClassifyArgs {
    /// Weight family: `power`, `const`, or `product`
    #[arg(long, default_value = "power")]
    family: String,
    /// Singularity location for the power family
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    x0: f64,
    /// Local exponent for the power family (must exceed -1 for integrability)
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    alpha: f64,
    /// Value for the const family (must be positive)
    #[arg(long, default_value_t = 1.0)]
    value: f64,
    /// Factors for the product family, e.g. "(0,0.5),(1.5,-0.25)"
    #[arg(long)]
    factors: Option<String>,
    /// Full weight descriptor, overriding the family flags
    /// (e.g. `power(0,0.5)`, `product[(0,0.5),(1.5,-0.25)]`)
    #[arg(long)]
    descriptor: Option<String>,
    /// Norm index: a number >= 1, or `inf`
    #[arg(long, default_value = "2")]
    p: String,
}

#[derive(Args)]
struct RunArgs {
    /// Path to the JSON suite configuration (schema_version 1)
    config: PathBuf,
}

#[derive(Args)]
struct ConstantsArgs {
    /// Weight descriptor, e.g. `const(1)`, `power(0,0.5)`
    #[arg(long, default_value = "const(1)")]
    weight: String,
    /// Norm index: a number >= 1, or `inf`
    #[arg(long, default_value = "2")]
    p: String,
    /// Difference/derivative order entering the combination constants
    #[arg(long, default_value_t = 1)]
    order: u32,
}

fn main() -> ExitCode {
    if let Err(msg) = init_thread_pool() {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_CONFIG);
    }
    let cli = Cli::parse();
    let code = match cli.cmd {
        Cmd::ClassifyWeight(a) => cmd_classify_weight(&a),
        Cmd::Run(a) => cmd_run(&a.config),
        Cmd::ListChecks => cmd_list_checks(),
        Cmd::PrintConstants(a) => cmd_print_constants(&a),
    };
    ExitCode::from(code)
}

/// Honor `APX_THREADS` before any parallel work starts.
fn init_thread_pool() -> Result<(), String> {
    let raw = match std::env::var("APX_THREADS") {
        Err(_) => return Ok(()),
        Ok(raw) => raw,
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("APX_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| format!("could not configure the thread pool: {e}"))
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

/// Map a weight-construction error to an exit code: non-integrable exponents
/// get their own code, everything else is a configuration error.
fn weight_error_code(e: ApxError) -> (u8, String) {
    let msg = e.to_string();
    if msg.contains("integrability") {
        (EXIT_EXPONENT, msg)
    } else {
        (EXIT_CONFIG, msg)
    }
}

fn parse_norm_index(raw: &str) -> Result<f64, (u8, String)> {
    let p = match raw.trim() {
        "inf" | "Inf" | "INF" | "infinity" => f64::INFINITY,
        s => s.parse::<f64>().map_err(|_| {
            (
                EXIT_CONFIG,
                format!("norm index must be a number >= 1 or \"inf\", got {s:?}"),
            )
        })?,
    };
    if !(p >= 1.0) {
        return Err((
            EXIT_CONFIG,
            format!("norm index must satisfy p >= 1, got {p}"),
        ));
    }
    Ok(p)
}

fn norm_index_json(p: f64) -> Value {
    if p.is_infinite() {
        json!("inf")
    } else {
        json!(p)
    }
}

/// JSON encoding that keeps non-finite numbers visible instead of nulling
/// them: finite values stay numbers, everything else becomes a string.
fn num_or_str(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

// ---------------------------------------------------------------------------
// classify-weight
// ---------------------------------------------------------------------------

fn build_weight(a: &ClassifyArgs) -> Result<Weight, (u8, String)> {
    let built = if let Some(d) = &a.descriptor {
        Weight::parse(d)
    } else {
        match a.family.as_str() {
            "power" => Weight::power(a.x0, a.alpha),
            "const" | "constant" => Weight::constant(a.value),
            "product" => {
                let inner = a.factors.as_deref().ok_or((
                    EXIT_CONFIG,
                    "the product family needs --factors \"(x0,beta),...\"".to_string(),
                ))?;
                Weight::parse(&format!("product[{inner}]"))
            }
            other => {
                return Err((
                    EXIT_CONFIG,
                    format!("unknown weight family {other:?} (expected power, const, or product)"),
                ))
            }
        }
    };
    built.map_err(weight_error_code)
}

fn cmd_classify_weight(a: &ClassifyArgs) -> u8 {
    let w = match build_weight(a) {
        Ok(w) => w,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            return code;
        }
    };
    let p = match parse_norm_index(&a.p) {
        Ok(p) => p,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            return code;
        }
    };
    let report = match classify_weight(&w, p) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let class = if p == 1.0 {
        "S_1".to_string()
    } else if p.is_infinite() {
        "sup".to_string()
    } else {
        format!("A_{p}")
    };
    // The class characteristic: the interval-average functional for finite
    // p > 1, the bounded-average constant for p = 1, nothing for p = inf.
    let characteristic = report
        .muckenhoupt
        .as_ref()
        .map(|m| m.value)
        .or_else(|| report.s1.as_ref().map(|s| s.gamma_1.value));
    let trend = report
        .muckenhoupt
        .as_ref()
        .map(|m| m.refinement_trend)
        .or_else(|| report.s1.as_ref().map(|s| s.gamma_1.refinement_trend));
    let out = json!({
        "weight": w.descriptor(),
        "p": norm_index_json(p),
        "class": class,
        "in_class": report.in_class,
        "reason": report.reason,
        "characteristic": characteristic,
        "characteristic_trend": trend,
        "essential_lower_bound": report.s1.as_ref().map(|s| s.c8),
        "doubling": report.doubling_c6,
        "growth_constant": report.growth.c7,
        "growth_exponent": report.growth.p0,
    });
    print!("{}", pretty(&out));
    EXIT_OK
}

// ---------------------------------------------------------------------------
// print-constants and list-checks
// ---------------------------------------------------------------------------

fn cmd_print_constants(a: &ConstantsArgs) -> u8 {
    let w = match Weight::parse(&a.weight).map_err(weight_error_code) {
        Ok(w) => w,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            return code;
        }
    };
    let p = match parse_norm_index(&a.p) {
        Ok(p) => p,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            return code;
        }
    };
    let table = match explicit_constants(&w, p, a.order) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let entries: Vec<Value> = table
        .entries()
        .iter()
        .map(|e| {
            json!({
                "name": e.name,
                "value": e.value,
                "formula": e.formula,
            })
        })
        .collect();
    let out = json!({
        "weight": w.descriptor(),
        "p": norm_index_json(p),
        "order": table.order,
        "entry_exponent": table.entry_exponent,
        "maximal_exponent": if table.maximal_exponent.is_nan() {
            Value::Null
        } else {
            json!(table.maximal_exponent)
        },
        "constants": entries,
    });
    print!("{}", pretty(&out));
    EXIT_OK
}

fn cmd_list_checks() -> u8 {
    let list: Vec<Value> = CheckId::all()
        .iter()
        .map(|id| {
            json!({
                "check_id": id.as_str(),
                "description": id.description(),
            })
        })
        .collect();
    print!("{}", pretty(&json!(list)));
    EXIT_OK
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema_version: i64,
    #[serde(default = "default_seed")]
    seed: u64,
    #[serde(default)]
    weights: Vec<String>,
    #[serde(default)]
    functions: Vec<String>,
    #[serde(default)]
    checks: Vec<Value>,
    #[serde(default)]
    output: OutputSpec,
}

fn default_seed() -> u64 {
    42
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSpec {
    #[serde(default = "default_directory")]
    directory: PathBuf,
    #[serde(default = "default_formats")]
    formats: Vec<String>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            directory: default_directory(),
            formats: default_formats(),
        }
    }
}

fn default_directory() -> PathBuf {
    PathBuf::from("apx-out")
}

fn default_formats() -> Vec<String> {
    vec!["csv".into(), "json".into()]
}

struct ValidatedConfig {
    raw: RawConfig,
    specs: Vec<CheckSpec>,
    want_csv: bool,
    want_json: bool,
}

/// Parse and validate the whole configuration before anything runs: schema
/// version, output formats, declared weight and function ids, and every
/// check spec (including its weight descriptor and function names).
fn load_config(path: &Path) -> Result<ValidatedConfig, (u8, String)> {
    let config_err = |msg: String| (EXIT_CONFIG, msg);
    let text = fs::read_to_string(path)
        .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    let raw: RawConfig = serde_json::from_str(&text)
        .map_err(|e| config_err(format!("invalid configuration: {e}")))?;
    if raw.schema_version != 1 {
        return Err(config_err(format!(
            "unsupported schema_version {} (this tool reads version 1)",
            raw.schema_version
        )));
    }
    let mut want_csv = false;
    let mut want_json = false;
    for f in &raw.output.formats {
        match f.as_str() {
            "csv" => want_csv = true,
            "json" => want_json = true,
            other => {
                return Err(config_err(format!(
                    "unknown output format {other:?} (expected \"csv\" or \"json\")"
                )))
            }
        }
    }
    for d in &raw.weights {
        Weight::parse(d).map_err(|e| config_err(format!("weight {d:?}: {e}")))?;
    }
    let catalog: BTreeSet<String> = testfn::default_family(raw.seed)
        .into_iter()
        .map(|f| f.name)
        .collect();
    for name in &raw.functions {
        if !catalog.contains(name) {
            return Err(config_err(format!(
                "unknown function {name:?}; available: {}",
                catalog.iter().cloned().collect::<Vec<_>>().join(", ")
            )));
        }
    }
    let mut specs = Vec::with_capacity(raw.checks.len());
    for (i, cv) in raw.checks.iter().enumerate() {
        let mut obj = match cv {
            Value::Object(m) => m.clone(),
            _ => return Err(config_err(format!("checks[{i}] must be a JSON object"))),
        };
        // A check without its own seed inherits the suite seed.
        obj.entry("seed").or_insert_with(|| json!(raw.seed));
        let spec: CheckSpec = serde_json::from_value(Value::Object(obj))
            .map_err(|e| config_err(format!("checks[{i}]: {e}")))?;
        Weight::parse(&spec.weight).map_err(|e| {
            config_err(format!(
                "checks[{i}] ({}): weight {:?}: {e}",
                spec.check_id, spec.weight
            ))
        })?;
        for name in &spec.functions {
            if !catalog.contains(name) {
                return Err(config_err(format!(
                    "checks[{i}] ({}): unknown function {name:?}",
                    spec.check_id
                )));
            }
        }
        specs.push(spec);
    }
    Ok(ValidatedConfig {
        raw,
        specs,
        want_csv,
        want_json,
    })
}

fn cmd_run(path: &Path) -> u8 {
    let started = Instant::now();
    let cfg = match load_config(path) {
        Ok(c) => c,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            return code;
        }
    };
    if let Err(e) = fs::create_dir_all(&cfg.raw.output.directory) {
        eprintln!(
            "error: cannot create output directory {}: {e}",
            cfg.raw.output.directory.display()
        );
        return EXIT_CONFIG;
    }

    // Execute every check before writing anything.
    let total = cfg.specs.len();
    let mut reports: Vec<CheckReport> = Vec::with_capacity(total);
    for (i, spec) in cfg.specs.iter().enumerate() {
        let t0 = Instant::now();
        match run_check(spec) {
            Ok(rep) => {
                eprintln!(
                    "[{:>2}/{total}] {:<20} {:<22} ({:.2?})",
                    i + 1,
                    spec.check_id.as_str(),
                    rep.verdict.as_str(),
                    t0.elapsed()
                );
                reports.push(rep);
            }
            Err(e) => {
                eprintln!("error: checks[{i}] ({}): {e}", spec.check_id);
                return match e {
                    ApxError::SolverFailure(_) => EXIT_SOLVER,
                    _ => EXIT_CONFIG,
                };
            }
        }
    }

    // Write output files sequentially, CSVs first, then the summary.
    let mut file_names: Vec<Option<String>> = vec![None; total];
    if cfg.want_csv {
        for (i, rep) in reports.iter().enumerate() {
            let name = format!("{:02}_{}.csv", i + 1, rep.check_id.as_str());
            let dest = cfg.raw.output.directory.join(&name);
            if let Err(msg) = write_csv(&dest, rep) {
                eprintln!("error: cannot write {}: {msg}", dest.display());
                return EXIT_CONFIG;
            }
            file_names[i] = Some(name);
        }
    }
    let all_passed = reports.iter().all(|r| r.verdict.is_pass());
    if cfg.want_json {
        let summary = build_summary(&cfg, &reports, &file_names, all_passed, started.elapsed());
        let dest = cfg.raw.output.directory.join("summary.json");
        if let Err(e) = fs::write(&dest, summary) {
            eprintln!("error: cannot write {}: {e}", dest.display());
            return EXIT_CONFIG;
        }
    }
    if all_passed {
        EXIT_OK
    } else {
        EXIT_VERDICT
    }
}

/// 17 significant digits: round-trip exact for IEEE doubles.
fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_csv(path: &Path, rep: &CheckReport) -> Result<(), String> {
    let mut wtr = csv::Writer::from_path(path).map_err(|e| e.to_string())?;
    wtr.write_record([
        "check_id",
        "params",
        "x",
        "lhs",
        "rhs",
        "ratio",
        "integral_truncated",
        "integral_extrapolated",
    ])
    .map_err(|e| e.to_string())?;
    for row in &rep.rows {
        let x = fmt17(row.x);
        let lhs = fmt17(row.lhs);
        let rhs = fmt17(row.rhs);
        let ratio = fmt17(row.ratio);
        let trunc = row.integral_truncated.map(fmt17).unwrap_or_default();
        let extr = row.integral_extrapolated.map(fmt17).unwrap_or_default();
        wtr.write_record([
            rep.check_id.as_str(),
            row.params.as_str(),
            x.as_str(),
            lhs.as_str(),
            rhs.as_str(),
            ratio.as_str(),
            trunc.as_str(),
            extr.as_str(),
        ])
        .map_err(|e| e.to_string())?;
    }
    wtr.flush().map_err(|e| e.to_string())
}

fn build_summary(
    cfg: &ValidatedConfig,
    reports: &[CheckReport],
    files: &[Option<String>],
    all_passed: bool,
    wall: Duration,
) -> String {
    let checks: Vec<Value> = reports
        .iter()
        .zip(&cfg.specs)
        .zip(files)
        .enumerate()
        .map(|(i, ((rep, spec), file))| {
            json!({
                "index": i + 1,
                "check_id": rep.check_id.as_str(),
                "file": file,
                "spec": serde_json::to_value(spec).expect("spec serializes"),
                "verdict": rep.verdict.as_str(),
                "aggregate": {
                    "max_ratio": num_or_str(rep.aggregate.max_ratio),
                    "min_ratio": num_or_str(rep.aggregate.min_ratio),
                    "slope": num_or_str(rep.aggregate.slope),
                    "n_rows": rep.aggregate.n_rows,
                },
                "explicit_constant": rep.explicit_constant,
                "hard_lower_bound": rep.hard_lower_bound,
                "notes": rep.notes,
            })
        })
        .collect();
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    pretty(&json!({
        "schema_version": 1,
        "tool": "apx",
        "tool_version": env!("CARGO_PKG_VERSION"),
        "seed": cfg.raw.seed,
        "weights": cfg.raw.weights,
        "functions": cfg.raw.functions,
        "all_passed": all_passed,
        "checks": checks,
        "metadata": {
            "timestamp_unix": timestamp,
            "wall_seconds": wall.as_secs_f64(),
        },
    }))
}
