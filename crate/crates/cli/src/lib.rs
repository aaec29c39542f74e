//! The `boolpred` command line: sequential prediction costs, the
//! majority-versus-optimum table, bound sweeps and exhaustive verification.
//!
//! [`run`] does all the work and returns the text and exit code instead of
//! printing, so tests can drive it directly.

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use boolpred::boolfn::{parse_function, BoolFn, FnWeight, SymmetricProfile, TieRule, TruthTable};
use boolpred::bounds::{bound_set, BoundSet};
use boolpred::exact::{
    mutual_information, seq_cost, seq_cost_noiseless, seq_cost_symmetric, seq_cost_symmetric_noiseless,
    ChannelParams, CostReport, LossKind,
};
use boolpred::numerics::{bindiv, binent, format_decimals, ExactRational};
use boolpred::optdp::{brute_force, dp_optimal, table1_rows, Objective, ObjectiveValue};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

pub const CSV_HEADER: &str = "# boolpred v1";
pub const SCHEMA: u64 = 1;
const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Parser)]
#[command(name = "boolpred", version, about = "Sequential prediction cost of noisy Boolean observations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-step and total prediction cost of Y^n given b(X^n).
    Cost(CostArgs),
    /// Majority versus the weight-constrained optimum, odd n from 3.
    Table1(Table1Args),
    /// Bounds and exact majority/dictator costs at one alpha.
    Bounds(BoundsArgs),
    /// Bounds and exact costs over a grid of alpha.
    Sweep(SweepArgs),
    /// Exhaustive checks over every function of n <= 4 inputs.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LossArg {
    Quad,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Float,
}

/// `dictator[:i] | majority | maj_q:<q> | parity | constant0 | constant1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FnSpec {
    Dictator(u32),
    Majority,
    MajQ(f64),
    Parity,
    Constant(bool),
}

impl FromStr for FnSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (name, arg) = match s.split_once(':') {
            Some((name, arg)) => (name, Some(arg)),
            None => (s, None),
        };
        let bad_arg = || format!("malformed argument in function spec `{s}`");
        match (name, arg) {
            ("dictator", None) => Ok(FnSpec::Dictator(1)),
            ("dictator", Some(i)) => i.parse().map(FnSpec::Dictator).map_err(|_| bad_arg()),
            ("majority", None) => Ok(FnSpec::Majority),
            ("maj_q", Some(q)) => q.parse().map(FnSpec::MajQ).map_err(|_| bad_arg()),
            ("parity", None) => Ok(FnSpec::Parity),
            ("constant0", None) => Ok(FnSpec::Constant(false)),
            ("constant1", None) => Ok(FnSpec::Constant(true)),
            _ => Err(format!(
                "unknown function spec `{s}` (expected dictator[:i], majority, maj_q:<q>, parity, constant0, constant1)"
            )),
        }
    }
}

impl FnSpec {
    pub fn build(self, n: u32) -> boolpred::Result<BoolFn> {
        Ok(match self {
            FnSpec::Dictator(i) => BoolFn::Table(TruthTable::dictator(n, i)?),
            FnSpec::Majority => BoolFn::Symmetric(SymmetricProfile::majority(n, TieRule::Ones)?),
            FnSpec::MajQ(q) => BoolFn::Symmetric(SymmetricProfile::maj_q(n, q)?),
            FnSpec::Parity => BoolFn::Symmetric(SymmetricProfile::parity(n)?),
            FnSpec::Constant(v) => BoolFn::Symmetric(SymmetricProfile::constant(n, v)?),
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct CostArgs {
    /// Named function; needs --n.
    #[arg(long = "fn", value_name = "SPEC", required_unless_present = "fn_file", conflicts_with = "fn_file")]
    pub function: Option<FnSpec>,
    /// JSON function file: {"n","hex"}, {"n","minterms"} or {"n","profile"}.
    #[arg(long, value_name = "PATH")]
    pub fn_file: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = LossArg::Quad)]
    pub loss: LossArg,
    /// Exact rationals need alpha = 0 and quadratic loss.
    #[arg(long, value_enum, default_value_t = ModeArg::Float)]
    pub mode: ModeArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct Table1Args {
    /// Largest odd arity, at most 11.
    #[arg(long, default_value_t = 11)]
    pub n_max: u32,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub n: u32,
    /// Comma-separated alpha values; overrides --steps.
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    /// Uniform grid of steps + 1 points on [0, 1/2].
    #[arg(long, default_value_t = 10)]
    pub steps: u32,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Failure modes, each with its own exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad flags or unreadable input: exit 2.
    Usage(String),
    /// Arguments outside a computation's domain: exit 3.
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Domain(m) => f.write_str(m),
        }
    }
}

impl From<boolpred::Error> for CliError {
    fn from(e: boolpred::Error) -> Self {
        match e {
            boolpred::Error::Parse(_) => CliError::Usage(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Rendered {
    text: String,
    passed: bool,
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code: 2, stdout: String::new(), stderr: text }
            } else {
                Outcome { code: 0, stdout: text, stderr: String::new() }
            };
        }
    };
    let output = match &cli.command {
        Command::Cost(a) => &a.output,
        Command::Table1(a) => &a.output,
        Command::Bounds(a) => &a.output,
        Command::Sweep(a) => &a.output,
        Command::Verify(a) => &a.output,
    };
    let result = match &cli.command {
        Command::Cost(a) => cmd_cost(a),
        Command::Table1(a) => cmd_table1(a),
        Command::Bounds(a) => cmd_sweep(a.n, &[a.alpha], a.output.format, "bounds"),
        Command::Sweep(a) => cmd_sweep(a.n, &sweep_grid(a), a.output.format, "sweep"),
        Command::Verify(a) => cmd_verify(a),
    };
    let rendered = match result {
        Ok(r) => r,
        Err(e) => {
            return Outcome { code: e.exit_code(), stdout: String::new(), stderr: format!("error: {e}\n") }
        }
    };
    let code = if rendered.passed { 0 } else { 1 };
    match &output.out {
        Some(path) => match std::fs::write(path, &rendered.text) {
            Ok(()) => Outcome { code, stdout: String::new(), stderr: String::new() },
            Err(e) => Outcome {
                code: 2,
                stdout: String::new(),
                stderr: format!("error: cannot write {}: {e}\n", path.display()),
            },
        },
        None => Outcome { code, stdout: rendered.text, stderr: String::new() },
    }
}

/// Rounds to 12 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

fn float_json(x: f64) -> Value {
    serde_json::Number::from_f64(round_sig(x)).map_or(Value::Null, Value::Number)
}

/// Rounds every non-integer number in `v`.
fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => float_json(n.as_f64().unwrap_or(f64::NAN)),
        Value::Array(items) => Value::Array(items.into_iter().map(round_json).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

fn float_csv(x: f64) -> String {
    let r = round_sig(x);
    if r == 0.0 {
        "0".into()
    } else if r.abs() < 1e-4 || r.abs() >= 1e15 {
        format!("{r:e}")
    } else {
        r.to_string()
    }
}

fn json_text(v: Value) -> String {
    let mut text = serde_json::to_string_pretty(&round_json(v)).expect("JSON values serialize");
    text.push('\n');
    text
}

fn check_alpha(alpha: f64) -> Result<ChannelParams, CliError> {
    Ok(ChannelParams::new(alpha)?)
}

/// A cost value in either arithmetic.
enum Num<'a> {
    Exact(&'a ExactRational),
    Float(f64),
}

impl Num<'_> {
    fn json(&self) -> Value {
        match self {
            Num::Exact(r) => Value::String(r.to_string()),
            Num::Float(x) => float_json(*x),
        }
    }

    fn csv(&self) -> String {
        match self {
            Num::Exact(r) => r.to_string(),
            Num::Float(x) => float_csv(*x),
        }
    }
}

#[allow(clippy::large_enum_variant)]
enum AnyReport {
    Exact(CostReport<ExactRational>),
    Float(CostReport<f64>),
}

impl AnyReport {
    fn per_step(&self) -> Vec<Num<'_>> {
        match self {
            AnyReport::Exact(r) => r.per_step.iter().map(Num::Exact).collect(),
            AnyReport::Float(r) => r.per_step.iter().map(|&x| Num::Float(x)).collect(),
        }
    }

    fn total(&self) -> Num<'_> {
        match self {
            AnyReport::Exact(r) => Num::Exact(&r.total),
            AnyReport::Float(r) => Num::Float(r.total),
        }
    }

    fn p_one(&self) -> Num<'_> {
        match self {
            AnyReport::Exact(r) => Num::Exact(&r.p_one),
            AnyReport::Float(r) => Num::Float(r.p_one),
        }
    }

    fn by_value(&self, v: usize) -> Option<Num<'_>> {
        match self {
            AnyReport::Exact(r) => r.by_value[v].as_ref().map(Num::Exact),
            AnyReport::Float(r) => r.by_value[v].map(Num::Float),
        }
    }
}

fn load_function(a: &CostArgs) -> Result<BoolFn, CliError> {
    match (&a.function, &a.fn_file) {
        (Some(spec), None) => {
            let n = a.n.ok_or_else(|| CliError::Usage("--fn needs --n".into()))?;
            Ok(spec.build(n)?)
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            let f = parse_function(&text)?;
            if let Some(n) = a.n {
                if n != f.n() {
                    return Err(CliError::Usage(format!("--n {n} does not match the file's n = {}", f.n())));
                }
            }
            Ok(f)
        }
        _ => Err(CliError::Usage("give exactly one of --fn and --fn-file".into())),
    }
}

fn cmd_cost(a: &CostArgs) -> Result<Rendered, CliError> {
    let ch = check_alpha(a.alpha)?;
    let loss = match a.loss {
        LossArg::Quad => LossKind::Quadratic,
        LossArg::Log => LossKind::Logarithmic,
    };
    if a.mode == ModeArg::Exact && a.alpha != 0.0 {
        return Err(CliError::Domain("exact mode needs --alpha 0".into()));
    }
    let f = load_function(a)?;
    let symmetric = match &f {
        BoolFn::Symmetric(s) => Some(s.clone()),
        BoolFn::Table(t) => t.detect_symmetric(),
    };
    let (engine, report) = match (&symmetric, a.mode) {
        (Some(s), ModeArg::Exact) => ("symmetric", AnyReport::Exact(seq_cost_symmetric_noiseless(s, loss)?)),
        (Some(s), ModeArg::Float) => ("symmetric", AnyReport::Float(seq_cost_symmetric(s, ch, loss)?)),
        (None, mode) => {
            let table = f.to_truth_table()?;
            match mode {
                ModeArg::Exact => ("dense", AnyReport::Exact(seq_cost_noiseless(&table, loss)?)),
                ModeArg::Float => ("dense", AnyReport::Float(seq_cost(&table, ch, loss)?)),
            }
        }
    };
    let text = match a.output.format {
        Format::Json => json_text(json!({
            "schema": SCHEMA,
            "command": "cost",
            "n": f.n(),
            "alpha": a.alpha,
            "loss": match a.loss { LossArg::Quad => "quad", LossArg::Log => "log" },
            "mode": match a.mode { ModeArg::Exact => "exact", ModeArg::Float => "float" },
            "engine": engine,
            "per_step": report.per_step().iter().map(Num::json).collect::<Vec<_>>(),
            "total": report.total().json(),
            "cost_given_0": report.by_value(0).map_or(Value::Null, |v| v.json()),
            "cost_given_1": report.by_value(1).map_or(Value::Null, |v| v.json()),
            "p_one": report.p_one().json(),
        })),
        Format::Csv => {
            let mut lines = vec![CSV_HEADER.to_string(), "quantity,step,value".to_string()];
            for (k, v) in report.per_step().iter().enumerate() {
                lines.push(format!("step,{},{}", k + 1, v.csv()));
            }
            lines.push(format!("total,,{}", report.total().csv()));
            for v in 0..2 {
                lines.push(format!(
                    "cost_given_{v},,{}",
                    report.by_value(v).map_or(String::new(), |x| x.csv())
                ));
            }
            lines.push(format!("p_one,,{}", report.p_one().csv()));
            lines.join("\n") + "\n"
        }
    };
    Ok(Rendered { text, passed: true })
}

fn cmd_table1(a: &Table1Args) -> Result<Rendered, CliError> {
    if a.n_max.is_multiple_of(2) || !(3..=11).contains(&a.n_max) {
        return Err(CliError::Domain(format!("--n-max {} must be odd and within 3..=11", a.n_max)));
    }
    let rows = table1_rows(a.n_max)?;
    let text = match a.output.format {
        Format::Csv => {
            let mut lines =
                vec![CSV_HEADER.to_string(), "n,smse_majority,smse_optimal,excess,lower_bound".to_string()];
            for r in &rows {
                lines.push(format!(
                    "{},{},{},{},{:.4}",
                    r.n,
                    format_decimals(&r.majority, 4),
                    format_decimals(&r.optimum, 4),
                    format_decimals(&r.excess, 4),
                    r.lower_bound
                ));
            }
            lines.join("\n") + "\n"
        }
        Format::Json => {
            let to_f = |r: &ExactRational| boolpred::numerics::to_f64(r);
            let rows: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "n": r.n,
                        "smse_majority": to_f(&r.majority),
                        "smse_optimal": to_f(&r.optimum),
                        "excess": to_f(&r.excess),
                        "lower_bound": r.lower_bound,
                        "optimal_weight": r.optimum_weight.0,
                    })
                })
                .collect();
            json_text(json!({ "schema": SCHEMA, "command": "table1", "rows": rows }))
        }
    };
    Ok(Rendered { text, passed: true })
}

fn sweep_grid(a: &SweepArgs) -> Vec<f64> {
    match &a.alphas {
        Some(list) => list.clone(),
        None => {
            let steps = a.steps.max(1);
            (0..=steps).map(|i| 0.5 * i as f64 / steps as f64).collect()
        }
    }
}

const BOUND_FIELDS: [&str; 10] = [
    "noiseless_lb",
    "maj_noiseless_ub_leading",
    "dic_noiseless",
    "noisy_lb",
    "maj_noisy_ub_leading",
    "maj_noisy_lb_leading",
    "dic_noisy",
    "mu_alpha",
    "h_maj_gaussian",
    "h_maj_quadratic_lb",
];

struct SweepRow {
    bounds: BoundSet,
    maj_cost: f64,
    dic_cost: f64,
}

fn cmd_sweep(n: u32, grid: &[f64], format: Format, command: &str) -> Result<Rendered, CliError> {
    if grid.is_empty() {
        return Err(CliError::Usage("empty alpha grid".into()));
    }
    let maj = SymmetricProfile::majority(n, TieRule::Ones)?;
    let rows: Vec<SweepRow> = grid
        .iter()
        .map(|&alpha| {
            let ch = check_alpha(alpha)?;
            let bounds = bound_set(n, alpha)?;
            Ok(SweepRow {
                maj_cost: seq_cost_symmetric(&maj, ch, LossKind::Quadratic)?.total,
                dic_cost: bounds.dic_noisy.value,
                bounds,
            })
        })
        .collect::<Result<_, CliError>>()?;
    let text = match format {
        Format::Json => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|r| {
                    let mut obj = match serde_json::to_value(&r.bounds).expect("bounds serialize") {
                        Value::Object(m) => m,
                        _ => Map::new(),
                    };
                    obj.insert("maj_cost".into(), json!(r.maj_cost));
                    obj.insert("dic_cost".into(), json!(r.dic_cost));
                    Value::Object(obj)
                })
                .collect();
            json_text(json!({ "schema": SCHEMA, "command": command, "n": n, "rows": rows }))
        }
        Format::Csv => {
            let flagged: Vec<&str> =
                BOUND_FIELDS.iter().copied().filter(|&f| field(&rows[0].bounds, f).1).collect();
            let mut lines = vec![
                CSV_HEADER.to_string(),
                format!("# asymptotic: {}", flagged.join(",")),
                format!("n,alpha,{},maj_cost,dic_cost", BOUND_FIELDS.join(",")),
            ];
            for r in &rows {
                let cells: Vec<String> = BOUND_FIELDS
                    .iter()
                    .map(|&f| field(&r.bounds, f).0.map_or(String::new(), float_csv))
                    .collect();
                lines.push(format!(
                    "{n},{},{},{},{}",
                    float_csv(r.bounds.alpha),
                    cells.join(","),
                    float_csv(r.maj_cost),
                    float_csv(r.dic_cost)
                ));
            }
            lines.join("\n") + "\n"
        }
    };
    Ok(Rendered { text, passed: true })
}

/// Value and asymptotic flag of a named [`BoundSet`] entry.
fn field(b: &BoundSet, name: &str) -> (Option<f64>, bool) {
    let entry = match name {
        "noiseless_lb" => Some(b.noiseless_lb),
        "maj_noiseless_ub_leading" => Some(b.maj_noiseless_ub_leading),
        "dic_noiseless" => Some(b.dic_noiseless),
        "noisy_lb" => Some(b.noisy_lb),
        "maj_noisy_ub_leading" => Some(b.maj_noisy_ub_leading),
        "maj_noisy_lb_leading" => b.maj_noisy_lb_leading,
        "dic_noisy" => Some(b.dic_noisy),
        "mu_alpha" => Some(b.mu_alpha),
        "h_maj_gaussian" => b.h_maj_gaussian,
        "h_maj_quadratic_lb" => b.h_maj_quadratic_lb,
        _ => None,
    };
    // Entries absent at alpha = 0 are leading-term curves elsewhere.
    let flag = entry.is_none_or(|e| e.asymptotic);
    (entry.map(|e| e.value), flag)
}

struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn cmd_verify(a: &VerifyArgs) -> Result<Rendered, CliError> {
    if !(1..=4).contains(&a.n) {
        return Err(CliError::Domain(format!("verify needs 1 <= n <= 4, got {}", a.n)));
    }
    let n = a.n;
    let ch = check_alpha(a.alpha)?;
    let noiseless = ChannelParams::noiseless();
    let bounds = bound_set(n, a.alpha)?;
    let mut checks = Vec::new();

    let (_, min_value) = brute_force(n, Objective::MinSmse, noiseless, None)?;
    let dp = dp_optimal(n)?;
    let dp_min = dp.optimum().1.clone();
    checks.push(Check {
        name: "dp_matches_exhaustive_minimum",
        passed: min_value == ObjectiveValue::Exact(dp_min.clone()),
        detail: format!("min = {dp_min}"),
    });

    // One pass over every function for the universal inequalities.
    let len = 1usize << n;
    let mi_cap = 1.0 - binent(a.alpha)?;
    let mut noiseless_margin = f64::INFINITY;
    let mut noisy_margin = f64::INFINITY;
    let mut mi_violators: Vec<String> = Vec::new();
    for code in 0u64..1 << len {
        let t = TruthTable::from_fn(n, |i| (code >> i) & 1 == 1)?;
        let exact = boolpred::numerics::to_f64(&seq_cost_noiseless(&t, LossKind::Quadratic)?.total);
        noiseless_margin = noiseless_margin.min(exact - bounds.noiseless_lb.value);
        let noisy = seq_cost(&t, ch, LossKind::Quadratic)?.total;
        noisy_margin = noisy_margin.min(noisy - bounds.noisy_lb.value);
        if mutual_information(&t, ch)? > mi_cap + 1e-12 {
            mi_violators.push(t.to_hex());
        }
    }
    checks.push(Check {
        name: "noiseless_lower_bound",
        passed: noiseless_margin >= 0.0,
        detail: format!("smallest margin {}", float_csv(noiseless_margin)),
    });
    checks.push(Check {
        name: "noisy_lower_bound",
        passed: noisy_margin >= -1e-12,
        detail: format!("smallest margin {}", float_csv(noisy_margin)),
    });
    checks.push(Check {
        name: "mutual_information_at_most_dictator",
        passed: mi_violators.is_empty(),
        detail: if mi_violators.is_empty() {
            format!("no function exceeds {}", float_csv(mi_cap))
        } else {
            format!("violators: {}", mi_violators.join(" "))
        },
    });

    let (best, value) = brute_force(n, Objective::MaxMi, ch, None)?;
    let dictator = TruthTable::dictator(n, 1)?;
    let dictator_mi = mutual_information(&dictator, ch)?;
    checks.push(Check {
        name: "dictator_maximizes_mutual_information",
        passed: (value.to_f64() - mi_cap).abs() < 1e-10 && (dictator_mi - mi_cap).abs() < 1e-10,
        detail: format!("max {} attained by {}", float_csv(value.to_f64()), best.to_hex()),
    });

    let (best, value) = brute_force(n, Objective::MaxSmse, noiseless, Some(FnWeight(1 << (n - 1))))?;
    let dictator_cost = seq_cost_noiseless(&dictator, LossKind::Quadratic)?.total;
    let target = ExactRational::new((n as i64 - 1).into(), 4.into());
    checks.push(Check {
        name: "dictator_maximizes_balanced_smse",
        passed: value == ObjectiveValue::Exact(target.clone()) && dictator_cost == target,
        detail: format!("max {target} attained by {}", best.to_hex()),
    });

    let mut pinsker_worst = f64::INFINITY;
    for i in 1..=100 {
        for j in 1..=98 {
            let (p, q) = (i as f64 / 101.0, j as f64 / 99.0);
            let gap = bindiv(p, q)? - 2.0 / std::f64::consts::LN_2 * (p - q).powi(2);
            pinsker_worst = pinsker_worst.min(gap);
        }
    }
    checks.push(Check {
        name: "pinsker_grid",
        passed: pinsker_worst >= -1e-15,
        detail: format!("smallest gap {}", float_csv(pinsker_worst)),
    });

    let passed = checks.iter().all(|c| c.passed);
    let status = |ok: bool| if ok { "PASS" } else { "FAIL" };
    let text = match a.output.format {
        Format::Csv => {
            let mut lines = vec![CSV_HEADER.to_string(), "check,status,detail".to_string()];
            for c in &checks {
                lines.push(format!("{},{},{}", c.name, status(c.passed), c.detail));
            }
            lines.join("\n") + "\n"
        }
        Format::Json => json_text(json!({
            "schema": SCHEMA,
            "command": "verify",
            "n": n,
            "alpha": a.alpha,
            "passed": passed,
            "checks": checks
                .iter()
                .map(|c| json!({ "name": c.name, "status": status(c.passed), "detail": c.detail }))
                .collect::<Vec<_>>(),
        })),
    };
    Ok(Rendered { text, passed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fn_spec_grammar() {
        assert_eq!("dictator".parse(), Ok(FnSpec::Dictator(1)));
        assert_eq!("dictator:3".parse(), Ok(FnSpec::Dictator(3)));
        assert_eq!("maj_q:0.25".parse(), Ok(FnSpec::MajQ(0.25)));
        assert_eq!("constant1".parse(), Ok(FnSpec::Constant(true)));
        assert!("dictator:x".parse::<FnSpec>().is_err());
        assert!("maj_q".parse::<FnSpec>().is_err());
        assert!("majority:2".parse::<FnSpec>().is_err());
        assert!("xor".parse::<FnSpec>().is_err());
    }

    #[test]
    fn rounding() {
        assert_eq!(round_sig(23.0 / 48.0), 0.479166666667);
        assert_eq!(round_sig(0.0), 0.0);
        assert_eq!(float_csv(1.25), "1.25");
        assert_eq!(float_csv(-0.0), "0");
        assert_eq!(float_csv(2.906206134634e-12), "2.90620613463e-12");
        assert_eq!(round_json(json!({"a": [1.0 / 3.0, 2]})), json!({"a": [0.333333333333, 2]}));
    }

    #[test]
    fn error_codes() {
        assert_eq!(CliError::from(boolpred::Error::Parse("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(boolpred::Error::Domain("x".into())).exit_code(), 3);
    }
}
