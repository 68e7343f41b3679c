use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use downcore::check::{parse_suites, run_suite, Suite};
use downcore::halfline::StepFunctionRecord;
use downcore::kfunc::{decomposition_gamma_grid, k_via_decomposition, parse_t_range, GAP_REFINEMENTS};
use downcore::oracle::{k_exhaustive, level_defining_sup, sup_decreasing_pball, OracleOptions};
use downcore::{
    decompose_d, down_norm_with_witness, enrich, gamma_set, k_curve, least_core_decreasing_majorant, level_function,
    q_map, r_map, tilde_norm, CoredSpace, Couple, DownWitness, Execution, Exponent, FunctionOnU, Instance,
};
use serde_json::{json, Value};

const EXIT_VALIDATION: u8 = 1;
const EXIT_SUITE: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_NO_INPUT: u8 = 66;

/// Level functions, down norms and K-functionals on cored measure spaces.
///
/// Instances are JSON files of the form
/// {"points": [{"id", "weight"}...], "chain": [[ids]...], "functions": {"f": [...]}}.
/// Pass `-` or omit the path to read from standard input.
#[derive(Parser)]
#[command(name = "downcore", version)]
struct Cli {
    /// Replace the space by the union of the chain instead of rejecting non-full chains.
    #[arg(long, global = true)]
    restrict: bool,
    /// Function to operate on (default: the only one, else `f`).
    #[arg(long, global = true)]
    function: Option<String>,
    /// Evaluate independent work items one at a time.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// Instance JSON file.
    instance: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Fast,
    Oracle,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct KArgs {
    #[arg(long, value_parser = parse_couple)]
    couple: Couple,
    /// Grid `a:b:n` of n equispaced values.
    #[arg(long = "t", value_parser = parse_grid)]
    t: TGrid,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct OracleArgs {
    /// Give up after this many milliseconds.
    #[arg(long)]
    deadline_ms: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Check an instance and report its atoms.
    Validate(Input),
    /// Canonical chain: leading empty set, duplicates removed.
    Enrich(Input),
    /// Level function f° with its leveling blocks.
    Level(Input),
    /// Least core decreasing majorant of |f|.
    Majorant(Input),
    /// The decomposition function D_f(γ); f must be nonnegative.
    Decompose {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        gamma: f64,
    },
    /// Norm of f in the down space of L^p.
    DownNorm {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_parser = parse_exponent)]
        p: Exponent,
        #[arg(long, value_enum, default_value = "fast")]
        method: Method,
        #[command(flatten)]
        oracle: OracleArgs,
    },
    /// Norm of the least core decreasing majorant in L^p.
    TildeNorm {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_parser = parse_exponent)]
        p: Exponent,
    },
    /// Move functions between the space and the half-line.
    #[command(subcommand)]
    Transfer(Transfer),
    /// K-functional curve on a grid of t values.
    Kfunc {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        k: KArgs,
        #[arg(long, value_enum, default_value = "fast")]
        method: Method,
        /// Split grid per point for exhaustive search.
        #[arg(long, default_value_t = 32)]
        grid: usize,
    },
    /// Slow reference computations.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Run randomized property suites.
    Check {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, env = "DOWNCORE_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        cases: usize,
    },
}

#[derive(Subcommand)]
enum Transfer {
    /// R: average f over atoms, giving a step function on the half-line.
    R(Input),
    /// Q: spread a half-line step function back onto the points.
    Q {
        #[command(flatten)]
        input: Input,
        /// Step function JSON {"positions", "masses", "values"}.
        #[arg(long)]
        step: PathBuf,
    },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Down norm as a supremum over the dual ball.
    DownNorm {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_parser = parse_exponent)]
        p: Exponent,
        #[command(flatten)]
        oracle: OracleArgs,
    },
    /// Linear program behind the level-defining identity for a core decreasing g.
    LevelSup {
        #[command(flatten)]
        input: Input,
        /// Name of g among the instance functions.
        #[arg(long)]
        g: String,
        #[command(flatten)]
        oracle: OracleArgs,
    },
    /// K-functional by decomposition (l1-dinf) or exhaustive split search.
    Kfunc {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        k: KArgs,
        #[arg(long, default_value_t = 32)]
        grid: usize,
    },
}

fn parse_exponent(s: &str) -> Result<Exponent, String> {
    Exponent::from_str(s).map_err(|e| e.to_string())
}

fn parse_couple(s: &str) -> Result<Couple, String> {
    Couple::from_str(s).map_err(|e| e.to_string())
}

#[derive(Clone)]
struct TGrid(Vec<f64>);

fn parse_grid(s: &str) -> Result<TGrid, String> {
    parse_t_range(s).map(TGrid).map_err(|e| e.to_string())
}

enum Failure {
    Usage(String),
    Data(String),
    NoInput(String),
    Invalid(downcore::Error),
    Suite(String),
}

impl From<downcore::Error> for Failure {
    fn from(e: downcore::Error) -> Self {
        Failure::Invalid(e)
    }
}

type Outcome = Result<String, Failure>;

struct Context {
    restrict: bool,
    function: Option<String>,
    exec: Execution,
}

struct Loaded {
    instance: Instance,
    cs: CoredSpace,
}

impl Context {
    fn load(&self, input: &Input) -> Result<Loaded, Failure> {
        let text = read_input(input.instance.as_deref())?;
        let mut instance = Instance::from_json(&text).map_err(|e| Failure::Data(format!("malformed instance: {e}")))?;
        if self.restrict {
            instance = instance.restricted()?;
        }
        let cs = instance.cored_space()?;
        Ok(Loaded { instance, cs })
    }

    fn function(&self, loaded: &Loaded) -> Result<FunctionOnU, Failure> {
        Ok(loaded.instance.function(&loaded.cs, self.function.as_deref())?)
    }
}

fn read_input(path: Option<&Path>) -> Result<String, Failure> {
    match path {
        None => read_stdin(),
        Some(p) if p == Path::new("-") => read_stdin(),
        Some(p) => fs::read_to_string(p).map_err(|e| Failure::NoInput(format!("{}: {e}", p.display()))),
    }
}

fn read_stdin() -> Result<String, Failure> {
    let mut s = String::new();
    io::stdin().read_to_string(&mut s).map_err(|e| Failure::NoInput(format!("stdin: {e}")))?;
    Ok(s)
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json values serialize") + "\n"
}

/// Non-finite numbers become `null`.
fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn ids_of(cs: &CoredSpace, points: impl IntoIterator<Item = usize>) -> Vec<String> {
    let ids = cs.space().ids();
    points.into_iter().map(|u| ids[u].clone()).collect()
}

fn level_json(cs: &CoredSpace, f: &FunctionOnU) -> Result<Value, Failure> {
    let lv = level_function(cs, f)?;
    let blocks: Vec<Value> = lv
        .blocks
        .iter()
        .zip(&lv.hull.slopes)
        .map(|(b, &slope)| {
            let points = b.clone().flat_map(|j| cs.atoms().members(j).to_vec());
            json!({"atoms": [b.start, b.end], "points": ids_of(cs, points), "value": slope})
        })
        .collect();
    Ok(json!({"ids": cs.space().ids(), "level": lv.level.values(), "blocks": blocks}))
}

fn oracle_options(args: &OracleArgs) -> OracleOptions {
    OracleOptions {
        deadline: args.deadline_ms.map(|ms| Instant::now() + Duration::from_millis(ms)),
        ..OracleOptions::default()
    }
}

fn k_output(k: &KArgs, values: &[f64]) -> String {
    match k.format {
        Format::Csv => {
            let mut out = String::from("t,value\n");
            for (t, v) in k.t.0.iter().zip(values) {
                out.push_str(&format!("{t},{v}\n"));
            }
            out
        }
        Format::Json => pretty(&json!({"couple": k.couple.to_string(), "t": k.t.0, "values": values})),
    }
}

fn k_oracle(ctx: &Context, input: &Input, k: &KArgs, grid: usize) -> Outcome {
    let loaded = ctx.load(input)?;
    let f = ctx.function(&loaded)?;
    let cs = &loaded.cs;
    let values = match k.couple {
        Couple::L1DownInf => {
            let gammas = decomposition_gamma_grid(cs, &f, GAP_REFINEMENTS)?;
            k.t.0.iter().map(|&t| k_via_decomposition(cs, &f, t, &gammas)).collect::<Result<Vec<_>, _>>()?
        }
        couple => {
            k.t.0
                .iter()
                .map(|&t| k_exhaustive(cs, &f, t, couple, grid, ctx.exec).map(|r| r.value))
                .collect::<Result<Vec<_>, _>>()?
        }
    };
    Ok(k_output(k, &values))
}

fn run(cli: Cli) -> Outcome {
    let ctx = Context {
        restrict: cli.restrict,
        function: cli.function,
        exec: if cli.sequential { Execution::Sequential } else { Execution::Parallel },
    };
    match cli.command {
        Command::Validate(input) => {
            let loaded = ctx.load(&input)?;
            let cs = &loaded.cs;
            for name in loaded.instance.functions.keys() {
                loaded.instance.function(cs, Some(name))?;
            }
            let atoms: Vec<Vec<String>> =
                (0..cs.k()).map(|j| ids_of(cs, cs.atoms().members(j).iter().copied())).collect();
            Ok(pretty(&json!({
                "valid": true,
                "points": cs.n(),
                "atoms": atoms,
                "gamma": gamma_set(cs.atoms()),
            })))
        }
        Command::Enrich(input) => {
            let text = read_input(input.instance.as_deref())?;
            let mut instance =
                Instance::from_json(&text).map_err(|e| Failure::Data(format!("malformed instance: {e}")))?;
            if ctx.restrict {
                instance = instance.restricted()?;
            }
            let space = instance.space()?;
            let spec = enrich(&space, &instance.core_spec(&space)?)?;
            let chain: Vec<Vec<String>> = spec.chain.iter().map(|s| ids_of_space(&space, s)).collect();
            let gamma: Vec<f64> = spec.chain.iter().map(|s| space.measure_of(s)).collect();
            Ok(pretty(&json!({"chain": chain, "gamma": gamma})))
        }
        Command::Level(input) => {
            let loaded = ctx.load(&input)?;
            let f = ctx.function(&loaded)?;
            Ok(pretty(&level_json(&loaded.cs, &f)?))
        }
        Command::Majorant(input) => {
            let loaded = ctx.load(&input)?;
            let f = ctx.function(&loaded)?;
            let g = least_core_decreasing_majorant(&loaded.cs, &f)?;
            Ok(pretty(&json!({"ids": loaded.cs.space().ids(), "majorant": g.values()})))
        }
        Command::Decompose { input, gamma } => {
            let loaded = ctx.load(&input)?;
            let f = ctx.function(&loaded)?;
            let d = decompose_d(&loaded.cs, &f, gamma)?;
            Ok(pretty(&json!({
                "gamma": d.gamma,
                "a_gamma": d.a_gamma,
                "b_gamma": num(d.b_gamma),
                "lower_set": d.lower_set,
                "upper_set": d.upper_set,
                "ids": loaded.cs.space().ids(),
                "d": d.d.values(),
            })))
        }
        Command::DownNorm { input, p, method, oracle } => {
            let loaded = ctx.load(&input)?;
            let f = ctx.function(&loaded)?;
            let cs = &loaded.cs;
            if method == Method::Oracle {
                let norm = sup_decreasing_pball(cs, &f, p.conjugate(), &oracle_options(&oracle))?;
                return Ok(pretty(&json!({"norm": norm, "method": "oracle"})));
            }
            let dn = down_norm_with_witness(cs, &f, p)?;
            let witness = match dn.witness {
                DownWitness::ConstantOne => json!({"kind": "constant-one"}),
                DownWitness::ChainSet { chain_index, points } => {
                    json!({"kind": "chain-set", "chain_index": chain_index, "points": ids_of(cs, points)})
                }
                DownWitness::Level(_) => {
                    let mut v = level_json(cs, &f)?;
                    v["kind"] = json!("level");
                    v
                }
            };
            Ok(pretty(&json!({"norm": dn.norm, "witness": witness})))
        }
        Command::TildeNorm { input, p } => {
            let loaded = ctx.load(&input)?;
            let f = ctx.function(&loaded)?;
            let norm = tilde_norm(&loaded.cs, &f, p)?;
            let g = least_core_decreasing_majorant(&loaded.cs, &f)?;
            Ok(pretty(&json!({"norm": norm, "majorant": g.values()})))
        }
        Command::Transfer(Transfer::R(input)) => {
            let loaded = ctx.load(&input)?;
            let f = ctx.function(&loaded)?;
            let phi = r_map(&loaded.cs, &f)?;
            let record = phi.to_record(&loaded.cs.tailored_measure());
            Ok(pretty(&json!({"positions": record.positions, "masses": record.masses, "values": record.values})))
        }
        Command::Transfer(Transfer::Q { input, step }) => {
            let loaded = ctx.load(&input)?;
            let text = read_input(Some(&step))?;
            let record: StepFunctionRecord =
                serde_json::from_str(&text).map_err(|e| Failure::Data(format!("malformed step function: {e}")))?;
            let (m, phi) = record.into_parts()?;
            let own = loaded.cs.tailored_measure();
            let same = m.positions().len() == own.positions().len()
                && m.positions().iter().zip(own.positions()).all(|(a, b)| (a - b).abs() <= 1e-12 * b.max(1.0));
            if !same {
                return Err(Failure::Invalid(downcore::Error::Instance(
                    "step function positions differ from the instance's chain measures".into(),
                )));
            }
            let f = q_map(&loaded.cs, &phi)?;
            Ok(pretty(&json!({"ids": loaded.cs.space().ids(), "values": f.values()})))
        }
        Command::Kfunc { input, k, method: Method::Oracle, grid } => k_oracle(&ctx, &input, &k, grid),
        Command::Kfunc { input, k, method: Method::Fast, .. } => {
            let loaded = ctx.load(&input)?;
            let f = ctx.function(&loaded)?;
            let curve = k_curve(k.couple, &loaded.cs, &f, &k.t.0, ctx.exec)?;
            Ok(k_output(&k, &curve.values))
        }
        Command::Oracle(OracleCommand::DownNorm { input, p, oracle }) => {
            let loaded = ctx.load(&input)?;
            let f = ctx.function(&loaded)?;
            let norm = sup_decreasing_pball(&loaded.cs, &f, p.conjugate(), &oracle_options(&oracle))?;
            Ok(pretty(&json!({"norm": norm, "method": "oracle"})))
        }
        Command::Oracle(OracleCommand::LevelSup { input, g, oracle }) => {
            let loaded = ctx.load(&input)?;
            let f = ctx.function(&loaded)?;
            let g = loaded.instance.function(&loaded.cs, Some(&g))?;
            let sup = level_defining_sup(&loaded.cs, &f, &g, &oracle_options(&oracle))?;
            let level = level_function(&loaded.cs, &f)?.level;
            Ok(pretty(&json!({"sup": sup, "level_pairing": loaded.cs.integral_product(&level, &g)})))
        }
        Command::Oracle(OracleCommand::Kfunc { input, k, grid }) => k_oracle(&ctx, &input, &k, grid),
        Command::Check { suite, seed, cases } => {
            let suites: Vec<Suite> = parse_suites(&suite).map_err(|e| Failure::Usage(e.to_string()))?;
            let reports: Vec<_> = suites.iter().map(|&s| run_suite(s, seed, cases, ctx.exec)).collect();
            let failed =
                reports.iter().filter_map(|r| r.minimal_failure()).min_by_key(|f| (f.instance.points.len(), f.case));
            if let Some(f) = failed {
                let total: usize = reports.iter().map(|r| r.failures.len()).sum();
                eprintln!(
                    "{total} property failure(s); smallest: suite {} case {} `{}`: {}",
                    f.suite, f.case, f.property, f.detail
                );
                return Err(Failure::Suite(pretty(&serde_json::to_value(&f.instance).expect("instances serialize"))));
            }
            let summary: Vec<Value> = reports
                .iter()
                .map(|r| json!({"suite": r.suite.name(), "cases": r.cases, "checks": r.checks, "failures": 0}))
                .collect();
            Ok(pretty(&json!({"seed": seed, "passed": true, "suites": summary})))
        }
    }
}

fn ids_of_space(space: &downcore::MeasureSpace, set: &std::collections::BTreeSet<usize>) -> Vec<String> {
    set.iter().map(|&u| space.ids()[u].clone()).collect()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = run(cli);
    let mut stdout = io::stdout().lock();
    match outcome {
        Ok(text) => {
            let _ = stdout.write_all(text.as_bytes());
            ExitCode::SUCCESS
        }
        Err(Failure::Suite(instance)) => {
            let _ = stdout.write_all(instance.as_bytes());
            ExitCode::from(EXIT_SUITE)
        }
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_VALIDATION)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_DATA)
        }
        Err(Failure::NoInput(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_NO_INPUT)
        }
    }
}
