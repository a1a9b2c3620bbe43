use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use oracle_lab::checkers::{replay_witness, seeded_family, CheckParams, CheckReport, Reducibility};
use oracle_lab::deduction::{DeductionMode, FinitePartialOracle};
use oracle_lab::experiment::{
    run_check, run_deduction, run_experiment, run_recovery, CheckItem, CorruptionTarget, DeductionItem,
    ExperimentConfig, RecoveryAlgorithm, RecoveryItem, Registry, RunOptions, SigmaSource,
};
use oracle_lab::machine::run;
use oracle_lab::oracles::CorruptionSpec;
use oracle_lab::transformers::transform;

/// Partial-oracle reductions at desk scale.
///
/// Exit status: 0 when every verdict passes, 1 when one fails, 2 on a usage
/// or configuration error.
#[derive(Parser)]
#[command(name = "oracle-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check one reducibility for a functional and a pair A -> B.
    Check(CheckArgs),
    /// Recover a set from a corrupted coding of it.
    Recover(RecoverArgs),
    /// Apply a transformer and print the resulting term, optionally running it.
    Transform(TransformArgs),
    /// Compute deduction ranks for a functional.
    Deduce(DeduceArgs),
    /// Run an experiment config.
    Run(RunArgs),
    /// Re-execute the witnesses of a check report.
    Replay(ReplayArgs),
}

#[derive(Args)]
struct Common {
    /// Config whose sequences and functionals may be named by id.
    #[arg(long)]
    registry: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// mf, cf, g, cor, mr, ii or ubfb.
    reducibility: Reducibility,
    #[arg(long)]
    functional: String,
    #[arg(long)]
    a: String,
    #[arg(long)]
    b: String,
    /// Check parameters as JSON, or a path to a JSON file.
    #[arg(long)]
    params: Option<String>,
    #[arg(long)]
    budget: Option<u64>,
    /// Input window; the oracle window grows to match if smaller.
    #[arg(long)]
    window: Option<u64>,
    /// Generate a corruption family with this seed when the parameters name none.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 8)]
    family_size: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct RecoverArgs {
    /// generic-rtilde, coarse-rtilde, cofinite-r or mf-embedding.
    #[arg(value_parser = parse_algorithm)]
    algorithm: RecoveryAlgorithm,
    #[arg(long)]
    sequence: String,
    /// Corruption spec as JSON, or a path to a JSON file.
    #[arg(long)]
    corruption: Option<String>,
    /// Overrides the corruption spec's seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Target::Code)]
    corrupt: Target,
    #[arg(long, default_value_t = 16)]
    window: u64,
    #[arg(long)]
    budget: Option<u64>,
    /// The functional for mf-embedding.
    #[arg(long)]
    functional: Option<String>,
    #[arg(long)]
    defined_from: Option<u64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Code,
    Base,
}

#[derive(Args)]
struct TransformArgs {
    /// mf-to-ubfb or ubfb-to-cf.
    op: String,
    functional: String,
    /// Run the result on this oracle sequence.
    #[arg(long, requires = "input")]
    a: Option<String>,
    #[arg(long)]
    input: Option<u64>,
    #[arg(long, default_value_t = 10_000)]
    budget: u64,
    /// Print the trace as JSON lines.
    #[arg(long)]
    trace: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Threshold,
    Exact,
}

#[derive(Args)]
struct DeduceArgs {
    #[arg(long)]
    functional: String,
    #[arg(long, value_enum, default_value_t = Mode::Threshold)]
    mode: Mode,
    #[arg(long, default_value_t = 8)]
    t: u64,
    #[arg(long, default_value_t = 512)]
    position_bound: u64,
    #[arg(long, default_value_t = 1000)]
    budget: u64,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    inputs: Vec<u64>,
    /// Semicolon-separated finite oracles such as `{};{3:1,5:0}`.
    #[arg(long, conflicts_with = "random")]
    sigmas: Option<String>,
    /// Draw this many random oracles instead.
    #[arg(long)]
    random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest position of a random oracle (capped by the position bound).
    #[arg(long, default_value_t = 64)]
    window: u64,
    #[arg(long, default_value_t = 4)]
    max_relevant: usize,
    #[arg(long, default_value_t = 2)]
    max_other: usize,
    #[arg(long)]
    check_exact: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    /// Output directory; overrides the config's.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Args)]
struct ReplayArgs {
    report: PathBuf,
    /// Replay only this witness.
    #[arg(long)]
    witness: Option<usize>,
}

fn parse_algorithm(s: &str) -> Result<RecoveryAlgorithm, String> {
    serde_json::from_value(serde_json::Value::String(s.into())).map_err(|e| e.to_string())
}

fn json_arg(text: &str) -> Result<String> {
    if text.trim_start().starts_with('{') {
        Ok(text.to_string())
    } else {
        fs::read_to_string(text).with_context(|| format!("reading {text}"))
    }
}

fn registry(path: Option<&Path>) -> Result<Registry> {
    let mut reg = Registry::default();
    if let Some(p) = path {
        reg.declare(&ExperimentConfig::load(p)?).with_context(|| format!("registry {}", p.display()))?;
    }
    Ok(reg)
}

fn emit(out: Option<&Path>, value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn status(passed: bool) -> ExitCode {
    if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn check(a: CheckArgs) -> Result<ExitCode> {
    let reg = registry(a.common.registry.as_deref())?;
    let mut params = match &a.params {
        Some(p) => serde_json::from_str::<CheckParams>(&json_arg(p)?).context("--params")?,
        None => CheckParams::default(),
    };
    if let Some(b) = a.budget {
        params.budget = b;
    }
    if let Some(w) = a.window {
        params.input_window = w;
        params.oracle_window = params.oracle_window.max(w);
    }
    if let Some(seed) = a.seed {
        if params.corruption_family.is_empty() {
            params.corruption_family = seeded_family(a.reducibility, a.family_size, seed, &params);
        }
    }
    let item =
        CheckItem { id: "cli".into(), reducibility: a.reducibility, functional: a.functional, a: a.a, b: a.b, params };
    let report = run_check(&reg, &item)?;
    eprint!("{}", report.table());
    emit(a.common.out.as_deref(), &report)?;
    Ok(status(report.passed()))
}

fn recover(a: RecoverArgs) -> Result<ExitCode> {
    let reg = registry(a.common.registry.as_deref())?;
    let corruption = match &a.corruption {
        Some(c) => {
            let mut spec = CorruptionSpec::from_json(&json_arg(c)?).context("--corruption")?;
            if let Some(s) = a.seed {
                spec.seed = s;
            }
            Some(spec)
        }
        None => None,
    };
    let item = RecoveryItem {
        id: "cli".into(),
        algorithm: a.algorithm,
        sequence: a.sequence,
        corruption,
        corrupt: match a.corrupt {
            Target::Code => CorruptionTarget::Code,
            Target::Base => CorruptionTarget::Base,
        },
        window: a.window,
        budget: a.budget,
        functional: a.functional,
        defined_from: a.defined_from,
    };
    let report = run_recovery(&reg, &item)?;
    emit(a.common.out.as_deref(), &report)?;
    Ok(status(report.passed))
}

fn transform_cmd(a: TransformArgs) -> Result<ExitCode> {
    let reg = registry(a.common.registry.as_deref())?;
    let f = transform(&a.op, &reg.functional(&a.functional)?)?;
    let mut out = serde_json::json!({ "term": f.id() });
    if let (Some(seq), Some(n)) = (&a.a, a.input) {
        let oracle = reg.sequence(seq)?;
        let o = run(&f, &oracle, n, a.budget)?;
        out["input"] = n.into();
        out["result"] = serde_json::to_value(o.result)?;
        out["ticks"] = o.ticks.into();
        out["traceDigest"] = o.trace.digest().into();
        if a.trace {
            out["trace"] = o.trace.to_jsonl().into();
        }
    }
    emit(a.common.out.as_deref(), &out)?;
    Ok(ExitCode::SUCCESS)
}

fn deduce(a: DeduceArgs) -> Result<ExitCode> {
    let reg = registry(a.common.registry.as_deref())?;
    let mode = match a.mode {
        Mode::Threshold => DeductionMode::Threshold { t: a.t, position_bound: a.position_bound, budget: a.budget },
        Mode::Exact => DeductionMode::ExactCounting { budget: a.budget },
    };
    let sigmas = match (&a.sigmas, a.random) {
        (_, Some(count)) => SigmaSource::Random {
            count,
            seed: a.seed,
            bound: a.window,
            max_relevant: a.max_relevant,
            max_other: a.max_other,
        },
        (Some(text), None) => SigmaSource::Explicit(
            text.split(';')
                .map(|s| s.trim().parse::<FinitePartialOracle>())
                .collect::<Result<_, _>>()
                .context("--sigmas")?,
        ),
        (None, None) => SigmaSource::Explicit(vec![FinitePartialOracle::default()]),
    };
    let item = DeductionItem {
        id: "cli".into(),
        functional: a.functional,
        mode,
        inputs: a.inputs,
        sigmas,
        check_exact: a.check_exact,
    };
    let report = run_deduction(&reg, &item)?;
    emit(a.common.out.as_deref(), &report)?;
    Ok(status(report.passed))
}

fn run_cmd(a: RunArgs) -> Result<ExitCode> {
    let config = ExperimentConfig::load(&a.config).with_context(|| format!("config {}", a.config.display()))?;
    let summary = run_experiment(&config, &RunOptions { output_dir: a.out, no_timestamp: a.no_timestamp })?;
    print!("{}", summary.table());
    Ok(status(summary.passed))
}

fn replay(a: ReplayArgs) -> Result<ExitCode> {
    let text = fs::read_to_string(&a.report).with_context(|| format!("reading {}", a.report.display()))?;
    let report: CheckReport = serde_json::from_str(&text).context("not a check report")?;
    let picked: Vec<usize> = match a.witness {
        Some(i) if i < report.witnesses.len() => vec![i],
        Some(i) => bail!("--witness {i}: the report has {} witnesses", report.witnesses.len()),
        None => (0..report.witnesses.len()).collect(),
    };
    let mut all = true;
    let mut rows = Vec::new();
    for i in picked {
        let r = replay_witness(&report, &report.witnesses[i])?;
        all &= r.matches;
        rows.push(serde_json::json!({ "witness": i, "replay": r }));
    }
    emit(None, &rows)?;
    Ok(status(all))
}

fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("ORACLE_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v.parse().with_context(|| format!("ORACLE_LAB_THREADS={v}"))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads().and_then(|()| match cli.command {
        Command::Check(a) => check(a),
        Command::Recover(a) => recover(a),
        Command::Transform(a) => transform_cmd(a),
        Command::Deduce(a) => deduce(a),
        Command::Run(a) => run_cmd(a),
        Command::Replay(a) => replay(a),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
