//! Command-line front-end for the `np_universal` library.
//!
//! Exit codes: 0 on success, 2 for configuration errors (bad flags, bad
//! config files, invalid arguments), 3 for numeric-domain errors, 1 for
//! I/O failures. Output files are only created after a run succeeds.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use np_universal::bounds::alpha_bounds;
use np_universal::classifiers::{exact_error_probs, Rule, RuleContext, RuleSpec};
use np_universal::exponents::{
    alpha_star_numeric, mismatched_exponent, optimal_tradeoff, stein_exponents, threshold_gamma,
};
use np_universal::sequential::Ratio;
use np_universal::simulation::{
    figure_csv, fmt_sig, presets, run_alpha_sweep, run_fixed_experiment, run_sequential_experiment,
    sequential_to_csv, sweep_to_csv, ExperimentConfig, Figure, FigureOptions,
};
use np_universal::{Distribution, Error};

const SEED_ENV: &str = "NP_UNIVERSAL_SEED";

#[derive(Parser)]
#[command(
    name = "np-universal",
    version,
    about = "Universal Neyman-Pearson classification toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal tradeoff, Stein exponents and mismatched exponents (JSON).
    Exponents(ExponentsArgs),
    /// Interpolated classifier threshold γ(E0, Q1) (JSON).
    Threshold(ThresholdArgs),
    /// Lower and upper bounds on the critical training ratio (JSON).
    Bounds(BoundsArgs),
    /// Exact error probabilities by type-class enumeration (CSV).
    Oracle(OracleArgs),
    /// Fixed-length Monte Carlo experiment (CSV).
    SimulateFixed(FixedArgs),
    /// Sequential classifier Monte Carlo experiment (CSV).
    SimulateSeq(SeqArgs),
    /// Lower bound on the critical ratio over a grid of β (CSV).
    AlphaSweep(SweepArgs),
    /// Full CSV of a named figure preset.
    Figure(FigureArgs),
}

#[derive(Args)]
struct Output {
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Pair {
    /// Null distribution, comma-separated.
    #[arg(long, value_parser = parse_dist)]
    p0: Distribution,
    /// Alternative distribution, comma-separated.
    #[arg(long, value_parser = parse_dist)]
    p1: Distribution,
}

#[derive(Args)]
struct Run {
    /// Master seed; falls back to $NP_UNIVERSAL_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Args)]
struct ExponentsArgs {
    #[command(flatten)]
    pair: Pair,
    /// Type-I exponent constraint.
    #[arg(long)]
    e0: Option<f64>,
    /// Report the Stein-regime exponents for training ratio --alpha.
    #[arg(long)]
    stein: bool,
    /// Training-to-test ratio.
    #[arg(long, value_parser = parse_ratio)]
    alpha: Option<Ratio>,
    /// Estimate of P1 for the mismatched exponent.
    #[arg(long, value_parser = parse_dist)]
    q1: Option<Distribution>,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ThresholdArgs {
    #[arg(long, value_parser = parse_dist)]
    p0: Distribution,
    /// Estimate of the alternative.
    #[arg(long, value_parser = parse_dist)]
    q1: Distribution,
    #[arg(long)]
    e0: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    pair: Pair,
    #[arg(long)]
    e0: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Also compute the numerical critical ratio on a grid of this resolution (|X| <= 4).
    #[arg(long)]
    numeric: Option<usize>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    pair: Pair,
    #[arg(long)]
    e0: f64,
    /// Test length.
    #[arg(long)]
    n: u64,
    /// Training ratio; k = round(alpha·n).
    #[arg(long, value_parser = parse_ratio)]
    alpha: Ratio,
    /// Rules, e.g. `interp:beta=0.5,lrt,glrt`.
    #[arg(long, value_delimiter = ',', default_value = "interp,lrt,glrt")]
    rules: Vec<String>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct FixedArgs {
    /// JSON experiment config; flags given alongside override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_dist)]
    p0: Option<Distribution>,
    #[arg(long, value_parser = parse_dist)]
    p1: Option<Distribution>,
    #[arg(long)]
    e0: Option<f64>,
    /// Block lengths, comma-separated.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<u64>>,
    #[arg(long, value_parser = parse_ratio)]
    alpha: Option<Ratio>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    rules: Option<Vec<String>>,
    /// Print the resolved config as JSON instead of running it.
    #[arg(long)]
    print_config: bool,
    #[command(flatten)]
    run: Run,
    #[command(flatten)]
    output: Output,
}

/// Configuration of a sequential experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeqConfig {
    p0: Distribution,
    p1: Distribution,
    alpha: String,
    penalty: bool,
    n_grid: Vec<u64>,
    trials: u64,
    master_seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

impl From<Switch> for bool {
    fn from(s: Switch) -> bool {
        matches!(s, Switch::On)
    }
}

#[derive(Args)]
struct SeqArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_dist)]
    p0: Option<Distribution>,
    #[arg(long, value_parser = parse_dist)]
    p1: Option<Distribution>,
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<u64>>,
    #[arg(long, value_parser = parse_ratio)]
    alpha: Option<Ratio>,
    #[arg(long)]
    trials: Option<u64>,
    /// Threshold penalty (4|X|+4)·ln(t+1).
    #[arg(long, value_enum)]
    penalty: Option<Switch>,
    #[arg(long)]
    print_config: bool,
    #[command(flatten)]
    run: Run,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    pair: Pair,
    #[arg(long)]
    e0: f64,
    /// β grid, comma-separated and increasing; defaults to 0.01..=1 in steps of 0.01.
    #[arg(long, value_delimiter = ',')]
    beta: Option<Vec<f64>>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct FigureArgs {
    /// fig2, fig3, fig5 or fig6.
    #[arg(value_parser = parse_figure)]
    name: Figure,
    #[arg(long)]
    trials: Option<u64>,
    /// Override the preset block lengths.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<u64>>,
    #[arg(long, value_enum)]
    penalty: Option<Switch>,
    #[command(flatten)]
    run: Run,
    #[command(flatten)]
    output: Output,
}

fn parse_dist(s: &str) -> Result<Distribution, String> {
    let probs = s
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("'{v}': {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    Distribution::new(probs).map_err(|e| e.to_string())
}

fn parse_ratio(s: &str) -> Result<Ratio, String> {
    s.parse::<Ratio>().map_err(|e| e.to_string())
}

fn parse_figure(s: &str) -> Result<Figure, String> {
    s.parse::<Figure>().map_err(|e| e.to_string())
}

enum Failure {
    Config(String),
    Io(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type CliResult<T> = Result<T, Failure>;

fn seed(flag: Option<u64>) -> CliResult<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Config(format!("{SEED_ENV}='{v}' is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

fn json_text(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn read_config<T: for<'de> Deserialize<'de>>(path: &PathBuf) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn missing(flag: &str) -> Failure {
    Failure::Config(format!("missing --{flag} (or a --config file)"))
}

fn rule_specs(names: &[String]) -> CliResult<Vec<RuleSpec>> {
    Ok(names
        .iter()
        .map(|r| RuleSpec::parse(r))
        .collect::<Result<Vec<_>, _>>()?)
}

fn exponents(a: ExponentsArgs) -> CliResult<String> {
    let Pair { p0, p1 } = a.pair;
    let mut out = serde_json::Map::new();
    if let Some(e0) = a.e0 {
        out.insert(
            "tradeoff".into(),
            serde_json::to_value(optimal_tradeoff(&p0, &p1, e0)?).unwrap(),
        );
        if let Some(q1) = &a.q1 {
            out.insert(
                "mismatched".into(),
                json!(mismatched_exponent(&p0, &p1, q1, e0, a.beta)?),
            );
        }
    } else if a.q1.is_some() {
        return Err(missing("e0"));
    }
    if a.stein {
        let alpha = a.alpha.ok_or_else(|| missing("alpha"))?;
        let (e1, e0) = stein_exponents(&p0, &p1, alpha.value())?;
        out.insert(
            "stein".into(),
            json!({ "alpha": alpha.value(), "e1": e1, "e0": e0 }),
        );
    }
    if out.is_empty() {
        return Err(Failure::Config(
            "nothing to compute: give --e0 and/or --stein".into(),
        ));
    }
    Ok(json_text(&Value::Object(out)))
}

fn threshold(a: ThresholdArgs) -> CliResult<String> {
    let gamma = threshold_gamma(&a.p0, &a.q1, a.e0, a.beta)?;
    Ok(json_text(
        &json!({ "e0": a.e0, "beta": a.beta, "gamma": gamma }),
    ))
}

fn bounds(a: BoundsArgs) -> CliResult<String> {
    let Pair { p0, p1 } = a.pair;
    let b = alpha_bounds(&p0, &p1, a.e0, a.beta)?;
    let mut v = serde_json::to_value(b).unwrap();
    if let Some(res) = a.numeric {
        v["numeric"] = json!(alpha_star_numeric(&p0, &p1, a.e0, a.beta, res)?);
    }
    Ok(json_text(&v))
}

fn oracle(a: OracleArgs) -> CliResult<String> {
    let Pair { p0, p1 } = a.pair;
    let ctx = RuleContext {
        p0: p0.clone(),
        p1: p1.clone(),
        e0: a.e0,
    };
    let k = a.alpha.round_mul(a.n);
    let specs = rule_specs(&a.rules)?;
    let rules = specs
        .iter()
        .map(|s| Rule::resolve(s, &ctx))
        .collect::<Result<Vec<_>, _>>()?;
    let mut csv = String::from("rule,n,k,eps0,eps1\n");
    for (spec, rule) in specs.iter().zip(&rules) {
        let e = exact_error_probs(rule, &p0, &p1, a.n, k)?;
        csv.push_str(&format!(
            "{spec},{},{k},{},{}\n",
            a.n,
            fmt_sig(e.eps0),
            fmt_sig(e.eps1)
        ));
    }
    Ok(csv)
}

fn fixed_config(a: &FixedArgs) -> CliResult<ExperimentConfig> {
    let mut cfg = match &a.config {
        Some(path) => read_config::<ExperimentConfig>(path)?,
        None => ExperimentConfig {
            p0: a.p0.clone().ok_or_else(|| missing("p0"))?,
            p1: a.p1.clone().ok_or_else(|| missing("p1"))?,
            e0: a.e0.ok_or_else(|| missing("e0"))?,
            n_grid: a.n.clone().ok_or_else(|| missing("n"))?,
            alpha: a.alpha.ok_or_else(|| missing("alpha"))?,
            trials: a.trials.unwrap_or(presets::FIXED_DEFAULT_TRIALS),
            rules: presets::example1_rules(),
            master_seed: 0,
        },
    };
    if a.config.is_some() {
        if let Some(v) = &a.p0 {
            cfg.p0 = v.clone();
        }
        if let Some(v) = &a.p1 {
            cfg.p1 = v.clone();
        }
        if let Some(v) = a.e0 {
            cfg.e0 = v;
        }
        if let Some(v) = &a.n {
            cfg.n_grid = v.clone();
        }
        if let Some(v) = a.alpha {
            cfg.alpha = v;
        }
        if let Some(v) = a.trials {
            cfg.trials = v;
        }
    }
    if let Some(r) = &a.rules {
        cfg.rules = rule_specs(r)?;
    }
    if a.run.seed.is_some() || a.config.is_none() {
        cfg.master_seed = seed(a.run.seed)?;
    }
    Ok(cfg)
}

fn simulate_fixed(a: FixedArgs) -> CliResult<String> {
    let cfg = fixed_config(&a)?;
    cfg.validate()?;
    if a.print_config {
        return Ok(json_text(&cfg));
    }
    Ok(run_fixed_experiment(&cfg, a.run.workers)?.to_csv())
}

fn seq_config(a: &SeqArgs) -> CliResult<SeqConfig> {
    let mut cfg = match &a.config {
        Some(path) => read_config::<SeqConfig>(path)?,
        None => SeqConfig {
            p0: a.p0.clone().ok_or_else(|| missing("p0"))?,
            p1: a.p1.clone().ok_or_else(|| missing("p1"))?,
            alpha: a.alpha.ok_or_else(|| missing("alpha"))?.to_string(),
            penalty: true,
            n_grid: a.n.clone().ok_or_else(|| missing("n"))?,
            trials: a.trials.unwrap_or(presets::SEQUENTIAL_DEFAULT_TRIALS),
            master_seed: 0,
        },
    };
    if a.config.is_some() {
        if let Some(v) = &a.p0 {
            cfg.p0 = v.clone();
        }
        if let Some(v) = &a.p1 {
            cfg.p1 = v.clone();
        }
        if let Some(v) = a.alpha {
            cfg.alpha = v.to_string();
        }
        if let Some(v) = &a.n {
            cfg.n_grid = v.clone();
        }
        if let Some(v) = a.trials {
            cfg.trials = v;
        }
    }
    if let Some(p) = a.penalty {
        cfg.penalty = p.into();
    }
    if a.run.seed.is_some() || a.config.is_none() {
        cfg.master_seed = seed(a.run.seed)?;
    }
    Ok(cfg)
}

fn simulate_seq(a: SeqArgs) -> CliResult<String> {
    let cfg = seq_config(&a)?;
    let alpha: Ratio = cfg.alpha.parse()?;
    if a.print_config {
        return Ok(json_text(&cfg));
    }
    let rows = run_sequential_experiment(
        &cfg.p0,
        &cfg.p1,
        alpha,
        cfg.penalty,
        &cfg.n_grid,
        cfg.trials,
        cfg.master_seed,
        a.run.workers,
    )?;
    Ok(sequential_to_csv(&rows))
}

fn alpha_sweep(a: SweepArgs) -> CliResult<String> {
    let Pair { p0, p1 } = a.pair;
    let grid = a.beta.unwrap_or_else(presets::fig6_grid);
    Ok(sweep_to_csv(&run_alpha_sweep(&p0, &p1, a.e0, &grid)?))
}

fn figure(a: FigureArgs) -> CliResult<String> {
    let opts = FigureOptions {
        trials: a.trials,
        seed: seed(a.run.seed)?,
        workers: a.run.workers,
        n_grid: a.n,
        penalty: a.penalty.map(bool::from),
    };
    Ok(figure_csv(a.name, &opts)?)
}

fn emit(text: &str, out: &Option<PathBuf>) -> CliResult<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn dispatch(cmd: Command) -> CliResult<()> {
    let (text, out) = match cmd {
        Command::Exponents(a) => {
            let out = a.output.out.clone();
            (exponents(a)?, out)
        }
        Command::Threshold(a) => {
            let out = a.output.out.clone();
            (threshold(a)?, out)
        }
        Command::Bounds(a) => {
            let out = a.output.out.clone();
            (bounds(a)?, out)
        }
        Command::Oracle(a) => {
            let out = a.output.out.clone();
            (oracle(a)?, out)
        }
        Command::SimulateFixed(a) => {
            let out = a.output.out.clone();
            (simulate_fixed(a)?, out)
        }
        Command::SimulateSeq(a) => {
            let out = a.output.out.clone();
            (simulate_seq(a)?, out)
        }
        Command::AlphaSweep(a) => {
            let out = a.output.out.clone();
            (alpha_sweep(a)?, out)
        }
        Command::Figure(a) => {
            let out = a.output.out.clone();
            (figure(a)?, out)
        }
    };
    emit(&text, &out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let msg = e.to_string();
            let line = msg
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("invalid arguments");
            eprintln!("{}", line.trim());
            return ExitCode::from(2);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numeric_domain() { 3 } else { 2 })
        }
    }
}
