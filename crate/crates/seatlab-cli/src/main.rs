//! `seatlab` — exact probabilities, Monte Carlo batches, backward
//! colorings, displacement-limit diagnostics and the Red Now game, all with
//! machine-readable output.
//!
//! Envelope: every command prints one JSON object (or a CSV table with
//! `--format csv`) holding `command`, `params` (the effective inputs),
//! `results`, and `seed` for stochastic commands. Rationals are `"p/q"`
//! strings; floats carry 12 significant digits. Stochastic output is
//! byte-identical for a fixed `--seed`, independent of `--workers` (which
//! is deliberately not echoed into `params`).
//!
//! Exit codes: 0 success, 2 resource bound exceeded (with a JSON error
//! object on stdout), 64 usage error. `SEATLAB_MAX_LEAVES` overrides the
//! exhaustive-enumeration bound.

mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use seatlab::backward::{
    backward_distribution_bounded, sample_coloring, sample_coloring_via_records, BackwardError,
};
use seatlab::exact::{
    enumerate_bounded, event_prob, joint_prob, verify_independence, ExactError, DEFAULT_MAX_LEAVES,
};
use seatlab::model::Instance;
use seatlab::pd::{convergence_report, PdError};
use seatlab::rednow::{win_frequency_mc, win_probability_exact, Deck, Mode, RednowError, Strategy};
use seatlab::rng::SplitMix64;
use seatlab::sim::run_batch;
use seatlab::stats::wilson_99_9;
use seatlab::ExactProb;

use output::{csv_float, csv_line, envelope, error_object, sig12};

const EXIT_RESOURCE: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "seatlab", version, about = "Lost-boarding-pass laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact rational probabilities via enumeration and bitmask DP
    Exact(ExactArgs),
    /// Monte Carlo boarding batches with Wilson intervals
    Simulate(SimulateArgs),
    /// Backward seat-coloring construction and equivalence checks
    Backward(BackwardArgs),
    /// Displacement-profile convergence diagnostics
    Pd(PdArgs),
    /// The Red Now game: exact and Monte Carlo win probabilities
    Rednow(RednowArgs),
}

#[derive(Args)]
struct ExactArgs {
    /// Seat count
    #[arg(long)]
    n: u32,
    /// Consecutive lost set {1..k}
    #[arg(long, conflicts_with = "lost")]
    k: Option<u32>,
    /// Explicit lost set, e.g. 1,3,5
    #[arg(long, value_name = "LABELS")]
    lost: Option<String>,
    /// Exact Pr(D_m) for one passenger
    #[arg(long, value_name = "M")]
    event: Option<u32>,
    /// Exact joint probability of several occupancy events, e.g. 2,3
    #[arg(long, value_name = "LABELS")]
    joint: Option<String>,
    /// Full outcome distribution by exhaustive enumeration
    #[arg(long)]
    distribution: bool,
    /// Check Pr(joint) == product over every subset of events
    #[arg(long)]
    verify_independence: bool,
    /// Add decimal approximations next to each rational
    #[arg(long)]
    float: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    n: u32,
    #[arg(long, conflicts_with = "lost")]
    k: Option<u32>,
    #[arg(long, value_name = "LABELS")]
    lost: Option<String>,
    #[arg(long)]
    trials: u64,
    #[arg(long)]
    seed: u64,
    /// Worker threads; never changes the output bytes
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Passengers whose occupancy events to report (default: the last)
    #[arg(long, value_name = "LABELS")]
    events: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct BackwardArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    k: u32,
    /// Sample one coloring (requires --seed)
    #[arg(long)]
    sample: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Use the record-value coupling instead of direct coloring (k = 1)
    #[arg(long)]
    records: bool,
    /// Exhaustively compare the backward distribution with the forward one
    #[arg(long)]
    check_forward: bool,
}

#[derive(Args)]
struct PdArgs {
    /// Comma-separated seat counts, e.g. 100,1000,10000
    #[arg(long = "n-list", value_name = "NS")]
    n_list: String,
    #[arg(long)]
    k: u32,
    #[arg(long)]
    trials: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct RednowArgs {
    #[arg(long)]
    reds: u32,
    #[arg(long)]
    blacks: u32,
    /// Builtin name (immediate, last-chance, threshold:0.6,
    /// first-black-run:2, random:7) or @file.json decision table
    #[arg(long)]
    strategy: String,
    /// Exhaustive exact evaluation
    #[arg(long)]
    exact: bool,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = ModeArg::Next)]
    mode: ModeArg,
    #[arg(long)]
    float: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Next,
    Bottom,
}

impl ModeArg {
    fn to_mode(self) -> Mode {
        match self {
            ModeArg::Next => Mode::NextCard,
            ModeArg::Bottom => Mode::BottomCard,
        }
    }

    fn name(self) -> &'static str {
        match self {
            ModeArg::Next => "next",
            ModeArg::Bottom => "bottom",
        }
    }
}

enum CliError {
    Usage(String),
    Resource { kind: &'static str, message: String },
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl From<ExactError> for CliError {
    fn from(e: ExactError) -> Self {
        match e {
            ExactError::TooLarge { .. } | ExactError::TooManySeats { .. } => CliError::Resource {
                kind: "too_large",
                message: e.to_string(),
            },
            ExactError::DomainError(msg) => CliError::Usage(msg),
        }
    }
}

impl From<BackwardError> for CliError {
    fn from(e: BackwardError) -> Self {
        match e {
            BackwardError::TooLarge { .. } => CliError::Resource {
                kind: "too_large",
                message: e.to_string(),
            },
            BackwardError::MalformedColoring(msg) => CliError::Usage(msg),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let is_help = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if is_help {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_USAGE)
            };
        }
    };

    match run(cli.command) {
        Ok(stdout) => {
            print!("{stdout}");
            ExitCode::SUCCESS
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("seatlab: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(CliError::Resource { kind, message }) => {
            print!("{}", error_object(kind, &message));
            eprintln!("seatlab: {message}");
            ExitCode::from(EXIT_RESOURCE)
        }
    }
}

fn run(command: Command) -> Result<String, CliError> {
    match command {
        Command::Exact(args) => cmd_exact(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Backward(args) => cmd_backward(args),
        Command::Pd(args) => cmd_pd(args),
        Command::Rednow(args) => cmd_rednow(args),
    }
}

fn parse_labels(text: &str, what: &str) -> Result<Vec<u32>, CliError> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<u32>()
                .map_err(|_| usage(format!("bad {what} entry {part:?}")))
        })
        .collect()
}

fn resolve_instance(n: u32, k: Option<u32>, lost: Option<&str>) -> Result<Instance, CliError> {
    let labels = match (k, lost) {
        (Some(k), None) => (1..=k).collect(),
        (None, Some(text)) => parse_labels(text, "--lost")?,
        (None, None) => return Err(usage("one of --k or --lost is required")),
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    };
    Instance::new(n, labels).map_err(|e| usage(e.to_string()))
}

fn max_leaves() -> Result<u128, CliError> {
    match std::env::var("SEATLAB_MAX_LEAVES") {
        Ok(text) => text
            .trim()
            .parse()
            .map_err(|_| usage(format!("SEATLAB_MAX_LEAVES={text:?} is not a positive integer"))),
        Err(_) => Ok(DEFAULT_MAX_LEAVES),
    }
}

fn rational_field(results: &mut Value, key: &str, p: &ExactProb, float: bool) {
    results[key] = json!(p.to_string());
    if float {
        results[format!("{key}_float")] = json!(sig12(p.to_f64()));
    }
}

fn cmd_exact(args: ExactArgs) -> Result<String, CliError> {
    let instance = resolve_instance(args.n, args.k, args.lost.as_deref())?;
    let lost: Vec<u32> = instance.lost().iter().copied().collect();
    let params = json!({ "n": args.n, "lost": lost });

    let modes = [
        args.event.is_some(),
        args.joint.is_some(),
        args.distribution,
        args.verify_independence,
    ];
    if modes.iter().filter(|&&m| m).count() != 1 {
        return Err(usage(
            "exactly one of --event, --joint, --distribution, --verify-independence is required",
        ));
    }

    let results = if let Some(m) = args.event {
        let p = event_prob(&instance, m)?;
        let mut results = json!({});
        rational_field(&mut results, "result", &p, args.float);
        results
    } else if let Some(joint) = &args.joint {
        let subset = parse_labels(joint, "--joint")?;
        let p = joint_prob(&instance, &subset)?;
        let mut results = json!({});
        rational_field(&mut results, "result", &p, args.float);
        results
    } else if args.distribution {
        let dist = enumerate_bounded(&instance, max_leaves()?)?;
        let outcomes: Vec<Value> = dist
            .entries()
            .iter()
            .map(|(outcome, p)| {
                let mut entry = json!({ "seats": outcome.seats() });
                rational_field(&mut entry, "prob", p, args.float);
                entry
            })
            .collect();
        json!({ "outcomes": outcomes })
    } else {
        let report = verify_independence(&instance)?;
        let violations: Vec<Value> = report
            .violations
            .iter()
            .map(|v| {
                json!({
                    "subset": v.subset,
                    "joint": v.joint.to_string(),
                    "product": v.product.to_string(),
                })
            })
            .collect();
        json!({
            "subsets_checked": report.subsets_checked,
            "violations": violations,
        })
    };

    Ok(envelope("exact", params, results, None))
}

fn event_row(passenger: u32, count: u64, trials: u64) -> Result<Value, CliError> {
    let (lo, hi) = wilson_99_9(count, trials).map_err(|e| usage(e.to_string()))?;
    Ok(json!({
        "passenger": passenger,
        "count": count,
        "frequency": sig12(count as f64 / trials as f64),
        "wilson_99_9": [sig12(lo), sig12(hi)],
    }))
}

fn cmd_simulate(args: SimulateArgs) -> Result<String, CliError> {
    if args.trials < 1 {
        return Err(usage("--trials must be at least 1"));
    }
    let instance = resolve_instance(args.n, args.k, args.lost.as_deref())?;
    let events: Vec<u32> = match &args.events {
        Some(text) => parse_labels(text, "--events")?,
        None if instance.is_lost(args.n) => Vec::new(),
        None => vec![args.n],
    };
    for &m in &events {
        if m < 1 || m > args.n {
            return Err(usage(format!("event passenger {m} outside 1..={}", args.n)));
        }
        if instance.is_lost(m) {
            return Err(usage(format!(
                "D_{m} is undefined: passenger {m} has no boarding pass"
            )));
        }
    }

    let batch = run_batch(&instance, args.trials, args.seed, args.workers.max(1));
    let lost: Vec<u32> = instance.lost().iter().copied().collect();
    let params = json!({
        "n": args.n,
        "lost": lost,
        "trials": args.trials,
        "events": events,
    });

    match args.format {
        Format::Json => {
            let rows = events
                .iter()
                .map(|&m| event_row(m, batch.event_counts[(m - 1) as usize], args.trials))
                .collect::<Result<Vec<_>, _>>()?;
            let results = json!({
                "events": rows,
                "last_correct": event_row(args.n, batch.last_correct_count, args.trials)?,
            });
            Ok(envelope("simulate", params, results, Some(args.seed)))
        }
        Format::Csv => {
            let mut out = String::from("kind,passenger,count,frequency,wilson_lo,wilson_hi\n");
            let mut push_row = |kind: &str, m: u32, count: u64| -> Result<(), CliError> {
                let (lo, hi) = wilson_99_9(count, args.trials).map_err(|e| usage(e.to_string()))?;
                out.push_str(&csv_line(&[
                    kind.to_owned(),
                    m.to_string(),
                    count.to_string(),
                    csv_float(count as f64 / args.trials as f64),
                    csv_float(lo),
                    csv_float(hi),
                ]));
                out.push('\n');
                Ok(())
            };
            for &m in &events {
                push_row("event", m, batch.event_counts[(m - 1) as usize])?;
            }
            push_row("last_correct", args.n, batch.last_correct_count)?;
            Ok(out)
        }
    }
}

fn cmd_backward(args: BackwardArgs) -> Result<String, CliError> {
    if args.k < 1 || args.n < args.k + 1 {
        return Err(usage(format!(
            "backward construction needs 1 <= k < n, got n={} k={}",
            args.n, args.k
        )));
    }
    match (args.sample, args.check_forward) {
        (true, false) => {
            let seed = args
                .seed
                .ok_or_else(|| usage("--sample requires --seed"))?;
            if args.records && args.k != 1 {
                return Err(usage("--records is only defined for k = 1"));
            }
            let mut rng = SplitMix64::new(seed);
            let coloring = if args.records {
                sample_coloring_via_records(args.n, &mut rng)
            } else {
                sample_coloring(args.n, args.k, &mut rng)
            };
            let params = json!({ "n": args.n, "k": args.k, "records": args.records });
            let results = json!({
                "coloring": serde_json::to_value(&coloring).expect("coloring serializes"),
            });
            Ok(envelope("backward", params, results, Some(seed)))
        }
        (false, true) => {
            if args.records {
                return Err(usage("--records applies to --sample only"));
            }
            let bound = max_leaves()?;
            let backward = backward_distribution_bounded(args.n, args.k, bound)?;
            let instance =
                Instance::consecutive(args.n, args.k).map_err(|e| usage(e.to_string()))?;
            let forward = enumerate_bounded(&instance, bound)?;

            // outcome-by-outcome rational comparison; track the largest
            // numeric deviation in case they ever differ
            let mut max_dev: Option<(Vec<u32>, ExactProb, ExactProb, f64)> = None;
            let zero = ExactProb::zero();
            for (outcome, fp) in forward.entries() {
                let bp = backward.prob_of(outcome.seats()).unwrap_or(&zero);
                note_deviation(&mut max_dev, outcome.seats(), fp, bp);
            }
            for (outcome, bp) in backward.entries() {
                let fp = forward.prob_of(outcome.seats()).unwrap_or(&zero);
                note_deviation(&mut max_dev, outcome.seats(), fp, bp);
            }
            let equal = backward == forward;
            let results = json!({
                "equal": equal,
                "checked_outcomes": forward.len().max(backward.len()),
                "max_deviation": max_dev.map(|(seats, f, b, _)| json!({
                    "seats": seats,
                    "forward": f.to_string(),
                    "backward": b.to_string(),
                })),
            });
            let params = json!({ "n": args.n, "k": args.k });
            Ok(envelope("backward", params, results, None))
        }
        _ => Err(usage("exactly one of --sample or --check-forward is required")),
    }
}

fn note_deviation(
    best: &mut Option<(Vec<u32>, ExactProb, ExactProb, f64)>,
    seats: &[u32],
    forward: &ExactProb,
    backward: &ExactProb,
) {
    if forward == backward {
        return;
    }
    let dev = (forward.to_f64() - backward.to_f64()).abs();
    if best.as_ref().is_none_or(|(_, _, _, d)| dev > *d) {
        *best = Some((seats.to_vec(), forward.clone(), backward.clone(), dev));
    }
}

fn cmd_pd(args: PdArgs) -> Result<String, CliError> {
    if args.trials < 1 {
        return Err(usage("--trials must be at least 1"));
    }
    if args.k < 1 {
        return Err(usage("--k must be at least 1"));
    }
    let n_values = parse_labels(&args.n_list, "--n-list")?;
    if n_values.is_empty() {
        return Err(usage("--n-list must name at least one seat count"));
    }
    let report = convergence_report(&n_values, args.k, args.trials, args.seed, args.workers.max(1))
        .map_err(|e| match e {
            PdError::ScaleTooSmall { .. } | PdError::NotConsecutive => usage(e.to_string()),
        })?;

    match args.format {
        Format::Json => {
            let rows: Vec<Value> = report
                .rows
                .iter()
                .map(|row| {
                    json!({
                        "n": row.n,
                        "k": row.k,
                        "trials": row.trials,
                        "ks_distance": sig12(row.ks_distance),
                        "mean_largest": sig12(row.mean_largest),
                        "var_largest": sig12(row.var_largest),
                        "max_cross_corr": row.max_cross_corr.map(sig12),
                    })
                })
                .collect();
            let results = json!({
                "oracle": {
                    "samples": report.oracle_samples,
                    "mean_largest": sig12(report.oracle_mean_largest),
                    "var_largest": sig12(report.oracle_var_largest),
                },
                "rows": rows,
            });
            let params = json!({ "n_list": n_values, "k": args.k, "trials": args.trials });
            Ok(envelope("pd", params, results, Some(args.seed)))
        }
        Format::Csv => {
            let mut out =
                String::from("n,k,trials,ks_distance,mean_largest,var_largest,max_cross_corr\n");
            for row in &report.rows {
                out.push_str(&csv_line(&[
                    row.n.to_string(),
                    row.k.to_string(),
                    row.trials.to_string(),
                    csv_float(row.ks_distance),
                    csv_float(row.mean_largest),
                    csv_float(row.var_largest),
                    row.max_cross_corr.map(csv_float).unwrap_or_default(),
                ]));
                out.push('\n');
            }
            Ok(out)
        }
    }
}

fn cmd_rednow(args: RednowArgs) -> Result<String, CliError> {
    let deck = Deck::new(args.reds, args.blacks).map_err(|e| usage(e.to_string()))?;
    let strategy = if let Some(path) = args.strategy.strip_prefix('@') {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read strategy file {path:?}: {e}")))?;
        Strategy::from_json(&text).map_err(|e| usage(e.to_string()))?
    } else {
        Strategy::parse(&args.strategy).map_err(|e| usage(e.to_string()))?
    };
    let mode = args.mode.to_mode();
    let params = json!({
        "reds": args.reds,
        "blacks": args.blacks,
        "strategy": args.strategy,
        "mode": args.mode.name(),
    });

    match (args.exact, args.trials) {
        (true, None) => {
            let p = win_probability_exact(&deck, &strategy, mode).map_err(|e| match e {
                RednowError::TooLarge { .. } => CliError::Resource {
                    kind: "too_large",
                    message: e.to_string(),
                },
                other => usage(other.to_string()),
            })?;
            let mut results = json!({});
            rational_field(&mut results, "result", &p, args.float);
            Ok(envelope("rednow", params, results, None))
        }
        (false, Some(trials)) => {
            if trials < 1 {
                return Err(usage("--trials must be at least 1"));
            }
            let seed = args.seed.ok_or_else(|| usage("--trials requires --seed"))?;
            let mut params = params;
            params["trials"] = json!(trials);
            let mc = win_frequency_mc(&deck, &strategy, mode, trials, seed);
            let (lo, hi) = wilson_99_9(mc.wins, trials).map_err(|e| usage(e.to_string()))?;
            let results = json!({
                "wins": mc.wins,
                "frequency": sig12(mc.frequency()),
                "wilson_99_9": [sig12(lo), sig12(hi)],
            });
            Ok(envelope("rednow", params, results, Some(seed)))
        }
        _ => Err(usage("choose exactly one of --exact or --trials T --seed S")),
    }
}
