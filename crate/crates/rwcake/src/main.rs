//! Command-line front end. Every subcommand prints JSON (or CSV where noted)
//! to stdout and exits nonzero on any fault or invariant violation.

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rwcake::engine::{check_proportional, replay_transcript, Engine, EngineMode, Transcript};
use rwcake::harness::{
    exact_expected_depth, jensen_gap_check, jensen_sum_bounds, lower_bound_decimal,
    min_integer_depth, run_experiment, sample_simplex_triple,
};
use rwcake::protocols::{is_primitive, run_protocol, ProtocolKind};
use rwcake::rational::Rational;
use rwcake::ws::{default_epsilon, enumerate_j, sample_j, JInstance};
use serde_json::json;
use std::fs;
use std::io::BufReader;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Parser)]
#[command(name = "rwcake", about = "Exact cake-cutting query-model laboratory", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one instance from the uniform distribution and print it.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        /// Override the canonical epsilon (a rational like 1/512).
        #[arg(long)]
        epsilon: Option<String>,
    },
    /// Print every instance of the family (small n only), one per line.
    Enumerate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        epsilon: Option<String>,
    },
    /// Print the per-player measures of an instance.
    Measures {
        #[arg(long)]
        instance: PathBuf,
        /// Restrict to one player (1-based).
        #[arg(long)]
        player: Option<usize>,
    },
    /// Run one protocol on an instance (from file or sampled) and report.
    Run(RunArgs),
    /// Replay a transcript against an instance, verifying every answer.
    Replay {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        transcript: PathBuf,
    },
    /// Seeded experiment: sampled instances, query statistics, bound check.
    Experiment {
        #[arg(long)]
        protocol: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// Exact decision-tree analysis of a cuts-only primitive strategy.
    Analyze {
        #[arg(long)]
        strategy: String,
        #[arg(long)]
        n: usize,
    },
    /// Print the lower-bound value for n.
    Bound {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 12)]
        digits: usize,
    },
    /// Evaluate the convexity gap on random simplex points.
    Jensen {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    protocol: String,
    /// Instance file (JSON); mutually exclusive with --n/--seed.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Enforce the single-subinterval restriction (default on; pass
    /// `--ws-mode false` to lift it).
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    ws_mode: bool,
    /// Write the transcript as JSON lines to this file.
    #[arg(long)]
    transcript_out: Option<PathBuf>,
}

fn parse_rational(s: &str) -> anyhow::Result<Rational> {
    Rational::from_str(s).map_err(|e| anyhow::anyhow!("bad rational {s:?}: {e}"))
}

fn load_instance(path: &PathBuf) -> anyhow::Result<JInstance> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Gen { n, seed, epsilon } => {
            let eps = match epsilon {
                Some(s) => parse_rational(&s)?,
                None => default_epsilon(n),
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let inst = sample_j(n, &eps, &mut rng);
            println!("{}", serde_json::to_string_pretty(&inst)?);
        }
        Command::Enumerate { n, epsilon } => {
            let eps = match epsilon {
                Some(s) => parse_rational(&s)?,
                None => default_epsilon(n),
            };
            for inst in enumerate_j(n, &eps)? {
                println!("{}", serde_json::to_string(&inst)?);
            }
        }
        Command::Measures { instance, player } => {
            let inst = load_instance(&instance)?;
            let out: Vec<serde_json::Value> = (1..=inst.n())
                .filter(|p| player.map_or(true, |q| q == *p))
                .map(|p| json!({ "player": p, "measure": inst.measures()[p - 1] }))
                .collect();
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
        Command::Run(args) => run_command(args)?,
        Command::Replay { instance, transcript } => {
            let inst = load_instance(&instance)?;
            let file = fs::File::open(&transcript)?;
            let t = Transcript::from_jsonl(BufReader::new(file))?;
            t.validate()?;
            replay_transcript(inst.measures(), EngineMode::WoegingerSgall, &t)?;
            println!(
                "{}",
                json!({
                    "replayed_records": t.records.len(),
                    "cuts": t.cuts,
                    "evals": t.evals,
                    "identical_answers": true,
                })
            );
        }
        Command::Experiment { protocol, n, trials, seed, format } => {
            let kind = ProtocolKind::from_str(&protocol).map_err(|e| anyhow::anyhow!(e))?;
            let report = run_experiment(kind, n, trials, seed)?;
            match format.as_str() {
                "csv" => print!("{}", report.to_csv()),
                "json" => println!("{}", report.to_json()?),
                other => anyhow::bail!("unknown format {other:?}; use csv or json"),
            }
            if report.failures > 0 || !report.all_proportional {
                anyhow::bail!(
                    "{} failed trials, proportional = {}",
                    report.failures,
                    report.all_proportional
                );
            }
        }
        Command::Analyze { strategy, n } => {
            let kind = ProtocolKind::from_str(&strategy).map_err(|e| anyhow::anyhow!(e))?;
            let strat = kind
                .primitive_strategy()
                .ok_or_else(|| anyhow::anyhow!("{} is not a primitive strategy", kind.name()))?;
            let report = exact_expected_depth(&strat.as_ref(), n, &default_epsilon(n))?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            if !report.meets_bound {
                anyhow::bail!("expected cuts fall below the certified bound");
            }
        }
        Command::Bound { n, digits } => {
            println!(
                "{}",
                json!({
                    "n": n,
                    "bound": lower_bound_decimal(n, digits),
                    "min_integer_depth": min_integer_depth(n),
                })
            );
        }
        Command::Jensen { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut all_ok = true;
            let mut worst: Option<(Rational, Rational, Rational)> = None;
            let mut worst_lo: Option<Rational> = None;
            for _ in 0..samples {
                let (a, b, c) = sample_simplex_triple(&mut rng, 1_000_000);
                let ok = jensen_gap_check(&a, &b, &c)?;
                all_ok &= ok;
                let bounds = jensen_sum_bounds(&a, &b, &c, 64)?;
                if worst_lo.as_ref().is_none_or(|w| bounds.lo < *w) {
                    worst_lo = Some(bounds.lo);
                    worst = Some((a, b, c));
                }
            }
            println!(
                "{}",
                json!({
                    "samples": samples,
                    "all_above_threshold": all_ok,
                    "worst_point": worst.map(|(a, b, c)| vec![a.to_string(), b.to_string(), c.to_string()]),
                    "worst_lower_bound": worst_lo.map(|w| w.to_f64()),
                })
            );
            if !all_ok {
                anyhow::bail!("a sample fell below the threshold");
            }
        }
    }
    Ok(())
}

fn run_command(args: RunArgs) -> anyhow::Result<()> {
    let kind = ProtocolKind::from_str(&args.protocol).map_err(|e| anyhow::anyhow!(e))?;
    let (inst, measures) = match (&args.instance, args.n) {
        (Some(path), None) => {
            let inst = load_instance(path)?;
            let measures = inst.measures();
            (Some(inst), measures)
        }
        (None, Some(n)) => {
            let seed = args.seed.unwrap_or(42);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let inst = sample_j(n, &default_epsilon(n), &mut rng);
            let measures = inst.measures();
            (Some(inst), measures)
        }
        _ => anyhow::bail!("pass exactly one of --instance FILE or --n N [--seed S]"),
    };
    let mode = if args.ws_mode { EngineMode::WoegingerSgall } else { EngineMode::Unrestricted };
    let mut engine = Engine::new(measures.clone(), mode);
    let epsilon = inst.as_ref().map(|i| i.epsilon().clone());
    let alloc = run_protocol(kind, &mut engine, epsilon.as_ref())?;
    let report = check_proportional(&alloc, &measures);
    let transcript = engine.transcript();
    let primitive = epsilon
        .as_ref()
        .map(|eps| is_primitive(transcript, measures.len(), eps));
    let phi_matches = inst
        .as_ref()
        .map(|i| rwcake::ws::check_phi_equals_pi_inverse(&alloc, i).unwrap_or(false));
    let out = json!({
        "protocol": kind.name(),
        "n": measures.len(),
        "allocation": alloc.ordered_pieces().iter().map(|(p, iv)| json!({
            "player": p,
            "lo": iv.lo(),
            "hi": iv.hi(),
        })).collect::<Vec<_>>(),
        "counts": {
            "cuts": transcript.cuts,
            "evals": transcript.evals,
            "assigns": transcript.assigns,
            "total": transcript.total_queries(),
        },
        "proportional": report.all_proportional,
        "shares": report.shares,
        "is_primitive_transcript": primitive,
        "assignment_matches_hidden_permutation": phi_matches,
    });
    if let Some(path) = &args.transcript_out {
        let mut buf = Vec::new();
        transcript.to_jsonl(&mut buf)?;
        fs::write(path, buf)?;
    }
    println!("{}", serde_json::to_string_pretty(&out)?);
    if !report.all_proportional {
        anyhow::bail!("allocation is not proportional");
    }
    Ok(())
}
