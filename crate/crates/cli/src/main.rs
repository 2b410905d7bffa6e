use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ptlc_swap::chainsim::diff_jsonl;
use ptlc_swap::group::ProfileName;
use ptlc_swap::protocol::{
    maker_critical_path, run_scenario, taker_end_to_end, ScenarioName, ScenarioScript,
};
use ptlc_swap::vectors::{generate, verify_vectors};

/// Exit code for a run that completed but broke atomicity, a vector that
/// did not replay, or traces that differ.
const FAILED: u8 = 1;
/// Exit code for unreadable input or an invalid configuration.
const BAD_INPUT: u8 = 2;

#[derive(Parser)]
#[command(
    name = "ptlc-swap",
    version,
    about = "Run simulated PTLC swaps, emit test vectors and compare traces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario on the simulated chains and write its trace.
    ///
    /// Exits 0 iff the swap ends atomically (swapped on both chains or
    /// refunded on both), 1 if not, 2 on a bad configuration.
    Run {
        /// happy, maker_ghost, taker_ghost, eve_replay or facilitated.
        /// Overrides the config file. Defaults to happy.
        #[arg(long)]
        scenario: Option<ScenarioName>,
        /// toy or secp256k1. Overrides the config file. Defaults to secp256k1.
        #[arg(long)]
        profile: Option<ProfileName>,
        /// Seed for every key, nonce and secret. Overrides the config file.
        /// Defaults to 0.
        #[arg(long)]
        seed: Option<u64>,
        /// TOML scenario file with `scenario`, `profile`, `seed` and an
        /// `[overrides]` table.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Where the JSON-lines trace goes.
        #[arg(long, default_value = "trace.jsonl")]
        out: PathBuf,
        /// Print nothing on success.
        #[arg(long, short)]
        quiet: bool,
    },
    /// Generate or replay signing test vectors.
    Vectors {
        #[command(subcommand)]
        action: VectorAction,
    },
    /// Compare two traces event by event, ignoring JSON field order.
    ///
    /// Exits 0 iff they match; otherwise prints the first divergent event.
    TraceDiff { left: PathBuf, right: PathBuf },
}

#[derive(Subcommand)]
enum VectorAction {
    /// Write toy and secp256k1 vectors for sign, presign, complete, extract
    /// and tweak.
    Generate { path: PathBuf },
    /// Replay every line; exits 1 listing the lines that fail.
    Verify { path: PathBuf },
}

fn main() -> ExitCode {
    let outcome = match Cli::parse().command {
        Command::Run {
            scenario,
            profile,
            seed,
            config,
            out,
            quiet,
        } => run(scenario, profile, seed, config.as_deref(), &out, quiet),
        Command::Vectors {
            action: VectorAction::Generate { path },
        } => fs::write(&path, generate())
            .map_err(|e| format!("cannot write {}: {e}", path.display()))
            .map(|_| 0),
        Command::Vectors {
            action: VectorAction::Verify { path },
        } => verify(&path),
        Command::TraceDiff { left, right } => trace_diff(&left, &right),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(BAD_INPUT)
        }
    }
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn run(
    scenario: Option<ScenarioName>,
    profile: Option<ProfileName>,
    seed: Option<u64>,
    config: Option<&Path>,
    out: &Path,
    quiet: bool,
) -> Result<u8, String> {
    let mut script = match config {
        Some(path) => ScenarioScript::from_toml(&read(path)?)
            .map_err(|e| format!("{}: {e}", path.display()))?,
        None => ScenarioScript::new(ScenarioName::Happy, ProfileName::Secp256k1, 0),
    };
    script.scenario = scenario.unwrap_or(script.scenario);
    script.profile = profile.unwrap_or(script.profile);
    script.seed = seed.unwrap_or(script.seed);

    let report = run_scenario(&script).map_err(|e| e.to_string())?;
    fs::write(out, report.trace.to_jsonl())
        .map_err(|e| format!("cannot write {}: {e}", out.display()))?;

    let atomic = report.is_atomic();
    if !quiet || !atomic {
        println!(
            "scenario {} profile {} seed {}",
            script.scenario, script.profile, script.seed
        );
        println!("outcome {:?} at t={}s", report.outcome, report.end_time);
        for e in &report.conservation_errors {
            println!("conservation error: {e}");
        }
        if let Ok(t) = maker_critical_path(&report.trace) {
            println!("maker critical path {t}s");
        }
        if let Ok(t) = taker_end_to_end(&report.trace) {
            println!("taker end to end {t}s");
        }
        for (who, (sat, wei)) in &report.balances {
            println!("balance {who}: {sat} sat, {wei} wei");
        }
        println!(
            "trace {} ({} events)",
            out.display(),
            report.trace.events.len()
        );
    }
    Ok(if atomic { 0 } else { FAILED })
}

fn verify(path: &Path) -> Result<u8, String> {
    let failures = verify_vectors(&read(path)?);
    for f in &failures {
        println!("line {}: {}", f.line, f.reason);
    }
    Ok(if failures.is_empty() { 0 } else { FAILED })
}

fn trace_diff(left: &Path, right: &Path) -> Result<u8, String> {
    let divergence = diff_jsonl(&read(left)?, &read(right)?).map_err(|e| e.to_string())?;
    let Some(d) = divergence else {
        return Ok(0);
    };
    let end = || "<end of trace>".to_string();
    println!("traces diverge at event {}", d.index);
    println!("< {}", d.left.map_or_else(end, |v| v.to_string()));
    println!("> {}", d.right.map_or_else(end, |v| v.to_string()));
    Ok(FAILED)
}
