use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use grpo_scaffold::checkpoint::{load_checkpoint, save_checkpoint};
use grpo_scaffold::harness::{
    compare, emit_metrics, emit_plot, evaluate, filter_bank, parse_metrics, save_events, train,
    training_bank, FilterCategory, PlotRun, TrainConfig,
};
use grpo_scaffold::policy::PolicyParams;
use grpo_scaffold::problem::bank_io::{load_bank, save_bank, write_bank};
use grpo_scaffold::problem::{generate_bank, DifficultyMix, ProblemBank};
use grpo_scaffold::{Error, Result};

#[derive(Parser)]
#[command(
    name = "grpo-scaffold",
    version,
    about = "Hint-scaffolded GRPO on a synthetic verifiable task"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a problem bank.
    GenBank {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long, default_value_t = 8)]
        alphabet: usize,
        #[arg(long, default_value_t = 4)]
        length: usize,
        /// Easy, medium and hard fractions.
        #[arg(long, default_value = "0.25,0.5,0.25")]
        mix: String,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Drop too-easy problems and subsample partially solvable ones.
    FilterBank {
        #[arg(long)]
        bank: PathBuf,
        /// Checkpoint to sample from; the bank's initial policy when omitted.
        #[arg(long)]
        policy_init: Option<PathBuf>,
        #[arg(long, default_value_t = 8)]
        samples: usize,
        #[arg(long, default_value_t = 0.5)]
        subsample: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train one configuration.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Greedy pass@1 of a checkpoint on a bank.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        bank: PathBuf,
    },
    /// Plot one or more metrics tables.
    Plot {
        #[arg(long, num_args = 1.., required = true)]
        metrics: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run several variants on one bank and write a summary table.
    Compare {
        #[arg(long, num_args = 1.., required = true)]
        configs: Vec<PathBuf>,
        #[arg(long)]
        bank: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_mix(text: &str) -> Result<DifficultyMix> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::InvalidMix(format!("'{text}': {e}")))?;
    match parts.as_slice() {
        [e, m, h] => DifficultyMix::new(*e, *m, *h),
        _ => Err(Error::InvalidMix(format!(
            "expected three comma-separated fractions, got '{text}'"
        ))),
    }
}

fn write_bank_to(bank: &ProblemBank, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => save_bank(bank, path),
        None => write_bank(bank, std::io::stdout().lock()),
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(
        || path.display().to_string(),
        |s| s.to_string_lossy().into_owned(),
    )
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::GenBank {
            seed,
            count,
            alphabet,
            length,
            mix,
            out,
        } => {
            let bank = generate_bank(seed, count, alphabet, length, parse_mix(&mix)?)?;
            write_bank_to(&bank, out.as_deref())
        }
        Command::FilterBank {
            bank,
            policy_init,
            samples,
            subsample,
            seed,
            out,
        } => {
            let bank = load_bank(&bank)?;
            let params = match policy_init {
                Some(path) => load_checkpoint(path)?.0,
                None => PolicyParams::from_bank(&bank),
            };
            let filtered = filter_bank(&bank, &params, seed, samples, subsample)?;
            eprintln!(
                "too_easy={} potentially_solvable={} (kept {}) too_hard={} -> {} problems",
                filtered.count(FilterCategory::TooEasy),
                filtered.count(FilterCategory::PotentiallySolvable),
                filtered.kept(FilterCategory::PotentiallySolvable),
                filtered.count(FilterCategory::TooHard),
                filtered.bank.len()
            );
            write_bank_to(&filtered.bank, out.as_deref())
        }
        Command::Train { config, out_dir } => {
            let config = TrainConfig::load(&config)?;
            let bank = training_bank(&config)?;
            std::fs::create_dir_all(&out_dir)?;
            let outcome = train(&config, &bank)?;
            std::fs::write(out_dir.join("config.toml"), config.to_toml())?;
            save_bank(&bank, out_dir.join("bank.jsonl"))?;
            emit_metrics(&outcome.log, out_dir.join("metrics.csv"))?;
            save_events(&outcome.events, out_dir.join("events.jsonl"))?;
            save_checkpoint(
                &outcome.params,
                &outcome.optimizer,
                out_dir.join("checkpoint.txt"),
            )?;
            if !outcome.log.is_empty() {
                let label = config.variant.as_str();
                emit_plot(
                    &[PlotRun {
                        label,
                        log: &outcome.log,
                    }],
                    out_dir.join("curves.svg"),
                )?;
            }
            if let Some(p) = outcome.log.final_pass1() {
                println!("final pass@1 {p:.4}");
            }
            Ok(())
        }
        Command::Eval { checkpoint, bank } => {
            let (params, _) = load_checkpoint(checkpoint)?;
            let bank = load_bank(bank)?;
            let shape = params.shape();
            if shape.problems != bank.len() || shape.alphabet != bank.alphabet() {
                return Err(Error::InvalidDimension(format!(
                    "checkpoint covers {} problems over alphabet {}, bank has {} over {}",
                    shape.problems,
                    shape.alphabet,
                    bank.len(),
                    bank.alphabet()
                )));
            }
            println!("{:.6}", evaluate(&params, &bank)?);
            Ok(())
        }
        Command::Plot { metrics, out } => {
            let logs = metrics
                .iter()
                .map(parse_metrics)
                .collect::<Result<Vec<_>>>()?;
            let labels: Vec<String> = metrics.iter().map(|p| stem(p)).collect();
            let runs: Vec<PlotRun> = labels
                .iter()
                .zip(&logs)
                .map(|(label, log)| PlotRun { label, log })
                .collect();
            emit_plot(&runs, out)
        }
        Command::Compare { configs, bank, out } => {
            let configs = configs
                .iter()
                .map(TrainConfig::load)
                .collect::<Result<Vec<_>>>()?;
            let bank = load_bank(bank)?;
            std::fs::create_dir_all(&out)?;
            let result = compare(&configs, &bank)?;
            result.save_csv(out.join("summary.csv"))?;
            result.write_csv(std::io::stdout().lock())?;
            for (config, run) in configs.iter().zip(&result.runs) {
                emit_metrics(&run.log, out.join(format!("{}.csv", config.variant)))?;
            }
            let runs: Vec<PlotRun> = configs
                .iter()
                .zip(&result.runs)
                .filter(|(_, r)| !r.log.is_empty())
                .map(|(c, r)| PlotRun {
                    label: c.variant.as_str(),
                    log: &r.log,
                })
                .collect();
            if !runs.is_empty() {
                emit_plot(&runs, out.join("curves.svg"))?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => {
            let _ = std::io::stdout().flush();
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 1 } else { 2 })
        }
    }
}
