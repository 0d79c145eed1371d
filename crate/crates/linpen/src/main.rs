use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use linpen::summarize::{write_summary, SUMMARY_FILE};
use linpen::{run_experiment, ExperimentConfig, ExperimentKind, HarnessError};

/// Penalty-encoding experiments for constrained binary optimization.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Corpus directory containing manifest.csv.
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for α₁ sampling and QAOA restarts (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Write the seeded instance corpus.
    Generate,
    /// Minimum objective at every Hamming weight.
    Profile,
    /// Anneal over a grid of quadratic penalty strengths.
    SweepA2,
    /// Ground-state weight against linear penalty strength, and the search window.
    ScanA1,
    /// Two-quarter scan over both linear strengths.
    Grid,
    /// Linear quarter 1, quadratic quarter 2.
    Mixed,
    /// Normalization factors under quadratic and linear penalties.
    NormRatio,
    /// Anneal with both penalty schemes.
    Qa,
    /// QAOA with both penalty schemes.
    Qaoa,
    /// Medians and 5th/95th percentiles of a metrics CSV.
    Summarize { results: PathBuf },
}

fn kind_of(c: &Command) -> Option<ExperimentKind> {
    Some(match c {
        Command::Generate => ExperimentKind::GenerateCorpus,
        Command::Profile => ExperimentKind::WeightProfile,
        Command::SweepA2 => ExperimentKind::Alpha2Sweep,
        Command::ScanA1 => ExperimentKind::Alpha1Scan,
        Command::Grid => ExperimentKind::GridScan,
        Command::Mixed => ExperimentKind::MixedSearch,
        Command::NormRatio => ExperimentKind::NormRatio,
        Command::Qa => ExperimentKind::QaCompare,
        Command::Qaoa => ExperimentKind::QaoaCompare,
        Command::Summarize { .. } => return None,
    })
}

fn fail(e: &HarnessError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_config() { 2 } else { 1 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let c = cli.common;

    if let Command::Summarize { results } = &cli.command {
        let out = c.out.unwrap_or_else(|| {
            if results.is_dir() {
                results.clone()
            } else {
                results.parent().map(PathBuf::from).unwrap_or_default()
            }
        });
        if let Err(e) = std::fs::create_dir_all(&out) {
            eprintln!("error: {}: {e}", out.display());
            return ExitCode::from(1);
        }
        return match write_summary(results, &out.join(SUMMARY_FILE)) {
            Ok(rows) => {
                println!("{} summary rows -> {}", rows.len(), out.join(SUMMARY_FILE).display());
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e),
        };
    }

    let kind = kind_of(&cli.command).expect("summarize handled above");
    let mut cfg = match &c.config {
        Some(path) => match ExperimentConfig::load(path) {
            Ok(cfg) => cfg,
            Err(e) => return fail(&e),
        },
        None => ExperimentConfig::default(),
    };
    if c.corpus.is_some() {
        cfg.corpus = c.corpus;
    }
    if c.out.is_some() {
        cfg.output = c.out;
    }
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    match run_experiment(kind, &cfg, c.jobs) {
        Ok(report) => {
            println!(
                "{kind}: {} instances, {} skipped, {} failed -> {}",
                report.instances,
                report.skipped.len(),
                report.failed.len(),
                report.out_dir.display()
            );
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => fail(&e),
    }
}
