use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::error;

use teamflow::bots::ClassifierKind;
use teamflow::event::ParseMode;
use teamflow::pipeline::{self, PipelineConfig};
use teamflow::stats::RunLengthMode;
use teamflow::synth::SynthSpec;
use teamflow::{Error, Result};

#[derive(Parser)]
#[command(
    name = "teamflow",
    version,
    about = "Team event-sequence analysis with bot detection"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory holding every artifact.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Manual bot labels (`login,is_bot`).
    #[arg(long, global = true)]
    labels: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse raw events into the normalized event file.
    Ingest {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Skip malformed records instead of failing.
        #[arg(long)]
        lenient: bool,
    },
    /// Extract features, cross-validate, train and predict bot accounts.
    DetectBots {
        /// Reuse bot_features.csv and write only predictions.
        #[arg(long)]
        from_features: bool,
        #[arg(long, value_parser = parse_kind)]
        classifier: Option<ClassifierKind>,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Group events into teams and write their sequences.
    BuildTeams {
        #[arg(long)]
        min_len: Option<usize>,
    },
    /// Down-sample human-only teams by nearest-neighbor matching.
    Sample,
    /// Discover contrast motifs over the window sweep or one window.
    Motifs {
        #[arg(long)]
        w: Option<usize>,
        /// Candidates per group, or `all`.
        #[arg(long)]
        candidates: Option<String>,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Run-length test and event-type proportions.
    Stats {
        #[arg(long)]
        run_lengths: bool,
        #[arg(long)]
        proportions: bool,
        /// Pool every run instead of comparing per-team means.
        #[arg(long)]
        pooled: bool,
    },
    /// Generate a synthetic corpus from a spec file.
    Synth {
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Destination directory (events.ndjson, manifest.json, labels.csv).
        #[arg(long)]
        dest: PathBuf,
    },
    /// Aggregate persisted artifacts into report.json.
    Report,
    /// Every stage in order.
    Run {
        inputs: Vec<PathBuf>,
        #[arg(long)]
        lenient: bool,
    },
}

fn parse_kind(s: &str) -> std::result::Result<ClassifierKind, String> {
    match s {
        "gb" | "gradient_boosting" => Ok(ClassifierKind::GradientBoosting),
        "lr" | "logistic_regression" => Ok(ClassifierKind::LogisticRegression),
        _ => Err(format!("unknown classifier {s:?}; use gb or lr")),
    }
}

fn load_config(common: &Common) -> Result<PipelineConfig> {
    let mut c = match &common.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(o) = &common.out {
        c.output_dir = o.clone();
    }
    if common.seed.is_some() {
        c.seed = common.seed;
    }
    if common.threads.is_some() {
        c.threads = common.threads;
    }
    if common.labels.is_some() {
        c.labels = common.labels.clone();
    }
    Ok(c)
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    let mut config = load_config(&cli.common)?;
    match cli.command {
        Command::Synth { spec, dest } => {
            let spec = match spec {
                Some(p) => {
                    let text = std::fs::read_to_string(&p)?;
                    serde_json::from_str::<SynthSpec>(&text).map_err(|e| Error::InvalidSpec(e.to_string()))?
                }
                None => SynthSpec {
                    seed: config.seed.unwrap_or(0),
                    ..SynthSpec::default()
                },
            };
            let manifest = pipeline::write_synth(&spec, &dest)?;
            eprintln!(
                "wrote {} groups, {} insertions, {} labeled accounts to {}",
                manifest.groups.len(),
                manifest.insertions.len(),
                manifest.labeled_accounts.len(),
                dest.display()
            );
            return Ok(());
        }
        Command::Ingest { ref inputs, lenient } | Command::Run { ref inputs, lenient } => {
            if !inputs.is_empty() {
                config.inputs = inputs.clone();
            }
            if lenient {
                config.parse_mode = ParseMode::Lenient;
            }
        }
        Command::DetectBots { classifier, k, .. } => {
            if let Some(kind) = classifier {
                config.classifier = kind;
            }
            if let Some(k) = k {
                config.k = k;
            }
        }
        Command::BuildTeams { min_len: Some(m) } => config.min_len = m,
        Command::Motifs {
            ref candidates, alpha, ..
        } => {
            if let Some(c) = candidates {
                config.motif.candidates = match c.as_str() {
                    "all" => None,
                    n => Some(
                        n.parse()
                            .map_err(|_| Error::InvalidConfig(format!("bad candidate count {n:?}")))?,
                    ),
                };
            }
            if let Some(a) = alpha {
                config.motif.alpha = a;
            }
        }
        Command::Stats { pooled: true, .. } => config.run_length_mode = RunLengthMode::PooledRuns,
        _ => {}
    }
    config.validate()?;
    if matches!(cli.command, Command::Run { .. }) {
        let report = pipeline::run(&config)?;
        return print_json(&report);
    }
    pipeline::with_threads(&config, || match cli.command {
        Command::Ingest { .. } => print_json(&pipeline::ingest(&config)?),
        Command::DetectBots { from_features, .. } => {
            let summary = if from_features {
                pipeline::detect_bots_from_features(&config)?
            } else {
                pipeline::detect_bots(&config)?
            };
            print_json(&summary)
        }
        Command::BuildTeams { .. } => print_json(&pipeline::build_team_sequences(&config)?),
        Command::Sample => print_json(&pipeline::sample(&config)?),
        Command::Motifs { w, .. } => print_json(&pipeline::motifs(&config, w)?),
        Command::Stats {
            run_lengths,
            proportions,
            ..
        } => {
            let both = !run_lengths && !proportions;
            let summary = pipeline::StatsSummary {
                run_lengths: (both || run_lengths)
                    .then(|| pipeline::run_length_stage(&config))
                    .transpose()?,
                proportions: (both || proportions)
                    .then(|| pipeline::proportion_stage(&config))
                    .transpose()?,
            };
            print_json(&summary)
        }
        Command::Report => print_json(&pipeline::report(&config)?),
        Command::Synth { .. } | Command::Run { .. } => unreachable!(),
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(e.exit_class() as u8)
        }
    }
}
