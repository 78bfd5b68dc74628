use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use cola_cli::commands::{self, ScoreOptions};
use cola_cli::config::{FileConfig, Overrides, ResolvedConfig};
use cola_cli::error::{CliError, Result};
use cola_core::eval::SweepAxis;

/// Contrastive node-vs-subgraph anomaly detection for attributed networks.
#[derive(Parser)]
#[command(name = "cola", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct CommonArgs {
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (also settable via COLA_OUT_DIR).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Edge list file (`src dst` per line, 0-indexed; .gz ok).
    #[arg(long, global = true)]
    edges: Option<PathBuf>,

    /// Attribute CSV file (n rows x f columns; .gz ok).
    #[arg(long, global = true)]
    attrs: Option<PathBuf>,

    /// Label file (one {0,1} per line; .gz ok).
    #[arg(long, global = true)]
    labels: Option<PathBuf>,

    /// Binary graph cache (alternative to --edges/--attrs).
    #[arg(long, global = true)]
    graph: Option<PathBuf>,

    /// Base RNG seed; stage seeds derive from it by fixed offsets.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Row-L2-normalize attributes before train/score.
    #[arg(long, global = true)]
    normalize_attrs: bool,
}

#[derive(Args, Default)]
struct InjectFlags {
    /// Clique size p.
    #[arg(long = "p")]
    clique_size: Option<usize>,

    /// Clique count q.
    #[arg(long = "q")]
    clique_count: Option<usize>,

    /// Candidate-set size k for contextual swaps.
    #[arg(long = "k")]
    candidates: Option<usize>,
}

#[derive(Args, Default)]
struct TrainFlags {
    /// Training epochs T.
    #[arg(long)]
    epochs: Option<usize>,

    /// Adam learning rate.
    #[arg(long)]
    lr: Option<f64>,

    /// Batch size B.
    #[arg(long = "batch-size", visible_alias = "B")]
    batch_size: Option<usize>,

    /// Subgraph size c.
    #[arg(long = "c")]
    subgraph_size: Option<usize>,

    /// Embedding dimension d.
    #[arg(long = "d")]
    embedding_dim: Option<usize>,

    /// GNN layer count L.
    #[arg(long)]
    layers: Option<usize>,

    /// RWR restart probability.
    #[arg(long)]
    restart_prob: Option<f64>,

    /// RWR walk-step cap (default 64*c).
    #[arg(long)]
    max_steps: Option<usize>,
}

#[derive(Args, Default)]
struct ScoreFlags {
    /// Sampling rounds R.
    #[arg(long = "rounds", visible_alias = "R")]
    rounds: Option<usize>,

    /// Estimation mode: mean, min, mean+min, max, mean+max, std, mean+std, -std, mean-std.
    #[arg(long = "estimation-mode")]
    estimation_mode: Option<String>,

    /// Score source: both, positive, negative.
    #[arg(long = "score-source")]
    score_source: Option<String>,

    /// Readout: average, max, min, weighted_average.
    #[arg(long)]
    readout: Option<String>,

    /// Inference worker threads (default: available parallelism).
    #[arg(long)]
    workers: Option<usize>,

    /// Model checkpoint path (default: <out>/checkpoint.bin).
    #[arg(long)]
    checkpoint: Option<PathBuf>,

    /// Re-estimate scores from a stored rounds.bin instead of sampling.
    #[arg(long = "from-rounds")]
    from_rounds: Option<PathBuf>,

    /// Dump the first N nodes' sampled pairs to pairs.json.
    #[arg(long = "dump-pairs")]
    dump_pairs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Inject structural (clique) and contextual (attribute swap) anomalies.
    Inject {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        inject: InjectFlags,
    },
    /// Train the contrastive scorer, writing a checkpoint and loss log.
    Train {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        train: TrainFlags,
        #[command(flatten)]
        score: ScoreFlags,
    },
    /// Compute per-node anomaly scores with multi-round sampling.
    Score {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        train: TrainFlags,
        #[command(flatten)]
        score: ScoreFlags,
    },
    /// Evaluate scores against ground-truth labels (AUC + ROC curve).
    Eval {
        #[command(flatten)]
        common: CommonArgs,
        /// Scores CSV (default: <out>/scores.csv).
        #[arg(long)]
        scores: Option<PathBuf>,
    },
    /// Full pipeline: inject, train, score, eval.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        inject: InjectFlags,
        #[command(flatten)]
        train: TrainFlags,
        #[command(flatten)]
        score: ScoreFlags,
    },
    /// AUC across hyperparameter values (axis R reuses one trained model).
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        inject: InjectFlags,
        #[command(flatten)]
        train: TrainFlags,
        #[command(flatten)]
        score: ScoreFlags,
        /// Axis to sweep: R, c, or d.
        #[arg(long)]
        axis: String,
        /// Comma-separated values, e.g. 1,2,4,8.
        #[arg(long)]
        values: String,
        /// Seeded repetitions per value.
        #[arg(long, default_value_t = 1)]
        runs: usize,
    },
}

fn build_overrides(
    common: &CommonArgs,
    inject: Option<&InjectFlags>,
    train: Option<&TrainFlags>,
    score: Option<&ScoreFlags>,
) -> Overrides {
    let mut o = Overrides {
        seed: common.seed,
        edges: common.edges.clone(),
        attrs: common.attrs.clone(),
        labels: common.labels.clone(),
        graph: common.graph.clone(),
        out_dir: common.out.clone(),
        normalize_attrs: common.normalize_attrs.then_some(true),
        ..Overrides::default()
    };
    if let Some(i) = inject {
        o.clique_size = i.clique_size;
        o.clique_count = i.clique_count;
        o.candidates = i.candidates;
    }
    if let Some(t) = train {
        o.epochs = t.epochs;
        o.learning_rate = t.lr;
        o.batch_size = t.batch_size;
        o.subgraph_size = t.subgraph_size;
        o.embedding_dim = t.embedding_dim;
        o.layers = t.layers;
        o.restart_prob = t.restart_prob;
        o.max_steps = t.max_steps;
    }
    if let Some(s) = score {
        o.rounds = s.rounds;
        o.estimation_mode = s.estimation_mode.clone();
        o.score_source = s.score_source.clone();
        o.readout = s.readout.clone();
        o.workers = s.workers;
    }
    o
}

fn resolve(common: &CommonArgs, overrides: Overrides) -> Result<ResolvedConfig> {
    let file = match &common.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    ResolvedConfig::resolve(&file, &overrides)
}

fn parse_values(raw: &str) -> Result<Vec<usize>> {
    raw.split(',')
        .map(|v| {
            v.trim()
                .parse::<usize>()
                .map_err(|_| CliError::usage(format!("invalid sweep value `{v}`")))
        })
        .collect()
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Inject { common, inject } => {
            let cfg = resolve(&common, build_overrides(&common, Some(&inject), None, None))?;
            commands::cmd_inject(&cfg)
        }
        Command::Train { common, train, score } => {
            let cfg = resolve(&common, build_overrides(&common, None, Some(&train), Some(&score)))?;
            commands::cmd_train(&cfg)
        }
        Command::Score { common, train, score } => {
            let cfg = resolve(&common, build_overrides(&common, None, Some(&train), Some(&score)))?;
            commands::cmd_score(
                &cfg,
                &ScoreOptions {
                    checkpoint: score.checkpoint.clone(),
                    from_rounds: score.from_rounds.clone(),
                    dump_pairs: score.dump_pairs,
                },
            )
        }
        Command::Eval { common, scores } => {
            let cfg = resolve(&common, build_overrides(&common, None, None, None))?;
            commands::cmd_eval(&cfg, scores.as_deref())
        }
        Command::Run { common, inject, train, score } => {
            let cfg = resolve(
                &common,
                build_overrides(&common, Some(&inject), Some(&train), Some(&score)),
            )?;
            commands::cmd_run(
                &cfg,
                &ScoreOptions {
                    checkpoint: score.checkpoint.clone(),
                    from_rounds: score.from_rounds.clone(),
                    dump_pairs: score.dump_pairs,
                },
            )
        }
        Command::Sweep { common, inject, train, score, axis, values, runs } => {
            let cfg = resolve(
                &common,
                build_overrides(&common, Some(&inject), Some(&train), Some(&score)),
            )?;
            let axis = SweepAxis::from_str(&axis).map_err(|e| CliError::usage(e.to_string()))?;
            let values = parse_values(&values)?;
            if runs == 0 {
                return Err(CliError::usage("`runs` must be >= 1, got 0".to_string()));
            }
            commands::cmd_sweep(&cfg, axis, &values, runs)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
