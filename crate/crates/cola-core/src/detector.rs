//! Training and anomaly-score inference.
//!
//! Training walks the node set in random batches; each node in a batch
//! contributes one positive and one negative instance pair, the summed BCE
//! loss over the `2B` pairs is backpropagated, and Adam updates the weights.
//!
//! Inference samples `R` positive and `R` negative pairs per node and turns
//! the two score series into one anomaly score per node. The baseline
//! estimator is the mean of per-round differences `s⁻ - s⁺`; the variants
//! used by the ablation harness are selected by [`EstimationMode`] and
//! [`ScoreSource`]. Each node draws from its own RNG stream, so inference is
//! reproducible under any worker fan-out.

use alloc::vec::Vec;

use crate::dense::Matrix;
use crate::error::{Error, Result};
use crate::graph::AttributedGraph;
use crate::math;
use crate::model::{
    adam_step, backward, bce_loss_from_logits, forward, init_params, AdamState, ForwardConfig,
    ModelParams, ReadoutMode,
};
use crate::rng::{SeedStream, STREAM_NODE_BASE, STREAM_PAIRS, STREAM_SHUFFLE};
use crate::sample::{epoch_batches, make_negative_pair, make_positive_pair};

/// Which statistic of the per-round series becomes the anomaly score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EstimationMode {
    #[default]
    Mean,
    Min,
    MeanPlusMin,
    Max,
    MeanPlusMax,
    Std,
    MeanPlusStd,
    NegStd,
    MeanMinusStd,
}

impl EstimationMode {
    pub const ALL: [EstimationMode; 9] = [
        EstimationMode::Mean,
        EstimationMode::Min,
        EstimationMode::MeanPlusMin,
        EstimationMode::Max,
        EstimationMode::MeanPlusMax,
        EstimationMode::Std,
        EstimationMode::MeanPlusStd,
        EstimationMode::NegStd,
        EstimationMode::MeanMinusStd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimationMode::Mean => "mean",
            EstimationMode::Min => "min",
            EstimationMode::MeanPlusMin => "mean+min",
            EstimationMode::Max => "max",
            EstimationMode::MeanPlusMax => "mean+max",
            EstimationMode::Std => "std",
            EstimationMode::MeanPlusStd => "mean+std",
            EstimationMode::NegStd => "-std",
            EstimationMode::MeanMinusStd => "mean-std",
        }
    }
}

impl core::str::FromStr for EstimationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(EstimationMode::Mean),
            "min" => Ok(EstimationMode::Min),
            "mean+min" => Ok(EstimationMode::MeanPlusMin),
            "max" => Ok(EstimationMode::Max),
            "mean+max" => Ok(EstimationMode::MeanPlusMax),
            "std" => Ok(EstimationMode::Std),
            "mean+std" => Ok(EstimationMode::MeanPlusStd),
            "-std" | "neg-std" => Ok(EstimationMode::NegStd),
            "mean-std" => Ok(EstimationMode::MeanMinusStd),
            other => Err(Error::InvalidConfig {
                field: "estimation_mode",
                message: alloc::format!("unknown estimation mode `{other}`"),
            }),
        }
    }
}

/// Which predicted scores feed the estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScoreSource {
    /// Per-round differences `s⁻ - s⁺`.
    #[default]
    Both,
    /// Positive scores only: the series is `-s⁺`.
    PositiveOnly,
    /// Negative scores only: the series is `s⁻`.
    NegativeOnly,
}

impl ScoreSource {
    pub fn name(self) -> &'static str {
        match self {
            ScoreSource::Both => "both",
            ScoreSource::PositiveOnly => "positive",
            ScoreSource::NegativeOnly => "negative",
        }
    }
}

impl core::str::FromStr for ScoreSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "both" | "+/-" => Ok(ScoreSource::Both),
            "positive" | "positive_only" | "pos" | "+" => Ok(ScoreSource::PositiveOnly),
            "negative" | "negative_only" | "neg" | "-" => Ok(ScoreSource::NegativeOnly),
            other => Err(Error::InvalidConfig {
                field: "score_source",
                message: alloc::format!("unknown score source `{other}`"),
            }),
        }
    }
}

/// Every knob of the pipeline. Defaults follow the reference protocol for
/// citation networks: `c = 4`, `d = 64`, `B = 300`, `R = 256`, 100 epochs at
/// learning rate 1e-3.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Training epochs `T`.
    pub epochs: usize,
    /// Batch size `B` (nodes per iteration; each yields 2 pairs).
    pub batch_size: usize,
    /// Adam learning rate.
    pub learning_rate: f64,
    /// Subgraph size `c`.
    pub subgraph_size: usize,
    /// Embedding dimension `d`.
    pub embedding_dim: usize,
    /// GNN layer count `L`.
    pub layers: usize,
    /// Inference sampling rounds `R`.
    pub rounds: usize,
    /// RWR restart probability.
    pub restart_prob: f64,
    /// Walk-step cap; `None` means `64 * subgraph_size`.
    pub max_steps: Option<usize>,
    /// Base RNG seed for this stage.
    pub seed: u64,
    pub readout: ReadoutMode,
    pub estimation: EstimationMode,
    pub score_source: ScoreSource,
    /// Apply the nonlinearity on the final layer (uniform application).
    pub activate_final_layer: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            batch_size: 300,
            learning_rate: 1e-3,
            subgraph_size: 4,
            embedding_dim: 64,
            layers: 1,
            rounds: 256,
            restart_prob: 0.5,
            max_steps: None,
            seed: 1,
            readout: ReadoutMode::Average,
            estimation: EstimationMode::Mean,
            score_source: ScoreSource::Both,
            activate_final_layer: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        fn positive(field: &'static str, v: usize) -> Result<()> {
            if v == 0 {
                return Err(Error::InvalidConfig {
                    field,
                    message: alloc::string::String::from("must be >= 1"),
                });
            }
            Ok(())
        }
        positive("batch_size", self.batch_size)?;
        positive("subgraph_size", self.subgraph_size)?;
        positive("embedding_dim", self.embedding_dim)?;
        positive("layers", self.layers)?;
        positive("rounds", self.rounds)?;
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig {
                field: "learning_rate",
                message: alloc::format!("must be positive and finite, got {}", self.learning_rate),
            });
        }
        if !(self.restart_prob > 0.0 && self.restart_prob < 1.0) {
            return Err(Error::InvalidConfig {
                field: "restart_prob",
                message: alloc::format!("must be in (0, 1), got {}", self.restart_prob),
            });
        }
        if self.max_steps == Some(0) {
            return Err(Error::InvalidConfig {
                field: "max_steps",
                message: alloc::string::String::from("must be >= 1"),
            });
        }
        Ok(())
    }

    pub fn effective_max_steps(&self) -> usize {
        self.max_steps.unwrap_or(64 * self.subgraph_size)
    }

    pub fn forward_config(&self) -> ForwardConfig {
        ForwardConfig {
            readout: self.readout,
            activate_final_layer: self.activate_final_layer,
        }
    }
}

/// Loss per iteration, in execution order.
#[derive(Debug, Clone, Default)]
pub struct TrainReport {
    pub losses: Vec<f64>,
}

/// Per-node anomaly scores plus the raw round-wise score matrices
/// (`n x R` each) they were estimated from.
#[derive(Debug, Clone, PartialEq)]
pub struct AnomalyScores {
    pub scores: Vec<f64>,
    pub pos_rounds: Matrix,
    pub neg_rounds: Matrix,
}

/// Runs the training phase and returns the learned parameters with a
/// per-iteration loss log. `epochs == 0` returns the freshly initialized
/// parameters untouched.
pub fn train(g: &AttributedGraph, cfg: &TrainConfig) -> Result<(ModelParams, TrainReport)> {
    cfg.validate()?;
    let n = g.node_count();
    if n < 2 {
        return Err(Error::InsufficientNodes { needed: 2, available: n });
    }
    let mut params = init_params(g.attr_dim(), cfg.embedding_dim, cfg.layers, cfg.seed)?;
    let mut state = AdamState::new(&params);
    let mut report = TrainReport::default();
    let fwd_cfg = cfg.forward_config();
    let max_steps = cfg.effective_max_steps();

    let mut shuffle_rng = SeedStream::new(cfg.seed, STREAM_SHUFFLE);
    let mut pair_rng = SeedStream::new(cfg.seed, STREAM_PAIRS);

    let mut iteration = 0usize;
    for _epoch in 0..cfg.epochs {
        let batches = epoch_batches(n, cfg.batch_size, &mut shuffle_rng)?;
        for batch in batches {
            let mut pairs = Vec::with_capacity(2 * batch.len());
            for &node in &batch {
                pairs.push(make_positive_pair(
                    g,
                    node,
                    cfg.subgraph_size,
                    cfg.restart_prob,
                    max_steps,
                    &mut pair_rng,
                )?);
            }
            for &node in &batch {
                pairs.push(make_negative_pair(
                    g,
                    node,
                    cfg.subgraph_size,
                    cfg.restart_prob,
                    max_steps,
                    &mut pair_rng,
                )?);
            }

            let mut traces = Vec::with_capacity(pairs.len());
            let mut logits = Vec::with_capacity(pairs.len());
            let mut labels = Vec::with_capacity(pairs.len());
            for pair in &pairs {
                let (_, trace) = forward(&params, pair, &fwd_cfg)?;
                logits.push(trace.logit);
                labels.push(pair.label);
                traces.push(trace);
            }
            let loss = bce_loss_from_logits(&logits, &labels)?;
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { iteration });
            }
            let grads = backward(&params, &fwd_cfg, &traces, &labels)?;
            adam_step(&mut params, &grads, &mut state, cfg.learning_rate)?;
            report.losses.push(loss);
            iteration += 1;
        }
    }
    Ok((params, report))
}

/// Scores a single node: `R` positive and `R` negative pairs drawn from the
/// node's own RNG stream, forwarded through the model. Returns the two
/// score rows. Node-major scheduling and per-node streams make the result
/// independent of how callers distribute nodes over workers.
pub fn score_node(
    g: &AttributedGraph,
    params: &ModelParams,
    cfg: &TrainConfig,
    node: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let fwd_cfg = cfg.forward_config();
    let max_steps = cfg.effective_max_steps();
    let mut rng = SeedStream::new(cfg.seed, STREAM_NODE_BASE + node as u64);
    let mut pos = Vec::with_capacity(cfg.rounds);
    let mut neg = Vec::with_capacity(cfg.rounds);
    for _ in 0..cfg.rounds {
        let pair = make_positive_pair(g, node, cfg.subgraph_size, cfg.restart_prob, max_steps, &mut rng)?;
        let (s, _) = forward(params, &pair, &fwd_cfg)?;
        pos.push(s);
        let pair = make_negative_pair(g, node, cfg.subgraph_size, cfg.restart_prob, max_steps, &mut rng)?;
        let (s, _) = forward(params, &pair, &fwd_cfg)?;
        neg.push(s);
    }
    Ok((pos, neg))
}

/// Runs the inference phase over every node. Deterministic per
/// `(graph, params, cfg.seed)`.
pub fn infer_scores(
    g: &AttributedGraph,
    params: &ModelParams,
    cfg: &TrainConfig,
) -> Result<AnomalyScores> {
    cfg.validate()?;
    let n = g.node_count();
    if n < 2 {
        return Err(Error::InsufficientNodes { needed: 2, available: n });
    }
    let mut pos_rounds = Matrix::zeros(n, cfg.rounds);
    let mut neg_rounds = Matrix::zeros(n, cfg.rounds);
    for node in 0..n {
        let (pos, neg) = score_node(g, params, cfg, node)?;
        pos_rounds.row_mut(node).copy_from_slice(&pos);
        neg_rounds.row_mut(node).copy_from_slice(&neg);
    }
    scores_from_rounds(&pos_rounds, &neg_rounds, cfg.estimation, cfg.score_source)
}

/// Applies the estimator to already-computed round matrices.
pub fn scores_from_rounds(
    pos_rounds: &Matrix,
    neg_rounds: &Matrix,
    mode: EstimationMode,
    source: ScoreSource,
) -> Result<AnomalyScores> {
    if pos_rounds.rows() != neg_rounds.rows() || pos_rounds.cols() != neg_rounds.cols() {
        return Err(Error::ShapeMismatch { context: "round matrices" });
    }
    let n = pos_rounds.rows();
    let mut scores = Vec::with_capacity(n);
    for node in 0..n {
        scores.push(estimate(pos_rounds.row(node), neg_rounds.row(node), mode, source)?);
    }
    Ok(AnomalyScores {
        scores,
        pos_rounds: pos_rounds.clone(),
        neg_rounds: neg_rounds.clone(),
    })
}

/// Turns one node's `R`-round positive/negative score series into a single
/// anomaly score. With `source = Both` the series is `d_r = s⁻_r - s⁺_r`;
/// `mean` then reproduces the multi-round average difference. `std` is the
/// population standard deviation of the series; composite modes sum their
/// named terms.
pub fn estimate(
    pos_rounds: &[f64],
    neg_rounds: &[f64],
    mode: EstimationMode,
    source: ScoreSource,
) -> Result<f64> {
    if pos_rounds.is_empty() || pos_rounds.len() != neg_rounds.len() {
        return Err(Error::LengthMismatch {
            left: pos_rounds.len(),
            right: neg_rounds.len(),
        });
    }
    let series: Vec<f64> = match source {
        ScoreSource::Both => pos_rounds
            .iter()
            .zip(neg_rounds)
            .map(|(&p, &n)| n - p)
            .collect(),
        ScoreSource::PositiveOnly => pos_rounds.iter().map(|&p| -p).collect(),
        ScoreSource::NegativeOnly => neg_rounds.to_vec(),
    };
    let r = series.len() as f64;
    let mean = series.iter().sum::<f64>() / r;
    let needs_extreme = matches!(
        mode,
        EstimationMode::Min | EstimationMode::MeanPlusMin | EstimationMode::Max | EstimationMode::MeanPlusMax
    );
    let (min, max) = if needs_extreme {
        let mut lo = series[0];
        let mut hi = series[0];
        for &v in &series[1..] {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    } else {
        (0.0, 0.0)
    };
    let std = if matches!(
        mode,
        EstimationMode::Std | EstimationMode::MeanPlusStd | EstimationMode::NegStd | EstimationMode::MeanMinusStd
    ) {
        let var = series.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / r;
        math::sqrt(var)
    } else {
        0.0
    };
    Ok(match mode {
        EstimationMode::Mean => mean,
        EstimationMode::Min => min,
        EstimationMode::MeanPlusMin => mean + min,
        EstimationMode::Max => max,
        EstimationMode::MeanPlusMax => mean + max,
        EstimationMode::Std => std,
        EstimationMode::MeanPlusStd => mean + std,
        EstimationMode::NegStd => -std,
        EstimationMode::MeanMinusStd => mean - std,
    })
}
