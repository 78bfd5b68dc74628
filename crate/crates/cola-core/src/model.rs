//! The GNN-based contrastive scorer.
//!
//! A subgraph passes through `L` graph-convolution layers
//! (`H' = φ(S · H · W)` with `S` the self-loop-normalized adjacency); the
//! target node passes through the same weight matrices without the
//! aggregation step (`z' = φ(z · W)`), sharing `W` with the convolution
//! path. A readout collapses the subgraph embeddings to one vector and a
//! bilinear discriminator scores agreement between subgraph and node:
//! `s = σ(e_lg · W_d · e_tnᵀ)`.
//!
//! No layer carries a bias term. Training minimizes the summed binary
//! cross-entropy of scores against pair labels; `backward` produces exact
//! analytic gradients (the shared layer weights accumulate both paths'
//! contributions).

use alloc::vec;
use alloc::vec::Vec;

use crate::dense::{dot, mat_vec, vec_mat, Matrix};
use crate::error::{Error, Result};
use crate::math;
use crate::rng::{SeedStream, STREAM_INIT};
use crate::sample::InstancePair;

/// Pointwise nonlinearity applied after every layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Activation {
    #[default]
    Relu,
}

impl Activation {
    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    x
                } else {
                    0.0
                }
            }
        }
    }

    #[inline]
    fn derivative(self, pre: f64) -> f64 {
        match self {
            Activation::Relu => {
                if pre > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// How subgraph node embeddings collapse into a single vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReadoutMode {
    /// Column means.
    #[default]
    Average,
    /// Columnwise maximum.
    Max,
    /// Columnwise minimum.
    Min,
    /// Convex combination with softmax weights from inner products against
    /// the target-node embedding.
    WeightedAverage,
}

impl ReadoutMode {
    pub fn name(self) -> &'static str {
        match self {
            ReadoutMode::Average => "average",
            ReadoutMode::Max => "max",
            ReadoutMode::Min => "min",
            ReadoutMode::WeightedAverage => "weighted_average",
        }
    }
}

impl core::str::FromStr for ReadoutMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "average" | "avg" | "mean" => Ok(ReadoutMode::Average),
            "max" => Ok(ReadoutMode::Max),
            "min" => Ok(ReadoutMode::Min),
            "weighted_average" | "weighted" | "weighted_avg" => Ok(ReadoutMode::WeightedAverage),
            other => Err(Error::InvalidConfig {
                field: "readout",
                message: alloc::format!("unknown readout mode `{other}`"),
            }),
        }
    }
}

/// Forward-pass switches that are not learnable state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForwardConfig {
    pub readout: ReadoutMode,
    /// Whether the nonlinearity is applied on the last layer's output. The
    /// layer equations apply it uniformly, so this defaults to true; it is
    /// exposed for A/B experiments.
    pub activate_final_layer: bool,
}

impl Default for ForwardConfig {
    fn default() -> Self {
        ForwardConfig {
            readout: ReadoutMode::Average,
            activate_final_layer: true,
        }
    }
}

/// Learnable weights: `L` layer matrices chained `f -> d -> ... -> d` plus
/// the `d x d` discriminator matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub layer_weights: Vec<Matrix>,
    pub disc_weight: Matrix,
    pub activation: Activation,
}

impl ModelParams {
    pub fn attr_dim(&self) -> usize {
        self.layer_weights[0].rows()
    }

    pub fn embedding_dim(&self) -> usize {
        self.disc_weight.rows()
    }

    pub fn layer_count(&self) -> usize {
        self.layer_weights.len()
    }

    pub fn is_finite(&self) -> bool {
        self.layer_weights.iter().all(Matrix::is_finite) && self.disc_weight.is_finite()
    }
}

fn glorot_uniform(rows: usize, cols: usize, rng: &mut SeedStream) -> Matrix {
    let bound = math::sqrt(6.0 / (rows + cols) as f64);
    let mut m = Matrix::zeros(rows, cols);
    for v in m.data_mut() {
        *v = (2.0 * rng.next_f64() - 1.0) * bound;
    }
    m
}

/// Glorot-uniform initialization of all weights, deterministic per seed.
pub fn init_params(attr_dim: usize, embedding_dim: usize, layers: usize, seed: u64) -> Result<ModelParams> {
    if attr_dim < 1 || embedding_dim < 1 || layers < 1 {
        return Err(Error::InvalidConfig {
            field: "model dims",
            message: alloc::format!("f={attr_dim}, d={embedding_dim}, L={layers} must all be >= 1"),
        });
    }
    let mut rng = SeedStream::new(seed, STREAM_INIT);
    let mut layer_weights = Vec::with_capacity(layers);
    let mut in_dim = attr_dim;
    for _ in 0..layers {
        layer_weights.push(glorot_uniform(in_dim, embedding_dim, &mut rng));
        in_dim = embedding_dim;
    }
    let disc_weight = glorot_uniform(embedding_dim, embedding_dim, &mut rng);
    Ok(ModelParams {
        layer_weights,
        disc_weight,
        activation: Activation::Relu,
    })
}

/// Collapses subgraph embeddings (`c x d`) into a `d`-vector. `query` is the
/// target-node embedding; only [`ReadoutMode::WeightedAverage`] uses it.
pub fn readout(embeddings: &Matrix, mode: ReadoutMode, query: &[f64]) -> Result<Vec<f64>> {
    let c = embeddings.rows();
    let d = embeddings.cols();
    if c == 0 || d == 0 {
        return Err(Error::EmptyNodeList);
    }
    match mode {
        ReadoutMode::Average => {
            let mut out = vec![0.0; d];
            for k in 0..c {
                for (o, &v) in out.iter_mut().zip(embeddings.row(k)) {
                    *o += v;
                }
            }
            for o in &mut out {
                *o /= c as f64;
            }
            Ok(out)
        }
        ReadoutMode::Max => {
            let mut out = embeddings.row(0).to_vec();
            for k in 1..c {
                for (o, &v) in out.iter_mut().zip(embeddings.row(k)) {
                    if v > *o {
                        *o = v;
                    }
                }
            }
            Ok(out)
        }
        ReadoutMode::Min => {
            let mut out = embeddings.row(0).to_vec();
            for k in 1..c {
                for (o, &v) in out.iter_mut().zip(embeddings.row(k)) {
                    if v < *o {
                        *o = v;
                    }
                }
            }
            Ok(out)
        }
        ReadoutMode::WeightedAverage => {
            if query.len() != d {
                return Err(Error::ShapeMismatch { context: "weighted readout query" });
            }
            let weights = softmax_weights(embeddings, query);
            let mut out = vec![0.0; d];
            for (k, &w) in weights.iter().enumerate() {
                for (o, &v) in out.iter_mut().zip(embeddings.row(k)) {
                    *o += w * v;
                }
            }
            Ok(out)
        }
    }
}

fn softmax_weights(embeddings: &Matrix, query: &[f64]) -> Vec<f64> {
    let c = embeddings.rows();
    let mut logits = Vec::with_capacity(c);
    for k in 0..c {
        logits.push(dot(embeddings.row(k), query));
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    let mut weights = Vec::with_capacity(c);
    for &l in &logits {
        let e = math::exp(l - max);
        sum += e;
        weights.push(e);
    }
    for w in &mut weights {
        *w /= sum;
    }
    weights
}

/// Per-pair forward cache: everything backward needs.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    /// Normalized subgraph adjacency `S`.
    pub norm_adj: Matrix,
    /// Inputs to each convolution layer; `gcn_inputs[0]` is the anonymized
    /// attribute matrix.
    pub gcn_inputs: Vec<Matrix>,
    /// Pre-activation outputs `S · H · W` per layer.
    pub gcn_pre: Vec<Matrix>,
    /// Final subgraph node embeddings `E` (`c x d`).
    pub subgraph_embeddings: Matrix,
    /// Inputs to each node-path layer; `node_inputs[0]` is the raw target
    /// attribute row.
    pub node_inputs: Vec<Vec<f64>>,
    /// Pre-activation node-path outputs per layer.
    pub node_pre: Vec<Vec<f64>>,
    /// Subgraph embedding after readout.
    pub local_embedding: Vec<f64>,
    /// Target-node embedding.
    pub target_embedding: Vec<f64>,
    /// Pre-sigmoid discriminator output.
    pub logit: f64,
    /// `σ(logit)`.
    pub score: f64,
}

fn ensure_finite(data: &[f64], stage: &'static str) -> Result<()> {
    if data.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { stage })
    }
}

/// Scores one instance pair, returning the predicted agreement `s ∈ (0, 1)`
/// together with the trace consumed by [`backward`].
pub fn forward(
    params: &ModelParams,
    pair: &InstancePair,
    config: &ForwardConfig,
) -> Result<(f64, ForwardTrace)> {
    let c = pair.size();
    let f = params.attr_dim();
    let layers = params.layer_count();
    if pair.attributes.cols() != f || pair.target_attr.len() != f {
        return Err(Error::ShapeMismatch { context: "pair attribute width vs model input dim" });
    }
    if pair.adjacency.rows() != c || pair.adjacency.cols() != c || pair.attributes.rows() != c {
        return Err(Error::ShapeMismatch { context: "pair adjacency vs attribute rows" });
    }

    let norm_adj = crate::graph::normalize_adjacency(&pair.adjacency)?;
    let act = params.activation;

    let mut gcn_inputs = Vec::with_capacity(layers);
    let mut gcn_pre = Vec::with_capacity(layers);
    let mut hidden = pair.attributes.clone();
    for (l, w) in params.layer_weights.iter().enumerate() {
        let aggregated = norm_adj.mul(&hidden);
        let pre = aggregated.mul(w);
        ensure_finite(pre.data(), "gcn layer")?;
        let last = l + 1 == layers;
        let mut post = pre.clone();
        if !last || config.activate_final_layer {
            for v in post.data_mut() {
                *v = act.apply(*v);
            }
        }
        gcn_inputs.push(hidden);
        gcn_pre.push(pre);
        hidden = post;
    }
    let subgraph_embeddings = hidden;

    let mut node_inputs = Vec::with_capacity(layers);
    let mut node_pre = Vec::with_capacity(layers);
    let mut z = pair.target_attr.clone();
    for (l, w) in params.layer_weights.iter().enumerate() {
        let pre = vec_mat(&z, w);
        ensure_finite(&pre, "node layer")?;
        let last = l + 1 == layers;
        let post = if !last || config.activate_final_layer {
            pre.iter().map(|&v| act.apply(v)).collect()
        } else {
            pre.clone()
        };
        node_inputs.push(z);
        node_pre.push(pre);
        z = post;
    }
    let target_embedding = z;

    let local_embedding = readout(&subgraph_embeddings, config.readout, &target_embedding)?;
    ensure_finite(&local_embedding, "readout")?;

    let logit = dot(&vec_mat(&local_embedding, &params.disc_weight), &target_embedding);
    if !logit.is_finite() {
        return Err(Error::NonFinite { stage: "discriminator" });
    }
    let score = math::sigmoid(logit);

    let trace = ForwardTrace {
        norm_adj,
        gcn_inputs,
        gcn_pre,
        subgraph_embeddings,
        node_inputs,
        node_pre,
        local_embedding,
        target_embedding,
        logit,
        score,
    };
    Ok((score, trace))
}

/// Binary cross-entropy `-Σ [y ln s + (1-y) ln(1-s)]` over scores in (0, 1).
pub fn bce_loss(scores: &[f64], labels: &[u8]) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::EmptyNodeList);
    }
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch { left: scores.len(), right: labels.len() });
    }
    let mut loss = 0.0;
    for (&s, &y) in scores.iter().zip(labels) {
        loss -= if y != 0 { math::ln(s) } else { math::ln(1.0 - s) };
    }
    Ok(loss)
}

/// The same loss evaluated from pre-sigmoid logits:
/// `Σ [softplus(logit) - y·logit]`. Equal in exact arithmetic to
/// [`bce_loss`] on `σ(logit)`, but safe when scores saturate.
pub fn bce_loss_from_logits(logits: &[f64], labels: &[u8]) -> Result<f64> {
    if logits.is_empty() {
        return Err(Error::EmptyNodeList);
    }
    if logits.len() != labels.len() {
        return Err(Error::LengthMismatch { left: logits.len(), right: labels.len() });
    }
    let mut loss = 0.0;
    for (&x, &y) in logits.iter().zip(labels) {
        loss += math::softplus(x) - if y != 0 { x } else { 0.0 };
    }
    Ok(loss)
}

/// Gradient accumulator shaped like [`ModelParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layer_weights: Vec<Matrix>,
    pub disc_weight: Matrix,
}

impl Gradients {
    pub fn zeros_like(params: &ModelParams) -> Self {
        Gradients {
            layer_weights: params
                .layer_weights
                .iter()
                .map(|w| Matrix::zeros(w.rows(), w.cols()))
                .collect(),
            disc_weight: Matrix::zeros(params.disc_weight.rows(), params.disc_weight.cols()),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layer_weights.iter().all(Matrix::is_finite) && self.disc_weight.is_finite()
    }
}

/// Exact gradient of the summed BCE loss over a batch of traces with
/// respect to every weight matrix. Traces must come from [`forward`] under
/// the same `params` and `config`.
pub fn backward(
    params: &ModelParams,
    config: &ForwardConfig,
    traces: &[ForwardTrace],
    labels: &[u8],
) -> Result<Gradients> {
    if traces.len() != labels.len() {
        return Err(Error::LengthMismatch { left: traces.len(), right: labels.len() });
    }
    let layers = params.layer_count();
    let act = params.activation;
    let mut grads = Gradients::zeros_like(params);

    for (trace, &label) in traces.iter().zip(labels) {
        let y = if label != 0 { 1.0 } else { 0.0 };
        let g_logit = trace.score - y;

        // Discriminator: logit = e_lg · W_d · e_tnᵀ.
        grads
            .disc_weight
            .add_outer(g_logit, &trace.local_embedding, &trace.target_embedding);
        let mut g_local = mat_vec(&params.disc_weight, &trace.target_embedding);
        for v in &mut g_local {
            *v *= g_logit;
        }
        let mut g_target = vec_mat(&trace.local_embedding, &params.disc_weight);
        for v in &mut g_target {
            *v *= g_logit;
        }

        // Readout.
        let e = &trace.subgraph_embeddings;
        let c = e.rows();
        let d = e.cols();
        let mut g_embeddings = Matrix::zeros(c, d);
        match config.readout {
            ReadoutMode::Average => {
                let inv = 1.0 / c as f64;
                for k in 0..c {
                    for (o, &g) in g_embeddings.row_mut(k).iter_mut().zip(&g_local) {
                        *o = g * inv;
                    }
                }
            }
            ReadoutMode::Max | ReadoutMode::Min => {
                let take_max = config.readout == ReadoutMode::Max;
                for j in 0..d {
                    let mut arg = 0;
                    let mut best = e.at(0, j);
                    for k in 1..c {
                        let v = e.at(k, j);
                        if (take_max && v > best) || (!take_max && v < best) {
                            best = v;
                            arg = k;
                        }
                    }
                    g_embeddings.set(arg, j, g_local[j]);
                }
            }
            ReadoutMode::WeightedAverage => {
                let weights = softmax_weights(e, &trace.target_embedding);
                let mut g_weights = Vec::with_capacity(c);
                for k in 0..c {
                    g_weights.push(dot(&g_local, e.row(k)));
                }
                let weighted_sum: f64 = weights.iter().zip(&g_weights).map(|(w, g)| w * g).sum();
                for k in 0..c {
                    let g_sim = weights[k] * (g_weights[k] - weighted_sum);
                    let row = g_embeddings.row_mut(k);
                    for ((o, &g), &q) in row
                        .iter_mut()
                        .zip(&g_local)
                        .zip(&trace.target_embedding)
                    {
                        *o = weights[k] * g + g_sim * q;
                    }
                    for (t, &v) in g_target.iter_mut().zip(e.row(k)) {
                        *t += g_sim * v;
                    }
                }
            }
        }

        // Convolution path, last layer to first.
        let mut g_hidden = g_embeddings;
        for l in (0..layers).rev() {
            let pre = &trace.gcn_pre[l];
            let mut delta = g_hidden;
            if l + 1 != layers || config.activate_final_layer {
                for (gv, &pv) in delta.data_mut().iter_mut().zip(pre.data()) {
                    *gv *= act.derivative(pv);
                }
            }
            let aggregated = trace.norm_adj.mul(&trace.gcn_inputs[l]);
            grads.layer_weights[l].add_assign(&aggregated.transpose_mul(&delta));
            if l > 0 {
                g_hidden = trace.norm_adj.mul(&delta.mul_transpose(&params.layer_weights[l]));
            } else {
                g_hidden = Matrix::zeros(0, 0);
            }
        }

        // Node path, sharing the same weight matrices.
        let mut g_z = g_target;
        for l in (0..layers).rev() {
            let pre = &trace.node_pre[l];
            let mut delta = g_z;
            if l + 1 != layers || config.activate_final_layer {
                for (gv, &pv) in delta.iter_mut().zip(pre) {
                    *gv *= act.derivative(pv);
                }
            }
            grads.layer_weights[l].add_outer(1.0, &trace.node_inputs[l], &delta);
            if l > 0 {
                g_z = vec_mat(&delta, &transpose(&params.layer_weights[l]));
            } else {
                g_z = Vec::new();
            }
        }
        let _ = g_z;
    }

    Ok(grads)
}

fn transpose(m: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(m.cols(), m.rows());
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            out.set(c, r, m.at(r, c));
        }
    }
    out
}

/// Adam moment accumulators; shapes mirror the parameters.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub first_layers: Vec<Matrix>,
    pub second_layers: Vec<Matrix>,
    pub first_disc: Matrix,
    pub second_disc: Matrix,
    pub step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(params: &ModelParams) -> Self {
        let zeros = |w: &Matrix| Matrix::zeros(w.rows(), w.cols());
        AdamState {
            first_layers: params.layer_weights.iter().map(zeros).collect(),
            second_layers: params.layer_weights.iter().map(zeros).collect(),
            first_disc: zeros(&params.disc_weight),
            second_disc: zeros(&params.disc_weight),
            step: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

fn adam_update(
    param: &mut Matrix,
    grad: &Matrix,
    first: &mut Matrix,
    second: &mut Matrix,
    lr: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    bias1: f64,
    bias2: f64,
) {
    for (((p, &g), m), v) in param
        .data_mut()
        .iter_mut()
        .zip(grad.data())
        .zip(first.data_mut().iter_mut())
        .zip(second.data_mut().iter_mut())
    {
        *m = beta1 * *m + (1.0 - beta1) * g;
        *v = beta2 * *v + (1.0 - beta2) * g * g;
        let m_hat = *m / bias1;
        let v_hat = *v / bias2;
        *p -= lr * m_hat / (math::sqrt(v_hat) + epsilon);
    }
}

/// One bias-corrected Adam step over all parameters.
pub fn adam_step(
    params: &mut ModelParams,
    grads: &Gradients,
    state: &mut AdamState,
    lr: f64,
) -> Result<()> {
    if !grads.is_finite() {
        return Err(Error::NonFinite { stage: "gradients" });
    }
    if grads.layer_weights.len() != params.layer_weights.len() {
        return Err(Error::ShapeMismatch { context: "adam gradient layers" });
    }
    state.step += 1;
    let bias1 = 1.0 - libm::pow(state.beta1, state.step as f64);
    let bias2 = 1.0 - libm::pow(state.beta2, state.step as f64);
    for (l, w) in params.layer_weights.iter_mut().enumerate() {
        adam_update(
            w,
            &grads.layer_weights[l],
            &mut state.first_layers[l],
            &mut state.second_layers[l],
            lr,
            state.beta1,
            state.beta2,
            state.epsilon,
            bias1,
            bias2,
        );
    }
    adam_update(
        &mut params.disc_weight,
        &grads.disc_weight,
        &mut state.first_disc,
        &mut state.second_disc,
        lr,
        state.beta1,
        state.beta2,
        state.epsilon,
        bias1,
        bias2,
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::AttributedGraph;
    use crate::sample::make_positive_pair;

    fn toy_pair(seed: u64) -> InstancePair {
        let mut rng = SeedStream::new(seed, 5);
        let edges = [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)];
        let mut attrs = Matrix::zeros(4, 3);
        for v in attrs.data_mut() {
            *v = rng.next_f64();
        }
        let g = AttributedGraph::from_edges(&edges, attrs, None).unwrap();
        make_positive_pair(&g, 0, 3, 0.5, 128, &mut rng).unwrap()
    }

    #[test]
    fn init_shapes_and_determinism() {
        let p = init_params(4, 3, 1, 9).unwrap();
        assert_eq!((p.layer_weights[0].rows(), p.layer_weights[0].cols()), (4, 3));
        assert_eq!((p.disc_weight.rows(), p.disc_weight.cols()), (3, 3));
        let q = init_params(4, 3, 1, 9).unwrap();
        assert_eq!(p, q);
        let r = init_params(4, 3, 1, 10).unwrap();
        assert_ne!(p, r);
    }

    #[test]
    fn init_respects_glorot_bound() {
        let p = init_params(6, 4, 2, 3).unwrap();
        let bound0 = math::sqrt(6.0 / 10.0);
        assert!(p.layer_weights[0].data().iter().all(|v| v.abs() < bound0));
    }

    #[test]
    fn zero_weights_give_half_score() {
        let pair = toy_pair(1);
        let params = ModelParams {
            layer_weights: alloc::vec![Matrix::zeros(3, 2)],
            disc_weight: Matrix::zeros(2, 2),
            activation: Activation::Relu,
        };
        let (s, trace) = forward(&params, &pair, &ForwardConfig::default()).unwrap();
        assert_eq!(s, 0.5);
        assert_eq!(trace.logit, 0.0);
        assert!(trace.local_embedding.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn forward_is_deterministic() {
        let pair = toy_pair(2);
        let params = init_params(3, 4, 1, 7).unwrap();
        let cfg = ForwardConfig::default();
        let (a, _) = forward(&params, &pair, &cfg).unwrap();
        let (b, _) = forward(&params, &pair, &cfg).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn single_node_subgraph_average_readout_is_the_row() {
        let g = AttributedGraph::from_edges(&[(0, 1)], Matrix::from_vec(2, 2, alloc::vec![1.0, 2.0, 3.0, 4.0]), None).unwrap();
        let mut rng = SeedStream::new(3, 0);
        let pair = make_positive_pair(&g, 0, 1, 0.5, 16, &mut rng).unwrap();
        let params = init_params(2, 3, 1, 11).unwrap();
        let (_, trace) = forward(&params, &pair, &ForwardConfig::default()).unwrap();
        assert_eq!(trace.local_embedding, trace.subgraph_embeddings.row(0));
    }

    #[test]
    fn readout_modes_arithmetic() {
        let e = Matrix::from_vec(2, 2, alloc::vec![1.0, 2.0, 3.0, 0.0]);
        let q = [0.0, 0.0];
        assert_eq!(readout(&e, ReadoutMode::Max, &q).unwrap(), alloc::vec![3.0, 2.0]);
        assert_eq!(readout(&e, ReadoutMode::Min, &q).unwrap(), alloc::vec![1.0, 0.0]);
        assert_eq!(readout(&e, ReadoutMode::Average, &q).unwrap(), alloc::vec![2.0, 1.0]);
    }

    #[test]
    fn readout_identical_rows_any_mode() {
        let e = Matrix::from_vec(3, 2, alloc::vec![0.5, -1.0, 0.5, -1.0, 0.5, -1.0]);
        let q = [1.0, 2.0];
        for mode in [
            ReadoutMode::Average,
            ReadoutMode::Max,
            ReadoutMode::Min,
            ReadoutMode::WeightedAverage,
        ] {
            let out = readout(&e, mode, &q).unwrap();
            assert!((out[0] - 0.5).abs() < 1e-15 && (out[1] + 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn weighted_readout_with_orthogonal_query_is_average() {
        let e = Matrix::from_vec(2, 2, alloc::vec![1.0, 0.0, 3.0, 0.0]);
        let q = [0.0, 5.0];
        let weighted = readout(&e, ReadoutMode::WeightedAverage, &q).unwrap();
        let average = readout(&e, ReadoutMode::Average, &q).unwrap();
        for (a, b) in weighted.iter().zip(&average) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn bce_matches_hand_values() {
        let loss = bce_loss(&[0.5], &[1]).unwrap();
        assert!((loss - core::f64::consts::LN_2).abs() < 1e-12);
        let near_one = bce_loss(&[1.0 - 1e-9], &[1]).unwrap();
        assert!(near_one < 1e-8);
    }

    #[test]
    fn bce_from_logits_matches_score_form() {
        let logits = [0.3, -1.2, 2.5, 0.0];
        let labels = [1, 0, 1, 0];
        let scores: alloc::vec::Vec<f64> = logits.iter().map(|&x| math::sigmoid(x)).collect();
        let a = bce_loss(&scores, &labels).unwrap();
        let b = bce_loss_from_logits(&logits, &labels).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn bce_rejects_mismatched_lengths() {
        assert!(bce_loss(&[0.5, 0.5], &[1]).is_err());
        assert!(bce_loss(&[], &[]).is_err());
    }

    #[test]
    fn duplicated_batch_doubles_gradients() {
        let pair = toy_pair(4);
        let params = init_params(3, 4, 1, 13).unwrap();
        let cfg = ForwardConfig::default();
        let (_, trace) = forward(&params, &pair, &cfg).unwrap();
        let single = backward(&params, &cfg, &[trace.clone()], &[1]).unwrap();
        let double = backward(&params, &cfg, &[trace.clone(), trace], &[1, 1]).unwrap();
        for (s, d) in single.layer_weights[0].data().iter().zip(double.layer_weights[0].data()) {
            assert!((2.0 * s - d).abs() < 1e-12);
        }
        for (s, d) in single.disc_weight.data().iter().zip(double.disc_weight.data()) {
            assert!((2.0 * s - d).abs() < 1e-12);
        }
    }

    #[test]
    fn adam_zero_gradient_keeps_params() {
        let mut params = init_params(3, 2, 1, 5).unwrap();
        let before = params.clone();
        let grads = Gradients::zeros_like(&params);
        let mut state = AdamState::new(&params);
        adam_step(&mut params, &grads, &mut state, 0.1).unwrap();
        assert_eq!(params, before);
        assert_eq!(state.step, 1);
    }

    #[test]
    fn adam_first_step_scalar_oracle() {
        // First step with gradient g: m̂ = g, v̂ = g², so the update is
        // -lr·g/(|g| + ε); for g = 1, lr = 0.1 the parameter drops by ~0.1.
        let mut params = ModelParams {
            layer_weights: alloc::vec![Matrix::from_vec(1, 1, alloc::vec![2.0])],
            disc_weight: Matrix::zeros(1, 1),
            activation: Activation::Relu,
        };
        let grads = Gradients {
            layer_weights: alloc::vec![Matrix::from_vec(1, 1, alloc::vec![1.0])],
            disc_weight: Matrix::zeros(1, 1),
        };
        let mut state = AdamState::new(&params);
        adam_step(&mut params, &grads, &mut state, 0.1).unwrap();
        let expected = 2.0 - 0.1 * 1.0 / (1.0 + 1e-8);
        assert!((params.layer_weights[0].at(0, 0) - expected).abs() < 1e-12);
    }

    #[test]
    fn adam_rejects_non_finite_gradients() {
        let mut params = init_params(2, 2, 1, 1).unwrap();
        let mut grads = Gradients::zeros_like(&params);
        grads.disc_weight.set(0, 0, f64::NAN);
        let mut state = AdamState::new(&params);
        assert!(adam_step(&mut params, &grads, &mut state, 0.1).is_err());
    }

    #[test]
    fn weight_sharing_moves_both_paths() {
        let pair = toy_pair(6);
        let mut params = init_params(3, 4, 1, 17).unwrap();
        let cfg = ForwardConfig::default();
        let (_, before) = forward(&params, &pair, &cfg).unwrap();
        let bumped = params.layer_weights[0].at(0, 0) + 0.5;
        params.layer_weights[0].set(0, 0, bumped);
        let (_, after) = forward(&params, &pair, &cfg).unwrap();
        assert_ne!(before.subgraph_embeddings, after.subgraph_embeddings);
        assert_ne!(before.target_embedding, after.target_embedding);
    }
}
