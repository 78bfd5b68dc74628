//! Finite-difference gradient verification.
//!
//! [`check_gradients`] compares the analytic gradients from
//! [`crate::model::backward`] against central finite differences of the
//! batch BCE loss, parameter entry by parameter entry. The numeric side
//! only ever calls `forward` + `bce_loss_from_logits`, so it is independent
//! of the backward implementation it checks.

use alloc::vec::Vec;

use crate::dense::Matrix;
use crate::error::Result;
use crate::model::{backward, bce_loss_from_logits, forward, ForwardConfig, Gradients, ModelParams};
use crate::rng::SeedStream;
use crate::sample::InstancePair;

pub const DEFAULT_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy)]
pub struct GradCheckReport {
    /// Largest relative error across every parameter entry.
    pub max_rel_err: f64,
    /// Number of entries compared.
    pub checked: usize,
}

fn batch_loss(params: &ModelParams, config: &ForwardConfig, pairs: &[InstancePair], labels: &[u8]) -> Result<f64> {
    let mut logits = Vec::with_capacity(pairs.len());
    for pair in pairs {
        let (_, trace) = forward(params, pair, config)?;
        logits.push(trace.logit);
    }
    bce_loss_from_logits(&logits, labels)
}

fn relative_error(a: f64, b: f64) -> f64 {
    let diff = libm::fabs(a - b);
    let scale = libm::fabs(a).max(libm::fabs(b)).max(1e-6);
    diff / scale
}

/// Central-difference loss gradient for a single parameter entry.
fn numeric_entry(
    params: &ModelParams,
    config: &ForwardConfig,
    pairs: &[InstancePair],
    labels: &[u8],
    layer: Option<usize>,
    r: usize,
    c: usize,
    step: f64,
) -> Result<f64> {
    let mut bumped = params.clone();
    {
        let m = target_matrix(&mut bumped, layer);
        m.set(r, c, m.at(r, c) + step);
    }
    let up = batch_loss(&bumped, config, pairs, labels)?;
    {
        let m = target_matrix(&mut bumped, layer);
        m.set(r, c, m.at(r, c) - 2.0 * step);
    }
    let down = batch_loss(&bumped, config, pairs, labels)?;
    Ok((up - down) / (2.0 * step))
}

fn target_matrix<'p>(params: &'p mut ModelParams, layer: Option<usize>) -> &'p mut Matrix {
    match layer {
        Some(l) => &mut params.layer_weights[l],
        None => &mut params.disc_weight,
    }
}

/// Verifies every analytic gradient entry against central finite
/// differences of the loss; returns the worst relative error seen.
pub fn check_gradients(
    params: &ModelParams,
    config: &ForwardConfig,
    pairs: &[InstancePair],
    labels: &[u8],
    step: f64,
) -> Result<GradCheckReport> {
    let mut traces = Vec::with_capacity(pairs.len());
    for pair in pairs {
        let (_, trace) = forward(params, pair, config)?;
        traces.push(trace);
    }
    let analytic: Gradients = backward(params, config, &traces, labels)?;

    let mut max_rel_err = 0.0f64;
    let mut checked = 0usize;
    for (l, grad) in analytic.layer_weights.iter().enumerate() {
        for r in 0..grad.rows() {
            for c in 0..grad.cols() {
                let numeric = numeric_entry(params, config, pairs, labels, Some(l), r, c, step)?;
                max_rel_err = max_rel_err.max(relative_error(grad.at(r, c), numeric));
                checked += 1;
            }
        }
    }
    for r in 0..analytic.disc_weight.rows() {
        for c in 0..analytic.disc_weight.cols() {
            let numeric = numeric_entry(params, config, pairs, labels, None, r, c, step)?;
            max_rel_err = max_rel_err.max(relative_error(analytic.disc_weight.at(r, c), numeric));
            checked += 1;
        }
    }
    Ok(GradCheckReport { max_rel_err, checked })
}

/// Random instance pairs with the structural invariants of sampled pairs
/// (symmetric zero-diagonal binary adjacency, anonymized first row, roughly
/// a third of the attribute entries zero). Labels alternate 1/0.
pub fn random_pairs(
    attr_dim: usize,
    subgraph_size: usize,
    count: usize,
    rng: &mut SeedStream,
) -> (Vec<InstancePair>, Vec<u8>) {
    let mut pairs = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);
    for i in 0..count {
        let c = subgraph_size;
        let mut adjacency = Matrix::zeros(c, c);
        for a in 0..c {
            for b in (a + 1)..c {
                if rng.next_below(2) == 1 {
                    adjacency.set(a, b, 1.0);
                    adjacency.set(b, a, 1.0);
                }
            }
        }
        let mut attributes = Matrix::zeros(c, attr_dim);
        for v in attributes.data_mut() {
            *v = if rng.next_below(3) == 0 {
                0.0
            } else {
                2.0 * rng.next_f64() - 1.0
            };
        }
        for v in attributes.row_mut(0) {
            *v = 0.0;
        }
        let target_attr: Vec<f64> = (0..attr_dim)
            .map(|_| {
                if rng.next_below(3) == 0 {
                    0.0
                } else {
                    2.0 * rng.next_f64() - 1.0
                }
            })
            .collect();
        let label = (i % 2 == 0) as u8;
        pairs.push(InstancePair {
            target: 0,
            sub_nodes: (0..c).collect(),
            adjacency,
            attributes,
            target_attr,
            label,
        });
        labels.push(label);
    }
    (pairs, labels)
}
