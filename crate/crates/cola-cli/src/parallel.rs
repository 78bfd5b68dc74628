//! Worker fan-out for the inference phase.
//!
//! Each node draws from its own RNG stream, so splitting the node range
//! over threads reproduces the sequential result exactly; `workers` only
//! changes wall-clock time.

use cola_core::dense::Matrix;
use cola_core::detector::{score_node, scores_from_rounds, AnomalyScores, TrainConfig};
use cola_core::graph::AttributedGraph;
use cola_core::model::ModelParams;

use crate::error::{CliError, Result};

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |p| p.get())
}

/// `infer_scores` with the per-node work spread over `workers` threads.
pub fn infer_scores_parallel(
    g: &AttributedGraph,
    params: &ModelParams,
    cfg: &TrainConfig,
    workers: usize,
) -> Result<AnomalyScores> {
    cfg.validate()?;
    let n = g.node_count();
    if n < 2 {
        return Err(CliError::Core(cola_core::Error::InsufficientNodes {
            needed: 2,
            available: n,
        }));
    }
    let workers = workers.clamp(1, n);
    let rounds = cfg.rounds;
    let mut pos_rounds = Matrix::zeros(n, rounds);
    let mut neg_rounds = Matrix::zeros(n, rounds);

    let chunk = n.div_ceil(workers);
    let pos_chunks: Vec<&mut [f64]> = pos_rounds.data_mut().chunks_mut(chunk * rounds).collect();
    let neg_chunks: Vec<&mut [f64]> = neg_rounds.data_mut().chunks_mut(chunk * rounds).collect();

    let errors = std::sync::Mutex::new(Vec::<cola_core::Error>::new());
    std::thread::scope(|scope| {
        for (w, (pos_slice, neg_slice)) in pos_chunks.into_iter().zip(neg_chunks).enumerate() {
            let errors = &errors;
            scope.spawn(move || {
                let start = w * chunk;
                for (i, node) in (start..(start + pos_slice.len() / rounds)).enumerate() {
                    match score_node(g, params, cfg, node) {
                        Ok((pos, neg)) => {
                            pos_slice[i * rounds..(i + 1) * rounds].copy_from_slice(&pos);
                            neg_slice[i * rounds..(i + 1) * rounds].copy_from_slice(&neg);
                        }
                        Err(e) => {
                            errors.lock().unwrap().push(e);
                            return;
                        }
                    }
                }
            });
        }
    });
    if let Some(e) = errors.into_inner().unwrap().into_iter().next() {
        return Err(e.into());
    }

    Ok(scores_from_rounds(&pos_rounds, &neg_rounds, cfg.estimation, cfg.score_source)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use cola_core::detector::train;
    use cola_core::rng::SeedStream;

    #[test]
    fn parallel_matches_sequential() {
        let mut rng = SeedStream::new(5, 30);
        let n = 23;
        let edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.next_below(v), v)).collect();
        let mut attrs = Matrix::zeros(n, 4);
        for v in attrs.data_mut() {
            *v = rng.next_f64();
        }
        let g = AttributedGraph::from_edges(&edges, attrs, None).unwrap();
        let cfg = TrainConfig {
            epochs: 1,
            batch_size: 8,
            subgraph_size: 3,
            embedding_dim: 4,
            rounds: 5,
            seed: 3,
            ..TrainConfig::default()
        };
        let (params, _) = train(&g, &cfg).unwrap();
        let sequential = cola_core::detector::infer_scores(&g, &params, &cfg).unwrap();
        for workers in [1, 2, 3, 7, 64] {
            let parallel = infer_scores_parallel(&g, &params, &cfg, workers).unwrap();
            assert_eq!(parallel, sequential, "workers = {workers}");
        }
    }
}
