//! ROC/AUC evaluation, run aggregation, and parameter sweeps.
//!
//! AUC is computed as the Mann-Whitney statistic via a single sort with
//! midranks for ties: the probability that a random anomaly outranks a
//! random normal node, ties counting one half. The ROC curve sweeps one
//! threshold per distinct score, so its trapezoidal area equals the
//! rank-based AUC exactly.

use alloc::vec::Vec;

use crate::detector::{infer_scores, scores_from_rounds, train, TrainConfig};
use crate::error::{Error, Result};
use crate::graph::AttributedGraph;
use crate::math;

/// A ROC curve from `(0,0)` to `(1,1)` and its trapezoidal area.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    /// `(false_positive_rate, true_positive_rate)` per threshold.
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

fn class_counts(labels: &[u8]) -> Result<(usize, usize)> {
    let positives = labels.iter().filter(|&&l| l != 0).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::SingleClassLabels);
    }
    Ok((positives, negatives))
}

/// Rank-based AUC with half-credit ties, `O(n log n)`.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch { left: scores.len(), right: labels.len() });
    }
    let (positives, negatives) = class_counts(labels)?;

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| {
        scores[a].partial_cmp(&scores[b]).expect("scores must be comparable")
    });

    // Sum of midranks over the positive class.
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let midrank = (i + j + 2) as f64 / 2.0;
        for &idx in &order[i..=j] {
            if labels[idx] != 0 {
                rank_sum += midrank;
            }
        }
        i = j + 1;
    }
    let p = positives as f64;
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * negatives as f64))
}

/// ROC curve with one point per distinct score threshold, descending.
pub fn roc_curve(scores: &[f64], labels: &[u8]) -> Result<RocCurve> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch { left: scores.len(), right: labels.len() });
    }
    let (positives, negatives) = class_counts(labels)?;

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| {
        scores[b].partial_cmp(&scores[a]).expect("scores must be comparable")
    });

    let mut points = Vec::with_capacity(scores.len() + 1);
    points.push((0.0, 0.0));
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut area = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        for &idx in &order[i..=j] {
            if labels[idx] != 0 {
                tp += 1;
            } else {
                fp += 1;
            }
        }
        let prev = *points.last().unwrap();
        let point = (fp as f64 / negatives as f64, tp as f64 / positives as f64);
        area += (point.0 - prev.0) * (point.1 + prev.1) / 2.0;
        points.push(point);
        i = j + 1;
    }
    Ok(RocCurve { points, auc: area })
}

/// Arithmetic mean and population standard deviation of a set of run AUCs.
pub fn aggregate_runs(run_aucs: &[f64]) -> Result<(f64, f64)> {
    if run_aucs.is_empty() {
        return Err(Error::EmptyNodeList);
    }
    let n = run_aucs.len() as f64;
    let mean = run_aucs.iter().sum::<f64>() / n;
    let var = run_aucs.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Ok((mean, math::sqrt(var)))
}

/// Swept hyperparameter axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Sampling rounds `R`; one model is trained per run and the stored
    /// round matrices are truncated per value, so no retraining happens.
    Rounds,
    /// Subgraph size `c`; retrains per value.
    SubgraphSize,
    /// Embedding dimension `d`; retrains per value.
    EmbeddingDim,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Rounds => "R",
            SweepAxis::SubgraphSize => "c",
            SweepAxis::EmbeddingDim => "d",
        }
    }
}

impl core::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "R" | "r" | "rounds" => Ok(SweepAxis::Rounds),
            "c" | "subgraph_size" => Ok(SweepAxis::SubgraphSize),
            "d" | "embedding_dim" => Ok(SweepAxis::EmbeddingDim),
            other => Err(Error::InvalidConfig {
                field: "axis",
                message: alloc::format!("unknown sweep axis `{other}`"),
            }),
        }
    }
}

/// One sweep table row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub value: usize,
    pub mean_auc: f64,
    pub std_auc: f64,
}

/// Measures AUC across hyperparameter values, averaging over `runs` seeded
/// repetitions (`base_cfg.seed + run` for run `0..runs`). The graph must
/// carry ground-truth labels.
pub fn sweep(
    g: &AttributedGraph,
    base_cfg: &TrainConfig,
    axis: SweepAxis,
    values: &[usize],
    runs: usize,
) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::InvalidConfig {
            field: "values",
            message: alloc::string::String::from("sweep needs at least one value"),
        });
    }
    if values.iter().any(|&v| v == 0) {
        return Err(Error::InvalidConfig {
            field: "values",
            message: alloc::string::String::from("sweep values must be >= 1"),
        });
    }
    if runs == 0 {
        return Err(Error::InvalidConfig {
            field: "runs",
            message: alloc::string::String::from("must be >= 1"),
        });
    }
    let labels = g.labels().ok_or(Error::MissingLabels)?.to_vec();

    let mut per_value: Vec<Vec<f64>> = alloc::vec![Vec::with_capacity(runs); values.len()];
    for run in 0..runs {
        let mut cfg = base_cfg.clone();
        cfg.seed = base_cfg.seed.wrapping_add(run as u64);
        match axis {
            SweepAxis::Rounds => {
                let max_rounds = *values.iter().max().unwrap();
                cfg.rounds = max_rounds;
                let (params, _) = train(g, &cfg)?;
                let full = infer_scores(g, &params, &cfg)?;
                for (slot, &value) in per_value.iter_mut().zip(values) {
                    let pos = truncate_columns(&full.pos_rounds, value);
                    let neg = truncate_columns(&full.neg_rounds, value);
                    let est = scores_from_rounds(&pos, &neg, cfg.estimation, cfg.score_source)?;
                    slot.push(auc(&est.scores, &labels)?);
                }
            }
            SweepAxis::SubgraphSize | SweepAxis::EmbeddingDim => {
                for (slot, &value) in per_value.iter_mut().zip(values) {
                    let mut run_cfg = cfg.clone();
                    match axis {
                        SweepAxis::SubgraphSize => run_cfg.subgraph_size = value,
                        SweepAxis::EmbeddingDim => run_cfg.embedding_dim = value,
                        SweepAxis::Rounds => unreachable!(),
                    }
                    let (params, _) = train(g, &run_cfg)?;
                    let out = infer_scores(g, &params, &run_cfg)?;
                    slot.push(auc(&out.scores, &labels)?);
                }
            }
        }
    }

    values
        .iter()
        .zip(per_value)
        .map(|(&value, aucs)| {
            let (mean_auc, std_auc) = aggregate_runs(&aucs)?;
            Ok(SweepRow { value, mean_auc, std_auc })
        })
        .collect()
}

fn truncate_columns(m: &crate::dense::Matrix, cols: usize) -> crate::dense::Matrix {
    let keep = cols.min(m.cols());
    let mut out = crate::dense::Matrix::zeros(m.rows(), keep);
    for r in 0..m.rows() {
        out.row_mut(r).copy_from_slice(&m.row(r)[..keep]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;

    /// All-pairs Mann-Whitney with half-credit ties; the quadratic oracle.
    fn pairwise_auc(scores: &[f64], labels: &[u8]) -> f64 {
        let mut wins = 0.0;
        let mut total = 0.0;
        for (i, &li) in labels.iter().enumerate() {
            if li == 0 {
                continue;
            }
            for (j, &lj) in labels.iter().enumerate() {
                if lj != 0 {
                    continue;
                }
                total += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
        wins / total
    }

    #[test]
    fn auc_hand_example() {
        let got = auc(&[0.9, 0.8, 0.3, 0.1], &[1, 0, 1, 0]).unwrap();
        assert!((got - 0.75).abs() < 1e-15);
    }

    #[test]
    fn auc_perfect_and_reversed() {
        assert_eq!(auc(&[0.9, 0.8, 0.2, 0.1], &[1, 1, 0, 0]).unwrap(), 1.0);
        assert_eq!(auc(&[0.1, 0.2, 0.8, 0.9], &[1, 1, 0, 0]).unwrap(), 0.0);
    }

    #[test]
    fn auc_all_ties_is_half() {
        let got = auc(&[0.4; 6], &[1, 0, 1, 0, 0, 0]).unwrap();
        assert!((got - 0.5).abs() < 1e-15);
    }

    #[test]
    fn auc_rejects_single_class() {
        assert!(matches!(auc(&[0.1, 0.2], &[1, 1]), Err(Error::SingleClassLabels)));
        assert!(matches!(auc(&[0.1, 0.2], &[0, 0]), Err(Error::SingleClassLabels)));
    }

    #[test]
    fn auc_matches_pairwise_oracle_with_ties() {
        let mut rng = SeedStream::new(42, 0);
        for round in 0..60 {
            let n = 5 + rng.next_below(80);
            // Quantized scores force ties; occasional full-precision rounds.
            let scores: Vec<f64> = (0..n)
                .map(|_| {
                    if round % 3 == 0 {
                        rng.next_f64()
                    } else {
                        (rng.next_below(7) as f64) / 7.0
                    }
                })
                .collect();
            let mut labels: Vec<u8> = (0..n).map(|_| (rng.next_below(3) == 0) as u8).collect();
            labels[0] = 1;
            labels[1] = 0;
            let fast = auc(&scores, &labels).unwrap();
            let slow = pairwise_auc(&scores, &labels);
            assert!((fast - slow).abs() < 1e-12, "fast={fast} slow={slow}");
        }
    }

    #[test]
    fn roc_single_positive_above_single_negative() {
        let curve = roc_curve(&[0.9, 0.1], &[1, 0]).unwrap();
        assert_eq!(curve.points, alloc::vec![(0.0, 0.0), (0.0, 1.0), (1.0, 1.0)]);
        assert_eq!(curve.auc, 1.0);
    }

    #[test]
    fn roc_reversed_ranking_has_zero_area() {
        let curve = roc_curve(&[0.1, 0.9], &[1, 0]).unwrap();
        assert_eq!(curve.auc, 0.0);
    }

    #[test]
    fn roc_area_equals_rank_auc() {
        let mut rng = SeedStream::new(7, 0);
        for round in 0..20 {
            let n = 200;
            let scores: Vec<f64> = (0..n)
                .map(|_| {
                    if round % 2 == 0 {
                        rng.next_f64()
                    } else {
                        (rng.next_below(9) as f64) / 9.0
                    }
                })
                .collect();
            let mut labels: Vec<u8> = (0..n).map(|_| (rng.next_below(4) == 0) as u8).collect();
            labels[0] = 1;
            labels[1] = 0;
            let curve = roc_curve(&scores, &labels).unwrap();
            let rank = auc(&scores, &labels).unwrap();
            assert!((curve.auc - rank).abs() < 1e-12);
            // Monotone curve ending at (1, 1).
            for w in curve.points.windows(2) {
                assert!(w[1].0 >= w[0].0 && w[1].1 >= w[0].1);
            }
            assert_eq!(*curve.points.last().unwrap(), (1.0, 1.0));
        }
    }

    #[test]
    fn aggregate_runs_hand_values() {
        assert_eq!(aggregate_runs(&[0.5, 0.5]).unwrap(), (0.5, 0.0));
        let (mean, std) = aggregate_runs(&[0.0, 1.0]).unwrap();
        assert_eq!((mean, std), (0.5, 0.5));
        assert!(aggregate_runs(&[]).is_err());
    }

    #[test]
    fn aggregate_matches_two_pass_oracle() {
        let mut rng = SeedStream::new(9, 0);
        let values: Vec<f64> = (0..10).map(|_| rng.next_f64()).collect();
        let (mean, std) = aggregate_runs(&values).unwrap();
        let m = values.iter().sum::<f64>() / 10.0;
        let v = values.iter().map(|&x| (x - m) * (x - m)).sum::<f64>() / 10.0;
        assert!((mean - m).abs() < 1e-12);
        assert!((std - math::sqrt(v)).abs() < 1e-12);
    }
}
