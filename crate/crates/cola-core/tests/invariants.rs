//! Property tests for the spec-level invariants.

use cola_core::dense::{vec_mat, Matrix};
use cola_core::eval::{auc, roc_curve};
use cola_core::graph::{normalize_adjacency, AttributedGraph};
use cola_core::model::{readout, ReadoutMode};
use cola_core::rng::SeedStream;
use cola_core::sample::epoch_batches;
use proptest::prelude::*;

fn symmetric_adjacency(c: usize, bits: u64) -> Matrix {
    let mut adj = Matrix::zeros(c, c);
    let mut bit = 0;
    for a in 0..c {
        for b in (a + 1)..c {
            if (bits >> (bit % 64)) & 1 == 1 {
                adj.set(a, b, 1.0);
                adj.set(b, a, 1.0);
            }
            bit += 1;
        }
    }
    adj
}

proptest! {
    // value[a][b] = (A + I)[a][b] / sqrt(deg_a * deg_b), elementwise.
    #[test]
    fn normalization_matches_elementwise_oracle(c in 1usize..8, bits in any::<u64>()) {
        let adj = symmetric_adjacency(c, bits);
        let norm = normalize_adjacency(&adj).unwrap();
        let deg: Vec<f64> = (0..c).map(|a| adj.row(a).iter().sum::<f64>() + 1.0).collect();
        for a in 0..c {
            for b in 0..c {
                let with_loop = adj.at(a, b) + if a == b { 1.0 } else { 0.0 };
                let want = with_loop / (deg[a] * deg[b]).sqrt();
                prop_assert!((norm.at(a, b) - want).abs() < 1e-15);
                prop_assert!((norm.at(a, b) - norm.at(b, a)).abs() < 1e-15);
            }
        }
    }

    // The induced subgraph over the full (identity-ordered) node list has
    // exactly the graph's edges.
    #[test]
    fn full_induced_subgraph_reproduces_edge_count(seed in 0u64..500) {
        let mut rng = SeedStream::new(seed, 1);
        let n = 2 + rng.next_below(12);
        let mut edges = Vec::new();
        for v in 1..n {
            if rng.next_below(4) > 0 {
                edges.push((rng.next_below(v), v));
            }
        }
        let g = AttributedGraph::from_edges(&edges, Matrix::zeros(n, 1), None).unwrap();
        let nodes: Vec<usize> = (0..n).collect();
        let (adj, _) = g.induced_subgraph(&nodes).unwrap();
        let ones = adj.data().iter().filter(|&&v| v == 1.0).count();
        prop_assert_eq!(ones / 2, g.edge_count());
    }

    // AUC is a rank statistic: any strictly increasing affine map leaves it
    // bit-identical, and (for tie-free scores) negation flips it around 1/2.
    #[test]
    fn auc_rank_invariances(seed in 0u64..500) {
        let mut rng = SeedStream::new(seed, 2);
        let n = 4 + rng.next_below(60);
        let scores: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
        let mut labels: Vec<u8> = (0..n).map(|_| (rng.next_below(3) == 0) as u8).collect();
        labels[0] = 1;
        labels[1] = 0;
        let base = auc(&scores, &labels).unwrap();
        let shifted: Vec<f64> = scores.iter().map(|&s| 3.0 * s + 7.0).collect();
        prop_assert_eq!(base, auc(&shifted, &labels).unwrap());
        let negated: Vec<f64> = scores.iter().map(|&s| -s).collect();
        prop_assert!((base + auc(&negated, &labels).unwrap() - 1.0).abs() < 1e-12);
    }

    // Trapezoidal area under the threshold-swept curve is the rank AUC.
    #[test]
    fn roc_area_is_rank_auc(seed in 0u64..300, quantize in any::<bool>()) {
        let mut rng = SeedStream::new(seed, 3);
        let n = 4 + rng.next_below(100);
        let scores: Vec<f64> = (0..n)
            .map(|_| if quantize { (rng.next_below(5) as f64) / 5.0 } else { rng.next_f64() })
            .collect();
        let mut labels: Vec<u8> = (0..n).map(|_| (rng.next_below(4) == 0) as u8).collect();
        labels[0] = 1;
        labels[1] = 0;
        let curve = roc_curve(&scores, &labels).unwrap();
        prop_assert!((curve.auc - auc(&scores, &labels).unwrap()).abs() < 1e-12);
    }

    // Every node appears exactly once per epoch, whatever the batch size.
    #[test]
    fn epoch_batches_partition_the_node_set(n in 1usize..200, b in 1usize..50, seed in 0u64..100) {
        let mut rng = SeedStream::new(seed, 4);
        let batches = epoch_batches(n, b, &mut rng).unwrap();
        prop_assert_eq!(batches.len(), n.div_ceil(b));
        let mut seen = vec![false; n];
        for batch in &batches {
            for &node in batch {
                prop_assert!(!seen[node]);
                seen[node] = true;
            }
        }
        prop_assert!(seen.iter().all(|&s| s));
    }

    // Average readout is the matrix product with the uniform weight vector.
    #[test]
    fn average_readout_is_uniform_weighting(seed in 0u64..200) {
        let mut rng = SeedStream::new(seed, 5);
        let c = 1 + rng.next_below(6);
        let d = 1 + rng.next_below(6);
        let mut e = Matrix::zeros(c, d);
        for v in e.data_mut() {
            *v = 2.0 * rng.next_f64() - 1.0;
        }
        let avg = readout(&e, ReadoutMode::Average, &vec![0.0; d]).unwrap();
        let uniform = vec![1.0 / c as f64; c];
        let oracle = vec_mat(&uniform, &e);
        for (a, b) in avg.iter().zip(&oracle) {
            prop_assert!((a - b).abs() < 1e-14);
        }
    }
}
