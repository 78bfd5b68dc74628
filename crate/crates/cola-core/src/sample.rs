//! Contrastive instance-pair sampling.
//!
//! An instance pair contrasts a target node against a local subgraph grown
//! by random walk with restart. Positive pairs grow the subgraph from the
//! target itself; negative pairs grow it from a uniformly random other node.
//! The walk's initial node always sits at subgraph index 0 and its attribute
//! row is zeroed (anonymization) so the scorer cannot match raw attributes.

use alloc::vec::Vec;

use crate::dense::Matrix;
use crate::error::{Error, Result};
use crate::graph::AttributedGraph;
use crate::rng::SeedStream;

/// One contrastive sample: target node, anonymized local subgraph, label.
#[derive(Debug, Clone, PartialEq)]
pub struct InstancePair {
    /// The target node `v_i`.
    pub target: usize,
    /// Subgraph node ids in collection order; index 0 is the walk's initial
    /// node (equal to `target` iff `label == 1`).
    pub sub_nodes: Vec<usize>,
    /// Dense induced adjacency over `sub_nodes` (symmetric, zero diagonal).
    pub adjacency: Matrix,
    /// Subgraph attribute rows with row 0 zeroed.
    pub attributes: Matrix,
    /// Raw attribute row of the target node.
    pub target_attr: Vec<f64>,
    /// 1 for positive pairs, 0 for negative pairs.
    pub label: u8,
}

impl InstancePair {
    pub fn size(&self) -> usize {
        self.sub_nodes.len()
    }
}

/// Grows an ordered node list of exactly `size` entries by random walk with
/// restart from `initial`.
///
/// Each step restarts to `initial` with probability `restart_prob`,
/// otherwise moves to a uniform random neighbor of the current node.
/// Distinct nodes are collected in first-visit order with `initial` at
/// index 0. If fewer than `size` distinct nodes are reached within
/// `max_steps` steps (small communities, isolated nodes), the collected
/// nodes are repeated in order to fill the remaining slots.
pub fn rwr_sample(
    g: &AttributedGraph,
    initial: usize,
    size: usize,
    restart_prob: f64,
    max_steps: usize,
    rng: &mut SeedStream,
) -> Result<Vec<usize>> {
    if size < 1 {
        return Err(Error::InvalidConfig {
            field: "subgraph_size",
            message: alloc::string::String::from("must be >= 1"),
        });
    }
    if initial >= g.node_count() {
        return Err(Error::NodeOutOfRange { node: initial, n: g.node_count() });
    }
    if !(restart_prob > 0.0 && restart_prob < 1.0) {
        return Err(Error::InvalidConfig {
            field: "restart_prob",
            message: alloc::format!("must be in (0, 1), got {restart_prob}"),
        });
    }

    let mut collected = Vec::with_capacity(size);
    collected.push(initial);
    let mut current = initial;
    let mut steps = 0;
    while collected.len() < size && steps < max_steps {
        steps += 1;
        if rng.next_f64() < restart_prob {
            current = initial;
            continue;
        }
        let neighbors = g.neighbors(current);
        if neighbors.is_empty() {
            continue;
        }
        current = neighbors[rng.next_below(neighbors.len())] as usize;
        if !collected.contains(&current) {
            collected.push(current);
        }
    }
    if collected.len() < size {
        let found = collected.len();
        for i in found..size {
            let repeat = collected[i % found];
            collected.push(repeat);
        }
    }
    Ok(collected)
}

fn build_pair(
    g: &AttributedGraph,
    target: usize,
    sub_nodes: Vec<usize>,
    label: u8,
) -> Result<InstancePair> {
    let (adjacency, mut attributes) = g.induced_subgraph(&sub_nodes)?;
    for v in attributes.row_mut(0) {
        *v = 0.0;
    }
    Ok(InstancePair {
        target,
        sub_nodes,
        adjacency,
        attributes,
        target_attr: g.attribute_row(target).to_vec(),
        label,
    })
}

/// Positive pair: the subgraph is grown from the target node itself.
pub fn make_positive_pair(
    g: &AttributedGraph,
    target: usize,
    size: usize,
    restart_prob: f64,
    max_steps: usize,
    rng: &mut SeedStream,
) -> Result<InstancePair> {
    let sub_nodes = rwr_sample(g, target, size, restart_prob, max_steps, rng)?;
    build_pair(g, target, sub_nodes, 1)
}

/// Negative pair: the subgraph is grown from a node drawn uniformly from
/// all nodes except the target.
pub fn make_negative_pair(
    g: &AttributedGraph,
    target: usize,
    size: usize,
    restart_prob: f64,
    max_steps: usize,
    rng: &mut SeedStream,
) -> Result<InstancePair> {
    let n = g.node_count();
    if n < 2 {
        return Err(Error::InsufficientNodes { needed: 2, available: n });
    }
    if target >= n {
        return Err(Error::NodeOutOfRange { node: target, n });
    }
    let initial = rng.next_below_excluding(n, target);
    let sub_nodes = rwr_sample(g, initial, size, restart_prob, max_steps, rng)?;
    build_pair(g, target, sub_nodes, 0)
}

/// Splits a uniformly random permutation of `0..node_count` into batches of
/// `batch_size`; the last batch may be short. Every node appears exactly
/// once per epoch.
pub fn epoch_batches(
    node_count: usize,
    batch_size: usize,
    rng: &mut SeedStream,
) -> Result<Vec<Vec<usize>>> {
    if batch_size < 1 {
        return Err(Error::InvalidConfig {
            field: "batch_size",
            message: alloc::string::String::from("must be >= 1"),
        });
    }
    let order = rng.permutation(node_count);
    Ok(order.chunks(batch_size).map(|c| c.to_vec()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn graph_from_edges(n: usize, edges: &[(usize, usize)]) -> AttributedGraph {
        let mut attrs = Matrix::zeros(n, 2);
        for i in 0..n {
            attrs.set(i, 0, i as f64 + 1.0);
            attrs.set(i, 1, (i as f64 + 1.0) * 10.0);
        }
        AttributedGraph::from_edges(edges, attrs, None).unwrap()
    }

    #[test]
    fn isolated_node_fills_by_repetition() {
        let g = graph_from_edges(3, &[(1, 2)]);
        let mut rng = SeedStream::new(1, 0);
        let nodes = rwr_sample(&g, 0, 4, 0.5, 256, &mut rng).unwrap();
        assert_eq!(nodes, vec![0, 0, 0, 0]);
    }

    #[test]
    fn leaf_of_star_always_reaches_center() {
        // Star: center 0, leaves 1..=4. From a leaf with c = 2 the only
        // reachable second node is the center.
        let g = graph_from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        for seed in 0..50 {
            let mut rng = SeedStream::new(seed, 0);
            let nodes = rwr_sample(&g, 3, 2, 0.5, 128, &mut rng).unwrap();
            assert_eq!(nodes, vec![3, 0]);
        }
    }

    #[test]
    fn initial_node_is_always_first() {
        let g = graph_from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)]);
        let mut rng = SeedStream::new(3, 0);
        for initial in 0..6 {
            let nodes = rwr_sample(&g, initial, 4, 0.5, 256, &mut rng).unwrap();
            assert_eq!(nodes[0], initial);
            assert_eq!(nodes.len(), 4);
        }
    }

    #[test]
    fn two_node_fill_cycles_in_order() {
        let g = graph_from_edges(4, &[(0, 1), (2, 3)]);
        let mut rng = SeedStream::new(5, 0);
        let nodes = rwr_sample(&g, 0, 5, 0.5, 512, &mut rng).unwrap();
        assert_eq!(nodes, vec![0, 1, 0, 1, 0]);
    }

    #[test]
    fn positive_pair_contract() {
        let g = graph_from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]);
        let mut rng = SeedStream::new(7, 0);
        let pair = make_positive_pair(&g, 2, 3, 0.5, 256, &mut rng).unwrap();
        assert_eq!(pair.label, 1);
        assert_eq!(pair.sub_nodes[0], 2);
        assert!(pair.attributes.row(0).iter().all(|&v| v == 0.0));
        assert_eq!(pair.target_attr, g.attribute_row(2));
        for a in 0..3 {
            assert_eq!(pair.adjacency.at(a, a), 0.0);
            for b in 0..3 {
                assert_eq!(pair.adjacency.at(a, b), pair.adjacency.at(b, a));
            }
        }
    }

    #[test]
    fn positive_pair_on_isolated_target_has_zero_adjacency() {
        let g = graph_from_edges(4, &[(1, 2), (2, 3)]);
        let mut rng = SeedStream::new(9, 0);
        let pair = make_positive_pair(&g, 0, 4, 0.5, 128, &mut rng).unwrap();
        assert!(pair.adjacency.data().iter().all(|&v| v == 0.0));
        assert_eq!(pair.sub_nodes, vec![0, 0, 0, 0]);
    }

    #[test]
    fn negative_pair_contract() {
        let g = graph_from_edges(2, &[(0, 1)]);
        for seed in 0..20 {
            let mut rng = SeedStream::new(seed, 0);
            let pair = make_negative_pair(&g, 0, 2, 0.5, 64, &mut rng).unwrap();
            assert_eq!(pair.label, 0);
            assert_eq!(pair.sub_nodes[0], 1);
            assert_eq!(pair.target, 0);
            assert_eq!(pair.target_attr, g.attribute_row(0));
        }
    }

    #[test]
    fn negative_pair_needs_two_nodes() {
        let g = graph_from_edges(1, &[]);
        let mut rng = SeedStream::new(1, 0);
        assert!(matches!(
            make_negative_pair(&g, 0, 2, 0.5, 64, &mut rng),
            Err(Error::InsufficientNodes { .. })
        ));
    }

    #[test]
    fn epoch_batches_shapes_and_coverage() {
        let mut rng = SeedStream::new(11, 0);
        let batches = epoch_batches(5, 2, &mut rng).unwrap();
        let sizes: Vec<usize> = batches.iter().map(|b| b.len()).collect();
        assert_eq!(sizes, vec![2, 2, 1]);
        let mut all: Vec<usize> = batches.into_iter().flatten().collect();
        all.sort_unstable();
        assert_eq!(all, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn epoch_batches_rejects_zero_batch() {
        let mut rng = SeedStream::new(11, 0);
        assert!(epoch_batches(5, 0, &mut rng).is_err());
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let g = graph_from_edges(8, &[(0, 1), (1, 2), (2, 3), (3, 0), (3, 4), (4, 5), (5, 6), (6, 7)]);
        let run = |seed| {
            let mut rng = SeedStream::new(seed, 0);
            let mut out = Vec::new();
            for t in 0..8 {
                out.push(make_positive_pair(&g, t, 4, 0.5, 256, &mut rng).unwrap());
                out.push(make_negative_pair(&g, t, 4, 0.5, 256, &mut rng).unwrap());
            }
            out
        };
        assert_eq!(run(42), run(42));
    }
}
