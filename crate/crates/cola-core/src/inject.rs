//! Ground-truth anomaly injection.
//!
//! Structural anomalies are small cliques wired between previously unrelated
//! nodes; contextual anomalies keep their edges but have their attribute row
//! replaced by the most distant row among `k` sampled candidates. The two
//! sets are kept disjoint so a combined injection of `q` cliques of size `p`
//! yields exactly `2pq` labeled anomalies.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::AttributedGraph;
use crate::math;
use crate::rng::SeedStream;

/// Injection parameters: clique size `p`, clique count `q`, candidate-set
/// size `k` for attribute swaps, and the RNG seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InjectionConfig {
    pub clique_size: usize,
    pub clique_count: usize,
    pub candidates: usize,
    pub seed: u64,
}

impl Default for InjectionConfig {
    fn default() -> Self {
        InjectionConfig {
            clique_size: 15,
            clique_count: 5,
            candidates: 50,
            seed: 1,
        }
    }
}

impl InjectionConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.clique_size < 2 {
            return Err(Error::InvalidConfig {
                field: "clique_size",
                message: alloc::format!("must be >= 2, got {}", self.clique_size),
            });
        }
        if self.candidates < 1 {
            return Err(Error::InvalidConfig {
                field: "candidates",
                message: alloc::format!("must be >= 1, got {}", self.candidates),
            });
        }
        if self.candidates > n.saturating_sub(1) {
            return Err(Error::InvalidConfig {
                field: "candidates",
                message: alloc::format!("{} exceeds n-1 = {}", self.candidates, n - 1),
            });
        }
        let total = 2 * self.clique_size * self.clique_count;
        if total > n {
            return Err(Error::InsufficientNodes { needed: total, available: n });
        }
        Ok(())
    }
}

/// One contextual attribute swap: which candidates were drawn and which of
/// them donated its row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextualSwap {
    pub target: usize,
    pub candidates: Vec<usize>,
    pub donor: usize,
}

/// Everything an injection run decided, for post-hoc verification.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InjectionTrace {
    /// Member lists of the injected cliques.
    pub cliques: Vec<Vec<usize>>,
    /// Contextual swaps in execution order.
    pub swaps: Vec<ContextualSwap>,
}

/// Draws `count` nodes without replacement from the unmarked entries of
/// `anomalous`, in a deterministic order.
fn draw_unmarked(
    anomalous: &[bool],
    count: usize,
    rng: &mut SeedStream,
) -> Result<Vec<usize>> {
    let pool: Vec<usize> = (0..anomalous.len()).filter(|&v| !anomalous[v]).collect();
    if pool.len() < count {
        return Err(Error::InsufficientNodes { needed: count, available: pool.len() });
    }
    // Partial Fisher-Yates: only the first `count` slots are needed.
    let mut pool = pool;
    for i in 0..count {
        let j = i + rng.next_below(pool.len() - i);
        pool.swap(i, j);
    }
    pool.truncate(count);
    Ok(pool)
}

/// Wires `clique_count` cliques of `clique_size` nodes each. Members are
/// drawn without replacement across cliques from the not-yet-anomalous
/// pool. Returns the perturbed graph and the updated label vector.
pub fn inject_structural(
    g: &AttributedGraph,
    clique_size: usize,
    clique_count: usize,
    rng: &mut SeedStream,
) -> Result<(AttributedGraph, Vec<u8>)> {
    let (out, labels, _) = inject_structural_traced(g, clique_size, clique_count, rng)?;
    Ok((out, labels))
}

/// [`inject_structural`] that also reports the clique member lists.
pub fn inject_structural_traced(
    g: &AttributedGraph,
    clique_size: usize,
    clique_count: usize,
    rng: &mut SeedStream,
) -> Result<(AttributedGraph, Vec<u8>, Vec<Vec<usize>>)> {
    let n = g.node_count();
    let mut labels: Vec<u8> = g.labels().map(|l| l.to_vec()).unwrap_or_else(|| vec![0; n]);
    let mut anomalous: Vec<bool> = labels.iter().map(|&l| l != 0).collect();

    let mut cliques = Vec::with_capacity(clique_count);
    let mut extra_edges: Vec<(usize, usize)> = Vec::new();
    for _ in 0..clique_count {
        let members = draw_unmarked(&anomalous, clique_size, rng)?;
        for (i, &a) in members.iter().enumerate() {
            for &b in &members[i + 1..] {
                if !g.has_edge(a, b) {
                    extra_edges.push((a, b));
                }
            }
            anomalous[a] = true;
            labels[a] = 1;
        }
        cliques.push(members);
    }

    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(g.edge_count() + extra_edges.len());
    for v in 0..n {
        for &w in g.neighbors(v) {
            let w = w as usize;
            if v < w {
                edges.push((v, w));
            }
        }
    }
    edges.extend_from_slice(&extra_edges);

    let out = AttributedGraph::from_edges(&edges, g.attributes().clone(), Some(labels.clone()))?;
    Ok((out, labels, cliques))
}

fn euclidean_distance(a: &[f64], b: &[f64]) -> f64 {
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    math::sqrt(sum)
}

/// Replaces the attribute rows of `count` randomly chosen non-anomalous
/// nodes. Each target's new row is copied from the candidate (sampled
/// uniformly without replacement, target excluded) at the largest Euclidean
/// distance; ties take the first maximum. Edges are untouched.
pub fn inject_contextual(
    g: &AttributedGraph,
    count: usize,
    candidates: usize,
    rng: &mut SeedStream,
) -> Result<(AttributedGraph, Vec<u8>)> {
    let (out, labels, _) = inject_contextual_traced(g, count, candidates, rng)?;
    Ok((out, labels))
}

/// [`inject_contextual`] that also reports every swap decision.
pub fn inject_contextual_traced(
    g: &AttributedGraph,
    count: usize,
    candidates: usize,
    rng: &mut SeedStream,
) -> Result<(AttributedGraph, Vec<u8>, Vec<ContextualSwap>)> {
    let n = g.node_count();
    if candidates < 1 || candidates > n - 1 {
        return Err(Error::InvalidConfig {
            field: "candidates",
            message: alloc::format!("must be in [1, n-1], got {candidates}"),
        });
    }
    let mut labels: Vec<u8> = g.labels().map(|l| l.to_vec()).unwrap_or_else(|| vec![0; n]);
    let mut anomalous: Vec<bool> = labels.iter().map(|&l| l != 0).collect();
    let mut attrs = g.attributes().clone();

    let mut swaps = Vec::with_capacity(count);
    let mut taken = vec![false; n];
    for _ in 0..count {
        let target = *draw_unmarked(&anomalous, 1, rng)?.first().unwrap();
        anomalous[target] = true;
        labels[target] = 1;

        // Candidate set: `candidates` distinct nodes, target excluded.
        let mut picked = Vec::with_capacity(candidates);
        taken[target] = true;
        while picked.len() < candidates {
            let cand = rng.next_below_excluding(n, target);
            if !taken[cand] {
                taken[cand] = true;
                picked.push(cand);
            }
        }
        taken[target] = false;
        for &c in &picked {
            taken[c] = false;
        }

        let mut best = picked[0];
        let mut best_dist = euclidean_distance(attrs.row(target), attrs.row(picked[0]));
        for &cand in &picked[1..] {
            let dist = euclidean_distance(attrs.row(target), attrs.row(cand));
            if dist > best_dist {
                best_dist = dist;
                best = cand;
            }
        }
        let donor_row = attrs.row(best).to_vec();
        attrs.row_mut(target).copy_from_slice(&donor_row);
        swaps.push(ContextualSwap {
            target,
            candidates: picked,
            donor: best,
        });
    }

    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(g.edge_count());
    for v in 0..n {
        for &w in g.neighbors(v) {
            let w = w as usize;
            if v < w {
                edges.push((v, w));
            }
        }
    }
    let out = AttributedGraph::from_edges(&edges, attrs, Some(labels.clone()))?;
    Ok((out, labels, swaps))
}

/// Structural injection followed by an equal number (`p*q`) of contextual
/// swaps, with disjoint anomaly sets. Total labeled anomalies: `2pq`.
pub fn inject_combined(
    g: &AttributedGraph,
    cfg: &InjectionConfig,
    rng: &mut SeedStream,
) -> Result<(AttributedGraph, Vec<u8>)> {
    let (out, labels, _) = inject_combined_traced(g, cfg, rng)?;
    Ok((out, labels))
}

/// [`inject_combined`] that also reports clique memberships and swap
/// decisions.
pub fn inject_combined_traced(
    g: &AttributedGraph,
    cfg: &InjectionConfig,
    rng: &mut SeedStream,
) -> Result<(AttributedGraph, Vec<u8>, InjectionTrace)> {
    cfg.validate(g.node_count())?;
    let (structural, _, cliques) =
        inject_structural_traced(g, cfg.clique_size, cfg.clique_count, rng)?;
    let (out, labels, swaps) = inject_contextual_traced(
        &structural,
        cfg.clique_size * cfg.clique_count,
        cfg.candidates,
        rng,
    )?;
    Ok((out, labels, InjectionTrace { cliques, swaps }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::Matrix;

    fn random_graph(n: usize, extra_edges: usize, f: usize, seed: u64) -> AttributedGraph {
        let mut rng = SeedStream::new(seed, 9);
        // Connected backbone plus random extras.
        let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.next_below(v), v)).collect();
        for _ in 0..extra_edges {
            let a = rng.next_below(n);
            let b = rng.next_below_excluding(n, a);
            edges.push((a.min(b), a.max(b)));
        }
        let mut attrs = Matrix::zeros(n, f);
        for v in attrs.data_mut() {
            *v = rng.next_f64();
        }
        AttributedGraph::from_edges(&edges, attrs, None).unwrap()
    }

    #[test]
    fn structural_zero_cliques_is_identity() {
        let g = random_graph(20, 10, 3, 1);
        let mut rng = SeedStream::new(5, 0);
        let (out, labels) = inject_structural(&g, 4, 0, &mut rng).unwrap();
        assert_eq!(out.edge_count(), g.edge_count());
        assert_eq!(labels.iter().map(|&l| l as usize).sum::<usize>(), 0);
    }

    #[test]
    fn structural_cliques_are_complete_and_counted() {
        let g = random_graph(60, 40, 3, 2);
        let mut rng = SeedStream::new(7, 0);
        let (out, labels) = inject_structural(&g, 5, 3, &mut rng).unwrap();
        assert_eq!(labels.iter().map(|&l| l as usize).sum::<usize>(), 15);
        // Every original edge survives.
        for v in 0..g.node_count() {
            for &w in g.neighbors(v) {
                assert!(out.has_edge(v, w as usize));
            }
        }
    }

    #[test]
    fn contextual_zero_count_keeps_attributes() {
        let g = random_graph(20, 10, 4, 3);
        let mut rng = SeedStream::new(11, 0);
        let (out, _) = inject_contextual(&g, 0, 5, &mut rng).unwrap();
        assert_eq!(out.attributes(), g.attributes());
    }

    #[test]
    fn contextual_picks_argmax_distance_donor() {
        // 3 nodes with distinct rows; k = 2 forces both non-targets in as
        // candidates, so the swap must install the farther row.
        let attrs = Matrix::from_vec(3, 2, vec![0.0, 0.0, 1.0, 0.0, 10.0, 10.0]);
        let g = AttributedGraph::from_edges(&[(0, 1), (1, 2)], attrs, None).unwrap();
        for seed in 0..20 {
            let mut rng = SeedStream::new(seed, 0);
            let (out, labels) = inject_contextual(&g, 1, 2, &mut rng).unwrap();
            let target = labels.iter().position(|&l| l == 1).unwrap();
            let donors = [
                [0.0, 0.0],
                [1.0, 0.0],
                [10.0, 10.0],
            ];
            // Brute-force the expected donor over the full node set minus the
            // target; with k = n-1 the candidate set is exactly that.
            let mut best = usize::MAX;
            let mut best_dist = -1.0;
            for cand in 0..3 {
                if cand == target {
                    continue;
                }
                let d: f64 = donors[target]
                    .iter()
                    .zip(&donors[cand])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                if d > best_dist {
                    best_dist = d;
                    best = cand;
                }
            }
            assert_eq!(out.attribute_row(target), &donors[best]);
        }
    }

    #[test]
    fn contextual_never_touches_edges() {
        let g = random_graph(30, 25, 3, 4);
        let mut rng = SeedStream::new(13, 0);
        let (out, _) = inject_contextual(&g, 6, 8, &mut rng).unwrap();
        assert_eq!(out.csr_offsets(), g.csr_offsets());
        assert_eq!(out.csr_neighbors(), g.csr_neighbors());
    }

    #[test]
    fn combined_counts_and_disjointness() {
        let g = random_graph(100, 80, 4, 5);
        let cfg = InjectionConfig {
            clique_size: 5,
            clique_count: 4,
            candidates: 10,
            seed: 0,
        };
        let mut rng = SeedStream::new(17, 0);
        let (out, labels) = inject_combined(&g, &cfg, &mut rng).unwrap();
        assert_eq!(labels.iter().map(|&l| l as usize).sum::<usize>(), 40);
        assert_eq!(out.labels().unwrap(), labels.as_slice());
        // Structural members keep their attributes; contextual members keep
        // their edges. A node that changed both would violate disjointness.
        let mut both = 0;
        for v in 0..g.node_count() {
            let attrs_changed = out.attribute_row(v) != g.attribute_row(v);
            let degree_changed = out.degree(v) != g.degree(v);
            if attrs_changed && degree_changed {
                both += 1;
            }
        }
        assert_eq!(both, 0);
    }

    #[test]
    fn combined_rejects_oversized_request() {
        let g = random_graph(10, 5, 2, 6);
        let cfg = InjectionConfig {
            clique_size: 3,
            clique_count: 2,
            candidates: 4,
            seed: 0,
        };
        // 2*3*2 = 12 > 10 nodes.
        let mut rng = SeedStream::new(1, 0);
        assert!(matches!(
            inject_combined(&g, &cfg, &mut rng),
            Err(Error::InsufficientNodes { .. })
        ));
    }

    #[test]
    fn injection_is_deterministic_per_seed() {
        let g = random_graph(50, 40, 3, 7);
        let cfg = InjectionConfig {
            clique_size: 4,
            clique_count: 2,
            candidates: 6,
            seed: 0,
        };
        let mut rng_a = SeedStream::new(23, 0);
        let mut rng_b = SeedStream::new(23, 0);
        let (ga, la) = inject_combined(&g, &cfg, &mut rng_a).unwrap();
        let (gb, lb) = inject_combined(&g, &cfg, &mut rng_b).unwrap();
        assert_eq!(la, lb);
        assert_eq!(ga, gb);
    }
}
