//! Attributed-network storage and subgraph queries.
//!
//! Graphs are undirected and stored in CSR form: every edge appears in both
//! endpoint rows, column indices are sorted, and no self-loops are stored.
//! The self-loop required by the GCN layer exists only inside
//! [`normalize_adjacency`].

use alloc::vec;
use alloc::vec::Vec;

use crate::dense::Matrix;
use crate::error::{Error, Result};
use crate::math;

/// An undirected attributed network: CSR adjacency, a dense `n x f`
/// attribute matrix, and optional `{0,1}` anomaly labels.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributedGraph {
    n: usize,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    attributes: Matrix,
    labels: Option<Vec<u8>>,
}

/// Basic size statistics; `mean_degree = 2m/n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphStats {
    pub n: usize,
    pub m: usize,
    pub f: usize,
    pub mean_degree: f64,
}

impl AttributedGraph {
    /// Builds a graph from an undirected edge list.
    ///
    /// Edges are symmetrized and deduplicated; `(a, b)` and `(b, a)` are the
    /// same edge. Self-loops are rejected; filter them out (and count them)
    /// before calling.
    pub fn from_edges(
        edges: &[(usize, usize)],
        attributes: Matrix,
        labels: Option<Vec<u8>>,
    ) -> Result<Self> {
        let n = attributes.rows();
        if n == 0 || attributes.cols() == 0 {
            return Err(Error::EmptyNodeList);
        }
        if n > u32::MAX as usize {
            return Err(Error::InvalidConfig {
                field: "n",
                message: alloc::format!("{n} nodes exceed the u32 node-id space"),
            });
        }
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(Error::LengthMismatch { left: l.len(), right: n });
            }
        }
        for &(a, b) in edges {
            if a >= n {
                return Err(Error::NodeOutOfRange { node: a, n });
            }
            if b >= n {
                return Err(Error::NodeOutOfRange { node: b, n });
            }
            if a == b {
                return Err(Error::SelfLoop { node: a });
            }
        }

        // Two-pass CSR build over both directions, then in-row sort + dedup.
        let mut degree = vec![0usize; n];
        for &(a, b) in edges {
            degree[a] += 1;
            degree[b] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + degree[i];
        }
        let mut neighbors = vec![0u32; offsets[n]];
        let mut cursor = offsets.clone();
        for &(a, b) in edges {
            neighbors[cursor[a]] = b as u32;
            cursor[a] += 1;
            neighbors[cursor[b]] = a as u32;
            cursor[b] += 1;
        }
        let mut deduped = Vec::with_capacity(neighbors.len());
        let mut new_offsets = vec![0usize; n + 1];
        for i in 0..n {
            let row = &mut neighbors[offsets[i]..offsets[i + 1]];
            row.sort_unstable();
            let mut prev = None;
            for &v in row.iter() {
                if prev != Some(v) {
                    deduped.push(v);
                    prev = Some(v);
                }
            }
            new_offsets[i + 1] = deduped.len();
        }
        deduped.shrink_to_fit();

        Ok(AttributedGraph {
            n,
            offsets: new_offsets,
            neighbors: deduped,
            attributes,
            labels,
        })
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Undirected edge count.
    #[inline]
    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    #[inline]
    pub fn attr_dim(&self) -> usize {
        self.attributes.cols()
    }

    #[inline]
    pub fn neighbors(&self, node: usize) -> &[u32] {
        &self.neighbors[self.offsets[node]..self.offsets[node + 1]]
    }

    #[inline]
    pub fn degree(&self, node: usize) -> usize {
        self.offsets[node + 1] - self.offsets[node]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.neighbors(a).binary_search(&(b as u32)).is_ok()
    }

    #[inline]
    pub fn attributes(&self) -> &Matrix {
        &self.attributes
    }

    #[inline]
    pub fn attribute_row(&self, node: usize) -> &[f64] {
        self.attributes.row(node)
    }

    pub fn labels(&self) -> Option<&[u8]> {
        self.labels.as_deref()
    }

    pub fn csr_offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn csr_neighbors(&self) -> &[u32] {
        &self.neighbors
    }

    /// Replaces the label vector (used after anomaly injection).
    pub fn with_labels(mut self, labels: Vec<u8>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::LengthMismatch { left: labels.len(), right: self.n });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Returns a copy whose attribute rows are L2-normalized (zero rows are
    /// left untouched). Off by default in the pipeline; exposed as a
    /// preprocessing option.
    pub fn l2_normalized(&self) -> Self {
        let mut attrs = self.attributes.clone();
        for r in 0..attrs.rows() {
            let row = attrs.row_mut(r);
            let norm = math::sqrt(row.iter().map(|v| v * v).sum::<f64>());
            if norm > 0.0 {
                for v in row.iter_mut() {
                    *v /= norm;
                }
            }
        }
        AttributedGraph {
            n: self.n,
            offsets: self.offsets.clone(),
            neighbors: self.neighbors.clone(),
            attributes: attrs,
            labels: self.labels.clone(),
        }
    }

    /// Bytes held by the CSR arrays, the attribute matrix, and labels.
    pub fn storage_bytes(&self) -> usize {
        self.offsets.len() * core::mem::size_of::<usize>()
            + self.neighbors.len() * core::mem::size_of::<u32>()
            + self.attributes.data().len() * core::mem::size_of::<f64>()
            + self.labels.as_ref().map_or(0, |l| l.len())
    }

    pub fn stats(&self) -> GraphStats {
        let m = self.edge_count();
        GraphStats {
            n: self.n,
            m,
            f: self.attr_dim(),
            mean_degree: 2.0 * m as f64 / self.n as f64,
        }
    }

    /// Extracts the induced subgraph over `nodes` (order preserved,
    /// duplicates permitted).
    ///
    /// `A[a][b] = 1` iff `nodes[a]` and `nodes[b]` are adjacent and `a != b`;
    /// duplicate positions of the same node are mutually non-adjacent since
    /// self-loops are never stored. `X` row `a` is the attribute row of
    /// `nodes[a]`.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Result<(Matrix, Matrix)> {
        if nodes.is_empty() {
            return Err(Error::EmptyNodeList);
        }
        for &v in nodes {
            if v >= self.n {
                return Err(Error::NodeOutOfRange { node: v, n: self.n });
            }
        }
        let c = nodes.len();
        let mut adj = Matrix::zeros(c, c);
        for a in 0..c {
            for b in (a + 1)..c {
                if self.has_edge(nodes[a], nodes[b]) {
                    adj.set(a, b, 1.0);
                    adj.set(b, a, 1.0);
                }
            }
        }
        let f = self.attr_dim();
        let mut attrs = Matrix::zeros(c, f);
        for (a, &v) in nodes.iter().enumerate() {
            attrs.row_mut(a).copy_from_slice(self.attributes.row(v));
        }
        Ok((adj, attrs))
    }
}

/// Degree-normalizes a binary symmetric zero-diagonal adjacency matrix with
/// an added self-loop: `D̃^(-1/2) (A + I) D̃^(-1/2)` where `D̃` is the degree
/// matrix of `A + I`. Every degree is at least 1, so the scaling is always
/// defined.
pub fn normalize_adjacency(adj: &Matrix) -> Result<Matrix> {
    let c = adj.rows();
    if adj.cols() != c {
        return Err(Error::ShapeMismatch { context: "normalize_adjacency" });
    }
    for a in 0..c {
        for b in 0..c {
            let v = adj.at(a, b);
            if v != adj.at(b, a) {
                return Err(Error::AsymmetricAdjacency { row: a, col: b });
            }
            if v != 0.0 && v != 1.0 {
                return Err(Error::InvalidConfig {
                    field: "adjacency",
                    message: alloc::format!("entry ({a}, {b}) = {v} is not binary"),
                });
            }
        }
        if adj.at(a, a) != 0.0 {
            return Err(Error::SelfLoop { node: a });
        }
    }
    let mut inv_sqrt_deg = vec![0.0; c];
    for (a, out) in inv_sqrt_deg.iter_mut().enumerate() {
        let deg = adj.row(a).iter().sum::<f64>() + 1.0;
        *out = 1.0 / math::sqrt(deg);
    }
    let mut out = Matrix::zeros(c, c);
    for a in 0..c {
        for b in 0..c {
            let with_loop = adj.at(a, b) + if a == b { 1.0 } else { 0.0 };
            if with_loop != 0.0 {
                out.set(a, b, with_loop * inv_sqrt_deg[a] * inv_sqrt_deg[b]);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_graph(n: usize, f: usize) -> AttributedGraph {
        let edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        let mut attrs = Matrix::zeros(n, f);
        for i in 0..n {
            for j in 0..f {
                attrs.set(i, j, (i * f + j) as f64);
            }
        }
        AttributedGraph::from_edges(&edges, attrs, None).unwrap()
    }

    #[test]
    fn build_symmetrizes_and_dedups() {
        let attrs = Matrix::zeros(3, 2);
        let g = AttributedGraph::from_edges(&[(0, 1), (1, 0), (1, 2)], attrs, None).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.neighbors(1), &[0, 2]);
        assert!(g.has_edge(2, 1) && g.has_edge(1, 2));
        assert!(!g.has_edge(0, 2));
    }

    #[test]
    fn build_rejects_bad_input() {
        let attrs = Matrix::zeros(3, 1);
        assert_eq!(
            AttributedGraph::from_edges(&[(0, 3)], attrs.clone(), None),
            Err(Error::NodeOutOfRange { node: 3, n: 3 })
        );
        assert_eq!(
            AttributedGraph::from_edges(&[(1, 1)], attrs, None),
            Err(Error::SelfLoop { node: 1 })
        );
    }

    #[test]
    fn stats_on_triangle() {
        let attrs = Matrix::zeros(3, 1);
        let g = AttributedGraph::from_edges(&[(0, 1), (1, 2), (0, 2)], attrs, None).unwrap();
        let s = g.stats();
        assert_eq!((s.n, s.m, s.f), (3, 3, 1));
        assert_eq!(s.mean_degree, 2.0);
    }

    #[test]
    fn stats_on_single_isolated_node() {
        let g = AttributedGraph::from_edges(&[], Matrix::zeros(1, 4), None).unwrap();
        assert_eq!(g.stats().mean_degree, 0.0);
    }

    #[test]
    fn induced_subgraph_single_node() {
        let g = line_graph(6, 2);
        let (adj, attrs) = g.induced_subgraph(&[5]).unwrap();
        assert_eq!(adj.data(), &[0.0]);
        assert_eq!(attrs.row(0), g.attribute_row(5));
    }

    #[test]
    fn induced_subgraph_non_adjacent_pair_is_zero() {
        let g = line_graph(3, 1);
        let (adj, _) = g.induced_subgraph(&[0, 2]).unwrap();
        assert_eq!(adj.data(), &[0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn induced_subgraph_triangle_is_complete() {
        let attrs = Matrix::zeros(3, 1);
        let g = AttributedGraph::from_edges(&[(0, 1), (1, 2), (0, 2)], attrs, None).unwrap();
        let (adj, _) = g.induced_subgraph(&[0, 1, 2]).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                assert_eq!(adj.at(a, b), if a == b { 0.0 } else { 1.0 });
            }
        }
    }

    #[test]
    fn induced_subgraph_duplicates_are_non_adjacent_copies() {
        let g = line_graph(3, 2);
        let (adj, attrs) = g.induced_subgraph(&[1, 1, 0]).unwrap();
        assert_eq!(adj.at(0, 1), 0.0);
        assert_eq!(adj.at(1, 0), 0.0);
        assert_eq!(adj.at(0, 2), 1.0);
        assert_eq!(adj.at(1, 2), 1.0);
        assert_eq!(attrs.row(0), attrs.row(1));
    }

    #[test]
    fn induced_subgraph_rejects_bad_ids() {
        let g = line_graph(3, 1);
        assert!(g.induced_subgraph(&[]).is_err());
        assert!(g.induced_subgraph(&[3]).is_err());
    }

    #[test]
    fn normalize_isolated_node() {
        let a = Matrix::zeros(1, 1);
        let s = normalize_adjacency(&a).unwrap();
        assert_eq!(s.data(), &[1.0]);
    }

    #[test]
    fn normalize_single_edge() {
        let a = Matrix::from_vec(2, 2, vec![0.0, 1.0, 1.0, 0.0]);
        let s = normalize_adjacency(&a).unwrap();
        for v in s.data() {
            assert!((v - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn normalize_rejects_asymmetry_and_loops() {
        let a = Matrix::from_vec(2, 2, vec![0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            normalize_adjacency(&a),
            Err(Error::AsymmetricAdjacency { .. })
        ));
        let with_loop = Matrix::from_vec(2, 2, vec![1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(normalize_adjacency(&with_loop), Err(Error::SelfLoop { .. })));
    }

    #[test]
    fn l2_normalized_rows_have_unit_norm() {
        let attrs = Matrix::from_vec(3, 2, vec![3.0, 4.0, 0.0, 0.0, -1.0, 1.0]);
        let g = AttributedGraph::from_edges(&[(0, 1), (1, 2)], attrs, None)
            .unwrap()
            .l2_normalized();
        assert_eq!(g.attribute_row(0), &[0.6, 0.8]);
        // Zero rows stay zero.
        assert_eq!(g.attribute_row(1), &[0.0, 0.0]);
        let norm: f64 = g.attribute_row(2).iter().map(|v| v * v).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }
}
