use super::graph::Graph;
use crate::constellation::{Metric, SnapshotGraph};
use crate::{par, NodeId};

const ABSENT: u32 = u32::MAX;

/// Per-slot shortest-path distances between a fixed set of relevant nodes.
///
/// Distances are stored densely as `f32`; `+inf` marks disconnected pairs.
#[derive(Debug, Clone)]
pub struct DistanceOracle {
    metric: Metric,
    nodes: Vec<NodeId>,
    local: Vec<u32>,
    /// One row-major `n x n` matrix per slot.
    slots: Vec<Vec<f32>>,
}

impl DistanceOracle {
    /// Runs one single-source search per relevant node and slot.
    ///
    /// `relevant` is deduplicated and sorted; slot `t` of the oracle is
    /// `snapshots[t - 1]`.
    pub fn build(snapshots: &[SnapshotGraph], relevant: &[NodeId], metric: Metric) -> Self {
        let mut nodes = relevant.to_vec();
        nodes.sort();
        nodes.dedup();
        let node_count = snapshots.first().map_or(0, |s| s.node_count);
        let mut local = vec![ABSENT; node_count.max(nodes.last().map_or(0, |n| n.index() + 1))];
        for (i, n) in nodes.iter().enumerate() {
            local[n.index()] = i as u32;
        }
        let slots = snapshots
            .iter()
            .map(|snap| {
                let graph = Graph::new(snap, metric);
                let rows = par::map(&nodes, |&src| {
                    let d = graph.distances(src);
                    nodes.iter().map(|v| d[v.index()] as f32).collect::<Vec<f32>>()
                });
                rows.concat()
            })
            .collect();
        Self {
            metric,
            nodes,
            local,
            slots,
        }
    }

    /// Builds an oracle directly from dense per-slot matrices over `nodes`
    /// (sorted, distinct). Used for hand-made instances.
    pub fn from_matrices(metric: Metric, nodes: Vec<NodeId>, matrices: Vec<Vec<f64>>) -> Self {
        assert!(nodes.windows(2).all(|w| w[0] < w[1]), "nodes must be sorted and distinct");
        let n = nodes.len();
        let mut local = vec![ABSENT; nodes.last().map_or(0, |v| v.index() + 1)];
        for (i, v) in nodes.iter().enumerate() {
            local[v.index()] = i as u32;
        }
        let slots = matrices
            .into_iter()
            .map(|m| {
                assert_eq!(m.len(), n * n, "matrix must be n x n");
                m.into_iter().map(|x| x as f32).collect()
            })
            .collect();
        Self {
            metric,
            nodes,
            local,
            slots,
        }
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn slots(&self) -> usize {
        self.slots.len()
    }

    /// Relevant nodes in ascending id order.
    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn contains(&self, node: NodeId) -> bool {
        self.local_index(node).is_some()
    }

    /// Position of `node` in [`Self::nodes`].
    #[inline]
    pub fn local_index(&self, node: NodeId) -> Option<usize> {
        match self.local.get(node.index()) {
            Some(&i) if i != ABSENT => Some(i as usize),
            _ => None,
        }
    }

    #[inline]
    fn li(&self, node: NodeId) -> usize {
        self.local_index(node)
            .unwrap_or_else(|| panic!("node {node} is not covered by the distance oracle"))
    }

    /// Distance at 1-based slot `t`.
    #[inline]
    pub fn dist(&self, t: usize, a: NodeId, b: NodeId) -> f64 {
        let n = self.nodes.len();
        self.slots[t - 1][self.li(a) * n + self.li(b)] as f64
    }

    /// Distances from `a` to every relevant node, indexed like [`Self::nodes`].
    #[inline]
    pub fn row(&self, t: usize, a: NodeId) -> &[f32] {
        let n = self.nodes.len();
        let i = self.li(a);
        &self.slots[t - 1][i * n..(i + 1) * n]
    }

    /// Smallest positive distance between any of `from` and any of `to`
    /// over all slots.
    pub fn min_positive(&self, from: &[NodeId], to: &[NodeId]) -> Option<f64> {
        let to_local: Vec<usize> = to.iter().filter_map(|v| self.local_index(*v)).collect();
        let mut best = f64::INFINITY;
        for t in 1..=self.slots() {
            for a in from.iter().filter(|a| self.contains(**a)) {
                let row = self.row(t, *a);
                for &j in &to_local {
                    let d = row[j] as f64;
                    if d > 0.0 && d < best {
                        best = d;
                    }
                }
            }
        }
        best.is_finite().then_some(best)
    }
}
