use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use crate::constellation::{LinkKind, Metric, SnapshotGraph};
use crate::NodeId;

/// Compressed adjacency of one snapshot with per-arc weights.
#[derive(Debug, Clone)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<f64>,
    /// Index into the snapshot's edge list, for path reconstruction.
    edge_ids: Vec<u32>,
    metric: Metric,
}

#[derive(Clone, Copy, PartialEq)]
struct Entry(f64, u32);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on distance, ties by lower node id.
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest-path tree from one source.
#[derive(Debug, Clone)]
pub struct PathTree {
    pub source: NodeId,
    pub dist: Vec<f64>,
    /// `(parent node, edge index)` per reached node; `None` at the source.
    pub parent: Vec<Option<(u32, u32)>>,
}

impl PathTree {
    /// Edge indices from the source to `target`, source side first. `None` if
    /// unreachable.
    pub fn path_edges(&self, target: NodeId) -> Option<Vec<usize>> {
        if !self.dist[target.index()].is_finite() {
            return None;
        }
        let mut out = Vec::new();
        let mut cur = target.0;
        while let Some((p, e)) = self.parent[cur as usize] {
            out.push(e as usize);
            cur = p;
        }
        out.reverse();
        Some(out)
    }
}

impl Graph {
    pub fn new(snapshot: &SnapshotGraph, metric: Metric) -> Self {
        Self::filtered(snapshot, metric, |_| true)
    }

    /// Keeps only links whose kind passes `keep`.
    pub fn filtered(snapshot: &SnapshotGraph, metric: Metric, keep: impl Fn(LinkKind) -> bool) -> Self {
        let n = snapshot.node_count;
        let mut degree = vec![0usize; n + 1];
        for e in snapshot.edges.iter().filter(|e| keep(e.kind)) {
            degree[e.a.index() + 1] += 1;
            degree[e.b.index() + 1] += 1;
        }
        for i in 0..n {
            degree[i + 1] += degree[i];
        }
        let offsets = degree;
        let mut fill = offsets.clone();
        let m = offsets[n];
        let mut targets = vec![0u32; m];
        let mut weights = vec![0f64; m];
        let mut edge_ids = vec![0u32; m];
        for (k, e) in snapshot.edges.iter().enumerate() {
            if !keep(e.kind) {
                continue;
            }
            let w = e.weight(metric);
            for (from, to) in [(e.a, e.b), (e.b, e.a)] {
                let slot = &mut fill[from.index()];
                targets[*slot] = to.0;
                weights[*slot] = w;
                edge_ids[*slot] = k as u32;
                *slot += 1;
            }
        }
        Self {
            offsets,
            targets,
            weights,
            edge_ids,
            metric,
        }
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    /// Single-source distances: BFS for hop counts, Dijkstra otherwise.
    pub fn distances(&self, source: NodeId) -> Vec<f64> {
        self.tree(source).dist
    }

    pub fn tree(&self, source: NodeId) -> PathTree {
        let n = self.node_count();
        let mut dist = vec![f64::INFINITY; n];
        let mut parent = vec![None; n];
        dist[source.index()] = 0.0;
        if self.metric == Metric::Hop {
            let mut queue = VecDeque::from([source.0]);
            while let Some(u) = queue.pop_front() {
                let du = dist[u as usize];
                for k in self.offsets[u as usize]..self.offsets[u as usize + 1] {
                    let v = self.targets[k] as usize;
                    if dist[v].is_infinite() {
                        dist[v] = du + 1.0;
                        parent[v] = Some((u, self.edge_ids[k]));
                        queue.push_back(v as u32);
                    }
                }
            }
        } else {
            let mut heap = BinaryHeap::from([Entry(0.0, source.0)]);
            while let Some(Entry(du, u)) = heap.pop() {
                if du > dist[u as usize] {
                    continue;
                }
                for k in self.offsets[u as usize]..self.offsets[u as usize + 1] {
                    let v = self.targets[k] as usize;
                    let nd = du + self.weights[k];
                    if nd < dist[v] {
                        dist[v] = nd;
                        parent[v] = Some((u, self.edge_ids[k]));
                        heap.push(Entry(nd, v as u32));
                    }
                }
            }
        }
        PathTree { source, dist, parent }
    }
}
