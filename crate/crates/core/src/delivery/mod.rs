//! Request-level replay of a replica schedule: routing policy, download time
//! from propagation plus bottleneck transmission, per-slot QoE and traffic.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::constellation::{LinkKind, SnapshotGraph};
use crate::costmodel::{DistanceOracle, Graph, NodeDemand, ReplicaSchedule};
use crate::{Error, NodeId, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Closest,
    RoundRobin,
    WeightedRoundRobin,
}

impl PolicyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Closest => "closest",
            PolicyKind::RoundRobin => "round_robin",
            PolicyKind::WeightedRoundRobin => "weighted_round_robin",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoutingPolicy {
    pub kind: PolicyKind,
    #[serde(default = "default_fanout")]
    pub fanout: usize,
    /// Shares of the closest, second closest, ... replica.
    #[serde(default = "default_weights")]
    pub weights: Vec<f64>,
}

fn default_fanout() -> usize {
    3
}

fn default_weights() -> Vec<f64> {
    vec![4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0]
}

impl RoutingPolicy {
    pub fn new(kind: PolicyKind) -> Self {
        Self {
            kind,
            fanout: default_fanout(),
            weights: default_weights(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.fanout == 0 {
            return Err(Error::param("fanout", "must be at least 1"));
        }
        if self.kind == PolicyKind::WeightedRoundRobin {
            if self.weights.len() != self.fanout {
                return Err(Error::param("weights", "need one weight per fanout position"));
            }
            if self.weights.iter().any(|w| !(*w >= 0.0)) {
                return Err(Error::param("weights", "must be nonnegative"));
            }
            if (self.weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Err(Error::param("weights", "must sum to 1"));
            }
            if self.weights.windows(2).any(|w| w[1] > w[0]) {
                return Err(Error::param("weights", "must be non-increasing with distance rank"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkModel {
    pub terrestrial_gbps: f64,
    pub satellite_gbps: f64,
}

impl Default for LinkModel {
    fn default() -> Self {
        Self {
            terrestrial_gbps: 20.0,
            satellite_gbps: 10.0,
        }
    }
}

impl LinkModel {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("terrestrial_gbps", self.terrestrial_gbps), ("satellite_gbps", self.satellite_gbps)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::param(name, "throughput must be positive"));
            }
        }
        Ok(())
    }

    pub fn gbps(&self, kind: LinkKind) -> f64 {
        if kind.is_satellite() {
            self.satellite_gbps
        } else {
            self.terrestrial_gbps
        }
    }
}

/// Score of one request: full marks within the budget, falling linearly to
/// zero at twice the budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QoeModel {
    pub budget_s: f64,
    pub max_score: f64,
}

impl Default for QoeModel {
    fn default() -> Self {
        Self {
            budget_s: 4.0,
            max_score: 10.0,
        }
    }
}

impl QoeModel {
    pub fn score(&self, download_s: f64) -> f64 {
        if !download_s.is_finite() {
            return 0.0;
        }
        let late = (download_s - self.budget_s).max(0.0) / self.budget_s;
        (self.max_score - self.max_score * late).max(0.0)
    }

    pub fn describe(&self) -> String {
        format!(
            "qoe = max(0, {m} - {m} * max(0, download_s - {b}) / {b})",
            m = self.max_score,
            b = self.budget_s
        )
    }
}

/// A path as seen by the transfer model.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PathInfo {
    pub propagation_ms: f64,
    pub links: Vec<LinkKind>,
}

/// Propagation plus `size_mb` over the slowest link of the path. A local
/// serve (empty path) transmits at the terrestrial rate.
pub fn chunk_download_time(path: Option<&PathInfo>, size_mb: f64, links: &LinkModel) -> f64 {
    let Some(path) = path else {
        return f64::INFINITY;
    };
    let gbps = path
        .links
        .iter()
        .map(|k| links.gbps(*k))
        .fold(f64::INFINITY, f64::min)
        .min(links.terrestrial_gbps);
    path.propagation_ms / 1000.0 + size_mb * 8.0 / (gbps * 1000.0)
}

/// Per `(user, content)` request counters, persisting across slots.
#[derive(Debug, Clone, Default)]
pub struct RouteState {
    served: u64,
    per_rank: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Routed {
    pub node: NodeId,
    pub distance: f64,
    pub unreachable: bool,
}

/// Picks the replica for the next request of one user. `dist` gives the
/// routing distance from the user; `origin` is the fallback when nothing is
/// reachable.
pub fn route(
    policy: &RoutingPolicy,
    state: &mut RouteState,
    replicas: &[NodeId],
    origin: NodeId,
    dist: impl Fn(NodeId) -> f64,
) -> Routed {
    let mut ranked: Vec<(f64, NodeId)> = replicas.iter().map(|&v| (dist(v), v)).filter(|(d, _)| d.is_finite()).collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    if ranked.is_empty() {
        return Routed {
            node: origin,
            distance: f64::INFINITY,
            unreachable: true,
        };
    }
    let m = ranked.len().min(policy.fanout);
    state.served += 1;
    let rank = match policy.kind {
        PolicyKind::Closest => 0,
        PolicyKind::RoundRobin => ((state.served - 1) % m as u64) as usize,
        PolicyKind::WeightedRoundRobin => {
            if state.per_rank.len() < policy.fanout {
                state.per_rank.resize(policy.fanout, 0);
            }
            let total: f64 = policy.weights[..m].iter().sum();
            let n = state.per_rank[..m].iter().sum::<u64>() + 1;
            // Largest deficit against the target share; closer rank on ties.
            let mut best = 0;
            let mut best_gap = f64::NEG_INFINITY;
            for r in 0..m {
                let gap = n as f64 * policy.weights[r] / total - state.per_rank[r] as f64;
                if gap > best_gap + 1e-12 {
                    best = r;
                    best_gap = gap;
                }
            }
            state.per_rank[best] += 1;
            best
        }
    };
    Routed {
        node: ranked[rank].1,
        distance: ranked[rank].0,
        unreachable: false,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlotDelivery {
    pub slot: usize,
    pub requests: usize,
    /// Demand-weighted mean score.
    pub mean_qoe: f64,
    /// Bytes moved summed over every traversed link.
    pub traffic_gb: f64,
    pub unreachable: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct DeliveryReport {
    /// Slots with at least one request.
    pub slots: Vec<SlotDelivery>,
    /// Served demand weight per replica node.
    pub replica_load: BTreeMap<NodeId, f64>,
}

impl DeliveryReport {
    pub fn total_traffic_gb(&self) -> f64 {
        self.slots.iter().map(|s| s.traffic_gb).sum()
    }

    pub fn mean_qoe(&self) -> f64 {
        let n: usize = self.slots.iter().map(|s| s.requests).sum();
        if n == 0 {
            return 0.0;
        }
        self.slots.iter().map(|s| s.mean_qoe * s.requests as f64).sum::<f64>() / n as f64
    }
}

#[derive(Debug, Clone)]
pub struct DeliveryInput<'a> {
    pub snapshots: &'a [SnapshotGraph],
    /// Routing distances; paths are shortest paths under the same metric.
    pub oracle: &'a DistanceOracle,
    pub schedule: &'a ReplicaSchedule,
    pub demand: &'a [NodeDemand],
    /// Bytes per request, per content (MB).
    pub request_mb: &'a [f64],
    pub origins: &'a [NodeId],
    pub policy: &'a RoutingPolicy,
    pub links: &'a LinkModel,
    pub qoe: &'a QoeModel,
    /// Optional per-server throughput cap; requests queue FIFO per slot.
    pub server_capacity_mbps: Option<f64>,
}

/// Replays every request. A demand weight `w` becomes `ceil(w)` requests of
/// weight `w / ceil(w)`; traffic and load are weighted accordingly.
pub fn simulate_delivery(input: &DeliveryInput) -> DeliveryReport {
    let mut report = DeliveryReport::default();
    let mut states: HashMap<(NodeId, usize), RouteState> = HashMap::new();
    let origin = input.origins.first().copied().unwrap_or(NodeId(0));
    let slots = input.schedule.slots().min(input.snapshots.len());
    for t in 1..=slots {
        let snap = &input.snapshots[t - 1];
        let mut users: Vec<NodeId> = input
            .demand
            .iter()
            .flat_map(|d| d.slots.get(t - 1).into_iter().flatten().map(|e| e.0))
            .collect();
        users.sort();
        users.dedup();
        if users.is_empty() {
            continue;
        }
        let graph = Graph::new(snap, input.oracle.metric());
        let trees: HashMap<NodeId, _> = users.iter().map(|&u| (u, graph.tree(u))).collect();
        let mut busy_until: HashMap<NodeId, f64> = HashMap::new();
        let mut out = SlotDelivery {
            slot: t,
            requests: 0,
            mean_qoe: 0.0,
            traffic_gb: 0.0,
            unreachable: 0,
        };
        let mut weight_sum = 0.0;
        let mut score_sum = 0.0;
        for (c, d) in input.demand.iter().enumerate() {
            let mut entries: Vec<(NodeId, f64)> = d.slots.get(t - 1).cloned().unwrap_or_default();
            entries.sort_by_key(|e| e.0);
            let replicas = input.schedule.get(c, t);
            for (u, w) in entries {
                let count = w.ceil().max(1.0) as usize;
                let each = w / count as f64;
                let tree = &trees[&u];
                for _ in 0..count {
                    let state = states.entry((u, c)).or_default();
                    let r = route(input.policy, state, replicas, origin, |v| input.oracle.dist(t, u, v));
                    out.requests += 1;
                    weight_sum += each;
                    if r.unreachable {
                        out.unreachable += 1;
                        continue;
                    }
                    let path = tree.path_edges(r.node).map(|edges| PathInfo {
                        propagation_ms: edges.iter().map(|&e| snap.edges[e].ideal_latency_ms).sum(),
                        links: edges.iter().map(|&e| snap.edges[e].kind).collect(),
                    });
                    let size = input.request_mb[c];
                    let mut time = chunk_download_time(path.as_ref(), size, input.links);
                    if let (Some(cap), Some(p)) = (input.server_capacity_mbps, path.as_ref()) {
                        let tx = size * 8.0 / cap;
                        let start = busy_until.get(&r.node).copied().unwrap_or(0.0);
                        let done = start + tx;
                        busy_until.insert(r.node, done);
                        time = time.max(p.propagation_ms / 1000.0 + done);
                    }
                    score_sum += each * input.qoe.score(time);
                    if let Some(p) = &path {
                        out.traffic_gb += each * size / 1000.0 * p.links.len() as f64;
                    }
                    *report.replica_load.entry(r.node).or_default() += each;
                }
            }
        }
        if out.requests > 0 {
            out.mean_qoe = if weight_sum > 0.0 { score_sum / weight_sum } else { 0.0 };
            report.slots.push(out);
        }
    }
    report
}

#[cfg(test)]
mod tests;
