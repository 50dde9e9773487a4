//! Shortest-path distances per slot and the three cost terms of a replica
//! schedule: query, replication and storage.

mod graph;
mod oracle;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use graph::{Graph, PathTree};
pub use oracle::DistanceOracle;

use crate::constellation::{Metric, Network, NodeKind};
use crate::demand::DemandMatrix;
use crate::{Error, NodeId, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    pub metric: Metric,
    /// Replication cost per unit distance, relative to query cost.
    pub alpha: f64,
    /// Storage price of ground replicas, in units of `c_qmin` per MB and slot.
    pub beta: f64,
    /// Storage price of satellite replicas.
    pub gamma: f64,
    /// Per-shell override of `gamma`, indexed by shell.
    #[serde(default)]
    pub shell_gamma: Vec<Option<f64>>,
    pub c_qmin: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        Self {
            metric: Metric::Hop,
            alpha: 50.0,
            beta: 1.0,
            gamma: 10.0,
            shell_gamma: Vec::new(),
            c_qmin: 1.0,
        }
    }
}

impl CostParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 1.0) || !self.alpha.is_finite() {
            return Err(Error::param("alpha", format!("must be >= 1, got {}", self.alpha)));
        }
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(Error::param("beta", format!("must be >= 0, got {}", self.beta)));
        }
        for (i, g) in std::iter::once(Some(self.gamma)).chain(self.shell_gamma.iter().copied()).enumerate() {
            let Some(g) = g else { continue };
            if !(g >= 0.0) || !g.is_finite() {
                return Err(Error::param("gamma", format!("must be >= 0, got {g}")));
            }
            if g < self.beta {
                let which = if i == 0 { "default".to_string() } else { format!("shell {}", i - 1) };
                log::warn!("{which} gamma {g} is below beta {}: satellite storage cheaper than ground", self.beta);
            }
        }
        if !(self.c_qmin > 0.0) || !self.c_qmin.is_finite() {
            return Err(Error::param("c_qmin", format!("must be positive, got {}", self.c_qmin)));
        }
        Ok(())
    }

    pub fn gamma_for(&self, shell: usize) -> f64 {
        self.shell_gamma.get(shell).copied().flatten().unwrap_or(self.gamma)
    }

    /// Smallest positive user-to-candidate distance over all slots, or 1.0
    /// (with a warning) when no such pair exists.
    pub fn c_qmin_from(oracle: &DistanceOracle, users: &[NodeId], candidates: &[NodeId]) -> f64 {
        match oracle.min_positive(users, candidates) {
            Some(d) => d,
            None => {
                log::warn!("no positive user-candidate distance; using c_qmin = 1");
                1.0
            }
        }
    }

    /// Storage price per MB and slot for every node of `network`. Origins
    /// hold every content anyway and cost nothing.
    pub fn storage_units(&self, network: &Network) -> Vec<f64> {
        network
            .nodes()
            .iter()
            .map(|info| match info.kind {
                NodeKind::Satellite(id) => self.gamma_for(id.shell as usize) * self.c_qmin,
                NodeKind::Ground(crate::constellation::GroundKind::Origin) => 0.0,
                NodeKind::Ground(_) => self.beta * self.c_qmin,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub query: f64,
    pub replication: f64,
    pub storage: f64,
    pub total: f64,
}

impl CostBreakdown {
    pub fn new(query: f64, replication: f64, storage: f64) -> Self {
        Self {
            query,
            replication,
            storage,
            total: query + replication + storage,
        }
    }

    /// False when some demand could not reach any replica.
    pub fn is_finite(&self) -> bool {
        self.total.is_finite()
    }
}

impl std::ops::Add for CostBreakdown {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self::new(self.query + o.query, self.replication + o.replication, self.storage + o.storage)
    }
}

impl std::iter::Sum for CostBreakdown {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), |a, b| a + b)
    }
}

/// Demand of one content resolved to nodes: `slots[t - 1]` lists
/// `(user node, weight)` with positive weight.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NodeDemand {
    pub slots: Vec<Vec<(NodeId, f64)>>,
}

impl NodeDemand {
    /// One entry per content of `matrix`; `users[u]` is the node of matrix user `u`.
    pub fn from_matrix(matrix: &DemandMatrix, users: &[NodeId]) -> Vec<NodeDemand> {
        assert_eq!(matrix.users().len(), users.len());
        (0..matrix.contents().len())
            .map(|c| NodeDemand {
                slots: (1..=matrix.slots())
                    .map(|t| {
                        matrix
                            .row(t, c)
                            .iter()
                            .zip(users)
                            .filter(|(w, _)| **w > 0.0)
                            .map(|(w, v)| (*v, *w))
                            .collect()
                    })
                    .collect(),
            })
            .collect()
    }

    pub fn slots(&self) -> usize {
        self.slots.len()
    }

    pub fn at(&self, t: usize) -> &[(NodeId, f64)] {
        &self.slots[t - 1]
    }

    pub fn total(&self) -> f64 {
        self.slots.iter().flatten().map(|(_, w)| w).sum()
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            slots: self
                .slots
                .iter()
                .map(|s| s.iter().filter(|_| lambda > 0.0).map(|&(v, w)| (v, w * lambda)).collect())
                .collect(),
        }
    }
}

/// Replica sets `S[c][t - 1]`, each sorted and duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ReplicaSchedule {
    sets: Vec<Vec<Vec<NodeId>>>,
}

impl ReplicaSchedule {
    pub fn origin_only(contents: usize, slots: usize, origins: &[NodeId]) -> Self {
        let mut base = origins.to_vec();
        base.sort();
        base.dedup();
        Self {
            sets: vec![vec![base; slots]; contents],
        }
    }

    pub fn from_sets(mut sets: Vec<Vec<Vec<NodeId>>>) -> Self {
        for s in sets.iter_mut().flatten() {
            s.sort();
            s.dedup();
        }
        Self { sets }
    }

    pub fn contents(&self) -> usize {
        self.sets.len()
    }

    pub fn slots(&self) -> usize {
        self.sets.first().map_or(0, Vec::len)
    }

    pub fn get(&self, c: usize, t: usize) -> &[NodeId] {
        &self.sets[c][t - 1]
    }

    pub fn set(&mut self, c: usize, t: usize, mut nodes: Vec<NodeId>) {
        nodes.sort();
        nodes.dedup();
        self.sets[c][t - 1] = nodes;
    }

    /// All slots of content `c`.
    pub fn content(&self, c: usize) -> &[Vec<NodeId>] {
        &self.sets[c]
    }

    pub fn set_content(&mut self, c: usize, sets: Vec<Vec<NodeId>>) {
        self.sets[c] = sets;
        for s in &mut self.sets[c] {
            s.sort();
            s.dedup();
        }
    }

    /// Replicas of `(c, t)` that are not origins.
    pub fn replicas<'a>(&'a self, c: usize, t: usize, origins: &'a [NodeId]) -> impl Iterator<Item = NodeId> + 'a {
        self.get(c, t).iter().copied().filter(move |v| !origins.contains(v))
    }

    /// Checks that every set contains all origins and otherwise only candidates.
    pub fn validate(&self, origins: &[NodeId], candidates: &[NodeId]) -> Result<()> {
        for (c, slots) in self.sets.iter().enumerate() {
            for (t, set) in slots.iter().enumerate() {
                if let Some(o) = origins.iter().find(|o| set.binary_search(o).is_err()) {
                    return Err(Error::InvalidSchedule(format!(
                        "content {c} slot {}: origin {o} missing",
                        t + 1
                    )));
                }
                if let Some(v) = set.iter().find(|v| !origins.contains(v) && !candidates.contains(v)) {
                    return Err(Error::InvalidSchedule(format!(
                        "content {c} slot {}: node {v} is not a replica candidate",
                        t + 1
                    )));
                }
                if set.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::InvalidSchedule(format!("content {c} slot {}: set not sorted", t + 1)));
                }
            }
        }
        Ok(())
    }
}

/// Cost evaluation over a distance oracle.
#[derive(Debug, Clone)]
pub struct CostModel<'a> {
    pub oracle: &'a DistanceOracle,
    pub alpha: f64,
    /// Storage price per MB and slot, indexed by node id.
    pub storage_unit: Vec<f64>,
    pub origins: Vec<NodeId>,
}

impl<'a> CostModel<'a> {
    pub fn new(oracle: &'a DistanceOracle, alpha: f64, storage_unit: Vec<f64>, origins: Vec<NodeId>) -> Self {
        let mut origins = origins;
        origins.sort();
        origins.dedup();
        Self {
            oracle,
            alpha,
            storage_unit,
            origins,
        }
    }

    pub fn storage_of(&self, v: NodeId) -> f64 {
        if self.origins.binary_search(&v).is_ok() {
            0.0
        } else {
            self.storage_unit[v.index()]
        }
    }

    /// Demand-weighted distance from each user to its closest replica in `set`.
    pub fn query_slot(&self, t: usize, set: &[NodeId], demand: &[(NodeId, f64)]) -> f64 {
        demand
            .iter()
            .map(|&(u, w)| {
                let best = set
                    .iter()
                    .map(|&v| self.oracle.dist(t, u, v))
                    .fold(f64::INFINITY, f64::min);
                w * best
            })
            .sum()
    }

    /// `alpha` times the distance from each new replica to its closest
    /// predecessor, measured in slot `t`.
    pub fn replication_slot(&self, t: usize, prev: &[NodeId], cur: &[NodeId]) -> f64 {
        cur.iter()
            .map(|&x| {
                if prev.contains(&x) {
                    return 0.0;
                }
                let d = prev
                    .iter()
                    .map(|&y| self.oracle.dist(t, x, y))
                    .fold(f64::INFINITY, f64::min);
                self.alpha * d
            })
            .sum()
    }

    pub fn storage_slot(&self, set: &[NodeId], size_mb: f64) -> f64 {
        set.iter().map(|&v| size_mb * self.storage_of(v)).sum()
    }

    pub fn query_cost(&self, sets: &[Vec<NodeId>], demand: &NodeDemand) -> f64 {
        (1..=sets.len().min(demand.slots()))
            .map(|t| self.query_slot(t, &sets[t - 1], demand.at(t)))
            .sum()
    }

    /// Slot 0 holds the origins only.
    pub fn replication_cost(&self, sets: &[Vec<NodeId>]) -> f64 {
        let mut prev: &[NodeId] = &self.origins;
        let mut total = 0.0;
        for (i, cur) in sets.iter().enumerate() {
            total += self.replication_slot(i + 1, prev, cur);
            prev = cur;
        }
        total
    }

    pub fn storage_cost(&self, sets: &[Vec<NodeId>], size_mb: f64) -> f64 {
        sets.iter().map(|s| self.storage_slot(s, size_mb)).sum()
    }

    pub fn content_cost(&self, sets: &[Vec<NodeId>], demand: &NodeDemand, size_mb: f64) -> CostBreakdown {
        CostBreakdown::new(
            self.query_cost(sets, demand),
            self.replication_cost(sets),
            self.storage_cost(sets, size_mb),
        )
    }

    /// Per-content breakdowns of a whole schedule.
    pub fn evaluate(&self, schedule: &ReplicaSchedule, demand: &[NodeDemand], sizes_mb: &[f64]) -> Vec<CostBreakdown> {
        (0..schedule.contents())
            .map(|c| self.content_cost(schedule.content(c), &demand[c], sizes_mb[c]))
            .collect()
    }

    /// Slots in which some positive demand cannot reach any replica.
    pub fn unreachable_slots(&self, sets: &[Vec<NodeId>], demand: &NodeDemand) -> Vec<usize> {
        (1..=sets.len().min(demand.slots()))
            .filter(|&t| self.query_slot(t, &sets[t - 1], demand.at(t)).is_infinite())
            .collect()
    }
}

/// Union of users, candidates and origins, the node set an oracle must cover.
pub fn relevant_nodes(users: &[NodeId], candidates: &[NodeId], origins: &[NodeId]) -> Vec<NodeId> {
    let mut all: Vec<NodeId> = users.iter().chain(candidates).chain(origins).copied().collect();
    all.sort();
    all.dedup();
    all
}

/// Maps matrix user names to network node ids.
pub fn resolve_users(network: &Network, matrix: &DemandMatrix) -> Result<Vec<NodeId>> {
    let mut by_name: HashMap<&str, NodeId> = HashMap::new();
    for u in network.users() {
        by_name.insert(network.node(u).name.as_str(), u);
    }
    matrix
        .users()
        .iter()
        .map(|name| {
            by_name
                .get(name.as_str())
                .copied()
                .ok_or_else(|| Error::param("demand", format!("user node `{name}` is not a user region")))
        })
        .collect()
}
