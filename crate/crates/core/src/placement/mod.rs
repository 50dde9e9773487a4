//! Replica placement: the multi-slot local searches MTLS and MTOLS and the
//! baselines they are compared against.
//!
//! All algorithms work on one content at a time. A [`Problem`] bundles the
//! cost model with the candidate replica nodes and their orbit structure.

pub mod dp;
mod local;
mod pch;
mod slotwise;
mod starfront;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use local::{mtls, mtols, orbit_layers};
pub use pch::pch;
pub use slotwise::{jms_greedy, local_search, naive_greedy, slot_cost, SlotCost};
pub use starfront::{default_thresholds, starfront, starfront_at, StarFrontOutcome};

use crate::constellation::Metric;
use crate::costmodel::{CostModel, NodeDemand};
use crate::{Error, NodeId, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    NoReplica,
    NaiveGreedy,
    JmsGreedy,
    LocalSearch,
    #[serde(rename = "starfront")]
    StarFront,
    Pch,
    Mtls,
    Mtols,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::NoReplica,
        Algorithm::NaiveGreedy,
        Algorithm::JmsGreedy,
        Algorithm::LocalSearch,
        Algorithm::StarFront,
        Algorithm::Pch,
        Algorithm::Mtls,
        Algorithm::Mtols,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::NoReplica => "no_replica",
            Algorithm::NaiveGreedy => "naive_greedy",
            Algorithm::JmsGreedy => "jms_greedy",
            Algorithm::LocalSearch => "local_search",
            Algorithm::StarFront => "starfront",
            Algorithm::Pch => "pch",
            Algorithm::Mtls => "mtls",
            Algorithm::Mtols => "mtols",
        }
    }

    /// PCH is rule-based and always sees the real demand.
    pub fn uses_prediction(self) -> bool {
        self != Algorithm::Pch
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::UnknownAlgorithm(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Outer iterations of MTLS / MTOLS.
    pub max_iterations: usize,
    /// Swap partners considered per replica in MTLS.
    pub neighbor_limit: usize,
    /// Stop once an iteration improves the cost by less than this fraction.
    pub relative_tolerance: f64,
    pub rng_seed: u64,
    /// StarFront distance thresholds; metric-dependent default when `None`.
    pub starfront_thresholds: Option<Vec<f64>>,
    pub slot_seconds: f64,
    pub pch_intra_period_s: f64,
    /// Defaults to four intra-orbit periods.
    pub pch_inter_period_s: Option<f64>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            neighbor_limit: 4,
            relative_tolerance: 1e-9,
            rng_seed: 0,
            starfront_thresholds: None,
            slot_seconds: 300.0,
            pch_intra_period_s: 258.0,
            pch_inter_period_s: None,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::param("max_iterations", "must be at least 1"));
        }
        if self.neighbor_limit == 0 {
            return Err(Error::param("neighbor_limit", "must be at least 1"));
        }
        if !(self.relative_tolerance >= 0.0) {
            return Err(Error::param("relative_tolerance", "must be >= 0"));
        }
        for (name, v) in [
            ("slot_seconds", self.slot_seconds),
            ("pch_intra_period_s", self.pch_intra_period_s),
            ("pch_inter_period_s", self.inter_period_s()),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::param(name, "must be positive"));
            }
        }
        if let Some(grid) = &self.starfront_thresholds {
            if grid.is_empty() || grid.iter().any(|x| !(*x >= 0.0)) {
                return Err(Error::param("starfront_thresholds", "need at least one threshold, all >= 0"));
            }
        }
        Ok(())
    }

    pub fn inter_period_s(&self) -> f64 {
        self.pch_inter_period_s.unwrap_or(4.0 * self.pch_intra_period_s)
    }

    pub fn thresholds(&self, metric: Metric) -> Vec<f64> {
        self.starfront_thresholds.clone().unwrap_or_else(|| default_thresholds(metric))
    }
}

/// One orbital plane: satellites in index order (the direction of motion).
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    pub shell: usize,
    pub plane: usize,
    pub nodes: Vec<NodeId>,
    /// False for geostationary shells, whose satellites never hand off.
    pub moving: bool,
}

/// Secondary proximity used to break ties between equally distant
/// satellites: `(slot, a, b) -> distance`.
pub type Proximity = Arc<dyn Fn(usize, NodeId, NodeId) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct Problem<'a> {
    pub model: CostModel<'a>,
    /// Replica candidates outside the origins, sorted.
    pub candidates: Vec<NodeId>,
    /// Orbital planes of the candidate satellites (may include satellites
    /// that are not candidates; those are never used).
    pub orbits: Vec<Orbit>,
    pub proximity: Option<Proximity>,
}

impl std::fmt::Debug for Problem<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("candidates", &self.candidates.len())
            .field("orbits", &self.orbits.len())
            .field("origins", &self.model.origins)
            .finish()
    }
}

impl<'a> Problem<'a> {
    pub fn new(model: CostModel<'a>, candidates: Vec<NodeId>, orbits: Vec<Orbit>) -> Self {
        let mut candidates: Vec<NodeId> = candidates.into_iter().filter(|c| !model.origins.contains(c)).collect();
        candidates.sort();
        candidates.dedup();
        Self {
            model,
            candidates,
            orbits,
            proximity: None,
        }
    }

    pub fn with_proximity(mut self, proximity: Proximity) -> Self {
        self.proximity = Some(proximity);
        self
    }

    pub fn is_candidate(&self, v: NodeId) -> bool {
        self.candidates.binary_search(&v).is_ok()
    }

    pub fn slots(&self) -> usize {
        self.model.oracle.slots()
    }

    /// Candidate nodes grouped for the orbit-level DP: each orbit's candidate
    /// satellites, then every remaining (ground) candidate on its own, since
    /// a stationary node is its own best member in every slot.
    pub fn candidate_groups(&self) -> Vec<Vec<NodeId>> {
        let mut on_orbit = Vec::new();
        let mut groups: Vec<Vec<NodeId>> = Vec::new();
        for o in &self.orbits {
            let g: Vec<NodeId> = o.nodes.iter().copied().filter(|v| self.is_candidate(*v)).collect();
            on_orbit.extend(g.iter().copied());
            if !g.is_empty() {
                groups.push(g);
            }
        }
        on_orbit.sort();
        groups.extend(
            self.candidates
                .iter()
                .filter(|v| on_orbit.binary_search(v).is_err())
                .map(|v| vec![*v]),
        );
        groups
    }

    /// Drops `(user, slot)` entries whose user reaches neither an origin nor
    /// any candidate; no schedule can serve them.
    pub fn servable_demand(&self, demand: &NodeDemand) -> (NodeDemand, usize) {
        let o = self.model.oracle;
        let targets: Vec<usize> = self
            .model
            .origins
            .iter()
            .chain(&self.candidates)
            .filter_map(|v| o.local_index(*v))
            .collect();
        let mut dropped = 0;
        let slots = demand
            .slots
            .iter()
            .enumerate()
            .map(|(i, entries)| {
                let t = i + 1;
                entries
                    .iter()
                    .copied()
                    .filter(|&(u, _)| {
                        let row = o.row(t, u);
                        let ok = targets.iter().any(|&j| row[j].is_finite());
                        if !ok {
                            dropped += 1;
                        }
                        ok
                    })
                    .collect()
            })
            .collect();
        (NodeDemand { slots }, dropped)
    }
}

/// Work counters reported per algorithm and content.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OpCounts {
    pub iterations: u64,
    /// DP relaxations (MTLS, MTOLS replica stage).
    pub relaxations: u64,
    /// Orbit-stage DP relaxations (MTOLS).
    pub orbit_relaxations: u64,
    /// Candidate set evaluations (per-slot baselines).
    pub evaluations: u64,
}

impl std::ops::AddAssign for OpCounts {
    fn add_assign(&mut self, o: Self) {
        self.iterations += o.iterations;
        self.relaxations += o.relaxations;
        self.orbit_relaxations += o.orbit_relaxations;
        self.evaluations += o.evaluations;
    }
}

/// Schedule of one content plus diagnostics.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ContentPlacement {
    pub sets: Vec<Vec<NodeId>>,
    /// Optimiser objective before the first and after each iteration.
    pub history: Vec<f64>,
    pub ops: OpCounts,
    pub notes: Vec<String>,
}

pub fn no_replica(problem: &Problem, slots: usize) -> ContentPlacement {
    ContentPlacement {
        sets: vec![problem.model.origins.clone(); slots],
        ..ContentPlacement::default()
    }
}

/// Runs `algorithm` for one content.
pub fn place(
    algorithm: Algorithm,
    problem: &Problem,
    demand: &NodeDemand,
    size_mb: f64,
    config: &OptimizerConfig,
) -> ContentPlacement {
    let (servable, dropped) = problem.servable_demand(demand);
    let mut out = match algorithm {
        Algorithm::NoReplica => no_replica(problem, demand.slots()),
        Algorithm::NaiveGreedy => naive_greedy(problem, &servable, size_mb),
        Algorithm::JmsGreedy => jms_greedy(problem, &servable, size_mb),
        Algorithm::LocalSearch => local_search(problem, &servable, size_mb),
        Algorithm::StarFront => {
            let r = starfront(problem, &servable, size_mb, &config.thresholds(problem.model.oracle.metric()));
            let mut p = r.placement;
            p.notes.push(format!("threshold {}", r.threshold));
            if r.unmet > 0 {
                p.notes.push(format!("{} user-slots had no replica within the threshold", r.unmet));
            }
            p
        }
        Algorithm::Pch => pch(problem, &servable, config),
        Algorithm::Mtls => mtls(problem, &servable, size_mb, config),
        Algorithm::Mtols => mtols(problem, &servable, size_mb, config),
    };
    if dropped > 0 {
        out.notes.push(format!("{dropped} user-slots cannot reach any replica candidate"));
    }
    out
}

#[cfg(test)]
mod tests;
