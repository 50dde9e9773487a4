use super::{ContentPlacement, Problem};
use crate::constellation::Metric;
use crate::costmodel::NodeDemand;
use crate::NodeId;

const SLACK: f64 = 1e-9;

pub fn default_thresholds(metric: Metric) -> Vec<f64> {
    match metric {
        Metric::Hop => vec![1.0, 2.0, 3.0, 4.0, 5.0],
        Metric::IdealLatency | Metric::SampledLatency => vec![5.0, 10.0, 20.0, 40.0, 80.0],
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StarFrontOutcome {
    pub placement: ContentPlacement,
    pub threshold: f64,
    /// User-slots that no candidate could bring within the threshold.
    pub unmet: usize,
}

/// Places persistent replicas so every demanding user has one within
/// `threshold`, for a single threshold.
fn with_threshold(problem: &Problem, demand: &NodeDemand, size_mb: f64, threshold: f64) -> (Vec<Vec<NodeId>>, usize, u64) {
    let o = problem.model.oracle;
    let mut placed: Vec<NodeId> = Vec::new();
    let mut prev = problem.model.origins.clone();
    let mut sets = Vec::with_capacity(demand.slots());
    let mut unmet = 0;
    let mut evals = 0u64;
    for t in 1..=demand.slots() {
        let mut cur: Vec<NodeId> = problem.model.origins.iter().chain(&placed).copied().collect();
        cur.sort();
        let mut users: Vec<NodeId> = demand.at(t).iter().map(|e| e.0).collect();
        users.sort();
        for u in users {
            let covered = cur.iter().any(|&v| o.dist(t, u, v) <= threshold + SLACK);
            if covered {
                continue;
            }
            let mut best: Option<(f64, NodeId)> = None;
            for &a in &problem.candidates {
                if cur.binary_search(&a).is_ok() || o.dist(t, u, a) > threshold + SLACK {
                    continue;
                }
                evals += 1;
                let copy = prev.iter().map(|&y| o.dist(t, a, y)).fold(f64::INFINITY, f64::min);
                let price = size_mb * problem.model.storage_of(a) + problem.model.alpha * copy;
                if best.is_none_or(|(b, _)| price < b) {
                    best = Some((price, a));
                }
            }
            match best {
                Some((_, a)) => {
                    let pos = cur.binary_search(&a).unwrap_err();
                    cur.insert(pos, a);
                    placed.push(a);
                }
                None => unmet += 1,
            }
        }
        sets.push(cur.clone());
        prev = cur;
    }
    (sets, unmet, evals)
}

/// StarFront: replicas are placed to meet a distance threshold and never
/// removed; the threshold from `thresholds` with the lowest total cost wins
/// (first one on ties).
pub fn starfront(problem: &Problem, demand: &NodeDemand, size_mb: f64, thresholds: &[f64]) -> StarFrontOutcome {
    let mut best: Option<(f64, f64, Vec<Vec<NodeId>>, usize)> = None;
    let mut evals = 0;
    for &th in thresholds {
        let (sets, unmet, e) = with_threshold(problem, demand, size_mb, th);
        evals += e;
        let total = problem.model.content_cost(&sets, demand, size_mb).total;
        if best.as_ref().is_none_or(|b| total < b.0) {
            best = Some((total, th, sets, unmet));
        }
    }
    let (total, threshold, sets, unmet) = best.unwrap_or((0.0, f64::NAN, vec![problem.model.origins.clone(); demand.slots()], 0));
    let mut placement = ContentPlacement {
        sets,
        history: vec![total],
        ..ContentPlacement::default()
    };
    placement.ops.iterations = thresholds.len() as u64;
    placement.ops.evaluations = evals;
    StarFrontOutcome {
        placement,
        threshold,
        unmet,
    }
}

/// Replica sets for one fixed threshold, for sweeps.
pub fn starfront_at(problem: &Problem, demand: &NodeDemand, size_mb: f64, threshold: f64) -> (Vec<Vec<NodeId>>, usize) {
    let (sets, unmet, _) = with_threshold(problem, demand, size_mb, threshold);
    (sets, unmet)
}
