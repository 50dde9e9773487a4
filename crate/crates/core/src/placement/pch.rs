use std::collections::HashMap;

use super::{ContentPlacement, OptimizerConfig, Problem};
use crate::costmodel::NodeDemand;
use crate::NodeId;

/// Periods in slots, at least one.
fn period_slots(period_s: f64, slot_s: f64) -> usize {
    ((period_s / slot_s) - 1e-9).ceil().max(1.0) as usize
}

/// Periodic cache handoff. Each demanding user of the first demanded slot
/// gets a replica on its closest candidate satellite; every intra-orbit
/// period each replica moves to the trailing satellite of its plane, and
/// every inter-orbit period it moves to the same slot of an adjacent plane
/// if that brings it closer to the user it was placed for.
pub fn pch(problem: &Problem, demand: &NodeDemand, config: &OptimizerConfig) -> ContentPlacement {
    let o = problem.model.oracle;
    let origins = &problem.model.origins;
    let slots = demand.slots();
    let mut out = ContentPlacement {
        sets: vec![origins.clone(); slots],
        ..ContentPlacement::default()
    };
    let intra = period_slots(config.pch_intra_period_s, config.slot_seconds);
    let inter = period_slots(config.inter_period_s(), config.slot_seconds);

    // Satellite -> (orbit index, position); plane neighbours within a shell.
    let mut position: HashMap<NodeId, (usize, usize)> = HashMap::new();
    let mut plane_of: HashMap<(usize, usize), usize> = HashMap::new();
    let mut planes_in_shell: HashMap<usize, usize> = HashMap::new();
    for (k, orbit) in problem.orbits.iter().enumerate() {
        for (p, v) in orbit.nodes.iter().enumerate() {
            position.insert(*v, (k, p));
        }
        plane_of.insert((orbit.shell, orbit.plane), k);
        *planes_in_shell.entry(orbit.shell).or_default() += 1;
    }
    let satellites: Vec<NodeId> = problem
        .candidates
        .iter()
        .copied()
        .filter(|v| position.contains_key(v))
        .collect();
    let Some(t0) = (1..=slots).find(|&t| !demand.at(t).is_empty()) else {
        return out;
    };
    if satellites.is_empty() {
        out.notes.push("no candidate satellites; serving from origins".into());
        return out;
    }

    // Distance key: metric first, then the optional geometric proximity.
    let key = |t: usize, u: NodeId, s: NodeId| -> (f64, f64) {
        let prox = problem.proximity.as_ref().map_or(0.0, |p| p(t, u, s));
        (o.dist(t, u, s), prox)
    };
    let closer = |a: (f64, f64), b: (f64, f64)| a.0 < b.0 || (a.0 == b.0 && a.1 < b.1);

    // (satellite, user it follows)
    let mut replicas: Vec<(NodeId, NodeId)> = Vec::new();
    let mut users: Vec<NodeId> = demand.at(t0).iter().map(|e| e.0).collect();
    users.sort();
    for u in users {
        let mut best = satellites[0];
        let mut best_key = key(t0, u, best);
        for &s in &satellites[1..] {
            let k = key(t0, u, s);
            if closer(k, best_key) {
                best = s;
                best_key = k;
            }
        }
        if best_key.0.is_finite() && !replicas.iter().any(|r| r.0 == best) {
            replicas.push((best, u));
        }
    }

    for t in t0..=slots {
        let step = t - t0;
        if step > 0 && step % intra == 0 {
            for r in replicas.iter_mut() {
                let (k, p) = position[&r.0];
                let orbit = &problem.orbits[k];
                if !orbit.moving || orbit.nodes.len() < 2 {
                    continue;
                }
                let q = orbit.nodes.len();
                let next = orbit.nodes[(p + q - 1) % q];
                if problem.is_candidate(next) {
                    r.0 = next;
                    out.ops.evaluations += 1;
                }
            }
        }
        if step > 0 && step % inter == 0 {
            for r in replicas.iter_mut() {
                let (k, p) = position[&r.0];
                let orbit = &problem.orbits[k];
                let planes = planes_in_shell[&orbit.shell];
                if !orbit.moving || planes < 2 {
                    continue;
                }
                let mut best = r.0;
                let mut best_key = key(t, r.1, best);
                for plane in [(orbit.plane + planes - 1) % planes, (orbit.plane + 1) % planes] {
                    let Some(&nk) = plane_of.get(&(orbit.shell, plane)) else { continue };
                    let Some(&s) = problem.orbits[nk].nodes.get(p) else { continue };
                    if !problem.is_candidate(s) {
                        continue;
                    }
                    let kk = key(t, r.1, s);
                    if closer(kk, best_key) {
                        best = s;
                        best_key = kk;
                    }
                }
                r.0 = best;
                out.ops.evaluations += 1;
            }
        }
        let mut seen = Vec::new();
        replicas.retain(|r| {
            if seen.contains(&r.0) {
                false
            } else {
                seen.push(r.0);
                true
            }
        });
        let mut set = origins.clone();
        set.extend(replicas.iter().map(|r| r.0));
        set.sort();
        set.dedup();
        out.sets[t - 1] = set;
    }
    out.ops.iterations = 1;
    out
}
