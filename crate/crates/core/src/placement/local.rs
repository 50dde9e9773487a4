use super::dp::{self, Move, SlotMoves};
use super::{ContentPlacement, OptimizerConfig, Problem};
use crate::costmodel::NodeDemand;
use crate::{par, NodeId};

/// Accepts `next` when it beats `current` by more than the tolerance.
fn improves(current: f64, next: f64, tolerance: f64) -> bool {
    if current.is_infinite() {
        return next < current;
    }
    next < current - tolerance * current.abs()
}

/// Multi-time local search: each iteration runs one DP over the MTLS
/// neighbourhoods (add, delete, k-nearest swap) of every slot.
pub fn mtls(problem: &Problem, demand: &NodeDemand, size_mb: f64, config: &OptimizerConfig) -> ContentPlacement {
    let slots = demand.slots();
    let model = &problem.model;
    let mut sets = vec![model.origins.clone(); slots];
    let mut cost = model.content_cost(&sets, demand, size_mb).total;
    let mut out = ContentPlacement {
        history: vec![cost],
        ..ContentPlacement::default()
    };
    if slots == 0 || problem.candidates.is_empty() {
        out.sets = sets;
        return out;
    }
    for _ in 0..config.max_iterations {
        let layers: Vec<SlotMoves> = par::map_range(slots, |i| SlotMoves {
            base: sets[i].clone(),
            moves: dp::local_moves(problem, i + 1, &sets[i], config.neighbor_limit),
        });
        let sol = dp::solve(problem, demand, size_mb, &layers);
        out.ops.iterations += 1;
        out.ops.relaxations += sol.relaxations;
        let next = model.content_cost(&sol.sets, demand, size_mb).total;
        if !improves(cost, next, config.relative_tolerance) {
            break;
        }
        sets = sol.sets;
        cost = next;
        out.history.push(cost);
    }
    out.sets = sets;
    out
}

/// Orbit-stage layers of MTOLS: one move per candidate group, adding the
/// group member with the lowest query cost (or keeping the set when that
/// member is already in it).
pub fn orbit_layers(problem: &Problem, demand: &NodeDemand, groups: &[Vec<NodeId>], sets: &[Vec<NodeId>]) -> Vec<SlotMoves> {
    let o = problem.model.oracle;
    let members: Vec<NodeId> = groups.iter().flatten().copied().collect();
    let local: Vec<usize> = members.iter().map(|v| o.local_index(*v).expect("candidate in oracle")).collect();
    par::map_range(sets.len(), |i| {
        let t = i + 1;
        let base = &sets[i];
        let base_local: Vec<usize> = base.iter().filter_map(|v| o.local_index(*v)).collect();
        // Query cost of the base plus each member, all groups at once.
        let mut qc = vec![0.0; members.len()];
        for &(u, w) in demand.at(t) {
            let row = o.row(t, u);
            let best = base_local.iter().map(|&j| row[j] as f64).fold(f64::INFINITY, f64::min);
            for (q, &j) in qc.iter_mut().zip(&local) {
                *q += w * best.min(row[j] as f64);
            }
        }
        let mut offset = 0;
        let moves = groups
            .iter()
            .map(|g| {
                let q = &qc[offset..offset + g.len()];
                offset += g.len();
                let mut best = 0;
                for k in 1..g.len() {
                    if q[k] < q[best] || (q[k] == q[best] && g[k] < g[best]) {
                        best = k;
                    }
                }
                let v = g[best];
                if base.binary_search(&v).is_ok() {
                    Move::Keep
                } else {
                    Move::Add(v)
                }
            })
            .collect();
        SlotMoves {
            base: base.clone(),
            moves,
        }
    })
}

/// Multi-time orbit-based local search. Each iteration first picks one
/// candidate group (an orbital plane, or one ground candidate) per slot by
/// a DP over the groups' best members, then runs a DP whose only moves are
/// keeping the set or adding one member of the chosen group.
pub fn mtols(problem: &Problem, demand: &NodeDemand, size_mb: f64, config: &OptimizerConfig) -> ContentPlacement {
    let slots = demand.slots();
    let model = &problem.model;
    let groups = problem.candidate_groups();
    let mut sets = vec![model.origins.clone(); slots];
    let mut cost = model.content_cost(&sets, demand, size_mb).total;
    let mut out = ContentPlacement {
        history: vec![cost],
        ..ContentPlacement::default()
    };
    if slots == 0 || groups.is_empty() {
        out.sets = sets;
        return out;
    }
    for _ in 0..config.max_iterations {
        let orbit_layers = orbit_layers(problem, demand, &groups, &sets);
        let orbit_sol = dp::solve(problem, demand, size_mb, &orbit_layers);
        out.ops.orbit_relaxations += orbit_sol.relaxations;

        let layers: Vec<SlotMoves> = (0..slots)
            .map(|i| {
                let base = &sets[i];
                let mut moves = vec![Move::Keep];
                let mut members: Vec<NodeId> = groups[orbit_sol.choice[i]]
                    .iter()
                    .copied()
                    .filter(|v| base.binary_search(v).is_err())
                    .collect();
                members.sort();
                moves.extend(members.into_iter().map(Move::Add));
                SlotMoves {
                    base: base.clone(),
                    moves,
                }
            })
            .collect();
        let sol = dp::solve(problem, demand, size_mb, &layers);
        out.ops.iterations += 1;
        out.ops.relaxations += sol.relaxations;
        let next = model.content_cost(&sol.sets, demand, size_mb).total;
        if !improves(cost, next, config.relative_tolerance) {
            break;
        }
        sets = sol.sets;
        cost = next;
        out.history.push(cost);
    }
    out.sets = sets;
    out
}
