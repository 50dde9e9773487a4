//! Dynamic program over per-slot move sets.
//!
//! Each slot `t` has a base set `B_t` and a list of moves, each turning `B_t`
//! into a nearby set. The DP picks one move per slot minimising
//! `sum_t QC_t + SC_t + RC_t(prev, cur)`, where `RC_t` is measured against the
//! set chosen for `t - 1` (the origins before slot 1).
//!
//! Every relaxation is O(1): per-slot tables hold the best and second-best
//! distance from every involved node to `B_{t-1}`, and prefix/suffix sums of
//! the replication term per predecessor move.

use super::Problem;
use crate::costmodel::NodeDemand;
use crate::{par, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    Keep,
    Add(NodeId),
    /// Remove the base member at this position.
    Delete(usize),
    /// Replace the base member at this position.
    Swap(usize, NodeId),
}

impl Move {
    fn removed(self) -> Option<usize> {
        match self {
            Move::Delete(i) | Move::Swap(i, _) => Some(i),
            _ => None,
        }
    }

    fn added(self) -> Option<NodeId> {
        match self {
            Move::Add(a) | Move::Swap(_, a) => Some(a),
            _ => None,
        }
    }

    /// The set produced from `base` (sorted).
    pub fn apply(self, base: &[NodeId]) -> Vec<NodeId> {
        let mut out: Vec<NodeId> = base
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != self.removed())
            .map(|(_, v)| *v)
            .collect();
        if let Some(a) = self.added() {
            if let Err(pos) = out.binary_search(&a) {
                out.insert(pos, a);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotMoves {
    /// Sorted base set of the slot.
    pub base: Vec<NodeId>,
    pub moves: Vec<Move>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DpSolution {
    /// Chosen move index per slot.
    pub choice: Vec<usize>,
    pub sets: Vec<Vec<NodeId>>,
    pub cost: f64,
    /// Number of (move at t, move at t-1) pairs examined.
    pub relaxations: u64,
}

struct MinTwo {
    best1: f64,
    arg1: usize,
    best2: f64,
}

fn min_two(values: impl Iterator<Item = f64>) -> MinTwo {
    let mut m = MinTwo {
        best1: f64::INFINITY,
        arg1: usize::MAX,
        best2: f64::INFINITY,
    };
    for (i, d) in values.enumerate() {
        if d < m.best1 {
            m.best2 = m.best1;
            m.best1 = d;
            m.arg1 = i;
        } else if d < m.best2 {
            m.best2 = d;
        }
    }
    m
}

/// Query plus storage cost of every move at slot `t`.
fn local_costs(problem: &Problem, t: usize, slot: &SlotMoves, demand: &[(NodeId, f64)], size_mb: f64) -> Vec<f64> {
    let o = problem.model.oracle;
    let base = &slot.base;
    let base_local: Vec<usize> = base.iter().map(|v| o.local_index(*v).expect("base node in oracle")).collect();
    let users: Vec<(&[f32], f64, MinTwo)> = demand
        .iter()
        .map(|&(u, w)| {
            let row = o.row(t, u);
            let m = min_two(base_local.iter().map(|&j| row[j] as f64));
            (row, w, m)
        })
        .collect();
    let base_sc: f64 = base.iter().map(|v| size_mb * problem.model.storage_of(*v)).sum();
    par::map(&slot.moves, |mv| {
        let removed = mv.removed();
        let added = mv.added().map(|a| o.local_index(a).expect("candidate in oracle"));
        let mut qc = 0.0;
        for (row, w, m) in &users {
            let mut d = if removed == Some(m.arg1) { m.best2 } else { m.best1 };
            if let Some(a) = added {
                d = d.min(row[a] as f64);
            }
            qc += w * d;
        }
        let mut sc = base_sc;
        if let Some(i) = removed {
            sc -= size_mb * problem.model.storage_of(base[i]);
        }
        if let Some(a) = mv.added() {
            sc += size_mb * problem.model.storage_of(a);
        }
        qc + sc
    })
}

/// Solves the DP. `slots[t - 1]` describes slot `t`; `demand` should already
/// exclude users that can reach no relevant node.
pub fn solve(problem: &Problem, demand: &NodeDemand, size_mb: f64, slots: &[SlotMoves]) -> DpSolution {
    let o = problem.model.oracle;
    let alpha = problem.model.alpha;
    let origins = &problem.model.origins;

    // Predecessor layer: slot 0 holds the origins with a single state.
    let mut prev_base: Vec<NodeId> = origins.clone();
    let mut prev_moves: Vec<Move> = vec![Move::Keep];
    let mut prev_f: Vec<f64> = vec![0.0];
    let mut back: Vec<Vec<u32>> = Vec::with_capacity(slots.len());
    let mut relaxations = 0u64;

    for (i, slot) in slots.iter().enumerate() {
        let t = i + 1;
        let local = local_costs(problem, t, slot, demand.at(t), size_mb);
        let prev_local: Vec<usize> = prev_base.iter().map(|v| o.local_index(*v).expect("node in oracle")).collect();

        // Distance to the previous base for each node that may be in the new set.
        let nearest_prev = |x: NodeId| -> MinTwo {
            let row = o.row(t, x);
            min_two(prev_local.iter().map(|&j| row[j] as f64))
        };
        let members: Vec<(&[f32], MinTwo)> = slot.base.iter().map(|&x| (o.row(t, x), nearest_prev(x))).collect();
        let mut added_nodes: Vec<NodeId> = slot.moves.iter().filter_map(|m| m.added()).collect();
        added_nodes.sort();
        added_nodes.dedup();
        let added_info: Vec<(&[f32], MinTwo)> = added_nodes.iter().map(|&a| (o.row(t, a), nearest_prev(a))).collect();

        // Per predecessor move: removed position and local index of the added node.
        let prev_shape: Vec<(Option<usize>, Option<usize>)> = prev_moves
            .iter()
            .map(|m| (m.removed(), m.added().map(|a| o.local_index(a).expect("node in oracle"))))
            .collect();

        // Distance from a new-set node to the predecessor set produced by `shape`.
        let reach = |row: &[f32], m: &MinTwo, shape: (Option<usize>, Option<usize>)| -> f64 {
            let mut d = if shape.0 == Some(m.arg1) { m.best2 } else { m.best1 };
            if let Some(y) = shape.1 {
                d = d.min(row[y] as f64);
            }
            d
        };

        // prefix[y][j] = sum of the first j member terms, suffix[y][j] = sum from j on.
        let nb = members.len();
        let sums: Vec<(Vec<f64>, Vec<f64>)> = par::map(&prev_shape, |&shape| {
            let terms: Vec<f64> = members.iter().map(|(row, m)| reach(row, m, shape)).collect();
            let mut prefix = vec![0.0; nb + 1];
            let mut suffix = vec![0.0; nb + 1];
            for j in 0..nb {
                prefix[j + 1] = prefix[j] + terms[j];
            }
            for j in (0..nb).rev() {
                suffix[j] = suffix[j + 1] + terms[j];
            }
            (prefix, suffix)
        });

        let rows: Vec<(f64, u32)> = par::map_range(slot.moves.len(), |xi| {
            let mv = slot.moves[xi];
            let added = mv.added().map(|a| {
                let k = added_nodes.binary_search(&a).expect("indexed above");
                &added_info[k]
            });
            let mut best = f64::INFINITY;
            let mut arg = 0u32;
            for (yi, &shape) in prev_shape.iter().enumerate() {
                let (prefix, suffix) = &sums[yi];
                let mut rc = match mv.removed() {
                    Some(r) => prefix[r] + suffix[r + 1],
                    None => prefix[nb],
                };
                if let Some((row, m)) = added {
                    rc += reach(row, m, shape);
                }
                let cand = prev_f[yi] + alpha * rc;
                if cand < best {
                    best = cand;
                    arg = yi as u32;
                }
            }
            (local[xi] + best, arg)
        });
        relaxations += (slot.moves.len() * prev_moves.len()) as u64;

        prev_f = rows.iter().map(|r| r.0).collect();
        back.push(rows.iter().map(|r| r.1).collect());
        prev_base = slot.base.clone();
        prev_moves = slot.moves.clone();
    }

    if slots.is_empty() {
        return DpSolution {
            choice: vec![],
            sets: vec![],
            cost: 0.0,
            relaxations,
        };
    }
    let mut last = 0usize;
    for (i, f) in prev_f.iter().enumerate() {
        if *f < prev_f[last] {
            last = i;
        }
    }
    let cost = prev_f[last];
    let mut choice = vec![0usize; slots.len()];
    let mut cur = last;
    for t in (0..slots.len()).rev() {
        choice[t] = cur;
        cur = back[t][cur] as usize;
    }
    let sets = choice
        .iter()
        .zip(slots)
        .map(|(&c, s)| s.moves[c].apply(&s.base))
        .collect();
    DpSolution {
        choice,
        sets,
        cost,
        relaxations,
    }
}

/// MTLS neighbourhood of `base` at slot `t`: keep, every addition, every
/// non-origin deletion, and swaps of each non-origin member with its `k`
/// nearest candidates outside the set.
pub fn local_moves(problem: &Problem, t: usize, base: &[NodeId], k: usize) -> Vec<Move> {
    let o = problem.model.oracle;
    let origins = &problem.model.origins;
    let outside: Vec<NodeId> = problem
        .candidates
        .iter()
        .copied()
        .filter(|c| base.binary_search(c).is_err())
        .collect();
    let mut moves = vec![Move::Keep];
    moves.extend(outside.iter().map(|&a| Move::Add(a)));
    let removable: Vec<usize> = (0..base.len()).filter(|&i| !origins.contains(&base[i])).collect();
    moves.extend(removable.iter().map(|&i| Move::Delete(i)));
    for &i in &removable {
        let row = o.row(t, base[i]);
        let mut near: Vec<(f64, NodeId)> = outside
            .iter()
            .map(|&a| (row[o.local_index(a).expect("candidate in oracle")] as f64, a))
            .filter(|(d, _)| d.is_finite())
            .collect();
        near.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        near.truncate(k);
        near.sort_by_key(|x| x.1);
        moves.extend(near.into_iter().map(|(_, a)| Move::Swap(i, a)));
    }
    moves
}
