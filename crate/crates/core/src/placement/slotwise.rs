//! Baselines that solve each slot on its own as a facility-location
//! instance: opening a candidate costs its storage plus `alpha` times its
//! distance to the previous slot's set; clients are the demanding users.

use super::{ContentPlacement, Problem};
use crate::costmodel::NodeDemand;
use crate::NodeId;

const REL_EPS: f64 = 1e-12;

/// The facility-location view of one slot.
pub struct SlotCost<'p> {
    problem: &'p Problem<'p>,
    users: Vec<(&'p [f32], f64)>,
    cand_local: Vec<usize>,
    /// Opening cost per candidate, in `problem.candidates` order.
    opening: Vec<f64>,
    origin_local: Vec<usize>,
}

impl<'p> SlotCost<'p> {
    pub fn new(problem: &'p Problem<'p>, t: usize, demand: &[(NodeId, f64)], size_mb: f64, prev: &[NodeId]) -> Self {
        let o = problem.model.oracle;
        let users = demand.iter().map(|&(u, w)| (o.row(t, u), w)).collect();
        let cand_local: Vec<usize> = problem
            .candidates
            .iter()
            .map(|v| o.local_index(*v).expect("candidate in oracle"))
            .collect();
        let prev_local: Vec<usize> = prev.iter().map(|v| o.local_index(*v).expect("node in oracle")).collect();
        let opening = problem
            .candidates
            .iter()
            .map(|&a| {
                let row = o.row(t, a);
                let copy = if prev.contains(&a) {
                    0.0
                } else {
                    problem.model.alpha * prev_local.iter().map(|&j| row[j] as f64).fold(f64::INFINITY, f64::min)
                };
                size_mb * problem.model.storage_of(a) + copy
            })
            .collect();
        let origin_local = problem
            .model
            .origins
            .iter()
            .map(|v| o.local_index(*v).expect("origin in oracle"))
            .collect();
        Self {
            problem,
            users,
            cand_local,
            opening,
            origin_local,
        }
    }

    fn candidate_pos(&self, v: NodeId) -> Option<usize> {
        self.problem.candidates.binary_search(&v).ok()
    }

    /// Query, storage and replication cost of `set` (origins implied).
    pub fn cost(&self, set: &[NodeId]) -> f64 {
        let picked: Vec<usize> = set.iter().filter_map(|v| self.candidate_pos(*v)).collect();
        self.cost_of(&picked)
    }

    fn cost_of(&self, picked: &[usize]) -> f64 {
        let open: f64 = picked.iter().map(|&i| self.opening[i]).sum();
        let qc: f64 = self
            .users
            .iter()
            .map(|(row, w)| {
                let d = self
                    .origin_local
                    .iter()
                    .chain(picked.iter().map(|&i| &self.cand_local[i]))
                    .map(|&j| row[j] as f64)
                    .fold(f64::INFINITY, f64::min);
                w * d
            })
            .sum();
        qc + open
    }

    fn origin_distance(&self) -> Vec<f64> {
        self.users
            .iter()
            .map(|(row, _)| self.origin_local.iter().map(|&j| row[j] as f64).fold(f64::INFINITY, f64::min))
            .collect()
    }

    fn to_set(&self, picked: &[usize]) -> Vec<NodeId> {
        let mut set = self.problem.model.origins.clone();
        set.extend(picked.iter().map(|&i| self.problem.candidates[i]));
        set.sort();
        set.dedup();
        set
    }
}

/// Cost of `set` at slot `t` given the previous slot's set.
pub fn slot_cost(
    problem: &Problem,
    t: usize,
    demand: &[(NodeId, f64)],
    size_mb: f64,
    prev: &[NodeId],
    set: &[NodeId],
) -> f64 {
    SlotCost::new(problem, t, demand, size_mb, prev).cost(set)
}

fn better(new: f64, old: f64) -> bool {
    if old.is_infinite() {
        new < old
    } else {
        new < old - REL_EPS * old.abs()
    }
}

fn per_slot(
    problem: &Problem,
    demand: &NodeDemand,
    size_mb: f64,
    mut solve: impl FnMut(&SlotCost) -> (Vec<usize>, u64),
) -> ContentPlacement {
    let mut out = ContentPlacement::default();
    let mut prev = problem.model.origins.clone();
    for t in 1..=demand.slots() {
        let sc = SlotCost::new(problem, t, demand.at(t), size_mb, &prev);
        let (picked, evals) = solve(&sc);
        out.ops.evaluations += evals;
        let set = sc.to_set(&picked);
        out.sets.push(set.clone());
        prev = set;
    }
    out.ops.iterations = demand.slots() as u64;
    out
}

/// Adds the single best candidate while that lowers the slot cost.
pub fn naive_greedy(problem: &Problem, demand: &NodeDemand, size_mb: f64) -> ContentPlacement {
    per_slot(problem, demand, size_mb, |sc| {
        let mut best_d = sc.origin_distance();
        let mut picked: Vec<usize> = Vec::new();
        let mut chosen = vec![false; sc.opening.len()];
        let mut open_sum = 0.0;
        let mut cost: f64 = sc.users.iter().zip(&best_d).map(|((_, w), d)| w * d).sum();
        let mut evals = 0u64;
        loop {
            let mut best: Option<(f64, usize)> = None;
            for (a, &j) in sc.cand_local.iter().enumerate() {
                if chosen[a] {
                    continue;
                }
                evals += 1;
                let qc: f64 = sc
                    .users
                    .iter()
                    .zip(&best_d)
                    .map(|((row, w), d)| w * d.min(row[j] as f64))
                    .sum();
                let c = qc + open_sum + sc.opening[a];
                if best.is_none_or(|(b, _)| c < b) {
                    best = Some((c, a));
                }
            }
            match best {
                Some((c, a)) if better(c, cost) => {
                    chosen[a] = true;
                    picked.push(a);
                    open_sum += sc.opening[a];
                    cost = c;
                    for ((row, _), d) in sc.users.iter().zip(best_d.iter_mut()) {
                        *d = d.min(row[sc.cand_local[a]] as f64);
                    }
                }
                _ => break,
            }
        }
        (picked, evals)
    })
}

/// Jain-Mahdian-Saberi greedy: repeatedly opens the facility whose star
/// (facility plus nearest unassigned clients) has the lowest cost per unit
/// of newly served demand, net of savings for already assigned clients.
/// Origins are facilities with zero opening cost.
pub fn jms_greedy(problem: &Problem, demand: &NodeDemand, size_mb: f64) -> ContentPlacement {
    per_slot(problem, demand, size_mb, |sc| {
        let n_origin = sc.origin_local.len();
        // Facilities: origins first, then candidates.
        let fac_local: Vec<usize> = sc.origin_local.iter().chain(&sc.cand_local).copied().collect();
        let mut fee: Vec<f64> = std::iter::repeat_n(0.0, n_origin).chain(sc.opening.iter().copied()).collect();
        let nf = fac_local.len();
        let nc = sc.users.len();
        let dist = |f: usize, j: usize| sc.users[j].0[fac_local[f]] as f64;
        // Clients of each facility sorted by distance, then index.
        let order: Vec<Vec<usize>> = (0..nf)
            .map(|f| {
                let mut v: Vec<usize> = (0..nc).filter(|&j| dist(f, j).is_finite()).collect();
                v.sort_by(|&a, &b| dist(f, a).total_cmp(&dist(f, b)).then(a.cmp(&b)));
                v
            })
            .collect();
        let mut assigned: Vec<Option<(usize, f64)>> = vec![None; nc];
        let mut opened = vec![false; nf];
        let mut evals = 0u64;
        let mut remaining = nc;

        let open = |f: usize, assigned: &mut Vec<Option<(usize, f64)>>, opened: &mut Vec<bool>, fee: &mut Vec<f64>| {
            opened[f] = true;
            fee[f] = 0.0;
            for (j, a) in assigned.iter_mut().enumerate() {
                if let Some((_, c)) = a {
                    let d = dist(f, j);
                    if d < *c {
                        *a = Some((f, d));
                    }
                }
            }
        };

        while remaining > 0 {
            let mut best: Option<(f64, usize, usize)> = None;
            let mut free_open: Option<usize> = None;
            for f in 0..nf {
                evals += 1;
                let savings: f64 = assigned
                    .iter()
                    .enumerate()
                    .filter_map(|(j, a)| a.map(|(_, c)| sc.users[j].1 * (c - dist(f, j)).max(0.0)))
                    .sum();
                if !opened[f] && savings > 0.0 && savings >= fee[f] {
                    free_open = Some(f);
                    break;
                }
                let base = fee[f] - savings;
                let (mut w_sum, mut c_sum, mut k) = (0.0, 0.0, 0usize);
                for &j in &order[f] {
                    if assigned[j].is_some() {
                        continue;
                    }
                    let w = sc.users[j].1;
                    w_sum += w;
                    c_sum += w * dist(f, j);
                    k += 1;
                    let ratio = (base + c_sum) / w_sum;
                    if best.is_none_or(|(r, _, _)| ratio < r) {
                        best = Some((ratio, f, k));
                    }
                }
            }
            if let Some(f) = free_open {
                open(f, &mut assigned, &mut opened, &mut fee);
                continue;
            }
            let Some((_, f, k)) = best else { break };
            open(f, &mut assigned, &mut opened, &mut fee);
            let take: Vec<usize> = order[f].iter().copied().filter(|&j| assigned[j].is_none()).take(k).collect();
            for j in take {
                assigned[j] = Some((f, dist(f, j)));
                remaining -= 1;
            }
        }
        let mut used = vec![false; nf];
        for (f, _) in assigned.iter().flatten() {
            used[*f] = true;
        }
        let picked: Vec<usize> = (n_origin..nf).filter(|&f| used[f]).map(|f| f - n_origin).collect();
        (picked, evals)
    })
}

/// Best-improvement add / delete / swap search per slot, from the origins.
pub fn local_search(problem: &Problem, demand: &NodeDemand, size_mb: f64) -> ContentPlacement {
    per_slot(problem, demand, size_mb, |sc| {
        let n = sc.cand_local.len();
        let mut chosen = vec![false; n];
        let mut picked: Vec<usize> = Vec::new();
        let origin_d = sc.origin_distance();
        let mut cost = sc.cost_of(&picked);
        let mut evals = 0u64;
        loop {
            // Best and second-best distance per user over origins and picked.
            let tops: Vec<(f64, usize, f64)> = sc
                .users
                .iter()
                .zip(&origin_d)
                .map(|((row, _), &od)| {
                    let (mut b1, mut a1, mut b2) = (od, usize::MAX, f64::INFINITY);
                    for (p, &i) in picked.iter().enumerate() {
                        let d = row[sc.cand_local[i]] as f64;
                        if d < b1 {
                            b2 = b1;
                            b1 = d;
                            a1 = p;
                        } else if d < b2 {
                            b2 = d;
                        }
                    }
                    (b1, a1, b2)
                })
                .collect();
            let open_sum: f64 = picked.iter().map(|&i| sc.opening[i]).sum();
            let eval = |removed: Option<usize>, added: Option<usize>| -> f64 {
                let mut total = open_sum;
                if let Some(p) = removed {
                    total -= sc.opening[picked[p]];
                }
                if let Some(a) = added {
                    total += sc.opening[a];
                }
                for ((row, w), &(b1, a1, b2)) in sc.users.iter().zip(&tops) {
                    let mut d = if removed == Some(a1) { b2 } else { b1 };
                    if let Some(a) = added {
                        d = d.min(row[sc.cand_local[a]] as f64);
                    }
                    total += w * d;
                }
                total
            };
            let mut best: Option<(f64, Option<usize>, Option<usize>)> = None;
            let mut consider = |c: f64, r: Option<usize>, a: Option<usize>| {
                if best.is_none_or(|(b, _, _)| c < b) {
                    best = Some((c, r, a));
                }
            };
            for a in (0..n).filter(|&a| !chosen[a]) {
                evals += 1;
                consider(eval(None, Some(a)), None, Some(a));
            }
            for p in 0..picked.len() {
                evals += 1;
                consider(eval(Some(p), None), Some(p), None);
            }
            for p in 0..picked.len() {
                for a in (0..n).filter(|&a| !chosen[a]) {
                    evals += 1;
                    consider(eval(Some(p), Some(a)), Some(p), Some(a));
                }
            }
            match best {
                Some((c, r, a)) if better(c, cost) => {
                    if let Some(p) = r {
                        chosen[picked[p]] = false;
                        picked.remove(p);
                    }
                    if let Some(a) = a {
                        chosen[a] = true;
                        picked.push(a);
                    }
                    cost = c;
                }
                _ => break,
            }
        }
        (picked, evals)
    })
}
