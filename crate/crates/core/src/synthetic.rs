//! Self-contained placement instances with hand-built distance matrices,
//! for tests and benchmarks that do not need orbital geometry.
//!
//! Node 0 is the origin, nodes `1..=N` the candidates, then the users.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constellation::Metric;
use crate::costmodel::{CostModel, DistanceOracle, NodeDemand};
use crate::placement::{Orbit, Problem};
use crate::NodeId;

#[derive(Debug, Clone)]
pub struct Instance {
    pub oracle: DistanceOracle,
    pub origins: Vec<NodeId>,
    pub candidates: Vec<NodeId>,
    pub users: Vec<NodeId>,
    pub orbits: Vec<Orbit>,
    /// Storage price per MB and slot, by node id.
    pub storage_unit: Vec<f64>,
    pub alpha: f64,
    pub demand: NodeDemand,
    pub size_mb: f64,
}

impl Instance {
    pub fn model(&self) -> CostModel<'_> {
        CostModel::new(&self.oracle, self.alpha, self.storage_unit.clone(), self.origins.clone())
    }

    pub fn problem(&self) -> Problem<'_> {
        Problem::new(self.model(), self.candidates.clone(), self.orbits.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomSpec {
    pub candidates: usize,
    pub users: usize,
    pub slots: usize,
    /// Candidates per orbit group; candidates in a group drift together.
    pub per_orbit: usize,
    pub alpha: f64,
    /// Round distances, weights and prices up to integers so that costs are
    /// exact in floating point.
    pub integer: bool,
    pub seed: u64,
}

impl Default for RandomSpec {
    fn default() -> Self {
        Self {
            candidates: 8,
            users: 5,
            slots: 3,
            per_orbit: 4,
            alpha: 2.0,
            integer: true,
            seed: 0,
        }
    }
}

/// Points in a 100 x 100 square: a fixed origin in a corner, static users,
/// and candidates that drift with their orbit group every slot.
pub fn random_instance(spec: &RandomSpec) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.candidates;
    let per_orbit = spec.per_orbit.max(1);
    let total = 1 + n + spec.users;
    let round = |x: f64| if spec.integer { x.ceil() } else { x };

    let groups = n.div_ceil(per_orbit);
    let velocity: Vec<(f64, f64)> = (0..groups)
        .map(|_| (rng.random_range(-15.0..15.0), rng.random_range(-15.0..15.0)))
        .collect();
    let start: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.random_range(0.0..100.0), rng.random_range(0.0..100.0)))
        .collect();
    let users: Vec<(f64, f64)> = (0..spec.users)
        .map(|_| (rng.random_range(20.0..100.0), rng.random_range(20.0..100.0)))
        .collect();

    let mut matrices = Vec::with_capacity(spec.slots);
    for t in 0..spec.slots {
        let mut pos = vec![(0.0, 0.0)];
        for (i, s) in start.iter().enumerate() {
            let v = velocity[i / per_orbit];
            pos.push(((s.0 + v.0 * t as f64).rem_euclid(100.0), (s.1 + v.1 * t as f64).rem_euclid(100.0)));
        }
        pos.extend(users.iter().copied());
        let mut m = vec![0.0; total * total];
        for a in 0..total {
            for b in 0..total {
                if a != b {
                    let d = ((pos[a].0 - pos[b].0).powi(2) + (pos[a].1 - pos[b].1).powi(2)).sqrt();
                    m[a * total + b] = round(d).max(1.0);
                }
            }
        }
        matrices.push(m);
    }
    let nodes: Vec<NodeId> = (0..total as u32).map(NodeId).collect();
    let oracle = DistanceOracle::from_matrices(Metric::Hop, nodes.clone(), matrices);

    let candidates: Vec<NodeId> = nodes[1..=n].to_vec();
    let user_ids: Vec<NodeId> = nodes[n + 1..].to_vec();
    let mut storage_unit = vec![0.0; total];
    for v in &candidates {
        storage_unit[v.index()] = round(rng.random_range(1.0..40.0));
    }
    let orbits = candidates
        .chunks(per_orbit)
        .enumerate()
        .map(|(k, c)| Orbit {
            shell: 0,
            plane: k,
            nodes: c.to_vec(),
            moving: true,
        })
        .collect();
    let demand = NodeDemand {
        slots: (0..spec.slots)
            .map(|_| {
                let mut row = Vec::new();
                for &u in &user_ids {
                    if rng.random_bool(0.7) {
                        row.push((u, round(rng.random_range(0.5..6.0))));
                    }
                }
                row
            })
            .collect(),
    };
    Instance {
        oracle,
        origins: vec![NodeId(0)],
        candidates,
        users: user_ids,
        orbits,
        storage_unit,
        alpha: spec.alpha,
        demand,
        size_mb: 1.0,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TorusSpec {
    pub planes: usize,
    pub per_plane: usize,
    pub users: usize,
    pub slots: usize,
    pub alpha: f64,
    /// Satellite storage price; hop distances make `c_qmin = 1`.
    pub gamma: f64,
    pub seed: u64,
}

impl Default for TorusSpec {
    fn default() -> Self {
        Self {
            planes: 72,
            per_plane: 22,
            users: 50,
            slots: 4,
            alpha: 50.0,
            gamma: 10.0,
            seed: 0,
        }
    }
}

/// Hop distances of a +grid constellation: satellites on a `planes x
/// per_plane` torus, each user attached to the satellite overhead, the
/// origin reaching the constellation through one gateway hop. Satellites
/// advance one position per slot and the ground drifts a quarter plane.
pub fn torus_instance(spec: &TorusSpec) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (p, q) = (spec.planes, spec.per_plane);
    let n = p * q;
    let total = 1 + n + spec.users;
    let ring = |a: usize, b: usize, len: usize| {
        let d = a.abs_diff(b);
        d.min(len - d)
    };
    let hops = |a: usize, b: usize| (ring(a / q, b / q, p) + ring(a % q, b % q, q)) as f64;
    let ground: Vec<(f64, f64)> = (0..spec.users)
        .map(|_| (rng.random_range(0.0..p as f64), rng.random_range(0.0..q as f64)))
        .collect();
    let gateway = (rng.random_range(0.0..p as f64), rng.random_range(0.0..q as f64));
    let overhead = |g: (f64, f64), t: usize| -> usize {
        let plane = ((g.0 + 0.25 * t as f64).floor() as usize) % p;
        let slot = ((g.1 - t as f64).rem_euclid(q as f64).floor() as usize) % q;
        plane * q + slot
    };
    let mut matrices = Vec::with_capacity(spec.slots);
    for t in 0..spec.slots {
        // Attachment satellite and access hops for every node.
        let attach: Vec<(usize, f64)> = std::iter::once((overhead(gateway, t), 2.0))
            .chain((0..n).map(|s| (s, 0.0)))
            .chain(ground.iter().map(|g| (overhead(*g, t), 1.0)))
            .collect();
        let mut m = vec![0.0; total * total];
        for a in 0..total {
            for b in a + 1..total {
                let d = attach[a].1 + attach[b].1 + hops(attach[a].0, attach[b].0);
                m[a * total + b] = d;
                m[b * total + a] = d;
            }
        }
        matrices.push(m);
    }
    let nodes: Vec<NodeId> = (0..total as u32).map(NodeId).collect();
    let oracle = DistanceOracle::from_matrices(Metric::Hop, nodes.clone(), matrices);
    let candidates = nodes[1..=n].to_vec();
    let users = nodes[n + 1..].to_vec();
    let mut storage_unit = vec![spec.gamma; total];
    storage_unit[0] = 0.0;
    let orbits = (0..p)
        .map(|k| Orbit {
            shell: 0,
            plane: k,
            nodes: candidates[k * q..(k + 1) * q].to_vec(),
            moving: true,
        })
        .collect();
    let demand = NodeDemand {
        slots: (0..spec.slots)
            .map(|_| users.iter().map(|&u| (u, 1.0)).collect())
            .collect(),
    };
    Instance {
        oracle,
        origins: vec![NodeId(0)],
        candidates,
        users,
        orbits,
        storage_unit,
        alpha: spec.alpha,
        demand,
        size_mb: 1.0,
    }
}
