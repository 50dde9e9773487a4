//! Satellite shells, ground sites and per-slot snapshot graphs.

mod geometry;
mod ground;
mod shell;
mod snapshot;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use geometry::{
    earth_rotation_angle, elevation_angle, geodetic_to_ecef, light_delay_ms, normalize_longitude, Vec3,
    EARTH_MU_KM3_S2, EARTH_RADIUS_KM, GEO_ALTITUDE_KM, LIGHT_KM_PER_MS, SIDEREAL_DAY_S,
};
pub(crate) use ground::csv_to_error;
pub use ground::{load_sites, save_sites, GroundKind, GroundNode};
pub use shell::{build_shell, kepler_period_s, Constellation, Satellite, SatelliteId, ShellSpec};
pub use snapshot::{Edge, LatencySampler, LinkKind, Metric, SnapshotGraph, MIN_LINK_LATENCY_MS};

use crate::{Error, NodeId, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Satellite(SatelliteId),
    Ground(GroundKind),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeInfo {
    pub name: String,
    pub kind: NodeKind,
}

impl NodeInfo {
    pub fn satellite(&self) -> Option<SatelliteId> {
        match self.kind {
            NodeKind::Satellite(s) => Some(s),
            NodeKind::Ground(_) => None,
        }
    }

    pub fn is_satellite(&self) -> bool {
        self.satellite().is_some()
    }

    pub fn ground_kind(&self) -> Option<GroundKind> {
        match self.kind {
            NodeKind::Ground(k) => Some(k),
            NodeKind::Satellite(_) => None,
        }
    }
}

/// How ground nodes attach to the network besides satellite visibility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkOptions {
    /// Terrestrial link between every origin and every gateway.
    pub terrestrial_backbone: bool,
    /// Whether origin sites also act as ground stations with satellite links.
    pub origin_uplink: bool,
}

impl Default for NetworkOptions {
    fn default() -> Self {
        Self {
            terrestrial_backbone: true,
            origin_uplink: false,
        }
    }
}

/// Satellites of every shell followed by the ground nodes, each with a
/// stable [`NodeId`].
#[derive(Debug, Clone)]
pub struct Network {
    shells: Vec<Constellation>,
    ground: Vec<GroundNode>,
    nodes: Vec<NodeInfo>,
    shell_offsets: Vec<usize>,
    options: NetworkOptions,
    by_name: HashMap<String, NodeId>,
}

impl Network {
    pub fn new(shells: &[ShellSpec], ground: Vec<GroundNode>, options: NetworkOptions) -> Result<Self> {
        let mut built = Vec::with_capacity(shells.len());
        let mut nodes = Vec::new();
        let mut shell_offsets = Vec::with_capacity(shells.len());
        for (k, spec) in shells.iter().enumerate() {
            let c = build_shell(spec, k as u32)?;
            shell_offsets.push(nodes.len());
            for sat in &c.satellites {
                nodes.push(NodeInfo {
                    name: format!("{}-{}-{}", spec.name, sat.id.orbit, sat.id.index),
                    kind: NodeKind::Satellite(sat.id),
                });
            }
            built.push(c);
        }
        for g in &ground {
            g.validate()?;
            nodes.push(NodeInfo {
                name: g.name.clone(),
                kind: NodeKind::Ground(g.kind),
            });
        }
        let mut by_name = HashMap::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            if by_name.insert(n.name.clone(), NodeId(i as u32)).is_some() {
                return Err(Error::InvalidGroundNode {
                    node: n.name.clone(),
                    reason: "duplicate node name".into(),
                });
            }
        }
        Ok(Self {
            shells: built,
            ground,
            nodes,
            shell_offsets,
            options,
            by_name,
        })
    }

    pub fn options(&self) -> NetworkOptions {
        self.options
    }

    pub fn shells(&self) -> &[Constellation] {
        &self.shells
    }

    pub fn ground(&self) -> &[GroundNode] {
        &self.ground
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, id: NodeId) -> &NodeInfo {
        &self.nodes[id.index()]
    }

    pub fn nodes(&self) -> &[NodeInfo] {
        &self.nodes
    }

    pub fn find(&self, name: &str) -> Option<NodeId> {
        self.by_name.get(name).copied()
    }

    pub fn satellite_count(&self) -> usize {
        self.shells.iter().map(Constellation::len).sum()
    }

    pub fn satellite_node(&self, sat: SatelliteId) -> NodeId {
        let c = &self.shells[sat.shell as usize];
        NodeId((self.shell_offsets[sat.shell as usize] + c.offset(sat.orbit, sat.index)) as u32)
    }

    fn ground_id(&self, i: usize) -> NodeId {
        NodeId((self.satellite_count() + i) as u32)
    }

    pub fn ground_of_kind(&self, kind: GroundKind) -> Vec<NodeId> {
        (0..self.ground.len())
            .filter(|&i| self.ground[i].kind == kind)
            .map(|i| self.ground_id(i))
            .collect()
    }

    pub fn users(&self) -> Vec<NodeId> {
        self.ground_of_kind(GroundKind::UserRegion)
    }

    pub fn gateways(&self) -> Vec<NodeId> {
        self.ground_of_kind(GroundKind::Gateway)
    }

    pub fn origins(&self) -> Vec<NodeId> {
        self.ground_of_kind(GroundKind::Origin)
    }

    pub fn satellites(&self) -> impl Iterator<Item = NodeId> {
        (0..self.satellite_count() as u32).map(NodeId)
    }

    /// Satellites grouped by `(shell, orbit)`, shell-major.
    pub fn orbits(&self) -> Vec<Vec<NodeId>> {
        let mut out = Vec::new();
        for c in &self.shells {
            for orbit in 0..c.spec.orbit_count {
                out.push(
                    (0..c.spec.sats_per_orbit)
                        .map(|index| {
                            self.satellite_node(SatelliteId {
                                shell: c.shell_index,
                                orbit,
                                index,
                            })
                        })
                        .collect(),
                );
            }
        }
        out
    }

    /// Inertial positions of all nodes at `t_seconds`.
    pub fn positions(&self, t_seconds: f64) -> Vec<Vec3> {
        let mut out = Vec::with_capacity(self.nodes.len());
        for c in &self.shells {
            out.extend(c.propagate(t_seconds));
        }
        let theta = earth_rotation_angle(t_seconds);
        out.extend(
            self.ground
                .iter()
                .map(|g| geodetic_to_ecef(g.latitude_deg, g.longitude_deg, EARTH_RADIUS_KM).rotate_z(theta)),
        );
        out
    }

    fn links_to_satellites(&self, kind: GroundKind) -> bool {
        match kind {
            GroundKind::UserRegion | GroundKind::Gateway => true,
            GroundKind::Origin => self.options.origin_uplink,
        }
    }

    /// Builds the graph of slot `slot` at `t_seconds`: +grid ISLs, ground to
    /// satellite links above each shell's elevation mask, and the terrestrial
    /// origin-gateway backbone. Ground-satellite links carry a latency sample
    /// drawn from `sampler` seeded by `(seed, slot)`.
    pub fn snapshot(&self, slot: usize, t_seconds: f64, sampler: &LatencySampler, seed: u64) -> SnapshotGraph {
        let pos = self.positions(t_seconds);
        let mut edges = Vec::new();
        let mut link = |a: usize, b: usize, kind: LinkKind| {
            let (a, b) = (a.min(b), a.max(b));
            edges.push(Edge {
                a: NodeId(a as u32),
                b: NodeId(b as u32),
                kind,
                ideal_latency_ms: light_delay_ms(pos[a], pos[b]).max(MIN_LINK_LATENCY_MS),
                sampled_latency_ms: None,
            });
        };

        for (k, c) in self.shells.iter().enumerate() {
            let off = self.shell_offsets[k];
            for (a, b) in c.isl_pairs() {
                link(off + a, off + b, LinkKind::InterSatellite);
            }
        }

        let sat_total = self.satellite_count();
        let mut isolated_users = Vec::new();
        for (gi, g) in self.ground.iter().enumerate() {
            let gid = sat_total + gi;
            if !self.links_to_satellites(g.kind) {
                continue;
            }
            let mut visible = 0usize;
            for (k, c) in self.shells.iter().enumerate() {
                let off = self.shell_offsets[k];
                for s in 0..c.len() {
                    let el = elevation_angle(pos[off + s], pos[gid]).expect("validated shells orbit above ground");
                    if el >= c.spec.min_elevation_deg {
                        link(gid, off + s, LinkKind::GroundSatellite);
                        visible += 1;
                    }
                }
            }
            if visible == 0 && g.kind == GroundKind::UserRegion {
                isolated_users.push(NodeId(gid as u32));
            }
        }

        if self.options.terrestrial_backbone {
            for (oi, o) in self.ground.iter().enumerate() {
                if o.kind != GroundKind::Origin {
                    continue;
                }
                for (gi, g) in self.ground.iter().enumerate() {
                    if g.kind == GroundKind::Gateway {
                        link(sat_total + oi, sat_total + gi, LinkKind::Terrestrial);
                    }
                }
            }
        }

        edges.sort_by_key(|e| (e.a, e.b));
        edges.dedup_by_key(|e| (e.a, e.b));
        let mut rng = LatencySampler::slot_rng(seed, slot);
        for e in edges.iter_mut().filter(|e| e.kind == LinkKind::GroundSatellite) {
            e.sampled_latency_ms = Some(sampler.draw(&mut rng));
        }
        if !isolated_users.is_empty() {
            log::warn!(
                "slot {slot}: {} user region(s) see no satellite: {}",
                isolated_users.len(),
                isolated_users
                    .iter()
                    .map(|id| self.node(*id).name.as_str())
                    .collect::<Vec<_>>()
                    .join(", ")
            );
        }
        SnapshotGraph {
            slot,
            time_s: t_seconds,
            node_count: self.nodes.len(),
            edges,
            isolated_users,
        }
    }
}

/// Standalone form of [`Network::snapshot`] for callers holding the parts.
pub fn snapshot(
    shells: &[ShellSpec],
    ground: &[GroundNode],
    options: NetworkOptions,
    slot: usize,
    t_seconds: f64,
) -> Result<SnapshotGraph> {
    let net = Network::new(shells, ground.to_vec(), options)?;
    Ok(net.snapshot(slot, t_seconds, &LatencySampler::default(), 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ground(name: &str, kind: GroundKind, lat: f64, lon: f64) -> GroundNode {
        GroundNode::new(name, kind, lat, lon).unwrap()
    }

    #[test]
    fn starlink_isl_degree_is_exactly_four() {
        let net = Network::new(&[ShellSpec::starlink_phase1()], vec![], NetworkOptions::default()).unwrap();
        let g = net.snapshot(1, 0.0, &LatencySampler::default(), 1);
        assert_eq!(g.edges.len(), 2 * 1584);
        for s in [0u32, 17, 800, 1583] {
            assert_eq!(g.degree(NodeId(s), Some(LinkKind::InterSatellite)), 4);
        }
    }

    #[test]
    fn single_geo_satellite_with_one_ground_node() {
        let shell = ShellSpec::geostationary("geo", vec![-100.0]);
        let net = Network::new(
            &[shell],
            vec![ground("user", GroundKind::UserRegion, 35.0, -95.0)],
            NetworkOptions::default(),
        )
        .unwrap();
        let g = net.snapshot(1, 1234.0, &LatencySampler::default(), 0);
        assert_eq!(g.edges.len(), 1);
        assert_eq!(g.edges[0].kind, LinkKind::GroundSatellite);
        assert!(g.edges[0].sampled_latency_ms.is_some());
        assert!(g.isolated_users.is_empty());
    }

    #[test]
    fn toy_shell_visibility_matches_pairwise_check() {
        let mut spec = ShellSpec::walker("toy", 2, 2, 550.0, 53.0);
        spec.min_elevation_deg = 10.0;
        let sites = vec![
            ground("u1", GroundKind::UserRegion, 0.0, 0.0),
            ground("u2", GroundKind::UserRegion, 40.0, 90.0),
            ground("gw", GroundKind::Gateway, -30.0, 170.0),
            ground("o", GroundKind::Origin, 10.0, 10.0),
        ];
        let net = Network::new(&[spec], sites, NetworkOptions::default()).unwrap();
        for step in 0..40 {
            let t = step as f64 * 150.0;
            let g = net.snapshot(step + 1, t, &LatencySampler::default(), 0);
            let pos = net.positions(t);
            let mut expected = Vec::new();
            for gi in 4..7usize {
                for s in 0..4usize {
                    let d = pos[s] - pos[gi];
                    let up = pos[gi] * (1.0 / pos[gi].norm());
                    let el = (d.dot(up) / d.norm()).asin().to_degrees();
                    if el >= 10.0 {
                        expected.push((s, gi));
                    }
                }
            }
            // Origin (index 7) has no uplink by default; it links to the gateway.
            expected.push((6, 7));
            let mut got: Vec<(usize, usize)> = g
                .edges
                .iter()
                .filter(|e| e.kind != LinkKind::InterSatellite)
                .map(|e| (e.a.index(), e.b.index()))
                .collect();
            expected.sort_unstable();
            got.sort_unstable();
            assert_eq!(got, expected, "t={t}");
            // 2x2 grid: each ring pair collapses to a single link.
            assert_eq!(g.edges.iter().filter(|e| e.kind == LinkKind::InterSatellite).count(), 4);
        }
    }

    #[test]
    fn snapshots_are_deterministic_and_isl_static() {
        let sites = vec![
            ground("u", GroundKind::UserRegion, 30.0, -97.0),
            ground("gw", GroundKind::Gateway, 40.0, -100.0),
            ground("o", GroundKind::Origin, 39.0, -77.0),
        ];
        let net = Network::new(&[ShellSpec::starlink_phase1()], sites, NetworkOptions::default()).unwrap();
        let a = net.snapshot(3, 600.0, &LatencySampler::default(), 9);
        let b = net.snapshot(3, 600.0, &LatencySampler::default(), 9);
        assert_eq!(a, b);
        let c = net.snapshot(4, 900.0, &LatencySampler::default(), 9);
        let isl = |g: &SnapshotGraph| -> Vec<(NodeId, NodeId)> {
            g.edges
                .iter()
                .filter(|e| e.kind == LinkKind::InterSatellite)
                .map(|e| (e.a, e.b))
                .collect()
        };
        assert_eq!(isl(&a), isl(&c));
        for e in &a.edges {
            assert!(e.ideal_latency_ms > 0.0);
            assert_eq!(e.weight(Metric::Hop), 1.0);
            assert!(e.weight(Metric::SampledLatency) > 0.0);
        }
    }

    #[test]
    fn isolated_users_are_reported() {
        let shell = ShellSpec::geostationary("geo", vec![-100.0]);
        let net = Network::new(
            &[shell],
            vec![ground("far", GroundKind::UserRegion, 0.0, 80.0)],
            NetworkOptions::default(),
        )
        .unwrap();
        let g = net.snapshot(1, 0.0, &LatencySampler::default(), 0);
        assert!(g.edges.is_empty());
        assert_eq!(g.isolated_users, vec![NodeId(1)]);
    }

    #[test]
    fn duplicate_names_rejected() {
        let sites = vec![
            ground("a", GroundKind::UserRegion, 0.0, 0.0),
            ground("a", GroundKind::Gateway, 1.0, 1.0),
        ];
        assert!(Network::new(&[], sites, NetworkOptions::default()).is_err());
    }
}
