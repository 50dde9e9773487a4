use proptest::prelude::*;

use super::*;
use crate::constellation::{Edge, Metric};

fn edge(a: u32, b: u32, kind: LinkKind, ms: f64) -> Edge {
    Edge {
        a: NodeId(a.min(b)),
        b: NodeId(a.max(b)),
        kind,
        ideal_latency_ms: ms,
        sampled_latency_ms: None,
    }
}

// user 0 - sat 1 - sat 2 - sat 3 - origin 4, plus an isolated node 5.
fn line(slots: usize) -> Vec<SnapshotGraph> {
    let mut edges = vec![
        edge(0, 1, LinkKind::GroundSatellite, 2.0),
        edge(1, 2, LinkKind::InterSatellite, 5.0),
        edge(2, 3, LinkKind::InterSatellite, 5.0),
        edge(3, 4, LinkKind::GroundSatellite, 3.0),
    ];
    edges.sort_by_key(|e| (e.a, e.b));
    (1..=slots)
        .map(|t| SnapshotGraph {
            slot: t,
            time_s: (t - 1) as f64 * 60.0,
            node_count: 6,
            edges: edges.clone(),
            isolated_users: vec![],
        })
        .collect()
}

fn ids(v: &[u32]) -> Vec<NodeId> {
    v.iter().map(|&x| NodeId(x)).collect()
}

struct Fixture {
    snaps: Vec<SnapshotGraph>,
    oracle: DistanceOracle,
}

fn fixture(slots: usize) -> Fixture {
    let snaps = line(slots);
    let oracle = DistanceOracle::build(&snaps, &ids(&[0, 1, 2, 3, 4, 5]), Metric::Hop);
    Fixture { snaps, oracle }
}

fn run(fx: &Fixture, sets: Vec<Vec<NodeId>>, demand: Vec<f64>, size: f64, policy: PolicyKind, cap: Option<f64>) -> DeliveryReport {
    let schedule = ReplicaSchedule::from_sets(vec![sets]);
    let demand = vec![NodeDemand {
        slots: demand.iter().map(|&w| if w > 0.0 { vec![(NodeId(0), w)] } else { vec![] }).collect(),
    }];
    let policy = RoutingPolicy::new(policy);
    simulate_delivery(&DeliveryInput {
        snapshots: &fx.snaps,
        oracle: &fx.oracle,
        schedule: &schedule,
        demand: &demand,
        request_mb: &[size],
        origins: &ids(&[4]),
        policy: &policy,
        links: &LinkModel::default(),
        qoe: &QoeModel::default(),
        server_capacity_mbps: cap,
    })
}

#[test]
fn weighted_round_robin_splits_seven_requests_four_two_one() {
    let fx = fixture(1);
    let report = run(&fx, vec![ids(&[1, 2, 3, 4])], vec![7.0], 1.0, PolicyKind::WeightedRoundRobin, None);
    let load = &report.replica_load;
    assert_eq!(load.get(&NodeId(1)), Some(&4.0));
    assert_eq!(load.get(&NodeId(2)), Some(&2.0));
    assert_eq!(load.get(&NodeId(3)), Some(&1.0));
    assert_eq!(load.get(&NodeId(4)), None);
}

#[test]
fn weighted_round_robin_renormalises_over_available_replicas() {
    let policy = RoutingPolicy::new(PolicyKind::WeightedRoundRobin);
    let mut state = RouteState::default();
    let reps = ids(&[1, 2]);
    let mut counts = [0; 3];
    for _ in 0..6 {
        let r = route(&policy, &mut state, &reps, NodeId(4), |v| v.0 as f64);
        counts[r.node.index()] += 1;
    }
    assert_eq!(counts, [0, 4, 2]);
}

#[test]
fn round_robin_state_persists_across_slots() {
    let fx = fixture(2);
    let sets = vec![ids(&[1, 2, 3]), ids(&[1, 2, 3])];
    let report = run(&fx, sets, vec![2.0, 1.0], 1.0, PolicyKind::RoundRobin, None);
    for v in [1, 2, 3] {
        assert_eq!(report.replica_load.get(&NodeId(v)), Some(&1.0), "replica {v}");
    }
}

#[test]
fn closest_always_picks_nearest_with_id_tiebreak() {
    let policy = RoutingPolicy::new(PolicyKind::Closest);
    let mut state = RouteState::default();
    let r = route(&policy, &mut state, &ids(&[7, 3, 5]), NodeId(0), |v| if v.0 == 3 { 9.0 } else { 1.0 });
    assert_eq!(r.node, NodeId(5));
    assert_eq!(r.distance, 1.0);
}

#[test]
fn one_gigabyte_over_ten_gbps_takes_point_eight_seconds() {
    let path = PathInfo {
        propagation_ms: 0.0,
        links: vec![LinkKind::Terrestrial, LinkKind::InterSatellite],
    };
    let dt = chunk_download_time(Some(&path), 1000.0, &LinkModel::default());
    assert!((dt - 0.8).abs() < 1e-12, "{dt}");
    let ground = PathInfo {
        propagation_ms: 50.0,
        links: vec![LinkKind::Terrestrial],
    };
    let dt = chunk_download_time(Some(&ground), 1000.0, &LinkModel::default());
    assert!((dt - 0.45).abs() < 1e-12, "{dt}");
    assert!(chunk_download_time(None, 1.0, &LinkModel::default()).is_infinite());
}

#[test]
fn traffic_counts_every_traversed_link() {
    let fx = fixture(1);
    // Closest replica is node 2, two links away; 5 requests of 100 MB.
    let report = run(&fx, vec![ids(&[2, 4])], vec![5.0], 100.0, PolicyKind::Closest, None);
    assert_eq!(report.slots.len(), 1);
    assert_eq!(report.slots[0].requests, 5);
    assert!((report.total_traffic_gb() - 1.0).abs() < 1e-12);
    assert_eq!(report.replica_load.get(&NodeId(2)), Some(&5.0));
}

#[test]
fn origin_only_moves_more_traffic_than_nearby_replica() {
    let fx = fixture(3);
    let origin = run(&fx, vec![ids(&[4]); 3], vec![3.0, 2.0, 4.0], 50.0, PolicyKind::Closest, None);
    let near = run(&fx, vec![ids(&[1, 4]); 3], vec![3.0, 2.0, 4.0], 50.0, PolicyKind::Closest, None);
    assert!(origin.total_traffic_gb() > near.total_traffic_gb());
    assert!(origin.mean_qoe() <= near.mean_qoe());
}

#[test]
fn fractional_demand_becomes_whole_requests_with_split_weight() {
    let fx = fixture(1);
    let report = run(&fx, vec![ids(&[1, 4])], vec![2.5], 100.0, PolicyKind::Closest, None);
    assert_eq!(report.slots[0].requests, 3);
    assert!((report.replica_load[&NodeId(1)] - 2.5).abs() < 1e-12);
    assert!((report.total_traffic_gb() - 0.25).abs() < 1e-12);
}

#[test]
fn zero_demand_gives_empty_report() {
    let fx = fixture(2);
    let report = run(&fx, vec![ids(&[4]); 2], vec![0.0, 0.0], 1.0, PolicyKind::Closest, None);
    assert!(report.slots.is_empty());
    assert_eq!(report.total_traffic_gb(), 0.0);
    assert!(report.replica_load.is_empty());
}

#[test]
fn unreachable_replicas_score_zero() {
    let fx = fixture(1);
    let report = run(&fx, vec![ids(&[5])], vec![2.0], 1.0, PolicyKind::Closest, None);
    assert_eq!(report.slots[0].unreachable, 2);
    assert_eq!(report.slots[0].mean_qoe, 0.0);
    assert_eq!(report.total_traffic_gb(), 0.0);
}

#[test]
fn qoe_degrades_linearly_past_budget() {
    let q = QoeModel::default();
    assert_eq!(q.score(0.1), 10.0);
    assert_eq!(q.score(4.0), 10.0);
    assert!((q.score(6.0) - 5.0).abs() < 1e-12);
    assert_eq!(q.score(8.0), 0.0);
    assert_eq!(q.score(20.0), 0.0);
    assert_eq!(q.score(f64::INFINITY), 0.0);
}

#[test]
fn server_capacity_queues_requests() {
    let fx = fixture(1);
    // 400 MB at 800 Mbps is 4 s each; the second request waits for the first.
    let free = run(&fx, vec![ids(&[1, 4])], vec![2.0], 400.0, PolicyKind::Closest, None);
    let capped = run(&fx, vec![ids(&[1, 4])], vec![2.0], 400.0, PolicyKind::Closest, Some(800.0));
    assert_eq!(free.slots[0].mean_qoe, 10.0);
    // First finishes at 4.002 s (score ~9.998), second at 8.002 s (score 0).
    let q = capped.slots[0].mean_qoe;
    assert!(q > 4.9 && q < 5.0, "{q}");
}

#[test]
fn policy_validation() {
    let mut p = RoutingPolicy::new(PolicyKind::WeightedRoundRobin);
    assert!(p.validate().is_ok());
    p.weights = vec![0.5, 0.5];
    assert!(p.validate().is_err());
    p.weights = vec![0.2, 0.3, 0.5];
    assert!(p.validate().is_err());
    p.fanout = 0;
    assert!(p.validate().is_err());
    assert!(LinkModel { terrestrial_gbps: 0.0, satellite_gbps: 1.0 }.validate().is_err());
}

proptest! {
    #[test]
    fn weighted_counts_track_target_shares(n in 1usize..200, reps in 1usize..5) {
        let policy = RoutingPolicy::new(PolicyKind::WeightedRoundRobin);
        let mut state = RouteState::default();
        let nodes: Vec<NodeId> = (1..=reps as u32).map(NodeId).collect();
        let mut counts = vec![0usize; reps + 1];
        for _ in 0..n {
            let r = route(&policy, &mut state, &nodes, NodeId(0), |v| v.0 as f64);
            counts[r.node.index()] += 1;
        }
        let m = reps.min(3);
        let total: f64 = policy.weights[..m].iter().sum();
        for r in 0..m {
            let target = n as f64 * policy.weights[r] / total;
            prop_assert!((counts[r + 1] as f64 - target).abs() < 1.0 + 1e-9);
        }
        prop_assert_eq!(counts.iter().sum::<usize>(), n);
    }
}
