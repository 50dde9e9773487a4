use std::fs;

use super::*;

const SMALL: &str = r#"{
    "name": "small",
    "seed": 3,
    "slots": 4,
    "shells": [
        {"name": "leo", "orbit_count": 8, "sats_per_orbit": 8, "altitude_km": 1200.0,
         "inclination_deg": 53.0, "min_elevation_deg": 10.0}
    ],
    "ground": {
        "gateways": {"random": {"count": 3,
                     "bbox": {"lat_min": 30.0, "lat_max": 40.0, "lon_min": -100.0, "lon_max": -90.0}}},
        "origins": [{"name": "origin", "lat_deg": 47.6, "lon_deg": -122.3}]
    },
    "demand": {"grid": {"rows": 2, "cols": 2, "per_slot_demand": 5.0, "contents": 2, "size_mb": 1.0,
               "bbox": {"lat_min": 30.0, "lat_max": 40.0, "lon_min": -100.0, "lon_max": -90.0}}},
    "costs": {"alpha": 5.0},
    "algorithms": ["no_replica", "naive_greedy", "mtls", "mtols"],
    "delivery": {"policies": [{"kind": "closest"}, {"kind": "weighted_round_robin"}]}
}"#;

fn small() -> ScenarioConfig {
    ScenarioConfig::from_json(SMALL).unwrap()
}

fn read_all(dir: &Path) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|x| x == "csv") {
                out.insert(p.strip_prefix(dir).unwrap().display().to_string(), fs::read_to_string(&p).unwrap());
            }
        }
    }
    out
}

#[test]
fn minimal_geo_no_replica_has_zero_replication_and_storage() {
    let cfg = ScenarioConfig::from_json(
        r#"{
        "slots": 1,
        "shells": [{"name": "geo", "orbit_count": 1, "sats_per_orbit": 1, "altitude_km": 35786.0,
                    "fixed_longitudes_deg": [-100.0], "isl": false}],
        "ground": {"origins": [{"name": "o", "lat_deg": 40.0, "lon_deg": -100.0}],
                   "network": {"origin_uplink": true}},
        "demand": {"grid": {"rows": 1, "cols": 1, "per_slot_demand": 2.0,
                   "bbox": {"lat_min": 30.0, "lat_max": 32.0, "lon_min": -101.0, "lon_max": -99.0}}},
        "algorithms": ["no_replica"]
    }"#,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let summary = Scenario::build(cfg).unwrap().run(dir.path()).unwrap();
    let costs = fs::read_to_string(dir.path().join("no_replica/costs.csv")).unwrap();
    let rows: Vec<&str> = costs.lines().collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0], "algorithm,content,metric,query,replication,storage,total");
    let fields: Vec<&str> = rows[1].split(',').collect();
    assert_eq!(fields[4], "0");
    assert_eq!(fields[5], "0");
    // user -> geo -> origin: 2 hops, demand 2.
    assert_eq!(fields[3], "4");
    assert_eq!(summary.rows[0].total, 4.0);
}

#[test]
fn config_errors_name_the_field() {
    let bad = SMALL.replace("\"alpha\": 5.0", "\"alpah\": 5.0");
    match ScenarioConfig::from_json(&bad) {
        Err(Error::Config { path, reason }) => {
            assert!(path.starts_with("costs"), "{path}");
            assert!(reason.contains("alpah"), "{reason}");
        }
        other => panic!("expected config error, got {other:?}"),
    }
    let bad = SMALL.replace("\"per_slot_demand\": 5.0", "\"per_slot_demand\": \"x\"");
    match ScenarioConfig::from_json(&bad) {
        Err(Error::Config { path, .. }) => assert_eq!(path, "demand.grid.per_slot_demand"),
        other => panic!("expected config error, got {other:?}"),
    }
    let bad = SMALL.replace("\"altitude_km\": 1200.0", "\"altitude_km\": \"high\"");
    match ScenarioConfig::from_json(&bad) {
        Err(Error::Config { path, .. }) => assert_eq!(path, "shells[0].altitude_km"),
        other => panic!("expected config error, got {other:?}"),
    }
    let bad = SMALL.replace("\"costs\"", "\"shells\": [\"iridium\"], \"x\"");
    assert!(ScenarioConfig::from_json(&bad).is_err());
    let mut cfg = small();
    cfg.ground.origins.clear();
    assert!(matches!(cfg.validate(), Err(Error::Config { path, .. }) if path == "ground.origins"));
    let mut cfg = small();
    cfg.slots = None;
    assert!(matches!(cfg.validate(), Err(Error::Config { path, .. }) if path == "slots"));
    let mut cfg = small();
    cfg.costs.alpha = 0.5;
    assert!(cfg.validate().is_err());
}

#[test]
fn missing_input_file_is_rejected() {
    let mut cfg = small();
    cfg.ground.gateways = GatewaySource::File {
        path: "/nonexistent/gateways.csv".into(),
    };
    assert!(matches!(cfg.validate(), Err(Error::Config { reason, .. }) if reason.contains("does not exist")));
}

#[test]
fn same_seed_gives_identical_csvs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    Scenario::build(small()).unwrap().run(a.path()).unwrap();
    Scenario::build(small()).unwrap().run(b.path()).unwrap();
    let (fa, fb) = (read_all(a.path()), read_all(b.path()));
    assert!(fa.len() >= 20, "{:?}", fa.keys());
    assert_eq!(fa, fb);
    assert_eq!(
        fs::read_to_string(a.path().join("metadata.json")).unwrap(),
        fs::read_to_string(b.path().join("metadata.json")).unwrap()
    );
}

#[test]
fn bundle_layout_and_delivery_tables() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = Scenario::build(small()).unwrap();
    let summary = scenario.run(dir.path()).unwrap();
    for alg in ["no_replica", "naive_greedy", "mtls", "mtols"] {
        for f in ["costs", "schedule", "ops", "shell_usage", "delivery", "replica_load"] {
            assert!(dir.path().join(alg).join(format!("{f}.csv")).exists(), "{alg}/{f}");
        }
    }
    assert!(dir.path().join("timing.json").exists());
    let delivery = fs::read_to_string(dir.path().join("mtls/delivery.csv")).unwrap();
    assert!(delivery.starts_with("slot,policy,mean_qoe,traffic_gb"));
    assert!(delivery.contains(",closest,") && delivery.contains(",weighted_round_robin,"));
    let mtls = summary.get(Algorithm::Mtls).unwrap();
    let none = summary.get(Algorithm::NoReplica).unwrap();
    assert_eq!(mtls.status, "ok");
    assert!(mtls.total <= none.total + 1e-9);
}

#[test]
fn candidate_restriction() {
    let mut cfg = small();
    cfg.candidates = CandidateMode::SatellitesOnly;
    let s = Scenario::build(cfg).unwrap();
    let gateways = s.network.gateways();
    for alg in [Algorithm::NaiveGreedy, Algorithm::Mtls] {
        let run = s.run_algorithm(alg);
        for c in 0..run.schedule.contents() {
            for set in run.schedule.content(c) {
                assert!(set.iter().all(|v| !gateways.contains(v)));
            }
        }
    }

    let mut cfg = small();
    cfg.candidates = CandidateMode::GatewaysOnly;
    cfg.ground.gateways = GatewaySource::None;
    let s = Scenario::build(cfg).unwrap();
    let none = s.run_algorithm(Algorithm::NoReplica).total().total;
    assert_eq!(s.run_algorithm(Algorithm::Mtls).total().total, none);
    assert!(s.notes.iter().any(|n| n.contains("no replica candidates")));
}

#[test]
fn both_candidates_no_worse_than_gateways_only() {
    let mut both = small();
    both.costs.gamma = 1.0;
    let mut gw = both.clone();
    gw.candidates = CandidateMode::GatewaysOnly;
    let a = Scenario::build(both).unwrap().run_algorithm(Algorithm::Mtls).total().total;
    let b = Scenario::build(gw).unwrap().run_algorithm(Algorithm::Mtls).total().total;
    assert!(a <= b + 1e-9, "{a} vs {b}");
}

#[test]
fn resolved_config_round_trips() {
    let cfg = small();
    let text = serde_json::to_string(&cfg).unwrap();
    let again = ScenarioConfig::from_json(&text).unwrap();
    assert_eq!(cfg, again);
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    Scenario::build(cfg).unwrap().run(a.path()).unwrap();
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.path().join("metadata.json")).unwrap()).unwrap();
    let resolved = ScenarioConfig::from_json(&meta["config"].to_string()).unwrap();
    assert_eq!(resolved.optimizer.max_iterations, 50);
    Scenario::build(resolved).unwrap().run(b.path()).unwrap();
    assert_eq!(read_all(a.path()), read_all(b.path()));
}

#[test]
fn shell_usage_reports_each_shell_and_ground() {
    let mut cfg = small();
    cfg.shells.push(ShellEntry::Preset(ShellPreset::O3b));
    cfg.costs.shell_gamma = vec![None, Some(2.0)];
    let s = Scenario::build(cfg).unwrap();
    let run = s.run_algorithm(Algorithm::Mtls);
    let usage = s.shell_usage(&run.schedule);
    let names: Vec<&str> = usage.iter().map(|u| u.group.as_str()).collect();
    assert_eq!(names, ["leo", "o3b", "ground"]);
    for u in &usage {
        assert!((0.0..=1.0).contains(&u.time_ratio));
    }
}

#[test]
fn moving_average_prediction_feeds_optimisers_only() {
    let mut cfg = small();
    cfg.prediction = Prediction::MovingAverage { window_slots: 2 };
    let s = Scenario::build(cfg).unwrap();
    // Slot 1 has no history, so the prediction starts at zero.
    assert_eq!(s.predicted.slot_total(1), 0.0);
    assert_eq!(s.predicted.slot_total(2), s.demand.slot_total(1));
    let run = s.run_algorithm(Algorithm::NoReplica);
    let truth = Scenario::build(small()).unwrap().run_algorithm(Algorithm::NoReplica);
    assert_eq!(run.total(), truth.total());
}

#[test]
fn generated_demand_reloads_as_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small();
    let paths = generate_demand(&cfg, dir.path()).unwrap();
    assert_eq!(paths.len(), 3);
    let mut traced = cfg.clone();
    traced.demand = DemandSource::Trace {
        trace: paths[2].clone(),
        users: paths[0].clone(),
        catalog: Some(paths[1].clone()),
        top_k: 0,
        window: None,
    };
    traced.validate().unwrap();
    let a = Scenario::build(cfg).unwrap().run_algorithm(Algorithm::NaiveGreedy);
    let b = Scenario::build(traced).unwrap().run_algorithm(Algorithm::NaiveGreedy);
    assert_eq!(a.total(), b.total());
    assert_eq!(a.schedule, b.schedule);
}

#[test]
fn compare_joins_bundles() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    Scenario::build(small()).unwrap().run(a.path()).unwrap();
    let mut cfg = small();
    cfg.name = "other".into();
    cfg.algorithms = vec![Algorithm::NoReplica];
    Scenario::build(cfg).unwrap().run(b.path()).unwrap();
    let rows = compare(&[a.path().to_path_buf(), b.path().to_path_buf()]).unwrap();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r.vs_best >= 1.0 - 1e-12));
    assert!(rows[4].scenario.starts_with("other"));
    assert_eq!(rows[4].vs_best, 1.0);
    let mut buf = Vec::new();
    write_compare(&rows, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 6);
}

#[test]
fn inspection_counts_links() {
    let report = inspect(&small()).unwrap();
    assert_eq!(report.shells.len(), 1);
    assert_eq!(report.shells[0].satellites, 64);
    assert_eq!(report.slots.len(), 4);
    for s in &report.slots {
        assert_eq!(s.isl_links, 128);
        // One origin, three gateways.
        assert_eq!(s.terrestrial_links, 3);
        assert!(s.min_visible <= s.max_visible);
    }
}
