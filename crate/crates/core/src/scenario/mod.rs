//! Declarative scenarios: config parsing, wiring of network, demand, cost
//! model and optimisers, and the on-disk result bundle.

mod config;
mod output;

use std::collections::BTreeMap;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

pub use config::{
    CandidateMode, CostConfig, DeliveryConfig, DemandSource, GatewaySource, GroundConfig, LatencyConfig, Overrides,
    Prediction, ScenarioConfig, ShellEntry, ShellPreset, Site,
};

use crate::constellation::{
    load_sites, GroundKind, GroundNode, LatencySampler, LinkKind, Network, SnapshotGraph, Vec3,
};
use crate::costmodel::{
    relevant_nodes, resolve_users, CostBreakdown, CostModel, CostParams, DistanceOracle, NodeDemand, ReplicaSchedule,
};
use crate::delivery::{simulate_delivery, DeliveryInput, DeliveryReport};
use crate::demand::{
    load_catalog, load_trace, predict_demand, random_sites, save_catalog, save_trace, synth_grid_demand,
    synth_population_demand, us_contiguous_states, ContentCatalog, DemandMatrix, GridDemand, PopulationDemand,
    TraceOptions,
};
use crate::placement::{place, Algorithm, OpCounts, OptimizerConfig, Orbit, Problem};
use crate::{par, Error, NodeId, Result};

/// Ground sites and demand before the network is assembled.
#[derive(Debug, Clone)]
pub struct DemandInputs {
    pub gateways: Vec<GroundNode>,
    pub origins: Vec<GroundNode>,
    pub users: Vec<GroundNode>,
    pub catalog: ContentCatalog,
    pub demand: DemandMatrix,
}

impl DemandInputs {
    pub fn load(cfg: &ScenarioConfig) -> Result<Self> {
        let gateways = match &cfg.ground.gateways {
            GatewaySource::None => Vec::new(),
            GatewaySource::File { path } => load_sites(path, GroundKind::Gateway)?,
            GatewaySource::Inline { sites } => to_nodes(sites, GroundKind::Gateway)?,
            GatewaySource::Random { count, bbox, seed } => {
                random_sites(*count, bbox, seed.unwrap_or(cfg.seed), GroundKind::Gateway, "gw-")?
            }
        };
        let origins = to_nodes(&cfg.ground.origins, GroundKind::Origin)?;
        let (users, catalog, demand) = match &cfg.demand {
            DemandSource::Trace {
                trace,
                users,
                catalog,
                top_k,
                window,
            } => {
                let users = load_sites(users, GroundKind::UserRegion)?;
                let catalog = catalog.as_deref().map(load_catalog).transpose()?;
                let opts = TraceOptions {
                    known_users: Some(users.iter().map(|u| u.name.clone()).collect()),
                    window: *window,
                    top_k: (*top_k > 0).then_some(*top_k),
                };
                let (catalog, matrix) = load_trace(trace, catalog.as_ref(), &opts)?;
                // Keep every listed user region, also those without demand.
                let mut full = DemandMatrix::zeros(
                    users.iter().map(|u| u.name.clone()).collect(),
                    matrix.contents().to_vec(),
                    cfg.slots.unwrap_or(matrix.slots()),
                );
                let index: BTreeMap<&str, usize> =
                    full.users().iter().enumerate().map(|(i, u)| (u.as_str(), i)).collect();
                let map: Vec<usize> = matrix.users().iter().map(|u| index[u.as_str()]).collect();
                for t in 1..=matrix.slots().min(full.slots()) {
                    for c in 0..matrix.contents().len() {
                        for (u, &w) in matrix.row(t, c).iter().enumerate() {
                            full.set(t, c, map[u], w);
                        }
                    }
                }
                (users, catalog, full)
            }
            DemandSource::Grid {
                rows,
                cols,
                bbox,
                per_slot_demand,
                active,
                contents,
                size_mb,
            } => synth_grid_demand(&GridDemand {
                rows: *rows,
                cols: *cols,
                bbox: *bbox,
                per_slot_demand: *per_slot_demand,
                slots: cfg.slots.unwrap_or(1),
                active: *active,
                catalog: ContentCatalog::uniform(*contents, *size_mb),
            })?,
            DemandSource::Population {
                sites,
                weights,
                requests_per_slot,
                contents,
                size_mb,
                seed,
            } => {
                let (users, weights) = match (sites, weights) {
                    (Some(path), Some(w)) => (load_sites(path, GroundKind::UserRegion)?, w.clone()),
                    (Some(_), None) => {
                        return Err(Error::Config {
                            path: "demand.weights".into(),
                            reason: "required together with `sites`".into(),
                        })
                    }
                    (None, w) => {
                        let (nodes, pop) = us_contiguous_states();
                        (nodes, w.clone().unwrap_or(pop))
                    }
                };
                let catalog = ContentCatalog::uniform(*contents, *size_mb);
                let demand = synth_population_demand(&PopulationDemand {
                    users: users.iter().map(|u| u.name.clone()).collect(),
                    weights,
                    request_count: *requests_per_slot,
                    slots: cfg.slots.unwrap_or(1),
                    catalog: catalog.clone(),
                    seed: seed.unwrap_or(cfg.seed),
                })?;
                (users, catalog, demand)
            }
        };
        catalog.validate()?;
        Ok(Self {
            gateways,
            origins,
            users,
            catalog,
            demand,
        })
    }

    pub fn ground(&self) -> Vec<GroundNode> {
        self.gateways
            .iter()
            .chain(&self.origins)
            .chain(&self.users)
            .cloned()
            .collect()
    }
}

fn to_nodes(sites: &[Site], kind: GroundKind) -> Result<Vec<GroundNode>> {
    sites
        .iter()
        .map(|s| GroundNode::new(s.name.clone(), kind, s.lat_deg, s.lon_deg))
        .collect()
}

/// A fully built scenario, ready to run algorithms against.
pub struct Scenario {
    pub config: ScenarioConfig,
    pub network: Network,
    pub catalog: ContentCatalog,
    pub demand: DemandMatrix,
    /// What the optimisers see (equal to `demand` in oracle mode).
    pub predicted: DemandMatrix,
    pub users: Vec<NodeId>,
    pub origins: Vec<NodeId>,
    pub candidates: Vec<NodeId>,
    pub snapshots: Vec<SnapshotGraph>,
    pub oracle: DistanceOracle,
    pub params: CostParams,
    pub orbits: Vec<Orbit>,
    pub latency: LatencySampler,
    pub notes: Vec<String>,
    positions: Arc<Vec<Vec<Vec3>>>,
    build_seconds: f64,
}

impl std::fmt::Debug for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Scenario")
            .field("name", &self.config.name)
            .field("slots", &self.slots())
            .field("users", &self.users.len())
            .field("candidates", &self.candidates.len())
            .finish_non_exhaustive()
    }
}

fn slot_time(cfg: &ScenarioConfig, t: usize) -> f64 {
    (t - 1) as f64 * cfg.slot_seconds
}

fn build_network(cfg: &ScenarioConfig, inputs: &DemandInputs) -> Result<Network> {
    Network::new(&cfg.shell_specs(), inputs.ground(), cfg.ground.network)
}

fn latency_sampler(cfg: &ScenarioConfig) -> Result<LatencySampler> {
    let sampler = match &cfg.latency.samples_file {
        Some(p) => LatencySampler::from_file(p)?,
        None => cfg.latency.model.clone(),
    };
    sampler.validate()?;
    Ok(sampler)
}

fn snapshots(cfg: &ScenarioConfig, network: &Network, sampler: &LatencySampler, slots: usize) -> Vec<SnapshotGraph> {
    par::map_range(slots, |i| network.snapshot(i + 1, slot_time(cfg, i + 1), sampler, cfg.seed))
}

impl Scenario {
    pub fn build(mut config: ScenarioConfig) -> Result<Self> {
        let started = Instant::now();
        config.validate()?;
        config.optimizer.slot_seconds = config.slot_seconds;
        let inputs = DemandInputs::load(&config)?;
        let slots = inputs.demand.slots();
        if slots == 0 {
            return Err(Error::Config {
                path: "slots".into(),
                reason: "horizon must be at least 1 slot".into(),
            });
        }
        let network = build_network(&config, &inputs)?;
        let mut notes = Vec::new();
        let latency = latency_sampler(&config)?;
        if latency.is_fallback() && config.costs.metric == crate::constellation::Metric::SampledLatency {
            notes.push("no latency samples supplied; ground-satellite latencies drawn from the lognormal model".into());
        }
        let snapshots = snapshots(&config, &network, &latency, slots);
        let users = resolve_users(&network, &inputs.demand)?;
        let origins = network.origins();
        let mut candidates: Vec<NodeId> = match config.candidates {
            CandidateMode::Both => network.satellites().chain(network.gateways()).collect(),
            CandidateMode::GatewaysOnly => network.gateways(),
            CandidateMode::SatellitesOnly => network.satellites().collect(),
        };
        candidates.sort();
        if candidates.is_empty() {
            notes.push(format!(
                "candidate mode {} leaves no replica candidates; every algorithm degenerates to no replica",
                config.candidates.as_str()
            ));
        }
        let relevant = relevant_nodes(&users, &candidates, &origins);
        let oracle = DistanceOracle::build(&snapshots, &relevant, config.costs.metric);
        let c_qmin = match config.costs.c_qmin {
            Some(v) => v,
            None => CostParams::c_qmin_from(&oracle, &users, &candidates),
        };
        let params = config.cost_params(c_qmin);
        params.validate()?;

        let mut orbits = Vec::new();
        let mut planes = network.orbits().into_iter();
        for (k, shell) in network.shells().iter().enumerate() {
            for plane in 0..shell.spec.orbit_count as usize {
                orbits.push(Orbit {
                    shell: k,
                    plane,
                    nodes: planes.next().expect("one entry per plane"),
                    moving: !shell.spec.is_geostationary(),
                });
            }
        }
        let positions = Arc::new(par::map_range(slots, |i| network.positions(slot_time(&config, i + 1))));
        let predicted = match config.prediction {
            Prediction::Oracle => inputs.demand.clone(),
            Prediction::MovingAverage { window_slots } => predict_demand(&inputs.demand, window_slots),
        };
        Ok(Self {
            network,
            catalog: inputs.catalog,
            demand: inputs.demand,
            predicted,
            users,
            origins,
            candidates,
            snapshots,
            oracle,
            params,
            orbits,
            latency,
            notes,
            positions,
            build_seconds: started.elapsed().as_secs_f64(),
            config,
        })
    }

    pub fn slots(&self) -> usize {
        self.demand.slots()
    }

    pub fn model(&self) -> CostModel<'_> {
        CostModel::new(
            &self.oracle,
            self.params.alpha,
            self.params.storage_units(&self.network),
            self.origins.clone(),
        )
    }

    pub fn problem(&self) -> Problem<'_> {
        let positions = Arc::clone(&self.positions);
        Problem::new(self.model(), self.candidates.clone(), self.orbits.clone()).with_proximity(Arc::new(
            move |t: usize, a: NodeId, b: NodeId| positions[t - 1][a.index()].distance(positions[t - 1][b.index()]),
        ))
    }

    pub fn optimizer(&self) -> &OptimizerConfig {
        &self.config.optimizer
    }

    /// Optimises every content with `algorithm` and evaluates the result
    /// against the true demand. Panics inside the optimiser are caught and
    /// reported as an error string.
    pub fn run_algorithm(&self, algorithm: Algorithm) -> AlgorithmRun {
        let started = Instant::now();
        let problem = self.problem();
        let actual = NodeDemand::from_matrix(&self.demand, &self.users);
        let seen = if algorithm.uses_prediction() {
            NodeDemand::from_matrix(&self.predicted, &self.users)
        } else {
            actual.clone()
        };
        let sizes = &self.catalog.sizes_mb;
        let placed = catch_unwind(AssertUnwindSafe(|| {
            par::map_range(sizes.len(), |c| place(algorithm, &problem, &seen[c], sizes[c], &self.config.optimizer))
        }));
        let seconds = started.elapsed().as_secs_f64();
        let placed = match placed {
            Ok(p) => p,
            Err(payload) => {
                let msg = payload
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "optimiser panicked".into());
                return AlgorithmRun::failed(algorithm, msg, seconds);
            }
        };
        let model = problem.model;
        let mut schedule = ReplicaSchedule::origin_only(sizes.len(), self.slots(), &self.origins);
        let mut costs = Vec::with_capacity(sizes.len());
        let mut ops = Vec::with_capacity(sizes.len());
        let mut objective = Vec::with_capacity(sizes.len());
        let mut notes = Vec::new();
        for (c, p) in placed.into_iter().enumerate() {
            costs.push(model.content_cost(&p.sets, &actual[c], sizes[c]));
            ops.push(p.ops);
            objective.push(p.history.last().copied());
            for n in p.notes {
                notes.push(format!("{}: {n}", self.catalog.contents[c]));
            }
            schedule.set_content(c, p.sets);
        }
        if let Err(e) = schedule.validate(&self.origins, &self.candidates) {
            return AlgorithmRun::failed(algorithm, e.to_string(), seconds);
        }
        AlgorithmRun {
            algorithm,
            error: None,
            schedule,
            costs,
            ops,
            objective,
            notes,
            seconds,
        }
    }

    pub fn deliver(&self, schedule: &ReplicaSchedule) -> Vec<(String, DeliveryReport)> {
        let Some(d) = &self.config.delivery else {
            return Vec::new();
        };
        let demand = NodeDemand::from_matrix(&self.demand, &self.users);
        let request_mb: Vec<f64> = match d.chunk_mb {
            Some(mb) => vec![mb; self.catalog.len()],
            None => self.catalog.sizes_mb.clone(),
        };
        d.policies
            .iter()
            .map(|policy| {
                let report = simulate_delivery(&DeliveryInput {
                    snapshots: &self.snapshots,
                    oracle: &self.oracle,
                    schedule,
                    demand: &demand,
                    request_mb: &request_mb,
                    origins: &self.origins,
                    policy,
                    links: &d.links,
                    qoe: &d.qoe,
                    server_capacity_mbps: d.server_capacity_mbps,
                });
                (policy.kind.as_str().to_string(), report)
            })
            .collect()
    }

    /// Share of `(content, slot)` pairs holding at least one replica on each
    /// shell, and on the ground.
    pub fn shell_usage(&self, schedule: &ReplicaSchedule) -> Vec<ShellUsage> {
        let groups = self.network.shells().len() + 1;
        let mut pairs = vec![0usize; groups];
        let mut replicas = vec![0usize; groups];
        for c in 0..schedule.contents() {
            for t in 1..=schedule.slots() {
                let mut seen = vec![false; groups];
                for v in schedule.replicas(c, t, &self.origins) {
                    let g = match self.network.node(v).satellite() {
                        Some(s) => s.shell as usize,
                        None => groups - 1,
                    };
                    replicas[g] += 1;
                    seen[g] = true;
                }
                for (g, s) in seen.into_iter().enumerate() {
                    pairs[g] += s as usize;
                }
            }
        }
        let total = (schedule.contents() * schedule.slots()).max(1) as f64;
        (0..groups)
            .map(|g| ShellUsage {
                group: if g + 1 == groups {
                    "ground".into()
                } else {
                    self.network.shells()[g].spec.name.clone()
                },
                replica_slots: replicas[g],
                time_ratio: pairs[g] as f64 / total,
            })
            .collect()
    }

    /// Runs every configured algorithm and writes the bundle to `out`.
    pub fn run(&self, out: &Path) -> Result<RunSummary> {
        std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
        let mut runs = Vec::new();
        for &alg in &self.config.algorithms {
            log::info!("running {alg}");
            let run = self.run_algorithm(alg);
            if let Some(e) = &run.error {
                log::error!("{alg} failed: {e}");
            }
            let dir = out.join(alg.as_str());
            std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            if run.error.is_none() {
                output::write_costs(&dir.join("costs.csv"), &run, &self.catalog, self.params.metric)?;
                output::write_schedule(&dir.join("schedule.csv"), &run.schedule, &self.catalog)?;
                output::write_ops(&dir.join("ops.csv"), &run, &self.catalog)?;
                output::write_shell_usage(&dir.join("shell_usage.csv"), &self.shell_usage(&run.schedule))?;
                let reports = self.deliver(&run.schedule);
                if !reports.is_empty() {
                    output::write_delivery(&dir.join("delivery.csv"), &reports)?;
                    output::write_replica_load(&dir.join("replica_load.csv"), &reports, &self.network)?;
                }
            }
            runs.push(run);
        }
        let summary = RunSummary {
            rows: runs.iter().map(|r| SummaryRow::from_run(r, &self.origins)).collect(),
        };
        output::write_summary(&out.join("summary.csv"), &summary)?;
        output::write_json(&out.join("metadata.json"), &self.metadata(&runs))?;
        output::write_json(&out.join("timing.json"), &self.timing(&runs))?;
        Ok(summary)
    }

    fn metadata(&self, runs: &[AlgorithmRun]) -> serde_json::Value {
        let mut notes = self.notes.clone();
        for r in runs {
            notes.extend(r.notes.iter().map(|n| format!("{}: {n}", r.algorithm)));
        }
        serde_json::json!({
            "name": self.config.name,
            "seed": self.config.seed,
            "config": self.config,
            "horizon_slots": self.slots(),
            "nodes": {
                "satellites": self.network.satellite_count(),
                "gateways": self.network.gateways().len(),
                "origins": self.origins.len(),
                "user_regions": self.users.len(),
            },
            "candidate_count": self.candidates.len(),
            "cost_params": self.params,
            "c_qmin_source": if self.config.costs.c_qmin.is_some() { "config" } else { "derived" },
            "latency_model": self.latency,
            "qoe_model": self.config.delivery.as_ref().map(|d| d.qoe.describe()),
            "contents": self.catalog,
            "algorithms": runs.iter().map(|r| serde_json::json!({
                "algorithm": r.algorithm.as_str(),
                "status": r.status(),
                "error": r.error,
            })).collect::<Vec<_>>(),
            "notes": notes,
        })
    }

    fn timing(&self, runs: &[AlgorithmRun]) -> serde_json::Value {
        serde_json::json!({
            "threads": par::current_threads(),
            "build_seconds": self.build_seconds,
            "algorithms": runs.iter().map(|r| serde_json::json!({
                "algorithm": r.algorithm.as_str(),
                "seconds": r.seconds,
            })).collect::<Vec<_>>(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct AlgorithmRun {
    pub algorithm: Algorithm,
    pub error: Option<String>,
    pub schedule: ReplicaSchedule,
    /// Per content, against the true demand.
    pub costs: Vec<CostBreakdown>,
    pub ops: Vec<OpCounts>,
    /// Final optimiser objective per content, when the algorithm tracks one.
    pub objective: Vec<Option<f64>>,
    pub notes: Vec<String>,
    pub seconds: f64,
}

impl AlgorithmRun {
    fn failed(algorithm: Algorithm, error: String, seconds: f64) -> Self {
        Self {
            algorithm,
            error: Some(error),
            schedule: ReplicaSchedule::default(),
            costs: Vec::new(),
            ops: Vec::new(),
            objective: Vec::new(),
            notes: Vec::new(),
            seconds,
        }
    }

    pub fn status(&self) -> &'static str {
        if self.error.is_some() {
            "failed"
        } else {
            "ok"
        }
    }

    pub fn total(&self) -> CostBreakdown {
        self.costs.iter().copied().sum()
    }

    pub fn ops_total(&self) -> OpCounts {
        let mut acc = OpCounts::default();
        for o in &self.ops {
            acc += *o;
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShellUsage {
    pub group: String,
    /// Replica-slots held by nodes of this group.
    pub replica_slots: usize,
    pub time_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct SummaryRow {
    pub algorithm: String,
    pub status: String,
    pub query: f64,
    pub replication: f64,
    pub storage: f64,
    pub total: f64,
    /// Non-origin replicas summed over contents and slots.
    pub replica_slots: usize,
}

impl SummaryRow {
    fn from_run(run: &AlgorithmRun, origins: &[NodeId]) -> Self {
        let total = run.total();
        let mut replica_slots = 0;
        for c in 0..run.schedule.contents() {
            for t in 1..=run.schedule.slots() {
                replica_slots += run.schedule.replicas(c, t, origins).count();
            }
        }
        let failed = run.error.is_some();
        let value = |v: f64| if failed { f64::NAN } else { v };
        Self {
            algorithm: run.algorithm.as_str().into(),
            status: run.status().into(),
            query: value(total.query),
            replication: value(total.replication),
            storage: value(total.storage),
            total: value(total.total),
            replica_slots,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunSummary {
    pub rows: Vec<SummaryRow>,
}

impl RunSummary {
    pub fn get(&self, algorithm: Algorithm) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.algorithm == algorithm.as_str())
    }
}

/// Loads, applies overrides and runs a config file.
pub fn run_config(path: &Path, overrides: &Overrides, out: &Path) -> Result<RunSummary> {
    let mut cfg = ScenarioConfig::load(path)?;
    cfg.apply(overrides);
    cfg.validate()?;
    let threads = cfg.threads;
    par::with_threads(threads, || Scenario::build(cfg)?.run(out))
}

/// Writes the demand of a config as `users.csv`, `catalog.csv` and
/// `trace.csv` into `out`.
pub fn generate_demand(cfg: &ScenarioConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let inputs = DemandInputs::load(cfg)?;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let paths = [out.join("users.csv"), out.join("catalog.csv"), out.join("trace.csv")];
    crate::constellation::save_sites(&paths[0], &inputs.users)?;
    save_catalog(&paths[1], &inputs.catalog)?;
    save_trace(&paths[2], &inputs.demand)?;
    Ok(paths.to_vec())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShellSummary {
    pub name: String,
    pub satellites: usize,
    pub planes: usize,
    pub period_min: f64,
    pub geostationary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlotCoverage {
    pub slot: usize,
    pub time_s: f64,
    pub isl_links: usize,
    pub ground_links: usize,
    pub terrestrial_links: usize,
    pub isolated_users: usize,
    /// Visible satellites per user region.
    pub min_visible: usize,
    pub mean_visible: f64,
    pub max_visible: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Inspection {
    pub shells: Vec<ShellSummary>,
    pub slots: Vec<SlotCoverage>,
}

/// Coverage and link counts of the configured network over the horizon.
pub fn inspect(cfg: &ScenarioConfig) -> Result<Inspection> {
    let inputs = DemandInputs::load(cfg)?;
    let network = build_network(cfg, &inputs)?;
    let sampler = latency_sampler(cfg)?;
    let slots = inputs.demand.slots().max(1);
    let snaps = snapshots(cfg, &network, &sampler, slots);
    let shells = network
        .shells()
        .iter()
        .map(|c| ShellSummary {
            name: c.spec.name.clone(),
            satellites: c.len(),
            planes: c.spec.orbit_count as usize,
            period_min: c.period_s() / 60.0,
            geostationary: c.spec.is_geostationary(),
        })
        .collect();
    let users = network.users();
    let slots = snaps
        .iter()
        .map(|s| {
            let count = |k: LinkKind| s.edges.iter().filter(|e| e.kind == k).count();
            let visible: Vec<usize> = users.iter().map(|u| s.degree(*u, Some(LinkKind::GroundSatellite))).collect();
            SlotCoverage {
                slot: s.slot,
                time_s: s.time_s,
                isl_links: count(LinkKind::InterSatellite),
                ground_links: count(LinkKind::GroundSatellite),
                terrestrial_links: count(LinkKind::Terrestrial),
                isolated_users: s.isolated_users.len(),
                min_visible: visible.iter().copied().min().unwrap_or(0),
                mean_visible: if visible.is_empty() {
                    0.0
                } else {
                    visible.iter().sum::<usize>() as f64 / visible.len() as f64
                },
                max_visible: visible.iter().copied().max().unwrap_or(0),
            }
        })
        .collect();
    Ok(Inspection { shells, slots })
}

pub fn write_inspection<A: Write, B: Write>(inspection: &Inspection, shells: A, slots: B) -> Result<()> {
    output::write_rows(shells, &inspection.shells)?;
    output::write_rows(slots, &inspection.slots)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub scenario: String,
    pub algorithm: String,
    pub status: String,
    pub query: f64,
    pub replication: f64,
    pub storage: f64,
    pub total: f64,
    /// Total relative to the cheapest successful algorithm of the bundle.
    pub vs_best: f64,
}

/// Joins the summaries of several bundles.
pub fn compare(bundles: &[PathBuf]) -> Result<Vec<CompareRow>> {
    let mut out = Vec::new();
    for dir in bundles {
        let meta_path = dir.join("metadata.json");
        let meta: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?,
        )?;
        let name = meta["name"].as_str().unwrap_or("scenario").to_string();
        let rows: Vec<SummaryRow> = output::read_rows(&dir.join("summary.csv"))?;
        let best = rows
            .iter()
            .filter(|r| r.status == "ok")
            .map(|r| r.total)
            .fold(f64::INFINITY, f64::min);
        for r in rows {
            out.push(CompareRow {
                scenario: format!("{name} ({})", dir.display()),
                vs_best: if best > 0.0 { r.total / best } else { 1.0 },
                algorithm: r.algorithm,
                status: r.status,
                query: r.query,
                replication: r.replication,
                storage: r.storage,
                total: r.total,
            });
        }
    }
    Ok(out)
}

pub fn write_compare<W: Write>(rows: &[CompareRow], w: W) -> Result<()> {
    output::write_rows(w, rows)
}

#[cfg(test)]
mod tests;
