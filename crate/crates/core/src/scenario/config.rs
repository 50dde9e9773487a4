use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::constellation::{LatencySampler, Metric, NetworkOptions, ShellSpec};
use crate::delivery::{LinkModel, QoeModel, RoutingPolicy};
use crate::demand::{BoundingBox, US_BBOX};
use crate::placement::{Algorithm, OptimizerConfig};
use crate::{Error, Result};

/// A scenario as read from JSON. Relative paths are resolved against the
/// directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_slot_seconds")]
    pub slot_seconds: f64,
    /// Horizon. Required for synthetic demand; a trace defines its own.
    #[serde(default)]
    pub slots: Option<usize>,
    pub shells: Vec<ShellEntry>,
    #[serde(default)]
    pub ground: GroundConfig,
    pub demand: DemandSource,
    #[serde(default)]
    pub costs: CostConfig,
    #[serde(default)]
    pub candidates: CandidateMode,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    #[serde(default)]
    pub prediction: Prediction,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub delivery: Option<DeliveryConfig>,
    #[serde(default)]
    pub latency: LatencyConfig,
    /// Worker threads; 0 uses every core.
    #[serde(default)]
    pub threads: usize,
}

fn default_name() -> String {
    "scenario".into()
}

fn default_slot_seconds() -> f64 {
    300.0
}

fn default_algorithms() -> Vec<Algorithm> {
    Algorithm::ALL.to_vec()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShellPreset {
    Starlink,
    O3b,
    Viasat,
}

impl ShellPreset {
    pub fn spec(self) -> ShellSpec {
        match self {
            ShellPreset::Starlink => ShellSpec::starlink_phase1(),
            ShellPreset::O3b => ShellSpec::o3b(),
            ShellPreset::Viasat => ShellSpec::viasat(),
        }
    }
}

/// A preset name or a full shell definition.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ShellEntry {
    Preset(ShellPreset),
    Custom(ShellSpec),
}

// Hand-written so errors inside a custom shell keep their field path.
impl<'de> Deserialize<'de> for ShellEntry {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> serde::de::Visitor<'de> for V {
            type Value = ShellEntry;

            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a preset name (starlink, o3b, viasat) or a shell object")
            }

            fn visit_str<E: serde::de::Error>(self, v: &str) -> std::result::Result<ShellEntry, E> {
                ShellPreset::deserialize(serde::de::value::StrDeserializer::<E>::new(v)).map(ShellEntry::Preset)
            }

            fn visit_map<A: serde::de::MapAccess<'de>>(self, map: A) -> std::result::Result<ShellEntry, A::Error> {
                ShellSpec::deserialize(serde::de::value::MapAccessDeserializer::new(map)).map(ShellEntry::Custom)
            }
        }
        d.deserialize_any(V)
    }
}

impl ShellEntry {
    pub fn spec(&self) -> ShellSpec {
        match self {
            ShellEntry::Preset(p) => p.spec(),
            ShellEntry::Custom(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Site {
    pub name: String,
    pub lat_deg: f64,
    pub lon_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundConfig {
    #[serde(default)]
    pub gateways: GatewaySource,
    #[serde(default)]
    pub origins: Vec<Site>,
    #[serde(default)]
    pub network: NetworkOptions,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GatewaySource {
    #[default]
    None,
    /// CSV with `name,lat_deg,lon_deg`.
    File { path: PathBuf },
    Inline { sites: Vec<Site> },
    /// Uniform sites inside `bbox`; the seed defaults to the scenario seed.
    Random {
        count: usize,
        #[serde(default = "us_bbox")]
        bbox: BoundingBox,
        #[serde(default)]
        seed: Option<u64>,
    },
}

fn us_bbox() -> BoundingBox {
    US_BBOX
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

fn default_top_k() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DemandSource {
    Trace {
        trace: PathBuf,
        /// User region sites, `name,lat_deg,lon_deg`.
        users: PathBuf,
        #[serde(default)]
        catalog: Option<PathBuf>,
        /// 0 keeps every content.
        #[serde(default = "default_top_k")]
        top_k: usize,
        /// Inclusive slot window of the trace.
        #[serde(default)]
        window: Option<(usize, usize)>,
    },
    Grid {
        rows: usize,
        cols: usize,
        #[serde(default = "us_bbox")]
        bbox: BoundingBox,
        #[serde(default = "one")]
        per_slot_demand: f64,
        #[serde(default)]
        active: Option<(usize, usize)>,
        #[serde(default = "one_usize")]
        contents: usize,
        #[serde(default = "one")]
        size_mb: f64,
    },
    Population {
        /// Sites file; the contiguous US states when absent.
        #[serde(default)]
        sites: Option<PathBuf>,
        /// One weight per site; required with `sites`.
        #[serde(default)]
        weights: Option<Vec<f64>>,
        requests_per_slot: u64,
        #[serde(default = "one_usize")]
        contents: usize,
        #[serde(default = "one")]
        size_mb: f64,
        #[serde(default)]
        seed: Option<u64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostConfig {
    pub metric: Metric,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Per-shell storage price, in shell order; `null` uses `gamma`.
    pub shell_gamma: Vec<Option<f64>>,
    /// Derived from the network when absent.
    pub c_qmin: Option<f64>,
}

impl Default for CostConfig {
    fn default() -> Self {
        Self {
            metric: Metric::Hop,
            alpha: 50.0,
            beta: 1.0,
            gamma: 10.0,
            shell_gamma: Vec::new(),
            c_qmin: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateMode {
    #[default]
    Both,
    GatewaysOnly,
    SatellitesOnly,
}

impl CandidateMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CandidateMode::Both => "both",
            CandidateMode::GatewaysOnly => "gateways_only",
            CandidateMode::SatellitesOnly => "satellites_only",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Prediction {
    /// Optimisers see the true demand.
    #[default]
    Oracle,
    MovingAverage { window_slots: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeliveryConfig {
    pub policies: Vec<RoutingPolicy>,
    #[serde(default)]
    pub links: LinkModel,
    #[serde(default)]
    pub qoe: QoeModel,
    #[serde(default)]
    pub server_capacity_mbps: Option<f64>,
    /// Bytes per request; the content size when absent.
    #[serde(default)]
    pub chunk_mb: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatencyConfig {
    /// One `latency_ms` per line; overrides `model`.
    pub samples_file: Option<PathBuf>,
    pub model: LatencySampler,
}

/// Command-line overrides applied after parsing.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub algorithms: Option<Vec<Algorithm>>,
    pub metric: Option<Metric>,
    pub threads: Option<usize>,
}

impl ScenarioConfig {
    /// Parses a JSON document; errors carry the path of the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Config {
                path,
                reason: e.into_inner().to_string(),
            }
        })
    }

    /// Reads, resolves relative paths and validates.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let GatewaySource::File { path } = &mut self.ground.gateways {
            fix(path);
        }
        match &mut self.demand {
            DemandSource::Trace {
                trace, users, catalog, ..
            } => {
                fix(trace);
                fix(users);
                if let Some(c) = catalog {
                    fix(c);
                }
            }
            DemandSource::Population { sites: Some(s), .. } => fix(s),
            _ => {}
        }
        if let Some(p) = &mut self.latency.samples_file {
            fix(p);
        }
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(a) = &o.algorithms {
            self.algorithms = a.clone();
        }
        if let Some(m) = o.metric {
            self.costs.metric = m;
        }
        if let Some(t) = o.threads {
            self.threads = t;
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |path: &str, reason: &str| {
            Err(Error::Config {
                path: path.into(),
                reason: reason.into(),
            })
        };
        if self.shells.is_empty() {
            return fail("shells", "at least one shell is required");
        }
        for (i, s) in self.shells.iter().enumerate() {
            s.spec().validate().map_err(|e| Error::Config {
                path: format!("shells[{i}]"),
                reason: e.to_string(),
            })?;
        }
        if self.ground.origins.is_empty() {
            return fail("ground.origins", "at least one origin is required");
        }
        if !(self.slot_seconds > 0.0) || !self.slot_seconds.is_finite() {
            return fail("slot_seconds", "must be positive");
        }
        if self.slots == Some(0) {
            return fail("slots", "horizon must be at least 1 slot");
        }
        if !matches!(self.demand, DemandSource::Trace { .. }) && self.slots.is_none() {
            return fail("slots", "required for synthetic demand");
        }
        if self.algorithms.is_empty() {
            return fail("algorithms", "empty algorithm list");
        }
        if let Prediction::MovingAverage { window_slots: 0 } = self.prediction {
            return fail("prediction.window_slots", "must be at least 1");
        }
        if self.costs.shell_gamma.len() > self.shells.len() {
            return fail("costs.shell_gamma", "more entries than shells");
        }
        self.cost_params(1.0).validate().map_err(|e| Error::Config {
            path: "costs".into(),
            reason: e.to_string(),
        })?;
        self.optimizer.validate().map_err(|e| Error::Config {
            path: "optimizer".into(),
            reason: e.to_string(),
        })?;
        if let Some(d) = &self.delivery {
            for (i, p) in d.policies.iter().enumerate() {
                p.validate().map_err(|e| Error::Config {
                    path: format!("delivery.policies[{i}]"),
                    reason: e.to_string(),
                })?;
            }
            d.links.validate().map_err(|e| Error::Config {
                path: "delivery.links".into(),
                reason: e.to_string(),
            })?;
            if !(d.qoe.budget_s > 0.0) {
                return fail("delivery.qoe.budget_s", "must be positive");
            }
            if d.server_capacity_mbps.is_some_and(|c| !(c > 0.0)) {
                return fail("delivery.server_capacity_mbps", "must be positive");
            }
            if d.chunk_mb.is_some_and(|c| !(c > 0.0)) {
                return fail("delivery.chunk_mb", "must be positive");
            }
        }
        for path in self.input_files() {
            if !path.exists() {
                return Err(Error::Config {
                    path: path.display().to_string(),
                    reason: "referenced file does not exist".into(),
                });
            }
        }
        Ok(())
    }

    fn input_files(&self) -> Vec<&Path> {
        let mut out = Vec::new();
        if let GatewaySource::File { path } = &self.ground.gateways {
            out.push(path.as_path());
        }
        match &self.demand {
            DemandSource::Trace {
                trace, users, catalog, ..
            } => {
                out.push(trace.as_path());
                out.push(users.as_path());
                if let Some(c) = catalog {
                    out.push(c.as_path());
                }
            }
            DemandSource::Population { sites: Some(s), .. } => out.push(s.as_path()),
            _ => {}
        }
        if let Some(p) = &self.latency.samples_file {
            out.push(p.as_path());
        }
        out
    }

    pub fn shell_specs(&self) -> Vec<ShellSpec> {
        self.shells.iter().map(ShellEntry::spec).collect()
    }

    pub fn cost_params(&self, c_qmin: f64) -> crate::costmodel::CostParams {
        crate::costmodel::CostParams {
            metric: self.costs.metric,
            alpha: self.costs.alpha,
            beta: self.costs.beta,
            gamma: self.costs.gamma,
            shell_gamma: self.costs.shell_gamma.clone(),
            c_qmin,
        }
    }
}
