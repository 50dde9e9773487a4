use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::{Error, NodeId, Result};

/// Smallest link latency; keeps co-located endpoints strictly positive.
pub const MIN_LINK_LATENCY_MS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    InterSatellite,
    GroundSatellite,
    Terrestrial,
}

impl LinkKind {
    pub fn is_satellite(self) -> bool {
        !matches!(self, LinkKind::Terrestrial)
    }
}

/// Distance metric used for routing and costs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "hop", alias = "hop_count")]
    Hop,
    #[serde(rename = "ideal", alias = "ideal_latency")]
    IdealLatency,
    #[serde(rename = "sampled", alias = "sampled_latency")]
    SampledLatency,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Hop => "hop",
            Metric::IdealLatency => "ideal",
            Metric::SampledLatency => "sampled",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hop" | "hop_count" => Ok(Metric::Hop),
            "ideal" | "ideal_latency" => Ok(Metric::IdealLatency),
            "sampled" | "sampled_latency" => Ok(Metric::SampledLatency),
            other => Err(Error::param("metric", format!("unknown metric `{other}` (hop, ideal, sampled)"))),
        }
    }
}

/// Undirected link with `a < b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub a: NodeId,
    pub b: NodeId,
    pub kind: LinkKind,
    pub ideal_latency_ms: f64,
    /// Only present on ground-satellite links.
    pub sampled_latency_ms: Option<f64>,
}

impl Edge {
    pub fn weight(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Hop => 1.0,
            Metric::IdealLatency => self.ideal_latency_ms,
            Metric::SampledLatency => self.sampled_latency_ms.unwrap_or(self.ideal_latency_ms),
        }
    }

    pub fn other(&self, node: NodeId) -> NodeId {
        if node == self.a {
            self.b
        } else {
            self.a
        }
    }
}

/// The network graph of one time slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotGraph {
    /// 1-based slot index.
    pub slot: usize,
    pub time_s: f64,
    pub node_count: usize,
    /// Sorted by `(a, b)`.
    pub edges: Vec<Edge>,
    /// User regions with no visible satellite in this slot.
    pub isolated_users: Vec<NodeId>,
}

impl SnapshotGraph {
    pub fn degree(&self, node: NodeId, kind: Option<LinkKind>) -> usize {
        self.edges
            .iter()
            .filter(|e| (e.a == node || e.b == node) && kind.is_none_or(|k| e.kind == k))
            .count()
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        let key = (a.min(b), a.max(b));
        self.edges.binary_search_by(|e| (e.a, e.b).cmp(&key)).is_ok()
    }
}

/// Source of per-slot ground-satellite latency samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LatencySampler {
    /// Measured latencies, drawn uniformly with replacement.
    Empirical { samples_ms: Vec<f64> },
    /// Synthetic fallback used when no measurements are supplied.
    LogNormal { median_ms: f64, sigma: f64 },
}

impl Default for LatencySampler {
    fn default() -> Self {
        LatencySampler::LogNormal {
            median_ms: 25.0,
            sigma: 0.5,
        }
    }
}

impl LatencySampler {
    /// Reads one `latency_ms` value per line; a non-numeric first line is
    /// treated as a header.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut samples = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let field = line.split(',').next().unwrap_or("").trim();
            if field.is_empty() {
                continue;
            }
            match field.parse::<f64>() {
                Ok(v) if v.is_finite() && v > 0.0 => samples.push(v),
                Ok(v) => {
                    return Err(Error::Parse {
                        path: path.to_path_buf(),
                        line: i as u64 + 1,
                        reason: format!("latency must be positive, got {v}"),
                    })
                }
                Err(_) if i == 0 => continue,
                Err(e) => {
                    return Err(Error::Parse {
                        path: path.to_path_buf(),
                        line: i as u64 + 1,
                        reason: e.to_string(),
                    })
                }
            }
        }
        if samples.is_empty() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 0,
                reason: "no latency samples".into(),
            });
        }
        Ok(LatencySampler::Empirical { samples_ms: samples })
    }

    pub fn is_fallback(&self) -> bool {
        matches!(self, LatencySampler::LogNormal { .. })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            LatencySampler::Empirical { samples_ms } if samples_ms.is_empty() => {
                Err(Error::param("latency_samples", "empty sample list"))
            }
            LatencySampler::LogNormal { median_ms, sigma } if !(*median_ms > 0.0) || !(*sigma >= 0.0) => {
                Err(Error::param("latency_samples", "lognormal needs median_ms > 0 and sigma >= 0"))
            }
            _ => Ok(()),
        }
    }

    /// Deterministic per-slot stream; independent of the order slots are
    /// generated in.
    pub(crate) fn slot_rng(seed: u64, slot: usize) -> ChaCha8Rng {
        let mixed = seed ^ (slot as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        ChaCha8Rng::seed_from_u64(mixed)
    }

    pub(crate) fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            LatencySampler::Empirical { samples_ms } => samples_ms[rng.random_range(0..samples_ms.len())],
            LatencySampler::LogNormal { median_ms, sigma } => {
                let dist = LogNormal::new(median_ms.ln(), *sigma).expect("validated lognormal parameters");
                dist.sample(rng).max(MIN_LINK_LATENCY_MS)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_file_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lat.csv");
        std::fs::write(&path, "latency_ms\n20.5\n31\n\n44.25\n").unwrap();
        let s = LatencySampler::from_file(&path).unwrap();
        assert_eq!(
            s,
            LatencySampler::Empirical {
                samples_ms: vec![20.5, 31.0, 44.25]
            }
        );
        std::fs::write(&path, "20\n-3\n").unwrap();
        assert!(LatencySampler::from_file(&path).is_err());
    }

    #[test]
    fn slot_streams_are_reproducible() {
        let s = LatencySampler::default();
        let a: Vec<f64> = {
            let mut r = LatencySampler::slot_rng(7, 3);
            (0..5).map(|_| s.draw(&mut r)).collect()
        };
        let b: Vec<f64> = {
            let mut r = LatencySampler::slot_rng(7, 3);
            (0..5).map(|_| s.draw(&mut r)).collect()
        };
        assert_eq!(a, b);
        assert!(a.iter().all(|&x| x > 0.0));
    }
}
