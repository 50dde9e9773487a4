//! Content catalog and the `(slot, user, content)` demand matrix.

mod predict;
mod synth;
mod trace;

use serde::{Deserialize, Serialize};

pub use predict::predict_demand;
pub use synth::{
    random_sites, synth_grid_demand, synth_population_demand, us_contiguous_states, BoundingBox, GridDemand,
    PopulationDemand, US_BBOX,
};
pub use trace::{load_catalog, load_trace, save_catalog, save_trace, TraceOptions};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ContentCatalog {
    pub contents: Vec<String>,
    pub sizes_mb: Vec<f64>,
}

impl ContentCatalog {
    pub fn new(entries: Vec<(String, f64)>) -> Result<Self> {
        let (contents, sizes_mb) = entries.into_iter().unzip();
        let c = Self { contents, sizes_mb };
        c.validate()?;
        Ok(c)
    }

    /// `n` contents named `content-0..` with the same size.
    pub fn uniform(n: usize, size_mb: f64) -> Self {
        Self {
            contents: (0..n).map(|i| format!("content-{i}")).collect(),
            sizes_mb: vec![size_mb; n],
        }
    }

    pub fn len(&self) -> usize {
        self.contents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contents.is_empty()
    }

    pub fn size(&self, c: usize) -> f64 {
        self.sizes_mb[c]
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.contents.iter().position(|c| c == id)
    }

    pub fn validate(&self) -> Result<()> {
        if self.contents.len() != self.sizes_mb.len() {
            return Err(Error::param("catalog", "contents and sizes differ in length"));
        }
        let mut seen = std::collections::HashSet::new();
        for (c, &s) in self.contents.iter().zip(&self.sizes_mb) {
            if !seen.insert(c) {
                return Err(Error::param("catalog", format!("duplicate content `{c}`")));
            }
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::param("catalog", format!("content `{c}` has non-positive size {s}")));
            }
        }
        Ok(())
    }
}

/// Demand per `(slot, content, user)`; slots are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandMatrix {
    users: Vec<String>,
    contents: Vec<String>,
    slots: usize,
    values: Vec<f64>,
}

impl DemandMatrix {
    pub fn zeros(users: Vec<String>, contents: Vec<String>, slots: usize) -> Self {
        let n = users.len() * contents.len() * slots;
        Self {
            users,
            contents,
            slots,
            values: vec![0.0; n],
        }
    }

    pub fn users(&self) -> &[String] {
        &self.users
    }

    pub fn contents(&self) -> &[String] {
        &self.contents
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    #[inline]
    fn idx(&self, t: usize, c: usize, u: usize) -> usize {
        debug_assert!(t >= 1 && t <= self.slots, "slot {t} out of 1..={}", self.slots);
        ((t - 1) * self.contents.len() + c) * self.users.len() + u
    }

    pub fn get(&self, t: usize, c: usize, u: usize) -> f64 {
        self.values[self.idx(t, c, u)]
    }

    pub fn set(&mut self, t: usize, c: usize, u: usize, value: f64) {
        assert!(value >= 0.0 && value.is_finite(), "demand must be finite and nonnegative");
        let i = self.idx(t, c, u);
        self.values[i] = value;
    }

    pub fn add(&mut self, t: usize, c: usize, u: usize, value: f64) {
        let v = self.get(t, c, u) + value;
        self.set(t, c, u, v);
    }

    /// Demand of every user for content `c` at slot `t`.
    pub fn row(&self, t: usize, c: usize) -> &[f64] {
        let start = self.idx(t, c, 0);
        &self.values[start..start + self.users.len()]
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn slot_total(&self, t: usize) -> f64 {
        (0..self.contents.len()).map(|c| self.row(t, c).iter().sum::<f64>()).sum()
    }

    pub fn content_total(&self, c: usize) -> f64 {
        (1..=self.slots).map(|t| self.row(t, c).iter().sum::<f64>()).sum()
    }

    pub fn user_total(&self, u: usize) -> f64 {
        (1..=self.slots)
            .flat_map(|t| (0..self.contents.len()).map(move |c| (t, c)))
            .map(|(t, c)| self.get(t, c, u))
            .sum()
    }

    /// `a * self + b * other`; both matrices must share their axes.
    pub fn linear_combination(&self, a: f64, other: &DemandMatrix, b: f64) -> Result<DemandMatrix> {
        if self.users != other.users || self.contents != other.contents || self.slots != other.slots {
            return Err(Error::param("demand", "matrices have different axes"));
        }
        if a < 0.0 || b < 0.0 {
            return Err(Error::param("demand", "coefficients must be nonnegative"));
        }
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        Ok(DemandMatrix {
            values,
            ..self.clone()
        })
    }

    pub fn scaled(&self, lambda: f64) -> DemandMatrix {
        assert!(lambda >= 0.0);
        DemandMatrix {
            values: self.values.iter().map(|v| v * lambda).collect(),
            ..self.clone()
        }
    }

    /// Keeps only the listed users (by position), in the given order.
    pub fn select_users(&self, keep: &[usize]) -> DemandMatrix {
        let users = keep.iter().map(|&u| self.users[u].clone()).collect();
        let mut out = DemandMatrix::zeros(users, self.contents.clone(), self.slots);
        for t in 1..=self.slots {
            for c in 0..self.contents.len() {
                for (k, &u) in keep.iter().enumerate() {
                    out.set(t, c, k, self.get(t, c, u));
                }
            }
        }
        out
    }
}
