use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::{ContentCatalog, DemandMatrix};
use crate::constellation::{GroundKind, GroundNode};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
}

/// Contiguous United States.
pub const US_BBOX: BoundingBox = BoundingBox {
    lat_min: 25.0,
    lat_max: 49.0,
    lon_min: -125.0,
    lon_max: -67.0,
};

impl BoundingBox {
    pub fn validate(&self) -> Result<()> {
        let ok = [self.lat_min, self.lat_max, self.lon_min, self.lon_max]
            .iter()
            .all(|v| v.is_finite())
            && self.lat_min < self.lat_max
            && self.lon_min < self.lon_max
            && self.lat_min >= -90.0
            && self.lat_max <= 90.0;
        if ok {
            Ok(())
        } else {
            Err(Error::param("region_bbox", format!("degenerate bounding box {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridDemand {
    pub rows: usize,
    pub cols: usize,
    pub bbox: BoundingBox,
    pub per_slot_demand: f64,
    pub slots: usize,
    /// Only the top-left `(rows, cols)` sub-grid receives demand.
    pub active: Option<(usize, usize)>,
    pub catalog: ContentCatalog,
}

/// Grid of user regions over `bbox`, row 0 northernmost. Every active cell
/// requests every content with the same weight in every slot.
pub fn synth_grid_demand(spec: &GridDemand) -> Result<(Vec<GroundNode>, ContentCatalog, DemandMatrix)> {
    if spec.rows == 0 || spec.cols == 0 {
        return Err(Error::param("grid", "rows and cols must be at least 1"));
    }
    if spec.slots == 0 {
        return Err(Error::param("slots", "must be at least 1"));
    }
    if !(spec.per_slot_demand >= 0.0) || !spec.per_slot_demand.is_finite() {
        return Err(Error::param("per_slot_demand", "must be finite and >= 0"));
    }
    spec.bbox.validate()?;
    spec.catalog.validate()?;
    let (ar, ac) = spec.active.unwrap_or((spec.rows, spec.cols));
    if ar > spec.rows || ac > spec.cols {
        return Err(Error::param(
            "active",
            format!("sub-grid {ar}x{ac} exceeds grid {}x{}", spec.rows, spec.cols),
        ));
    }
    let dlat = (spec.bbox.lat_max - spec.bbox.lat_min) / spec.rows as f64;
    let dlon = (spec.bbox.lon_max - spec.bbox.lon_min) / spec.cols as f64;
    let mut nodes = Vec::with_capacity(spec.rows * spec.cols);
    for r in 0..spec.rows {
        for c in 0..spec.cols {
            let lat = spec.bbox.lat_max - (r as f64 + 0.5) * dlat;
            let lon = spec.bbox.lon_min + (c as f64 + 0.5) * dlon;
            nodes.push(GroundNode::new(format!("cell-{r}-{c}"), GroundKind::UserRegion, lat, lon)?);
        }
    }
    let users = nodes.iter().map(|n| n.name.clone()).collect();
    let mut demand = DemandMatrix::zeros(users, spec.catalog.contents.clone(), spec.slots);
    for t in 1..=spec.slots {
        for k in 0..spec.catalog.len() {
            for r in 0..ar {
                for c in 0..ac {
                    demand.set(t, k, r * spec.cols + c, spec.per_slot_demand);
                }
            }
        }
    }
    Ok((nodes, spec.catalog.clone(), demand))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationDemand {
    pub users: Vec<String>,
    pub weights: Vec<f64>,
    /// Requests drawn per slot, spread over all contents uniformly.
    pub request_count: u64,
    pub slots: usize,
    pub catalog: ContentCatalog,
    pub seed: u64,
}

/// Multinomial assignment of `request_count` requests per slot to users in
/// proportion to `weights`; each request picks a content uniformly.
pub fn synth_population_demand(spec: &PopulationDemand) -> Result<DemandMatrix> {
    if spec.users.len() != spec.weights.len() {
        return Err(Error::param("weights", "one weight per user is required"));
    }
    if spec.weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(Error::param("weights", "weights must be finite and >= 0"));
    }
    let total: f64 = spec.weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::param("weights", "at least one weight must be positive"));
    }
    if spec.catalog.is_empty() {
        return Err(Error::param("catalog", "needs at least one content"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut demand = DemandMatrix::zeros(spec.users.clone(), spec.catalog.contents.clone(), spec.slots);
    let contents = spec.catalog.len();
    for t in 1..=spec.slots {
        let counts = multinomial(&mut rng, spec.request_count, &spec.weights, total);
        for (u, &n) in counts.iter().enumerate() {
            for _ in 0..n {
                let c = rng.random_range(0..contents);
                demand.add(t, c, u, 1.0);
            }
        }
    }
    Ok(demand)
}

/// Conditional-binomial multinomial draw.
fn multinomial<R: Rng>(rng: &mut R, n: u64, weights: &[f64], total: f64) -> Vec<u64> {
    let mut left = n;
    let mut mass = total;
    let mut out = vec![0; weights.len()];
    for (i, &w) in weights.iter().enumerate() {
        if left == 0 {
            break;
        }
        if i + 1 == weights.len() || w >= mass {
            out[i] = left;
            break;
        }
        let p = (w / mass).clamp(0.0, 1.0);
        let k = Binomial::new(left, p).map(|b| b.sample(rng)).unwrap_or(0);
        out[i] = k;
        left -= k;
        mass -= w;
    }
    // Trailing zero-weight users must not absorb leftovers.
    if let Some(last) = weights.iter().rposition(|w| *w > 0.0) {
        if last + 1 < weights.len() {
            let stray: u64 = out[last + 1..].iter().sum();
            out[last + 1..].iter_mut().for_each(|v| *v = 0);
            out[last] += stray;
        }
    }
    out
}

/// Uniformly random sites inside `bbox`, named `{prefix}{i}`.
pub fn random_sites(count: usize, bbox: &BoundingBox, seed: u64, kind: GroundKind, prefix: &str) -> Result<Vec<GroundNode>> {
    bbox.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let lat = rng.random_range(bbox.lat_min..bbox.lat_max);
            let lon = rng.random_range(bbox.lon_min..bbox.lon_max);
            GroundNode::new(format!("{prefix}{i}"), kind, lat, lon)
        })
        .collect()
}

/// The 48 contiguous states: `(code, 2020 census population, lat, lon)`.
const STATES: [(&str, u64, f64, f64); 48] = [
    ("AL", 5_024_279, 32.8, -86.8),
    ("AZ", 7_151_502, 34.3, -111.7),
    ("AR", 3_011_524, 34.9, -92.4),
    ("CA", 39_538_223, 37.2, -119.5),
    ("CO", 5_773_714, 39.0, -105.5),
    ("CT", 3_605_944, 41.6, -72.7),
    ("DE", 989_948, 39.0, -75.5),
    ("FL", 21_538_187, 28.6, -82.4),
    ("GA", 10_711_908, 32.7, -83.4),
    ("ID", 1_839_106, 44.4, -114.6),
    ("IL", 12_812_508, 40.0, -89.2),
    ("IN", 6_785_528, 39.9, -86.3),
    ("IA", 3_190_369, 42.1, -93.5),
    ("KS", 2_937_880, 38.5, -98.4),
    ("KY", 4_505_836, 37.5, -85.3),
    ("LA", 4_657_757, 31.1, -92.0),
    ("ME", 1_362_359, 45.4, -69.2),
    ("MD", 6_177_224, 39.0, -76.8),
    ("MA", 7_029_917, 42.3, -71.8),
    ("MI", 10_077_331, 44.3, -85.4),
    ("MN", 5_706_494, 46.3, -94.3),
    ("MS", 2_961_279, 32.7, -89.7),
    ("MO", 6_154_913, 38.4, -92.5),
    ("MT", 1_084_225, 47.0, -109.6),
    ("NE", 1_961_504, 41.5, -99.8),
    ("NV", 3_104_614, 39.3, -116.6),
    ("NH", 1_377_529, 43.7, -71.6),
    ("NJ", 9_288_994, 40.2, -74.7),
    ("NM", 2_117_522, 34.4, -106.1),
    ("NY", 20_201_249, 42.9, -75.5),
    ("NC", 10_439_388, 35.6, -79.4),
    ("ND", 779_094, 47.5, -100.5),
    ("OH", 11_799_448, 40.3, -82.8),
    ("OK", 3_959_353, 35.6, -97.5),
    ("OR", 4_237_256, 43.9, -120.6),
    ("PA", 13_002_700, 40.9, -77.8),
    ("RI", 1_097_379, 41.7, -71.5),
    ("SC", 5_118_425, 33.9, -80.9),
    ("SD", 886_667, 44.4, -100.2),
    ("TN", 6_910_840, 35.9, -86.4),
    ("TX", 29_145_505, 31.5, -99.3),
    ("UT", 3_271_616, 39.3, -111.7),
    ("VT", 643_077, 44.1, -72.7),
    ("VA", 8_631_393, 37.5, -78.9),
    ("WA", 7_705_281, 47.4, -120.5),
    ("WV", 1_793_716, 38.6, -80.6),
    ("WI", 5_893_718, 44.6, -89.9),
    ("WY", 576_851, 43.0, -107.6),
];

/// User regions at state centroids together with their populations.
pub fn us_contiguous_states() -> (Vec<GroundNode>, Vec<f64>) {
    STATES
        .iter()
        .map(|&(code, pop, lat, lon)| {
            let node = GroundNode::new(code, GroundKind::UserRegion, lat, lon).expect("static coordinates are valid");
            (node, pop as f64)
        })
        .unzip()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(rows: usize, cols: usize, active: Option<(usize, usize)>) -> GridDemand {
        GridDemand {
            rows,
            cols,
            bbox: US_BBOX,
            per_slot_demand: 3.0,
            slots: 48,
            active,
            catalog: ContentCatalog::uniform(1, 1.0),
        }
    }

    #[test]
    fn grid_five_by_ten() {
        let (nodes, _, d) = synth_grid_demand(&grid(5, 10, None)).unwrap();
        assert_eq!(nodes.len(), 50);
        assert_eq!(d.slots(), 48);
        for t in 1..=48 {
            assert!(d.row(t, 0).iter().all(|v| *v == 3.0));
        }
        assert!(nodes.iter().all(|n| n.latitude_deg > 25.0 && n.latitude_deg < 49.0));
        assert!(nodes[0].latitude_deg > nodes[49].latitude_deg);
    }

    #[test]
    fn single_cell() {
        let mut g = grid(1, 1, None);
        g.slots = 1;
        let (nodes, _, d) = synth_grid_demand(&g).unwrap();
        assert_eq!(nodes.len(), 1);
        assert_eq!(d.total(), 3.0);
        assert_eq!(nodes[0].latitude_deg, 37.0);
    }

    #[test]
    fn sub_grids_only_fill_listed_cells() {
        for (r, c) in [(1, 2), (2, 4), (3, 6), (4, 8)] {
            let (nodes, _, d) = synth_grid_demand(&grid(5, 10, Some((r, c)))).unwrap();
            for (u, n) in nodes.iter().enumerate() {
                let parts: Vec<usize> = n.name[5..].split('-').map(|x| x.parse().unwrap()).collect();
                let inside = parts[0] < r && parts[1] < c;
                assert_eq!(d.user_total(u) > 0.0, inside, "{}", n.name);
            }
        }
        assert!(synth_grid_demand(&grid(5, 10, Some((6, 1)))).is_err());
    }

    #[test]
    fn degenerate_bbox_rejected() {
        let mut g = grid(2, 2, None);
        g.bbox.lat_max = g.bbox.lat_min;
        assert!(synth_grid_demand(&g).is_err());
    }

    fn population(weights: Vec<f64>, n: u64, seed: u64) -> PopulationDemand {
        PopulationDemand {
            users: (0..weights.len()).map(|i| format!("u{i}")).collect(),
            weights,
            request_count: n,
            slots: 2,
            catalog: ContentCatalog::uniform(3, 1.0),
            seed,
        }
    }

    #[test]
    fn single_state_takes_everything() {
        let d = synth_population_demand(&population(vec![0.0, 5.0, 0.0], 1000, 1)).unwrap();
        assert_eq!(d.user_total(1), 2000.0);
        assert_eq!(d.total(), 2000.0);
    }

    #[test]
    fn uniform_weights_give_equal_shares() {
        let d = synth_population_demand(&population(vec![1.0; 48], 200_000, 7)).unwrap();
        let total = d.total();
        for u in 0..48 {
            let share = d.user_total(u) / total;
            assert!((share * 48.0 - 1.0).abs() < 0.05, "user {u} share {share}");
        }
    }

    #[test]
    fn seeded_runs_are_identical() {
        let a = synth_population_demand(&population(vec![1.0, 2.0, 3.0], 500, 9)).unwrap();
        let b = synth_population_demand(&population(vec![1.0, 2.0, 3.0], 500, 9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(synth_population_demand(&population(vec![1.0, -1.0], 10, 0)).is_err());
        assert!(synth_population_demand(&population(vec![0.0, 0.0], 10, 0)).is_err());
    }

    #[test]
    fn state_table() {
        let (nodes, pops) = us_contiguous_states();
        assert_eq!(nodes.len(), 48);
        assert!(nodes.iter().all(|n| n.name != "AK" && n.name != "HI"));
        let total: f64 = pops.iter().sum();
        assert!((total - 3.3e8).abs() < 1e7);
    }

    proptest! {
        #[test]
        fn population_assignment_conserves_requests(
            weights in proptest::collection::vec(0.0f64..10.0, 1..20),
            n in 0u64..5000,
            seed: u64,
        ) {
            prop_assume!(weights.iter().sum::<f64>() > 0.0);
            let d = synth_population_demand(&population(weights.clone(), n, seed)).unwrap();
            prop_assert_eq!(d.total(), 2.0 * n as f64);
            for (u, w) in weights.iter().enumerate() {
                if *w == 0.0 {
                    prop_assert_eq!(d.user_total(u), 0.0);
                }
            }
        }
    }
}
