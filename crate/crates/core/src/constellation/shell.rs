use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::geometry::{Vec3, EARTH_MU_KM3_S2, EARTH_RADIUS_KM, GEO_ALTITUDE_KM, SIDEREAL_DAY_S};
use crate::{Error, Result};

fn default_min_elevation() -> f64 {
    25.0
}

fn default_isl() -> bool {
    true
}

/// One orbital shell: `orbit_count` circular planes with `sats_per_orbit`
/// evenly spaced satellites each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShellSpec {
    pub name: String,
    pub orbit_count: u32,
    pub sats_per_orbit: u32,
    pub altitude_km: f64,
    #[serde(default)]
    pub inclination_deg: f64,
    /// Fraction of the in-orbit spacing added per plane, in `[0, 1)`.
    #[serde(default)]
    pub phasing_offset: f64,
    #[serde(default = "default_min_elevation")]
    pub min_elevation_deg: f64,
    /// Whether the +grid inter-satellite links are enabled.
    #[serde(default = "default_isl")]
    pub isl: bool,
    /// Explicit sub-satellite longitudes for a geostationary shell; one entry
    /// per plane, one satellite per plane.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_longitudes_deg: Option<Vec<f64>>,
}

impl ShellSpec {
    pub fn walker(name: &str, orbit_count: u32, sats_per_orbit: u32, altitude_km: f64, inclination_deg: f64) -> Self {
        Self {
            name: name.to_string(),
            orbit_count,
            sats_per_orbit,
            altitude_km,
            inclination_deg,
            phasing_offset: 0.0,
            min_elevation_deg: default_min_elevation(),
            isl: true,
            fixed_longitudes_deg: None,
        }
    }

    /// Starlink phase I: 72 planes of 22 satellites at 550 km, +grid ISLs.
    pub fn starlink_phase1() -> Self {
        Self::walker("starlink", 72, 22, 550.0, 53.0)
    }

    /// O3b: 20 equatorial MEO satellites at 8,062 km without ISLs.
    pub fn o3b() -> Self {
        Self {
            min_elevation_deg: 10.0,
            isl: false,
            ..Self::walker("o3b", 1, 20, 8062.0, 0.0)
        }
    }

    /// ViaSat: four geostationary satellites over the Americas, no ISLs.
    pub fn viasat() -> Self {
        Self::geostationary("viasat", vec![-115.0, -100.0, -85.0, -70.0])
    }

    pub fn geostationary(name: &str, longitudes_deg: Vec<f64>) -> Self {
        Self {
            name: name.to_string(),
            orbit_count: longitudes_deg.len() as u32,
            sats_per_orbit: 1,
            altitude_km: GEO_ALTITUDE_KM,
            inclination_deg: 0.0,
            phasing_offset: 0.0,
            min_elevation_deg: 10.0,
            isl: false,
            fixed_longitudes_deg: Some(longitudes_deg),
        }
    }

    pub fn satellite_count(&self) -> usize {
        self.orbit_count as usize * self.sats_per_orbit as usize
    }

    /// Geostationary shells co-rotate with the Earth.
    pub fn is_geostationary(&self) -> bool {
        self.fixed_longitudes_deg.is_some()
            || ((self.altitude_km - GEO_ALTITUDE_KM).abs() <= 1.0 && self.inclination_deg == 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| {
            Err(Error::InvalidShell {
                shell: self.name.clone(),
                reason,
            })
        };
        if self.orbit_count == 0 || self.sats_per_orbit == 0 {
            return fail(format!(
                "orbit_count and sats_per_orbit must be >= 1 (got {} x {})",
                self.orbit_count, self.sats_per_orbit
            ));
        }
        if !(self.altitude_km > 0.0) {
            return fail(format!("altitude_km must be > 0 (got {})", self.altitude_km));
        }
        if !(0.0..=180.0).contains(&self.inclination_deg) {
            return fail(format!("inclination_deg must be in [0, 180] (got {})", self.inclination_deg));
        }
        if !(0.0..90.0).contains(&self.min_elevation_deg) {
            return fail(format!("min_elevation_deg must be in [0, 90) (got {})", self.min_elevation_deg));
        }
        if !(0.0..1.0).contains(&self.phasing_offset) {
            return fail(format!("phasing_offset must be in [0, 1) (got {})", self.phasing_offset));
        }
        if let Some(lons) = &self.fixed_longitudes_deg {
            if lons.len() != self.orbit_count as usize || self.sats_per_orbit != 1 {
                return fail("fixed longitudes need orbit_count = #longitudes and sats_per_orbit = 1".into());
            }
            if lons.iter().any(|l| !l.is_finite()) {
                return fail("fixed longitudes must be finite".into());
            }
        }
        Ok(())
    }

    /// Circular orbital period in seconds (the sidereal day for GEO shells).
    pub fn orbital_period_s(&self) -> f64 {
        if self.is_geostationary() {
            SIDEREAL_DAY_S
        } else {
            kepler_period_s(self.altitude_km)
        }
    }
}

/// Kepler period of a circular orbit at `altitude_km` above the mean surface.
pub fn kepler_period_s(altitude_km: f64) -> f64 {
    let a = EARTH_RADIUS_KM + altitude_km;
    2.0 * PI * (a * a * a / EARTH_MU_KM3_S2).sqrt()
}

/// `(shell, orbit, slot in orbit)` identifier of a satellite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SatelliteId {
    pub shell: u32,
    pub orbit: u32,
    pub index: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Satellite {
    pub id: SatelliteId,
    /// Right ascension of the ascending node, radians.
    pub raan_rad: f64,
    /// Argument of latitude at the epoch, radians.
    pub phase_rad: f64,
}

/// A validated shell with its satellites laid out.
#[derive(Debug, Clone)]
pub struct Constellation {
    pub spec: ShellSpec,
    pub shell_index: u32,
    pub satellites: Vec<Satellite>,
    period_s: f64,
    radius_km: f64,
    inclination_rad: f64,
}

/// Lays out a Walker-delta shell: planes `360/P` apart in RAAN, `Q`
/// satellites `360/Q` apart within a plane, and adjacent planes shifted by
/// `phasing_offset * 360/Q`.
pub fn build_shell(spec: &ShellSpec, shell_index: u32) -> Result<Constellation> {
    spec.validate()?;
    let p = spec.orbit_count;
    let q = spec.sats_per_orbit;
    let plane_step = 2.0 * PI / p as f64;
    let slot_step = 2.0 * PI / q as f64;
    let mut satellites = Vec::with_capacity(spec.satellite_count());
    for orbit in 0..p {
        let raan = match &spec.fixed_longitudes_deg {
            Some(lons) => lons[orbit as usize].to_radians(),
            None => plane_step * orbit as f64,
        };
        for index in 0..q {
            let phase = slot_step * index as f64 + spec.phasing_offset * slot_step * orbit as f64;
            satellites.push(Satellite {
                id: SatelliteId {
                    shell: shell_index,
                    orbit,
                    index,
                },
                raan_rad: raan,
                phase_rad: phase.rem_euclid(2.0 * PI),
            });
        }
    }
    Ok(Constellation {
        period_s: spec.orbital_period_s(),
        radius_km: EARTH_RADIUS_KM + spec.altitude_km,
        inclination_rad: spec.inclination_deg.to_radians(),
        spec: spec.clone(),
        shell_index,
        satellites,
    })
}

impl Constellation {
    pub fn period_s(&self) -> f64 {
        self.period_s
    }

    pub fn len(&self) -> usize {
        self.satellites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.satellites.is_empty()
    }

    pub fn position(&self, sat: &Satellite, t_seconds: f64) -> Vec3 {
        let u = sat.phase_rad + 2.0 * PI * t_seconds / self.period_s;
        let (su, cu) = u.sin_cos();
        let (so, co) = sat.raan_rad.sin_cos();
        let (si, ci) = self.inclination_rad.sin_cos();
        Vec3::new(
            self.radius_km * (co * cu - so * su * ci),
            self.radius_km * (so * cu + co * su * ci),
            self.radius_km * su * si,
        )
    }

    /// Inertial positions of every satellite after `t_seconds`, in
    /// orbit-major order.
    pub fn propagate(&self, t_seconds: f64) -> Vec<Vec3> {
        self.satellites.iter().map(|s| self.position(s, t_seconds)).collect()
    }

    /// Position of satellite `(orbit, index)` in the satellite vector.
    pub fn offset(&self, orbit: u32, index: u32) -> usize {
        orbit as usize * self.spec.sats_per_orbit as usize + index as usize
    }

    /// +grid neighbour pairs (wrapping in both directions), deduplicated, as
    /// satellite offsets with `a < b`.
    pub fn isl_pairs(&self) -> Vec<(usize, usize)> {
        if !self.spec.isl {
            return Vec::new();
        }
        let p = self.spec.orbit_count;
        let q = self.spec.sats_per_orbit;
        let mut pairs = Vec::with_capacity(2 * self.len());
        for orbit in 0..p {
            for index in 0..q {
                let here = self.offset(orbit, index);
                for there in [self.offset(orbit, (index + 1) % q), self.offset((orbit + 1) % p, index)] {
                    if here != there {
                        pairs.push((here.min(there), here.max(there)));
                    }
                }
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        pairs
    }
}
