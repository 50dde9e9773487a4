use std::ops::{Add, Mul, Sub};

use crate::{Error, Result};

/// Mean Earth radius of the spherical Earth model, km.
pub const EARTH_RADIUS_KM: f64 = 6371.0;
/// Standard gravitational parameter of the Earth, km^3/s^2.
pub const EARTH_MU_KM3_S2: f64 = 398_600.441_8;
/// Sidereal rotation period of the Earth, seconds.
pub const SIDEREAL_DAY_S: f64 = 86_164.090_5;
/// Speed of light, km per millisecond.
pub const LIGHT_KM_PER_MS: f64 = 299_792.458 / 1000.0;
/// Altitude of the geostationary ring, km.
pub const GEO_ALTITUDE_KM: f64 = 35_786.0;

/// Earth-centred Cartesian vector, km.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, other: Vec3) -> f64 {
        (self - other).norm()
    }

    /// Rotation about the z axis by `angle` radians.
    pub fn rotate_z(self, angle: f64) -> Vec3 {
        let (s, c) = angle.sin_cos();
        Vec3::new(c * self.x - s * self.y, s * self.x + c * self.y, self.z)
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, k: f64) -> Vec3 {
        Vec3::new(self.x * k, self.y * k, self.z * k)
    }
}

/// Earth-fixed position of a point at `radius_km` from the centre.
pub fn geodetic_to_ecef(lat_deg: f64, lon_deg: f64, radius_km: f64) -> Vec3 {
    let (lat, lon) = (lat_deg.to_radians(), lon_deg.to_radians());
    Vec3::new(
        radius_km * lat.cos() * lon.cos(),
        radius_km * lat.cos() * lon.sin(),
        radius_km * lat.sin(),
    )
}

/// Earth rotation angle after `t_seconds`, radians. Zero at the epoch, so the
/// inertial and Earth-fixed frames coincide at t = 0.
pub fn earth_rotation_angle(t_seconds: f64) -> f64 {
    2.0 * std::f64::consts::PI * t_seconds / SIDEREAL_DAY_S
}

/// Elevation of `sat` above the local horizon of `ground`, degrees.
///
/// Both positions must be expressed in the same frame. Negative values mean
/// the satellite is below the horizon.
pub fn elevation_angle(sat: Vec3, ground: Vec3) -> Result<f64> {
    let radius = sat.norm();
    if radius <= EARTH_RADIUS_KM {
        return Err(Error::BelowSurface { radius_km: radius });
    }
    let up = ground * (1.0 / ground.norm());
    let los = sat - ground;
    let vertical = los.dot(up);
    // atan2 stays accurate near the zenith where asin does not.
    let horizontal = (los - up * vertical).norm();
    Ok(vertical.atan2(horizontal).to_degrees())
}

/// Straight-line propagation delay between two points, ms.
pub fn light_delay_ms(a: Vec3, b: Vec3) -> f64 {
    a.distance(b) / LIGHT_KM_PER_MS
}

/// Normalises a longitude to `[-180, 180)`.
pub fn normalize_longitude(lon_deg: f64) -> f64 {
    let wrapped = (lon_deg + 180.0).rem_euclid(360.0) - 180.0;
    if wrapped >= 180.0 {
        wrapped - 360.0
    } else {
        wrapped
    }
}
