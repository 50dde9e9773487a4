use std::path::Path;

use serde::{Deserialize, Serialize};

use super::geometry::normalize_longitude;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroundKind {
    UserRegion,
    Gateway,
    Origin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundNode {
    pub name: String,
    pub kind: GroundKind,
    pub latitude_deg: f64,
    pub longitude_deg: f64,
}

impl GroundNode {
    /// Builds a node, normalising the longitude to `[-180, 180)`.
    pub fn new(name: impl Into<String>, kind: GroundKind, latitude_deg: f64, longitude_deg: f64) -> Result<Self> {
        let node = Self {
            name: name.into(),
            kind,
            latitude_deg,
            longitude_deg: normalize_longitude(longitude_deg),
        };
        node.validate()?;
        Ok(node)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.latitude_deg.is_finite() || self.latitude_deg.abs() > 90.0 {
            return Err(Error::InvalidGroundNode {
                node: self.name.clone(),
                reason: format!("latitude {} outside [-90, 90]", self.latitude_deg),
            });
        }
        if !self.longitude_deg.is_finite() || !(-180.0..180.0).contains(&self.longitude_deg) {
            return Err(Error::InvalidGroundNode {
                node: self.name.clone(),
                reason: format!("longitude {} outside [-180, 180)", self.longitude_deg),
            });
        }
        if self.name.is_empty() {
            return Err(Error::InvalidGroundNode {
                node: String::new(),
                reason: "empty name".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
struct SiteRow {
    name: String,
    lat_deg: f64,
    lon_deg: f64,
}

/// Reads a `name,lat_deg,lon_deg` site list (the gateway file format).
pub fn load_sites(path: &Path, kind: GroundKind) -> Result<Vec<GroundNode>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_to_error(path, e))?;
    let mut nodes = Vec::new();
    for (i, row) in reader.deserialize::<SiteRow>().enumerate() {
        let line = i as u64 + 2;
        let row = row.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line,
            reason: e.to_string(),
        })?;
        let node = GroundNode::new(row.name, kind, row.lat_deg, row.lon_deg).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line,
            reason: e.to_string(),
        })?;
        nodes.push(node);
    }
    Ok(nodes)
}

/// Writes a `name,lat_deg,lon_deg` site list.
pub fn save_sites(path: &Path, nodes: &[GroundNode]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_to_error(path, e))?;
    w.write_record(["name", "lat_deg", "lon_deg"])?;
    for n in nodes {
        w.write_record([n.name.clone(), n.latitude_deg.to_string(), n.longitude_deg.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub(crate) fn csv_to_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            reason: format!("{other:?}"),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn site_file_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gw.csv");
        std::fs::write(&path, "name,lat_deg,lon_deg\ngw-a,47.6,-122.3\ngw-b, 25.0 , 190\n").unwrap();
        let nodes = load_sites(&path, GroundKind::Gateway).unwrap();
        assert_eq!(nodes.len(), 2);
        assert_eq!(nodes[1].longitude_deg, -170.0);

        let out = dir.path().join("out.csv");
        save_sites(&out, &nodes).unwrap();
        assert_eq!(load_sites(&out, GroundKind::Gateway).unwrap(), nodes);

        std::fs::write(&path, "name,lat_deg,lon_deg\ngw-a,95.0,0\n").unwrap();
        match load_sites(&path, GroundKind::Gateway) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
