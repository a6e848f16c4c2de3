//! Datasets, visualization layers and target selection.

mod hex;
mod load;
mod select;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{GeoError, GeoPoint, GeoPolygon, GeoPolyline};
use crate::target::GeospatialTarget;

pub use hex::{hex_aggregate, HexGrid};
pub use load::{load_csv, load_features, load_geojson, CsvOptions, DataFormat};
pub use select::{inflated_bounds, select_by_lasso, select_nearest, METERS_PER_DEGREE};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DataError {
    #[error("malformed document: {0}")]
    Malformed(String),
    #[error("missing coordinate column '{0}'")]
    MissingColumn(String),
    #[error("{reason} at record {record}{detail}")]
    Record { record: usize, reason: String, detail: String },
    #[error("duplicate feature id '{0}'")]
    DuplicateId(String),
    #[error("no feature at point")]
    NothingAtPoint,
    #[error("{0}")]
    Layer(String),
    #[error(transparent)]
    Geo(#[from] GeoError),
}

impl DataError {
    /// Wraps a geometry error with the 1-based record number.
    pub(crate) fn at(record: usize, err: GeoError) -> Self {
        let (reason, detail) = match &err {
            GeoError::OutOfRange { field, value } => (format!("{field} out of range"), format!(": {value}")),
            other => ("invalid geometry".to_string(), format!(": {other}")),
        };
        DataError::Record { record, reason, detail }
    }

    pub(crate) fn record(record: usize, reason: impl Into<String>) -> Self {
        DataError::Record { record, reason: reason.into(), detail: String::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", content = "coordinates")]
pub enum Geometry {
    Point(GeoPoint),
    LineString(GeoPolyline),
    Polygon(GeoPolygon),
}

impl Geometry {
    pub fn vertices(&self) -> Vec<GeoPoint> {
        match self {
            Geometry::Point(p) => vec![*p],
            Geometry::LineString(l) => l.vertices().to_vec(),
            Geometry::Polygon(p) => p.ring().to_vec(),
        }
    }
}

/// Scalar property value; nested JSON is kept as its serialized text.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum PropertyValue {
    Null,
    Bool(bool),
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Feature {
    pub id: String,
    pub geometry: Geometry,
    pub properties: BTreeMap<String, PropertyValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl Feature {
    /// The feature as a camera target, carrying its name.
    pub fn target(&self) -> GeospatialTarget {
        let t = match &self.geometry {
            Geometry::Point(p) => GeospatialTarget::location(*p),
            Geometry::LineString(l) => GeospatialTarget::path(l.clone()),
            Geometry::Polygon(p) => GeospatialTarget::region(p.clone()),
        };
        t.with_name(self.name.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum LayerKind {
    Scatter,
    Line,
    Region,
    #[serde(rename = "hexagon3D")]
    Hexagon3D,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataLayer {
    pub kind: LayerKind,
    pub features: Vec<Feature>,
    /// Present exactly for [`LayerKind::Hexagon3D`].
    pub hex: Option<HexGrid>,
}

impl DataLayer {
    /// Flat layer; every feature must have the geometry the kind draws.
    pub fn new(kind: LayerKind, features: Vec<Feature>) -> Result<Self, DataError> {
        for (i, f) in features.iter().enumerate() {
            let ok = matches!(
                (kind, &f.geometry),
                (LayerKind::Scatter | LayerKind::Hexagon3D, Geometry::Point(_))
                    | (LayerKind::Line, Geometry::LineString(_))
                    | (LayerKind::Region, Geometry::Polygon(_))
            );
            if !ok {
                return Err(DataError::record(i + 1, format!("geometry does not fit a {kind:?} layer")));
            }
        }
        if kind == LayerKind::Hexagon3D {
            return Err(DataError::Layer("hexagon layers are built with DataLayer::hexagon".into()));
        }
        Ok(Self { kind, features, hex: None })
    }

    /// Extruded hexagon heatmap over point features.
    pub fn hexagon(features: Vec<Feature>, cell_radius_m: f64, height_scale_m: f64) -> Result<Self, DataError> {
        if !height_scale_m.is_finite() || height_scale_m < 0.0 {
            return Err(DataError::Layer(format!("height scale must be non-negative, got {height_scale_m}")));
        }
        let mut points = Vec::with_capacity(features.len());
        for (i, f) in features.iter().enumerate() {
            match f.geometry {
                Geometry::Point(p) => points.push(p),
                _ => return Err(DataError::record(i + 1, "hexagon layers need point features")),
            }
        }
        let grid = hex_aggregate(&points, cell_radius_m, height_scale_m)?;
        Ok(Self { kind: LayerKind::Hexagon3D, features, hex: Some(grid) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layer_kinds_must_match_geometry() {
        let fs = load_csv("lon,lat\n0,0\n1,1\n", &CsvOptions::default()).unwrap();
        assert!(DataLayer::new(LayerKind::Scatter, fs.clone()).is_ok());
        assert!(DataLayer::new(LayerKind::Region, fs.clone()).is_err());
        let hex = DataLayer::hexagon(fs, 1000.0, 10.0).unwrap();
        assert_eq!(hex.hex.unwrap().total_count(), 2);
    }

    #[test]
    fn record_errors_read_naturally() {
        let err = DataError::at(1, GeoError::OutOfRange { field: "latitude", value: 95.0 });
        assert_eq!(err.to_string(), "latitude out of range at record 1: 95");
    }
}
