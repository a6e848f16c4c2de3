//! What a camera movement serves: a location, region, path, a set of those,
//! or nothing at all.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geo::{
    unproject_clamped, GeoBounds, GeoError, GeoPoint, GeoPolygon, GeoPolyline,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum GeospatialTarget {
    Location {
        point: GeoPoint,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
    Region {
        polygon: GeoPolygon,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
    Path {
        path: GeoPolyline,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
    Multiple {
        members: Vec<GeospatialTarget>,
    },
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TargetKind {
    Location,
    Region,
    Path,
    Multiple,
    None,
}

impl TargetKind {
    pub const ALL: [TargetKind; 5] = [
        TargetKind::Location,
        TargetKind::Region,
        TargetKind::Path,
        TargetKind::Multiple,
        TargetKind::None,
    ];

    pub fn parse(s: &str) -> Option<TargetKind> {
        TargetKind::ALL.into_iter().find(|k| k.to_string().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for TargetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TargetKind::Location => "Location",
            TargetKind::Region => "Region",
            TargetKind::Path => "Path",
            TargetKind::Multiple => "Multiple",
            TargetKind::None => "None",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TargetError {
    #[error("multiple target must have at least one member")]
    EmptyMultiple,
    #[error("multiple target may not contain a None member")]
    NoneMember,
    #[error("multiple targets may not be nested")]
    NestedMultiple,
}

impl GeospatialTarget {
    pub fn location(point: GeoPoint) -> Self {
        GeospatialTarget::Location { point, name: None }
    }

    pub fn region(polygon: GeoPolygon) -> Self {
        GeospatialTarget::Region { polygon, name: None }
    }

    pub fn path(path: GeoPolyline) -> Self {
        GeospatialTarget::Path { path, name: None }
    }

    /// Checked constructor enforcing the non-empty, flat, None-free rule.
    pub fn multiple(members: Vec<GeospatialTarget>) -> Result<Self, TargetError> {
        if members.is_empty() {
            return Err(TargetError::EmptyMultiple);
        }
        for m in &members {
            match m {
                GeospatialTarget::None => return Err(TargetError::NoneMember),
                GeospatialTarget::Multiple { .. } => return Err(TargetError::NestedMultiple),
                _ => {}
            }
        }
        Ok(GeospatialTarget::Multiple { members })
    }

    pub fn kind(&self) -> TargetKind {
        match self {
            GeospatialTarget::Location { .. } => TargetKind::Location,
            GeospatialTarget::Region { .. } => TargetKind::Region,
            GeospatialTarget::Path { .. } => TargetKind::Path,
            GeospatialTarget::Multiple { .. } => TargetKind::Multiple,
            GeospatialTarget::None => TargetKind::None,
        }
    }

    pub fn name(&self) -> Option<&str> {
        match self {
            GeospatialTarget::Location { name, .. }
            | GeospatialTarget::Region { name, .. }
            | GeospatialTarget::Path { name, .. } => name.as_deref(),
            _ => None,
        }
    }

    pub fn with_name(self, new_name: Option<String>) -> Self {
        match self {
            GeospatialTarget::Location { point, .. } => {
                GeospatialTarget::Location { point, name: new_name }
            }
            GeospatialTarget::Region { polygon, .. } => {
                GeospatialTarget::Region { polygon, name: new_name }
            }
            GeospatialTarget::Path { path, .. } => GeospatialTarget::Path { path, name: new_name },
            other => other,
        }
    }

    /// All vertices of the target's geometry.
    pub fn points(&self) -> Vec<GeoPoint> {
        match self {
            GeospatialTarget::Location { point, .. } => vec![*point],
            GeospatialTarget::Region { polygon, .. } => polygon.ring().to_vec(),
            GeospatialTarget::Path { path, .. } => path.vertices().to_vec(),
            GeospatialTarget::Multiple { members } => {
                members.iter().flat_map(|m| m.points()).collect()
            }
            GeospatialTarget::None => Vec::new(),
        }
    }

    /// Label for the location band of the timeline: the name when known,
    /// otherwise `"lon, lat"` of the centroid.
    pub fn label(&self) -> String {
        match self {
            GeospatialTarget::None => "(no target)".to_string(),
            GeospatialTarget::Multiple { members } => {
                let names: Option<Vec<&str>> = members.iter().map(|m| m.name()).collect();
                match names {
                    Some(names) => names.join(" + "),
                    None => coordinate_label(self),
                }
            }
            other => match other.name() {
                Some(n) => n.to_string(),
                None => coordinate_label(other),
            },
        }
    }
}

fn coordinate_label(target: &GeospatialTarget) -> String {
    match centroid_of(target) {
        Ok(c) => format!("{:.4}, {:.4}", c.lon(), c.lat()),
        Err(_) => "(no target)".to_string(),
    }
}

/// Minimal geographic box containing every point of the target.
pub fn bounds_of(target: &GeospatialTarget) -> Result<GeoBounds, GeoError> {
    match target {
        GeospatialTarget::None => Err(GeoError::NoGeometry("target is None")),
        GeospatialTarget::Multiple { members } if members.is_empty() => {
            Err(GeoError::NoGeometry("multiple target has no members"))
        }
        _ => GeoBounds::from_points(target.points())
            .ok_or(GeoError::NoGeometry("target has no vertices")),
    }
}

/// Focus point of a target. Regions use the projected area centroid; paths
/// and multiple targets use the center of their bounding box.
pub fn centroid_of(target: &GeospatialTarget) -> Result<GeoPoint, GeoError> {
    match target {
        GeospatialTarget::Location { point, .. } => Ok(*point),
        GeospatialTarget::Region { polygon, .. } => {
            if polygon.signed_projected_area() == 0.0 {
                return Err(GeoError::DegenerateRing);
            }
            Ok(unproject_clamped(polygon.projected_centroid()))
        }
        _ => {
            let b = bounds_of(target)?;
            let (min, max) = b.projected();
            Ok(unproject_clamped(min.lerp(&max, 0.5)))
        }
    }
}

/// Projected midpoint of a box; the framing center used by viewport fitting.
pub fn bounds_center(b: &GeoBounds) -> GeoPoint {
    let (min, max) = b.projected();
    unproject_clamped(min.lerp(&max, 0.5))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gp(lon: f64, lat: f64) -> GeoPoint {
        GeoPoint::new(lon, lat).unwrap()
    }

    fn square(x0: f64, y0: f64, size: f64) -> GeoPolygon {
        GeoPolygon::new(vec![
            gp(x0, y0),
            gp(x0 + size, y0),
            gp(x0 + size, y0 + size),
            gp(x0, y0 + size),
        ])
        .unwrap()
    }

    #[test]
    fn bounds_examples() {
        let b = bounds_of(&GeospatialTarget::location(gp(2.0, 3.0))).unwrap();
        assert_eq!((b.west, b.east, b.south, b.north), (2.0, 2.0, 3.0, 3.0));

        let path = GeoPolyline::new(vec![gp(0.0, 0.0), gp(10.0, -5.0)]).unwrap();
        let b = bounds_of(&GeospatialTarget::path(path)).unwrap();
        assert_eq!((b.west, b.east, b.south, b.north), (0.0, 10.0, -5.0, 0.0));

        let multi = GeospatialTarget::multiple(vec![
            GeospatialTarget::location(gp(-1.0, -1.0)),
            GeospatialTarget::region(square(0.0, 0.0, 2.0)),
        ])
        .unwrap();
        let b = bounds_of(&multi).unwrap();
        assert_eq!((b.west, b.east, b.south, b.north), (-1.0, 2.0, -1.0, 2.0));
    }

    #[test]
    fn bounds_of_nothing_fails() {
        assert!(matches!(bounds_of(&GeospatialTarget::None), Err(GeoError::NoGeometry(_))));
        let empty = GeospatialTarget::Multiple { members: vec![] };
        assert!(matches!(bounds_of(&empty), Err(GeoError::NoGeometry(_))));
        assert!(centroid_of(&GeospatialTarget::None).is_err());
    }

    #[test]
    fn multiple_constructor_rules() {
        assert_eq!(GeospatialTarget::multiple(vec![]), Err(TargetError::EmptyMultiple));
        assert_eq!(
            GeospatialTarget::multiple(vec![GeospatialTarget::None]),
            Err(TargetError::NoneMember)
        );
        let inner = GeospatialTarget::multiple(vec![GeospatialTarget::location(gp(0.0, 0.0))]);
        assert_eq!(
            GeospatialTarget::multiple(vec![inner.unwrap()]),
            Err(TargetError::NestedMultiple)
        );
    }

    #[test]
    fn centroid_examples() {
        let c = centroid_of(&GeospatialTarget::location(gp(5.0, 6.0))).unwrap();
        assert_eq!(c, gp(5.0, 6.0));

        let c = centroid_of(&GeospatialTarget::region(square(0.0, 0.0, 2.0))).unwrap();
        assert!((c.lon() - 1.0).abs() < 1e-12);
        // Projected-space symmetry does not survive unprojection exactly.
        assert!((c.lat() - 1.0).abs() < 1e-3);
        assert!((c.lat() - 1.000_152_343_516_586_5).abs() < 1e-9);
    }

    #[test]
    fn l_shape_centroid_matches_shoelace_oracle() {
        let ring = vec![
            gp(0.0, 0.0),
            gp(2.0, 0.0),
            gp(2.0, 1.0),
            gp(1.0, 1.0),
            gp(1.0, 2.0),
            gp(0.0, 2.0),
        ];
        let poly = GeoPolygon::new(ring).unwrap();
        // Frozen from a 40-digit shoelace evaluation on the projected ring.
        let m = poly.projected_centroid();
        assert!((m.x - 0.502_314_720_775_607).abs() < 1e-13);
        assert!((m.y - 0.497_684_738_457_158).abs() < 1e-13);
        let c = centroid_of(&GeospatialTarget::region(poly)).unwrap();
        assert!((c.lon() - 0.833_299_479_218_536_3).abs() < 1e-9);
        assert!((c.lat() - 0.833_464_759_426_744_9).abs() < 1e-9);
    }

    #[test]
    fn labels_fall_back_to_coordinates() {
        let named = GeospatialTarget::location(gp(1.0, 2.0)).with_name(Some("Chicago".into()));
        assert_eq!(named.label(), "Chicago");
        assert_eq!(GeospatialTarget::location(gp(1.0, 2.0)).label(), "1.0000, 2.0000");
    }
}
