//! Geographic primitives and the normalized Web Mercator plane.
//!
//! Every planar computation in the crate (framing, centroids, arc length,
//! containment) happens in normalized Web Mercator space, where the world is
//! the unit square with `x` growing east and `y` growing south.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Latitude limit of the Web Mercator validity band, in degrees.
pub const MAX_LAT: f64 = 85.051129;
/// Longitude limit, in degrees.
pub const MAX_LON: f64 = 180.0;

/// Slack allowed on normalized coordinates fed to [`unproject`]; covers the
/// gap between [`MAX_LAT`] and the exact edge of the Mercator square.
const UNIT_SLACK: f64 = 1e-8;
/// Distance (world units) under which a point counts as lying on a polygon edge.
const EDGE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeoError {
    #[error("{field} out of range: {value}")]
    OutOfRange { field: &'static str, value: f64 },
    #[error("{field} is not finite")]
    NotFinite { field: &'static str },
    #[error("polyline needs at least 2 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon ring needs at least 3 vertices, got {0}")]
    TooFewRingVertices(usize),
    #[error("consecutive vertices {0} and {1} coincide after projection")]
    RepeatedVertex(usize, usize),
    #[error("degenerate polygon: ring has zero projected area")]
    DegenerateRing,
    #[error("geometry crosses the antimeridian between vertices {0} and {1}")]
    AntimeridianCrossing(usize, usize),
    #[error("bounds west {west} is east of east {east} (antimeridian crossing is not supported)")]
    InvertedBounds { west: f64, east: f64 },
    #[error("bounds south {south} is north of north {north}")]
    InvertedLatitudes { south: f64, north: f64 },
    #[error("no geometry: {0}")]
    NoGeometry(&'static str),
}

/// A longitude/latitude pair in degrees inside the Web Mercator band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGeoPoint", into = "RawGeoPoint")]
pub struct GeoPoint {
    lon: f64,
    lat: f64,
}

#[derive(Serialize, Deserialize)]
struct RawGeoPoint {
    lon: f64,
    lat: f64,
}

impl TryFrom<RawGeoPoint> for GeoPoint {
    type Error = GeoError;
    fn try_from(raw: RawGeoPoint) -> Result<Self, GeoError> {
        GeoPoint::new(raw.lon, raw.lat)
    }
}

impl From<GeoPoint> for RawGeoPoint {
    fn from(p: GeoPoint) -> Self {
        RawGeoPoint { lon: p.lon, lat: p.lat }
    }
}

impl GeoPoint {
    pub fn new(lon: f64, lat: f64) -> Result<Self, GeoError> {
        if !lon.is_finite() {
            return Err(GeoError::NotFinite { field: "longitude" });
        }
        if !lat.is_finite() {
            return Err(GeoError::NotFinite { field: "latitude" });
        }
        if !(-MAX_LON..=MAX_LON).contains(&lon) {
            return Err(GeoError::OutOfRange { field: "longitude", value: lon });
        }
        if !(-MAX_LAT..=MAX_LAT).contains(&lat) {
            return Err(GeoError::OutOfRange { field: "latitude", value: lat });
        }
        Ok(Self { lon, lat })
    }

    pub fn lon(&self) -> f64 {
        self.lon
    }

    pub fn lat(&self) -> f64 {
        self.lat
    }
}

/// A point of the normalized Mercator plane.
///
/// Coordinates of real map positions lie in `[0, 1]`; values outside that
/// range are allowed for intermediate geometry such as pitched footprints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MercatorPoint {
    pub x: f64,
    pub y: f64,
}

impl MercatorPoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &MercatorPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn lerp(&self, other: &MercatorPoint, t: f64) -> MercatorPoint {
        MercatorPoint {
            x: self.x + (other.x - self.x) * t,
            y: self.y + (other.y - self.y) * t,
        }
    }
}

pub fn project(p: GeoPoint) -> MercatorPoint {
    let phi = p.lat.to_radians();
    MercatorPoint {
        x: (p.lon + 180.0) / 360.0,
        y: (1.0 - (PI / 4.0 + phi / 2.0).tan().ln() / PI) / 2.0,
    }
}

pub fn unproject(m: MercatorPoint) -> Result<GeoPoint, GeoError> {
    if !m.x.is_finite() {
        return Err(GeoError::NotFinite { field: "x" });
    }
    if !m.y.is_finite() {
        return Err(GeoError::NotFinite { field: "y" });
    }
    if m.x < -UNIT_SLACK || m.x > 1.0 + UNIT_SLACK {
        return Err(GeoError::OutOfRange { field: "x", value: m.x });
    }
    if m.y < -UNIT_SLACK || m.y > 1.0 + UNIT_SLACK {
        return Err(GeoError::OutOfRange { field: "y", value: m.y });
    }
    let lon = (m.x * 360.0 - 180.0).clamp(-MAX_LON, MAX_LON);
    let lat = (2.0 * (PI * (1.0 - 2.0 * m.y)).exp().atan() - PI / 2.0)
        .to_degrees()
        .clamp(-MAX_LAT, MAX_LAT);
    Ok(GeoPoint { lon, lat })
}

/// Like [`unproject`] but clamps the input onto the Mercator square first.
pub fn unproject_clamped(m: MercatorPoint) -> GeoPoint {
    let clamped = MercatorPoint::new(m.x.clamp(0.0, 1.0), m.y.clamp(0.0, 1.0));
    unproject(clamped).expect("clamped point is inside the Mercator square")
}

/// Axis-aligned geographic box. Never crosses the antimeridian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoBounds {
    pub west: f64,
    pub south: f64,
    pub east: f64,
    pub north: f64,
}

impl GeoBounds {
    pub fn new(west: f64, south: f64, east: f64, north: f64) -> Result<Self, GeoError> {
        GeoPoint::new(west, south)?;
        GeoPoint::new(east, north)?;
        if west > east {
            return Err(GeoError::InvertedBounds { west, east });
        }
        if south > north {
            return Err(GeoError::InvertedLatitudes { south, north });
        }
        Ok(Self { west, south, east, north })
    }

    pub fn from_point(p: GeoPoint) -> Self {
        Self { west: p.lon, south: p.lat, east: p.lon, north: p.lat }
    }

    /// Smallest box holding every point, or `None` for an empty iterator.
    pub fn from_points<I: IntoIterator<Item = GeoPoint>>(points: I) -> Option<Self> {
        points.into_iter().fold(None, |acc, p| match acc {
            None => Some(Self::from_point(p)),
            Some(b) => Some(b.extend(p)),
        })
    }

    pub fn extend(self, p: GeoPoint) -> Self {
        Self {
            west: self.west.min(p.lon),
            south: self.south.min(p.lat),
            east: self.east.max(p.lon),
            north: self.north.max(p.lat),
        }
    }

    pub fn union(self, other: GeoBounds) -> Self {
        Self {
            west: self.west.min(other.west),
            south: self.south.min(other.south),
            east: self.east.max(other.east),
            north: self.north.max(other.north),
        }
    }

    pub fn contains_bounds(&self, other: &GeoBounds) -> bool {
        self.west <= other.west
            && self.east >= other.east
            && self.south <= other.south
            && self.north >= other.north
    }

    pub fn contains_point(&self, p: GeoPoint) -> bool {
        (self.west..=self.east).contains(&p.lon) && (self.south..=self.north).contains(&p.lat)
    }

    pub fn is_point(&self) -> bool {
        self.west == self.east && self.south == self.north
    }

    /// Corners in order north-west, north-east, south-east, south-west.
    pub fn corners(&self) -> [GeoPoint; 4] {
        [
            GeoPoint { lon: self.west, lat: self.north },
            GeoPoint { lon: self.east, lat: self.north },
            GeoPoint { lon: self.east, lat: self.south },
            GeoPoint { lon: self.west, lat: self.south },
        ]
    }

    /// Projected `(min, max)` corners: `min` is the north-west corner.
    pub fn projected(&self) -> (MercatorPoint, MercatorPoint) {
        let nw = project(GeoPoint { lon: self.west, lat: self.north });
        let se = project(GeoPoint { lon: self.east, lat: self.south });
        (nw, se)
    }

    /// Builds a box from projected extremes, clamping onto the Mercator square.
    pub fn from_projected(min: MercatorPoint, max: MercatorPoint) -> Self {
        let nw = unproject_clamped(min);
        let se = unproject_clamped(max);
        Self { west: nw.lon, south: se.lat, east: se.lon, north: nw.lat }
    }

    pub fn center_lat(&self) -> f64 {
        (self.south + self.north) / 2.0
    }
}

fn check_antimeridian(points: &[GeoPoint], closed: bool) -> Result<(), GeoError> {
    let n = points.len();
    let last = if closed { n } else { n - 1 };
    for i in 0..last {
        let j = (i + 1) % n;
        if (points[j].lon - points[i].lon).abs() > 180.0 {
            return Err(GeoError::AntimeridianCrossing(i, j));
        }
    }
    Ok(())
}

/// An ordered path of at least two vertices.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct GeoPolyline {
    vertices: Vec<GeoPoint>,
}

impl GeoPolyline {
    pub fn new(vertices: Vec<GeoPoint>) -> Result<Self, GeoError> {
        if vertices.len() < 2 {
            return Err(GeoError::TooFewVertices(vertices.len()));
        }
        for i in 1..vertices.len() {
            if project(vertices[i - 1]) == project(vertices[i]) {
                return Err(GeoError::RepeatedVertex(i - 1, i));
            }
        }
        check_antimeridian(&vertices, false)?;
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[GeoPoint] {
        &self.vertices
    }

    pub fn projected(&self) -> Vec<MercatorPoint> {
        self.vertices.iter().copied().map(project).collect()
    }

    /// Total length in world units.
    pub fn projected_length(&self) -> f64 {
        self.projected().windows(2).map(|w| w[0].distance(&w[1])).sum()
    }

    /// Fractions of total arc length at which each vertex sits.
    pub fn vertex_fractions(&self) -> Vec<f64> {
        let pts = self.projected();
        let total = self.projected_length();
        let mut acc = 0.0;
        let mut out = vec![0.0];
        for w in pts.windows(2) {
            acc += w[0].distance(&w[1]);
            out.push(acc / total);
        }
        if let Some(last) = out.last_mut() {
            *last = 1.0;
        }
        out
    }
}

impl<'de> Deserialize<'de> for GeoPolyline {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let vertices = Vec::<GeoPoint>::deserialize(d)?;
        GeoPolyline::new(vertices).map_err(serde::de::Error::custom)
    }
}

/// A simple polygon ring, implicitly closed.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct GeoPolygon {
    ring: Vec<GeoPoint>,
}

impl GeoPolygon {
    /// A trailing vertex equal to the first (explicit closure) is dropped.
    pub fn new(mut ring: Vec<GeoPoint>) -> Result<Self, GeoError> {
        if ring.len() > 3 && ring.first() == ring.last() {
            ring.pop();
        }
        if ring.len() < 3 {
            return Err(GeoError::TooFewRingVertices(ring.len()));
        }
        check_antimeridian(&ring, true)?;
        let poly = Self { ring };
        if poly.signed_projected_area() == 0.0 {
            return Err(GeoError::DegenerateRing);
        }
        Ok(poly)
    }

    pub fn ring(&self) -> &[GeoPoint] {
        &self.ring
    }

    pub fn projected(&self) -> Vec<MercatorPoint> {
        self.ring.iter().copied().map(project).collect()
    }

    /// Shoelace area in world units (sign follows ring orientation).
    pub fn signed_projected_area(&self) -> f64 {
        signed_area(&self.projected())
    }

    /// Area-weighted centroid of the projected ring.
    pub fn projected_centroid(&self) -> MercatorPoint {
        let pts = self.projected();
        // Shift to the first vertex to keep the cross products well conditioned.
        let origin = pts[0];
        let n = pts.len();
        let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let p = pts[i];
            let q = pts[(i + 1) % n];
            let (px, py) = (p.x - origin.x, p.y - origin.y);
            let (qx, qy) = (q.x - origin.x, q.y - origin.y);
            let cross = px * qy - qx * py;
            a += cross;
            cx += (px + qx) * cross;
            cy += (py + qy) * cross;
        }
        a /= 2.0;
        MercatorPoint::new(origin.x + cx / (6.0 * a), origin.y + cy / (6.0 * a))
    }
}

impl<'de> Deserialize<'de> for GeoPolygon {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let ring = Vec::<GeoPoint>::deserialize(d)?;
        GeoPolygon::new(ring).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn signed_area(pts: &[MercatorPoint]) -> f64 {
    let n = pts.len();
    let mut a = 0.0;
    for i in 0..n {
        let p = pts[i];
        let q = pts[(i + 1) % n];
        a += p.x * q.y - q.x * p.y;
    }
    a / 2.0
}

/// Compass bearing (clockwise from north, `[0, 360)`) of the vector `from → to`.
pub fn projected_azimuth(from: MercatorPoint, to: MercatorPoint) -> f64 {
    // Mercator y grows southward, so north is -y.
    normalize_bearing((to.x - from.x).atan2(from.y - to.y).to_degrees())
}

pub fn normalize_bearing(deg: f64) -> f64 {
    let b = deg.rem_euclid(360.0);
    if b >= 360.0 {
        0.0
    } else {
        b
    }
}

/// Point at fraction `s` of the path's projected arc length, with the forward
/// azimuth of the segment containing it.
pub fn point_along_path(path: &GeoPolyline, s: f64) -> Result<(GeoPoint, f64), GeoError> {
    if !(0.0..=1.0).contains(&s) {
        return Err(GeoError::OutOfRange { field: "path fraction", value: s });
    }
    let pts = path.projected();
    let total = path.projected_length();
    let target = s * total;
    let last_seg = pts.len() - 2;
    if s == 1.0 {
        let azimuth = projected_azimuth(pts[last_seg], pts[last_seg + 1]);
        return Ok((*path.vertices.last().unwrap(), azimuth));
    }
    let mut acc = 0.0;
    for (i, w) in pts.windows(2).enumerate() {
        let len = w[0].distance(&w[1]);
        // Points exactly on a vertex take the outgoing segment.
        if target < acc + len || i == last_seg {
            let azimuth = projected_azimuth(w[0], w[1]);
            if target == acc {
                return Ok((path.vertices[i], azimuth));
            }
            let local = ((target - acc) / len).clamp(0.0, 1.0);
            return Ok((unproject_clamped(w[0].lerp(&w[1], local)), azimuth));
        }
        acc += len;
    }
    unreachable!("polyline has at least one segment")
}

fn on_segment(p: MercatorPoint, a: MercatorPoint, b: MercatorPoint) -> bool {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    let closest = MercatorPoint::new(a.x + t * dx, a.y + t * dy);
    closest.distance(&p) <= EDGE_EPS
}

/// Even-odd containment in projected space; points on the boundary are inside.
pub fn point_in_polygon(p: GeoPoint, poly: &GeoPolygon) -> bool {
    let q = project(p);
    let pts = poly.projected();
    let n = pts.len();
    let mut inside = false;
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        if on_segment(q, a, b) {
            return true;
        }
        if (a.y > q.y) != (b.y > q.y) {
            let x_cross = a.x + (q.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if q.x < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}
