//! Map camera state, viewport fitting, interpolation and fly-to trajectories.

mod fit;
mod flyto;
mod screen;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{normalize_bearing, project, unproject_clamped, GeoError, GeoPoint};

pub use fit::{clears_margin, fit_bounds, fit_bounds_with, FitOptions, DEFAULT_MAX_FIT_ZOOM, MAX_MARGIN};
pub use flyto::{fly_to, fly_to_with_span, GapFillMode, Trajectory, FLY_TO_RHO};
pub use screen::{footprint, Footprint, ScreenProjector};

/// World size in pixels at zoom 0.
pub const TILE_SIZE: f64 = 512.0;
pub const MIN_ZOOM: f64 = 0.0;
pub const MAX_ZOOM: f64 = 22.0;
pub const MAX_PITCH: f64 = 60.0;
pub const DEFAULT_FOV: f64 = 45.0;
/// Equatorial radius used for ground resolution, in meters.
pub const EARTH_RADIUS_M: f64 = 6_378_137.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CameraError {
    #[error(transparent)]
    Geo(#[from] GeoError),
    #[error("{field} out of range: {value}")]
    OutOfRange { field: &'static str, value: f64 },
    #[error("{field} is not finite")]
    NotFinite { field: &'static str },
    #[error("field of view differs between states ({0} vs {1})")]
    FovMismatch(f64, f64),
    #[error("viewport must have positive width and height, got {0}x{1}")]
    EmptyViewport(u32, u32),
}

fn check(field: &'static str, value: f64, lo: f64, hi: f64) -> Result<f64, CameraError> {
    if !value.is_finite() {
        return Err(CameraError::NotFinite { field });
    }
    if value < lo || value > hi {
        return Err(CameraError::OutOfRange { field, value });
    }
    Ok(value)
}

/// One instant of the virtual map camera.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCameraState", into = "RawCameraState")]
pub struct CameraState {
    center: GeoPoint,
    zoom: f64,
    pitch: f64,
    bearing: f64,
    fov: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCameraState {
    lon: f64,
    lat: f64,
    zoom: f64,
    #[serde(default)]
    pitch: f64,
    #[serde(default)]
    bearing: f64,
    #[serde(default = "default_fov")]
    fov: f64,
}

fn default_fov() -> f64 {
    DEFAULT_FOV
}

impl TryFrom<RawCameraState> for CameraState {
    type Error = CameraError;
    fn try_from(r: RawCameraState) -> Result<Self, CameraError> {
        CameraState::new(GeoPoint::new(r.lon, r.lat)?, r.zoom, r.pitch, r.bearing)?.with_fov(r.fov)
    }
}

impl From<CameraState> for RawCameraState {
    fn from(s: CameraState) -> Self {
        RawCameraState {
            lon: s.center.lon(),
            lat: s.center.lat(),
            zoom: s.zoom,
            pitch: s.pitch,
            bearing: s.bearing,
            fov: s.fov,
        }
    }
}

impl CameraState {
    /// Validates ranges and normalizes the bearing into `[0, 360)`.
    pub fn new(center: GeoPoint, zoom: f64, pitch: f64, bearing: f64) -> Result<Self, CameraError> {
        check("zoom", zoom, MIN_ZOOM, MAX_ZOOM)?;
        check("pitch", pitch, 0.0, MAX_PITCH)?;
        if !bearing.is_finite() {
            return Err(CameraError::NotFinite { field: "bearing" });
        }
        Ok(Self { center, zoom, pitch, bearing: normalize_bearing(bearing), fov: DEFAULT_FOV })
    }

    /// Field of view must keep the top screen edge below the horizon at
    /// maximum pitch.
    pub fn with_fov(mut self, fov: f64) -> Result<Self, CameraError> {
        check("fov", fov, 1.0, 2.0 * (90.0 - MAX_PITCH) - 1e-9)?;
        self.fov = fov;
        Ok(self)
    }

    /// Builds a state, clamping zoom and pitch into range.
    pub fn clamped(center: GeoPoint, zoom: f64, pitch: f64, bearing: f64) -> Self {
        Self {
            center,
            zoom: zoom.clamp(MIN_ZOOM, MAX_ZOOM),
            pitch: pitch.clamp(0.0, MAX_PITCH),
            bearing: normalize_bearing(bearing),
            fov: DEFAULT_FOV,
        }
    }

    pub fn center(&self) -> GeoPoint {
        self.center
    }
    pub fn zoom(&self) -> f64 {
        self.zoom
    }
    pub fn pitch(&self) -> f64 {
        self.pitch
    }
    pub fn bearing(&self) -> f64 {
        self.bearing
    }
    pub fn fov(&self) -> f64 {
        self.fov
    }

    pub fn with_center(mut self, center: GeoPoint) -> Self {
        self.center = center;
        self
    }
    pub fn with_zoom_clamped(mut self, zoom: f64) -> Self {
        self.zoom = zoom.clamp(MIN_ZOOM, MAX_ZOOM);
        self
    }
    pub fn with_pitch_clamped(mut self, pitch: f64) -> Self {
        self.pitch = pitch.clamp(0.0, MAX_PITCH);
        self
    }
    pub fn with_bearing(mut self, bearing: f64) -> Self {
        self.bearing = normalize_bearing(bearing);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawViewport")]
pub struct Viewport {
    pub width: u32,
    pub height: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawViewport {
    width: u32,
    height: u32,
}

impl TryFrom<RawViewport> for Viewport {
    type Error = CameraError;
    fn try_from(r: RawViewport) -> Result<Self, CameraError> {
        Viewport::new(r.width, r.height)
    }
}

impl Viewport {
    pub fn new(width: u32, height: u32) -> Result<Self, CameraError> {
        if width == 0 || height == 0 {
            return Err(CameraError::EmptyViewport(width, height));
        }
        Ok(Self { width, height })
    }

    pub fn w(&self) -> f64 {
        self.width as f64
    }
    pub fn h(&self) -> f64 {
        self.height as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum EasingKind {
    #[default]
    Linear,
    EaseInOut,
}

impl EasingKind {
    pub fn apply(self, u: f64) -> f64 {
        match self {
            EasingKind::Linear => u,
            EasingKind::EaseInOut => u * u * (3.0 - 2.0 * u),
        }
    }
}

/// Signed bearing change along the shorter arc; a half-turn goes clockwise.
pub fn bearing_delta(from: f64, to: f64) -> f64 {
    let d = (to - from).rem_euclid(360.0);
    if d > 180.0 {
        d - 360.0
    } else {
        d
    }
}

/// Componentwise blend of two states at eased parameter `easing(t)`.
pub fn interpolate(
    a: &CameraState,
    b: &CameraState,
    t: f64,
    easing: EasingKind,
) -> Result<CameraState, CameraError> {
    check("interpolation parameter", t, 0.0, 1.0)?;
    if a.fov != b.fov {
        return Err(CameraError::FovMismatch(a.fov, b.fov));
    }
    Ok(blend(a, b, easing.apply(t)))
}

/// Unchecked blend at an already-eased parameter `e`; exact at 0 and 1.
pub(crate) fn blend(a: &CameraState, b: &CameraState, e: f64) -> CameraState {
    if e == 0.0 {
        return *a;
    }
    if e == 1.0 {
        return *b;
    }
    let center = if a.center == b.center {
        a.center
    } else {
        unproject_clamped(project(a.center).lerp(&project(b.center), e))
    };
    CameraState {
        center,
        zoom: lerp(a.zoom, b.zoom, e),
        pitch: lerp(a.pitch, b.pitch, e),
        bearing: normalize_bearing(a.bearing + bearing_delta(a.bearing, b.bearing) * e),
        fov: a.fov,
    }
}

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    if a == b {
        a
    } else {
        a + (b - a) * t
    }
}

/// Meters per screen pixel at the given latitude and zoom.
pub fn ground_resolution(lat: f64, zoom: f64) -> f64 {
    lat.to_radians().cos() * 2.0 * std::f64::consts::PI * EARTH_RADIUS_M / (TILE_SIZE * zoom.exp2())
}

/// Height of the camera above the center ground point, in meters.
pub fn camera_altitude_meters(state: &CameraState, viewport: Viewport) -> f64 {
    let half_fov = (state.fov / 2.0).to_radians();
    (viewport.h() / 2.0) * ground_resolution(state.center.lat(), state.zoom) / half_fov.tan()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(lon: f64, lat: f64, zoom: f64, pitch: f64, bearing: f64) -> CameraState {
        CameraState::new(GeoPoint::new(lon, lat).unwrap(), zoom, pitch, bearing).unwrap()
    }

    #[test]
    fn state_validation() {
        let c = GeoPoint::new(0.0, 0.0).unwrap();
        assert!(CameraState::new(c, 23.0, 0.0, 0.0).is_err());
        assert!(CameraState::new(c, 3.0, 61.0, 0.0).is_err());
        assert!(CameraState::new(c, 3.0, 0.0, f64::INFINITY).is_err());
        assert_eq!(CameraState::new(c, 3.0, 0.0, -90.0).unwrap().bearing(), 270.0);
        assert!(state(0.0, 0.0, 1.0, 0.0, 0.0).with_fov(75.0).is_err());
    }

    #[test]
    fn state_json_shape() {
        let s: CameraState =
            serde_json::from_str(r#"{"lon": 1, "lat": 2, "zoom": 3, "bearing": 370}"#).unwrap();
        assert_eq!(s.bearing(), 10.0);
        assert_eq!(s.fov(), 45.0);
        assert!(serde_json::from_str::<CameraState>(r#"{"lon":1,"lat":2,"zoom":3,"x":1}"#).is_err());
        let v = serde_json::to_value(s).unwrap();
        assert_eq!(v["lat"], 2.0);
    }

    #[test]
    fn interpolate_endpoints_and_midpoint() {
        let a = state(0.0, 0.0, 4.0, 0.0, 0.0);
        let b = state(10.0, 5.0, 8.0, 30.0, 90.0);
        assert_eq!(interpolate(&a, &b, 0.0, EasingKind::Linear).unwrap(), a);
        assert_eq!(interpolate(&a, &b, 1.0, EasingKind::EaseInOut).unwrap(), b);
        let mid = interpolate(&a, &b, 0.5, EasingKind::Linear).unwrap();
        assert_eq!(mid.zoom(), 6.0);
        assert_eq!(mid.pitch(), 15.0);
        assert!(interpolate(&a, &b, 1.5, EasingKind::Linear).is_err());
    }

    #[test]
    fn bearing_takes_the_short_way() {
        let a = state(0.0, 0.0, 4.0, 0.0, 350.0);
        let b = state(0.0, 0.0, 4.0, 0.0, 10.0);
        let mid = interpolate(&a, &b, 0.5, EasingKind::Linear).unwrap();
        assert!(mid.bearing() < 1e-9 || mid.bearing() > 360.0 - 1e-9);
        // Exact half-turn resolves clockwise.
        assert_eq!(bearing_delta(0.0, 180.0), 180.0);
        assert_eq!(bearing_delta(180.0, 0.0), 180.0);
        assert_eq!(bearing_delta(10.0, 350.0), -20.0);
    }

    #[test]
    fn ease_in_out_is_smoothstep() {
        assert_eq!(EasingKind::EaseInOut.apply(0.5), 0.5);
        assert!((EasingKind::EaseInOut.apply(0.25) - 0.15625).abs() < 1e-15);
    }

    #[test]
    fn fov_mismatch_is_rejected() {
        let a = state(0.0, 0.0, 4.0, 0.0, 0.0);
        let b = a.with_fov(30.0).unwrap();
        assert_eq!(interpolate(&a, &b, 0.5, EasingKind::Linear), Err(CameraError::FovMismatch(45.0, 30.0)));
    }

    #[test]
    fn altitude_examples() {
        let v = Viewport::new(512, 512).unwrap();
        let s = state(0.0, 0.0, 0.0, 0.0, 0.0);
        // 256 · 78271.517 / tan(22.5°), evaluated independently at 40 digits.
        let alt = camera_altitude_meters(&s, v);
        assert!((alt / 48_374_824.397_325_83 - 1.0).abs() < 1e-12);
        let up = state(0.0, 0.0, 1.0, 0.0, 0.0);
        assert!((camera_altitude_meters(&up, v) * 2.0 / alt - 1.0).abs() < 1e-12);
        let north = state(0.0, 85.05, 0.0, 0.0, 0.0);
        let ratio = camera_altitude_meters(&north, v) / alt;
        assert!((ratio - 85.05_f64.to_radians().cos()).abs() < 1e-12);
    }

    #[test]
    fn viewport_rejects_zero() {
        assert!(Viewport::new(0, 10).is_err());
        assert!(serde_json::from_str::<Viewport>(r#"{"width":0,"height":1}"#).is_err());
    }
}
