//! Choosing a camera that frames a box with a margin on every side.

use super::{CameraError, CameraState, ScreenProjector, Viewport, MAX_PITCH, MIN_ZOOM, TILE_SIZE};
use crate::geo::{normalize_bearing, project, unproject_clamped, GeoBounds};

pub const DEFAULT_MAX_FIT_ZOOM: f64 = 16.0;
pub const MAX_MARGIN: f64 = 0.45;
/// Zoom decrement used while pulling back a pitched camera.
pub const PITCH_ZOOM_STEP: f64 = 0.05;
/// Pixel slack absorbing floating-point noise in the containment test.
const MARGIN_SLACK_PX: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Zoom used for point-like bounds and upper clamp for every fit.
    pub max_fit_zoom: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { max_fit_zoom: DEFAULT_MAX_FIT_ZOOM }
    }
}

pub fn fit_bounds(
    bounds: &GeoBounds,
    viewport: Viewport,
    margin_frac: f64,
    pitch: f64,
    bearing: f64,
) -> Result<CameraState, CameraError> {
    fit_bounds_with(bounds, viewport, margin_frac, pitch, bearing, &FitOptions::default())
}

/// Frames `bounds` so that each side keeps at least `margin_frac` of the
/// viewport dimension free.
///
/// At pitch 0 the zoom is solved in closed form from the box extents along
/// the screen axes. A pitched camera starts from that zoom and backs off in
/// [`PITCH_ZOOM_STEP`] increments until the projected box corners clear the
/// margin, stopping at zoom 0.
pub fn fit_bounds_with(
    bounds: &GeoBounds,
    viewport: Viewport,
    margin_frac: f64,
    pitch: f64,
    bearing: f64,
    options: &FitOptions,
) -> Result<CameraState, CameraError> {
    if !margin_frac.is_finite() || !(0.0..=MAX_MARGIN).contains(&margin_frac) {
        return Err(CameraError::OutOfRange { field: "margin", value: margin_frac });
    }
    if !pitch.is_finite() || !(0.0..=MAX_PITCH).contains(&pitch) {
        return Err(CameraError::OutOfRange { field: "pitch", value: pitch });
    }
    if !bearing.is_finite() {
        return Err(CameraError::NotFinite { field: "bearing" });
    }
    let bounds = GeoBounds::new(bounds.west, bounds.south, bounds.east, bounds.north)?;
    let (min, max) = bounds.projected();
    let mid = min.lerp(&max, 0.5);
    let center = unproject_clamped(mid);
    let bearing = normalize_bearing(bearing);

    if bounds.is_point() {
        let point = crate::geo::GeoPoint::new(bounds.west, bounds.south)?;
        return CameraState::new(point, options.max_fit_zoom, pitch, bearing);
    }
    if min.x == max.x && min.y == max.y {
        return CameraState::new(center, options.max_fit_zoom, pitch, bearing);
    }

    // Extents along the rotated screen axes; for bearing 0 these are the
    // plain projected width and height.
    let (sb, cb) = bearing.to_radians().sin_cos();
    let half_w = (max.x - min.x) / 2.0;
    let half_h = (max.y - min.y) / 2.0;
    let ext_right = 2.0 * (half_w * cb.abs() + half_h * sb.abs());
    let ext_up = 2.0 * (half_w * sb.abs() + half_h * cb.abs());
    let usable = 1.0 - 2.0 * margin_frac;
    let scale_w = usable * viewport.w() / (ext_right * TILE_SIZE);
    let scale_h = usable * viewport.h() / (ext_up * TILE_SIZE);
    let mut zoom = scale_w.min(scale_h).log2().clamp(MIN_ZOOM, options.max_fit_zoom);

    let mut state = CameraState::new(center, zoom, pitch, bearing)?;
    if pitch > 0.0 {
        let corners = bounds.corners().map(project);
        while zoom > MIN_ZOOM && !clears_margin(&state, viewport, margin_frac, &corners) {
            zoom = (zoom - PITCH_ZOOM_STEP).max(MIN_ZOOM);
            state = CameraState::new(center, zoom, pitch, bearing)?;
        }
    }
    Ok(state)
}

/// True when every corner lands inside the viewport shrunk by the margin.
pub fn clears_margin(
    state: &CameraState,
    viewport: Viewport,
    margin_frac: f64,
    corners: &[crate::geo::MercatorPoint],
) -> bool {
    let p = ScreenProjector::new(state, viewport);
    let (mx, my) = (margin_frac * viewport.w(), margin_frac * viewport.h());
    corners.iter().all(|&c| match p.to_screen(c) {
        None => false,
        Some((sx, sy)) => {
            sx >= mx - MARGIN_SLACK_PX
                && sx <= viewport.w() - mx + MARGIN_SLACK_PX
                && sy >= my - MARGIN_SLACK_PX
                && sy <= viewport.h() - my + MARGIN_SLACK_PX
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::footprint;
    use crate::geo::{GeoPoint, MAX_LAT};

    #[test]
    fn whole_world_fits_one_tile() {
        let b = GeoBounds::new(-180.0, -MAX_LAT, 180.0, MAX_LAT).unwrap();
        let v = Viewport::new(512, 512).unwrap();
        let s = fit_bounds(&b, v, 0.0, 0.0, 0.0).unwrap();
        assert!(s.center().lon().abs() < 1e-9 && s.center().lat().abs() < 1e-6);
        assert!(s.zoom().abs() < 1e-7);
    }

    #[test]
    fn twenty_degree_box_in_800_by_600() {
        let b = GeoBounds::new(-10.0, -10.0, 10.0, 10.0).unwrap();
        let v = Viewport::new(800, 600).unwrap();
        let s = fit_bounds(&b, v, 0.1, 0.0, 0.0).unwrap();
        assert!(s.center().lon().abs() < 1e-12 && s.center().lat().abs() < 1e-9);
        // Height limits: log2(480 / (0.0558397759 · 512)), 40-digit oracle.
        assert!((s.zoom() - 4.069_453_634_517_036).abs() < 1e-9);
        assert!((s.zoom() - 4.070).abs() <= 0.001);
    }

    #[test]
    fn point_bounds_use_max_fit_zoom() {
        let p = GeoPoint::new(3.0, 4.0).unwrap();
        let v = Viewport::new(800, 600).unwrap();
        let s = fit_bounds(&GeoBounds::from_point(p), v, 0.1, 0.0, 0.0).unwrap();
        assert_eq!(s.zoom(), 16.0);
        assert_eq!(s.center(), p);
        let opts = FitOptions { max_fit_zoom: 12.0 };
        let s = fit_bounds_with(&GeoBounds::from_point(p), v, 0.1, 0.0, 0.0, &opts).unwrap();
        assert_eq!(s.zoom(), 12.0);
    }

    #[test]
    fn invalid_margin_is_rejected() {
        let b = GeoBounds::new(0.0, 0.0, 1.0, 1.0).unwrap();
        let v = Viewport::new(100, 100).unwrap();
        assert!(fit_bounds(&b, v, 0.5, 0.0, 0.0).is_err());
        assert!(fit_bounds(&b, v, -0.1, 0.0, 0.0).is_err());
        assert!(fit_bounds(&b, v, 0.1, 70.0, 0.0).is_err());
    }

    #[test]
    fn flat_fit_footprint_contains_box() {
        let b = GeoBounds::new(2.0, 40.0, 9.0, 44.0).unwrap();
        let v = Viewport::new(1024, 768).unwrap();
        let s = fit_bounds(&b, v, 0.1, 0.0, 0.0).unwrap();
        let fp = footprint(&s, v);
        for c in b.corners() {
            assert!(fp.contains(project(c)));
        }
    }

    #[test]
    fn pitched_and_rotated_fits_clear_the_margin() {
        let b = GeoBounds::new(-5.0, 30.0, 7.0, 36.0).unwrap();
        let v = Viewport::new(900, 500).unwrap();
        let corners = b.corners().map(project);
        for &(pitch, bearing) in &[(30.0, 0.0), (60.0, 0.0), (0.0, 40.0), (60.0, 200.0)] {
            let s = fit_bounds(&b, v, 0.1, pitch, bearing).unwrap();
            assert!(clears_margin(&s, v, 0.1, &corners), "pitch {pitch} bearing {bearing}");
        }
    }
}
