mod common;

use proptest::prelude::*;

use geostory::camera::{bearing_delta, fit_bounds, interpolate, CameraState, EasingKind, Viewport};
use geostory::data::{hex_aggregate, load_csv, CsvOptions};
use geostory::geo::{project, unproject, GeoBounds, GeoPoint};

use common::*;

#[test]
fn projection_round_trips() {
    projection_round_trip(10_000, 11).unwrap();
}

#[test]
fn fitted_bounds_keep_their_margin() {
    margin_property(1_000, 12).unwrap();
}

#[test]
fn shots_hold_their_fixed_parameters() {
    shot_constancy(500, 13).unwrap();
}

#[test]
fn timelines_tile_after_filling() {
    timeline_tiling(200, 14).unwrap();
}

#[test]
fn flyto_matches_the_closed_form() {
    flyto_oracle().unwrap();
}

fn state() -> impl Strategy<Value = CameraState> {
    (-179.0..179.0f64, -80.0..80.0f64, 0.0..22.0f64, 0.0..=60.0f64, -720.0..720.0f64)
        .prop_map(|(lon, lat, z, p, b)| CameraState::new(GeoPoint::new(lon, lat).unwrap(), z, p, b).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn projection_is_monotone(lon in -180.0..180.0f64, lat in -85.0..85.0f64, d in 1e-6..1.0f64) {
        let a = project(GeoPoint::new(lon, lat).unwrap());
        let b = project(GeoPoint::new((lon + d).min(180.0), (lat + d).min(85.0)).unwrap());
        prop_assert!(b.x >= a.x);
        prop_assert!(b.y <= a.y);
        let back = unproject(a).unwrap();
        prop_assert!((back.lon() - lon).abs() < 1e-9);
    }

    #[test]
    fn interpolation_hits_both_ends(a in state(), b in state(), t in 0.0..=1.0f64) {
        prop_assert_eq!(interpolate(&a, &b, 0.0, EasingKind::Linear).unwrap(), a);
        prop_assert_eq!(interpolate(&a, &b, 1.0, EasingKind::EaseInOut).unwrap(), b);
        let m = interpolate(&a, &b, t, EasingKind::Linear).unwrap();
        // The bearing never sweeps more than half a turn.
        prop_assert!(bearing_delta(a.bearing(), m.bearing()).abs() <= 180.0 + 1e-9);
        prop_assert!(m.zoom() >= a.zoom().min(b.zoom()) - 1e-9 && m.zoom() <= a.zoom().max(b.zoom()) + 1e-9);
    }

    #[test]
    fn point_bounds_fit_at_max_zoom(lon in -170.0..170.0f64, lat in -80.0..80.0f64, w in 100u32..3000, h in 100u32..3000) {
        let p = GeoPoint::new(lon, lat).unwrap();
        let s = fit_bounds(&GeoBounds::from_point(p), Viewport::new(w, h).unwrap(), 0.1, 0.0, 0.0).unwrap();
        prop_assert_eq!(s.zoom(), 16.0);
        prop_assert_eq!(s.center(), p);
    }

    #[test]
    fn hexagon_counts_conserve_points(pts in prop::collection::vec((-100.0..-80.0f64, 30.0..45.0f64), 0..200), r in 1000.0..100_000.0f64) {
        let csv: String = std::iter::once("lon,lat".to_string())
            .chain(pts.iter().map(|(x, y)| format!("{x},{y}")))
            .collect::<Vec<_>>()
            .join("\n");
        let fs = load_csv(&csv, &CsvOptions::default()).unwrap();
        let points: Vec<GeoPoint> = fs.iter().flat_map(|f| f.geometry.vertices()).collect();
        let grid = hex_aggregate(&points, r, 1.0).unwrap();
        prop_assert_eq!(grid.total_count(), pts.len() as u64);
    }
}
