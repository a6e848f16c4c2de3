//! Picking, lasso selection and framing boxes for extruded layers.

use std::cmp::Ordering;

use super::{DataError, DataLayer, Feature, Geometry};
use crate::camera::{CameraState, ScreenProjector, Viewport};
use crate::geo::{point_in_polygon, project, GeoBounds, GeoError, GeoPoint, GeoPolygon, MAX_LAT, MAX_LON};
use crate::target::{bounds_of, GeospatialTarget};

/// Meters per degree of latitude on the mean-radius sphere (6 371 008.8 m).
pub const METERS_PER_DEGREE: f64 = 111_195.080_233_532_92;

/// Features with a vertex inside the lasso, or the lasso itself as a region
/// when nothing is caught.
pub fn select_by_lasso(features: &[Feature], lasso: &GeoPolygon) -> GeospatialTarget {
    let members: Vec<GeospatialTarget> = features
        .iter()
        .filter(|f| f.geometry.vertices().into_iter().any(|v| point_in_polygon(v, lasso)))
        .map(Feature::target)
        .collect();
    if members.is_empty() {
        GeospatialTarget::region(lasso.clone())
    } else {
        GeospatialTarget::multiple(members).expect("feature targets are never None or Multiple")
    }
}

/// Feature closest to `p` on screen, within `radius_px` pixels.
pub fn select_nearest(
    features: &[Feature],
    p: GeoPoint,
    radius_px: f64,
    state: &CameraState,
    viewport: Viewport,
) -> Result<GeospatialTarget, DataError> {
    if !radius_px.is_finite() || radius_px <= 0.0 {
        return Err(DataError::Geo(GeoError::OutOfRange { field: "radius", value: radius_px }));
    }
    let proj = ScreenProjector::new(state, viewport);
    let click = proj.to_screen(project(p)).ok_or(DataError::NothingAtPoint)?;
    let mut best: Option<(f64, &Feature)> = None;
    for f in features {
        let Some(d) = screen_distance(&proj, click, f) else { continue };
        if d > radius_px {
            continue;
        }
        let better = match best {
            None => true,
            Some((bd, bf)) => d < bd || (d == bd && id_order(&f.id, &bf.id) == Ordering::Less),
        };
        if better {
            best = Some((d, f));
        }
    }
    best.map(|(_, f)| f.target()).ok_or(DataError::NothingAtPoint)
}

/// Numeric ids compare as numbers, anything else as text.
fn id_order(a: &str, b: &str) -> Ordering {
    match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y),
        _ => a.cmp(b),
    }
}

fn screen_distance(proj: &ScreenProjector, click: (f64, f64), f: &Feature) -> Option<f64> {
    let screen: Vec<(f64, f64)> = f
        .geometry
        .vertices()
        .into_iter()
        .map(|v| proj.to_screen(project(v)))
        .collect::<Option<_>>()?;
    match &f.geometry {
        Geometry::Point(_) => Some(dist(click, screen[0])),
        Geometry::LineString(_) => screen.windows(2).map(|w| seg_dist(click, w[0], w[1])).reduce(f64::min),
        Geometry::Polygon(_) => {
            if inside(click, &screen) {
                return Some(0.0);
            }
            (0..screen.len())
                .map(|i| seg_dist(click, screen[i], screen[(i + 1) % screen.len()]))
                .reduce(f64::min)
        }
    }
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

fn seg_dist(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0);
    dist(p, (a.0 + t * dx, a.1 + t * dy))
}

fn inside(p: (f64, f64), ring: &[(f64, f64)]) -> bool {
    let mut odd = false;
    let mut j = ring.len() - 1;
    for i in 0..ring.len() {
        let (a, b) = (ring[i], ring[j]);
        if (a.1 > p.1) != (b.1 > p.1) && p.0 < (b.0 - a.0) * (p.1 - a.1) / (b.1 - a.1) + a.0 {
            odd = !odd;
        }
        j = i;
    }
    odd
}

/// Target bounds grown on every side by the ground extent of the tallest
/// extruded cell touching them. Flat layers leave the bounds unchanged.
pub fn inflated_bounds(target: &GeospatialTarget, layer: &DataLayer) -> Result<GeoBounds, GeoError> {
    let b = bounds_of(target)?;
    let Some(grid) = &layer.hex else { return Ok(b) };
    let (min, max) = b.projected();
    let reach = grid.size;
    let tallest = grid
        .cells
        .keys()
        .filter(|&&cell| {
            let c = grid.cell_center(cell);
            c.x >= min.x - reach && c.x <= max.x + reach && c.y >= min.y - reach && c.y <= max.y + reach
        })
        .map(|&cell| grid.height_m(cell))
        .fold(0.0, f64::max);
    if tallest <= 0.0 {
        return Ok(b);
    }
    let dlat = tallest / METERS_PER_DEGREE;
    let dlon = dlat / b.center_lat().to_radians().cos();
    GeoBounds::new(
        (b.west - dlon).max(-MAX_LON),
        (b.south - dlat).max(-MAX_LAT),
        (b.east + dlon).min(MAX_LON),
        (b.north + dlat).min(MAX_LAT),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{load_csv, CsvOptions, LayerKind};

    fn gp(lon: f64, lat: f64) -> GeoPoint {
        GeoPoint::new(lon, lat).unwrap()
    }

    fn square(x0: f64, y0: f64, x1: f64, y1: f64) -> GeoPolygon {
        GeoPolygon::new(vec![gp(x0, y0), gp(x1, y0), gp(x1, y1), gp(x0, y1)]).unwrap()
    }

    fn points(csv: &str) -> Vec<Feature> {
        load_csv(csv, &CsvOptions::default()).unwrap()
    }

    #[test]
    fn lasso_catches_contained_points() {
        let fs = points("lon,lat\n0.5,0.5\n5,5\n");
        let t = select_by_lasso(&fs, &square(0.0, 0.0, 1.0, 1.0));
        assert_eq!(t, GeospatialTarget::multiple(vec![fs[0].target()]).unwrap());
        let empty = square(10.0, 10.0, 11.0, 11.0);
        assert_eq!(select_by_lasso(&fs, &empty), GeospatialTarget::region(empty.clone()));
    }

    #[test]
    fn pick_nearest_and_ties() {
        let fs = points("lon,lat\n1,0\n-1,0\n");
        let state = CameraState::new(gp(0.0, 0.0), 6.0, 0.0, 0.0).unwrap();
        let v = Viewport::new(800, 600).unwrap();
        let on = select_nearest(&fs, gp(1.0, 0.0), 5.0, &state, v).unwrap();
        assert_eq!(on, fs[0].target());
        // Equidistant click: id 0 beats id 1 whatever the order.
        let rev: Vec<Feature> = fs.iter().rev().cloned().collect();
        let tie = select_nearest(&rev, gp(0.0, 0.0), 1e6, &state, v).unwrap();
        assert_eq!(tie, fs[0].target());
        assert_eq!(select_nearest(&fs, gp(0.0, 30.0), 5.0, &state, v), Err(DataError::NothingAtPoint));
    }

    #[test]
    fn flat_layers_do_not_inflate() {
        let fs = points("lon,lat\n0,0\n1,1\n");
        let layer = DataLayer::new(LayerKind::Scatter, fs.clone()).unwrap();
        let t = GeospatialTarget::multiple(fs.iter().map(Feature::target).collect()).unwrap();
        assert_eq!(inflated_bounds(&t, &layer).unwrap(), bounds_of(&t).unwrap());
        let flat = DataLayer::hexagon(fs, 1000.0, 0.0).unwrap();
        assert_eq!(inflated_bounds(&t, &flat).unwrap(), bounds_of(&t).unwrap());
    }

    #[test]
    fn ten_kilometre_cell_at_the_equator() {
        let fs = points("lon,lat\n0,0\n");
        let layer = DataLayer::hexagon(fs.clone(), 1000.0, 10_000.0).unwrap();
        let b = inflated_bounds(&fs[0].target(), &layer).unwrap();
        // 10 000 / 111 195.0802 from an independent conversion script.
        let expect = 0.089_932_036_372_453_78;
        for side in [-b.west, -b.south, b.east, b.north] {
            assert!((side - expect).abs() < 1e-12, "{side}");
        }
    }
}
