//! Pointy-top hexagonal binning in the Mercator plane.

use std::collections::BTreeMap;

use serde::Serialize;

use super::DataError;
use crate::camera::EARTH_RADIUS_M;
use crate::geo::{project, unproject_clamped, GeoPoint, MercatorPoint};

const SQRT3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct HexGrid {
    pub cell_radius_m: f64,
    pub height_scale_m: f64,
    /// Center-to-corner distance in world units.
    pub size: f64,
    /// Axial `(q, r)` → number of points.
    #[serde(serialize_with = "cells_as_list")]
    pub cells: BTreeMap<(i64, i64), u64>,
}

fn cells_as_list<S: serde::Serializer>(cells: &BTreeMap<(i64, i64), u64>, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(cells.iter().map(|(&(q, r), &n)| (q, r, n)))
}

impl HexGrid {
    /// Axial cell holding a projected point.
    pub fn cell_of(&self, m: MercatorPoint) -> (i64, i64) {
        let q = (SQRT3 / 3.0 * m.x - m.y / 3.0) / self.size;
        let r = (2.0 / 3.0 * m.y) / self.size;
        cube_round(q, r)
    }

    pub fn cell_center(&self, (q, r): (i64, i64)) -> MercatorPoint {
        let (q, r) = (q as f64, r as f64);
        MercatorPoint::new(self.size * SQRT3 * (q + r / 2.0), self.size * 1.5 * r)
    }

    pub fn cell_corners(&self, cell: (i64, i64)) -> [GeoPoint; 6] {
        let c = self.cell_center(cell);
        std::array::from_fn(|i| {
            let a = (60.0 * i as f64 - 30.0).to_radians();
            unproject_clamped(MercatorPoint::new(c.x + self.size * a.cos(), c.y + self.size * a.sin()))
        })
    }

    pub fn height_m(&self, cell: (i64, i64)) -> f64 {
        self.cells.get(&cell).copied().unwrap_or(0) as f64 * self.height_scale_m
    }

    pub fn total_count(&self) -> u64 {
        self.cells.values().sum()
    }
}

fn cube_round(q: f64, r: f64) -> (i64, i64) {
    let s = -q - r;
    let (mut rq, mut rr, rs) = (q.round(), r.round(), s.round());
    let (dq, dr, ds) = ((rq - q).abs(), (rr - r).abs(), (rs - s).abs());
    if dq > dr && dq > ds {
        rq = -rr - rs;
    } else if dr > ds {
        rr = -rq - rs;
    }
    (rq as i64, rr as i64)
}

/// Bins points into hexagons of `cell_radius_m` meters (center to corner),
/// converted to world units at the points' mean latitude.
pub fn hex_aggregate(points: &[GeoPoint], cell_radius_m: f64, height_scale_m: f64) -> Result<HexGrid, DataError> {
    if !cell_radius_m.is_finite() || cell_radius_m <= 0.0 {
        return Err(DataError::Layer(format!("cell radius must be positive, got {cell_radius_m}")));
    }
    let mean_lat = if points.is_empty() {
        0.0
    } else {
        points.iter().map(|p| p.lat()).sum::<f64>() / points.len() as f64
    };
    let meters_per_unit = mean_lat.to_radians().cos() * 2.0 * std::f64::consts::PI * EARTH_RADIUS_M;
    let mut grid = HexGrid {
        cell_radius_m,
        height_scale_m,
        size: cell_radius_m / meters_per_unit,
        cells: BTreeMap::new(),
    };
    for &p in points {
        *grid.cells.entry(grid.cell_of(project(p))).or_insert(0) += 1;
    }
    Ok(grid)
}
