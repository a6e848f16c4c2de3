//! Perspective mapping between the ground plane and screen pixels.

use serde::Serialize;

use super::{CameraState, Viewport, TILE_SIZE};
use crate::geo::{project, signed_area, unproject, GeoError, GeoPoint, MercatorPoint};

/// Screen-space view of the ground for one camera state.
///
/// The camera sits `d = (h/2)/tan(fov/2)` pixels from the center ground
/// point, tilted by pitch and rotated by bearing. Ground offsets are measured
/// in world pixels at the state's zoom.
#[derive(Debug, Clone, Copy)]
pub struct ScreenProjector {
    center: MercatorPoint,
    world_px: f64,
    right: (f64, f64),
    up: (f64, f64),
    sin_p: f64,
    cos_p: f64,
    dist: f64,
    width: f64,
    height: f64,
}

impl ScreenProjector {
    pub fn new(state: &CameraState, viewport: Viewport) -> Self {
        let (sb, cb) = state.bearing().to_radians().sin_cos();
        let (sin_p, cos_p) = state.pitch().to_radians().sin_cos();
        let height = viewport.h();
        Self {
            center: project(state.center()),
            world_px: TILE_SIZE * state.zoom().exp2(),
            // Mercator y points south: screen-up at bearing 0 is (0, -1).
            right: (cb, sb),
            up: (sb, -cb),
            sin_p,
            cos_p,
            dist: (height / 2.0) / (state.fov() / 2.0).to_radians().tan(),
            width: viewport.w(),
            height,
        }
    }

    /// Screen pixel of a ground point, or `None` when it is behind the camera.
    pub fn to_screen(&self, m: MercatorPoint) -> Option<(f64, f64)> {
        let dx = (m.x - self.center.x) * self.world_px;
        let dy = (m.y - self.center.y) * self.world_px;
        let a = dx * self.right.0 + dy * self.right.1;
        let b = dx * self.up.0 + dy * self.up.1;
        let depth = self.dist + b * self.sin_p;
        if depth <= 0.0 {
            return None;
        }
        let sx = self.width / 2.0 + self.dist * a / depth;
        let sy = self.height / 2.0 - self.dist * b * self.cos_p / depth;
        Some((sx, sy))
    }

    /// Ground point seen through screen pixel `(sx, sy)`.
    pub fn to_ground(&self, sx: f64, sy: f64) -> MercatorPoint {
        let vy = self.height / 2.0 - sy;
        let dir_x = sx - self.width / 2.0;
        let dir_y = self.dist * self.sin_p + vy * self.cos_p;
        let dir_z = -self.dist * self.cos_p + vy * self.sin_p;
        let t = self.dist * self.cos_p / -dir_z;
        let a = t * dir_x;
        let b = -self.dist * self.sin_p + t * dir_y;
        MercatorPoint::new(
            self.center.x + (a * self.right.0 + b * self.up.0) / self.world_px,
            self.center.y + (a * self.right.1 + b * self.up.1) / self.world_px,
        )
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn height(&self) -> f64 {
        self.height
    }
}

/// Ground quadrilateral visible through the viewport.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Footprint {
    /// Projected corners, screen-clockwise from top-left. May extend past
    /// the Mercator square for zoomed-out or pitched views.
    pub corners: [MercatorPoint; 4],
}

impl Footprint {
    pub fn area(&self) -> f64 {
        signed_area(&self.corners).abs()
    }

    pub fn contains(&self, m: MercatorPoint) -> bool {
        // Corners run clockwise on screen, which is clockwise in Mercator
        // (both have y pointing down), so every edge keeps the point on the
        // same side.
        let mut sign = 0.0_f64;
        for i in 0..4 {
            let a = self.corners[i];
            let b = self.corners[(i + 1) % 4];
            let cross = (b.x - a.x) * (m.y - a.y) - (b.y - a.y) * (m.x - a.x);
            if cross != 0.0 {
                if sign != 0.0 && cross.signum() != sign {
                    return false;
                }
                sign = cross.signum();
            }
        }
        true
    }

    pub fn geo_corners(&self) -> Result<[GeoPoint; 4], GeoError> {
        Ok([
            unproject(self.corners[0])?,
            unproject(self.corners[1])?,
            unproject(self.corners[2])?,
            unproject(self.corners[3])?,
        ])
    }
}

pub fn footprint(state: &CameraState, viewport: Viewport) -> Footprint {
    let p = ScreenProjector::new(state, viewport);
    let (w, h) = (p.width, p.height);
    Footprint {
        corners: [p.to_ground(0.0, 0.0), p.to_ground(w, 0.0), p.to_ground(w, h), p.to_ground(0.0, h)],
    }
}
