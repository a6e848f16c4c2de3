//! Zoom-out, pan, zoom-in transitions between two camera states.
//!
//! Uses the optimal smooth zoom-and-pan path of van Wijk and Nuij in the
//! Mercator plane. The visible width `w` at zoom `z` is `span / (512 · 2^z)`
//! world units, where `span` is the screen extent in pixels the transition
//! is tuned for.

use serde::{Deserialize, Serialize};

use super::{blend, CameraError, CameraState, EasingKind, MAX_ZOOM, MIN_ZOOM, TILE_SIZE};
use crate::geo::{project, unproject_clamped, MercatorPoint};

/// Trade-off between zooming and panning; √2 is the value recommended by
/// van Wijk and Nuij.
pub const FLY_TO_RHO: f64 = std::f64::consts::SQRT_2;
const SINGULAR_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum GapFillMode {
    #[default]
    FlyTo,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Path {
    Linear,
    Smooth {
        c0: MercatorPoint,
        c1: MercatorPoint,
        u1: f64,
        w0: f64,
        r0: f64,
        length: f64,
    },
}

/// A camera curve over `[0, duration]` seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trajectory {
    start: CameraState,
    end: CameraState,
    duration: f64,
    span_px: f64,
    path: Path,
}

pub fn fly_to(a: &CameraState, b: &CameraState, duration: f64) -> Result<Trajectory, CameraError> {
    fly_to_with_span(a, b, duration, TILE_SIZE)
}

pub fn fly_to_with_span(
    a: &CameraState,
    b: &CameraState,
    duration: f64,
    span_px: f64,
) -> Result<Trajectory, CameraError> {
    if !duration.is_finite() || duration <= 0.0 {
        return Err(CameraError::OutOfRange { field: "duration", value: duration });
    }
    if !span_px.is_finite() || span_px <= 0.0 {
        return Err(CameraError::OutOfRange { field: "span", value: span_px });
    }
    if a.fov() != b.fov() {
        return Err(CameraError::FovMismatch(a.fov(), b.fov()));
    }
    let c0 = project(a.center());
    let c1 = project(b.center());
    let u1 = c0.distance(&c1);
    let w0 = visible_width(a.zoom(), span_px);
    let w1 = visible_width(b.zoom(), span_px);
    let path = if u1 < SINGULAR_EPS || ((w0 - w1).abs() < SINGULAR_EPS && u1 < SINGULAR_EPS) {
        Path::Linear
    } else {
        let rho2 = FLY_TO_RHO * FLY_TO_RHO;
        let rho4 = rho2 * rho2;
        let b0 = (w1 * w1 - w0 * w0 + rho4 * u1 * u1) / (2.0 * w0 * rho2 * u1);
        let b1 = (w1 * w1 - w0 * w0 - rho4 * u1 * u1) / (2.0 * w1 * rho2 * u1);
        let r0 = -b0.asinh();
        let r1 = -b1.asinh();
        Path::Smooth { c0, c1, u1, w0, r0, length: (r1 - r0) / FLY_TO_RHO }
    };
    Ok(Trajectory { start: *a, end: *b, duration, span_px, path })
}

fn visible_width(zoom: f64, span_px: f64) -> f64 {
    span_px / (TILE_SIZE * zoom.exp2())
}

impl Trajectory {
    /// Builds the plain componentwise interpolation variant.
    pub fn linear(a: &CameraState, b: &CameraState, duration: f64) -> Result<Self, CameraError> {
        let mut t = fly_to(a, b, duration)?;
        t.path = Path::Linear;
        Ok(t)
    }

    pub fn new(
        mode: GapFillMode,
        a: &CameraState,
        b: &CameraState,
        duration: f64,
        span_px: f64,
    ) -> Result<Self, CameraError> {
        let mut t = fly_to_with_span(a, b, duration, span_px)?;
        if mode == GapFillMode::Linear {
            t.path = Path::Linear;
        }
        Ok(t)
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn start(&self) -> &CameraState {
        &self.start
    }

    pub fn end(&self) -> &CameraState {
        &self.end
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.path, Path::Linear)
    }

    pub fn span_px(&self) -> f64 {
        self.span_px
    }

    /// Total path length in the `(u, w)` metric, `None` for the linear case.
    pub fn path_length(&self) -> Option<f64> {
        match self.path {
            Path::Linear => None,
            Path::Smooth { length, .. } => Some(length),
        }
    }

    /// Camera state `t` seconds into the trajectory; `t` is clamped to
    /// `[0, duration]` and both endpoints are returned exactly.
    pub fn state_at(&self, t: f64) -> CameraState {
        let sigma = (t / self.duration).clamp(0.0, 1.0);
        if sigma == 0.0 {
            return self.start;
        }
        if sigma == 1.0 {
            return self.end;
        }
        let base = blend(&self.start, &self.end, EasingKind::Linear.apply(sigma));
        match self.path {
            Path::Linear => base,
            Path::Smooth { c0, c1, u1, w0, r0, length } => {
                let s = sigma * length;
                let rho2 = FLY_TO_RHO * FLY_TO_RHO;
                let arg = FLY_TO_RHO * s + r0;
                let u = w0 / rho2 * (r0.cosh() * arg.tanh() - r0.sinh());
                let w = w0 * r0.cosh() / arg.cosh();
                let center = unproject_clamped(c0.lerp(&c1, u / u1));
                let zoom = (self.span_px / (TILE_SIZE * w)).log2().clamp(MIN_ZOOM, MAX_ZOOM);
                base.with_center(center).with_zoom_clamped(zoom)
            }
        }
    }

    /// Projected center at time `t` before any clamping; used by the oracle tests.
    pub fn projected_center_at(&self, t: f64) -> MercatorPoint {
        project(self.state_at(t).center())
    }
}
