//! Keyframe construction for each shot type.

use super::{
    check_purpose_target, Keyframe, MovementPlan, NarrativePurpose, PlanError, ShotParams, ShotType,
};
use crate::camera::{
    fit_bounds_with, ground_resolution, CameraState, FitOptions, Viewport, EARTH_RADIUS_M,
    MAX_PITCH, TILE_SIZE,
};
use crate::geo::{
    point_along_path, project, unproject_clamped, GeoBounds, GeoPoint, MercatorPoint,
};
use crate::target::{bounds_center, bounds_of, centroid_of, GeospatialTarget, TargetKind};

/// Zoom change of a push-in or pull-out with nothing to frame, per unit intensity.
const FREE_ZOOM_PER_INTENSITY: f64 = 0.5;
/// Screen-width fraction a target-less pan travels, per unit intensity.
const FREE_PAN_PER_INTENSITY: f64 = 0.25;
const WHIP_SPEEDUP: f64 = 4.0;
const ARC_MIN_PITCH: f64 = 45.0;
const ARC_MIN_SEGMENTS: usize = 9;
const ARC_MAX_STEP: f64 = 40.0;
const ROLL_MAX_STEP: f64 = 45.0;
const TRACKING_SAMPLES: usize = 16;
const TRACKING_MIN_WINDOW_M: f64 = 500.0;
const TRACKING_WINDOW_FRAC: f64 = 0.25;

/// Everything `plan_shot` needs.
#[derive(Debug, Clone)]
pub struct ShotRequest<'a> {
    pub shot: ShotType,
    pub target: &'a GeospatialTarget,
    /// `None` in manual authoring, where the purpose is not stated.
    pub purpose: Option<NarrativePurpose>,
    pub current: CameraState,
    pub viewport: Viewport,
    pub params: ShotParams,
    /// Box to frame instead of the target's own bounds (extruded layers).
    pub framing: Option<GeoBounds>,
    pub fit: FitOptions,
}

impl<'a> ShotRequest<'a> {
    pub fn new(
        shot: ShotType,
        target: &'a GeospatialTarget,
        purpose: Option<NarrativePurpose>,
        current: CameraState,
        viewport: Viewport,
        params: ShotParams,
    ) -> Self {
        Self { shot, target, purpose, current, viewport, params, framing: None, fit: FitOptions::default() }
    }

    fn framing_bounds(&self) -> Result<Option<GeoBounds>, PlanError> {
        if let Some(b) = self.framing {
            return Ok(Some(b));
        }
        match self.target {
            GeospatialTarget::None => Ok(None),
            t => Ok(Some(bounds_of(t)?)),
        }
    }

    /// Fit keeping the current field of view.
    fn fit(&self, b: &GeoBounds, pitch: f64, bearing: f64) -> Result<CameraState, PlanError> {
        let s = fit_bounds_with(b, self.viewport, self.params.margin_frac, pitch, bearing, &self.fit)?;
        Ok(self
            .current
            .with_center(s.center())
            .with_zoom_clamped(s.zoom())
            .with_pitch_clamped(pitch)
            .with_bearing(bearing))
    }
}

pub fn plan_shot(req: &ShotRequest) -> Result<MovementPlan, PlanError> {
    req.params.validate()?;
    let kind = req.target.kind();
    if let Some(p) = req.purpose {
        check_purpose_target(p, kind)?;
    }
    if req.shot == ShotType::Tracking && kind != TargetKind::Path {
        return Err(PlanError::IncompatibleShot {
            shot: req.shot,
            kind,
            hint: "; tracking follows a path",
        });
    }

    let cur = req.current;
    // Keyframes as (fraction of the moving part, state).
    let frames: Vec<(f64, CameraState)> = match req.shot {
        ShotType::Static => vec![(0.0, cur), (1.0, cur)],
        ShotType::PushIn => {
            let end = match req.framing_bounds()? {
                Some(b) => req.fit(&b, cur.pitch(), cur.bearing())?,
                None => cur.with_zoom_clamped(
                    cur.zoom() + FREE_ZOOM_PER_INTENSITY * req.params.intensity,
                ),
            };
            vec![(0.0, cur), (1.0, end)]
        }
        ShotType::PullOut => {
            let end = match req.framing_bounds()? {
                Some(b) => pull_out_end(req, &b)?,
                None => cur.with_zoom_clamped(
                    cur.zoom() - FREE_ZOOM_PER_INTENSITY * req.params.intensity,
                ),
            };
            vec![(0.0, cur), (1.0, end)]
        }
        ShotType::Pan { .. } => pan_frames(req)?,
        ShotType::Tilt => {
            let sweep = req.params.sweep.unwrap_or_else(|| default_tilt(cur.pitch(), req.params.intensity));
            vec![(0.0, cur), (1.0, cur.with_pitch_clamped(cur.pitch() + sweep))]
        }
        ShotType::Roll => {
            let sweep = req.params.sweep.map(f64::abs).unwrap_or(45.0 * (1.0 + req.params.intensity))
                * req.params.direction.sign();
            let n = (sweep.abs() / ROLL_MAX_STEP).ceil().max(1.0) as usize;
            bearing_sweep(cur, sweep, n)
        }
        ShotType::Arc => arc_frames(req)?,
        ShotType::Tracking => tracking_frames(req)?,
    };

    let motion = match req.shot {
        ShotType::Pan { whip: true } => req.params.duration / WHIP_SPEEDUP,
        _ => req.params.duration,
    };
    let mut keyframes: Vec<Keyframe> = frames
        .into_iter()
        .map(|(f, state)| Keyframe { time: if f == 1.0 { motion } else { f * motion }, state })
        .collect();
    let hold = req.params.hold;
    if hold > 0.0 {
        let last = keyframes.last().unwrap().state;
        keyframes.push(Keyframe { time: motion + hold, state: last });
    }
    MovementPlan::new(
        keyframes,
        req.params.easing,
        req.target.clone(),
        req.purpose,
        vec![req.shot],
        hold,
    )
}

/// Frames the target box grown by `intensity` times its extent on each side.
fn pull_out_end(req: &ShotRequest, b: &GeoBounds) -> Result<CameraState, PlanError> {
    let factor = 1.0 + 2.0 * req.params.intensity;
    let cur = req.current;
    if b.is_point() {
        let point = GeoPoint::new(b.west, b.south)?;
        return Ok(cur
            .with_center(point)
            .with_zoom_clamped(req.fit.max_fit_zoom - factor.log2()));
    }
    let (min, max) = b.projected();
    let mid = min.lerp(&max, 0.5);
    let hx = (max.x - min.x) / 2.0 * factor;
    let hy = (max.y - min.y) / 2.0 * factor;
    let grown = GeoBounds::from_projected(
        MercatorPoint::new(mid.x - hx, mid.y - hy),
        MercatorPoint::new(mid.x + hx, mid.y + hy),
    );
    req.fit(&grown, cur.pitch(), cur.bearing())
}

fn pan_frames(req: &ShotRequest) -> Result<Vec<(f64, CameraState)>, PlanError> {
    let cur = req.current;
    let stops: Vec<GeoPoint> = match (req.target, req.framing) {
        (GeospatialTarget::Multiple { members }, None) => members
            .iter()
            .map(|m| bounds_of(m).map(|b| bounds_center(&b)))
            .collect::<Result<_, _>>()?,
        (GeospatialTarget::None, None) => {
            let shift = FREE_PAN_PER_INTENSITY * req.params.intensity * req.viewport.w()
                / (TILE_SIZE * cur.zoom().exp2());
            let (sb, cb) = cur.bearing().to_radians().sin_cos();
            let c = project(cur.center());
            vec![unproject_clamped(MercatorPoint::new(c.x + shift * cb, c.y + shift * sb))]
        }
        _ => {
            let b = req.framing_bounds()?.expect("non-None target has bounds");
            vec![bounds_center(&b)]
        }
    };
    let n = stops.len() as f64;
    let mut frames = vec![(0.0, cur)];
    for (i, p) in stops.into_iter().enumerate() {
        frames.push(((i + 1) as f64 / n, cur.with_center(p)));
    }
    Ok(frames)
}

/// Tilts toward the horizon, or back toward nadir when already steep.
fn default_tilt(pitch: f64, intensity: f64) -> f64 {
    let sweep = 15.0 + 30.0 * intensity;
    if pitch + sweep <= MAX_PITCH {
        sweep
    } else {
        -sweep
    }
}

/// `n` equal bearing steps; each stays under a half turn so the shortest-arc
/// blend between neighbours follows the sweep direction.
fn bearing_sweep(start: CameraState, sweep: f64, n: usize) -> Vec<(f64, CameraState)> {
    (0..=n)
        .map(|i| {
            let f = i as f64 / n as f64;
            let state = if i == 0 { start } else { start.with_bearing(start.bearing() + sweep * f) };
            (f, state)
        })
        .collect()
}

fn arc_frames(req: &ShotRequest) -> Result<Vec<(f64, CameraState)>, PlanError> {
    let cur = req.current;
    let sweep = req.params.sweep.map(f64::abs).unwrap_or(90.0 * (1.0 + req.params.intensity))
        * req.params.direction.sign();
    let n = ((sweep.abs() / ARC_MAX_STEP).ceil() as usize).max(ARC_MIN_SEGMENTS);
    let pitch = cur.pitch().max(ARC_MIN_PITCH);
    let (center, zoom) = match req.framing_bounds()? {
        None => (cur.center(), cur.zoom()),
        Some(b) => {
            let focus = match req.framing {
                Some(_) => bounds_center(&b),
                None => centroid_of(req.target)?,
            };
            let sym = symmetric_box(&b, focus);
            let mut zoom = f64::INFINITY;
            for i in 0..=n {
                let bearing = cur.bearing() + sweep * i as f64 / n as f64;
                zoom = zoom.min(req.fit(&sym, pitch, bearing)?.zoom());
            }
            (focus, zoom)
        }
    };
    let start = cur.with_center(center).with_zoom_clamped(zoom).with_pitch_clamped(pitch);
    Ok(bearing_sweep(start, sweep, n))
}

/// Smallest box centred on `focus` (in projected space) that holds `b`, so a
/// fit of it keeps `b` inside the margin while the camera looks at `focus`.
fn symmetric_box(b: &GeoBounds, focus: GeoPoint) -> GeoBounds {
    let (min, max) = b.projected();
    let f = project(focus);
    let hx = (f.x - min.x).abs().max((max.x - f.x).abs());
    let hy = (f.y - min.y).abs().max((max.y - f.y).abs());
    GeoBounds::from_projected(
        MercatorPoint::new(f.x - hx, f.y - hy),
        MercatorPoint::new(f.x + hx, f.y + hy),
    )
}

fn tracking_frames(req: &ShotRequest) -> Result<Vec<(f64, CameraState)>, PlanError> {
    let GeospatialTarget::Path { path, .. } = req.target else {
        unreachable!("checked by plan_shot");
    };
    let cur = req.current;
    let b = bounds_of(req.target)?;
    let lat = b.center_lat();
    let meters_per_unit = lat.to_radians().cos() * 2.0 * std::f64::consts::PI * EARTH_RADIUS_M;
    let window = req
        .params
        .window_meters
        .unwrap_or_else(|| (TRACKING_WINDOW_FRAC * path.projected_length() * meters_per_unit).max(TRACKING_MIN_WINDOW_M));
    // Zoom at which the usable viewport width spans the window.
    let usable_px = (1.0 - 2.0 * req.params.margin_frac) * req.viewport.w();
    let zoom = (usable_px * ground_resolution(lat, 0.0) / window)
        .log2()
        .clamp(0.0, req.fit.max_fit_zoom);

    let mut fractions = path.vertex_fractions();
    fractions.extend((0..=TRACKING_SAMPLES).map(|k| k as f64 / TRACKING_SAMPLES as f64));
    fractions.sort_by(f64::total_cmp);
    fractions.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    fractions
        .into_iter()
        .map(|s| {
            let (p, azimuth) = point_along_path(path, s)?;
            let bearing = if req.params.align_bearing_to_path { azimuth } else { cur.bearing() };
            Ok((s, cur.with_center(p).with_zoom_clamped(zoom).with_bearing(bearing)))
        })
        .collect()
}
