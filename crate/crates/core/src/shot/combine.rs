//! Running two shots at once when they move different camera parameters.

use super::{CameraParam, Keyframe, MovementPlan, PlanError};
use crate::camera::{CameraState, EasingKind};

const SPAN_EPS: f64 = 1e-9;
/// Uniform samples added to the merged timeline so eased inputs survive
/// piecewise-linear playback.
const MERGE_SAMPLES: usize = 32;

pub fn combine_shots(a: &MovementPlan, b: &MovementPlan) -> Result<MovementPlan, PlanError> {
    if a.target() != b.target() {
        return Err(PlanError::CombineMismatch("plans serve different targets".into()));
    }
    if (a.span() - b.span()).abs() > SPAN_EPS {
        return Err(PlanError::CombineMismatch(format!(
            "plans last {} s and {} s",
            a.span(),
            b.span()
        )));
    }
    if a.start_state().fov() != b.start_state().fov() {
        return Err(PlanError::CombineMismatch("plans use different fields of view".into()));
    }
    let va = a.varied_params();
    let vb = b.varied_params();
    if let Some(p) = CameraParam::ALL.into_iter().find(|p| va.contains(p) && vb.contains(p)) {
        return Err(PlanError::Conflict(p.name()));
    }

    let mut shots = a.shots().to_vec();
    for s in b.shots() {
        if !shots.contains(s) {
            shots.push(*s);
        }
    }
    if shots.len() > 2 {
        return Err(PlanError::CombineMismatch(format!(
            "a plan carries at most two shots, got {}",
            shots.len()
        )));
    }

    let span = a.span();
    let mut times: Vec<f64> = a
        .keyframes()
        .iter()
        .chain(b.keyframes())
        .map(|k| k.time.min(span))
        .chain((0..=MERGE_SAMPLES).map(|i| span * i as f64 / MERGE_SAMPLES as f64))
        .collect();
    times.sort_by(f64::total_cmp);
    times.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    if let Some(last) = times.last_mut() {
        *last = span;
    }

    let keyframes = times
        .into_iter()
        .map(|t| Keyframe { time: t, state: merge(a.state_at(t), b.state_at(t), &vb) })
        .collect();
    MovementPlan::new(
        keyframes,
        EasingKind::Linear,
        a.target().clone(),
        a.purpose().or(b.purpose()),
        shots,
        a.hold().min(b.hold()),
    )
}

/// `base` with `overlay`'s values for the parameters it varies.
fn merge(base: CameraState, overlay: CameraState, varied: &[CameraParam]) -> CameraState {
    varied.iter().fold(base, |s, p| match p {
        CameraParam::Zoom => s.with_zoom_clamped(overlay.zoom()),
        CameraParam::Pitch => s.with_pitch_clamped(overlay.pitch()),
        CameraParam::Bearing => s.with_bearing(overlay.bearing()),
        CameraParam::Center => s.with_center(overlay.center()),
    })
}
