//! Camera shots: the shot vocabulary, purpose-driven defaults, and the
//! planner that turns a shot choice into keyframes.

mod combine;
mod defaults;
mod plan;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::camera::{bearing_delta, blend, CameraError, CameraState, EasingKind};
use crate::geo::{project, GeoError};
use crate::target::{GeospatialTarget, TargetKind};

pub use combine::combine_shots;
pub use defaults::{check_purpose_target, default_shot_for, DefaultShotTable, SHOT_TABLE_ENV};
pub use plan::{plan_shot, ShotRequest};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("{rule} ({purpose} with a {kind} target)")]
    PurposeMismatch { purpose: NarrativePurpose, kind: TargetKind, rule: &'static str },
    #[error("{shot} shot cannot serve a {kind} target{hint}")]
    IncompatibleShot { shot: ShotType, kind: TargetKind, hint: &'static str },
    #[error("invalid shot parameter {name}: {value}")]
    InvalidParam { name: &'static str, value: f64 },
    #[error("conflicting parameter: {0}")]
    Conflict(&'static str),
    #[error("cannot combine shots: {0}")]
    CombineMismatch(String),
    #[error("invalid movement plan: {0}")]
    InvalidPlan(String),
    #[error("default shot table: {0}")]
    Table(String),
    #[error(transparent)]
    Camera(#[from] CameraError),
    #[error(transparent)]
    Geo(#[from] GeoError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NarrativePurpose {
    Emphasize,
    Overview,
    Compare,
    Supplement,
    Dynamics,
}

impl NarrativePurpose {
    pub const ALL: [NarrativePurpose; 5] = [
        NarrativePurpose::Emphasize,
        NarrativePurpose::Overview,
        NarrativePurpose::Compare,
        NarrativePurpose::Supplement,
        NarrativePurpose::Dynamics,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NarrativePurpose::Emphasize => "Emphasize",
            NarrativePurpose::Overview => "Overview",
            NarrativePurpose::Compare => "Compare",
            NarrativePurpose::Supplement => "Supplement",
            NarrativePurpose::Dynamics => "Dynamics",
        }
    }
}

impl fmt::Display for NarrativePurpose {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NarrativePurpose {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        NarrativePurpose::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let names: Vec<_> = NarrativePurpose::ALL.iter().map(|p| p.name()).collect();
                format!("unknown narrative purpose '{s}', expected one of: {}", names.join(", "))
            })
    }
}

impl Serialize for NarrativePurpose {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for NarrativePurpose {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A parametric camera movement family. Whip pan is a fast [`ShotType::Pan`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShotType {
    Static,
    PushIn,
    PullOut,
    Pan { whip: bool },
    Tilt,
    Roll,
    Arc,
    Tracking,
}

impl ShotType {
    pub const NAMES: [&'static str; 8] =
        ["Static", "PushIn", "PullOut", "Pan", "Tilt", "Roll", "Arc", "Tracking"];

    pub fn name(self) -> &'static str {
        match self {
            ShotType::Static => "Static",
            ShotType::PushIn => "PushIn",
            ShotType::PullOut => "PullOut",
            ShotType::Pan { whip: false } => "Pan",
            ShotType::Pan { whip: true } => "WhipPan",
            ShotType::Tilt => "Tilt",
            ShotType::Roll => "Roll",
            ShotType::Arc => "Arc",
            ShotType::Tracking => "Tracking",
        }
    }

    pub fn pan() -> Self {
        ShotType::Pan { whip: false }
    }
}

impl fmt::Display for ShotType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ShotType {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let key: String = s.chars().filter(|c| !matches!(c, ' ' | '-' | '_')).collect();
        let shot = match key.to_ascii_lowercase().as_str() {
            "static" => ShotType::Static,
            "pushin" => ShotType::PushIn,
            "pullout" | "pushout" => ShotType::PullOut,
            "pan" => ShotType::Pan { whip: false },
            "whippan" => ShotType::Pan { whip: true },
            "tilt" => ShotType::Tilt,
            "roll" | "cameraroll" => ShotType::Roll,
            "arc" => ShotType::Arc,
            "tracking" => ShotType::Tracking,
            _ => {
                return Err(format!(
                    "unknown shot '{s}', expected one of: {}",
                    ShotType::NAMES.join(", ")
                ))
            }
        };
        Ok(shot)
    }
}

impl Serialize for ShotType {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for ShotType {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Direction {
    #[default]
    Clockwise,
    Counterclockwise,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Clockwise => 1.0,
            Direction::Counterclockwise => -1.0,
        }
    }
}

/// Knobs of one shot. Intensity scales the zoom delta of target-less shots,
/// the box inflation of a pull-out and the sweep of an arc; it never changes
/// the duration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct ShotParams {
    pub intensity: f64,
    pub duration: f64,
    pub margin_frac: f64,
    /// Degrees; signed for Tilt, magnitude for Arc and Roll.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<f64>,
    pub direction: Direction,
    pub align_bearing_to_path: bool,
    /// Static dwell appended after the movement, in seconds.
    pub hold: f64,
    pub easing: EasingKind,
    /// Ground width of the tracking window, in meters.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_meters: Option<f64>,
}

pub const DEFAULT_MARGIN: f64 = 0.1;
pub const DEFAULT_INTENSITY: f64 = 0.5;
pub const DEFAULT_DURATION: f64 = 3.0;

impl Default for ShotParams {
    fn default() -> Self {
        Self {
            intensity: DEFAULT_INTENSITY,
            duration: DEFAULT_DURATION,
            margin_frac: DEFAULT_MARGIN,
            sweep: None,
            direction: Direction::Clockwise,
            align_bearing_to_path: true,
            hold: 0.0,
            easing: EasingKind::Linear,
            window_meters: None,
        }
    }
}

impl ShotParams {
    pub fn validate(&self) -> Result<(), PlanError> {
        let bad = |name, value| Err(PlanError::InvalidParam { name, value });
        if !(0.0..=1.0).contains(&self.intensity) {
            return bad("intensity", self.intensity);
        }
        if !self.duration.is_finite() || self.duration <= 0.0 {
            return bad("duration", self.duration);
        }
        if !(0.0..=crate::camera::MAX_MARGIN).contains(&self.margin_frac) {
            return bad("marginFrac", self.margin_frac);
        }
        if !self.hold.is_finite() || self.hold < 0.0 {
            return bad("hold", self.hold);
        }
        if let Some(s) = self.sweep {
            if !s.is_finite() || s == 0.0 {
                return bad("sweep", s);
            }
        }
        if let Some(w) = self.window_meters {
            if !w.is_finite() || w <= 0.0 {
                return bad("windowMeters", w);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Keyframe {
    pub time: f64,
    pub state: CameraState,
}

/// Camera parameters a plan may vary, in the order conflicts are reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CameraParam {
    Zoom,
    Pitch,
    Bearing,
    Center,
}

impl CameraParam {
    pub const ALL: [CameraParam; 4] =
        [CameraParam::Zoom, CameraParam::Pitch, CameraParam::Bearing, CameraParam::Center];

    pub fn name(self) -> &'static str {
        match self {
            CameraParam::Zoom => "zoom",
            CameraParam::Pitch => "pitch",
            CameraParam::Bearing => "bearing",
            CameraParam::Center => "center",
        }
    }
}

const VARY_EPS: f64 = 1e-12;

/// One planned shot: keyframes over `[0, span]`, the last `hold` seconds of
/// which are a static dwell.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MovementPlan {
    keyframes: Vec<Keyframe>,
    easing: EasingKind,
    target: GeospatialTarget,
    #[serde(skip_serializing_if = "Option::is_none")]
    purpose: Option<NarrativePurpose>,
    shots: Vec<ShotType>,
    hold: f64,
}

impl MovementPlan {
    pub fn new(
        keyframes: Vec<Keyframe>,
        easing: EasingKind,
        target: GeospatialTarget,
        purpose: Option<NarrativePurpose>,
        shots: Vec<ShotType>,
        hold: f64,
    ) -> Result<Self, PlanError> {
        if keyframes.len() < 2 {
            return Err(PlanError::InvalidPlan("a plan needs at least two keyframes".into()));
        }
        if keyframes[0].time != 0.0 {
            return Err(PlanError::InvalidPlan("first keyframe must be at time 0".into()));
        }
        for w in keyframes.windows(2) {
            if w[1].time.partial_cmp(&w[0].time) != Some(std::cmp::Ordering::Greater) || !w[1].time.is_finite() {
                return Err(PlanError::InvalidPlan(format!(
                    "keyframe times must increase strictly ({} then {})",
                    w[0].time, w[1].time
                )));
            }
        }
        if shots.is_empty() || shots.len() > 2 {
            return Err(PlanError::InvalidPlan(format!(
                "a plan carries one or two shots, got {}",
                shots.len()
            )));
        }
        let span = keyframes.last().unwrap().time;
        if !hold.is_finite() || hold < 0.0 || hold >= span {
            return Err(PlanError::InvalidPlan(format!("hold {hold} must lie in [0, {span})")));
        }
        Ok(Self { keyframes, easing, target, purpose, shots, hold })
    }

    pub fn keyframes(&self) -> &[Keyframe] {
        &self.keyframes
    }
    pub fn easing(&self) -> EasingKind {
        self.easing
    }
    pub fn target(&self) -> &GeospatialTarget {
        &self.target
    }
    pub fn purpose(&self) -> Option<NarrativePurpose> {
        self.purpose
    }
    pub fn shots(&self) -> &[ShotType] {
        &self.shots
    }
    pub fn hold(&self) -> f64 {
        self.hold
    }

    /// Total duration including the dwell.
    pub fn span(&self) -> f64 {
        self.keyframes.last().unwrap().time
    }

    /// Duration of the moving part.
    pub fn motion_span(&self) -> f64 {
        self.span() - self.hold
    }

    pub fn start_state(&self) -> CameraState {
        self.keyframes[0].state
    }

    pub fn end_state(&self) -> CameraState {
        self.keyframes.last().unwrap().state
    }

    /// State at plan time `t` (clamped to `[0, span]`). Easing warps the
    /// moving part as a whole; keyframes are joined piecewise-linearly.
    pub fn state_at(&self, t: f64) -> CameraState {
        let motion = self.motion_span();
        if t <= 0.0 {
            return self.start_state();
        }
        if t >= motion {
            return self.end_state();
        }
        let warped = self.easing.apply(t / motion) * motion;
        let idx = self.keyframes.partition_point(|k| k.time <= warped).clamp(1, self.keyframes.len() - 1);
        let (a, b) = (&self.keyframes[idx - 1], &self.keyframes[idx]);
        let local = ((warped - a.time) / (b.time - a.time)).clamp(0.0, 1.0);
        blend(&a.state, &b.state, local)
    }

    /// Parameters that change anywhere along the plan.
    pub fn varied_params(&self) -> Vec<CameraParam> {
        let first = self.start_state();
        let c0 = project(first.center());
        CameraParam::ALL
            .into_iter()
            .filter(|p| {
                self.keyframes.iter().any(|k| {
                    let s = k.state;
                    match p {
                        CameraParam::Zoom => (s.zoom() - first.zoom()).abs() > VARY_EPS,
                        CameraParam::Pitch => (s.pitch() - first.pitch()).abs() > VARY_EPS,
                        CameraParam::Bearing => {
                            bearing_delta(first.bearing(), s.bearing()).abs() > VARY_EPS
                        }
                        CameraParam::Center => project(s.center()).distance(&c0) > VARY_EPS,
                    }
                })
            })
            .collect()
    }

    /// Same plan with its time axis stretched to `duration` seconds.
    pub fn rescaled(&self, duration: f64) -> Result<Self, PlanError> {
        if !duration.is_finite() || duration <= 0.0 {
            return Err(PlanError::InvalidParam { name: "duration", value: duration });
        }
        let k = duration / self.span();
        let keyframes = self
            .keyframes
            .iter()
            .map(|kf| Keyframe { time: kf.time * k, state: kf.state })
            .collect();
        MovementPlan::new(
            keyframes,
            self.easing,
            self.target.clone(),
            self.purpose,
            self.shots.clone(),
            self.hold * k,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::GeoPoint;

    fn state(zoom: f64) -> CameraState {
        CameraState::new(GeoPoint::new(0.0, 0.0).unwrap(), zoom, 0.0, 0.0).unwrap()
    }

    #[test]
    fn shot_names_round_trip() {
        for name in ShotType::NAMES {
            assert_eq!(name.parse::<ShotType>().unwrap().name(), name);
        }
        assert_eq!("whip pan".parse::<ShotType>().unwrap(), ShotType::Pan { whip: true });
        assert_eq!("Push out".parse::<ShotType>().unwrap(), ShotType::PullOut);
        let err = "dollyzoom".parse::<ShotType>().unwrap_err();
        assert!(err.contains("Static, PushIn, PullOut, Pan, Tilt, Roll, Arc, Tracking"), "{err}");
    }

    #[test]
    fn purposes_parse_case_insensitively() {
        assert_eq!("compare".parse::<NarrativePurpose>().unwrap(), NarrativePurpose::Compare);
        assert!("Celebrate".parse::<NarrativePurpose>().is_err());
    }

    #[test]
    fn params_validation() {
        let p = ShotParams { intensity: 1.5, ..Default::default() };
        assert!(matches!(p.validate(), Err(PlanError::InvalidParam { name: "intensity", .. })));
        let p = ShotParams { duration: 0.0, ..Default::default() };
        assert!(p.validate().is_err());
        let p = ShotParams { sweep: Some(0.0), ..Default::default() };
        assert!(p.validate().is_err());
        assert!(ShotParams::default().validate().is_ok());
    }

    #[test]
    fn plan_invariants_are_enforced() {
        let kf = |t, z| Keyframe { time: t, state: state(z) };
        let ok = MovementPlan::new(
            vec![kf(0.0, 1.0), kf(2.0, 2.0)],
            EasingKind::Linear,
            GeospatialTarget::None,
            None,
            vec![ShotType::PushIn],
            0.0,
        );
        assert!(ok.is_ok());
        let unordered = MovementPlan::new(
            vec![kf(0.0, 1.0), kf(2.0, 2.0), kf(2.0, 3.0)],
            EasingKind::Linear,
            GeospatialTarget::None,
            None,
            vec![ShotType::PushIn],
            0.0,
        );
        assert!(unordered.is_err());
        let late_start = MovementPlan::new(
            vec![kf(0.5, 1.0), kf(2.0, 2.0)],
            EasingKind::Linear,
            GeospatialTarget::None,
            None,
            vec![ShotType::PushIn],
            0.0,
        );
        assert!(late_start.is_err());
    }

    #[test]
    fn sampling_respects_hold_and_easing() {
        let kf = |t, z| Keyframe { time: t, state: state(z) };
        let plan = MovementPlan::new(
            vec![kf(0.0, 2.0), kf(2.0, 4.0), kf(3.0, 4.0)],
            EasingKind::EaseInOut,
            GeospatialTarget::None,
            None,
            vec![ShotType::PushIn],
            1.0,
        )
        .unwrap();
        assert_eq!(plan.motion_span(), 2.0);
        assert_eq!(plan.state_at(1.0).zoom(), 3.0);
        assert!((plan.state_at(0.5).zoom() - (2.0 + 2.0 * 0.15625)).abs() < 1e-12);
        assert_eq!(plan.state_at(2.5).zoom(), 4.0);
        let scaled = plan.rescaled(6.0).unwrap();
        assert_eq!(scaled.hold(), 2.0);
        assert_eq!(scaled.state_at(2.0).zoom(), 3.0);
    }
}
