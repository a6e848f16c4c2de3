//! The story document as written on disk. Every struct rejects unknown
//! fields; optional fields are omitted again on output so documents
//! round-trip byte for byte.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::camera::{CameraState, EasingKind, GapFillMode, Viewport};
use crate::data::{CsvOptions, LayerKind};
use crate::shot::{Direction, NarrativePurpose, ShotParams, ShotType};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct StoryDocument {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub data: Vec<DataRef>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub layers: Vec<LayerSpec>,
    #[serde(default)]
    pub scenes: Vec<SceneSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub snapshots: BTreeMap<String, CameraState>,
    #[serde(default)]
    pub defaults: DefaultsSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum FormatName {
    Geojson,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct DataRef {
    pub id: String,
    /// File path, relative to the story file. Ignored when the caller
    /// supplies the dataset text directly.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<FormatName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<CsvOptions>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct LayerSpec {
    pub id: String,
    pub kind: LayerKind,
    pub data: String,
    /// Hexagon radius in meters (hexagon3D only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell_radius: Option<f64>,
    /// Meters of extrusion per point (hexagon3D only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height_scale: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct DefaultsSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fps: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub viewport: Option<Viewport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin_frac: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub easing: Option<EasingKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_fill: Option<GapFillMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_fit_zoom: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<StateRef>,
}

/// A camera state written inline or by snapshot name.
#[derive(Debug, Clone, PartialEq)]
pub enum StateRef {
    Snapshot(String),
    State(CameraState),
}

impl Serialize for StateRef {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            StateRef::Snapshot(name) => s.serialize_str(name),
            StateRef::State(state) => state.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for StateRef {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::String(name) => Ok(StateRef::Snapshot(name)),
            v @ Value::Object(_) => CameraState::deserialize(v)
                .map(StateRef::State)
                .map_err(serde::de::Error::custom),
            _ => Err(serde::de::Error::custom("expected a snapshot name or a camera state object")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum LayoutName {
    #[default]
    Full,
    SideBySide,
    PictureInPicture,
}

impl LayoutName {
    fn is_full(&self) -> bool {
        *self == LayoutName::Full
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SceneSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "LayoutName::is_full")]
    pub layout: LayoutName,
    /// Inset size as a fraction of the frame (pictureInPicture only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inset: Option<f64>,
    /// Idle seconds before the scene starts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pause: Option<f64>,
    pub designs: Vec<DesignSpec>,
}

/// One or two shots.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotList(pub Vec<ShotType>);

impl Serialize for ShotList {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0.as_slice() {
            [one] => one.serialize(s),
            many => many.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for ShotList {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let shots = match Value::deserialize(d)? {
            v @ Value::String(_) => vec![ShotType::deserialize(v).map_err(D::Error::custom)?],
            Value::Array(items) => items
                .into_iter()
                .map(|v| ShotType::deserialize(v).map_err(D::Error::custom))
                .collect::<Result<Vec<_>, _>>()?,
            _ => return Err(D::Error::custom("shot must be a name or a list of one or two names")),
        };
        if shots.is_empty() || shots.len() > 2 {
            return Err(D::Error::custom(format!(
                "a camera design combines one or two shots, got {}",
                shots.len()
            )));
        }
        Ok(ShotList(shots))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct DesignSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub purpose: Option<NarrativePurpose>,
    /// Absent or null means no target.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shot: Option<ShotList>,
    #[serde(default, skip_serializing_if = "ParamsOverride::is_empty")]
    pub params: ParamsOverride,
    /// Total movement length in seconds, applied after planning by uniform
    /// time scaling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotation: Option<String>,
    /// Manual mode: explicit start state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<StateRef>,
    /// Manual mode: explicit end state.
    #[serde(default, rename = "final", skip_serializing_if = "Option::is_none")]
    pub final_state: Option<StateRef>,
}

impl DesignSpec {
    pub fn is_manual(&self) -> bool {
        self.initial.is_some() || self.final_state.is_some()
    }
}

/// Shot parameters a design overrides; unset ones come from the default
/// table and the story defaults.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ParamsOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intensity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin_frac: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub align_bearing_to_path: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub easing: Option<EasingKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_meters: Option<f64>,
}

impl ParamsOverride {
    pub fn is_empty(&self) -> bool {
        *self == ParamsOverride::default()
    }

    pub fn apply(&self, base: ShotParams) -> ShotParams {
        ShotParams {
            intensity: self.intensity.unwrap_or(base.intensity),
            duration: self.duration.unwrap_or(base.duration),
            margin_frac: self.margin_frac.unwrap_or(base.margin_frac),
            sweep: self.sweep.or(base.sweep),
            direction: self.direction.unwrap_or(base.direction),
            align_bearing_to_path: self.align_bearing_to_path.unwrap_or(base.align_bearing_to_path),
            hold: self.hold.unwrap_or(base.hold),
            easing: self.easing.unwrap_or(base.easing),
            window_meters: self.window_meters.or(base.window_meters),
        }
    }
}

/// How a design names its target. Exactly one selector must be set.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct TargetSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature_id: Option<String>,
    /// Feature name to look up, or the display name of an inline geometry.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lasso: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiple: Option<Vec<TargetSpec>>,
    /// Restricts featureId, name and lasso lookups to one dataset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
}

impl TargetSpec {
    /// Short text naming the spec in error messages.
    pub fn describe(&self) -> String {
        if let Some(id) = &self.feature_id {
            return format!("featureId {id}");
        }
        if self.point.is_none() && self.region.is_none() && self.path.is_none() {
            if let Some(n) = &self.name {
                return n.clone();
            }
        }
        let kind = if self.point.is_some() {
            "point"
        } else if self.lasso.is_some() {
            "lasso"
        } else if self.region.is_some() {
            "region"
        } else if self.path.is_some() {
            "path"
        } else if self.multiple.is_some() {
            "multiple"
        } else {
            "empty target"
        };
        match &self.name {
            Some(n) => format!("{kind} '{n}'"),
            None => kind.to_string(),
        }
    }
}
