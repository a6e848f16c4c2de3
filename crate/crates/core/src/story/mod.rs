//! Story documents: parsing, target resolution, compilation to a camera
//! script, and export.

mod compile;
mod document;
mod resolve;
mod script;
mod storyboard;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::camera::{CameraError, CameraState, EasingKind, GapFillMode, Viewport, DEFAULT_MAX_FIT_ZOOM, MAX_MARGIN, MAX_ZOOM};
use crate::data::{DataError, LayerKind};
use crate::geo::{GeoError, GeoPoint, GeoPolygon, GeoPolyline};
use crate::shot::{check_purpose_target, NarrativePurpose, PlanError, ShotParams, ShotType};
use crate::target::{GeospatialTarget, TargetKind};
use crate::timeline::TimelineError;

pub use compile::{compile, compile_story, compile_with, layout_rects, Compiled, MovementInfo, SecondaryMovement};
pub use document::{
    DataRef, DefaultsSpec, DesignSpec, FormatName, LayerSpec, LayoutName, ParamsOverride, SceneSpec,
    ShotList, StateRef, StoryDocument, TargetSpec,
};
pub use resolve::{load_datasets, resolve_targets, ResolvedDesign, ResolvedScene, ResolvedStory};
pub use script::{export_script, format_sig9, Annotation, CameraScript, Frame, MovementSummary, Rect, Track};
pub use storyboard::storyboard;

pub const DEFAULT_FPS: u32 = 30;
pub const MAX_FPS: u32 = 240;
pub const DEFAULT_VIEWPORT: Viewport = Viewport { width: 1280, height: 720 };

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StoryError {
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("unresolved target '{spec}' in scene {scene}")]
    Unresolved { spec: String, scene: usize },
    #[error("dataset '{0}' was not supplied")]
    MissingDataset(String),
    #[error("dataset '{id}': {source}")]
    Data { id: String, source: DataError },
    #[error("scene {scene}: {source}")]
    Plan { scene: usize, source: PlanError },
    #[error(transparent)]
    Timeline(#[from] TimelineError),
    #[error(transparent)]
    Camera(#[from] CameraError),
}

fn invalid(path: impl Into<String>, message: impl ToString) -> StoryError {
    StoryError::Invalid { path: path.into(), message: message.to_string() }
}

/// Story-wide settings with defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub fps: u32,
    pub viewport: Viewport,
    pub margin_frac: f64,
    pub easing: EasingKind,
    pub gap_fill: GapFillMode,
    pub max_fit_zoom: f64,
    pub initial: Option<CameraState>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Layout {
    Full,
    SideBySide,
    PictureInPicture { inset: f64 },
}

impl Layout {
    pub fn design_count(self) -> usize {
        match self {
            Layout::Full => 1,
            _ => 2,
        }
    }
}

/// A target reference checked for shape but not yet looked up in data.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetRef {
    None,
    Inline(GeospatialTarget),
    FeatureId { id: String, dataset: Option<String> },
    Name { name: String, dataset: Option<String> },
    Lasso { polygon: GeoPolygon, dataset: Option<String> },
    Multiple(Vec<TargetRef>),
}

impl TargetRef {
    /// Target kind when it does not depend on data.
    pub fn static_kind(&self) -> Option<TargetKind> {
        match self {
            TargetRef::None => Some(TargetKind::None),
            TargetRef::Inline(t) => Some(t.kind()),
            TargetRef::Multiple(_) => Some(TargetKind::Multiple),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub purpose: Option<NarrativePurpose>,
    pub target: TargetRef,
    pub target_spec: Option<TargetSpec>,
    /// Explicit shots; empty means "use the default for the purpose".
    pub shots: Vec<ShotType>,
    pub params: ParamsOverride,
    pub duration: Option<f64>,
    pub annotation: Option<String>,
    /// Manual mode start and end states.
    pub manual: Option<(CameraState, CameraState)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub id: String,
    pub layout: Layout,
    pub pause: f64,
    pub designs: Vec<Design>,
}

/// A validated story document.
#[derive(Debug, Clone, PartialEq)]
pub struct Story {
    pub document: StoryDocument,
    pub settings: Settings,
    pub scenes: Vec<Scene>,
    /// Settings that were absent and took their default, as `name=value`.
    pub injected: Vec<String>,
}

/// Parses and validates a story document.
pub fn parse_story(text: &str) -> Result<Story, StoryError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let document: StoryDocument = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        StoryError::Schema { path: if path == "." { "$".into() } else { path }, message: e.into_inner().to_string() }
    })?;
    Story::from_document(document)
}

impl Story {
    pub fn from_document(document: StoryDocument) -> Result<Self, StoryError> {
        let mut injected = Vec::new();
        let data_ids = check_data(&document)?;
        let settings = settings(&document, &mut injected)?;

        let mut scene_ids = BTreeSet::new();
        let mut scenes = Vec::with_capacity(document.scenes.len());
        for (si, spec) in document.scenes.iter().enumerate() {
            let path = format!("scenes[{si}]");
            let id = spec.id.clone().unwrap_or_else(|| format!("scene-{}", si + 1));
            if !scene_ids.insert(id.clone()) {
                return Err(invalid(format!("{path}.id"), format!("duplicate scene id '{id}'")));
            }
            let layout = match (spec.layout, spec.inset) {
                (LayoutName::Full, None) => Layout::Full,
                (LayoutName::SideBySide, None) => Layout::SideBySide,
                (LayoutName::PictureInPicture, inset) => {
                    let inset = inset.unwrap_or(0.3);
                    if !(inset > 0.0 && inset < 1.0) {
                        return Err(invalid(format!("{path}.inset"), format!("inset must lie in (0, 1), got {inset}")));
                    }
                    Layout::PictureInPicture { inset }
                }
                (_, Some(_)) => {
                    return Err(invalid(format!("{path}.inset"), "inset only applies to the pictureInPicture layout"))
                }
            };
            if spec.designs.len() != layout.design_count() {
                return Err(invalid(
                    format!("{path}.designs"),
                    format!(
                        "a {:?} scene has exactly {} camera design(s), got {}",
                        spec.layout,
                        layout.design_count(),
                        spec.designs.len()
                    ),
                ));
            }
            let pause = spec.pause.unwrap_or(0.0);
            if !pause.is_finite() || pause < 0.0 {
                return Err(invalid(format!("{path}.pause"), format!("pause must be non-negative, got {pause}")));
            }
            let designs = spec
                .designs
                .iter()
                .enumerate()
                .map(|(di, d)| design(d, &format!("{path}.designs[{di}]"), &document, &data_ids, &settings))
                .collect::<Result<Vec<_>, _>>()?;
            scenes.push(Scene { id, layout, pause, designs });
        }
        Ok(Story { document, settings, scenes, injected })
    }

    /// Base parameters for a design before its own overrides.
    pub fn base_params(&self, table_params: ShotParams) -> ShotParams {
        ShotParams { margin_frac: self.settings.margin_frac, easing: self.settings.easing, ..table_params }
    }
}

fn check_data(doc: &StoryDocument) -> Result<BTreeSet<String>, StoryError> {
    let mut ids = BTreeSet::new();
    for (i, d) in doc.data.iter().enumerate() {
        if d.id.is_empty() {
            return Err(invalid(format!("data[{i}].id"), "dataset id must not be empty"));
        }
        if !ids.insert(d.id.clone()) {
            return Err(invalid(format!("data[{i}].id"), format!("duplicate dataset id '{}'", d.id)));
        }
        if d.csv.is_some() && d.format == Some(FormatName::Geojson) {
            return Err(invalid(format!("data[{i}].csv"), "csv options given for a GeoJSON dataset"));
        }
    }
    let mut layer_ids = BTreeSet::new();
    for (i, l) in doc.layers.iter().enumerate() {
        let path = format!("layers[{i}]");
        if !layer_ids.insert(l.id.clone()) {
            return Err(invalid(format!("{path}.id"), format!("duplicate layer id '{}'", l.id)));
        }
        if !ids.contains(&l.data) {
            return Err(invalid(format!("{path}.data"), format!("unknown dataset '{}'", l.data)));
        }
        match l.kind {
            LayerKind::Hexagon3D => {
                match l.cell_radius {
                    Some(r) if r.is_finite() && r > 0.0 => {}
                    other => {
                        return Err(invalid(
                            format!("{path}.cellRadius"),
                            format!("hexagon3D layers need a positive cellRadius, got {other:?}"),
                        ))
                    }
                }
                if let Some(h) = l.height_scale {
                    if !h.is_finite() || h < 0.0 {
                        return Err(invalid(format!("{path}.heightScale"), format!("must be non-negative, got {h}")));
                    }
                }
            }
            _ if l.cell_radius.is_some() || l.height_scale.is_some() => {
                return Err(invalid(path, "cellRadius and heightScale only apply to hexagon3D layers"));
            }
            _ => {}
        }
    }
    Ok(ids)
}

fn settings(doc: &StoryDocument, injected: &mut Vec<String>) -> Result<Settings, StoryError> {
    let d = &doc.defaults;
    let fps = d.fps.unwrap_or_else(|| {
        injected.push(format!("fps={DEFAULT_FPS}"));
        DEFAULT_FPS
    });
    if fps == 0 || fps > MAX_FPS {
        return Err(invalid("defaults.fps", format!("fps must lie in [1, {MAX_FPS}], got {fps}")));
    }
    let viewport = d.viewport.unwrap_or_else(|| {
        injected.push(format!("viewport={}x{}", DEFAULT_VIEWPORT.width, DEFAULT_VIEWPORT.height));
        DEFAULT_VIEWPORT
    });
    let margin_frac = d.margin_frac.unwrap_or_else(|| {
        injected.push(format!("marginFrac={}", crate::shot::DEFAULT_MARGIN));
        crate::shot::DEFAULT_MARGIN
    });
    if !(0.0..=MAX_MARGIN).contains(&margin_frac) {
        return Err(invalid("defaults.marginFrac", format!("must lie in [0, {MAX_MARGIN}], got {margin_frac}")));
    }
    let easing = d.easing.unwrap_or_else(|| {
        injected.push("easing=linear".into());
        EasingKind::Linear
    });
    let gap_fill = d.gap_fill.unwrap_or_else(|| {
        injected.push("gapFill=flyTo".into());
        GapFillMode::FlyTo
    });
    let max_fit_zoom = d.max_fit_zoom.unwrap_or_else(|| {
        injected.push(format!("maxFitZoom={DEFAULT_MAX_FIT_ZOOM}"));
        DEFAULT_MAX_FIT_ZOOM
    });
    if !(0.0..=MAX_ZOOM).contains(&max_fit_zoom) {
        return Err(invalid("defaults.maxFitZoom", format!("must lie in [0, {MAX_ZOOM}], got {max_fit_zoom}")));
    }
    let initial = d.initial.as_ref().map(|r| state_ref(r, doc, "defaults.initial")).transpose()?;
    Ok(Settings { fps, viewport, margin_frac, easing, gap_fill, max_fit_zoom, initial })
}

fn state_ref(r: &StateRef, doc: &StoryDocument, path: &str) -> Result<CameraState, StoryError> {
    match r {
        StateRef::State(s) => Ok(*s),
        StateRef::Snapshot(name) => doc
            .snapshots
            .get(name)
            .copied()
            .ok_or_else(|| invalid(path, format!("unknown snapshot '{name}'"))),
    }
}

fn design(
    spec: &DesignSpec,
    path: &str,
    doc: &StoryDocument,
    data_ids: &BTreeSet<String>,
    settings: &Settings,
) -> Result<Design, StoryError> {
    let target = match &spec.target {
        None => TargetRef::None,
        Some(t) => target_ref(t, &format!("{path}.target"), data_ids, 0)?,
    };
    let shots = spec.shot.as_ref().map(|s| s.0.clone()).unwrap_or_default();
    let manual = match (&spec.initial, &spec.final_state) {
        (None, None) => None,
        (Some(a), Some(b)) => {
            if shots.is_empty() {
                return Err(invalid(path, "manual designs must name their shot"));
            }
            let a = state_ref(a, doc, &format!("{path}.initial"))?;
            let b = state_ref(b, doc, &format!("{path}.final"))?;
            if a.fov() != b.fov() {
                return Err(invalid(path, CameraError::FovMismatch(a.fov(), b.fov())));
            }
            Some((a, b))
        }
        _ => return Err(invalid(path, "manual designs need both initial and final states")),
    };
    if spec.purpose.is_none() && manual.is_none() {
        return Err(invalid(
            format!("{path}.purpose"),
            "a narrative purpose is required unless shot, initial and final are all given",
        ));
    }
    if let Some(p) = spec.purpose {
        if let Some(kind) = target.static_kind() {
            check_purpose_target(p, kind).map_err(|e| invalid(path, e))?;
        }
        if matches!(target, TargetRef::Lasso { .. }) && p == NarrativePurpose::Dynamics {
            check_purpose_target(p, TargetKind::Region).map_err(|e| invalid(path, e))?;
        }
    }
    if shots.contains(&ShotType::Tracking) {
        if let Some(kind) = target.static_kind().filter(|k| *k != TargetKind::Path) {
            return Err(invalid(path, format!("Tracking shot cannot serve a {kind} target; tracking follows a path")));
        }
    }
    let base = ShotParams { margin_frac: settings.margin_frac, easing: settings.easing, ..Default::default() };
    spec.params.apply(base).validate().map_err(|e| invalid(format!("{path}.params"), e))?;
    if let Some(d) = spec.duration {
        if !d.is_finite() || d <= 0.0 {
            return Err(invalid(format!("{path}.duration"), format!("duration must be positive, got {d}")));
        }
    }
    Ok(Design {
        purpose: spec.purpose,
        target,
        target_spec: spec.target.clone(),
        shots,
        params: spec.params,
        duration: spec.duration,
        annotation: spec.annotation.clone(),
        manual,
    })
}

fn point(c: [f64; 2], path: &str) -> Result<GeoPoint, StoryError> {
    GeoPoint::new(c[0], c[1]).map_err(|e| invalid(path, e))
}

fn points(cs: &[[f64; 2]], path: &str) -> Result<Vec<GeoPoint>, StoryError> {
    cs.iter().enumerate().map(|(i, &c)| point(c, &format!("{path}[{i}]"))).collect()
}

fn geo(path: &str) -> impl Fn(GeoError) -> StoryError + '_ {
    move |e| invalid(path, e)
}

fn target_ref(t: &TargetSpec, path: &str, data_ids: &BTreeSet<String>, depth: usize) -> Result<TargetRef, StoryError> {
    let geometric = [t.point.is_some(), t.region.is_some(), t.path.is_some()];
    let selectors = [t.feature_id.is_some(), t.lasso.is_some(), t.multiple.is_some()]
        .iter()
        .chain(&geometric)
        .filter(|x| **x)
        .count();
    let name_only = selectors == 0 && t.name.is_some();
    if selectors > 1 || (selectors == 0 && !name_only) {
        return Err(invalid(
            path,
            "a target sets exactly one of featureId, name, point, lasso, region, path, multiple",
        ));
    }
    if let Some(ds) = &t.dataset {
        if !data_ids.contains(ds) {
            return Err(invalid(format!("{path}.dataset"), format!("unknown dataset '{ds}'")));
        }
        if t.feature_id.is_none() && t.lasso.is_none() && !name_only {
            return Err(invalid(format!("{path}.dataset"), "dataset only applies to featureId, name and lasso"));
        }
    }
    if t.name.is_some() && (t.feature_id.is_some() || t.lasso.is_some() || t.multiple.is_some()) {
        return Err(invalid(format!("{path}.name"), "name labels only inline point, region and path targets"));
    }
    let name = t.name.clone();
    if let Some(id) = &t.feature_id {
        return Ok(TargetRef::FeatureId { id: id.clone(), dataset: t.dataset.clone() });
    }
    if let Some(c) = t.point {
        return Ok(TargetRef::Inline(GeospatialTarget::location(point(c, &format!("{path}.point"))?).with_name(name)));
    }
    if let Some(ring) = &t.region {
        let p = format!("{path}.region");
        let poly = GeoPolygon::new(points(ring, &p)?).map_err(geo(&p))?;
        return Ok(TargetRef::Inline(GeospatialTarget::region(poly).with_name(name)));
    }
    if let Some(line) = &t.path {
        let p = format!("{path}.path");
        let pl = GeoPolyline::new(points(line, &p)?).map_err(geo(&p))?;
        return Ok(TargetRef::Inline(GeospatialTarget::path(pl).with_name(name)));
    }
    if let Some(ring) = &t.lasso {
        let p = format!("{path}.lasso");
        let poly = GeoPolygon::new(points(ring, &p)?).map_err(geo(&p))?;
        return Ok(TargetRef::Lasso { polygon: poly, dataset: t.dataset.clone() });
    }
    if let Some(members) = &t.multiple {
        if depth > 0 {
            return Err(invalid(path, "multiple targets may not be nested"));
        }
        if members.is_empty() {
            return Err(invalid(path, "multiple target must have at least one member"));
        }
        let refs = members
            .iter()
            .enumerate()
            .map(|(i, m)| target_ref(m, &format!("{path}.multiple[{i}]"), data_ids, depth + 1))
            .collect::<Result<Vec<_>, _>>()?;
        if refs.iter().any(|r| matches!(r, TargetRef::Lasso { .. })) {
            return Err(invalid(path, "a lasso cannot be a member of a multiple target"));
        }
        return Ok(TargetRef::Multiple(refs));
    }
    Ok(TargetRef::Name { name: name.expect("name-only target"), dataset: t.dataset.clone() })
}
