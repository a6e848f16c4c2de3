//! Planning every scene, scheduling the result and sampling frames.

use std::collections::BTreeMap;

use super::resolve::{load_datasets, resolve_targets};
use super::script::{Annotation, CameraScript, Frame, MovementSummary, Rect, Track};
use super::{Design, Layout, ResolvedDesign, ResolvedStory, Story, StoryError};
use crate::camera::{camera_altitude_meters, fit_bounds_with, CameraState, FitOptions, Viewport};
use crate::data::{inflated_bounds, LayerKind};
use crate::geo::{GeoBounds, GeoPoint};
use crate::shot::{
    combine_shots, plan_shot, DefaultShotTable, Keyframe, MovementPlan, PlanError, ShotParams,
    ShotRequest, ShotType,
};
use crate::target::{bounds_of, GeospatialTarget};
use crate::timeline::{MovementId, Segment, Timeline, TIME_EPS};

/// Second-track movement of a split-screen scene, running alongside the
/// first-track movement `primary`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondaryMovement {
    pub primary: MovementId,
    pub scene: usize,
    pub plan: MovementPlan,
    pub rect: Rect,
    pub label: String,
    pub annotation: Option<String>,
    pub manual: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MovementInfo {
    pub id: MovementId,
    /// 1-based scene number.
    pub scene: usize,
    pub rect: Rect,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Compiled {
    pub script: CameraScript,
    pub timeline: Timeline,
    pub initial: CameraState,
    pub info: Vec<MovementInfo>,
    pub secondary: Vec<SecondaryMovement>,
}

/// Loads datasets, resolves targets and compiles in one step.
pub fn compile_story(
    story: &Story,
    texts: &BTreeMap<String, String>,
    table: &DefaultShotTable,
) -> Result<(ResolvedStory, Compiled), StoryError> {
    let features = load_datasets(story, texts)?;
    let resolved = resolve_targets(story, features)?;
    let compiled = compile_with(&resolved, table)?;
    Ok((resolved, compiled))
}

pub fn compile(resolved: &ResolvedStory) -> Result<Compiled, StoryError> {
    compile_with(resolved, DefaultShotTable::builtin())
}

pub fn compile_with(resolved: &ResolvedStory, table: &DefaultShotTable) -> Result<Compiled, StoryError> {
    let settings = &resolved.story.settings;
    let vp = settings.viewport;
    let fit = FitOptions { max_fit_zoom: settings.max_fit_zoom };
    let initial = initial_state(resolved, &fit)?;
    let mut timeline = Timeline::new(settings.gap_fill, vp.w().max(vp.h()));
    let mut info = Vec::new();
    let mut secondary = Vec::new();
    let mut current = initial;

    for (si, scene) in resolved.scenes.iter().enumerate() {
        let number = si + 1;
        let rects = layout_rects(scene.layout, vp);
        let ctx = Planner { resolved, table, fit, scene: number };
        let first = &scene.designs[0];
        let plan = ctx.plan(first, current, rects[0].viewport())?;
        let (mut t, id) = timeline.append_with_gap(plan.clone(), scene.pause, first.design.annotation.clone())?;
        if first.design.manual.is_some() {
            t = t.replace_plan(id, plan, true)?;
        }
        if let Some(d) = first.design.duration {
            t = t.set_duration(id, d)?;
        }
        let placed = t.movement(id).expect("just appended").plan.clone();
        current = placed.end_state();
        timeline = t;
        info.push(MovementInfo { id, scene: number, rect: rects[0] });

        if let Some(second) = scene.designs.get(1) {
            let plan = ctx
                .plan(second, placed.start_state(), rects[1].viewport())?
                .rescaled(placed.span())
                .map_err(|source| StoryError::Plan { scene: number, source })?;
            secondary.push(SecondaryMovement {
                primary: id,
                scene: number,
                plan,
                rect: rects[1],
                label: second.label.clone(),
                annotation: second.design.annotation.clone(),
                manual: second.design.manual.is_some(),
            });
        }
    }
    let timeline = timeline.fill_gaps()?;
    let script = sample(resolved, &timeline, &info, &secondary);
    Ok(Compiled { script, timeline, initial, info, secondary })
}

/// Sub-viewports of a layout, first track first.
pub fn layout_rects(layout: Layout, vp: Viewport) -> Vec<Rect> {
    match layout {
        Layout::Full => vec![Rect::full(vp)],
        Layout::SideBySide => {
            let left = vp.width / 2;
            vec![
                Rect { x: 0, y: 0, width: left, height: vp.height },
                Rect { x: left, y: 0, width: vp.width - left, height: vp.height },
            ]
        }
        Layout::PictureInPicture { inset } => {
            let w = ((vp.w() * inset).round() as u32).clamp(1, vp.width);
            let h = ((vp.h() * inset).round() as u32).clamp(1, vp.height);
            vec![Rect::full(vp), Rect { x: vp.width - w, y: vp.height - h, width: w, height: h }]
        }
    }
}

fn initial_state(resolved: &ResolvedStory, fit: &FitOptions) -> Result<CameraState, StoryError> {
    let settings = &resolved.story.settings;
    if let Some(s) = settings.initial {
        return Ok(s);
    }
    let all = GeoBounds::from_points(resolved.all_features().flat_map(|f| f.geometry.vertices()));
    match all {
        Some(b) => Ok(fit_bounds_with(&b, settings.viewport, settings.margin_frac, 0.0, 0.0, fit)?),
        None => Ok(CameraState::new(GeoPoint::new(0.0, 0.0).expect("origin"), 1.0, 0.0, 0.0)?),
    }
}

struct Planner<'a> {
    resolved: &'a ResolvedStory,
    table: &'a DefaultShotTable,
    fit: FitOptions,
    scene: usize,
}

impl Planner<'_> {
    fn err(&self) -> impl Fn(PlanError) -> StoryError + '_ {
        move |source| StoryError::Plan { scene: self.scene, source }
    }

    fn plan(&self, rd: &ResolvedDesign, current: CameraState, viewport: Viewport) -> Result<MovementPlan, StoryError> {
        let d = &rd.design;
        let (shots, table_params) = match (d.shots.is_empty(), d.purpose) {
            (true, Some(p)) => {
                let (shot, params) = self.table.lookup(p, rd.target.kind()).map_err(self.err())?;
                (vec![shot], params)
            }
            _ => (d.shots.clone(), ShotParams::default()),
        };
        let params = d.params.apply(self.resolved.story.base_params(table_params));
        if let Some((a, b)) = d.manual {
            return manual_plan(d, &rd.target, shots, a, b, params).map_err(self.err());
        }
        let framing = self.framing(&rd.target)?;
        let request = |shot: ShotType, from: CameraState| {
            let mut r = ShotRequest::new(shot, &rd.target, d.purpose, from, viewport, params);
            r.framing = framing;
            r.fit = self.fit;
            plan_shot(&r)
        };
        let a = request(shots[0], current).map_err(self.err())?;
        match shots.get(1) {
            None => Ok(a),
            Some(&s) => {
                let b = request(s, a.start_state()).map_err(self.err())?;
                combine_shots(&a, &b).map_err(self.err())
            }
        }
    }

    /// Union of the target's bounds grown for every extruded layer.
    fn framing(&self, target: &GeospatialTarget) -> Result<Option<GeoBounds>, StoryError> {
        if matches!(target, GeospatialTarget::None) {
            return Ok(None);
        }
        let geo = |e| StoryError::Plan { scene: self.scene, source: PlanError::Geo(e) };
        let mut out: Option<GeoBounds> = None;
        for (_, layer) in self.resolved.layers.iter().filter(|(_, l)| l.kind == LayerKind::Hexagon3D) {
            let b = inflated_bounds(target, layer).map_err(geo)?;
            out = Some(out.map_or(b, |o| o.union(b)));
        }
        match out {
            Some(b) if b != bounds_of(target).map_err(geo)? => Ok(Some(b)),
            _ => Ok(None),
        }
    }
}

fn manual_plan(
    d: &Design,
    target: &GeospatialTarget,
    shots: Vec<ShotType>,
    a: CameraState,
    b: CameraState,
    params: ShotParams,
) -> Result<MovementPlan, PlanError> {
    let mut keyframes = vec![Keyframe { time: 0.0, state: a }, Keyframe { time: params.duration, state: b }];
    if params.hold > 0.0 {
        keyframes.push(Keyframe { time: params.duration + params.hold, state: b });
    }
    MovementPlan::new(keyframes, params.easing, target.clone(), d.purpose, shots, params.hold)
}

fn rect_at(info: &[MovementInfo], timeline: &Timeline, t: f64, full: Rect) -> Rect {
    let active = timeline
        .movements()
        .filter(|m| m.start <= t + TIME_EPS && t < m.end() - TIME_EPS)
        .last()
        .or_else(|| timeline.movements().find(|m| (m.end() - t).abs() <= TIME_EPS && t >= timeline.end_time() - TIME_EPS));
    active
        .and_then(|m| info.iter().find(|i| i.id == m.id))
        .map_or(full, |i| i.rect)
}

fn sample(
    resolved: &ResolvedStory,
    timeline: &Timeline,
    info: &[MovementInfo],
    secondary: &[SecondaryMovement],
) -> CameraScript {
    let settings = &resolved.story.settings;
    let (fps, vp) = (settings.fps, settings.viewport);
    let duration = timeline.end_time();
    let n = CameraScript::frame_count(duration, fps);
    let full = Rect::full(vp);
    let last = (n as f64 - 1.0).max(0.0);
    let time = |i: u64| (i as f64 / fps as f64).min(duration).max(0.0);

    let mut first = Track::default();
    for i in 0..n {
        let t = time(i);
        let state = timeline.state_at(t).expect("non-empty timeline");
        let rect = rect_at(info, timeline, t, full);
        first.frames.push(Frame { t, state, altitude_m: camera_altitude_meters(&state, rect.viewport()), viewport: Some(rect) });
    }
    let mut tracks = vec![first];

    let window = |s: &SecondaryMovement| {
        let m = timeline.movement(s.primary).expect("secondary follows a placed movement");
        (m.start, m.end())
    };
    if !secondary.is_empty() {
        let mut second = Track::default();
        for (i, f1) in tracks[0].frames.iter().enumerate() {
            let t = f1.t;
            let active = secondary.iter().find(|s| {
                let (a, b) = window(s);
                a <= t + TIME_EPS && (t < b - TIME_EPS || (i as f64 == last && t <= b + TIME_EPS))
            });
            let frame = match active {
                Some(s) => {
                    let (a, _) = window(s);
                    let state = s.plan.state_at(t - a);
                    Frame { t, state, altitude_m: camera_altitude_meters(&state, s.rect.viewport()), viewport: Some(s.rect) }
                }
                None => Frame { viewport: None, ..f1.clone() },
            };
            second.frames.push(frame);
        }
        tracks.push(second);
    }

    let frame_span = |start: f64, end: f64| {
        let a = (start * fps as f64 - 1e-9).ceil().max(0.0) as u64;
        let b = ((end * fps as f64 + 1e-9).floor() as u64).min(n.saturating_sub(1));
        (a, b)
    };
    let mut annotations = Vec::new();
    for m in timeline.movements() {
        if let Some(text) = &m.annotation {
            let (start_frame, end_frame) = frame_span(m.start, m.end());
            annotations.push(Annotation { text: text.clone(), start_frame, end_frame, track: 1, movement: Some(m.id) });
        }
    }
    for s in secondary {
        if let Some(text) = &s.annotation {
            let (a, b) = window(s);
            let (start_frame, end_frame) = frame_span(a, b);
            annotations.push(Annotation { text: text.clone(), start_frame, end_frame, track: 2, movement: Some(s.primary) });
        }
    }
    annotations.sort_by_key(|a| (a.start_frame, a.track));

    let mut movements = Vec::new();
    for seg in timeline.segments() {
        movements.push(match seg {
            Segment::Movement(m) => MovementSummary {
                id: Some(m.id),
                kind: "movement",
                track: 1,
                start: m.start,
                duration: m.duration(),
                scene: info.iter().find(|i| i.id == m.id).map(|i| i.scene),
                purpose: m.plan.purpose(),
                shots: m.plan.shots().to_vec(),
                target: m.plan.target().label(),
                hold: m.plan.hold(),
                manual: m.manual_override,
            },
            Segment::Filler(f) => MovementSummary {
                id: None,
                kind: "filler",
                track: 1,
                start: f.start,
                duration: f.trajectory.duration(),
                scene: None,
                purpose: None,
                shots: Vec::new(),
                target: String::new(),
                hold: 0.0,
                manual: false,
            },
        });
    }
    for s in secondary {
        let (a, b) = window(s);
        movements.push(MovementSummary {
            id: Some(s.primary),
            kind: "movement",
            track: 2,
            start: a,
            duration: b - a,
            scene: Some(s.scene),
            purpose: s.plan.purpose(),
            shots: s.plan.shots().to_vec(),
            target: s.label.clone(),
            hold: s.plan.hold(),
            manual: s.manual,
        });
    }

    CameraScript { fps, duration, viewport: vp, tracks, annotations, movements }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::story::{parse_story, script::export_script};

    fn build(doc: &str, data: &[(&str, &str)]) -> Result<Compiled, StoryError> {
        let story = parse_story(doc)?;
        let texts: BTreeMap<String, String> = data.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        let features = load_datasets(&story, &texts)?;
        compile(&resolve_targets(&story, features)?)
    }

    const PTS: &str = "id,lon,lat,name\n1,-87.6,41.9,Chicago\n2,-74.0,40.7,New York\n3,-118.2,34.1,Los Angeles\n";

    #[test]
    fn two_scenes_with_a_filler() {
        let doc = r#"{"data": [{"id": "c", "path": "c.csv"}], "scenes": [
            {"designs": [{"purpose": "Emphasize", "target": {"name": "Chicago"}, "annotation": "Chicago"}]},
            {"pause": 2, "designs": [{"purpose": "Emphasize", "target": {"name": "New York"}}]}]}"#;
        let c = build(doc, &[("c", PTS)]).unwrap();
        assert_eq!(c.script.duration, 8.0);
        assert_eq!(c.script.tracks.len(), 1);
        assert_eq!(c.script.tracks[0].frames.len(), 241);
        let kinds: Vec<&str> = c.script.movements.iter().map(|m| m.kind).collect();
        assert_eq!(kinds, ["movement", "filler", "movement"]);
        assert_eq!(c.script.annotations[0].start_frame, 0);
        assert_eq!(c.script.annotations[0].end_frame, 90);
        // Frame at a movement start equals its first keyframe.
        let m2 = c.timeline.movement(MovementId(2)).unwrap();
        let f = &c.script.tracks[0].frames[150];
        assert_eq!(f.t, 5.0);
        assert_eq!(f.state, m2.plan.start_state());
    }

    #[test]
    fn side_by_side_uses_two_tracks() {
        let doc = r#"{"data": [{"id": "c", "path": "c.csv"}], "scenes": [
            {"layout": "sideBySide", "designs": [
                {"purpose": "Emphasize", "target": {"name": "Chicago"}},
                {"purpose": "Emphasize", "target": {"name": "Los Angeles"}, "shot": "PullOut", "params": {"duration": 5}}]}]}"#;
        let c = build(doc, &[("c", PTS)]).unwrap();
        assert_eq!(c.script.tracks.len(), 2);
        let f = &c.script.tracks[1].frames[0];
        assert_eq!(f.viewport, Some(Rect { x: 640, y: 0, width: 640, height: 720 }));
        assert_eq!(c.script.tracks[0].frames[0].viewport.unwrap().width, 640);
        // The second design is stretched to the first one's window.
        assert_eq!(c.secondary[0].plan.span(), 3.0);
        assert_eq!(c.script.movements.len(), 2);
    }

    #[test]
    fn picture_in_picture_rects() {
        let vp = Viewport::new(1280, 720).unwrap();
        let r = layout_rects(Layout::PictureInPicture { inset: 0.3 }, vp);
        assert_eq!(r[1], Rect { x: 896, y: 504, width: 384, height: 216 });
        let s = layout_rects(Layout::SideBySide, Viewport::new(1281, 720).unwrap());
        assert_eq!((s[0].width, s[1].x, s[1].width), (640, 640, 641));
    }

    #[test]
    fn duration_override_and_manual() {
        let doc = r#"{"scenes": [
            {"designs": [{"purpose": "Overview", "duration": 4.5}]},
            {"designs": [{"shot": "PushIn",
                "initial": {"lon": 0, "lat": 0, "zoom": 2, "pitch": 0, "bearing": 0},
                "final": {"lon": 10, "lat": 0, "zoom": 4, "pitch": 0, "bearing": 0},
                "params": {"duration": 2}}]}]}"#;
        let c = build(doc, &[]).unwrap();
        let ms: Vec<_> = c.timeline.movements().collect();
        assert_eq!(ms[0].duration(), 4.5);
        assert!(ms[1].manual_override);
        assert_eq!(ms[1].start, 4.5);
        assert_eq!(c.script.duration, 6.5);
        assert_eq!(c.script.tracks[0].frames.last().unwrap().state.zoom(), 4.0);
    }

    #[test]
    fn compile_is_deterministic() {
        let doc = r#"{"data": [{"id": "c", "path": "c.csv"}], "scenes": [
            {"designs": [{"purpose": "Overview", "target": {"lasso": [[-120,30],[-70,30],[-70,45],[-120,45]]}}]},
            {"designs": [{"purpose": "Emphasize", "target": {"name": "Chicago"}, "shot": ["Arc", "Tilt"]}]}]}"#;
        let a = export_script(&build(doc, &[("c", PTS)]).unwrap().script);
        let b = export_script(&build(doc, &[("c", PTS)]).unwrap().script);
        assert_eq!(a, b);
    }
}
