//! Seeded randomized checks shared by the property tests and the acceptance
//! report. Each returns a one-line summary on success.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use geostory::camera::{
    bearing_delta, fit_bounds, fly_to, CameraState, ScreenProjector, Viewport, MAX_MARGIN,
};
use geostory::geo::{project, unproject, GeoBounds, GeoPoint, GeoPolygon};
use geostory::shot::{plan_shot, Direction, MovementPlan, ShotParams, ShotRequest, ShotType};
use geostory::story::{compile_story, parse_story, Compiled, ResolvedStory};
use geostory::target::GeospatialTarget;
use geostory::timeline::{MovementId, Segment, Timeline};

pub type Check = Result<String, String>;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gp(lon: f64, lat: f64) -> GeoPoint {
    GeoPoint::new(lon, lat).unwrap()
}

pub fn projection_round_trip(n: usize, seed: u64) -> Check {
    let mut r = rng(seed);
    let mut worst = 0.0_f64;
    for _ in 0..n {
        let lon = r.random_range(-180.0..=180.0);
        let lat = r.random_range(-85.051129..=85.051129);
        let back = unproject(project(gp(lon, lat))).map_err(|e| e.to_string())?;
        let err = (back.lon() - lon).abs().max((back.lat() - lat).abs());
        worst = worst.max(err);
        if err >= 1e-9 {
            return Err(format!("({lon}, {lat}) came back with error {err:e}"));
        }
    }
    Ok(format!("{n} points, max error {worst:.2e} deg"))
}

fn random_bounds(r: &mut ChaCha8Rng) -> GeoBounds {
    let w = 10f64.powf(r.random_range(-4.0..1.6));
    let h = 10f64.powf(r.random_range(-4.0..1.6));
    let west = r.random_range(-175.0..175.0 - w.min(40.0));
    let south = r.random_range(-70.0..70.0 - h.min(40.0));
    GeoBounds::new(west, south, west + w.min(40.0), south + h.min(40.0)).unwrap()
}

fn random_viewport(r: &mut ChaCha8Rng) -> Viewport {
    Viewport::new(r.random_range(200..2000), r.random_range(200..1400)).unwrap()
}

/// Pixels left between each projected corner and each screen side, minus
/// the required margin; negative means a violation.
pub fn margin_slack(b: &GeoBounds, s: &CameraState, vp: Viewport, margin: f64) -> Option<f64> {
    let proj = ScreenProjector::new(s, vp);
    let (mx, my) = (margin * vp.w(), margin * vp.h());
    let mut slack = f64::INFINITY;
    for c in b.corners() {
        let (x, y) = proj.to_screen(project(c))?;
        slack = slack.min(x - mx).min(vp.w() - mx - x).min(y - my).min(vp.h() - my - y);
    }
    Some(slack)
}

pub fn margin_property(n: usize, seed: u64) -> Check {
    let mut r = rng(seed);
    let mut worst = f64::INFINITY;
    for i in 0..n {
        let b = random_bounds(&mut r);
        let vp = random_viewport(&mut r);
        let margin = r.random_range(0.0..MAX_MARGIN);
        let pitch = if r.random_bool(0.3) { 0.0 } else { r.random_range(0.0..=60.0) };
        let bearing = r.random_range(-180.0..360.0);
        let s = fit_bounds(&b, vp, margin, pitch, bearing).map_err(|e| format!("case {i}: {e}"))?;
        let slack = margin_slack(&b, &s, vp, margin).ok_or_else(|| format!("case {i}: corner behind camera"))?;
        worst = worst.min(slack);
        if slack < -0.5 {
            return Err(format!("case {i}: {b:?} {vp:?} margin {margin} pitch {pitch} bearing {bearing}: short by {:.3} px", -slack));
        }
    }
    Ok(format!("{n} cases, tightest side {worst:+.3} px beyond the margin"))
}

fn random_state(r: &mut ChaCha8Rng) -> CameraState {
    CameraState::new(
        gp(r.random_range(-170.0..170.0), r.random_range(-60.0..60.0)),
        r.random_range(1.0..15.0),
        r.random_range(0.0..=60.0),
        r.random_range(-180.0..180.0),
    )
    .unwrap()
}

fn random_target(r: &mut ChaCha8Rng, allow_none: bool) -> GeospatialTarget {
    let lon = r.random_range(-160.0..160.0);
    let lat = r.random_range(-55.0..55.0);
    let d = 10f64.powf(r.random_range(-2.0..1.0));
    let square = |lon: f64, lat: f64, d: f64| {
        GeoPolygon::new(vec![gp(lon, lat), gp(lon + d, lat), gp(lon + d, lat + d), gp(lon, lat + d)]).unwrap()
    };
    match r.random_range(0..if allow_none { 4 } else { 3 }) {
        0 => GeospatialTarget::location(gp(lon, lat)),
        1 => GeospatialTarget::region(square(lon, lat, d)),
        2 => GeospatialTarget::multiple(vec![
            GeospatialTarget::location(gp(lon, lat)),
            GeospatialTarget::region(square(lon + d, lat - d, d / 2.0)),
        ])
        .unwrap(),
        _ => GeospatialTarget::None,
    }
}

fn random_params(r: &mut ChaCha8Rng) -> ShotParams {
    ShotParams {
        intensity: r.random_range(0.0..=1.0),
        duration: r.random_range(0.5..8.0),
        hold: if r.random_bool(0.3) { r.random_range(0.0..3.0) } else { 0.0 },
        direction: if r.random_bool(0.5) { Direction::Clockwise } else { Direction::Counterclockwise },
        ..ShotParams::default()
    }
}

/// Which parameters a shot must hold fixed.
#[derive(Clone, Copy)]
struct Held {
    zoom: bool,
    pitch: bool,
    bearing: bool,
    center: bool,
}

fn held(shot: ShotType) -> Held {
    match shot {
        ShotType::Pan { .. } => Held { zoom: true, pitch: true, bearing: true, center: false },
        ShotType::Tilt => Held { zoom: true, pitch: false, bearing: true, center: true },
        ShotType::Roll | ShotType::Arc => Held { zoom: true, pitch: false, bearing: false, center: true },
        _ => Held { zoom: true, pitch: true, bearing: true, center: true },
    }
}

fn sample_times(plan: &MovementPlan, fps: f64) -> Vec<f64> {
    let n = (plan.span() * fps).floor() as usize;
    let mut ts: Vec<f64> = (0..=n).map(|i| i as f64 / fps).collect();
    ts.extend(plan.keyframes().iter().map(|k| k.time));
    ts.push(plan.span());
    ts
}

pub fn shot_constancy(per_type: usize, seed: u64) -> Check {
    let mut r = rng(seed);
    let shots = [ShotType::pan(), ShotType::Pan { whip: true }, ShotType::Tilt, ShotType::Roll, ShotType::Arc, ShotType::Static];
    let mut frames = 0usize;
    for shot in shots {
        let h = held(shot);
        for i in 0..per_type {
            let target = random_target(&mut r, !matches!(shot, ShotType::Arc));
            let current = random_state(&mut r);
            let vp = random_viewport(&mut r);
            let params = random_params(&mut r);
            let plan = plan_shot(&ShotRequest::new(shot, &target, None, current, vp, params))
                .map_err(|e| format!("{shot} case {i}: {e}"))?;
            let s0 = plan.start_state();
            for t in sample_times(&plan, 30.0) {
                let s = plan.state_at(t);
                frames += 1;
                let bad = |what: &str, d: f64| Err(format!("{shot} case {i}: {what} drifts by {d:e} at t={t}"));
                if h.zoom && (s.zoom() - s0.zoom()).abs() > 1e-9 {
                    return bad("zoom", s.zoom() - s0.zoom());
                }
                if h.pitch && (s.pitch() - s0.pitch()).abs() > 1e-9 {
                    return bad("pitch", s.pitch() - s0.pitch());
                }
                if h.bearing && bearing_delta(s0.bearing(), s.bearing()).abs() > 1e-9 {
                    return bad("bearing", bearing_delta(s0.bearing(), s.bearing()));
                }
                let dc = (s.center().lon() - s0.center().lon()).abs().max((s.center().lat() - s0.center().lat()).abs());
                if h.center && dc > 1e-9 {
                    return bad("center", dc);
                }
            }
        }
    }
    Ok(format!("{per_type} plans x {} shot types, {frames} samples", shots.len()))
}

fn states_close(a: &CameraState, b: &CameraState, tol: f64) -> bool {
    (a.center().lon() - b.center().lon()).abs() <= tol
        && (a.center().lat() - b.center().lat()).abs() <= tol
        && (a.zoom() - b.zoom()).abs() <= tol
        && (a.pitch() - b.pitch()).abs() <= tol
        && bearing_delta(a.bearing(), b.bearing()).abs() <= tol
}

/// Segments tile `[0, T]` and consecutive segments meet in the same state.
pub fn check_tiling(t: &Timeline) -> Result<(), String> {
    let segs = t.segments();
    let Some(first) = segs.first() else { return Ok(()) };
    if first.start().abs() > 1e-9 {
        return Err(format!("first segment starts at {}", first.start()));
    }
    for w in segs.windows(2) {
        if (w[1].start() - w[0].end()).abs() > 1e-9 {
            return Err(format!("segments leave [{}, {}) uncovered or overlapping", w[0].end(), w[1].start()));
        }
        let (a, b) = (w[0].state_at(w[0].end()), w[1].state_at(w[1].start()));
        if !states_close(&a, &b, 1e-12) {
            let kind = |s: &Segment| if matches!(s, Segment::Filler(_)) { "filler" } else { "movement" };
            return Err(format!("{} -> {} at {}: {a:?} vs {b:?}", kind(&w[0]), kind(&w[1]), w[0].end()));
        }
    }
    let last = segs.last().unwrap().end();
    if (last - t.end_time()).abs() > 1e-9 {
        return Err(format!("tiling ends at {last}, timeline at {}", t.end_time()));
    }
    Ok(())
}

pub fn timeline_tiling(cases: usize, seed: u64) -> Check {
    let mut r = rng(seed);
    // Shots that start from the current state; Arc and Tracking open with a cut.
    let shots = [ShotType::Static, ShotType::PushIn, ShotType::PullOut, ShotType::pan(), ShotType::Tilt, ShotType::Roll];
    let mut ops = 0usize;
    for case in 0..cases {
        let pool: Vec<GeospatialTarget> = (0..3).map(|_| random_target(&mut r, true)).collect();
        let vp = random_viewport(&mut r);
        let mut t = Timeline::new(Default::default(), vp.w().max(vp.h()));
        let mut current = random_state(&mut r);
        let mut ids: Vec<MovementId> = Vec::new();
        for _ in 0..r.random_range(1..12) {
            ops += 1;
            if !ids.is_empty() && r.random_bool(0.3) {
                let id = ids[r.random_range(0..ids.len())];
                t = t.set_duration(id, r.random_range(0.2..9.0)).map_err(|e| format!("case {case}: {e}"))?;
            } else {
                let shot = shots[r.random_range(0..shots.len())];
                let target = &pool[r.random_range(0..pool.len())];
                let params = random_params(&mut r);
                let plan = plan_shot(&ShotRequest::new(shot, target, None, current, vp, params))
                    .map_err(|e| format!("case {case}: {e}"))?;
                current = plan.end_state();
                let gap = if r.random_bool(0.4) { r.random_range(0.0..4.0) } else { 0.0 };
                let (next, id) = t.append_with_gap(plan, gap, None).map_err(|e| format!("case {case}: {e}"))?;
                t = next;
                ids.push(id);
            }
            let v = t.validate();
            if !v.is_empty() {
                return Err(format!("case {case}: violations {v:?}"));
            }
        }
        let filled = t.fill_gaps().map_err(|e| format!("case {case}: {e}"))?;
        check_tiling(&filled).map_err(|e| format!("case {case}: {e}"))?;
    }
    Ok(format!("{cases} cases, {ops} operations"))
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct OraclePair {
    a: [f64; 3],
    b: [f64; 3],
    duration: f64,
    /// `[t, x, y, w]` rows.
    samples: Vec<[f64; 4]>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct Oracle {
    pairs: Vec<OraclePair>,
}

pub fn flyto_oracle() -> Check {
    let text = std::fs::read_to_string(fixtures().join("flyto_oracle.json")).map_err(|e| e.to_string())?;
    let oracle: Oracle = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let mut worst = 0.0_f64;
    let mut points = 0;
    for (i, p) in oracle.pairs.iter().enumerate() {
        let a = CameraState::new(gp(p.a[0], p.a[1]), p.a[2], 0.0, 0.0).unwrap();
        let b = CameraState::new(gp(p.b[0], p.b[1]), p.b[2], 0.0, 0.0).unwrap();
        let traj = fly_to(&a, &b, p.duration).map_err(|e| e.to_string())?;
        for &[t, x, y, w] in &p.samples {
            let c = traj.projected_center_at(t);
            let zw = (-traj.state_at(t).zoom()).exp2();
            let err = (c.x - x).abs().max((c.y - y).abs()).max((zw - w).abs());
            worst = worst.max(err);
            points += 1;
            if err > 1e-6 {
                return Err(format!("pair {i} at t={t}: error {err:e} world units"));
            }
        }
    }
    Ok(format!("{} pairs, {points} samples, max error {worst:.2e} world units", oracle.pairs.len()))
}

/// Story text and dataset texts of the shipped case study.
pub fn case_study_inputs() -> (String, BTreeMap<String, String>) {
    let dir = fixtures().join("case_study");
    let story = std::fs::read_to_string(dir.join("story.json")).unwrap();
    let mut data = BTreeMap::new();
    for (id, file) in [("gun", "gun.csv"), ("regions", "regions.geojson"), ("cities", "cities.geojson")] {
        data.insert(id.to_string(), std::fs::read_to_string(dir.join(file)).unwrap());
    }
    (story, data)
}

pub fn compile_case_study() -> (ResolvedStory, Compiled) {
    let (text, data) = case_study_inputs();
    let story = parse_story(&text).unwrap();
    compile_story(&story, &data, geostory::shot::DefaultShotTable::builtin()).unwrap()
}

/// The six authored movements against the itemized figures.
pub fn case_study_structure(c: &Compiled) -> Check {
    let ms: Vec<_> = c.timeline.movements().collect();
    if ms.len() != 6 {
        return Err(format!("{} authored movements, expected 6", ms.len()));
    }
    let purposes: Vec<String> = ms.iter().map(|m| m.plan.purpose().map_or("-".into(), |p| p.to_string())).collect();
    let want_p = ["Dynamics", "Overview", "Compare", "Emphasize", "Emphasize", "Dynamics"];
    if purposes != want_p {
        return Err(format!("purposes {purposes:?}"));
    }
    let shots: Vec<String> = ms.iter().map(|m| m.plan.shots().iter().map(|s| s.name()).collect::<Vec<_>>().join("+")).collect();
    let want_s = ["PushIn", "PushIn", "PullOut", "Roll", "PushIn", "PullOut"];
    if shots != want_s {
        return Err(format!("shots {shots:?}"));
    }
    let itemized = [(10.0, 0.0), (2.0, 5.0), (2.0, 2.0), (8.0, 0.0), (3.0, 0.0), (10.0, 0.0)];
    for (m, (motion, hold)) in ms.iter().zip(itemized) {
        if (m.plan.motion_span() - motion).abs() > 1e-9 || (m.plan.hold() - hold).abs() > 1e-9 {
            return Err(format!("{} runs {}+{} s, expected {motion}+{hold}", m.id, m.plan.motion_span(), m.plan.hold()));
        }
    }
    let total = c.script.duration;
    if (total - 42.0).abs() > 1.0 {
        return Err(format!("total {total} s"));
    }
    Ok(format!("6 movements, itemized 10, 2+5, 2+2, 8, 3, 10 s, total {total} s (stated 43 s)"))
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_geostory"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(())
}

/// Two separate CLI runs over the case study, compared byte for byte.
pub fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let story = fixtures().join("case_study").join("story.json");
    let story = story.to_str().unwrap();
    let mut outputs = Vec::new();
    for run in 0..2 {
        let script = dir.path().join(format!("script{run}.json"));
        let svg = dir.path().join(format!("board{run}.svg"));
        run_cli(&["compile", story, "-o", script.to_str().unwrap()])?;
        run_cli(&["storyboard", story, "-o", svg.to_str().unwrap()])?;
        outputs.push((std::fs::read(&script).unwrap(), std::fs::read(&svg).unwrap()));
    }
    let [(s0, b0), (s1, b1)] = <[_; 2]>::try_from(outputs).unwrap();
    if s0 != s1 {
        return Err("script bytes differ between runs".into());
    }
    if b0 != b1 {
        return Err("storyboard bytes differ between runs".into());
    }
    Ok(format!("script {} bytes, storyboard {} bytes, identical across runs", s0.len(), b0.len()))
}

/// Both purpose/target rules are enforced by the parser, naming the rule.
pub fn constraint_errors() -> Check {
    let cases = [
        (r#"{"scenes": [{"designs": [{"purpose": "Compare", "target": {"point": [-87.6, 41.9]}}]}]}"#, "comparison requires multiple targets"),
        (r#"{"scenes": [{"designs": [{"purpose": "Compare", "target": {"region": [[0, 0], [1, 0], [1, 1]]}}]}]}"#, "comparison requires multiple targets"),
        (r#"{"scenes": [{"designs": [{"purpose": "Dynamics", "target": {"point": [-87.6, 41.9]}}]}]}"#, "dynamics requires no target"),
        (r#"{"scenes": [{"designs": [{"purpose": "Dynamics", "target": {"multiple": [{"point": [0, 0]}, {"point": [1, 1]}]}}]}]}"#, "dynamics requires no target"),
    ];
    for (doc, rule) in cases {
        match parse_story(doc) {
            Ok(_) => return Err(format!("accepted {doc}")),
            Err(e) if e.to_string().contains(rule) => {}
            Err(e) => return Err(format!("message '{e}' does not name the rule '{rule}'")),
        }
    }
    Ok(format!("{} invalid designs rejected at parse time", cases.len()))
}
