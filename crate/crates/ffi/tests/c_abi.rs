use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use geostory_ffi::*;

const CASE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/fixtures/case_study");

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(gs_last_error()) }.to_str().unwrap().to_string()
}

#[test]
fn compile_case_study_through_handles() {
    let story_text = std::fs::read_to_string(format!("{CASE}/story.json")).unwrap();
    let mut story = ptr::null_mut();
    unsafe {
        assert_eq!(gs_story_parse(c(&story_text).as_ptr(), &mut story), GsStatus::Ok);
        let mut script = ptr::null_mut();
        // Datasets not supplied yet.
        assert_eq!(gs_story_compile(story, &mut script), GsStatus::CompileFailed);
        assert!(script.is_null());
        assert_eq!(last_error(), "dataset 'gun' was not supplied");
        for (id, file) in [("gun", "gun.csv"), ("regions", "regions.geojson"), ("cities", "cities.geojson")] {
            let text = std::fs::read_to_string(format!("{CASE}/{file}")).unwrap();
            assert_eq!(gs_story_add_dataset(story, c(id).as_ptr(), c(&text).as_ptr()), GsStatus::Ok);
        }
        assert_eq!(gs_story_add_dataset(story, c("nope").as_ptr(), c("").as_ptr()), GsStatus::InvalidInput);
        assert_eq!(gs_story_compile(story, &mut script), GsStatus::Ok);
        let mut seconds = 0.0;
        assert_eq!(gs_script_duration(script, &mut seconds), GsStatus::Ok);
        assert_eq!(seconds, 42.0);
        let (mut tracks, mut frames) = (0, 0);
        gs_script_track_count(script, &mut tracks);
        gs_script_frame_count(script, 0, &mut frames);
        assert_eq!((tracks, frames), (1, 1261));
        let mut state = GsCameraState { lon: 0.0, lat: 0.0, zoom: 0.0, pitch: 0.0, bearing: 0.0, fov: 0.0 };
        let mut t = 0.0;
        assert_eq!(gs_script_frame(script, 0, 0, &mut state, &mut t), GsStatus::Ok);
        assert_eq!((state.lon, state.lat, state.zoom, t), (-96.5, 38.5, 3.4, 0.0));
        assert_eq!(gs_script_frame(script, 0, frames, &mut state, &mut t), GsStatus::OutOfRange);
        let (mut data, mut len) = (ptr::null(), 0);
        assert_eq!(gs_script_json(script, &mut data, &mut len), GsStatus::Ok);
        let json = std::slice::from_raw_parts(data, len);
        assert!(json.starts_with(b"{\"annotations\":"));
        assert_eq!(gs_script_storyboard(script, &mut data, &mut len), GsStatus::Ok);
        assert!(std::slice::from_raw_parts(data, len).starts_with(b"<?xml"));
        gs_script_free(script);
        gs_story_free(story);
    }
}

#[test]
fn errors_and_nulls() {
    unsafe {
        let mut story = ptr::null_mut();
        assert_eq!(gs_story_parse(ptr::null(), &mut story), GsStatus::NullArgument);
        assert_eq!(last_error(), "json is null");
        let bad = c(r#"{"scenes": [{"designs": [{"purpose": "Compare", "target": {"point": [1, 2]}}]}]}"#);
        assert_eq!(gs_story_parse(bad.as_ptr(), &mut story), GsStatus::InvalidInput);
        assert!(last_error().contains("comparison requires multiple targets"), "{}", last_error());
        assert!(story.is_null());
        let bytes = [0xffu8, 0];
        assert_eq!(gs_story_parse(bytes.as_ptr().cast(), &mut story), GsStatus::InvalidUtf8);
        gs_story_free(ptr::null_mut());
        gs_script_free(ptr::null_mut());
        let mut x = 0.0;
        assert_eq!(gs_script_duration(ptr::null(), &mut x), GsStatus::NullArgument);
    }
}

#[test]
fn geometry_calls() {
    unsafe {
        let (mut x, mut y) = (0.0, 0.0);
        assert_eq!(gs_project(0.0, 0.0, &mut x, &mut y), GsStatus::Ok);
        assert_eq!((x, y), (0.5, 0.5));
        assert_eq!(gs_project(0.0, 89.0, &mut x, &mut y), GsStatus::OutOfRange);
        let (mut lon, mut lat) = (0.0, 0.0);
        assert_eq!(gs_unproject(0.75, 0.5, &mut lon, &mut lat), GsStatus::Ok);
        assert_eq!((lon, lat), (90.0, 0.0));
        let mut s = GsCameraState { lon: 0.0, lat: 0.0, zoom: 0.0, pitch: 0.0, bearing: 0.0, fov: 0.0 };
        assert_eq!(gs_fit_bounds(1.0, 1.0, 1.0, 1.0, 800, 600, 0.1, 0.0, 0.0, &mut s), GsStatus::Ok);
        assert_eq!((s.lon, s.zoom, s.fov), (1.0, 16.0, 45.0));
        assert_eq!(gs_fit_bounds(0.0, 0.0, 1.0, 1.0, 0, 600, 0.1, 0.0, 0.0, &mut s), GsStatus::InvalidInput);

        let mut buf = [0 as std::ffi::c_char; 8];
        assert_eq!(gs_default_shot(c("Supplement").as_ptr(), c("Region").as_ptr(), buf.as_mut_ptr(), 8), GsStatus::Ok);
        assert_eq!(CStr::from_ptr(buf.as_ptr()).to_str().unwrap(), "Pan");
        assert_eq!(gs_default_shot(c("Emphasize").as_ptr(), c("Path").as_ptr(), buf.as_mut_ptr(), 8), GsStatus::BufferTooSmall);
        assert_eq!(gs_default_shot(c("Compare").as_ptr(), c("Region").as_ptr(), buf.as_mut_ptr(), 8), GsStatus::InvalidInput);
        assert!(!CStr::from_ptr(gs_version()).to_bytes().is_empty());
    }
}

/// Directory holding the freshly built static library.
fn lib_dir() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let profile = exe.parent()?.parent()?;
    profile.join("libgeostory_ffi.a").exists().then(|| profile.to_path_buf())
}

#[test]
fn header_compiles_and_links_from_c() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header_dir = manifest.join("include");
    let header = std::fs::read_to_string(header_dir.join("geostory.h")).unwrap();
    for name in ["gs_story_parse", "gs_story_compile", "gs_script_frame", "gs_fit_bounds", "typedef struct GsStory GsStory;"] {
        assert!(header.contains(name), "{name} missing from header");
    }
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler; header text checked only");
        return;
    }
    let tmp = std::env::temp_dir().join(format!("geostory-smoke-{}", std::process::id()));
    let mut cmd = Command::new("cc");
    cmd.arg("-std=c99").arg("-Wall").arg("-Werror").arg("-I").arg(&header_dir).arg(manifest.join("tests/smoke.c"));
    let Some(dir) = lib_dir() else {
        let status = cmd.arg("-fsyntax-only").status().unwrap();
        assert!(status.success());
        return;
    };
    let status = cmd
        .arg(dir.join("libgeostory_ffi.a"))
        .args(["-lpthread", "-ldl", "-lm"])
        .arg("-o")
        .arg(&tmp)
        .status()
        .unwrap();
    assert!(status.success(), "C smoke test failed to build");
    let run = Command::new(&tmp).output().unwrap();
    let _ = std::fs::remove_file(&tmp);
    assert!(run.status.success(), "smoke exited with {:?}", run.status);
    let stdout = String::from_utf8(run.stdout).unwrap();
    assert!(stdout.starts_with("10 301 1.1000 Pan "), "{stdout}");
}
