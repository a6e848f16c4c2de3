//! C ABI over the geostory compiler.
//!
//! Stories and compiled scripts are opaque handles owned by the caller and
//! released with their `_free` function. Every fallible call returns a
//! [`GsStatus`]; on failure [`gs_last_error`] describes what went wrong on
//! the calling thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use geostory::camera::{fit_bounds, CameraState, Viewport};
use geostory::geo::{project, unproject, GeoBounds, GeoPoint, MercatorPoint};
use geostory::shot::{DefaultShotTable, NarrativePurpose};
use geostory::story::{compile_story, export_script, parse_story, storyboard, CameraScript, Story};
use geostory::target::TargetKind;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    /// Parse or validation failure; see `gs_last_error`.
    InvalidInput = 3,
    /// Target resolution, planning or scheduling failure.
    CompileFailed = 4,
    BufferTooSmall = 5,
    OutOfRange = 6,
    Panic = 7,
}

/// Camera state with angles in degrees.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GsCameraState {
    pub lon: f64,
    pub lat: f64,
    pub zoom: f64,
    pub pitch: f64,
    pub bearing: f64,
    pub fov: f64,
}

impl From<CameraState> for GsCameraState {
    fn from(s: CameraState) -> Self {
        GsCameraState {
            lon: s.center().lon(),
            lat: s.center().lat(),
            zoom: s.zoom(),
            pitch: s.pitch(),
            bearing: s.bearing(),
            fov: s.fov(),
        }
    }
}

/// A parsed story plus the dataset texts added so far.
pub struct GsStory {
    story: Story,
    datasets: BTreeMap<String, String>,
}

/// A compiled story: canonical script bytes and the storyboard.
pub struct GsScript {
    script: CameraScript,
    json: Vec<u8>,
    svg: Vec<u8>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), (GsStatus, String)>) -> GsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            GsStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            GsStatus::Panic
        }
    }
}

type Fail = (GsStatus, String);

unsafe fn text<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err((GsStatus::NullArgument, format!("{name} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|e| (GsStatus::InvalidUtf8, format!("{name}: {e}")))
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| (GsStatus::NullArgument, format!("{name} is null")))
}

unsafe fn handle<'a, T>(p: *const T, name: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| (GsStatus::NullArgument, format!("{name} is null")))
}

fn invalid(e: impl ToString) -> Fail {
    (GsStatus::InvalidInput, e.to_string())
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn gs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses and validates a story document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out_story` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_story_parse(json: *const c_char, out_story: *mut *mut GsStory) -> GsStatus {
    guard(|| {
        let dst = out(out_story, "out")?;
        *dst = ptr::null_mut();
        let story = parse_story(text(json, "json")?).map_err(invalid)?;
        *dst = Box::into_raw(Box::new(GsStory { story, datasets: BTreeMap::new() }));
        Ok(())
    })
}

/// Supplies the text of dataset `id`, replacing any earlier text.
///
/// # Safety
/// `story` must come from `gs_story_parse`; strings must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn gs_story_add_dataset(story: *mut GsStory, id: *const c_char, data: *const c_char) -> GsStatus {
    guard(|| {
        let s = out(story, "story")?;
        let id = text(id, "id")?;
        if !s.story.document.data.iter().any(|d| d.id == id) {
            return Err(invalid(format!("story declares no dataset '{id}'")));
        }
        s.datasets.insert(id.to_string(), text(data, "data")?.to_string());
        Ok(())
    })
}

/// # Safety
/// `story` must come from `gs_story_parse` and not be used afterwards. Null
/// is ignored.
#[no_mangle]
pub unsafe extern "C" fn gs_story_free(story: *mut GsStory) {
    if !story.is_null() {
        drop(Box::from_raw(story));
    }
}

/// Compiles a story with the builtin default-shot table.
///
/// # Safety
/// `story` must be a live handle; `out_script` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_story_compile(story: *const GsStory, out_script: *mut *mut GsScript) -> GsStatus {
    guard(|| {
        let dst = out(out_script, "out")?;
        *dst = ptr::null_mut();
        let s = handle(story, "story")?;
        let (resolved, compiled) = compile_story(&s.story, &s.datasets, DefaultShotTable::builtin())
            .map_err(|e| (GsStatus::CompileFailed, e.to_string()))?;
        let json = export_script(&compiled.script);
        let svg = storyboard(&resolved, &compiled).into_bytes();
        *dst = Box::into_raw(Box::new(GsScript { script: compiled.script, json, svg }));
        Ok(())
    })
}

/// # Safety
/// `script` must come from `gs_story_compile` and not be used afterwards.
/// Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn gs_script_free(script: *mut GsScript) {
    if !script.is_null() {
        drop(Box::from_raw(script));
    }
}

/// Canonical script JSON. The bytes are owned by the handle and are not
/// NUL-terminated.
///
/// # Safety
/// `script` must be a live handle; `data` and `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_script_json(script: *const GsScript, data: *mut *const u8, len: *mut usize) -> GsStatus {
    guard(|| {
        let s = handle(script, "script")?;
        *out(data, "data")? = s.json.as_ptr();
        *out(len, "len")? = s.json.len();
        Ok(())
    })
}

/// SVG storyboard bytes, owned by the handle.
///
/// # Safety
/// As for `gs_script_json`.
#[no_mangle]
pub unsafe extern "C" fn gs_script_storyboard(script: *const GsScript, data: *mut *const u8, len: *mut usize) -> GsStatus {
    guard(|| {
        let s = handle(script, "script")?;
        *out(data, "data")? = s.svg.as_ptr();
        *out(len, "len")? = s.svg.len();
        Ok(())
    })
}

/// # Safety
/// `script` must be a live handle; `seconds` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_script_duration(script: *const GsScript, seconds: *mut f64) -> GsStatus {
    guard(|| {
        *out(seconds, "seconds")? = handle(script, "script")?.script.duration;
        Ok(())
    })
}

/// Number of tracks (1, or 2 when a scene uses a split layout).
///
/// # Safety
/// `script` must be a live handle; `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_script_track_count(script: *const GsScript, count: *mut usize) -> GsStatus {
    guard(|| {
        *out(count, "count")? = handle(script, "script")?.script.tracks.len();
        Ok(())
    })
}

/// # Safety
/// `script` must be a live handle; `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_script_frame_count(script: *const GsScript, track: usize, count: *mut usize) -> GsStatus {
    guard(|| {
        let s = handle(script, "script")?;
        let t = s.script.tracks.get(track).ok_or_else(|| (GsStatus::OutOfRange, format!("no track {track}")))?;
        *out(count, "count")? = t.frames.len();
        Ok(())
    })
}

/// Camera state of one frame; `time` receives the frame time in seconds.
///
/// # Safety
/// `script` must be a live handle; `state` and `time` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_script_frame(
    script: *const GsScript,
    track: usize,
    index: usize,
    state: *mut GsCameraState,
    time: *mut f64,
) -> GsStatus {
    guard(|| {
        let s = handle(script, "script")?;
        let f = s
            .script
            .tracks
            .get(track)
            .and_then(|t| t.frames.get(index))
            .ok_or_else(|| (GsStatus::OutOfRange, format!("no frame {index} in track {track}")))?;
        *out(state, "state")? = f.state.into();
        *out(time, "time")? = f.t;
        Ok(())
    })
}

/// Degrees to normalized Web Mercator in [0, 1]², y pointing south.
///
/// # Safety
/// `x` and `y` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_project(lon: f64, lat: f64, x: *mut f64, y: *mut f64) -> GsStatus {
    guard(|| {
        let m = project(GeoPoint::new(lon, lat).map_err(|e| (GsStatus::OutOfRange, e.to_string()))?);
        *out(x, "x")? = m.x;
        *out(y, "y")? = m.y;
        Ok(())
    })
}

/// # Safety
/// `lon` and `lat` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_unproject(x: f64, y: f64, lon: *mut f64, lat: *mut f64) -> GsStatus {
    guard(|| {
        let p = unproject(MercatorPoint::new(x, y)).map_err(|e| (GsStatus::OutOfRange, e.to_string()))?;
        *out(lon, "lon")? = p.lon();
        *out(lat, "lat")? = p.lat();
        Ok(())
    })
}

/// Camera framing the box with `margin` of each viewport side left free.
///
/// # Safety
/// `state` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_fit_bounds(
    west: f64,
    south: f64,
    east: f64,
    north: f64,
    width: u32,
    height: u32,
    margin: f64,
    pitch: f64,
    bearing: f64,
    state: *mut GsCameraState,
) -> GsStatus {
    guard(|| {
        let b = GeoBounds::new(west, south, east, north).map_err(invalid)?;
        let vp = Viewport::new(width, height).map_err(invalid)?;
        let s = fit_bounds(&b, vp, margin, pitch, bearing).map_err(invalid)?;
        *out(state, "state")? = s.into();
        Ok(())
    })
}

/// Writes the default shot name for a purpose and target kind into `buf`
/// as a NUL-terminated string.
///
/// # Safety
/// Strings must be NUL-terminated; `buf` must hold `buf_len` bytes.
#[no_mangle]
pub unsafe extern "C" fn gs_default_shot(
    purpose: *const c_char,
    target_kind: *const c_char,
    buf: *mut c_char,
    buf_len: usize,
) -> GsStatus {
    guard(|| {
        let p: NarrativePurpose = text(purpose, "purpose")?.parse().map_err(invalid)?;
        let kind_name = text(target_kind, "target_kind")?;
        let kind = TargetKind::parse(kind_name).ok_or_else(|| invalid(format!("unknown target kind '{kind_name}'")))?;
        let (shot, _) = DefaultShotTable::builtin().lookup(p, kind).map_err(invalid)?;
        let name = shot.name().as_bytes();
        if buf.is_null() {
            return Err((GsStatus::NullArgument, "buf is null".into()));
        }
        if buf_len < name.len() + 1 {
            return Err((GsStatus::BufferTooSmall, format!("need {} bytes", name.len() + 1)));
        }
        ptr::copy_nonoverlapping(name.as_ptr().cast::<c_char>(), buf, name.len());
        *buf.add(name.len()) = 0;
        Ok(())
    })
}
