//! The compiled camera script and its canonical JSON form.

use serde::Serialize;
use serde_json::{Map, Number, Value};

use crate::camera::{CameraState, Viewport};
use crate::shot::{NarrativePurpose, ShotType};
use crate::timeline::MovementId;

/// Pixel rectangle inside the output frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Rect {
    pub x: u32,
    pub y: u32,
    pub width: u32,
    pub height: u32,
}

impl Rect {
    pub fn full(v: Viewport) -> Self {
        Rect { x: 0, y: 0, width: v.width, height: v.height }
    }

    pub fn viewport(&self) -> Viewport {
        Viewport { width: self.width, height: self.height }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub t: f64,
    pub state: CameraState,
    pub altitude_m: f64,
    /// Where the track is drawn; `None` while the track is inactive.
    pub viewport: Option<Rect>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Track {
    pub frames: Vec<Frame>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Annotation {
    pub text: String,
    pub start_frame: u64,
    pub end_frame: u64,
    pub track: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub movement: Option<MovementId>,
}

/// One scheduled piece of the video: an authored movement or a filler.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MovementSummary {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<MovementId>,
    pub kind: &'static str,
    pub track: u32,
    pub start: f64,
    pub duration: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scene: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub purpose: Option<NarrativePurpose>,
    pub shots: Vec<ShotType>,
    pub target: String,
    pub hold: f64,
    pub manual: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CameraScript {
    pub fps: u32,
    pub duration: f64,
    pub viewport: Viewport,
    pub tracks: Vec<Track>,
    pub annotations: Vec<Annotation>,
    pub movements: Vec<MovementSummary>,
}

impl CameraScript {
    /// Frames per track: `floor(duration · fps) + 1`, or 0 when empty.
    pub fn frame_count(duration: f64, fps: u32) -> u64 {
        if duration <= 0.0 {
            0
        } else {
            (duration * fps as f64 + 1e-9).floor() as u64 + 1
        }
    }

    /// Authored movements in track 1, in time order.
    pub fn authored(&self) -> impl Iterator<Item = &MovementSummary> {
        self.movements.iter().filter(|m| m.kind == "movement" && m.track == 1)
    }

    pub fn to_value(&self) -> Value {
        let tracks: Vec<Value> = self
            .tracks
            .iter()
            .map(|tr| {
                let frames: Vec<Value> = tr.frames.iter().map(frame_value).collect();
                let mut m = Map::new();
                m.insert("frames".into(), Value::Array(frames));
                Value::Object(m)
            })
            .collect();
        let mut root = Map::new();
        root.insert("fps".into(), Value::from(self.fps));
        root.insert("duration".into(), float(self.duration));
        root.insert("viewport".into(), serde_json::to_value(self.viewport).expect("plain struct"));
        root.insert("tracks".into(), Value::Array(tracks));
        root.insert("annotations".into(), serde_json::to_value(&self.annotations).expect("plain struct"));
        root.insert("movements".into(), serde_json::to_value(&self.movements).expect("plain struct"));
        Value::Object(root)
    }
}

fn float(x: f64) -> Value {
    Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn frame_value(f: &Frame) -> Value {
    let s = f.state;
    let mut m = Map::new();
    m.insert("t".into(), float(f.t));
    m.insert("lon".into(), float(s.center().lon()));
    m.insert("lat".into(), float(s.center().lat()));
    m.insert("zoom".into(), float(s.zoom()));
    m.insert("pitch".into(), float(s.pitch()));
    m.insert("bearing".into(), float(s.bearing()));
    m.insert("altitudeMeters".into(), float(f.altitude_m));
    m.insert(
        "viewport".into(),
        f.viewport.map_or(Value::Null, |r| serde_json::to_value(r).expect("plain struct")),
    );
    Value::Object(m)
}

/// Canonical bytes: sorted keys, no whitespace, floats with 9 significant
/// digits in fixed notation, trailing newline.
pub fn export_script(script: &CameraScript) -> Vec<u8> {
    let mut out = String::new();
    write_canonical(&script.to_value(), &mut out);
    out.push('\n');
    out.into_bytes()
}

pub(crate) fn write_canonical(v: &Value, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => out.push_str(&u.to_string()),
            (None, Some(i)) => out.push_str(&i.to_string()),
            _ => out.push_str(&format_sig9(n.as_f64().unwrap_or(0.0))),
        },
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("strings serialize")),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_canonical(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k).expect("strings serialize"));
                out.push(':');
                write_canonical(&map[k], out);
            }
            out.push('}');
        }
    }
}

/// Nine significant digits, always fixed notation: 4.0703 → "4.07030000".
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return "0.00000000".into();
    }
    let sci = format!("{:.8e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    // `digits` holds 9 digits d0 d1 … d8 meaning d0.d1…d8 × 10^exp.
    let point = exp + 1;
    let body = if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), digits)
    } else if point as usize >= digits.len() {
        format!("{}{}", digits, "0".repeat(point as usize - digits.len()))
    } else {
        let (int, frac) = digits.split_at(point as usize);
        format!("{int}.{frac}")
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        // Expected strings from printf-style "%.9g"-equivalent rounding.
        assert_eq!(format_sig9(4.0703), "4.07030000");
        assert_eq!(format_sig9(1.0), "1.00000000");
        assert_eq!(format_sig9(-0.0), "0.00000000");
        assert_eq!(format_sig9(1234.5), "1234.50000");
        assert_eq!(format_sig9(0.000123), "0.000123000000");
        assert_eq!(format_sig9(-98.35), "-98.3500000");
        assert_eq!(format_sig9(123456789012.0), "123456789000");
        assert_eq!(format_sig9(0.1 + 0.2), "0.300000000");
        assert_eq!(format_sig9(48374824.397), "48374824.4");
        assert_eq!(format_sig9(9.999999999), "10.0000000");
    }

    #[test]
    fn empty_script_is_fixed() {
        let s = CameraScript {
            fps: 30,
            duration: 0.0,
            viewport: Viewport { width: 1280, height: 720 },
            tracks: vec![Track::default()],
            annotations: vec![],
            movements: vec![],
        };
        let bytes = export_script(&s);
        assert_eq!(
            String::from_utf8(bytes).unwrap(),
            "{\"annotations\":[],\"duration\":0.00000000,\"fps\":30,\"movements\":[],\"tracks\":[{\"frames\":[]}],\"viewport\":{\"height\":720,\"width\":1280}}\n"
        );
        assert_eq!(CameraScript::frame_count(0.0, 30), 0);
        assert_eq!(CameraScript::frame_count(1.0, 30), 31);
        assert_eq!(CameraScript::frame_count(42.0, 30), 1261);
    }
}
