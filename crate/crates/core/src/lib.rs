//! Compiles declarative geographic stories into sampled map-camera scripts.
//!
//! The pipeline runs `story` (parse, resolve targets) → `shot` (plan each
//! camera movement) → `timeline` (schedule and fill gaps) → `story::compile`
//! (sample frames) → canonical JSON and SVG storyboards.

pub mod camera;
pub mod data;
pub mod geo;
pub mod service;
pub mod shot;
pub mod story;
pub mod target;
pub mod timeline;
