//! Location-camera schedule: movements grouped by target, duration edits,
//! validation and gap filling.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::camera::{CameraError, CameraState, GapFillMode, Trajectory, TILE_SIZE};
use crate::shot::{MovementPlan, PlanError};
use crate::target::GeospatialTarget;

/// Tolerance for start/end comparisons, in seconds.
pub const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MovementId(pub u64);

impl fmt::Display for MovementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m{}", self.0)
    }
}

impl FromStr for MovementId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        s.strip_prefix('m')
            .and_then(|n| n.parse().ok())
            .map(MovementId)
            .ok_or_else(|| format!("invalid movement id '{s}'"))
    }
}

impl Serialize for MovementId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MovementId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TimelineError {
    #[error("unknown movement {0}")]
    UnknownMovement(MovementId),
    #[error("duration must be positive, got {0}")]
    BadDuration(f64),
    #[error("gap must be finite and non-negative, got {0}")]
    BadGap(f64),
    #[error("timeline is not well-formed: {}", join(.0))]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Camera(#[from] CameraError),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Violation {
    Overlap { first: MovementId, second: MovementId },
    IntraGroupGap { first: MovementId, second: MovementId, gap: f64 },
    OutOfOrderGroups { group: usize },
    MixedTargets { group: usize, movement: MovementId },
    EmptyGroup { group: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Overlap { first, second } => write!(f, "movements {first} and {second} overlap"),
            Violation::IntraGroupGap { first, second, gap } => {
                write!(f, "gap of {gap} s between {first} and {second} inside one location group")
            }
            Violation::OutOfOrderGroups { group } => write!(f, "group {group} starts before its predecessor"),
            Violation::MixedTargets { group, movement } => {
                write!(f, "movement {movement} serves a different target than group {group}")
            }
            Violation::EmptyGroup { group } => write!(f, "group {group} has no movements"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CameraMovement {
    pub id: MovementId,
    /// Keyframes already scaled to the movement's duration.
    pub plan: MovementPlan,
    pub start: f64,
    pub annotation: Option<String>,
    /// Set when the author edited the states directly; compile keeps them.
    pub manual_override: bool,
}

impl CameraMovement {
    pub fn duration(&self) -> f64 {
        self.plan.span()
    }

    pub fn end(&self) -> f64 {
        self.start + self.duration()
    }

    pub fn state_at(&self, t: f64) -> CameraState {
        self.plan.state_at(t - self.start)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocationGroup {
    pub label: String,
    pub target: GeospatialTarget,
    pub movements: Vec<CameraMovement>,
}

impl LocationGroup {
    pub fn start(&self) -> f64 {
        self.movements.first().map_or(0.0, |m| m.start)
    }

    pub fn end(&self) -> f64 {
        self.movements.last().map_or(0.0, |m| m.end())
    }
}

/// Generated transition between groups, serving no target.
#[derive(Debug, Clone, PartialEq)]
pub struct Filler {
    pub start: f64,
    pub trajectory: Trajectory,
}

impl Filler {
    pub fn end(&self) -> f64 {
        self.start + self.trajectory.duration()
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Segment<'a> {
    Movement(&'a CameraMovement),
    Filler(&'a Filler),
}

impl Segment<'_> {
    pub fn start(&self) -> f64 {
        match self {
            Segment::Movement(m) => m.start,
            Segment::Filler(f) => f.start,
        }
    }

    pub fn end(&self) -> f64 {
        match self {
            Segment::Movement(m) => m.end(),
            Segment::Filler(f) => f.end(),
        }
    }

    pub fn state_at(&self, t: f64) -> CameraState {
        match self {
            Segment::Movement(m) => m.state_at(t),
            Segment::Filler(f) => f.trajectory.state_at(t - f.start),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Timeline {
    pub groups: Vec<LocationGroup>,
    pub fillers: Vec<Filler>,
    pub gap_fill: GapFillMode,
    /// Screen span in pixels the fly-to fillers are tuned for.
    pub span_px: f64,
    next_id: u64,
}

impl Default for Timeline {
    fn default() -> Self {
        Self::new(GapFillMode::FlyTo, TILE_SIZE)
    }
}

impl Timeline {
    pub fn new(gap_fill: GapFillMode, span_px: f64) -> Self {
        Self { groups: Vec::new(), fillers: Vec::new(), gap_fill, span_px, next_id: 1 }
    }

    /// Wraps hand-built groups; ids continue after the largest one present.
    pub fn from_groups(groups: Vec<LocationGroup>) -> Self {
        let next_id = groups
            .iter()
            .flat_map(|g| &g.movements)
            .map(|m| m.id.0 + 1)
            .max()
            .unwrap_or(1);
        Self { groups, next_id, ..Self::default() }
    }

    /// End of the last movement (fillers never extend past it).
    pub fn end_time(&self) -> f64 {
        self.groups.last().map_or(0.0, |g| g.end())
    }

    pub fn total_duration(&self) -> f64 {
        self.end_time()
    }

    pub fn end_state(&self) -> Option<CameraState> {
        self.groups.last()?.movements.last().map(|m| m.plan.end_state())
    }

    pub fn movements(&self) -> impl Iterator<Item = &CameraMovement> {
        self.groups.iter().flat_map(|g| &g.movements)
    }

    pub fn movement(&self, id: MovementId) -> Option<&CameraMovement> {
        self.movements().find(|m| m.id == id)
    }

    pub fn append_movement(&self, plan: MovementPlan) -> (Timeline, MovementId) {
        self.append_with_gap(plan, 0.0, None).expect("zero gap is valid")
    }

    /// Appends after `gap` idle seconds. A positive gap always opens a new
    /// group, since groups are contiguous.
    pub fn append_with_gap(
        &self,
        plan: MovementPlan,
        gap: f64,
        annotation: Option<String>,
    ) -> Result<(Timeline, MovementId), TimelineError> {
        if !gap.is_finite() || gap < 0.0 {
            return Err(TimelineError::BadGap(gap));
        }
        let mut t = self.clone();
        let id = MovementId(t.next_id);
        t.next_id += 1;
        let start = t.end_time() + gap;
        let target = plan.target().clone();
        let movement = CameraMovement { id, plan, start, annotation, manual_override: false };
        match t.groups.last_mut() {
            Some(g) if gap == 0.0 && g.target == target => g.movements.push(movement),
            _ => t.groups.push(LocationGroup { label: target.label(), target, movements: vec![movement] }),
        }
        t.fillers.clear();
        Ok((t, id))
    }

    /// Changes one movement's duration. Later movements of its group shift
    /// rigidly; later groups move only as far as needed to avoid overlap.
    pub fn set_duration(&self, id: MovementId, duration: f64) -> Result<Timeline, TimelineError> {
        if !duration.is_finite() || duration <= 0.0 {
            return Err(TimelineError::BadDuration(duration));
        }
        let mut t = self.clone();
        let (gi, mi) = t.locate(id).ok_or(TimelineError::UnknownMovement(id))?;
        let group = &mut t.groups[gi];
        group.movements[mi].plan = group.movements[mi].plan.rescaled(duration)?;
        for k in mi + 1..group.movements.len() {
            group.movements[k].start = group.movements[k - 1].end();
        }
        for k in gi + 1..t.groups.len() {
            let prev_end = t.groups[k - 1].end();
            let overlap = prev_end - t.groups[k].start();
            if overlap > 0.0 {
                for m in &mut t.groups[k].movements {
                    m.start += overlap;
                }
            }
        }
        t.fillers.clear();
        Ok(t)
    }

    /// Replaces one movement's plan, keeping its start time, and re-applies
    /// the scheduling rules for its duration.
    pub fn replace_plan(
        &self,
        id: MovementId,
        plan: MovementPlan,
        manual_override: bool,
    ) -> Result<Timeline, TimelineError> {
        let mut t = self.clone();
        let (gi, mi) = t.locate(id).ok_or(TimelineError::UnknownMovement(id))?;
        let m = &mut t.groups[gi].movements[mi];
        let duration = plan.span();
        m.plan = plan;
        m.manual_override = manual_override;
        t.set_duration(id, duration)
    }

    fn locate(&self, id: MovementId) -> Option<(usize, usize)> {
        self.groups.iter().enumerate().find_map(|(gi, g)| {
            g.movements.iter().position(|m| m.id == id).map(|mi| (gi, mi))
        })
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (gi, g) in self.groups.iter().enumerate() {
            if g.movements.is_empty() {
                out.push(Violation::EmptyGroup { group: gi });
                continue;
            }
            for m in &g.movements {
                if *m.plan.target() != g.target {
                    out.push(Violation::MixedTargets { group: gi, movement: m.id });
                }
            }
            for w in g.movements.windows(2) {
                let gap = w[1].start - w[0].end();
                if gap > TIME_EPS {
                    out.push(Violation::IntraGroupGap { first: w[0].id, second: w[1].id, gap });
                }
            }
            if gi > 0 && !self.groups[gi - 1].movements.is_empty() && g.start() < self.groups[gi - 1].start() {
                out.push(Violation::OutOfOrderGroups { group: gi });
            }
        }
        let mut all: Vec<&CameraMovement> = self.movements().collect();
        all.sort_by(|a, b| a.start.total_cmp(&b.start).then(a.id.cmp(&b.id)));
        for (i, a) in all.iter().enumerate() {
            for b in &all[i + 1..] {
                if b.start >= a.end() - TIME_EPS {
                    break;
                }
                out.push(Violation::Overlap { first: a.id, second: b.id });
            }
        }
        out
    }

    /// Regenerates fillers for every idle interval in `[0, end_time]`.
    /// Between groups they fly from one group's end state to the next
    /// group's start; a delayed start is held on the first state.
    pub fn fill_gaps(&self) -> Result<Timeline, TimelineError> {
        let violations = self.validate();
        if !violations.is_empty() {
            return Err(TimelineError::Invalid(violations));
        }
        let mut t = self.clone();
        t.fillers.clear();
        let mut cursor = 0.0;
        let mut prev_state: Option<CameraState> = None;
        for g in &self.groups {
            let first = &g.movements[0];
            let gap = first.start - cursor;
            if gap > TIME_EPS {
                let next = first.plan.start_state();
                let trajectory = match prev_state {
                    Some(prev) => Trajectory::new(self.gap_fill, &prev, &next, gap, self.span_px)?,
                    None => Trajectory::linear(&next, &next, gap)?,
                };
                t.fillers.push(Filler { start: cursor, trajectory });
            }
            cursor = g.end();
            prev_state = g.movements.last().map(|m| m.plan.end_state());
        }
        Ok(t)
    }

    /// Movements and fillers in time order.
    pub fn segments(&self) -> Vec<Segment<'_>> {
        let mut s: Vec<Segment> = self
            .movements()
            .map(Segment::Movement)
            .chain(self.fillers.iter().map(Segment::Filler))
            .collect();
        s.sort_by(|a, b| a.start().total_cmp(&b.start()));
        s
    }

    /// Camera state at time `t`, or `None` for an empty timeline. Idle time
    /// not covered by a filler holds the previous state.
    pub fn state_at(&self, t: f64) -> Option<CameraState> {
        let segments = self.segments();
        let idx = segments.partition_point(|s| s.start() <= t);
        let seg = if idx == 0 { segments.first()? } else { &segments[idx - 1] };
        Some(seg.state_at(t))
    }
}
