//! The purpose → shot default table.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::{NarrativePurpose, PlanError, ShotParams, ShotType};
use crate::target::TargetKind;

/// Environment variable naming a replacement table file.
pub const SHOT_TABLE_ENV: &str = "GEOSTORY_SHOT_TABLE";

const BUILTIN: &str = include_str!("../../data/default_shots.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct TableEntry {
    pub purpose: NarrativePurpose,
    pub target_kind: TargetKind,
    pub shot: ShotType,
    #[serde(default)]
    pub params: ShotParams,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TableFile {
    #[serde(default)]
    #[allow(dead_code)]
    about: Option<String>,
    entries: Vec<TableEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DefaultShotTable {
    cells: BTreeMap<(NarrativePurpose, TargetKind), TableEntry>,
}

/// Rejects the two purpose/target families that make no sense.
pub fn check_purpose_target(purpose: NarrativePurpose, kind: TargetKind) -> Result<(), PlanError> {
    match purpose {
        NarrativePurpose::Compare if kind != TargetKind::Multiple => Err(PlanError::PurposeMismatch {
            purpose,
            kind,
            rule: "comparison requires multiple targets: Compare only serves a selection of several targets",
        }),
        NarrativePurpose::Dynamics if kind != TargetKind::None => Err(PlanError::PurposeMismatch {
            purpose,
            kind,
            rule: "dynamics requires no target: Dynamics only applies when nothing is selected",
        }),
        _ => Ok(()),
    }
}

impl DefaultShotTable {
    pub fn from_json(text: &str) -> Result<Self, PlanError> {
        let file: TableFile =
            serde_json::from_str(text).map_err(|e| PlanError::Table(e.to_string()))?;
        let mut cells = BTreeMap::new();
        for entry in file.entries {
            let key = (entry.purpose, entry.target_kind);
            check_purpose_target(key.0, key.1)
                .map_err(|e| PlanError::Table(format!("invalid entry: {e}")))?;
            entry.params.validate().map_err(|e| {
                PlanError::Table(format!("entry ({}, {}): {e}", key.0, key.1))
            })?;
            if entry.shot == ShotType::Tracking && key.1 != TargetKind::Path {
                return Err(PlanError::Table(format!(
                    "entry ({}, {}): Tracking needs a Path target",
                    key.0, key.1
                )));
            }
            if cells.insert(key, entry).is_some() {
                return Err(PlanError::Table(format!("duplicate entry ({}, {})", key.0, key.1)));
            }
        }
        for p in NarrativePurpose::ALL {
            for k in TargetKind::ALL {
                if check_purpose_target(p, k).is_ok() && !cells.contains_key(&(p, k)) {
                    return Err(PlanError::Table(format!("missing entry ({p}, {k})")));
                }
            }
        }
        Ok(Self { cells })
    }

    pub fn load(path: &Path) -> Result<Self, PlanError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PlanError::Table(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// The table shipped with the crate.
    pub fn builtin() -> &'static Self {
        static TABLE: OnceLock<DefaultShotTable> = OnceLock::new();
        TABLE.get_or_init(|| Self::from_json(BUILTIN).expect("shipped default shot table is valid"))
    }

    /// The table named by [`SHOT_TABLE_ENV`], or the builtin one when unset.
    pub fn from_env() -> Result<Self, PlanError> {
        match std::env::var_os(SHOT_TABLE_ENV) {
            Some(path) => Self::load(Path::new(&path)),
            None => Ok(Self::builtin().clone()),
        }
    }

    pub fn lookup(
        &self,
        purpose: NarrativePurpose,
        kind: TargetKind,
    ) -> Result<(ShotType, ShotParams), PlanError> {
        check_purpose_target(purpose, kind)?;
        let e = self.cells.get(&(purpose, kind)).ok_or_else(|| {
            PlanError::Table(format!("no entry for ({purpose}, {kind})"))
        })?;
        Ok((e.shot, e.params))
    }

    pub fn entries(&self) -> impl Iterator<Item = &TableEntry> {
        self.cells.values()
    }
}

/// Looks up the builtin table.
pub fn default_shot_for(
    purpose: NarrativePurpose,
    kind: TargetKind,
) -> Result<(ShotType, ShotParams), PlanError> {
    DefaultShotTable::builtin().lookup(purpose, kind)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_table_is_total() {
        let table = DefaultShotTable::builtin();
        let mut valid = 0;
        for p in NarrativePurpose::ALL {
            for k in TargetKind::ALL {
                let r = table.lookup(p, k);
                let bad = (p == NarrativePurpose::Compare && k != TargetKind::Multiple)
                    || (p == NarrativePurpose::Dynamics && k != TargetKind::None);
                assert_eq!(r.is_err(), bad, "{p} {k}");
                valid += usize::from(!bad);
            }
        }
        assert_eq!(valid, 17);
        assert_eq!(table.entries().count(), 17);
    }

    #[test]
    fn textual_cells() {
        let (shot, params) = default_shot_for(NarrativePurpose::Emphasize, TargetKind::Region).unwrap();
        assert_eq!((shot, params.intensity, params.duration), (ShotType::PushIn, 0.8, 3.0));
        let (shot, _) = default_shot_for(NarrativePurpose::Supplement, TargetKind::Region).unwrap();
        assert_eq!(shot, ShotType::pan());
        let (shot, _) = default_shot_for(NarrativePurpose::Compare, TargetKind::Multiple).unwrap();
        assert_eq!(shot, ShotType::PullOut);
        let (shot, params) = default_shot_for(NarrativePurpose::Dynamics, TargetKind::None).unwrap();
        assert_eq!((shot, params.intensity, params.duration), (ShotType::PushIn, 0.2, 10.0));
    }

    #[test]
    fn mismatch_messages_cite_the_rule() {
        let err = default_shot_for(NarrativePurpose::Compare, TargetKind::Location).unwrap_err();
        assert!(err.to_string().starts_with("comparison requires multiple targets"), "{err}");
        let err = default_shot_for(NarrativePurpose::Dynamics, TargetKind::Path).unwrap_err();
        assert!(err.to_string().starts_with("dynamics requires no target"), "{err}");
    }

    #[test]
    fn incomplete_or_invalid_tables_are_rejected() {
        let missing = r#"{"entries": [{"purpose": "Dynamics", "targetKind": "None", "shot": "PushIn"}]}"#;
        assert!(DefaultShotTable::from_json(missing).unwrap_err().to_string().contains("missing entry"));
        let invalid = r#"{"entries": [{"purpose": "Compare", "targetKind": "Path", "shot": "Pan"}]}"#;
        assert!(DefaultShotTable::from_json(invalid).is_err());
    }
}
