//! Turning target references into concrete targets against loaded data.

use std::collections::BTreeMap;

use super::{Design, Layout, Story, StoryError, TargetRef};
use crate::data::{
    load_features, select_by_lasso, CsvOptions, DataFormat, DataLayer, Feature, LayerKind,
};
use crate::shot::check_purpose_target;
use crate::target::GeospatialTarget;

use super::document::FormatName;

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedDesign {
    pub design: Design,
    pub target: GeospatialTarget,
    /// Group label: the target's name, else its coordinates.
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedScene {
    pub id: String,
    pub layout: Layout,
    pub pause: f64,
    pub designs: Vec<ResolvedDesign>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedStory {
    pub story: Story,
    /// Dataset id → features, in document order.
    pub features: BTreeMap<String, Vec<Feature>>,
    pub layers: Vec<(String, DataLayer)>,
    pub scenes: Vec<ResolvedScene>,
}

impl ResolvedStory {
    /// Every feature of every dataset, datasets in document order.
    pub fn all_features(&self) -> impl Iterator<Item = &Feature> {
        self.story.document.data.iter().flat_map(move |d| self.features[&d.id].iter())
    }
}

/// Parses each dataset's text. `texts` maps dataset id → document text.
pub fn load_datasets(
    story: &Story,
    texts: &BTreeMap<String, String>,
) -> Result<BTreeMap<String, Vec<Feature>>, StoryError> {
    let mut out = BTreeMap::new();
    for d in &story.document.data {
        let text = texts.get(&d.id).ok_or_else(|| StoryError::MissingDataset(d.id.clone()))?;
        let format = match (d.format, &d.csv) {
            (Some(FormatName::Csv), opts) | (None, opts @ Some(_)) => {
                DataFormat::Csv(opts.clone().unwrap_or_default())
            }
            (Some(FormatName::Geojson), _) => DataFormat::GeoJson,
            (None, None) => match d.path.as_deref() {
                Some(p) => DataFormat::from_path(std::path::Path::new(p)),
                None if text.trim_start().starts_with('{') => DataFormat::GeoJson,
                None => DataFormat::Csv(CsvOptions::default()),
            },
        };
        let features = load_features(text, &format)
            .map_err(|source| StoryError::Data { id: d.id.clone(), source })?;
        out.insert(d.id.clone(), features);
    }
    Ok(out)
}

pub fn resolve_targets(
    story: &Story,
    features: BTreeMap<String, Vec<Feature>>,
) -> Result<ResolvedStory, StoryError> {
    for d in &story.document.data {
        if !features.contains_key(&d.id) {
            return Err(StoryError::MissingDataset(d.id.clone()));
        }
    }
    let mut layers = Vec::new();
    for l in &story.document.layers {
        let fs = features[&l.data].clone();
        let layer = match l.kind {
            LayerKind::Hexagon3D => DataLayer::hexagon(
                fs,
                l.cell_radius.expect("validated at parse time"),
                l.height_scale.unwrap_or(1.0),
            ),
            kind => DataLayer::new(kind, fs),
        }
        .map_err(|source| StoryError::Data { id: l.data.clone(), source })?;
        layers.push((l.id.clone(), layer));
    }

    let ctx = Lookup { story, features: &features };
    let mut scenes = Vec::with_capacity(story.scenes.len());
    for (si, scene) in story.scenes.iter().enumerate() {
        let number = si + 1;
        let mut designs = Vec::with_capacity(scene.designs.len());
        for d in &scene.designs {
            let target = ctx.resolve(&d.target, d, number)?;
            if let Some(p) = d.purpose {
                check_purpose_target(p, target.kind())
                    .map_err(|source| StoryError::Plan { scene: number, source })?;
            }
            let label = target.label();
            designs.push(ResolvedDesign { design: d.clone(), target, label });
        }
        scenes.push(ResolvedScene { id: scene.id.clone(), layout: scene.layout, pause: scene.pause, designs });
    }
    Ok(ResolvedStory { story: story.clone(), features, layers, scenes })
}

struct Lookup<'a> {
    story: &'a Story,
    features: &'a BTreeMap<String, Vec<Feature>>,
}

impl Lookup<'_> {
    fn pool(&self, dataset: &Option<String>) -> Vec<&Feature> {
        match dataset {
            Some(id) => self.features[id].iter().collect(),
            None => self
                .story
                .document
                .data
                .iter()
                .flat_map(|d| self.features[&d.id].iter())
                .collect(),
        }
    }

    fn unique<'f>(
        &self,
        found: Vec<&'f Feature>,
        design: &Design,
        scene: usize,
    ) -> Result<&'f Feature, StoryError> {
        let spec = design.target_spec.as_ref().map_or_else(String::new, |s| s.describe());
        match found.as_slice() {
            [one] => Ok(one),
            [] => Err(StoryError::Unresolved { spec, scene }),
            _ => Err(StoryError::Invalid {
                path: format!("scene {scene}"),
                message: format!("target '{spec}' matches {} features; add a dataset", found.len()),
            }),
        }
    }

    fn resolve(&self, r: &TargetRef, design: &Design, scene: usize) -> Result<GeospatialTarget, StoryError> {
        Ok(match r {
            TargetRef::None => GeospatialTarget::None,
            TargetRef::Inline(t) => t.clone(),
            TargetRef::FeatureId { id, dataset } => {
                let found = self.pool(dataset).into_iter().filter(|f| &f.id == id).collect();
                self.unique(found, design, scene)?.target()
            }
            TargetRef::Name { name, dataset } => {
                let found = self
                    .pool(dataset)
                    .into_iter()
                    .filter(|f| f.name.as_deref() == Some(name.as_str()))
                    .collect();
                match self.unique(found, design, scene) {
                    Ok(f) => f.target(),
                    Err(StoryError::Unresolved { scene, .. }) => {
                        return Err(StoryError::Unresolved { spec: name.clone(), scene })
                    }
                    Err(e) => return Err(e),
                }
            }
            TargetRef::Lasso { polygon, dataset } => {
                let pool: Vec<Feature> = self.pool(dataset).into_iter().cloned().collect();
                select_by_lasso(&pool, polygon)
            }
            TargetRef::Multiple(members) => {
                let resolved = members
                    .iter()
                    .map(|m| self.resolve(m, design, scene))
                    .collect::<Result<Vec<_>, _>>()?;
                GeospatialTarget::multiple(resolved).map_err(|e| StoryError::Invalid {
                    path: format!("scene {scene}"),
                    message: e.to_string(),
                })?
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::story::parse_story;
    use crate::target::TargetKind;

    fn texts() -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("pts".to_string(), "id,lon,lat,name\n7,1,1,Seven\n8,5,5,Eight\n9,30,30,London2\n".to_string());
        m
    }

    fn resolve(doc: &str) -> Result<ResolvedStory, StoryError> {
        let s = parse_story(doc)?;
        let f = load_datasets(&s, &texts())?;
        resolve_targets(&s, f)
    }

    #[test]
    fn feature_id_and_lasso() {
        let doc = r#"{"data": [{"id": "pts", "path": "pts.csv"}], "scenes": [
            {"designs": [{"purpose": "Emphasize", "target": {"featureId": "7"}}]},
            {"designs": [{"purpose": "Overview", "target": {"lasso": [[0,0],[6,0],[6,6],[0,6]]}}]}]}"#;
        let r = resolve(doc).unwrap();
        let t0 = &r.scenes[0].designs[0];
        assert_eq!(t0.target.kind(), TargetKind::Location);
        assert_eq!(t0.label, "Seven");
        let GeospatialTarget::Multiple { members } = &r.scenes[1].designs[0].target else { panic!() };
        assert_eq!(members.len(), 2);
        assert_eq!(r.scenes[1].designs[0].label, "Seven + Eight");
    }

    #[test]
    fn unresolved_names_cite_the_scene() {
        let doc = r#"{"data": [{"id": "pts", "path": "pts.csv"}], "scenes": [
            {"designs": [{"purpose": "Emphasize", "target": {"name": "Seven"}}]},
            {"designs": [{"purpose": "Emphasize", "target": {"name": "London"}}]}]}"#;
        assert_eq!(resolve(doc).unwrap_err().to_string(), "unresolved target 'London' in scene 2");
    }

    #[test]
    fn compare_checked_after_lookup() {
        let doc = r#"{"data": [{"id": "pts", "path": "pts.csv"}], "scenes": [
            {"designs": [{"purpose": "Compare", "target": {"featureId": "8"}}]}]}"#;
        let err = resolve(doc).unwrap_err().to_string();
        assert!(err.starts_with("scene 1: comparison requires multiple targets"), "{err}");
    }

    #[test]
    fn missing_dataset_text() {
        let doc = r#"{"data": [{"id": "other", "path": "o.csv"}], "scenes": []}"#;
        assert_eq!(resolve(doc).unwrap_err(), StoryError::MissingDataset("other".into()));
    }
}
