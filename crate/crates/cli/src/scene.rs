//! Scene files: a space, named builtin submanifolds and a run record.

use std::collections::BTreeMap;

use geolink_core::{builtin, Family, ParamSubmanifold, Space, SpaceKind};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub space: SpaceRecord,
    #[serde(rename = "submanifold")]
    pub submanifolds: Vec<SubmanifoldRecord>,
    #[serde(default)]
    pub run: RunRecord,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceRecord {
    pub kind: SpaceKind,
    pub dim: usize,
}

#[derive(Debug, Clone, Deserialize)]
pub struct SubmanifoldRecord {
    pub name: String,
    #[serde(flatten)]
    pub family: Family,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRecord {
    /// Pairs `[K, L]` to link; all ordered pairs of complementary dimension when empty.
    #[serde(default)]
    pub pairs: Vec<[String; 2]>,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_oracle_samples")]
    pub oracle_samples: usize,
}

fn default_resolution() -> usize {
    32
}

fn default_budget() -> usize {
    4
}

fn default_tolerance() -> f64 {
    geolink_core::linking::DEFAULT_TOLERANCE
}

fn default_oracle_samples() -> usize {
    128
}

impl Default for RunRecord {
    fn default() -> Self {
        RunRecord {
            pairs: vec![],
            resolution: default_resolution(),
            budget: default_budget(),
            tolerance: default_tolerance(),
            seed: 0,
            oracle_samples: default_oracle_samples(),
        }
    }
}

/// A validated scene.
#[derive(Debug, Clone)]
pub struct Scene {
    pub space: Space,
    pub submanifolds: BTreeMap<String, ParamSubmanifold>,
    pub pairs: Vec<(String, String)>,
    pub run: RunRecord,
}

#[derive(Debug)]
pub enum SceneError {
    /// Unreadable or malformed file.
    Parse(String),
    /// Well-formed but inconsistent.
    Invalid(String),
}

pub fn load(path: &std::path::Path) -> Result<Scene, SceneError> {
    let text = std::fs::read_to_string(path).map_err(|e| SceneError::Parse(format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|e| match e {
        SceneError::Parse(m) => SceneError::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse(text: &str) -> Result<Scene, SceneError> {
    let file: SceneFile = toml::from_str(text).map_err(|e| SceneError::Parse(e.to_string()))?;
    let space = Space::new(file.space.kind, file.space.dim).map_err(|e| SceneError::Invalid(e.to_string()))?;
    let mut submanifolds = BTreeMap::new();
    let mut order = vec![];
    for rec in &file.submanifolds {
        let m = builtin(space, &rec.family)
            .map_err(|e| SceneError::Invalid(format!("submanifold {:?} ({}): {e}", rec.name, rec.family.name())))?;
        if submanifolds.insert(rec.name.clone(), m).is_some() {
            return Err(SceneError::Invalid(format!("duplicate submanifold name {:?}", rec.name)));
        }
        order.push(rec.name.clone());
    }
    let pairs: Vec<(String, String)> = if file.run.pairs.is_empty() {
        let mut all = vec![];
        for (i, a) in order.iter().enumerate() {
            for b in &order[i + 1..] {
                if submanifolds[a].dim() + submanifolds[b].dim() + 1 == space.dim() {
                    all.push((a.clone(), b.clone()));
                }
            }
        }
        all
    } else {
        file.run.pairs.iter().map(|[a, b]| (a.clone(), b.clone())).collect()
    };
    if pairs.is_empty() {
        return Err(SceneError::Invalid("scene has no pair of complementary dimension to link".into()));
    }
    for (a, b) in &pairs {
        for name in [a, b] {
            if !submanifolds.contains_key(name) {
                return Err(SceneError::Invalid(format!("pair ({a}, {b}) names unknown submanifold {name:?}")));
            }
        }
        let (k, l) = (submanifolds[a].dim(), submanifolds[b].dim());
        if k + l + 1 != space.dim() {
            return Err(SceneError::Invalid(format!(
                "pair ({a}, {b}): dimensions {k} and {l} violate k + l + 1 = n with n = {}",
                space.dim()
            )));
        }
    }
    Ok(Scene { space, submanifolds, pairs, run: file.run })
}
