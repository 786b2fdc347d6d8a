use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Ordinal,
    Nominal,
}

/// One discrete column. The position of a label in `categories` is its value index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feature {
    pub name: String,
    pub kind: FeatureKind,
    pub categories: Vec<String>,
}

impl Feature {
    pub fn new(name: impl Into<String>, kind: FeatureKind, categories: Vec<String>) -> Self {
        Self {
            name: name.into(),
            kind,
            categories,
        }
    }

    /// A feature whose labels are just `"0"`, `"1"`, ...
    pub fn indexed(name: impl Into<String>, kind: FeatureKind, cardinality: usize) -> Self {
        Self::new(name, kind, (0..cardinality).map(|i| i.to_string()).collect())
    }

    pub fn cardinality(&self) -> usize {
        self.categories.len()
    }

    /// Maps a CSV cell to a value index: an exact label match first, then a
    /// plain integer index.
    pub fn lookup(&self, cell: &str) -> Option<u32> {
        let cell = cell.trim();
        if let Some(i) = self.categories.iter().position(|c| c == cell) {
            return Some(i as u32);
        }
        cell.parse::<usize>()
            .ok()
            .filter(|&i| i < self.cardinality())
            .map(|i| i as u32)
    }
}

#[derive(Deserialize)]
struct RawSchema {
    features: Vec<Feature>,
}

/// Ordered list of discrete features. Immutable once validated.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSchema")]
pub struct Schema {
    features: Vec<Feature>,
}

impl TryFrom<RawSchema> for Schema {
    type Error = Error;

    fn try_from(raw: RawSchema) -> Result<Self> {
        Schema::new(raw.features)
    }
}

impl Schema {
    pub fn new(features: Vec<Feature>) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::Schema("no features".into()));
        }
        for (i, f) in features.iter().enumerate() {
            if f.name.is_empty() {
                return Err(Error::Schema(format!("feature {i} has an empty name")));
            }
            if f.cardinality() < 2 {
                return Err(Error::Schema(format!(
                    "feature {:?} has cardinality {} (need at least 2)",
                    f.name,
                    f.cardinality()
                )));
            }
            if f.cardinality() > u32::MAX as usize {
                return Err(Error::Schema(format!("feature {:?} is too large", f.name)));
            }
            if features[..i].iter().any(|g| g.name == f.name) {
                return Err(Error::Schema(format!("duplicate feature name {:?}", f.name)));
            }
            let mut labels: Vec<&String> = f.categories.iter().collect();
            labels.sort();
            if labels.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Schema(format!(
                    "feature {:?} has duplicate category labels",
                    f.name
                )));
            }
        }
        Ok(Self { features })
    }

    /// Convenience for tests and synthetic profiles: indexed labels, nominal kind.
    pub fn from_cardinalities(cards: &[usize]) -> Result<Self> {
        Self::new(
            cards
                .iter()
                .enumerate()
                .map(|(i, &c)| Feature::indexed(format!("f{i}"), FeatureKind::Nominal, c))
                .collect(),
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes")
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn feature(&self, index: usize) -> &Feature {
        &self.features[index]
    }

    pub fn cardinality(&self, index: usize) -> usize {
        self.features[index].cardinality()
    }

    pub fn cardinalities(&self) -> Vec<usize> {
        self.features.iter().map(Feature::cardinality).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    /// SHA-256 of the compact canonical JSON form, hex encoded. Stored in
    /// serialized models so they cannot be reloaded against a different schema.
    pub fn fingerprint(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("schema serializes");
        hex::encode(Sha256::digest(&canonical))
    }
}
