use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA_V1_CSV: &str = include_str!("../../data/feature_schema_v1.csv");
pub const SCHEMA_V1: &str = "lf-v1";
pub const FEATURE_COUNT: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    /// Non-negative integer.
    Count,
    /// Real in [0, 1].
    Ratio,
    /// Non-negative real.
    Real,
    /// 0 or 1.
    Binary,
    /// Real in [-1, 1].
    Polarity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureDef {
    pub name: String,
    pub kind: FeatureKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSchema {
    pub version: String,
    pub features: Vec<FeatureDef>,
}

static V1: LazyLock<FeatureSchema> = LazyLock::new(|| {
    let mut r = csv::Reader::from_reader(SCHEMA_V1_CSV.as_bytes());
    let features = r
        .deserialize::<FeatureDef>()
        .collect::<std::result::Result<Vec<_>, _>>()
        .expect("bundled schema parses");
    let schema = FeatureSchema {
        version: SCHEMA_V1.to_string(),
        features,
    };
    schema.check().expect("bundled schema is valid");
    schema
});

impl FeatureSchema {
    pub fn v1() -> &'static FeatureSchema {
        &V1
    }

    pub fn names(&self) -> Vec<&str> {
        self.features.iter().map(|f| f.name.as_str()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn check(&self) -> Result<()> {
        if self.features.len() != FEATURE_COUNT {
            return Err(Error::SchemaMismatch(format!(
                "expected {FEATURE_COUNT} features, found {}",
                self.features.len()
            )));
        }
        let mut names: Vec<_> = self.names();
        names.sort_unstable();
        names.dedup();
        if names.len() != FEATURE_COUNT {
            return Err(Error::SchemaMismatch("feature names are not unique".into()));
        }
        Ok(())
    }
}
