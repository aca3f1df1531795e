use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ScenarioDataset;
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::lingfeat::SCHEMA_V1;

pub const MANIFEST_VERSION: u32 = 1;

/// On-disk form of a [`ScenarioDataset`], tied to the corpus it was built
/// from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub manifest_version: u32,
    pub corpus_hash: String,
    pub feature_schema: String,
    pub dataset: ScenarioDataset,
}

pub fn export_manifest(ds: &ScenarioDataset, corpus: &Corpus, path: &Path) -> Result<()> {
    let manifest = SplitManifest {
        manifest_version: MANIFEST_VERSION,
        corpus_hash: corpus.content_hash(),
        feature_schema: SCHEMA_V1.to_string(),
        dataset: ds.clone(),
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Loads a manifest and checks that it was built from `corpus`.
pub fn import_manifest(path: &Path, corpus: &Corpus) -> Result<ScenarioDataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let manifest: SplitManifest =
        serde_json::from_str(&text).map_err(|e| Error::from(e).context(path.display().to_string()))?;
    if manifest.manifest_version != MANIFEST_VERSION {
        return Err(Error::VersionMismatch {
            expected: MANIFEST_VERSION.to_string(),
            found: manifest.manifest_version.to_string(),
        });
    }
    if manifest.feature_schema != SCHEMA_V1 {
        return Err(Error::SchemaMismatch(format!(
            "manifest uses feature schema `{}`",
            manifest.feature_schema
        )));
    }
    let actual = corpus.content_hash();
    if manifest.corpus_hash != actual {
        return Err(Error::HashMismatch {
            expected: manifest.corpus_hash,
            actual,
        });
    }
    Ok(manifest.dataset)
}
