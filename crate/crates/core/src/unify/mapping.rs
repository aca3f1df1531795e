//! Source-label to binary-label mapping tables.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::LabelClass;
use crate::error::{Error, Result};

/// The mapping table that ships with the crate.
pub const DEFAULT_MAPPING_CSV: &str = include_str!("../../data/label_mapping.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MappingAction {
    #[serde(alias = "map_related")]
    Related,
    #[serde(alias = "map_not_related")]
    NotRelated,
    Discard,
}

impl MappingAction {
    pub fn label(self) -> Option<LabelClass> {
        match self {
            MappingAction::Related => Some(LabelClass::Related),
            MappingAction::NotRelated => Some(LabelClass::NotRelated),
            MappingAction::Discard => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingEntry {
    pub source_dataset: String,
    pub original_label: String,
    pub action: MappingAction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverrideEntry {
    pub source_dataset: String,
    pub id: String,
    pub action: MappingAction,
}

/// Lowercased, trimmed form used for matching.
pub fn normalize_label(label: &str) -> String {
    label.trim().to_lowercase()
}

/// Exact-match label table with optional per-message overrides (manual
/// relabeling).
#[derive(Debug, Clone, Default)]
pub struct LabelMapping {
    entries: HashMap<(String, String), MappingAction>,
    overrides: HashMap<(String, String), MappingAction>,
}

impl LabelMapping {
    pub fn new(entries: Vec<MappingEntry>, overrides: Vec<OverrideEntry>) -> Result<Self> {
        let mut map = HashMap::new();
        let mut per_dataset: BTreeMap<String, BTreeSet<MappingAction>> = BTreeMap::new();
        for e in entries {
            let key = (e.source_dataset.clone(), normalize_label(&e.original_label));
            if map.insert(key, e.action).is_some() {
                return Err(Error::InvalidMapping(format!(
                    "duplicate entry ({}, {})",
                    e.source_dataset, e.original_label
                )));
            }
            per_dataset.entry(e.source_dataset).or_default().insert(e.action);
        }
        for (dataset, actions) in &per_dataset {
            let discard_only = actions.iter().all(|a| *a == MappingAction::Discard);
            if !discard_only
                && !(actions.contains(&MappingAction::Related)
                    && actions.contains(&MappingAction::NotRelated))
            {
                return Err(Error::InvalidMapping(format!(
                    "dataset {dataset} must map at least one label to each class"
                )));
            }
        }
        let mut ov = HashMap::new();
        for o in overrides {
            if ov.insert((o.source_dataset.clone(), o.id.clone()), o.action).is_some() {
                return Err(Error::InvalidMapping(format!(
                    "duplicate override ({}, {})",
                    o.source_dataset, o.id
                )));
            }
        }
        Ok(LabelMapping {
            entries: map,
            overrides: ov,
        })
    }

    pub fn shipped() -> Self {
        let entries = parse_rows(DEFAULT_MAPPING_CSV.as_bytes()).expect("bundled mapping parses");
        LabelMapping::new(entries, Vec::new()).expect("bundled mapping is valid")
    }

    pub fn load(mapping: &Path, overrides: Option<&Path>) -> Result<Self> {
        let entries = read_rows(mapping)?;
        let overrides = match overrides {
            Some(p) => read_rows(p)?,
            None => Vec::new(),
        };
        LabelMapping::new(entries, overrides)
    }

    /// Reads a `(source_dataset, id, action)` override table.
    pub fn load_overrides(path: &Path) -> Result<Vec<OverrideEntry>> {
        read_rows(path)
    }

    pub fn with_overrides(mut self, overrides: Vec<OverrideEntry>) -> Result<Self> {
        for o in overrides {
            if self
                .overrides
                .insert((o.source_dataset.clone(), o.id.clone()), o.action)
                .is_some()
            {
                return Err(Error::InvalidMapping(format!(
                    "duplicate override ({}, {})",
                    o.source_dataset, o.id
                )));
            }
        }
        Ok(self)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, source_dataset: &str, original_label: &str) -> Option<MappingAction> {
        self.entries
            .get(&(source_dataset.to_string(), normalize_label(original_label)))
            .copied()
    }

    pub fn override_for(&self, source_dataset: &str, id: &str) -> Option<MappingAction> {
        self.overrides
            .get(&(source_dataset.to_string(), id.to_string()))
            .copied()
    }
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_rows(file).map_err(|e| e.context(path.display().to_string()))
}

fn parse_rows<T: for<'de> Deserialize<'de>, R: std::io::Read>(reader: R) -> Result<Vec<T>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_mapping_loads() {
        let m = LabelMapping::shipped();
        assert_eq!(m.lookup("CrisisLexT6", "off-topic"), Some(MappingAction::NotRelated));
        assert_eq!(m.lookup("CrisisLexT6", "  On-Topic "), Some(MappingAction::Related));
        assert_eq!(m.lookup("CrisisLexT6", "informative"), None);
    }

    #[test]
    fn duplicate_entries_are_rejected() {
        let e = |label: &str, action| MappingEntry {
            source_dataset: "d".into(),
            original_label: label.into(),
            action,
        };
        let err = LabelMapping::new(
            vec![
                e("yes", MappingAction::Related),
                e("no", MappingAction::NotRelated),
                e("YES ", MappingAction::NotRelated),
            ],
            vec![],
        );
        assert!(matches!(err, Err(Error::InvalidMapping(_))));
    }

    #[test]
    fn one_sided_dataset_is_rejected() {
        let err = LabelMapping::new(
            vec![MappingEntry {
                source_dataset: "d".into(),
                original_label: "yes".into(),
                action: MappingAction::Related,
            }],
            vec![],
        );
        assert!(matches!(err, Err(Error::InvalidMapping(_))));

        let discard_only = LabelMapping::new(
            vec![MappingEntry {
                source_dataset: "d".into(),
                original_label: "junk".into(),
                action: MappingAction::Discard,
            }],
            vec![],
        );
        assert!(discard_only.is_ok());
    }
}
