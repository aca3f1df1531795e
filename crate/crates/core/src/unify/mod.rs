//! Building the unified multi-crisis corpus from heterogeneous sources.

mod langdetect;
mod mapping;
mod taxonomy;

use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use langdetect::{
    detect_language, fill_missing_languages, LanguageDetector, LanguageGuess, LanguageProfile,
    PrecomputedLanguages, ProfileDetector,
};
pub use mapping::{
    normalize_label, LabelMapping, MappingAction, MappingEntry, OverrideEntry, DEFAULT_MAPPING_CSV,
};
pub use taxonomy::{
    annotate_events, load_taxonomy, HazardProfile, HazardScheme, TaxonomyRecord,
    DEFAULT_HAZARD_SCHEME_CSV,
};

use crate::corpus::{Corpus, Message};
use crate::error::{Error, Result};

/// One row of a source dataset before label unification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRow {
    pub source_dataset: String,
    pub id: String,
    pub text: String,
    #[serde(default)]
    pub language: Option<String>,
    pub event_id: String,
    pub original_label: String,
    #[serde(default)]
    pub has_location_meta: Option<bool>,
    #[serde(default)]
    pub has_media_meta: Option<bool>,
}

/// Reads a source table. When the file has no `source_dataset` column,
/// `dataset` fills it in.
pub fn load_raw_rows(path: &Path, dataset: Option<&str>) -> Result<Vec<RawRow>> {
    let mut r = csv::ReaderBuilder::new()
        .from_path(path)
        .map_err(|e| Error::from(e).context(path.display().to_string()))?;
    let headers = r.headers()?.clone();
    let has_dataset = headers.iter().any(|h| h == "source_dataset");
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(i + 2);
        let get = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .and_then(|idx| rec.get(idx))
                .map(str::to_string)
        };
        let required = |name: &str| {
            get(name).ok_or_else(|| Error::Malformed {
                path: path.to_path_buf(),
                line,
                field: name.to_string(),
                reason: "missing".into(),
            })
        };
        let flag = |name: &str| -> Result<Option<bool>> {
            match get(name).as_deref().map(str::trim) {
                None | Some("") => Ok(None),
                Some("true") | Some("1") => Ok(Some(true)),
                Some("false") | Some("0") => Ok(Some(false)),
                Some(other) => Err(Error::Malformed {
                    path: path.to_path_buf(),
                    line,
                    field: name.to_string(),
                    reason: format!("expected a boolean, got {other:?}"),
                }),
            }
        };
        let source_dataset = if has_dataset {
            required("source_dataset")?
        } else {
            dataset
                .map(str::to_string)
                .ok_or_else(|| Error::Malformed {
                    path: path.to_path_buf(),
                    line,
                    field: "source_dataset".into(),
                    reason: "missing and no dataset name given".into(),
                })?
        };
        out.push(RawRow {
            source_dataset,
            id: required("id")?,
            text: required("text")?,
            language: get("language").filter(|l| !l.trim().is_empty()),
            event_id: required("event_id")?,
            original_label: required("original_label")?,
            has_location_meta: flag("has_location_meta")?,
            has_media_meta: flag("has_media_meta")?,
        });
    }
    Ok(out)
}

/// Which mapping rule produced an output label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MappingSource {
    Table { original_label: String },
    Override,
}

#[derive(Debug, Clone, Default)]
pub struct MappingOutcome {
    pub messages: Vec<Message>,
    pub discarded: usize,
    /// Distinct (dataset, label) pairs with no mapping entry, first-seen order.
    pub unmapped: Vec<(String, String)>,
    /// One record per output message, aligned with `messages`.
    pub provenance: Vec<MappingSource>,
}

/// Maps every row's source label to the binary task label. Overrides keyed
/// by (dataset, id) take precedence over the label table.
pub fn apply_label_mapping(rows: &[RawRow], mapping: &LabelMapping) -> MappingOutcome {
    let mut out = MappingOutcome::default();
    let mut unmapped_seen = HashSet::new();
    for row in rows {
        let (action, source) = match mapping.override_for(&row.source_dataset, &row.id) {
            Some(a) => (Some(a), MappingSource::Override),
            None => (
                mapping.lookup(&row.source_dataset, &row.original_label),
                MappingSource::Table {
                    original_label: normalize_label(&row.original_label),
                },
            ),
        };
        let Some(action) = action else {
            let key = (row.source_dataset.clone(), row.original_label.clone());
            if unmapped_seen.insert(key.clone()) {
                out.unmapped.push(key);
            }
            continue;
        };
        let Some(label) = action.label() else {
            out.discarded += 1;
            continue;
        };
        out.messages.push(Message {
            id: row.id.clone(),
            text: row.text.clone(),
            translated_text: None,
            language: row.language.clone().unwrap_or_default(),
            event_id: row.event_id.clone(),
            label,
            source_dataset: row.source_dataset.clone(),
            original_label: row.original_label.clone(),
            has_location_meta: row.has_location_meta.unwrap_or(false),
            has_media_meta: row.has_media_meta.unwrap_or(false),
        });
        out.provenance.push(source);
    }
    out
}

/// Union of corpora. Messages are deduplicated on (source_dataset, id),
/// keeping the first occurrence; events with the same id must agree.
pub fn merge_corpora(sources: &[Corpus]) -> Result<Corpus> {
    let mut merged = Corpus::default();
    let mut seen: HashSet<(String, String)> = HashSet::new();
    let mut event_pos: HashMap<String, usize> = HashMap::new();
    for src in sources {
        for e in &src.events {
            match event_pos.get(&e.id) {
                Some(&i) => {
                    if merged.events[i] != *e {
                        return Err(Error::EventConflict(e.id.clone()));
                    }
                }
                None => {
                    event_pos.insert(e.id.clone(), merged.events.len());
                    merged.events.push(e.clone());
                }
            }
        }
        for m in &src.messages {
            if seen.insert((m.source_dataset.clone(), m.id.clone())) {
                merged.messages.push(m.clone());
            }
        }
        for p in &src.provenance {
            if !merged.provenance.contains(p) {
                merged.provenance.push(p.clone());
            }
        }
    }
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{fixtures, LabelClass};

    fn row(dataset: &str, id: &str, label: &str) -> RawRow {
        RawRow {
            source_dataset: dataset.into(),
            id: id.into(),
            text: format!("text {id}"),
            language: Some("en".into()),
            event_id: "e1".into(),
            original_label: label.into(),
            has_location_meta: None,
            has_media_meta: None,
        }
    }

    #[test]
    fn off_topic_maps_to_not_related() {
        let out = apply_label_mapping(&[row("CrisisLexT6", "1", "off-topic")], &LabelMapping::shipped());
        assert_eq!(out.messages[0].label, LabelClass::NotRelated);
        assert!(out.unmapped.is_empty());
    }

    #[test]
    fn related_but_not_informative_maps_to_related() {
        let out = apply_label_mapping(
            &[row("CrisisLexT26", "1", "Related but not informative")],
            &LabelMapping::shipped(),
        );
        assert_eq!(out.messages[0].label, LabelClass::Related);
        assert_eq!(out.messages[0].original_label, "Related but not informative");
    }

    #[test]
    fn empty_mapping_reports_every_label() {
        let rows: Vec<_> = ["a", "b", "c", "d", "e"]
            .iter()
            .enumerate()
            .map(|(i, l)| row("d", &i.to_string(), l))
            .collect();
        let out = apply_label_mapping(&rows, &LabelMapping::default());
        assert!(out.messages.is_empty());
        assert_eq!(out.unmapped.len(), 5);
        assert_eq!(out.discarded, 0);
    }

    #[test]
    fn discard_and_override() {
        let mapping = LabelMapping::shipped()
            .with_overrides(vec![OverrideEntry {
                source_dataset: "CrisisMMD".into(),
                id: "2".into(),
                action: MappingAction::Related,
            }])
            .unwrap();
        let rows = [
            row("CrisisMMD", "1", "dont_know_or_cant_judge"),
            row("CrisisMMD", "2", "not_informative"),
            row("CrisisMMD", "3", "not_informative"),
        ];
        let out = apply_label_mapping(&rows, &mapping);
        assert_eq!(out.discarded, 1);
        assert_eq!(out.messages.len(), 2);
        assert_eq!(out.messages[0].label, LabelClass::Related);
        assert_eq!(out.provenance[0], MappingSource::Override);
        assert_eq!(out.messages[1].label, LabelClass::NotRelated);
    }

    #[test]
    fn mapping_preserves_row_order() {
        let rows: Vec<_> = (0..20)
            .map(|i| row("CrisisLexT6", &i.to_string(), if i % 3 == 0 { "off-topic" } else { "on-topic" }))
            .collect();
        let out = apply_label_mapping(&rows, &LabelMapping::shipped());
        let ids: Vec<_> = out.messages.iter().map(|m| m.id.clone()).collect();
        let expected: Vec<_> = (0..20).map(|i| i.to_string()).collect();
        assert_eq!(ids, expected);
    }

    #[test]
    fn merge_is_idempotent() {
        let c = fixtures::mixed();
        let merged = merge_corpora(&[c.clone(), c.clone()]).unwrap();
        assert_eq!(merged, c);
    }

    #[test]
    fn merging_disjoint_corpora_adds_up() {
        let a = fixtures::mixed();
        let mut b = fixtures::mixed();
        b.messages.truncate(3);
        b.messages.iter_mut().for_each(|m| m.source_dataset = "other".into());
        let mut a3 = a.clone();
        a3.messages.truncate(3);
        let merged = merge_corpora(&[a3, b]).unwrap();
        assert_eq!(merged.len(), 6);
        assert_eq!(merged.events.len(), 3);
    }

    #[test]
    fn conflicting_events_are_rejected() {
        let a = fixtures::mixed();
        let mut b = fixtures::mixed();
        b.events[0].year = 2001;
        assert!(matches!(merge_corpora(&[a, b]), Err(Error::EventConflict(id)) if id == "e1"));
    }
}
