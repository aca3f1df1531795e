//! Crisis taxonomy records and event annotation.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Event, GeographicSpread, HazardCategory, TemporalDevelopment};
use crate::error::{Error, Result};

pub const DEFAULT_HAZARD_SCHEME_CSV: &str = include_str!("../../data/hazard_scheme.csv");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaxonomyRecord {
    pub event_id: String,
    #[serde(default)]
    pub name: Option<String>,
    pub hazard_type: String,
    pub hazard_category: HazardCategory,
    pub hazard_subcategory: String,
    pub temporal_development: TemporalDevelopment,
    pub geographic_spread: GeographicSpread,
    pub country: String,
    pub year: i32,
}

impl TaxonomyRecord {
    fn to_event(&self, fallback_name: Option<&str>) -> Event {
        Event {
            id: self.event_id.clone(),
            name: self
                .name
                .clone()
                .or_else(|| fallback_name.map(str::to_string))
                .unwrap_or_else(|| self.event_id.clone()),
            hazard_type: self.hazard_type.clone(),
            hazard_category: self.hazard_category,
            hazard_subcategory: self.hazard_subcategory.clone(),
            temporal_development: self.temporal_development,
            geographic_spread: self.geographic_spread,
            country: self.country.clone(),
            year: self.year,
        }
    }
}

/// Default dimensions per hazard type.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HazardProfile {
    pub hazard_type: String,
    pub hazard_category: HazardCategory,
    pub hazard_subcategory: String,
    pub temporal_development: TemporalDevelopment,
    pub geographic_spread: GeographicSpread,
}

#[derive(Debug, Clone)]
pub struct HazardScheme {
    profiles: HashMap<String, HazardProfile>,
}

impl HazardScheme {
    pub fn shipped() -> Self {
        let mut r = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(DEFAULT_HAZARD_SCHEME_CSV.as_bytes());
        let profiles = r
            .deserialize::<HazardProfile>()
            .map(|p| {
                let p = p.expect("bundled hazard scheme parses");
                (p.hazard_type.clone(), p)
            })
            .collect();
        HazardScheme { profiles }
    }

    pub fn get(&self, hazard_type: &str) -> Option<&HazardProfile> {
        self.profiles.get(hazard_type)
    }

    /// Builds a full record for an event from its hazard type.
    pub fn record(
        &self,
        event_id: &str,
        name: &str,
        hazard_type: &str,
        country: &str,
        year: i32,
    ) -> Option<TaxonomyRecord> {
        let p = self.get(hazard_type)?;
        Some(TaxonomyRecord {
            event_id: event_id.to_string(),
            name: Some(name.to_string()),
            hazard_type: p.hazard_type.clone(),
            hazard_category: p.hazard_category,
            hazard_subcategory: p.hazard_subcategory.clone(),
            temporal_development: p.temporal_development,
            geographic_spread: p.geographic_spread,
            country: country.to_string(),
            year,
        })
    }
}

pub fn load_taxonomy(path: &Path) -> Result<Vec<TaxonomyRecord>> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::from(e).context(path.display().to_string()))?;
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for row in r.deserialize::<TaxonomyRecord>() {
        let row = row.map_err(|e| Error::from(e).context(path.display().to_string()))?;
        if !seen.insert(row.event_id.clone()) {
            return Err(Error::InvalidMapping(format!(
                "taxonomy has more than one record for event `{}`",
                row.event_id
            )));
        }
        out.push(row);
    }
    Ok(out)
}

/// Populates event fields from the taxonomy. Events referenced by messages
/// but absent from the event table are created; every event needs a record.
pub fn annotate_events(corpus: &Corpus, taxonomy: &[TaxonomyRecord]) -> Result<Corpus> {
    let by_id: HashMap<&str, &TaxonomyRecord> =
        taxonomy.iter().map(|r| (r.event_id.as_str(), r)).collect();

    let mut order: Vec<&str> = Vec::new();
    let mut seen = HashSet::new();
    let names: HashMap<&str, &str> = corpus
        .events
        .iter()
        .map(|e| (e.id.as_str(), e.name.as_str()))
        .collect();
    let referenced = corpus
        .events
        .iter()
        .map(|e| e.id.as_str())
        .chain(corpus.messages.iter().map(|m| m.event_id.as_str()));
    for id in referenced {
        if seen.insert(id) {
            order.push(id);
        }
    }

    let events = order
        .into_iter()
        .map(|id| {
            by_id
                .get(id)
                .map(|r| r.to_event(names.get(id).copied()))
                .ok_or_else(|| Error::MissingTaxonomy(id.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Corpus {
        messages: corpus.messages.clone(),
        events,
        provenance: corpus.provenance.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures;
    use crate::corpus::LabelClass;

    #[test]
    fn earthquake_is_natural_and_instantaneous() {
        let r = HazardScheme::shipped()
            .record("ecuador-2016", "Ecuador earthquake", "earthquake", "Ecuador", 2016)
            .unwrap();
        assert_eq!(r.hazard_category, HazardCategory::Natural);
        assert_eq!(r.temporal_development, TemporalDevelopment::Instantaneous);
        assert_eq!(r.hazard_subcategory, "geophysical");
    }

    #[test]
    fn explosion_is_human_induced() {
        let r = HazardScheme::shipped()
            .record("westtexas", "West Texas explosion", "explosion", "USA", 2013)
            .unwrap();
        assert_eq!(r.hazard_category, HazardCategory::HumanInduced);
    }

    #[test]
    fn empty_corpus_and_taxonomy() {
        let out = annotate_events(&Corpus::default(), &[]).unwrap();
        assert!(out.is_empty() && out.events.is_empty());
    }

    #[test]
    fn missing_record_names_the_event() {
        let c = fixtures::mixed();
        let scheme = HazardScheme::shipped();
        let tax = vec![
            scheme.record("e1", "one", "earthquake", "Chile", 2014).unwrap(),
            scheme.record("e2", "two", "flood", "Italy", 2014).unwrap(),
        ];
        match annotate_events(&c, &tax) {
            Err(Error::MissingTaxonomy(id)) => assert_eq!(id, "e3"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn annotation_creates_referenced_events_and_keeps_messages() {
        let mut c = fixtures::mixed();
        c.events.clear();
        c.messages.push(fixtures::message("7", "en", "e9", LabelClass::Related));
        let scheme = HazardScheme::shipped();
        let tax: Vec<_> = [("e1", "earthquake"), ("e2", "flood"), ("e3", "explosion"), ("e9", "flood")]
            .iter()
            .map(|(id, h)| scheme.record(id, id, h, "X", 2015).unwrap())
            .collect();
        let out = annotate_events(&c, &tax).unwrap();
        assert_eq!(out.messages, c.messages);
        let ids: Vec<_> = out.events.iter().map(|e| e.id.as_str()).collect();
        assert_eq!(ids, ["e1", "e2", "e3", "e9"]);
        assert_eq!(out.events[2].hazard_category, HazardCategory::HumanInduced);
    }
}
