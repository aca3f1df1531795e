//! Canonical data model for labeled crisis messages and the events they belong
//! to, plus reading and writing of the unified corpus format.
//!
//! A corpus lives in two files: the message table (`corpus.jsonl` or
//! `corpus.csv`) and an event table next to it (`corpus.events.jsonl` or
//! `corpus.events.csv`).

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelClass {
    Related,
    NotRelated,
}

impl LabelClass {
    pub fn as_str(self) -> &'static str {
        match self {
            LabelClass::Related => "related",
            LabelClass::NotRelated => "not_related",
        }
    }

    pub fn is_related(self) -> bool {
        self == LabelClass::Related
    }
}

impl fmt::Display for LabelClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LabelClass {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "related" => Ok(LabelClass::Related),
            "not_related" => Ok(LabelClass::NotRelated),
            other => Err(format!("expected \"related\" or \"not_related\", got {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub id: String,
    pub text: String,
    #[serde(default)]
    pub translated_text: Option<String>,
    pub language: String,
    pub event_id: String,
    pub label: LabelClass,
    pub source_dataset: String,
    pub original_label: String,
    #[serde(default)]
    pub has_location_meta: bool,
    #[serde(default)]
    pub has_media_meta: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HazardCategory {
    Natural,
    HumanInduced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemporalDevelopment {
    Instantaneous,
    Progressive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeographicSpread {
    Focalized,
    Diffused,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub id: String,
    pub name: String,
    pub hazard_type: String,
    pub hazard_category: HazardCategory,
    pub hazard_subcategory: String,
    pub temporal_development: TemporalDevelopment,
    pub geographic_spread: GeographicSpread,
    pub country: String,
    pub year: i32,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    pub messages: Vec<Message>,
    pub events: Vec<Event>,
    pub provenance: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    UnifiedJsonLines,
    DelimitedTable,
}

impl CorpusFormat {
    /// Guesses the format from the file extension; `.csv`/`.tsv` are delimited.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") | Some("tsv") => CorpusFormat::DelimitedTable,
            _ => CorpusFormat::UnifiedJsonLines,
        }
    }

    fn delimiter(path: &Path) -> u8 {
        if path.extension().and_then(|e| e.to_str()) == Some("tsv") {
            b'\t'
        } else {
            b','
        }
    }
}

/// Path of the event table that accompanies a message table.
pub fn events_path(messages_path: &Path) -> PathBuf {
    let stem = messages_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ext = messages_path
        .extension()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "jsonl".to_string());
    messages_path.with_file_name(format!("{stem}.events.{ext}"))
}

/// ISO 639-1 two-letter codes.
const ISO_639_1: &[&str] = &[
    "aa", "ab", "ae", "af", "ak", "am", "an", "ar", "as", "av", "ay", "az", "ba", "be", "bg", "bh",
    "bi", "bm", "bn", "bo", "br", "bs", "ca", "ce", "ch", "co", "cr", "cs", "cu", "cv", "cy", "da",
    "de", "dv", "dz", "ee", "el", "en", "eo", "es", "et", "eu", "fa", "ff", "fi", "fj", "fo", "fr",
    "fy", "ga", "gd", "gl", "gn", "gu", "gv", "ha", "he", "hi", "ho", "hr", "ht", "hu", "hy", "hz",
    "ia", "id", "ie", "ig", "ii", "ik", "io", "is", "it", "iu", "ja", "jv", "ka", "kg", "ki", "kj",
    "kk", "kl", "km", "kn", "ko", "kr", "ks", "ku", "kv", "kw", "ky", "la", "lb", "lg", "li", "ln",
    "lo", "lt", "lu", "lv", "mg", "mh", "mi", "mk", "ml", "mn", "mr", "ms", "mt", "my", "na", "nb",
    "nd", "ne", "ng", "nl", "nn", "no", "nr", "nv", "ny", "oc", "oj", "om", "or", "os", "pa", "pi",
    "pl", "ps", "pt", "qu", "rm", "rn", "ro", "ru", "rw", "sa", "sc", "sd", "se", "sg", "si", "sk",
    "sl", "sm", "sn", "so", "sq", "sr", "ss", "st", "su", "sv", "sw", "ta", "te", "tg", "th", "ti",
    "tk", "tl", "tn", "to", "tr", "ts", "tt", "tw", "ty", "ug", "uk", "ur", "uz", "ve", "vi", "vo",
    "wa", "wo", "xh", "yi", "yo", "za", "zh", "zu",
];

pub fn is_language_code(code: &str) -> bool {
    ISO_639_1.binary_search(&code).is_ok()
}

impl Corpus {
    pub fn new(messages: Vec<Message>, events: Vec<Event>, provenance: Vec<String>) -> Self {
        Corpus {
            messages,
            events,
            provenance,
        }
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    pub fn event_map(&self) -> HashMap<&str, &Event> {
        self.events.iter().map(|e| (e.id.as_str(), e)).collect()
    }

    pub fn message_index(&self) -> HashMap<&str, &Message> {
        self.messages.iter().map(|m| (m.id.as_str(), m)).collect()
    }

    pub fn class_counts(&self) -> (usize, usize) {
        let related = self.messages.iter().filter(|m| m.label.is_related()).count();
        (related, self.messages.len() - related)
    }

    /// SHA-256 over the canonical JSON-lines rendering of messages and events.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        for m in &self.messages {
            hasher.update(serde_json::to_vec(m).expect("message serializes"));
            hasher.update(b"\n");
        }
        hasher.update(b"--events--\n");
        for e in &self.events {
            hasher.update(serde_json::to_vec(e).expect("event serializes"));
            hasher.update(b"\n");
        }
        hex::encode(hasher.finalize())
    }
}

/// Loads a corpus. The event table is read from [`events_path`]; a missing
/// event table is treated as empty.
pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<Corpus> {
    let ev_path = events_path(path);
    let events = if ev_path.exists() {
        match format {
            CorpusFormat::UnifiedJsonLines => read_json_lines::<Event>(&ev_path, parse_event)?,
            CorpusFormat::DelimitedTable => read_event_table(&ev_path)?,
        }
    } else {
        Vec::new()
    };
    let messages = match format {
        CorpusFormat::UnifiedJsonLines => read_json_lines::<Message>(path, parse_message)?,
        CorpusFormat::DelimitedTable => read_message_table(path)?,
    };

    let mut seen: HashMap<(String, String), usize> = HashMap::new();
    for (line, m) in &messages {
        let key = (m.source_dataset.clone(), m.id.clone());
        if let Some(first) = seen.insert(key, *line) {
            return Err(Error::DuplicateMessage {
                source_dataset: m.source_dataset.clone(),
                id: m.id.clone(),
                first_line: first,
                second_line: *line,
            });
        }
    }

    let mut event_ids = HashSet::new();
    for (line, e) in &events {
        if !event_ids.insert(e.id.clone()) {
            return Err(Error::Malformed {
                path: ev_path.clone(),
                line: *line,
                field: "id".into(),
                reason: format!("duplicate event id `{}`", e.id),
            });
        }
    }
    for (_, m) in &messages {
        if !event_ids.contains(&m.event_id) {
            return Err(Error::DanglingEvent {
                message_id: m.id.clone(),
                event_id: m.event_id.clone(),
            });
        }
    }

    let messages: Vec<Message> = messages.into_iter().map(|(_, m)| m).collect();
    let mut provenance: Vec<String> = Vec::new();
    for m in &messages {
        if !provenance.contains(&m.source_dataset) {
            provenance.push(m.source_dataset.clone());
        }
    }
    Ok(Corpus {
        messages,
        events: events.into_iter().map(|(_, e)| e).collect(),
        provenance,
    })
}

/// Writes the message table to `path` and the event table to [`events_path`].
pub fn save_corpus(corpus: &Corpus, path: &Path, format: CorpusFormat) -> Result<()> {
    let ev_path = events_path(path);
    match format {
        CorpusFormat::UnifiedJsonLines => {
            write_json_lines(path, &corpus.messages)?;
            write_json_lines(&ev_path, &corpus.events)?;
        }
        CorpusFormat::DelimitedTable => {
            let mut w = csv::WriterBuilder::new()
                .delimiter(CorpusFormat::delimiter(path))
                .from_path(path)
                .map_err(|e| csv_io(path, e))?;
            w.write_record(MESSAGE_FIELDS)?;
            for m in &corpus.messages {
                w.write_record([
                    m.id.as_str(),
                    m.text.as_str(),
                    m.translated_text.as_deref().unwrap_or(""),
                    m.language.as_str(),
                    m.event_id.as_str(),
                    m.label.as_str(),
                    m.source_dataset.as_str(),
                    m.original_label.as_str(),
                    bool_str(m.has_location_meta),
                    bool_str(m.has_media_meta),
                ])?;
            }
            w.flush().map_err(|e| Error::io(path, e))?;

            let mut w = csv::WriterBuilder::new()
                .delimiter(CorpusFormat::delimiter(path))
                .from_path(&ev_path)
                .map_err(|e| csv_io(&ev_path, e))?;
            w.write_record(EVENT_FIELDS)?;
            for e in &corpus.events {
                w.write_record([
                    e.id.clone(),
                    e.name.clone(),
                    e.hazard_type.clone(),
                    enum_str(&e.hazard_category),
                    e.hazard_subcategory.clone(),
                    enum_str(&e.temporal_development),
                    enum_str(&e.geographic_spread),
                    e.country.clone(),
                    e.year.to_string(),
                ])?;
            }
            w.flush().map_err(|e| Error::io(&ev_path, e))?;
        }
    }
    Ok(())
}

pub const MESSAGE_FIELDS: [&str; 10] = [
    "id",
    "text",
    "translated_text",
    "language",
    "event_id",
    "label",
    "source_dataset",
    "original_label",
    "has_location_meta",
    "has_media_meta",
];

pub const EVENT_FIELDS: [&str; 9] = [
    "id",
    "name",
    "hazard_type",
    "hazard_category",
    "hazard_subcategory",
    "temporal_development",
    "geographic_spread",
    "country",
    "year",
];

fn bool_str(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

fn enum_str<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(Value::String(s)) => s,
        _ => unreachable!("unit enums serialize to strings"),
    }
}

fn csv_io(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Malformed {
            path: path.to_path_buf(),
            line: 0,
            field: "<file>".into(),
            reason: format!("{other:?}"),
        },
    }
}

pub(crate) fn write_json_lines<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for row in rows {
        serde_json::to_writer(&mut w, row)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

type FieldError = (String, String);

fn read_json_lines<T>(
    path: &Path,
    parse: fn(&serde_json::Map<String, Value>) -> std::result::Result<T, FieldError>,
) -> Result<Vec<(usize, T)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |field: &str, reason: String| Error::Malformed {
            path: path.to_path_buf(),
            line: line_no,
            field: field.to_string(),
            reason,
        };
        let value: Value =
            serde_json::from_str(&line).map_err(|e| malformed("<record>", e.to_string()))?;
        let Value::Object(obj) = value else {
            return Err(malformed("<record>", "expected a JSON object".into()));
        };
        let row = parse(&obj).map_err(|(field, reason)| malformed(&field, reason))?;
        out.push((line_no, row));
    }
    Ok(out)
}

fn req_str(obj: &serde_json::Map<String, Value>, field: &str) -> std::result::Result<String, FieldError> {
    match obj.get(field) {
        Some(Value::String(s)) => Ok(s.clone()),
        Some(_) => Err((field.into(), "expected a string".into())),
        None => Err((field.into(), "missing".into())),
    }
}

fn opt_str(obj: &serde_json::Map<String, Value>, field: &str) -> std::result::Result<Option<String>, FieldError> {
    match obj.get(field) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(_) => Err((field.into(), "expected a string or null".into())),
    }
}

fn opt_bool(obj: &serde_json::Map<String, Value>, field: &str) -> std::result::Result<bool, FieldError> {
    match obj.get(field) {
        None | Some(Value::Null) => Ok(false),
        Some(Value::Bool(b)) => Ok(*b),
        Some(_) => Err((field.into(), "expected a boolean".into())),
    }
}

fn parse_enum<T: for<'de> Deserialize<'de>>(field: &str, raw: &str) -> std::result::Result<T, FieldError> {
    serde_json::from_value(Value::String(raw.to_string()))
        .map_err(|_| (field.to_string(), format!("unexpected value {raw:?}")))
}

fn non_empty(field: &str, s: String) -> std::result::Result<String, FieldError> {
    if s.trim().is_empty() {
        Err((field.into(), "must not be empty".into()))
    } else {
        Ok(s)
    }
}

fn parse_message(obj: &serde_json::Map<String, Value>) -> std::result::Result<Message, FieldError> {
    let label_raw = req_str(obj, "label")?;
    let label = label_raw
        .parse::<LabelClass>()
        .map_err(|reason| ("label".to_string(), reason))?;
    Ok(Message {
        id: non_empty("id", req_str(obj, "id")?)?,
        text: req_str(obj, "text")?,
        translated_text: opt_str(obj, "translated_text")?,
        language: req_str(obj, "language")?,
        event_id: non_empty("event_id", req_str(obj, "event_id")?)?,
        label,
        source_dataset: non_empty("source_dataset", req_str(obj, "source_dataset")?)?,
        original_label: req_str(obj, "original_label")?,
        has_location_meta: opt_bool(obj, "has_location_meta")?,
        has_media_meta: opt_bool(obj, "has_media_meta")?,
    })
}

fn parse_event(obj: &serde_json::Map<String, Value>) -> std::result::Result<Event, FieldError> {
    let year = match obj.get("year") {
        Some(Value::Number(n)) => n
            .as_i64()
            .and_then(|y| i32::try_from(y).ok())
            .ok_or_else(|| ("year".to_string(), "expected an integer".to_string()))?,
        Some(_) => return Err(("year".into(), "expected an integer".into())),
        None => return Err(("year".into(), "missing".into())),
    };
    Ok(Event {
        id: non_empty("id", req_str(obj, "id")?)?,
        name: req_str(obj, "name")?,
        hazard_type: req_str(obj, "hazard_type")?,
        hazard_category: parse_enum("hazard_category", &req_str(obj, "hazard_category")?)?,
        hazard_subcategory: req_str(obj, "hazard_subcategory")?,
        temporal_development: parse_enum(
            "temporal_development",
            &req_str(obj, "temporal_development")?,
        )?,
        geographic_spread: parse_enum("geographic_spread", &req_str(obj, "geographic_spread")?)?,
        country: req_str(obj, "country")?,
        year,
    })
}

/// Reads a delimited table into JSON objects keyed by header, so that the
/// same field-level parsers serve both formats. Empty cells become absent.
fn read_table_as_objects(
    path: &Path,
    bool_fields: &[&str],
    int_fields: &[&str],
) -> Result<Vec<(usize, serde_json::Map<String, Value>)>> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(CorpusFormat::delimiter(path))
        .flexible(false)
        .from_path(path)
        .map_err(|e| csv_io(path, e))?;
    let headers = reader.headers()?.clone();
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            Error::Malformed {
                path: path.to_path_buf(),
                line,
                field: "<record>".into(),
                reason: e.to_string(),
            }
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let mut obj = serde_json::Map::new();
        for (name, cell) in headers.iter().zip(record.iter()) {
            if cell.is_empty() && name != "text" && name != "original_label" {
                continue;
            }
            let value = if bool_fields.contains(&name) {
                match cell.to_ascii_lowercase().as_str() {
                    "true" | "1" | "yes" => Value::Bool(true),
                    "false" | "0" | "no" => Value::Bool(false),
                    _ => {
                        return Err(Error::Malformed {
                            path: path.to_path_buf(),
                            line,
                            field: name.to_string(),
                            reason: format!("expected a boolean, got {cell:?}"),
                        })
                    }
                }
            } else if int_fields.contains(&name) {
                let n: i64 = cell.trim().parse().map_err(|_| Error::Malformed {
                    path: path.to_path_buf(),
                    line,
                    field: name.to_string(),
                    reason: format!("expected an integer, got {cell:?}"),
                })?;
                Value::from(n)
            } else {
                Value::String(cell.to_string())
            };
            obj.insert(name.to_string(), value);
        }
        out.push((line, obj));
    }
    Ok(out)
}

fn read_message_table(path: &Path) -> Result<Vec<(usize, Message)>> {
    read_table_as_objects(path, &["has_location_meta", "has_media_meta"], &[])?
        .into_iter()
        .map(|(line, obj)| {
            parse_message(&obj)
                .map(|m| (line, m))
                .map_err(|(field, reason)| Error::Malformed {
                    path: path.to_path_buf(),
                    line,
                    field,
                    reason,
                })
        })
        .collect()
}

fn read_event_table(path: &Path) -> Result<Vec<(usize, Event)>> {
    read_table_as_objects(path, &[], &["year"])?
        .into_iter()
        .map(|(line, obj)| {
            parse_event(&obj)
                .map(|e| (line, e))
                .map_err(|(field, reason)| Error::Malformed {
                    path: path.to_path_buf(),
                    line,
                    field,
                    reason,
                })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    EmptyId,
    DuplicateId,
    EmptyText,
    UnknownLanguage,
    DanglingEvent,
    BadHazardType,
    YearOutOfRange,
    DuplicateEvent,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rule::EmptyId => "id must be non-empty",
            Rule::DuplicateId => "(source_dataset, id) must be unique",
            Rule::EmptyText => "text must be non-empty after trimming",
            Rule::UnknownLanguage => "language must be an ISO 639-1 code",
            Rule::DanglingEvent => "event_id must resolve to a corpus event",
            Rule::BadHazardType => "hazard_type must be a non-empty lowercase token",
            Rule::YearOutOfRange => "year must lie in [1990, 2100]",
            Rule::DuplicateEvent => "event ids must be unique",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Message or event id the violation refers to.
    pub subject: String,
    pub rule: Rule,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.subject, self.rule)
    }
}

pub fn validate_corpus(corpus: &Corpus) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut event_ids = HashSet::new();
    for e in &corpus.events {
        if !event_ids.insert(e.id.as_str()) {
            out.push(Violation { subject: e.id.clone(), rule: Rule::DuplicateEvent });
        }
        let ht = &e.hazard_type;
        if ht.is_empty() || ht.chars().any(|c| c.is_uppercase() || c.is_whitespace()) {
            out.push(Violation { subject: e.id.clone(), rule: Rule::BadHazardType });
        }
        if !(1990..=2100).contains(&e.year) {
            out.push(Violation { subject: e.id.clone(), rule: Rule::YearOutOfRange });
        }
    }
    let mut keys = HashSet::new();
    for m in &corpus.messages {
        let v = |rule| Violation { subject: m.id.clone(), rule };
        if m.id.trim().is_empty() {
            out.push(v(Rule::EmptyId));
        }
        if !keys.insert((m.source_dataset.as_str(), m.id.as_str())) {
            out.push(v(Rule::DuplicateId));
        }
        if m.text.trim().is_empty() {
            out.push(v(Rule::EmptyText));
        }
        if !is_language_code(&m.language) {
            out.push(v(Rule::UnknownLanguage));
        }
        if !event_ids.contains(m.event_id.as_str()) {
            out.push(v(Rule::DanglingEvent));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Attribute {
    Language,
    HazardType,
    EventId,
    SourceDataset,
}

impl FromStr for Attribute {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "language" => Ok(Attribute::Language),
            "hazard_type" => Ok(Attribute::HazardType),
            "event_id" => Ok(Attribute::EventId),
            "source_dataset" => Ok(Attribute::SourceDataset),
            other => Err(Error::UnknownAttribute(other.to_string())),
        }
    }
}

/// Conjunction of clauses; each clause accepts any of its values.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Selection {
    clauses: Vec<(Attribute, BTreeSet<String>)>,
}

impl Selection {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with<I, S>(mut self, attr: Attribute, values: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.clauses
            .push((attr, values.into_iter().map(Into::into).collect()));
        self
    }

    /// Parses `attr=v1,v2;attr2=v3`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut sel = Selection::new();
        for clause in s.split(';').map(str::trim).filter(|c| !c.is_empty()) {
            let (attr, values) = clause
                .split_once('=')
                .ok_or_else(|| Error::UnknownAttribute(clause.to_string()))?;
            let attr: Attribute = attr.parse()?;
            sel = sel.with(
                attr,
                values.split(',').map(str::trim).filter(|v| !v.is_empty()),
            );
        }
        Ok(sel)
    }

    pub fn and(mut self, other: Selection) -> Self {
        self.clauses.extend(other.clauses);
        self
    }

    fn matches(&self, m: &Message, events: &HashMap<&str, &Event>) -> bool {
        self.clauses.iter().all(|(attr, values)| {
            let value = match attr {
                Attribute::Language => m.language.as_str(),
                Attribute::EventId => m.event_id.as_str(),
                Attribute::SourceDataset => m.source_dataset.as_str(),
                Attribute::HazardType => match events.get(m.event_id.as_str()) {
                    Some(e) => e.hazard_type.as_str(),
                    None => return false,
                },
            };
            values.contains(value)
        })
    }
}

/// Keeps matching messages (in order) and the events they reference.
pub fn filter_corpus(corpus: &Corpus, selection: &Selection) -> Corpus {
    let events = corpus.event_map();
    let messages: Vec<Message> = corpus
        .messages
        .iter()
        .filter(|m| selection.matches(m, &events))
        .cloned()
        .collect();
    let used: HashSet<&str> = messages.iter().map(|m| m.event_id.as_str()).collect();
    let events = corpus
        .events
        .iter()
        .filter(|e| used.contains(e.id.as_str()))
        .cloned()
        .collect();
    Corpus {
        messages,
        events,
        provenance: corpus.provenance.clone(),
    }
}
