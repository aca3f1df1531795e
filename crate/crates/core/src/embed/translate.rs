use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{LazyLock, Mutex};

use regex::Regex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Machine translation between language codes.
pub trait Translator: Send + Sync {
    fn translate(&self, text: &str, source: &str, target: &str) -> Result<String>;
}

static WORD: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[\p{L}\p{N}]+").unwrap());

/// Word-by-word dictionary lookup; unknown words pass through unchanged.
/// Deterministic, for tests and offline runs.
#[derive(Debug, Clone, Default)]
pub struct DictionaryTranslator {
    dict: HashMap<(String, String), HashMap<String, String>>,
}

#[derive(Deserialize)]
struct DictRow {
    source: String,
    target: String,
    word: String,
    translation: String,
}

impl DictionaryTranslator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, source: &str, target: &str, word: &str, translation: &str) {
        self.dict
            .entry((source.to_string(), target.to_string()))
            .or_default()
            .insert(word.to_lowercase(), translation.to_string());
    }

    /// Reads a `source,target,word,translation` table.
    pub fn load(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
        let mut t = Self::new();
        for row in r.deserialize::<DictRow>() {
            let row = row?;
            t.add(&row.source, &row.target, &row.word, &row.translation);
        }
        Ok(t)
    }
}

impl Translator for DictionaryTranslator {
    fn translate(&self, text: &str, source: &str, target: &str) -> Result<String> {
        if source == target {
            return Ok(text.to_string());
        }
        let Some(dict) = self.dict.get(&(source.to_string(), target.to_string())) else {
            return Ok(text.to_string());
        };
        Ok(WORD
            .replace_all(text, |c: &regex::Captures| {
                let w = &c[0];
                dict.get(&w.to_lowercase()).cloned().unwrap_or_else(|| w.to_string())
            })
            .into_owned())
    }
}

pub fn text_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CacheRecord {
    text_hash: String,
    source: String,
    target: String,
    translation: String,
}

type CacheKey = (String, String, String);

struct CacheState {
    map: HashMap<CacheKey, String>,
    file: Option<File>,
}

/// Persistent translation cache in front of an optional live client.
/// Entries are appended as `{text_hash, source, target, translation}` lines;
/// writes are serialized so the wrapper can be shared across threads.
pub struct CachedTranslator {
    inner: Option<Box<dyn Translator>>,
    path: PathBuf,
    state: Mutex<CacheState>,
}

impl CachedTranslator {
    /// Opens (or starts) the cache at `path`. Without `inner`, misses are
    /// errors.
    pub fn open(path: &Path, inner: Option<Box<dyn Translator>>) -> Result<Self> {
        let mut map = HashMap::new();
        if path.exists() {
            let file = File::open(path).map_err(|e| Error::io(path, e))?;
            for (i, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|e| Error::io(path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let rec: CacheRecord = serde_json::from_str(&line).map_err(|e| Error::Malformed {
                    path: path.to_path_buf(),
                    line: i + 1,
                    field: "record".into(),
                    reason: e.to_string(),
                })?;
                // first response wins
                map.entry((rec.text_hash, rec.source, rec.target))
                    .or_insert(rec.translation);
            }
        }
        Ok(CachedTranslator {
            inner,
            path: path.to_path_buf(),
            state: Mutex::new(CacheState { map, file: None }),
        })
    }

    pub fn len(&self) -> usize {
        self.state.lock().expect("cache lock").map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, text: &str, source: &str, target: &str) -> Option<String> {
        let key = (text_hash(text), source.to_string(), target.to_string());
        self.state.lock().expect("cache lock").map.get(&key).cloned()
    }
}

impl Translator for CachedTranslator {
    fn translate(&self, text: &str, source: &str, target: &str) -> Result<String> {
        if source == target {
            return Ok(text.to_string());
        }
        let key = (text_hash(text), source.to_string(), target.to_string());
        let mut state = self.state.lock().expect("cache lock");
        if let Some(hit) = state.map.get(&key) {
            return Ok(hit.clone());
        }
        let inner = self.inner.as_ref().ok_or_else(|| {
            Error::Translation(format!("no cached translation for {source}->{target} text {}", key.0))
        })?;
        let translation = inner.translate(text, source, target)?;
        if state.file.is_none() {
            let f = OpenOptions::new()
                .create(true)
                .append(true)
                .open(&self.path)
                .map_err(|e| Error::io(&self.path, e))?;
            state.file = Some(f);
        }
        let rec = CacheRecord {
            text_hash: key.0.clone(),
            source: key.1.clone(),
            target: key.2.clone(),
            translation: translation.clone(),
        };
        let mut line = serde_json::to_string(&rec)?;
        line.push('\n');
        let file = state.file.as_mut().expect("opened above");
        file.write_all(line.as_bytes())
            .and_then(|_| file.flush())
            .map_err(|e| Error::io(&self.path, e))?;
        state.map.insert(key, translation.clone());
        Ok(translation)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dict() -> DictionaryTranslator {
        let mut d = DictionaryTranslator::new();
        d.add("es", "en", "terremoto", "earthquake");
        d.add("es", "en", "ayuda", "help");
        d
    }

    #[test]
    fn dictionary_translates_known_words() {
        let d = dict();
        assert_eq!(d.translate("¡Terremoto! ayuda ya", "es", "en").unwrap(), "¡earthquake! help ya");
        assert_eq!(d.translate("terremoto", "es", "es").unwrap(), "terremoto");
    }

    #[test]
    fn cache_persists_and_serves_first_response() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("tr.jsonl");
        let c = CachedTranslator::open(&p, Some(Box::new(dict()))).unwrap();
        let first = c.translate("terremoto", "es", "en").unwrap();
        assert_eq!(first, "earthquake");
        drop(c);

        // reopened without a live client: served from the file
        let c = CachedTranslator::open(&p, None).unwrap();
        assert_eq!(c.translate("terremoto", "es", "en").unwrap(), first);
        assert!(matches!(c.translate("ayuda", "es", "en"), Err(Error::Translation(_))));
        assert_eq!(c.translate("x", "it", "it").unwrap(), "x");
    }
}
