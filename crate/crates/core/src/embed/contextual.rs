use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Transformer output for one message: already pooled, or one row per
/// (sub)token including padding rows of zeros.
#[derive(Debug, Clone, PartialEq)]
pub enum CacheEntry {
    Pooled(Vec<f32>),
    TokenMatrix(Vec<Vec<f32>>),
}

/// Precomputed contextual embeddings for one model, keyed by message id.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextualCache {
    pub model_name: String,
    pub dims: usize,
    pub entries: HashMap<String, CacheEntry>,
}

#[derive(Serialize, Deserialize)]
struct CacheRecord {
    id: String,
    model_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vector: Option<Vec<f32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    token_matrix: Option<Vec<Vec<f32>>>,
}

impl ContextualCache {
    pub fn new(model_name: impl Into<String>, dims: usize) -> Self {
        ContextualCache {
            model_name: model_name.into(),
            dims,
            entries: HashMap::new(),
        }
    }

    pub fn insert(&mut self, id: impl Into<String>, entry: CacheEntry) -> Result<()> {
        let bad = match &entry {
            CacheEntry::Pooled(v) => (v.len() != self.dims).then_some(v.len()),
            CacheEntry::TokenMatrix(rows) => rows.iter().map(Vec::len).find(|l| *l != self.dims),
        };
        if let Some(found) = bad {
            return Err(Error::WidthMismatch {
                expected: self.dims,
                found,
            });
        }
        self.entries.insert(id.into(), entry);
        Ok(())
    }

    /// Reads line-delimited `{id, model_name, vector | token_matrix}`
    /// records. Every record must name the same model and have `dims`
    /// columns.
    pub fn load(path: &Path, dims: usize) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut cache: Option<ContextualCache> = None;
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let lineno = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let malformed = |field: &str, reason: String| Error::Malformed {
                path: path.to_path_buf(),
                line: lineno,
                field: field.to_string(),
                reason,
            };
            let rec: CacheRecord =
                serde_json::from_str(&line).map_err(|e| malformed("record", e.to_string()))?;
            let cache = cache.get_or_insert_with(|| ContextualCache::new(&rec.model_name, dims));
            if rec.model_name != cache.model_name {
                return Err(malformed(
                    "model_name",
                    format!("expected `{}`, found `{}`", cache.model_name, rec.model_name),
                ));
            }
            let entry = match (rec.vector, rec.token_matrix) {
                (Some(v), None) => CacheEntry::Pooled(v),
                (None, Some(m)) => CacheEntry::TokenMatrix(m),
                _ => return Err(malformed("vector", "exactly one of vector or token_matrix is required".into())),
            };
            cache.insert(rec.id, entry).map_err(|e| match e {
                Error::WidthMismatch { expected, found } => Error::DimensionMismatch {
                    path: path.to_path_buf(),
                    line: lineno,
                    expected,
                    found,
                },
                other => other,
            })?;
        }
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("cache");
        Ok(cache.unwrap_or_else(|| ContextualCache::new(stem, dims)))
    }

    /// Writes records sorted by id so the file is reproducible.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut ids: Vec<&String> = self.entries.keys().collect();
        ids.sort();
        let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(|e| Error::io(path, e))?);
        for id in ids {
            let (vector, token_matrix) = match &self.entries[id] {
                CacheEntry::Pooled(v) => (Some(v.clone()), None),
                CacheEntry::TokenMatrix(m) => (None, Some(m.clone())),
            };
            let rec = CacheRecord {
                id: id.clone(),
                model_name: self.model_name.clone(),
                vector,
                token_matrix,
            };
            serde_json::to_writer(&mut out, &rec)?;
            out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    }

    pub fn pool(&self, id: &str) -> Result<Vec<f64>> {
        self.entries
            .get(id)
            .map(|e| pool_contextual(e, self.dims))
            .ok_or_else(|| Error::MissingCacheEntry {
                id: id.to_string(),
                model_name: self.model_name.clone(),
            })
    }
}

/// Mean over the non-zero rows of a token matrix; pooled vectors pass
/// through unchanged.
pub fn pool_contextual(entry: &CacheEntry, dims: usize) -> Vec<f64> {
    match entry {
        CacheEntry::Pooled(v) => v.iter().map(|x| f64::from(*x)).collect(),
        CacheEntry::TokenMatrix(rows) => {
            let mut sum = vec![0.0f64; dims];
            let mut n = 0usize;
            for row in rows.iter().filter(|r| r.iter().any(|x| *x != 0.0)) {
                for (s, x) in sum.iter_mut().zip(row) {
                    *s += f64::from(*x);
                }
                n += 1;
            }
            if n > 0 {
                sum.iter_mut().for_each(|s| *s /= n as f64);
            }
            sum
        }
    }
}
