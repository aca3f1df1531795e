use std::collections::HashMap;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lingfeat::TokenSequence;

/// Static word vectors. Stored as `f32`; all arithmetic is done in `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorTable {
    pub name: String,
    pub dims: usize,
    pub entries: HashMap<String, Vec<f32>>,
    /// Non-fatal load issues such as duplicate tokens.
    pub warnings: Vec<String>,
}

impl VectorTable {
    pub fn new(name: impl Into<String>, dims: usize) -> Self {
        VectorTable {
            name: name.into(),
            dims,
            entries: HashMap::new(),
            warnings: Vec::new(),
        }
    }

    /// Adds a vector unless the token is already present. Returns whether
    /// it was inserted.
    pub fn insert(&mut self, token: impl Into<String>, vector: Vec<f32>) -> Result<bool> {
        if vector.len() != self.dims {
            return Err(Error::WidthMismatch {
                expected: self.dims,
                found: vector.len(),
            });
        }
        let token = token.into();
        if self.entries.contains_key(&token) {
            return Ok(false);
        }
        self.entries.insert(token, vector);
        Ok(true)
    }

    pub fn get(&self, token: &str) -> Option<&[f32]> {
        self.entries.get(token).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Reads a whitespace-delimited `token v1 .. vD` file with an optional
/// `N D` header line. Duplicate tokens keep the first vector.
pub fn load_word_vectors(path: &Path, expected_dims: usize) -> Result<VectorTable> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("vectors")
        .to_string();
    let mut table = VectorTable::new(name, expected_dims);
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let lineno = i + 1;
        let mut fields = line.split_whitespace();
        let Some(token) = fields.next() else { continue };
        let values: Vec<&str> = fields.collect();
        if lineno == 1 && values.len() == 1 {
            if let (Ok(_), Ok(d)) = (token.parse::<usize>(), values[0].parse::<usize>()) {
                if d != expected_dims {
                    return Err(Error::DimensionMismatch {
                        path: path.to_path_buf(),
                        line: lineno,
                        expected: expected_dims,
                        found: d,
                    });
                }
                continue;
            }
        }
        if values.len() != expected_dims {
            return Err(Error::DimensionMismatch {
                path: path.to_path_buf(),
                line: lineno,
                expected: expected_dims,
                found: values.len(),
            });
        }
        let vector = values
            .iter()
            .map(|v| v.parse::<f32>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Malformed {
                path: path.to_path_buf(),
                line: lineno,
                field: token.to_string(),
                reason: e.to_string(),
            })?;
        if !table.insert(token, vector)? {
            table
                .warnings
                .push(format!("{}:{lineno}: duplicate token `{token}` ignored", path.display()));
        }
    }
    for w in &table.warnings {
        log::warn!("{w}");
    }
    Ok(table)
}

/// Treatment of tokens missing from the table.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OovPolicy {
    /// OOV tokens contribute a zero vector and count in the denominator.
    #[default]
    Zero,
    /// OOV tokens are left out of the mean entirely.
    Skip,
}

/// Mean of the token vectors, OOV tokens counting as zeros.
pub fn embed_mean(tokens: &TokenSequence, table: &VectorTable) -> Vec<f64> {
    embed_mean_with(tokens, table, OovPolicy::Zero)
}

pub fn embed_mean_with(tokens: &TokenSequence, table: &VectorTable, oov: OovPolicy) -> Vec<f64> {
    let mut sum = vec![0.0f64; table.dims];
    let mut n = 0usize;
    for t in &tokens.tokens {
        match table.get(t) {
            Some(v) => {
                for (s, x) in sum.iter_mut().zip(v) {
                    *s += f64::from(*x);
                }
                n += 1;
            }
            None if oov == OovPolicy::Zero => n += 1,
            None => {}
        }
    }
    if n > 0 {
        let n = n as f64;
        sum.iter_mut().for_each(|s| *s /= n);
    }
    sum
}
