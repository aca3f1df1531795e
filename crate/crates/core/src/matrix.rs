use std::path::Path;

use crate::error::{Error, Result};

/// Row-aligned numeric matrix with named columns. Row `i` belongs to
/// message `ids[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub columns: Vec<String>,
    pub ids: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    pub fn new(columns: Vec<String>, ids: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if ids.len() != rows.len() {
            return Err(Error::LengthMismatch {
                left: ids.len(),
                right: rows.len(),
            });
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != columns.len()) {
            return Err(Error::WidthMismatch {
                expected: columns.len(),
                found: bad.len(),
            });
        }
        Ok(FeatureMatrix { columns, ids, rows })
    }

    /// Generic column names `{prefix}_0 .. {prefix}_{width-1}`.
    pub fn numbered_columns(prefix: &str, width: usize) -> Vec<String> {
        (0..width).map(|i| format!("{prefix}_{i}")).collect()
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Delimited table with an `id` column followed by the feature columns.
    /// Floats are written in shortest round-trip form.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
        let mut header = vec!["id".to_string()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header)?;
        for (id, row) in self.ids.iter().zip(&self.rows) {
            let mut rec = vec![id.clone()];
            rec.extend(row.iter().map(f64::to_string));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
        let header = r.headers()?.clone();
        let columns: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut ids = Vec::new();
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            ids.push(rec.get(0).unwrap_or_default().to_string());
            let row = rec
                .iter()
                .skip(1)
                .enumerate()
                .map(|(j, v)| {
                    v.parse::<f64>().map_err(|e| Error::Malformed {
                        path: path.to_path_buf(),
                        line: i + 2,
                        field: columns.get(j).cloned().unwrap_or_default(),
                        reason: e.to_string(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        FeatureMatrix::new(columns, ids, rows)
    }

    /// Horizontal concatenation; both sides must list the same ids.
    pub fn hconcat(mut self, other: FeatureMatrix) -> Result<Self> {
        if self.ids != other.ids {
            return Err(Error::LengthMismatch {
                left: self.ids.len(),
                right: other.ids.len(),
            });
        }
        self.columns.extend(other.columns);
        for (a, b) in self.rows.iter_mut().zip(other.rows) {
            a.extend(b);
        }
        Ok(self)
    }
}
