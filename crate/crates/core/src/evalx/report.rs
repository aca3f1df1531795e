use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{F1Mode, RunMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    /// `summary.csv` (scenario × representation, averaged over targets)
    /// and `cells.csv` (one row per cell, all metrics).
    Delimited,
    /// `report.json` with every run.
    Structured,
    /// `plot_<language>.csv`, one file per target language.
    PlotData,
}

impl ReportFormat {
    pub const ALL: [ReportFormat; 3] = [ReportFormat::Delimited, ReportFormat::Structured, ReportFormat::PlotData];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReportOptions {
    /// Metric shown in the summary grid.
    pub headline: F1Mode,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            headline: F1Mode::Positive,
        }
    }
}

fn num(v: f64) -> String {
    format!("{v:.6}")
}

fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes the report files for `format` into `dir` and returns their
/// paths. Output depends only on the matrix, so identical matrices give
/// byte-identical files.
pub fn emit_report(matrix: &RunMatrix, format: ReportFormat, dir: &Path, options: ReportOptions) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    match format {
        ReportFormat::Delimited => {
            let reps = matrix.representations();
            let mut header = vec!["scenario".to_string()];
            header.extend(reps.iter().map(|r| r.to_string()));
            let rows: Vec<Vec<String>> = matrix
                .kinds()
                .into_iter()
                .map(|k| {
                    let mut row = vec![k.to_string()];
                    row.extend(reps.iter().map(|r| {
                        matrix
                            .scenario_average(k, *r, options.headline)
                            .map(num)
                            .unwrap_or_default()
                    }));
                    row
                })
                .collect();
            let summary = dir.join("summary.csv");
            write_csv(&summary, &header, &rows)?;

            let header: Vec<String> = [
                "scenario",
                "target_language",
                "target_domain",
                "representation",
                "runs",
                "test_size",
                "f1_positive",
                "f1_macro",
                "f1_weighted",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect();
            let rows: Vec<Vec<String>> = matrix
                .cells
                .iter()
                .map(|(k, r)| {
                    vec![
                        k.kind.to_string(),
                        k.target_language.clone(),
                        k.target_domain.clone(),
                        k.representation.to_string(),
                        r.runs.len().to_string(),
                        r.test_size.to_string(),
                        num(r.averaged.f1_positive),
                        num(r.averaged.f1_macro),
                        num(r.averaged.f1_weighted),
                    ]
                })
                .collect();
            let cells = dir.join("cells.csv");
            write_csv(&cells, &header, &rows)?;
            Ok(vec![summary, cells])
        }
        ReportFormat::Structured => {
            #[derive(Serialize)]
            struct Doc<'a> {
                headline: F1Mode,
                cells: Vec<&'a super::EvalReport>,
                skipped: &'a [super::SkippedCell],
            }
            let doc = Doc {
                headline: options.headline,
                cells: matrix.cells.values().collect(),
                skipped: &matrix.skipped,
            };
            let path = dir.join("report.json");
            let mut text = serde_json::to_string_pretty(&doc)?;
            text.push('\n');
            std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
            Ok(vec![path])
        }
        ReportFormat::PlotData => {
            let mut languages: Vec<&str> = matrix.cells.keys().map(|k| k.target_language.as_str()).collect();
            languages.sort_unstable();
            languages.dedup();
            let header: Vec<String> = [
                "target_domain",
                "scenario",
                "representation",
                "f1_positive",
                "f1_macro",
                "f1_weighted",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect();
            let mut paths = Vec::new();
            for lang in languages {
                let mut rows: Vec<Vec<String>> = matrix
                    .cells
                    .iter()
                    .filter(|(k, _)| k.target_language == lang)
                    .map(|(k, r)| {
                        vec![
                            k.target_domain.clone(),
                            k.kind.to_string(),
                            k.representation.to_string(),
                            num(r.averaged.f1_positive),
                            num(r.averaged.f1_macro),
                            num(r.averaged.f1_weighted),
                        ]
                    })
                    .collect();
                // grouped by domain; cell order inside a group is kept
                rows.sort_by(|a, b| a[0].cmp(&b[0]));
                let path = dir.join(format!("plot_{lang}.csv"));
                write_csv(&path, &header, &rows)?;
                paths.push(path);
            }
            Ok(paths)
        }
    }
}
