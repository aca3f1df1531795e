//! Metrics, repeated experiment runs and report emission.

mod report;

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use report::{emit_report, ReportFormat, ReportOptions};

use crate::corpus::{Corpus, LabelClass, Message};
use crate::embed::{build_representation, RepresentationId, Resources};
use crate::error::{Error, Result};
use crate::forest::{fit_forest, ForestParams};
use crate::scenario::{build_scenario_with, BuildOptions, LabeledId, ScenarioDataset, ScenarioKind, ScenarioSpec};
use crate::seed::{derive_named, derive_seed};

pub const DEFAULT_REPEATS: usize = 5;

/// Confusion matrix with Related as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

pub fn confusion_counts(predicted: &[LabelClass], actual: &[LabelClass]) -> Result<ConfusionCounts> {
    if predicted.len() != actual.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: actual.len(),
        });
    }
    let mut c = ConfusionCounts::default();
    for (p, a) in predicted.iter().zip(actual) {
        match (p.is_related(), a.is_related()) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum F1Mode {
    Positive,
    Macro,
    Weighted,
}

impl F1Mode {
    pub const ALL: [F1Mode; 3] = [F1Mode::Positive, F1Mode::Macro, F1Mode::Weighted];

    pub fn key(self) -> &'static str {
        match self {
            F1Mode::Positive => "f1_positive",
            F1Mode::Macro => "f1_macro",
            F1Mode::Weighted => "f1_weighted",
        }
    }
}

impl std::str::FromStr for F1Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim().to_lowercase();
        F1Mode::ALL
            .into_iter()
            .find(|m| m.key() == s || m.key().trim_start_matches("f1_") == s)
            .ok_or_else(|| format!("unknown F1 mode `{s}`"))
    }
}

fn f1(tp: u64, fp: u64, fn_: u64) -> f64 {
    let den = 2 * tp + fp + fn_;
    if den == 0 {
        0.0
    } else {
        (2 * tp) as f64 / den as f64
    }
}

/// F1 over the two classes; a zero denominator gives 0.
pub fn f1_score(c: &ConfusionCounts, mode: F1Mode) -> f64 {
    let pos = f1(c.tp, c.fp, c.fn_);
    let neg = f1(c.tn, c.fn_, c.fp);
    match mode {
        F1Mode::Positive => pos,
        F1Mode::Macro => (pos + neg) / 2.0,
        F1Mode::Weighted => {
            let (sp, sn) = ((c.tp + c.fn_) as f64, (c.tn + c.fp) as f64);
            if sp + sn == 0.0 {
                0.0
            } else {
                (pos * sp + neg * sn) / (sp + sn)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub f1_positive: f64,
    pub f1_macro: f64,
    pub f1_weighted: f64,
}

impl Metrics {
    pub fn of(c: &ConfusionCounts) -> Self {
        Metrics {
            f1_positive: f1_score(c, F1Mode::Positive),
            f1_macro: f1_score(c, F1Mode::Macro),
            f1_weighted: f1_score(c, F1Mode::Weighted),
        }
    }

    pub fn get(&self, mode: F1Mode) -> f64 {
        match mode {
            F1Mode::Positive => self.f1_positive,
            F1Mode::Macro => self.f1_macro,
            F1Mode::Weighted => self.f1_weighted,
        }
    }

    /// Arithmetic mean per metric, summed in run order.
    pub fn mean(all: &[Metrics]) -> Self {
        let n = all.len().max(1) as f64;
        let sum = |f: fn(&Metrics) -> f64| all.iter().map(f).sum::<f64>() / n;
        Metrics {
            f1_positive: sum(|m| m.f1_positive),
            f1_macro: sum(|m| m.f1_macro),
            f1_weighted: sum(|m| m.f1_weighted),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub run: usize,
    pub seed: u64,
    pub train_size: usize,
    pub confusion: ConfusionCounts,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub spec: ScenarioSpec,
    pub representation: RepresentationId,
    /// SHA-256 of the ordered test id list.
    pub test_hash: String,
    pub test_size: usize,
    pub runs: Vec<RunResult>,
    pub averaged: Metrics,
}

/// Settings shared by every run of an experiment.
#[derive(Clone, Copy)]
pub struct ExperimentOptions<'a> {
    pub repeats: usize,
    pub master_seed: u64,
    /// Forest settings; the seed is replaced per run.
    pub forest: &'a ForestParams,
    pub build: BuildOptions<'a>,
}

pub fn test_hash(test: &[LabeledId]) -> String {
    let mut h = Sha256::new();
    for l in test {
        h.update(l.id.as_bytes());
        h.update(b"\t");
        h.update(l.label.as_str().as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

/// Where in a cell an error happened.
fn stage(spec: &ScenarioSpec, rep: RepresentationId, what: &str) -> String {
    format!("[{} | {rep} | {what}]", spec.label())
}

/// Builds the scenario for `spec` and evaluates it.
pub fn run_experiment(
    corpus: &Corpus,
    spec: &ScenarioSpec,
    rep: RepresentationId,
    resources: &Resources,
    options: &ExperimentOptions<'_>,
) -> Result<EvalReport> {
    let ds = build_scenario_with(corpus, spec, options.build).map_err(|e| e.context(stage(spec, rep, "scenario")))?;
    run_on_dataset(corpus, &ds, rep, resources, options)
}

/// Evaluates an already built scenario. Features are computed once for
/// every message involved; each run then rebalances the training pool with
/// its own seed, fits a forest seeded from the same run seed and scores the
/// fixed test set.
pub fn run_on_dataset(
    corpus: &Corpus,
    ds: &ScenarioDataset,
    rep: RepresentationId,
    resources: &Resources,
    options: &ExperimentOptions<'_>,
) -> Result<EvalReport> {
    let spec = &ds.spec;
    if options.repeats < 1 {
        return Err(Error::InvalidParams("repeats must be at least 1".into()));
    }
    let pool_ds = ScenarioDataset {
        train: ds.train_pool.clone(),
        ..ds.clone()
    };
    let (train_msgs, test_msgs) = pool_ds
        .materialize(corpus)
        .map_err(|e| e.context(stage(spec, rep, "materialize")))?;
    let mut seen = HashSet::new();
    let unique: Vec<Message> = train_msgs
        .into_iter()
        .chain(test_msgs)
        .filter(|m| seen.insert(m.id.clone()))
        .collect();
    let matrix = build_representation(&unique, rep, resources).map_err(|e| e.context(stage(spec, rep, "features")))?;
    let row_of: HashMap<&str, usize> = matrix.ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let rows = |ls: &[LabeledId]| -> Vec<Vec<f64>> { ls.iter().map(|l| matrix.rows[row_of[l.id.as_str()]].clone()).collect() };

    let test_x = rows(&ds.test);
    let test_y: Vec<LabelClass> = ds.test.iter().map(|l| l.label).collect();
    let mut runs = Vec::with_capacity(options.repeats);
    for r in 0..options.repeats {
        let seed = derive_seed(options.master_seed, r as u64);
        let what = |s: &str| stage(spec, rep, &format!("run {r} {s}"));
        let train = ds.balanced_run(r as u64).map_err(|e| e.context(what("balance")))?;
        let x = rows(&train);
        let y: Vec<LabelClass> = train.iter().map(|l| l.label).collect();
        let params = ForestParams {
            seed: derive_named(seed, "forest"),
            ..options.forest.clone()
        };
        let mut model = fit_forest(&x, &y, &params).map_err(|e| e.context(what("train")))?;
        model.representation = Some(rep);
        let predicted = model.predict(&test_x).map_err(|e| e.context(what("predict")))?;
        let confusion = confusion_counts(&predicted, &test_y)?;
        runs.push(RunResult {
            run: r,
            seed,
            train_size: train.len(),
            confusion,
            metrics: Metrics::of(&confusion),
        });
    }
    let averaged = Metrics::mean(&runs.iter().map(|r| r.metrics).collect::<Vec<_>>());
    Ok(EvalReport {
        spec: spec.clone(),
        representation: rep,
        test_hash: test_hash(&ds.test),
        test_size: ds.test.len(),
        runs,
        averaged,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellKey {
    pub kind: ScenarioKind,
    pub target_language: String,
    pub target_domain: String,
    pub representation: RepresentationId,
}

impl CellKey {
    pub fn of(report: &EvalReport) -> Self {
        CellKey {
            kind: report.spec.kind,
            target_language: report.spec.target_language.clone(),
            target_domain: report.spec.target_domain.clone(),
            representation: report.representation,
        }
    }

    pub fn target(&self) -> (String, String) {
        (self.target_language.clone(), self.target_domain.clone())
    }
}

impl std::fmt::Display for CellKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}/{}/{}/{}",
            self.kind, self.target_language, self.target_domain, self.representation
        )
    }
}

/// A cell that could not be evaluated, with the reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedCell {
    pub key: CellKey,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMatrix {
    /// Stored as a plain list of reports; the key is derived from each.
    #[serde(with = "cell_list")]
    pub cells: BTreeMap<CellKey, EvalReport>,
    #[serde(default)]
    pub skipped: Vec<SkippedCell>,
}

mod cell_list {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(cells: &BTreeMap<CellKey, EvalReport>, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(cells.values())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BTreeMap<CellKey, EvalReport>, D::Error> {
        let list = Vec::<EvalReport>::deserialize(d)?;
        let mut out = BTreeMap::new();
        for r in list {
            let key = CellKey::of(&r);
            if out.insert(key.clone(), r).is_some() {
                return Err(serde::de::Error::custom(format!("duplicate report cell ({key})")));
            }
        }
        Ok(out)
    }
}

impl RunMatrix {
    pub fn kinds(&self) -> Vec<ScenarioKind> {
        let mut k: Vec<_> = self.cells.keys().map(|c| c.kind).collect();
        k.sort();
        k.dedup();
        k
    }

    pub fn representations(&self) -> Vec<RepresentationId> {
        let mut r: Vec<_> = self.cells.keys().map(|c| c.representation).collect();
        r.sort();
        r.dedup();
        r
    }

    pub fn targets(&self) -> Vec<(String, String)> {
        let mut t: Vec<_> = self.cells.keys().map(CellKey::target).collect();
        t.sort();
        t.dedup();
        t
    }

    /// Unweighted mean over targets of each (kind, representation) cell.
    pub fn scenario_average(&self, kind: ScenarioKind, rep: RepresentationId, mode: F1Mode) -> Option<f64> {
        let values: Vec<f64> = self
            .cells
            .iter()
            .filter(|(k, _)| k.kind == kind && k.representation == rep)
            .map(|(_, r)| r.averaged.get(mode))
            .collect();
        (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Collects reports into a grid. Duplicate cells are an error, and so are
/// cells of one target evaluated on different test sets. Unless
/// `allow_gaps`, every (kind, target, representation) combination must be
/// present.
pub fn aggregate_matrix(reports: Vec<EvalReport>, allow_gaps: bool) -> Result<RunMatrix> {
    let mut m = RunMatrix::default();
    let mut test_of: BTreeMap<(String, String), String> = BTreeMap::new();
    for r in reports {
        let key = CellKey::of(&r);
        let target = key.target();
        match test_of.get(&target) {
            Some(h) if *h != r.test_hash => {
                return Err(Error::TestSetMismatch(format!("{}/{}", target.0, target.1)));
            }
            _ => {
                test_of.insert(target, r.test_hash.clone());
            }
        }
        if m.cells.contains_key(&key) {
            return Err(Error::DuplicateCell(key.to_string()));
        }
        m.cells.insert(key, r);
    }
    if !allow_gaps {
        for kind in m.kinds() {
            for (lang, domain) in m.targets() {
                for rep in m.representations() {
                    let key = CellKey {
                        kind,
                        target_language: lang.clone(),
                        target_domain: domain.clone(),
                        representation: rep,
                    };
                    if !m.cells.contains_key(&key) {
                        return Err(Error::InvalidParams(format!("report grid is missing cell {key}")));
                    }
                }
            }
        }
    }
    Ok(m)
}
