//! File-backed resources and whole-grid execution.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::embed::{
    load_word_vectors, CachedTranslator, ContextualCache, DictionaryTranslator, RepresentationId, Resources,
    Translator, ANY_LANGUAGE, CONTEXTUAL_DIMS, GLOVE_DIMS, MUSE_DIMS,
};
use crate::error::{Error, Result};
use crate::evalx::{aggregate_matrix, run_on_dataset, CellKey, ExperimentOptions, RunMatrix, SkippedCell};
use crate::scenario::{build_from_holdout, Holdout, ScenarioKind, ScenarioSpec};

/// Where the representation resources live on disk. Everything is
/// optional; only what the requested representations use is loaded.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourcePaths {
    #[serde(default)]
    pub glove: Option<PathBuf>,
    /// Aligned vector tables by language; `*` is the fallback table.
    #[serde(default)]
    pub muse: BTreeMap<String, PathBuf>,
    #[serde(default)]
    pub caches: BTreeMap<RepresentationId, PathBuf>,
    #[serde(default)]
    pub translation_cache: Option<PathBuf>,
    /// Word-by-word dictionary used to fill translation cache misses.
    #[serde(default)]
    pub dictionary: Option<PathBuf>,
}

impl ResourcePaths {
    /// Every configured path, labelled, for existence checks.
    pub fn all(&self) -> Vec<(String, PathBuf)> {
        let mut out = Vec::new();
        if let Some(p) = &self.glove {
            out.push(("glove".to_string(), p.clone()));
        }
        for (lang, p) in &self.muse {
            out.push((format!("muse.{lang}"), p.clone()));
        }
        for (rep, p) in &self.caches {
            out.push((format!("caches.{}", rep.key()), p.clone()));
        }
        if let Some(p) = &self.dictionary {
            out.push(("dictionary".to_string(), p.clone()));
        }
        out
    }
}

fn needs(reps: &[RepresentationId], any: &[RepresentationId]) -> bool {
    reps.iter().any(|r| any.contains(r))
}

/// Loads what `reps` need. The translator is the translation cache (in
/// front of the dictionary when both are given) or the dictionary alone.
pub fn load_resources(paths: &ResourcePaths, reps: &[RepresentationId]) -> Result<Resources> {
    use RepresentationId::*;
    let mut res = Resources::default();
    if needs(reps, &[MtGlove]) {
        if let Some(p) = &paths.glove {
            res.glove = Some(Arc::new(load_word_vectors(p, GLOVE_DIMS)?));
        }
    }
    if needs(reps, &[Muse, MuseLf]) {
        for (lang, p) in &paths.muse {
            res.muse.insert(lang.clone(), Arc::new(load_word_vectors(p, MUSE_DIMS)?));
        }
    }
    for rep in reps.iter().filter(|r| r.is_contextual()) {
        if let Some(p) = paths.caches.get(rep) {
            res.caches.insert(*rep, Arc::new(ContextualCache::load(p, CONTEXTUAL_DIMS)?));
        }
    }
    let dictionary = paths.dictionary.as_deref().map(DictionaryTranslator::load).transpose()?;
    res.translator = match (&paths.translation_cache, dictionary) {
        (Some(cache), dict) => Some(Arc::new(CachedTranslator::open(
            cache,
            dict.map(|d| Box::new(d) as Box<dyn Translator>),
        )?)),
        (None, Some(d)) => Some(Arc::new(d)),
        (None, None) => None,
    };
    if res.muse.is_empty() && needs(reps, &[Muse, MuseLf]) && !paths.muse.contains_key(ANY_LANGUAGE) {
        log::warn!("no aligned vector tables configured");
    }
    Ok(res)
}

/// The experiment grid: every kind for every target under every
/// representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub kinds: Vec<ScenarioKind>,
    /// (language, hazard type) pairs.
    pub targets: Vec<(String, String)>,
    pub representations: Vec<RepresentationId>,
}

/// Errors that mean the corpus cannot support a cell, as opposed to a
/// broken input.
fn infeasible(e: &Error) -> bool {
    matches!(
        e.root(),
        Error::NoHeldOutEvent { .. } | Error::EmptyTraining(_) | Error::EmptyClass(_) | Error::InvalidScenario(_)
    )
}

/// Runs the whole grid. Scenarios are built once per (kind, target) and
/// shared by the representations; cells run in parallel and each cell's
/// runs in order, so results do not depend on the thread count. Cells the
/// corpus cannot support are listed in `skipped`.
pub fn run_grid(
    corpus: &Corpus,
    grid: &Grid,
    resources: &Resources,
    options: &ExperimentOptions<'_>,
) -> Result<RunMatrix> {
    let holdout = Holdout::compute(corpus);
    let mut datasets = Vec::new();
    let mut skipped = Vec::new();
    for kind in &grid.kinds {
        for (lang, domain) in &grid.targets {
            let spec = ScenarioSpec::new(*kind, lang, domain, options.master_seed);
            let built = spec
                .check()
                .and_then(|_| build_from_holdout(corpus, &spec, &holdout, options.build));
            match built {
                Ok(ds) => datasets.push(ds),
                Err(e) if infeasible(&e) => {
                    for rep in &grid.representations {
                        skipped.push(SkippedCell {
                            key: CellKey {
                                kind: *kind,
                                target_language: lang.clone(),
                                target_domain: domain.clone(),
                                representation: *rep,
                            },
                            reason: e.to_string(),
                        });
                    }
                }
                Err(e) => return Err(e.context(format!("[{} | - | scenario]", spec.label()))),
            }
        }
    }
    let cells: Vec<_> = datasets
        .iter()
        .flat_map(|ds| grid.representations.iter().map(move |rep| (ds, *rep)))
        .collect();
    let reports = cells
        .into_par_iter()
        .map(|(ds, rep)| run_on_dataset(corpus, ds, rep, resources, options))
        .collect::<Result<Vec<_>>>()?;
    let allow_gaps = !skipped.is_empty();
    let mut matrix = aggregate_matrix(reports, allow_gaps)?;
    matrix.skipped = skipped;
    Ok(matrix)
}
