//! Transfer-learning scenarios: event-level train/test separation,
//! training-set balancing and test-set negative augmentation.

mod manifest;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use manifest::{export_manifest, import_manifest, SplitManifest, MANIFEST_VERSION};

use crate::corpus::{Corpus, LabelClass, Message};
use crate::embed::{Translator, PIVOT_LANGUAGE};
use crate::error::{Error, Result};
use crate::seed::{derive_named, derive_seed, rng};

pub const DEFAULT_TARGET_RATIO: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    MonolingualMonodomain,
    MonolingualCrossDomain,
    MonolingualMultiDomain,
    CrossLingualMonodomain,
    CrossLingualCrossDomain,
    CrossLingualMultiDomain,
    MultilingualMultiDomain,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 7] = [
        ScenarioKind::MonolingualMonodomain,
        ScenarioKind::MonolingualCrossDomain,
        ScenarioKind::MonolingualMultiDomain,
        ScenarioKind::CrossLingualMonodomain,
        ScenarioKind::CrossLingualCrossDomain,
        ScenarioKind::CrossLingualMultiDomain,
        ScenarioKind::MultilingualMultiDomain,
    ];

    pub fn key(self) -> &'static str {
        match self {
            ScenarioKind::MonolingualMonodomain => "monolingual_monodomain",
            ScenarioKind::MonolingualCrossDomain => "monolingual_cross_domain",
            ScenarioKind::MonolingualMultiDomain => "monolingual_multi_domain",
            ScenarioKind::CrossLingualMonodomain => "cross_lingual_monodomain",
            ScenarioKind::CrossLingualCrossDomain => "cross_lingual_cross_domain",
            ScenarioKind::CrossLingualMultiDomain => "cross_lingual_multi_domain",
            ScenarioKind::MultilingualMultiDomain => "multilingual_multi_domain",
        }
    }

    /// Whether training uses the source (pivot) language.
    pub fn uses_source_language(self) -> bool {
        !matches!(
            self,
            ScenarioKind::MonolingualMonodomain
                | ScenarioKind::MonolingualCrossDomain
                | ScenarioKind::MonolingualMultiDomain
        )
    }

    pub fn is_cross_lingual(self) -> bool {
        matches!(
            self,
            ScenarioKind::CrossLingualMonodomain
                | ScenarioKind::CrossLingualCrossDomain
                | ScenarioKind::CrossLingualMultiDomain
        )
    }

    /// Whether a training message in `language` about `hazard` fits this
    /// kind for the given spec.
    fn admits(self, spec: &ScenarioSpec, language: &str, hazard: &str) -> bool {
        let target_lang = language == spec.target_language;
        let source_lang = language == spec.source_language;
        let same_domain = hazard == spec.target_domain;
        match self {
            ScenarioKind::MonolingualMonodomain => target_lang && same_domain,
            ScenarioKind::MonolingualCrossDomain => target_lang && !same_domain,
            ScenarioKind::MonolingualMultiDomain => target_lang,
            ScenarioKind::CrossLingualMonodomain => source_lang && same_domain,
            ScenarioKind::CrossLingualCrossDomain => source_lang && !same_domain,
            ScenarioKind::CrossLingualMultiDomain => source_lang,
            ScenarioKind::MultilingualMultiDomain => source_lang || target_lang,
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for ScenarioKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let norm: String = s.trim().to_lowercase().replace('-', "_");
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.key() == norm || k.key().replace('_', "") == norm)
            .ok_or_else(|| format!("unknown scenario kind `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub target_language: String,
    pub target_domain: String,
    #[serde(default = "default_source")]
    pub source_language: String,
    pub seed: u64,
}

fn default_source() -> String {
    PIVOT_LANGUAGE.to_string()
}

impl ScenarioSpec {
    pub fn new(kind: ScenarioKind, target_language: &str, target_domain: &str, seed: u64) -> Self {
        ScenarioSpec {
            kind,
            target_language: target_language.to_string(),
            target_domain: target_domain.to_string(),
            source_language: default_source(),
            seed,
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.kind.uses_source_language() && self.target_language == self.source_language {
            return Err(Error::InvalidScenario(format!(
                "{} needs a target language different from the source `{}`",
                self.kind, self.source_language
            )));
        }
        Ok(())
    }

    /// `kind/language/domain`, used in diagnostics and file names.
    pub fn label(&self) -> String {
        format!("{}/{}/{}", self.kind, self.target_language, self.target_domain)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LabeledId {
    pub id: String,
    pub label: LabelClass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Native,
    PoolNegative,
    TranslatedNegative,
}

/// One message added to a test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentationEntry {
    pub id: String,
    pub origin: Origin,
    /// For translated negatives: the pivot-language message it came from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_id: Option<String>,
    /// For translated negatives: the translated text.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioDataset {
    pub spec: ScenarioSpec,
    /// Training messages before balancing, in corpus order.
    pub train_pool: Vec<LabeledId>,
    /// Balanced training set of the first run.
    pub train: Vec<LabeledId>,
    pub test: Vec<LabeledId>,
    pub train_events: BTreeSet<String>,
    pub test_events: BTreeSet<String>,
    pub augmentation_log: Vec<AugmentationEntry>,
    /// Negatives still missing after augmentation.
    pub shortfall: usize,
}

impl ScenarioDataset {
    /// Balanced training set for run `run`; run 0 equals `train`.
    pub fn balanced_run(&self, run: u64) -> Result<Vec<LabeledId>> {
        balance_training_set(&self.train_pool, derive_seed(balance_seed(&self.spec), run))
    }

    /// Training and test messages in list order. Translated negatives are
    /// synthesized from their log entries.
    pub fn materialize(&self, corpus: &Corpus) -> Result<(Vec<Message>, Vec<Message>)> {
        let index = corpus.message_index();
        let derived: HashMap<&str, &AugmentationEntry> = self
            .augmentation_log
            .iter()
            .filter(|e| e.origin == Origin::TranslatedNegative)
            .map(|e| (e.id.as_str(), e))
            .collect();
        let lookup = |l: &LabeledId| -> Result<Message> {
            if let Some(m) = index.get(l.id.as_str()) {
                return Ok((*m).clone());
            }
            let entry = derived
                .get(l.id.as_str())
                .ok_or_else(|| Error::InvalidScenario(format!("message `{}` is not in the corpus", l.id)))?;
            let source_id = entry.source_id.as_deref().unwrap_or_default();
            let source = index.get(source_id).ok_or_else(|| {
                Error::InvalidScenario(format!("translation source `{source_id}` is not in the corpus"))
            })?;
            Ok(Message {
                id: l.id.clone(),
                text: entry.text.clone().unwrap_or_default(),
                translated_text: (source.language == PIVOT_LANGUAGE).then(|| source.text.clone()),
                language: self.spec.target_language.clone(),
                label: LabelClass::NotRelated,
                ..(*source).clone()
            })
        };
        let train = self.train.iter().map(lookup).collect::<Result<_>>()?;
        let test = self.test.iter().map(lookup).collect::<Result<_>>()?;
        Ok((train, test))
    }
}

fn balance_seed(spec: &ScenarioSpec) -> u64 {
    derive_named(spec.seed, "balance")
}

fn augment_seed(spec: &ScenarioSpec) -> u64 {
    derive_named(spec.seed, "augment")
}

/// Per-event statistics used for ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct EventStats {
    pub event_id: String,
    pub language: String,
    pub hazard_type: String,
    pub count: usize,
    pub related: usize,
}

impl EventStats {
    /// count × (1 − |pos_ratio − 0.5| × 2): large, balanced events first.
    pub fn score(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        let ratio = self.related as f64 / self.count as f64;
        self.count as f64 * (1.0 - (ratio - 0.5).abs() * 2.0)
    }
}

/// Events grouped by (majority language, hazard type), each group ranked
/// best first, and the held-out (test) part of each group.
#[derive(Debug, Clone, Default)]
pub struct Holdout {
    pub strata: BTreeMap<(String, String), Vec<EventStats>>,
    pub held_out: BTreeSet<String>,
}

impl Holdout {
    /// Ranks the events of every stratum and holds out the lowest-ranked
    /// `max(1, k / 2)` of its `k` events. The partition depends only on the
    /// corpus, so every scenario kind sees the same test events.
    pub fn compute(corpus: &Corpus) -> Self {
        let hazards: HashMap<&str, &str> = corpus
            .events
            .iter()
            .map(|e| (e.id.as_str(), e.hazard_type.as_str()))
            .collect();
        let mut per_event: BTreeMap<&str, (BTreeMap<&str, usize>, usize, usize)> = BTreeMap::new();
        for m in &corpus.messages {
            let s = per_event.entry(m.event_id.as_str()).or_default();
            *s.0.entry(m.language.as_str()).or_default() += 1;
            s.1 += 1;
            s.2 += usize::from(m.label.is_related());
        }
        let mut strata: BTreeMap<(String, String), Vec<EventStats>> = BTreeMap::new();
        for (event, (langs, count, related)) in per_event {
            // ties go to the smaller code: BTreeMap iterates in order
            let language = langs
                .iter()
                .fold(None::<(&str, usize)>, |best, (l, n)| match best {
                    Some((_, bn)) if bn >= *n => best,
                    _ => Some((l, *n)),
                })
                .map(|(l, _)| l.to_string())
                .unwrap_or_default();
            let hazard_type = hazards.get(event).copied().unwrap_or_default().to_string();
            strata
                .entry((language.clone(), hazard_type.clone()))
                .or_default()
                .push(EventStats {
                    event_id: event.to_string(),
                    language,
                    hazard_type,
                    count,
                    related,
                });
        }
        let mut held_out = BTreeSet::new();
        for events in strata.values_mut() {
            events.sort_by(|a, b| {
                b.score()
                    .total_cmp(&a.score())
                    .then_with(|| a.event_id.cmp(&b.event_id))
            });
            let k = events.len();
            let n_test = (k / 2).max(1);
            held_out.extend(events[k - n_test..].iter().map(|e| e.event_id.clone()));
        }
        Holdout { strata, held_out }
    }

    pub fn test_events(&self, language: &str, domain: &str) -> Vec<&str> {
        self.strata
            .get(&(language.to_string(), domain.to_string()))
            .map(|events| {
                events
                    .iter()
                    .filter(|e| self.held_out.contains(&e.event_id))
                    .map(|e| e.event_id.as_str())
                    .collect()
            })
            .unwrap_or_default()
    }
}

fn check_unique_ids(corpus: &Corpus) -> Result<()> {
    let mut seen = HashSet::new();
    for m in &corpus.messages {
        if !seen.insert(m.id.as_str()) {
            return Err(Error::InvalidScenario(format!(
                "message id `{}` occurs in more than one dataset; scenarios need corpus-wide unique ids",
                m.id
            )));
        }
    }
    Ok(())
}

/// Training and test events for `spec`.
pub fn select_events(corpus: &Corpus, spec: &ScenarioSpec) -> Result<(BTreeSet<String>, BTreeSet<String>)> {
    select_with(corpus, spec, &Holdout::compute(corpus))
}

fn select_with(
    corpus: &Corpus,
    spec: &ScenarioSpec,
    holdout: &Holdout,
) -> Result<(BTreeSet<String>, BTreeSet<String>)> {
    spec.check()?;
    let test: BTreeSet<String> = holdout
        .test_events(&spec.target_language, &spec.target_domain)
        .into_iter()
        .map(str::to_string)
        .collect();
    if test.is_empty() {
        return Err(Error::NoHeldOutEvent {
            language: spec.target_language.clone(),
            domain: spec.target_domain.clone(),
        });
    }
    let hazards: HashMap<&str, &str> = corpus
        .events
        .iter()
        .map(|e| (e.id.as_str(), e.hazard_type.as_str()))
        .collect();
    let train: BTreeSet<String> = corpus
        .messages
        .iter()
        .filter(|m| !holdout.held_out.contains(&m.event_id))
        .filter(|m| {
            let hazard = hazards.get(m.event_id.as_str()).copied().unwrap_or_default();
            spec.kind.admits(spec, &m.language, hazard)
        })
        .map(|m| m.event_id.clone())
        .collect();
    if train.is_empty() {
        return Err(Error::EmptyTraining(spec.label()));
    }
    Ok((train, test))
}

/// Options for [`build_scenario_with`].
#[derive(Clone, Copy)]
pub struct BuildOptions<'a> {
    /// Minimum NotRelated fraction of the test set.
    pub target_ratio: f64,
    pub translator: Option<&'a dyn Translator>,
}

impl Default for BuildOptions<'_> {
    fn default() -> Self {
        BuildOptions {
            target_ratio: DEFAULT_TARGET_RATIO,
            translator: None,
        }
    }
}

pub fn build_scenario(corpus: &Corpus, spec: &ScenarioSpec) -> Result<ScenarioDataset> {
    build_scenario_with(corpus, spec, BuildOptions::default())
}

pub fn build_scenario_with(
    corpus: &Corpus,
    spec: &ScenarioSpec,
    options: BuildOptions<'_>,
) -> Result<ScenarioDataset> {
    build_from_holdout(corpus, spec, &Holdout::compute(corpus), options)
}

/// Same as [`build_scenario_with`] with a precomputed holdout, for building
/// many scenarios over one corpus.
pub fn build_from_holdout(
    corpus: &Corpus,
    spec: &ScenarioSpec,
    holdout: &Holdout,
    options: BuildOptions<'_>,
) -> Result<ScenarioDataset> {
    check_unique_ids(corpus)?;
    let (train_events, test_events) = select_with(corpus, spec, holdout)?;
    let hazards: HashMap<&str, &str> = corpus
        .events
        .iter()
        .map(|e| (e.id.as_str(), e.hazard_type.as_str()))
        .collect();
    let train_pool: Vec<LabeledId> = corpus
        .messages
        .iter()
        .filter(|m| train_events.contains(&m.event_id))
        .filter(|m| {
            let hazard = hazards.get(m.event_id.as_str()).copied().unwrap_or_default();
            spec.kind.admits(spec, &m.language, hazard)
        })
        .map(|m| LabeledId {
            id: m.id.clone(),
            label: m.label,
        })
        .collect();
    let train = balance_training_set(&train_pool, derive_seed(balance_seed(spec), 0))
        .map_err(|e| e.context(format!("training set of {}", spec.label())))?;

    let native: Vec<LabeledId> = corpus
        .messages
        .iter()
        .filter(|m| test_events.contains(&m.event_id) && m.language == spec.target_language)
        .map(|m| LabeledId {
            id: m.id.clone(),
            label: m.label,
        })
        .collect();
    if native.is_empty() {
        return Err(Error::NoHeldOutEvent {
            language: spec.target_language.clone(),
            domain: spec.target_domain.clone(),
        });
    }
    // other held-out events only; training events never feed the pool
    let pool: Vec<&Message> = corpus
        .messages
        .iter()
        .filter(|m| {
            m.label == LabelClass::NotRelated
                && holdout.held_out.contains(&m.event_id)
                && !test_events.contains(&m.event_id)
        })
        .collect();
    let aug = augment_test_negatives(
        &native,
        &pool,
        &spec.target_language,
        options.translator,
        options.target_ratio,
        augment_seed(spec),
    )?;
    Ok(ScenarioDataset {
        spec: spec.clone(),
        train_pool,
        train,
        test: aug.test,
        train_events,
        test_events,
        augmentation_log: aug.log,
        shortfall: aug.shortfall,
    })
}

/// Equalizes the classes at `floor((P + N) / 2)` each: the larger class is
/// subsampled without replacement, the smaller one keeps every item and is
/// topped up by draws with replacement. Selected items keep input order;
/// oversampled copies follow.
pub fn balance_training_set(train: &[LabeledId], seed: u64) -> Result<Vec<LabeledId>> {
    let related = train.iter().filter(|l| l.label.is_related()).count();
    let not_related = train.len() - related;
    if related == 0 || not_related == 0 {
        let missing = if related == 0 { "related" } else { "not_related" };
        return Err(Error::EmptyClass(format!("no {missing} training messages")));
    }
    let target = train.len() / 2;
    let major_label = if related >= not_related { LabelClass::Related } else { LabelClass::NotRelated };
    let (major, minor): (Vec<usize>, Vec<usize>) = (0..train.len()).partition(|&i| train[i].label == major_label);
    let mut r = rng(seed);
    let mut keep = vec![false; train.len()];
    for k in index::sample(&mut r, major.len(), target) {
        keep[major[k]] = true;
    }
    let mut out: Vec<LabeledId> = train
        .iter()
        .enumerate()
        .filter(|(i, l)| l.label != major_label || keep[*i])
        .map(|(_, l)| l.clone())
        .collect();
    for _ in minor.len()..target {
        out.push(train[minor[r.random_range(0..minor.len())]].clone());
    }
    Ok(out)
}

/// Result of [`augment_test_negatives`].
#[derive(Debug, Clone, PartialEq)]
pub struct Augmentation {
    pub test: Vec<LabeledId>,
    pub log: Vec<AugmentationEntry>,
    pub shortfall: usize,
}

/// Negatives needed so that the NotRelated share reaches `ratio`.
fn negatives_needed(related: usize, not_related: usize, ratio: f64) -> usize {
    if ratio <= 0.0 {
        return 0;
    }
    let total = related + not_related;
    let meets = |k: usize| (not_related + k) as f64 >= ratio * (total + k) as f64;
    let mut k = ((ratio * total as f64 - not_related as f64) / (1.0 - ratio)).ceil().max(0.0) as usize;
    while k > 0 && meets(k - 1) {
        k -= 1;
    }
    while !meets(k) {
        k += 1;
    }
    k
}

/// Adds NotRelated messages until they make up at least `target_ratio` of
/// the test set. Candidates in the target language come first; pivot
/// language negatives are translated only once those run out. Candidates
/// are drawn in a seeded random order; what cannot be filled is reported
/// as `shortfall`.
pub fn augment_test_negatives(
    test: &[LabeledId],
    pool: &[&Message],
    target_language: &str,
    translator: Option<&dyn Translator>,
    target_ratio: f64,
    seed: u64,
) -> Result<Augmentation> {
    if !(target_ratio > 0.0 && target_ratio <= 0.5) {
        return Err(Error::InvalidScenario(format!(
            "augmentation ratio {target_ratio} is outside (0, 0.5]"
        )));
    }
    let related = test.iter().filter(|l| l.label.is_related()).count();
    let mut needed = negatives_needed(related, test.len() - related, target_ratio);
    let mut out = test.to_vec();
    let mut log = Vec::new();
    if needed == 0 {
        return Ok(Augmentation { test: out, log, shortfall: 0 });
    }
    let present: HashSet<&str> = test.iter().map(|l| l.id.as_str()).collect();
    let candidates = |lang: &str, salt: &str| -> Vec<&Message> {
        let mut c: Vec<&Message> = pool
            .iter()
            .copied()
            .filter(|m| m.language == lang && m.label == LabelClass::NotRelated && !present.contains(m.id.as_str()))
            .collect();
        c.sort_by(|a, b| a.id.cmp(&b.id));
        c.dedup_by(|a, b| a.id == b.id);
        c.shuffle(&mut rng(derive_named(seed, salt)));
        c
    };

    for m in candidates(target_language, "pool").into_iter().take(needed) {
        out.push(LabeledId {
            id: m.id.clone(),
            label: LabelClass::NotRelated,
        });
        log.push(AugmentationEntry {
            id: m.id.clone(),
            origin: Origin::PoolNegative,
            source_id: None,
            text: None,
        });
        needed -= 1;
    }
    if needed > 0 && target_language != PIVOT_LANGUAGE {
        if let Some(tr) = translator {
            for m in candidates(PIVOT_LANGUAGE, "translated").into_iter().take(needed) {
                let id = format!("{}@{}", m.id, target_language);
                let text = tr.translate(&m.text, PIVOT_LANGUAGE, target_language)?;
                out.push(LabeledId {
                    id: id.clone(),
                    label: LabelClass::NotRelated,
                });
                log.push(AugmentationEntry {
                    id,
                    origin: Origin::TranslatedNegative,
                    source_id: Some(m.id.clone()),
                    text: Some(text),
                });
                needed -= 1;
            }
        }
    }
    Ok(Augmentation {
        test: out,
        log,
        shortfall: needed,
    })
}

/// Builds a dataset from externally supplied partitions (for instance the
/// published ones). No balancing or augmentation is applied: `train` and
/// `test` are used as given.
pub fn scenario_from_partitions(
    corpus: &Corpus,
    spec: &ScenarioSpec,
    train_ids: &[String],
    test_ids: &[String],
) -> Result<ScenarioDataset> {
    spec.check()?;
    let index = corpus.message_index();
    let resolve = |ids: &[String]| -> Result<Vec<LabeledId>> {
        ids.iter()
            .map(|id| {
                index
                    .get(id.as_str())
                    .map(|m| LabeledId {
                        id: id.clone(),
                        label: m.label,
                    })
                    .ok_or_else(|| Error::InvalidScenario(format!("partition lists unknown message `{id}`")))
            })
            .collect()
    };
    let train = resolve(train_ids)?;
    let test = resolve(test_ids)?;
    let events = |ls: &[LabeledId]| -> BTreeSet<String> {
        ls.iter().map(|l| index[l.id.as_str()].event_id.clone()).collect()
    };
    let (train_events, test_events) = (events(&train), events(&test));
    if let Some(shared) = train_events.intersection(&test_events).next() {
        return Err(Error::InvalidScenario(format!(
            "event `{shared}` appears in both training and test partitions"
        )));
    }
    Ok(ScenarioDataset {
        spec: spec.clone(),
        train_pool: train.clone(),
        train,
        test,
        train_events,
        test_events,
        augmentation_log: Vec::new(),
        shortfall: 0,
    })
}
