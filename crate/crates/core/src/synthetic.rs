//! Seeded synthetic corpora and resources for tests, demos and the
//! end-to-end fixture. Related messages are built from crisis vocabulary,
//! NotRelated ones from everyday vocabulary, with some overlap and label
//! noise; every resource (word vectors, aligned vectors, contextual caches,
//! dictionary translations) is derived from one shared concept space so the
//! representations carry the same signal across languages.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{save_corpus, Corpus, CorpusFormat, Event, LabelClass, Message};
use crate::embed::{
    CacheEntry, CachedTranslator, ContextualCache, DictionaryTranslator, RepresentationId, Resources, Translator, VectorTable,
    CONTEXTUAL_DIMS, GLOVE_DIMS, MUSE_DIMS, PIVOT_LANGUAGE,
};
use crate::error::{Error, Result};
use crate::seed::{derive_named, derive_seed, rng};
use crate::unify::HazardScheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Class {
    General,
    Domain(&'static str),
    Neutral,
}

struct Concept {
    forms: [&'static str; 3],
    class: Class,
}

const LANGS: [&str; 3] = ["en", "es", "it"];

macro_rules! concepts {
    ($($class:expr => [$($en:literal $es:literal $it:literal),* $(,)?]);* $(;)?) => {
        &[$($(Concept { forms: [$en, $es, $it], class: $class }),*),*]
    };
}

const CONCEPTS: &[Concept] = concepts![
    Class::General => [
        "help" "ayuda" "aiuto", "victims" "víctimas" "vittime", "emergency" "emergencia" "emergenza",
        "rescue" "rescate" "soccorso", "damage" "daños" "danni", "injured" "heridos" "feriti",
        "dead" "muertos" "morti", "evacuation" "evacuación" "evacuazione", "shelter" "refugio" "rifugio",
        "alert" "alerta" "allerta", "missing" "desaparecidos" "dispersi", "donate" "donar" "donare",
    ];
    Class::Domain("earthquake") => [
        "earthquake" "terremoto" "terremoto", "quake" "sismo" "scossa", "magnitude" "magnitud" "magnitudo",
        "aftershock" "réplica" "replica", "collapsed" "derrumbado" "crollato", "epicenter" "epicentro" "epicentro",
    ];
    Class::Domain("flood") => [
        "flood" "inundación" "alluvione", "water" "agua" "acqua", "river" "río" "fiume",
        "rain" "lluvia" "pioggia", "flooded" "inundado" "allagato", "overflow" "desborde" "esondazione",
    ];
    Class::Domain("explosion") => [
        "explosion" "explosión" "esplosione", "blast" "estallido" "scoppio", "fire" "incendio" "incendio",
        "factory" "fábrica" "fabbrica", "smoke" "humo" "fumo", "gas" "gas" "gas",
    ];
    Class::Neutral => [
        "music" "música" "musica", "football" "fútbol" "calcio", "coffee" "café" "caffè",
        "movie" "película" "film", "birthday" "cumpleaños" "compleanno", "love" "amor" "amore",
        "school" "escuela" "scuola", "pizza" "pizza" "pizza", "game" "partido" "partita",
        "friends" "amigos" "amici", "happy" "feliz" "felice", "today" "hoy" "oggi",
        "song" "canción" "canzone", "photo" "foto" "foto", "city" "ciudad" "città",
        "morning" "mañana" "mattina", "people" "gente" "gente", "beautiful" "hermoso" "bellissimo",
    ];
];

const FILLER: [&[&str]; 3] = [
    &["the", "a", "in", "of", "is", "and", "so", "now"],
    &["el", "la", "en", "de", "es", "y", "muy", "ahora"],
    &["il", "la", "in", "di", "è", "e", "molto", "ora"],
];

const COUNTRIES: [&str; 3] = ["United States", "Chile", "Italy"];

fn lang_index(lang: &str) -> Option<usize> {
    LANGS.iter().position(|l| *l == lang)
}

/// Shape of a generated corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub languages: Vec<String>,
    pub domains: Vec<String>,
    pub events_per_stratum: usize,
    pub messages_per_event: usize,
    /// Probability that a label is flipped.
    pub label_noise: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            seed: 7,
            languages: LANGS.iter().map(|s| s.to_string()).collect(),
            domains: ["earthquake", "flood", "explosion"].iter().map(|s| s.to_string()).collect(),
            events_per_stratum: 2,
            messages_per_event: 40,
            label_noise: 0.03,
        }
    }
}

fn domain_concepts(domain: &str) -> Vec<&'static Concept> {
    CONCEPTS
        .iter()
        .filter(|c| matches!(c.class, Class::Domain(d) if d == domain))
        .collect()
}

fn class_concepts(class: Class) -> Vec<&'static Concept> {
    CONCEPTS.iter().filter(|c| c.class == class).collect()
}

fn compose(r: &mut ChaCha8Rng, lang: usize, domain: &str, related: bool) -> String {
    let general = class_concepts(Class::General);
    let neutral = class_concepts(Class::Neutral);
    let mut domain_words = domain_concepts(domain);
    if domain_words.is_empty() {
        domain_words = general.clone();
    }
    let mut words: Vec<String> = Vec::new();
    let pick = |r: &mut ChaCha8Rng, pool: &[&Concept]| pool.choose(r).expect("non-empty").forms[lang].to_string();
    if related {
        for _ in 0..r.random_range(1..=2) {
            words.push(pick(r, &domain_words));
        }
        for _ in 0..r.random_range(0..=2) {
            words.push(pick(r, &general));
        }
        for _ in 0..r.random_range(0..=2) {
            words.push(pick(r, &neutral));
        }
    } else {
        for _ in 0..r.random_range(3..=5) {
            words.push(pick(r, &neutral));
        }
        if r.random_bool(0.15) {
            words.push(pick(r, &general));
        }
    }
    for _ in 0..r.random_range(1..=3) {
        words.push(FILLER[lang].choose(r).expect("non-empty").to_string());
    }
    // shuffle, then decorate
    for i in (1..words.len()).rev() {
        let j = r.random_range(0..=i);
        words.swap(i, j);
    }
    if r.random_bool(0.2) {
        words.insert(0, format!("@user{}", r.random_range(1..50)));
    }
    if related && r.random_bool(0.3) {
        words.push(format!("#{}", domain_words[0].forms[lang]));
    }
    if r.random_bool(0.2) {
        words.push(format!("http://t.co/{:x}", r.random::<u32>()));
    }
    let mut text = words.join(" ");
    if let Some(first) = text.get(0..1) {
        if first != "@" {
            text = first.to_uppercase() + &text[1..];
        }
    }
    if r.random_bool(0.3) {
        text.push_str(if related { "!!" } else { "?" });
    }
    text
}

/// `languages × domains × events_per_stratum` events. Within a stratum the
/// first event is large and balanced, later ones smaller and skewed toward
/// Related, which exercises ranking and test augmentation.
pub fn synthetic_corpus(cfg: &SyntheticConfig) -> Result<Corpus> {
    let scheme = HazardScheme::shipped();
    let mut events = Vec::new();
    let mut messages = Vec::new();
    for lang in &cfg.languages {
        let li = lang_index(lang)
            .ok_or_else(|| Error::InvalidParams(format!("synthetic data has no vocabulary for `{lang}`")))?;
        for domain in &cfg.domains {
            let profile = scheme
                .get(domain)
                .ok_or_else(|| Error::MissingTaxonomy(domain.clone()))?;
            for k in 0..cfg.events_per_stratum {
                let id = format!("{lang}_{domain}_{k}");
                events.push(Event {
                    id: id.clone(),
                    name: format!("{} {domain} {}", COUNTRIES[li], 2012 + k),
                    hazard_type: profile.hazard_type.clone(),
                    hazard_category: profile.hazard_category,
                    hazard_subcategory: profile.hazard_subcategory.clone(),
                    temporal_development: profile.temporal_development,
                    geographic_spread: profile.geographic_spread,
                    country: COUNTRIES[li].to_string(),
                    year: 2012 + k as i32,
                });
                let mut r = rng(derive_named(cfg.seed, &id));
                let n = (cfg.messages_per_event * 2 / (k + 2)).max(4);
                let related_share = if k == 0 { 0.5 } else { 0.8 };
                for i in 0..n {
                    let related = (i as f64) < related_share * n as f64;
                    let mut label = if related { LabelClass::Related } else { LabelClass::NotRelated };
                    if r.random_bool(cfg.label_noise) {
                        label = if related { LabelClass::NotRelated } else { LabelClass::Related };
                    }
                    messages.push(Message {
                        id: format!("{id}-{i:03}"),
                        text: compose(&mut r, li, domain, related),
                        translated_text: None,
                        language: lang.clone(),
                        event_id: id.clone(),
                        label,
                        source_dataset: "synthetic".into(),
                        original_label: if related { "on-topic" } else { "off-topic" }.into(),
                        has_location_meta: r.random_bool(0.1),
                        has_media_meta: r.random_bool(0.1),
                    });
                }
            }
        }
    }
    Ok(Corpus::new(messages, events, vec!["synthetic".into()]))
}

/// Deterministic vector for a concept (or any other key) of width `dims`.
/// Crisis concepts share an offset on the leading dimensions, and each
/// domain has its own block.
fn concept_vector(seed: u64, key: &str, class: Option<Class>, dims: usize) -> Vec<f64> {
    let mut r = rng(derive_named(derive_seed(seed, dims as u64), key));
    let mut v: Vec<f64> = (0..dims).map(|_| r.random_range(-1.0..1.0)).collect();
    let shift = |v: &mut Vec<f64>, from: usize| {
        for x in v.iter_mut().skip(from).take(4) {
            *x += 1.5;
        }
    };
    match class {
        Some(Class::General) => shift(&mut v, 0),
        Some(Class::Domain(d)) => {
            shift(&mut v, 0);
            let block = match d {
                "earthquake" => 4,
                "flood" => 8,
                _ => 12,
            };
            shift(&mut v, block);
        }
        _ => {}
    }
    v
}

fn to_f32(v: &[f64]) -> Vec<f32> {
    v.iter().map(|x| *x as f32).collect()
}

/// Everything needed to build all seven representations of a synthetic
/// corpus.
#[derive(Debug, Clone)]
pub struct SyntheticResources {
    pub glove: VectorTable,
    pub muse: BTreeMap<String, VectorTable>,
    pub caches: BTreeMap<RepresentationId, ContextualCache>,
    pub dictionary: DictionaryTranslator,
    /// `(source, target, word, translation)` rows behind `dictionary`.
    pub dictionary_rows: Vec<[String; 4]>,
}

/// Token → concept in each language.
fn vocabulary() -> Vec<HashMap<&'static str, &'static Concept>> {
    (0..LANGS.len())
        .map(|li| CONCEPTS.iter().map(|c| (c.forms[li], c)).collect())
        .collect()
}

fn message_concepts<'a>(text: &str, vocab: &HashMap<&'a str, &'a Concept>) -> Vec<&'a Concept> {
    crate::lingfeat::tokenize(text, crate::lingfeat::Normalization::Placeholdered)
        .tokens
        .iter()
        .filter_map(|t| vocab.get(t.trim_start_matches('#')).copied())
        .collect()
}

pub fn synthetic_resources(corpus: &Corpus, seed: u64) -> Result<SyntheticResources> {
    let mut glove = VectorTable::new("synthetic-glove-100", GLOVE_DIMS);
    for c in CONCEPTS {
        glove.insert(c.forms[0], to_f32(&concept_vector(seed, c.forms[0], Some(c.class), GLOVE_DIMS)))?;
    }
    for w in FILLER[0].iter().chain(&["<url>", "<user>"]) {
        glove.insert(*w, to_f32(&concept_vector(seed, w, None, GLOVE_DIMS)))?;
    }

    let mut muse = BTreeMap::new();
    for (li, lang) in LANGS.iter().enumerate() {
        let mut t = VectorTable::new(format!("synthetic-muse-{lang}"), MUSE_DIMS);
        let mut noise = rng(derive_named(seed, &format!("muse-{lang}")));
        for c in CONCEPTS {
            let v: Vec<f64> = concept_vector(seed, c.forms[0], Some(c.class), MUSE_DIMS)
                .into_iter()
                .map(|x| x + noise.random_range(-0.05..0.05))
                .collect();
            t.insert(c.forms[li], to_f32(&v))?;
        }
        for w in FILLER[li] {
            t.insert(*w, to_f32(&concept_vector(seed, &format!("{lang}:{w}"), None, MUSE_DIMS)))?;
        }
        muse.insert(lang.to_string(), t);
    }

    let vocab = vocabulary();
    let mut caches = BTreeMap::new();
    for rep in [RepresentationId::MBert, RepresentationId::MtBert, RepresentationId::XlmR] {
        let mut cache = ContextualCache::new(format!("synthetic-{}", rep.key()), CONTEXTUAL_DIMS);
        for m in &corpus.messages {
            let li = lang_index(&m.language).unwrap_or(0);
            let concepts = message_concepts(&m.text, &vocab[li]);
            let mut r = rng(derive_named(derive_seed(seed, rep as u64), &m.id));
            let rows: Vec<Vec<f32>> = if concepts.is_empty() {
                vec![to_f32(&concept_vector(seed, &m.id, None, CONTEXTUAL_DIMS))]
            } else {
                concepts
                    .iter()
                    .map(|c| {
                        let v: Vec<f64> = concept_vector(seed, c.forms[0], Some(c.class), CONTEXTUAL_DIMS)
                            .into_iter()
                            .map(|x| x + r.random_range(-0.1..0.1))
                            .collect();
                        to_f32(&v)
                    })
                    .collect()
            };
            let entry = if rep == RepresentationId::MBert {
                let mut padded = rows;
                padded.extend(std::iter::repeat_n(vec![0.0f32; CONTEXTUAL_DIMS], 3));
                CacheEntry::TokenMatrix(padded)
            } else {
                let mut pooled = vec![0.0f64; CONTEXTUAL_DIMS];
                for row in &rows {
                    for (p, x) in pooled.iter_mut().zip(row) {
                        *p += f64::from(*x) / rows.len() as f64;
                    }
                }
                CacheEntry::Pooled(to_f32(&pooled))
            };
            cache.insert(m.id.clone(), entry.clone())?;
            // translated copies used as test negatives carry the same concepts
            if m.language == PIVOT_LANGUAGE && m.label == LabelClass::NotRelated {
                for lang in LANGS.iter().skip(1) {
                    cache.insert(format!("{}@{lang}", m.id), entry.clone())?;
                }
            }
        }
        caches.insert(rep, cache);
    }

    let mut dictionary = DictionaryTranslator::new();
    let mut dictionary_rows = Vec::new();
    for (li, lang) in LANGS.iter().enumerate().skip(1) {
        for c in CONCEPTS {
            for (src, tgt, w, t) in [
                (*lang, PIVOT_LANGUAGE, c.forms[li], c.forms[0]),
                (PIVOT_LANGUAGE, *lang, c.forms[0], c.forms[li]),
            ] {
                dictionary.add(src, tgt, w, t);
                dictionary_rows.push([src.to_string(), tgt.to_string(), w.to_string(), t.to_string()]);
            }
        }
    }
    Ok(SyntheticResources {
        glove,
        muse,
        caches,
        dictionary,
        dictionary_rows,
    })
}

impl SyntheticResources {
    /// Pipeline resources using the dictionary as translator.
    pub fn to_resources(&self) -> Resources {
        Resources {
            glove: Some(Arc::new(self.glove.clone())),
            muse: self.muse.iter().map(|(k, v)| (k.clone(), Arc::new(v.clone()))).collect(),
            caches: self.caches.iter().map(|(k, v)| (*k, Arc::new(v.clone()))).collect(),
            translator: Some(Arc::new(self.dictionary.clone())),
            ..Resources::default()
        }
    }
}

/// Locations of the files written by [`write_fixture`].
#[derive(Debug, Clone, PartialEq)]
pub struct FixturePaths {
    pub corpus: PathBuf,
    pub glove: PathBuf,
    pub muse: BTreeMap<String, PathBuf>,
    pub caches: BTreeMap<RepresentationId, PathBuf>,
    pub dictionary: PathBuf,
    pub translation_cache: PathBuf,
}

fn write_vectors(table: &VectorTable, path: &Path) -> Result<()> {
    let mut tokens: Vec<&String> = table.entries.keys().collect();
    tokens.sort();
    let mut out = format!("{} {}\n", tokens.len(), table.dims);
    for t in tokens {
        out.push_str(t);
        for x in &table.entries[t] {
            out.push(' ');
            out.push_str(&x.to_string());
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Writes a complete synthetic experiment into `dir`: corpus, word and
/// aligned vectors, contextual caches, a translation dictionary and a
/// translation cache already holding every translation the pipeline needs.
pub fn write_fixture(dir: &Path, cfg: &SyntheticConfig) -> Result<FixturePaths> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let corpus = synthetic_corpus(cfg)?;
    let res = synthetic_resources(&corpus, cfg.seed)?;

    let corpus_path = dir.join("corpus.jsonl");
    save_corpus(&corpus, &corpus_path, CorpusFormat::UnifiedJsonLines)?;
    let glove = dir.join("glove.txt");
    write_vectors(&res.glove, &glove)?;
    let mut muse = BTreeMap::new();
    for (lang, t) in &res.muse {
        let p = dir.join(format!("muse_{lang}.txt"));
        write_vectors(t, &p)?;
        muse.insert(lang.clone(), p);
    }
    let mut caches = BTreeMap::new();
    for (rep, c) in &res.caches {
        let p = dir.join(format!("cache_{}.jsonl", rep.key()));
        c.save(&p)?;
        caches.insert(*rep, p);
    }
    let dictionary = dir.join("dictionary.csv");
    let mut w = csv::Writer::from_path(&dictionary)?;
    w.write_record(["source", "target", "word", "translation"])?;
    for row in &res.dictionary_rows {
        w.write_record(row)?;
    }
    w.flush().map_err(|e| Error::io(&dictionary, e))?;

    // freeze every translation: messages into the pivot, pivot negatives out
    let translation_cache = dir.join("translations.jsonl");
    if translation_cache.exists() {
        std::fs::remove_file(&translation_cache).map_err(|e| Error::io(&translation_cache, e))?;
    }
    let cached = CachedTranslator::open(&translation_cache, Some(Box::new(res.dictionary.clone())))?;
    for m in &corpus.messages {
        if m.language != PIVOT_LANGUAGE {
            cached.translate(&m.text, &m.language, PIVOT_LANGUAGE)?;
        } else if m.label == LabelClass::NotRelated {
            for lang in cfg.languages.iter().filter(|l| l.as_str() != PIVOT_LANGUAGE) {
                cached.translate(&m.text, PIVOT_LANGUAGE, lang)?;
            }
        }
    }
    Ok(FixturePaths {
        corpus: corpus_path,
        glove,
        muse,
        caches,
        dictionary,
        translation_cache,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_shape_and_determinism() {
        let cfg = SyntheticConfig::default();
        let c = synthetic_corpus(&cfg).unwrap();
        assert_eq!(c.events.len(), 18);
        assert_eq!(c.content_hash(), synthetic_corpus(&cfg).unwrap().content_hash());
        let (p, n) = c.class_counts();
        assert!(p > n && n > 0);
        assert!(crate::corpus::validate_corpus(&c).is_empty());
    }

    #[test]
    fn resources_cover_every_message() {
        let c = synthetic_corpus(&SyntheticConfig::default()).unwrap();
        let r = synthetic_resources(&c, 7).unwrap();
        for cache in r.caches.values() {
            assert!(c.messages.iter().all(|m| cache.entries.contains_key(&m.id)));
        }
        assert_eq!(r.muse.len(), 3);
        assert_eq!(
            r.dictionary.translate("terremoto ayuda", "es", PIVOT_LANGUAGE).unwrap(),
            "earthquake help"
        );
    }
}
