//! Character trigram language identification.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use once_regex::CLEANUP;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};

const BUNDLED: &[(&str, &str)] = &[
    ("de", include_str!("../../data/profiles/de.txt")),
    ("en", include_str!("../../data/profiles/en.txt")),
    ("es", include_str!("../../data/profiles/es.txt")),
    ("fr", include_str!("../../data/profiles/fr.txt")),
    ("it", include_str!("../../data/profiles/it.txt")),
    ("pt", include_str!("../../data/profiles/pt.txt")),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageGuess {
    pub code: String,
    pub confidence: f64,
}

/// Anything that can assign a language to a text.
pub trait LanguageDetector: Send + Sync {
    fn detect(&self, text: &str) -> Result<LanguageGuess>;
}

/// Unit-norm trigram frequency vector for one language.
#[derive(Debug, Clone)]
pub struct LanguageProfile {
    code: String,
    weights: BTreeMap<String, f64>,
}

impl LanguageProfile {
    pub fn from_text(code: &str, text: &str) -> Self {
        LanguageProfile {
            code: code.to_string(),
            weights: unit(trigram_counts(&clean(text))),
        }
    }

    pub fn code(&self) -> &str {
        &self.code
    }
}

#[derive(Debug, Clone, Default)]
pub struct ProfileDetector {
    // sorted by code so that ties resolve lexicographically
    profiles: BTreeMap<String, LanguageProfile>,
}

impl ProfileDetector {
    pub fn new(profiles: impl IntoIterator<Item = LanguageProfile>) -> Self {
        ProfileDetector {
            profiles: profiles.into_iter().map(|p| (p.code.clone(), p)).collect(),
        }
    }

    /// Profiles built from the seed texts bundled with the crate.
    pub fn bundled() -> Self {
        Self::new(
            BUNDLED
                .iter()
                .map(|(code, text)| LanguageProfile::from_text(code, text)),
        )
    }

    /// One profile per `<code>.txt` file in `dir`.
    pub fn from_dir(dir: &Path) -> Result<Self> {
        let mut profiles = Vec::new();
        let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
        for entry in entries {
            let path = entry.map_err(|e| Error::io(dir, e))?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("txt") {
                continue;
            }
            let code = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or_default()
                .to_string();
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            profiles.push(LanguageProfile::from_text(&code, &text));
        }
        Ok(Self::new(profiles))
    }

    pub fn codes(&self) -> impl Iterator<Item = &str> {
        self.profiles.keys().map(String::as_str)
    }
}

impl LanguageDetector for ProfileDetector {
    fn detect(&self, text: &str) -> Result<LanguageGuess> {
        detect_language(text, self)
    }
}

/// Highest cosine similarity between the text's trigram counts and each
/// profile. Confidence is that similarity.
pub fn detect_language(text: &str, profiles: &ProfileDetector) -> Result<LanguageGuess> {
    if profiles.profiles.is_empty() {
        return Err(Error::NoProfiles);
    }
    let cleaned = clean(text);
    if cleaned.chars().filter(|c| *c != ' ').count() < 3 {
        return Err(Error::InsufficientSignal);
    }
    let query = unit(trigram_counts(&cleaned));

    let mut best: Option<(&str, f64)> = None;
    for (code, profile) in &profiles.profiles {
        let score: f64 = query
            .iter()
            .filter_map(|(g, w)| profile.weights.get(g).map(|p| p * w))
            .sum();
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((code, score));
        }
    }
    let (code, score) = best.expect("at least one profile");
    Ok(LanguageGuess {
        code: code.to_string(),
        confidence: score.clamp(0.0, 1.0),
    })
}

/// Assigns a detected language to messages whose language is empty.
/// Returns the number of messages filled and the ids that could not be
/// detected.
pub fn fill_missing_languages(
    corpus: &mut Corpus,
    detector: &dyn LanguageDetector,
) -> (usize, Vec<String>) {
    let mut filled = 0;
    let mut failed = Vec::new();
    for m in corpus.messages.iter_mut().filter(|m| m.language.trim().is_empty()) {
        match detector.detect(&m.text) {
            Ok(guess) => {
                m.language = guess.code;
                filled += 1;
            }
            Err(_) => failed.push(m.id.clone()),
        }
    }
    (filled, failed)
}

/// Languages assigned by an external tool, keyed by message id.
#[derive(Debug, Clone, Default)]
pub struct PrecomputedLanguages {
    pub by_id: HashMap<String, String>,
}

impl PrecomputedLanguages {
    /// Reads a `id,language` table.
    pub fn load(path: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            id: String,
            language: String,
        }
        let mut r = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::from(e).context(path.display().to_string()))?;
        let mut by_id = HashMap::new();
        for row in r.deserialize::<Row>() {
            let row = row?;
            by_id.insert(row.id, row.language);
        }
        Ok(PrecomputedLanguages { by_id })
    }

    /// Copies languages onto messages with an empty language; returns how many.
    pub fn apply(&self, corpus: &mut Corpus) -> usize {
        let mut n = 0;
        for m in corpus.messages.iter_mut().filter(|m| m.language.trim().is_empty()) {
            if let Some(code) = self.by_id.get(&m.id) {
                m.language = code.clone();
                n += 1;
            }
        }
        n
    }
}

mod once_regex {
    use regex::Regex;
    use std::sync::LazyLock;

    pub static CLEANUP: LazyLock<Regex> =
        LazyLock::new(|| Regex::new(r"(?i)https?://\S+|www\.\S+|@\w+").unwrap());
}

/// Lowercased letters only, single spaces between words.
fn clean(text: &str) -> String {
    let stripped = CLEANUP.replace_all(text, " ");
    let mut out = String::with_capacity(stripped.len());
    let mut last_space = true;
    for c in stripped.chars().flat_map(char::to_lowercase) {
        if c.is_alphabetic() {
            out.push(c);
            last_space = false;
        } else if !last_space {
            out.push(' ');
            last_space = true;
        }
    }
    if out.ends_with(' ') {
        out.pop();
    }
    out
}

fn trigram_counts(cleaned: &str) -> BTreeMap<String, f64> {
    let mut counts = BTreeMap::new();
    for word in cleaned.split(' ').filter(|w| !w.is_empty()) {
        let padded: Vec<char> = std::iter::once(' ')
            .chain(word.chars())
            .chain(std::iter::once(' '))
            .collect();
        for w in padded.windows(3) {
            *counts.entry(w.iter().collect::<String>()).or_insert(0.0) += 1.0;
        }
    }
    counts
}

fn unit(mut v: BTreeMap<String, f64>) -> BTreeMap<String, f64> {
    let norm = v.values().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.values_mut().for_each(|x| *x /= norm);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spanish_and_english_examples() {
        let d = ProfileDetector::bundled();
        let es = d
            .detect("terremoto ahora en la ciudad, mucha gente en la calle")
            .unwrap();
        assert_eq!(es.code, "es");
        let en = d
            .detect("Awakened by the earthquake, it will not be a good day for many.")
            .unwrap();
        assert_eq!(en.code, "en");
        assert!(en.confidence > 0.0 && en.confidence <= 1.0);
    }

    #[test]
    fn empty_text_has_no_signal() {
        let d = ProfileDetector::bundled();
        assert!(matches!(d.detect(""), Err(Error::InsufficientSignal)));
        assert!(matches!(d.detect("@user http://t.co/x 12"), Err(Error::InsufficientSignal)));
    }

    #[test]
    fn no_profiles_is_an_error() {
        let d = ProfileDetector::default();
        assert!(matches!(d.detect("hello world"), Err(Error::NoProfiles)));
    }

    #[test]
    fn ties_go_to_the_smaller_code() {
        let d = ProfileDetector::new([
            LanguageProfile::from_text("xb", "abc abc"),
            LanguageProfile::from_text("xa", "abc abc"),
        ]);
        assert_eq!(d.detect("abc").unwrap().code, "xa");
    }

    #[test]
    fn detection_is_deterministic() {
        let d = ProfileDetector::bundled();
        let t = "inondazione in città, strade chiuse";
        assert_eq!(d.detect(t).unwrap(), d.detect(t).unwrap());
    }

    #[test]
    fn cleanup_strips_urls_mentions_and_digits() {
        assert_eq!(clean("RT @a: Hola 123 http://x.y/z ¡Mundo!"), "rt hola mundo");
    }
}
