//! Language-specific annotators used by the linguistic feature extractor.
//! The defaults are lexicon and rule based; any statistical tagger can be
//! plugged in through the same traits.

use std::sync::Arc;

use thiserror::Error;

use super::lexicon::{lexicon, Lexicon};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnnotatorError {
    #[error("language `{0}` is not supported")]
    UnsupportedLanguage(String),
    #[error("{0}")]
    Failed(String),
}

/// What an annotator sees: the original text, its language and the raw
/// (case-preserving) token stream.
#[derive(Debug, Clone)]
pub struct AnnotatorInput<'a> {
    pub text: &'a str,
    pub language: &'a str,
    pub tokens: &'a [&'a str],
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SentimentCounts {
    pub positive: u32,
    pub negative: u32,
    pub polarity: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EntityCounts {
    pub person: u32,
    pub location: u32,
    pub organization: u32,
}

impl EntityCounts {
    pub fn total(&self) -> u32 {
        self.person + self.location + self.organization
    }
}

/// Coarse 12-tag part-of-speech tagset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoarseTag {
    Noun,
    Verb,
    Adj,
    Adv,
    Pron,
    Det,
    Adp,
    Num,
    Conj,
    Prt,
    Punct,
    X,
}

impl CoarseTag {
    pub const ALL: [CoarseTag; 12] = [
        CoarseTag::Noun,
        CoarseTag::Verb,
        CoarseTag::Adj,
        CoarseTag::Adv,
        CoarseTag::Pron,
        CoarseTag::Det,
        CoarseTag::Adp,
        CoarseTag::Num,
        CoarseTag::Conj,
        CoarseTag::Prt,
        CoarseTag::Punct,
        CoarseTag::X,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PosCounts(pub [u32; 12]);

impl PosCounts {
    pub fn get(&self, tag: CoarseTag) -> u32 {
        self.0[tag.index()]
    }
}

pub trait SentimentAnnotator: Send + Sync {
    fn sentiment(&self, input: &AnnotatorInput<'_>) -> Result<SentimentCounts, AnnotatorError>;
}

pub trait EntityAnnotator: Send + Sync {
    fn entities(&self, input: &AnnotatorInput<'_>) -> Result<EntityCounts, AnnotatorError>;
}

pub trait PosTagger: Send + Sync {
    fn tags(&self, input: &AnnotatorInput<'_>) -> Result<PosCounts, AnnotatorError>;
}

#[derive(Clone)]
pub struct AnnotatorBundle {
    pub sentiment: Arc<dyn SentimentAnnotator>,
    pub ner: Arc<dyn EntityAnnotator>,
    pub pos: Arc<dyn PosTagger>,
}

impl Default for AnnotatorBundle {
    fn default() -> Self {
        AnnotatorBundle {
            sentiment: Arc::new(LexiconSentiment),
            ner: Arc::new(GazetteerNer),
            pos: Arc::new(SuffixPosTagger),
        }
    }
}

impl std::fmt::Debug for AnnotatorBundle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("AnnotatorBundle")
    }
}

fn lexicon_for(language: &str) -> Result<&'static Lexicon, AnnotatorError> {
    lexicon(language).ok_or_else(|| AnnotatorError::UnsupportedLanguage(language.to_string()))
}

pub(crate) fn is_word(token: &str) -> bool {
    token.chars().next().is_some_and(char::is_alphanumeric)
}

/// Counts positive and negative lexicon words; polarity is
/// (pos - neg) / (pos + neg), 0 without sentiment words.
#[derive(Debug, Clone, Copy, Default)]
pub struct LexiconSentiment;

impl SentimentAnnotator for LexiconSentiment {
    fn sentiment(&self, input: &AnnotatorInput<'_>) -> Result<SentimentCounts, AnnotatorError> {
        let lex = lexicon_for(input.language)?;
        let (mut positive, mut negative) = (0u32, 0u32);
        for t in input.tokens.iter().filter(|t| is_word(t)) {
            let w = t.to_lowercase();
            if lex.positive.contains(w.as_str()) {
                positive += 1;
            }
            if lex.negative.contains(w.as_str()) {
                negative += 1;
            }
        }
        let polarity = if positive + negative == 0 {
            0.0
        } else {
            (f64::from(positive) - f64::from(negative)) / f64::from(positive + negative)
        };
        Ok(SentimentCounts {
            positive,
            negative,
            polarity,
        })
    }
}

/// Gazetteer lookup for locations and organizations; remaining runs of two
/// or more capitalized words away from sentence starts count as persons.
#[derive(Debug, Clone, Copy, Default)]
pub struct GazetteerNer;

fn capitalized(token: &str) -> bool {
    token.chars().next().is_some_and(char::is_uppercase)
}

impl EntityAnnotator for GazetteerNer {
    fn entities(&self, input: &AnnotatorInput<'_>) -> Result<EntityCounts, AnnotatorError> {
        let lex = lexicon_for(input.language)?;
        let tokens = input.tokens;
        let lower: Vec<String> = tokens.iter().map(|t| t.to_lowercase()).collect();
        let mut counts = EntityCounts::default();
        let mut i = 0;
        while i < tokens.len() {
            if !is_word(tokens[i]) || !capitalized(tokens[i]) {
                i += 1;
                continue;
            }
            let matches = |name: &Vec<&str>| {
                name.len() <= tokens.len() - i
                    && name.iter().zip(&lower[i..]).all(|(a, b)| *a == b.as_str())
            };
            let org = lex.organizations.iter().find(|n| matches(n)).map(Vec::len);
            let loc = lex.locations.iter().find(|n| matches(n)).map(Vec::len);
            match (org, loc) {
                (Some(o), l) if o >= l.unwrap_or(0) => {
                    counts.organization += 1;
                    i += o;
                }
                (_, Some(l)) => {
                    counts.location += 1;
                    i += l;
                }
                _ => {
                    let sentence_start = i == 0
                        || matches!(tokens[i - 1], "." | "!" | "?" | ":" | "¿" | "¡");
                    let mut j = i;
                    while j < tokens.len()
                        && is_word(tokens[j])
                        && capitalized(tokens[j])
                        && !lex.stopwords.contains(lower[j].as_str())
                    {
                        j += 1;
                    }
                    if !sentence_start && j - i >= 2 {
                        counts.person += 1;
                    }
                    i = j.max(i + 1);
                }
            }
        }
        Ok(counts)
    }
}

/// Function-word lists plus suffix rules.
#[derive(Debug, Clone, Copy, Default)]
pub struct SuffixPosTagger;

fn is_emoji(c: char) -> bool {
    matches!(u32::from(c),
        0x1F000..=0x1FAFF | 0x2600..=0x27BF | 0x2B00..=0x2BFF | 0xFE0F | 0x200D)
}

pub(crate) fn tag_token(token: &str, lex: &Lexicon) -> CoarseTag {
    let lower = token.to_lowercase();
    let w = lower.as_str();
    if w.starts_with("http") || w.starts_with("www.") || w.starts_with('@') || w.starts_with('#') {
        return CoarseTag::X;
    }
    if !is_word(token) {
        return if token.chars().any(is_emoji) {
            CoarseTag::X
        } else {
            CoarseTag::Punct
        };
    }
    if w.chars().all(|c| c.is_ascii_digit() || c == '.' || c == ',') {
        return CoarseTag::Num;
    }
    if lex.determiners.contains(w) {
        CoarseTag::Det
    } else if lex.pronouns.contains(w) {
        CoarseTag::Pron
    } else if lex.adpositions.contains(w) {
        CoarseTag::Adp
    } else if lex.conjunctions.contains(w) {
        CoarseTag::Conj
    } else if lex.particles.contains(w) {
        CoarseTag::Prt
    } else if lex.auxiliaries.contains(w) {
        CoarseTag::Verb
    } else if lex.adv_suffixes.iter().any(|s| w.len() > s.len() + 2 && w.ends_with(s)) {
        CoarseTag::Adv
    } else if lex.verb_suffixes.iter().any(|s| w.len() > s.len() + 2 && w.ends_with(s)) {
        CoarseTag::Verb
    } else if lex.adj_suffixes.iter().any(|s| w.len() > s.len() + 2 && w.ends_with(s)) {
        CoarseTag::Adj
    } else {
        CoarseTag::Noun
    }
}

impl PosTagger for SuffixPosTagger {
    fn tags(&self, input: &AnnotatorInput<'_>) -> Result<PosCounts, AnnotatorError> {
        let lex = lexicon_for(input.language)?;
        let mut counts = PosCounts::default();
        for t in input.tokens {
            counts.0[tag_token(t, lex).index()] += 1;
        }
        Ok(counts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn input<'a>(text: &'a str, language: &'a str, tokens: &'a [&'a str]) -> AnnotatorInput<'a> {
        AnnotatorInput { text, language, tokens }
    }

    #[test]
    fn sentiment_counts_and_polarity() {
        let toks = ["Thanks", "to", "the", "brave", "rescuers", ",", "many", "dead"];
        let s = LexiconSentiment.sentiment(&input("", "en", &toks)).unwrap();
        assert_eq!((s.positive, s.negative), (2, 1));
        assert!((s.polarity - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn unsupported_language_is_reported() {
        let toks = ["Hallo"];
        assert_eq!(
            LexiconSentiment.sentiment(&input("", "de", &toks)),
            Err(AnnotatorError::UnsupportedLanguage("de".into()))
        );
    }

    #[test]
    fn gazetteer_and_person_runs() {
        let toks = [
            "The", "Red", "Cross", "arrived", "in", "Quito", "with", "John", "Smith", "and", "the",
            "un", "team",
        ];
        let e = GazetteerNer.entities(&input("", "en", &toks)).unwrap();
        assert_eq!(e, EntityCounts { person: 1, location: 1, organization: 1 });
        assert_eq!(e.total(), 3);
    }

    #[test]
    fn pos_tags() {
        let lex = lexicon("es").unwrap();
        assert_eq!(tag_token("rápidamente", lex), CoarseTag::Adv);
        assert_eq!(tag_token("corriendo", lex), CoarseTag::Verb);
        assert_eq!(tag_token("la", lex), CoarseTag::Det);
        assert_eq!(tag_token("12", lex), CoarseTag::Num);
        assert_eq!(tag_token("!", lex), CoarseTag::Punct);
        assert_eq!(tag_token("#sismo", lex), CoarseTag::X);
        assert_eq!(tag_token("casa", lex), CoarseTag::Noun);
    }
}
