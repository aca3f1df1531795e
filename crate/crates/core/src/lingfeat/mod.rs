//! Tokenization and the 48-feature linguistic representation (LF).

mod annotators;
mod lexicon;
mod schema;
mod tokenize;

use std::collections::HashSet;
use std::sync::LazyLock;

use rayon::prelude::*;
use regex::Regex;

pub use annotators::{
    AnnotatorBundle, AnnotatorError, AnnotatorInput, CoarseTag, EntityAnnotator, EntityCounts,
    GazetteerNer, LexiconSentiment, PosCounts, PosTagger, SentimentAnnotator, SentimentCounts,
    SuffixPosTagger,
};
pub use schema::{FeatureDef, FeatureKind, FeatureSchema, FEATURE_COUNT, SCHEMA_V1, SCHEMA_V1_CSV};
pub use tokenize::{tokenize, Normalization, TokenSequence, URL_TOKEN, USER_TOKEN};

use crate::corpus::Message;
use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;
use annotators::is_word;
use tokenize::{has_retweet_prefix, raw_tokens, TokenKind};

/// One message's features in schema order, plus any annotator warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub warnings: Vec<String>,
}

static URL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)(?:https?://|www\.)\S+").unwrap());
static PUNCT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\p{P}").unwrap());

fn is_emoji(c: char) -> bool {
    matches!(u32::from(c), 0x1F000..=0x1FAFF | 0x2600..=0x27BF | 0x2B00..=0x2BFF)
}

fn elongated(word: &str) -> bool {
    let chars: Vec<char> = word.chars().flat_map(char::to_lowercase).collect();
    chars.windows(3).any(|w| w[0] == w[1] && w[1] == w[2] && w[0].is_alphabetic())
}

fn all_caps(word: &str) -> bool {
    let letters: Vec<char> = word.chars().filter(|c| c.is_alphabetic()).collect();
    letters.len() >= 2 && letters.iter().all(|c| c.is_uppercase())
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn flag(b: bool) -> f64 {
    f64::from(u8::from(b))
}

/// Computes the v1 feature vector for one message. Annotator failures
/// (typically an unsupported language) leave the affected features at 0
/// and add a warning.
pub fn extract_linguistic_features(
    message: &Message,
    annotators: &AnnotatorBundle,
    schema: &FeatureSchema,
) -> Result<FeatureVector> {
    if schema.version != SCHEMA_V1 || schema != FeatureSchema::v1() {
        return Err(Error::SchemaMismatch(format!(
            "extractor implements {SCHEMA_V1}, got {}",
            schema.version
        )));
    }
    let text = message.text.as_str();
    let lang = message.language.as_str();
    let raw = raw_tokens(text);
    let tokens: Vec<&str> = raw.iter().map(|(_, t)| *t).collect();
    let words: Vec<&str> = raw
        .iter()
        .filter(|(k, _)| *k == TokenKind::Word)
        .map(|(_, t)| *t)
        .collect();
    let lower: Vec<String> = words.iter().map(|w| w.to_lowercase()).collect();
    let kind_count = |k: TokenKind| raw.iter().filter(|(kind, _)| *kind == k).count();
    let without_urls = URL.replace_all(text, " ");
    let mut warnings = Vec::new();

    let letters = text.chars().filter(|c| c.is_alphabetic()).count();
    let upper = text.chars().filter(|c| c.is_uppercase()).count();
    let word_lengths: Vec<usize> = words.iter().map(|w| w.chars().count()).collect();
    let digits = without_urls.chars().filter(char::is_ascii_digit).count();
    let questions = without_urls.matches('?').count();
    let exclamations = without_urls.matches('!').count();
    let urls = kind_count(TokenKind::Url);
    let mentions = kind_count(TokenKind::Mention);
    let hashtags = kind_count(TokenKind::Hashtag);

    let lex = lexicon::lexicon(lang);
    if lex.is_none() {
        warnings.push(format!("{}: no lexicon for language `{lang}`", message.id));
    }
    let stopwords = lex.map_or(0, |l| lower.iter().filter(|w| l.stopwords.contains(w.as_str())).count());
    let first_person = lex.map_or(0, |l| {
        lower.iter().filter(|w| l.first_person.contains(w.as_str())).count()
    });
    let distinct: HashSet<&str> = lower.iter().map(String::as_str).collect();

    let input = AnnotatorInput {
        text,
        language: lang,
        tokens: &tokens,
    };
    let mut note = |what: &str, e: AnnotatorError| warnings.push(format!("{}: {what}: {e}", message.id));
    let sentiment = annotators.sentiment.sentiment(&input).unwrap_or_else(|e| {
        note("sentiment", e);
        SentimentCounts::default()
    });
    let entities = annotators.ner.entities(&input).unwrap_or_else(|e| {
        note("ner", e);
        EntityCounts::default()
    });
    let pos = annotators.pos.tags(&input).unwrap_or_else(|e| {
        note("pos", e);
        PosCounts::default()
    });

    let cleaned = tokenize(text, Normalization::Placeholdered)
        .tokens
        .iter()
        .filter(|t| t.as_str() != URL_TOKEN && t.as_str() != USER_TOKEN && is_word(t.trim_start_matches('#')))
        .count();

    let mut v = Vec::with_capacity(FEATURE_COUNT);
    v.push(text.chars().count() as f64);
    v.push(words.len() as f64);
    v.push(ratio(word_lengths.iter().sum(), words.len()));
    v.push(ratio(upper, letters));
    v.push(digits as f64);
    v.push(PUNCT.find_iter(&without_urls).count() as f64);
    v.push(questions as f64);
    v.push(exclamations as f64);
    v.push(urls as f64);
    v.push(mentions as f64);
    v.push(hashtags as f64);
    v.push(text.chars().filter(|c| is_emoji(*c)).count() as f64);
    v.push(words.iter().filter(|w| elongated(w)).count() as f64);
    v.push(flag(has_retweet_prefix(&raw)));

    v.push(flag(urls > 0));
    v.push(flag(mentions > 0));
    v.push(flag(hashtags > 0));
    v.push(flag(questions > 0));
    v.push(flag(exclamations > 0));
    v.push(flag(digits > 0));
    v.push(flag(message.has_location_meta));
    v.push(flag(message.has_media_meta));

    v.push(ratio(stopwords, words.len()));
    v.push(ratio(distinct.len(), words.len()));
    v.push(word_lengths.iter().copied().max().unwrap_or(0) as f64);
    v.push(words.iter().filter(|w| all_caps(w)).count() as f64);
    v.push(first_person as f64);
    v.push(words.iter().filter(|w| w.chars().all(|c| c.is_numeric())).count() as f64);

    v.push(f64::from(sentiment.positive));
    v.push(f64::from(sentiment.negative));
    v.push(sentiment.polarity.clamp(-1.0, 1.0));

    v.push(f64::from(entities.person));
    v.push(f64::from(entities.location));
    v.push(f64::from(entities.organization));
    v.push(f64::from(entities.total()));

    v.extend(CoarseTag::ALL.iter().map(|t| f64::from(pos.get(*t))));
    v.push(cleaned as f64);

    debug_assert_eq!(v.len(), FEATURE_COUNT);
    Ok(FeatureVector { values: v, warnings })
}

/// Extracts features for every message in parallel; rows keep input order.
pub fn extract_feature_matrix(
    messages: &[Message],
    annotators: &AnnotatorBundle,
) -> Result<(FeatureMatrix, Vec<String>)> {
    let schema = FeatureSchema::v1();
    let vectors = messages
        .par_iter()
        .map(|m| extract_linguistic_features(m, annotators, schema))
        .collect::<Result<Vec<_>>>()?;
    let mut warnings = Vec::new();
    let mut rows = Vec::with_capacity(vectors.len());
    for fv in vectors {
        warnings.extend(fv.warnings);
        rows.push(fv.values);
    }
    let columns = schema.names().into_iter().map(str::to_string).collect();
    let ids = messages.iter().map(|m| m.id.clone()).collect();
    Ok((FeatureMatrix::new(columns, ids, rows)?, warnings))
}
