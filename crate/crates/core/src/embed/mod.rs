//! Embedding-based representations and representation dispatch.

mod contextual;
mod translate;
mod vectors;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use contextual::{pool_contextual, CacheEntry, ContextualCache};
pub use translate::{text_hash, CachedTranslator, DictionaryTranslator, Translator};
pub use vectors::{embed_mean, embed_mean_with, load_word_vectors, OovPolicy, VectorTable};

use crate::corpus::Message;
use crate::error::{Error, Result};
use crate::lingfeat::{extract_feature_matrix, tokenize, AnnotatorBundle, Normalization, FEATURE_COUNT};
use crate::matrix::FeatureMatrix;

pub const PIVOT_LANGUAGE: &str = "en";
pub const GLOVE_DIMS: usize = 100;
pub const MUSE_DIMS: usize = 300;
pub const CONTEXTUAL_DIMS: usize = 768;
/// Key of the MUSE table used for languages without their own table.
pub const ANY_LANGUAGE: &str = "*";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RepresentationId {
    #[serde(rename = "lf")]
    Lf,
    #[serde(rename = "mt_glove")]
    MtGlove,
    #[serde(rename = "muse")]
    Muse,
    #[serde(rename = "muse_lf")]
    MuseLf,
    #[serde(rename = "mbert")]
    MBert,
    #[serde(rename = "mt_bert")]
    MtBert,
    #[serde(rename = "xlm_r")]
    XlmR,
}

impl RepresentationId {
    pub const ALL: [RepresentationId; 7] = [
        RepresentationId::Lf,
        RepresentationId::MtGlove,
        RepresentationId::Muse,
        RepresentationId::MuseLf,
        RepresentationId::MBert,
        RepresentationId::MtBert,
        RepresentationId::XlmR,
    ];

    pub fn width(self) -> usize {
        match self {
            RepresentationId::Lf => FEATURE_COUNT,
            RepresentationId::MtGlove => GLOVE_DIMS,
            RepresentationId::Muse => MUSE_DIMS,
            RepresentationId::MuseLf => MUSE_DIMS + FEATURE_COUNT,
            RepresentationId::MBert | RepresentationId::MtBert | RepresentationId::XlmR => CONTEXTUAL_DIMS,
        }
    }

    /// Short identifier used in file names and configuration.
    pub fn key(self) -> &'static str {
        match self {
            RepresentationId::Lf => "lf",
            RepresentationId::MtGlove => "mt_glove",
            RepresentationId::Muse => "muse",
            RepresentationId::MuseLf => "muse_lf",
            RepresentationId::MBert => "mbert",
            RepresentationId::MtBert => "mt_bert",
            RepresentationId::XlmR => "xlm_r",
        }
    }

    pub fn is_contextual(self) -> bool {
        matches!(self, RepresentationId::MBert | RepresentationId::MtBert | RepresentationId::XlmR)
    }
}

impl fmt::Display for RepresentationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RepresentationId::Lf => "LF",
            RepresentationId::MtGlove => "MT_GloVe",
            RepresentationId::Muse => "MUSE",
            RepresentationId::MuseLf => "MUSE_LF",
            RepresentationId::MBert => "mBERT",
            RepresentationId::MtBert => "MT_BERT",
            RepresentationId::XlmR => "XLM_R",
        })
    }
}

impl FromStr for RepresentationId {
    type Err = String;

    /// Accepts the key or display name in any case, with `-`, `_` or `+`
    /// as separators.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let norm: String = s
            .trim()
            .to_lowercase()
            .chars()
            .map(|c| if c == '-' || c == '+' { '_' } else { c })
            .collect();
        RepresentationId::ALL
            .into_iter()
            .find(|r| r.key() == norm)
            .ok_or_else(|| format!("unknown representation `{s}`"))
    }
}

/// Everything the representations may need. Only the parts required by the
/// requested representation have to be present.
#[derive(Clone, Default)]
pub struct Resources {
    pub glove: Option<Arc<VectorTable>>,
    /// Aligned tables by language code; [`ANY_LANGUAGE`] is the fallback.
    pub muse: BTreeMap<String, Arc<VectorTable>>,
    pub caches: BTreeMap<RepresentationId, Arc<ContextualCache>>,
    pub annotators: AnnotatorBundle,
    pub translator: Option<Arc<dyn Translator>>,
    pub oov: OovPolicy,
}

impl fmt::Debug for Resources {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Resources")
            .field("glove", &self.glove.as_ref().map(|t| &t.name))
            .field("muse", &self.muse.keys().collect::<Vec<_>>())
            .field("caches", &self.caches.keys().collect::<Vec<_>>())
            .field("translator", &self.translator.is_some())
            .field("oov", &self.oov)
            .finish()
    }
}

impl Resources {
    fn muse_table(&self, language: &str) -> Option<&VectorTable> {
        self.muse
            .get(language)
            .or_else(|| self.muse.get(ANY_LANGUAGE))
            .map(Arc::as_ref)
    }
}

fn missing(rep: RepresentationId, resource: impl Into<String>) -> Error {
    Error::MissingResource {
        representation: rep.to_string(),
        resource: resource.into(),
    }
}

fn check_dims(rep: RepresentationId, what: &str, found: usize, expected: usize) -> Result<()> {
    if found == expected {
        Ok(())
    } else {
        Err(Error::WidthMismatch { expected, found }.context(format!("{rep} {what}")))
    }
}

/// Text to embed in the pivot language: the original for pivot-language
/// messages, otherwise the stored translation or one obtained from the
/// translator. Messages that cannot be translated are listed in the error.
pub fn pivot_texts(messages: &[Message], translator: Option<&dyn Translator>) -> Result<Vec<String>> {
    let mut texts = Vec::with_capacity(messages.len());
    let mut absent = Vec::new();
    for m in messages {
        if m.language == PIVOT_LANGUAGE {
            texts.push(m.text.clone());
        } else if let Some(t) = &m.translated_text {
            texts.push(t.clone());
        } else if let Some(tr) = translator {
            texts.push(tr.translate(&m.text, &m.language, PIVOT_LANGUAGE)?);
        } else {
            absent.push(m.id.clone());
        }
    }
    if absent.is_empty() {
        Ok(texts)
    } else {
        Err(Error::MissingTranslations(absent))
    }
}

/// Fills `translated_text` for every non-pivot message that lacks one.
pub fn translate_messages(messages: &mut [Message], translator: &dyn Translator) -> Result<usize> {
    let mut n = 0;
    for m in messages.iter_mut() {
        if m.language != PIVOT_LANGUAGE && m.translated_text.is_none() {
            m.translated_text = Some(translator.translate(&m.text, &m.language, PIVOT_LANGUAGE)?);
            n += 1;
        }
    }
    Ok(n)
}

fn muse_matrix(messages: &[Message], resources: &Resources, rep: RepresentationId) -> Result<FeatureMatrix> {
    if resources.muse.is_empty() {
        return Err(missing(rep, "aligned word vectors (muse)"));
    }
    let mut absent: Vec<&str> = messages
        .iter()
        .filter(|m| resources.muse_table(&m.language).is_none())
        .map(|m| m.language.as_str())
        .collect();
    absent.sort_unstable();
    absent.dedup();
    if !absent.is_empty() {
        return Err(missing(rep, format!("aligned word vectors for language(s) {}", absent.join(", "))));
    }
    for t in resources.muse.values() {
        check_dims(rep, "aligned table", t.dims, MUSE_DIMS)?;
    }
    let rows = messages
        .par_iter()
        .map(|m| {
            let table = resources.muse_table(&m.language).expect("checked above");
            embed_mean_with(&tokenize(&m.text, Normalization::Placeholdered), table, resources.oov)
        })
        .collect();
    FeatureMatrix::new(
        FeatureMatrix::numbered_columns("muse", MUSE_DIMS),
        messages.iter().map(|m| m.id.clone()).collect(),
        rows,
    )
}

fn lf_matrix(messages: &[Message], resources: &Resources) -> Result<FeatureMatrix> {
    let (m, warnings) = extract_feature_matrix(messages, &resources.annotators)?;
    if !warnings.is_empty() {
        log::warn!(
            "linguistic features: {} annotator warning(s), first: {}",
            warnings.len(),
            warnings[0]
        );
    }
    Ok(m)
}

/// Builds the feature matrix of `rep` for `messages`; row `i` is message `i`.
pub fn build_representation(
    messages: &[Message],
    rep: RepresentationId,
    resources: &Resources,
) -> Result<FeatureMatrix> {
    let ids = || messages.iter().map(|m| m.id.clone()).collect::<Vec<_>>();
    match rep {
        RepresentationId::Lf => lf_matrix(messages, resources),
        RepresentationId::Muse => muse_matrix(messages, resources, rep),
        RepresentationId::MuseLf => muse_matrix(messages, resources, rep)?.hconcat(lf_matrix(messages, resources)?),
        RepresentationId::MtGlove => {
            let table = resources.glove.as_deref().ok_or_else(|| missing(rep, "word vectors (glove)"))?;
            check_dims(rep, "word vectors", table.dims, GLOVE_DIMS)?;
            let texts = pivot_texts(messages, resources.translator.as_deref())?;
            let rows = texts
                .par_iter()
                .map(|t| embed_mean_with(&tokenize(t, Normalization::Placeholdered), table, resources.oov))
                .collect();
            FeatureMatrix::new(FeatureMatrix::numbered_columns("glove", GLOVE_DIMS), ids(), rows)
        }
        RepresentationId::MBert | RepresentationId::MtBert | RepresentationId::XlmR => {
            let cache = resources
                .caches
                .get(&rep)
                .ok_or_else(|| missing(rep, format!("contextual cache ({})", rep.key())))?;
            check_dims(rep, "contextual cache", cache.dims, CONTEXTUAL_DIMS)?;
            let rows = messages
                .par_iter()
                .map(|m| cache.pool(&m.id))
                .collect::<Result<Vec<_>>>()?;
            FeatureMatrix::new(FeatureMatrix::numbered_columns(rep.key(), CONTEXTUAL_DIMS), ids(), rows)
        }
    }
}
