use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    Raw,
    /// Lowercased; URLs become `<url>`, mentions `<user>`, leading `RT` dropped.
    Placeholdered,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence {
    pub tokens: Vec<String>,
    pub normalization: Normalization,
}

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

pub const URL_TOKEN: &str = "<url>";
pub const USER_TOKEN: &str = "<user>";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum TokenKind {
    Url,
    Mention,
    Hashtag,
    Word,
    Symbol,
}

static TOKEN: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?xi)
        (?P<url>(?:https?://|www\.)\S+)
      | (?P<mention>@\w+)
      | (?P<hashtag>\#\w+)
      | (?P<word>[\p{L}\p{N}]+(?:['’][\p{L}\p{N}]+)*)
      | (?P<symbol>\S)",
    )
    .unwrap()
});

/// Splits text into typed raw tokens, in order.
pub(crate) fn raw_tokens(text: &str) -> Vec<(TokenKind, &str)> {
    TOKEN
        .captures_iter(text)
        .map(|c| {
            let (kind, m) = if let Some(m) = c.name("url") {
                (TokenKind::Url, m)
            } else if let Some(m) = c.name("mention") {
                (TokenKind::Mention, m)
            } else if let Some(m) = c.name("hashtag") {
                (TokenKind::Hashtag, m)
            } else if let Some(m) = c.name("word") {
                (TokenKind::Word, m)
            } else {
                (TokenKind::Symbol, c.name("symbol").expect("one group matches"))
            };
            (kind, m.as_str())
        })
        .collect()
}

/// Whether the message opens with a retweet marker (`RT` followed by a
/// mention or colon).
pub(crate) fn has_retweet_prefix(tokens: &[(TokenKind, &str)]) -> bool {
    matches!(
        tokens,
        [(TokenKind::Word, rt), (TokenKind::Mention, _) | (TokenKind::Symbol, ":"), ..]
            if rt.eq_ignore_ascii_case("rt")
    )
}

pub fn tokenize(text: &str, mode: Normalization) -> TokenSequence {
    let raw = raw_tokens(text);
    let tokens = match mode {
        Normalization::Raw => raw.iter().map(|(_, t)| t.to_string()).collect(),
        Normalization::Placeholdered => {
            let skip = usize::from(has_retweet_prefix(&raw));
            raw[skip..]
                .iter()
                .map(|(kind, t)| match kind {
                    TokenKind::Url => URL_TOKEN.to_string(),
                    TokenKind::Mention => USER_TOKEN.to_string(),
                    _ => t.to_lowercase(),
                })
                .collect()
        }
    };
    TokenSequence {
        tokens,
        normalization: mode,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn placeholdered_retweet() {
        let t = tokenize("RT @user1 Fire downtown! http://t.co/x", Normalization::Placeholdered);
        assert_eq!(t.tokens, ["<user>", "fire", "downtown", "!", "<url>"]);
    }

    #[test]
    fn empty_text() {
        assert!(tokenize("", Normalization::Raw).is_empty());
        assert!(tokenize("   ", Normalization::Placeholdered).is_empty());
    }

    #[test]
    fn raw_collapses_whitespace() {
        assert_eq!(tokenize("Hola   mundo", Normalization::Raw).tokens, ["Hola", "mundo"]);
    }

    #[test]
    fn raw_keeps_case_urls_and_rt() {
        let t = tokenize("RT @A: Go www.x.org #Help", Normalization::Raw);
        assert_eq!(t.tokens, ["RT", "@A", ":", "Go", "www.x.org", "#Help"]);
    }

    #[test]
    fn rt_inside_text_is_kept() {
        let t = tokenize("art RT rt", Normalization::Placeholdered);
        assert_eq!(t.tokens, ["art", "rt", "rt"]);
    }

    #[test]
    fn apostrophes_and_accents() {
        let t = tokenize("L'acqua è salita, ¿dónde?", Normalization::Placeholdered);
        assert_eq!(t.tokens, ["l'acqua", "è", "salita", ",", "¿", "dónde", "?"]);
    }

    #[test]
    fn placeholdered_has_no_raw_urls_or_mentions() {
        let t = tokenize("@a @b https://x.y/z?q=1 ok", Normalization::Placeholdered);
        assert!(t.tokens.iter().all(|t| !t.starts_with('@') && !t.starts_with("http")));
    }
}
