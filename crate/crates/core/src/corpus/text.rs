use std::collections::HashSet;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

/// Lowercased word tokens. Never contains empty tokens or whitespace.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenList(Vec<String>);

impl TokenList {
    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn into_tokens(self) -> Vec<String> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Tokens joined by single spaces; the canonical form used for facet
    /// comparison.
    pub fn joined(&self) -> String {
        self.0.join(" ")
    }

    pub fn iter(&self) -> std::slice::Iter<'_, String> {
        self.0.iter()
    }

    /// Whether `needle` occurs as a contiguous run of tokens.
    pub fn contains_sequence(&self, needle: &[String]) -> bool {
        if needle.is_empty() {
            return true;
        }
        self.0.windows(needle.len()).any(|w| w == needle)
    }
}

impl<'a> IntoIterator for &'a TokenList {
    type Item = &'a String;
    type IntoIter = std::slice::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

static STOPWORDS: OnceLock<HashSet<&'static str>> = OnceLock::new();

/// The bundled English stopword list.
pub fn stopwords() -> &'static HashSet<&'static str> {
    STOPWORDS.get_or_init(|| {
        include_str!("../../data/stopwords.txt")
            .lines()
            .map(str::trim)
            .filter(|w| !w.is_empty())
            .collect()
    })
}

pub fn is_stopword(token: &str) -> bool {
    stopwords().contains(token)
}

/// Tokenize `text`: lowercase, treat every non-alphanumeric character as a
/// separator, and optionally drop stopwords.
///
/// ```
/// use facetpool::normalize;
/// assert_eq!(normalize("Windows 10!", false).tokens(), ["windows", "10"]);
/// ```
pub fn normalize(text: &str, drop_stopwords: bool) -> TokenList {
    let lowered = text.to_lowercase();
    let tokens = lowered
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .filter(|t| !drop_stopwords || !is_stopword(t))
        .map(str::to_owned)
        .collect();
    TokenList(tokens)
}

/// `normalize(text, false).joined()`: the comparison key for whole facets.
pub fn canonical(text: &str) -> String {
    normalize(text, false).joined()
}
