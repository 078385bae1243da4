use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

/// Bundled English stop-word list, one word per line.
pub const DEFAULT_STOPWORDS: &str = include_str!("stopwords_en.txt");

const CONTINUATION_PREFIX: &str = "##";
const WORD_START_MARKERS: [char; 2] = ['\u{0120}', '\u{2581}'];

/// Decides which tokens carry content.
///
/// A token is kept when, after stripping sub-word markers (`##`, `Ġ`, `▁`),
/// it contains at least one alphanumeric character and is not a stop-word.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenFilter {
    stopwords: HashSet<String>,
    case_insensitive: bool,
    merge_subwords: bool,
}

impl Default for TokenFilter {
    fn default() -> Self {
        TokenFilter::builtin(true)
    }
}

fn parse_stoplist(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

fn strip_markers(token: &str) -> &str {
    let token = token.strip_prefix(CONTINUATION_PREFIX).unwrap_or(token);
    token.trim_start_matches(WORD_START_MARKERS)
}

impl TokenFilter {
    pub fn new<I, S>(stopwords: I, case_insensitive: bool) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let stopwords = stopwords
            .into_iter()
            .map(|w| {
                if case_insensitive {
                    w.as_ref().to_lowercase()
                } else {
                    w.as_ref().to_string()
                }
            })
            .collect();
        TokenFilter {
            stopwords,
            case_insensitive,
            merge_subwords: false,
        }
    }

    /// The bundled English stoplist.
    pub fn builtin(case_insensitive: bool) -> Self {
        TokenFilter::new(parse_stoplist(DEFAULT_STOPWORDS), case_insensitive)
    }

    /// A filter with an empty stoplist: only the alphanumeric test applies.
    pub fn without_stopwords() -> Self {
        TokenFilter::new(std::iter::empty::<&str>(), true)
    }

    /// Reads a stoplist file: one word per line, `#` comments, blank lines ignored.
    pub fn from_stoplist_file(
        path: impl AsRef<Path>,
        case_insensitive: bool,
    ) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(TokenFilter::new(parse_stoplist(&text), case_insensitive))
    }

    /// When enabled, `##` continuation pieces are judged together with the
    /// word they belong to, so every piece of a content word is kept.
    pub fn with_subword_merging(mut self, merge: bool) -> Self {
        self.merge_subwords = merge;
        self
    }

    pub fn case_insensitive(&self) -> bool {
        self.case_insensitive
    }

    pub fn merges_subwords(&self) -> bool {
        self.merge_subwords
    }

    pub fn stopword_count(&self) -> usize {
        self.stopwords.len()
    }

    /// Stable digest of the stoplist and flags, for configuration fingerprints.
    pub fn digest(&self) -> String {
        let mut words: Vec<&str> = self.stopwords.iter().map(String::as_str).collect();
        words.sort_unstable();
        let mut buf = format!(
            "case_insensitive={};merge_subwords={};",
            self.case_insensitive, self.merge_subwords
        );
        for w in words {
            buf.push_str(w);
            buf.push('\n');
        }
        crate::fingerprint::sha256_hex(buf.as_bytes())
    }

    fn is_stopword(&self, word: &str) -> bool {
        if self.case_insensitive {
            self.stopwords.contains(&word.to_lowercase())
        } else {
            self.stopwords.contains(word)
        }
    }

    /// Predicate on a single (already merged, marker-free) word.
    pub fn keeps(&self, word: &str) -> bool {
        let word = strip_markers(word);
        word.chars().any(char::is_alphanumeric) && !self.is_stopword(word)
    }
}

/// Indices of tokens that pass `filter`, in increasing order.
pub fn filter_tokens<S: AsRef<str>>(tokens: &[S], filter: &TokenFilter) -> Vec<usize> {
    if !filter.merge_subwords {
        return tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| filter.keeps(t.as_ref()))
            .map(|(i, _)| i)
            .collect();
    }

    let mut kept = Vec::new();
    let mut start = 0;
    while start < tokens.len() {
        let mut end = start + 1;
        while end < tokens.len() && tokens[end].as_ref().starts_with(CONTINUATION_PREFIX) {
            end += 1;
        }
        let word: String = tokens[start..end]
            .iter()
            .map(|t| strip_markers(t.as_ref()))
            .collect();
        if filter.keeps(&word) {
            kept.extend(start..end);
        }
        start = end;
    }
    kept
}
