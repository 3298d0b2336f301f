//! Tokenization and the shipped stoplist.
//!
//! Tokens are maximal runs of alphanumeric characters, lowercased. Punctuation
//! never produces a token and no stemming is applied. Offsets are byte offsets
//! into the original UTF-8 string.

use std::collections::BTreeSet;

/// A lowercased term with its position in the token stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    /// 0-based index in the token stream of the text it came from.
    pub position: u32,
    /// Byte offset of the first character in the original text.
    pub char_offset: usize,
    /// Byte length of the original (un-lowercased) run.
    pub len: usize,
}

impl Token {
    pub fn end(&self) -> usize {
        self.char_offset + self.len
    }
}

/// Split `text` on every maximal run of non-alphanumeric characters.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut start: Option<usize> = None;
    let push = |from: usize, to: usize, tokens: &mut Vec<Token>| {
        let position = tokens.len() as u32;
        tokens.push(Token {
            surface: text[from..to].to_lowercase(),
            position,
            char_offset: from,
            len: to - from,
        });
    };
    for (i, c) in text.char_indices() {
        if c.is_alphanumeric() {
            if start.is_none() {
                start = Some(i);
            }
        } else if let Some(s) = start.take() {
            push(s, i, &mut tokens);
        }
    }
    if let Some(s) = start {
        push(s, text.len(), &mut tokens);
    }
    tokens
}

/// Lowercased surfaces only; convenience for callers that don't need offsets.
pub fn terms(text: &str) -> Vec<String> {
    tokenize(text).into_iter().map(|t| t.surface).collect()
}

/// Order-preserving filter. Positions are left untouched, so gaps remain.
pub fn remove_stopwords(tokens: &[Token], stoplist: &Stoplist) -> Vec<Token> {
    tokens
        .iter()
        .filter(|t| !stoplist.contains(&t.surface))
        .cloned()
        .collect()
}

/// The default English stoplist: 127 common function words.
pub const DEFAULT_STOPWORDS: [&str; 127] = [
    "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "your", "yours",
    "yourself", "yourselves", "he", "him", "his", "himself", "she", "her", "hers", "herself",
    "it", "its", "itself", "they", "them", "their", "theirs", "themselves", "what", "which",
    "who", "whom", "this", "that", "these", "those", "am", "is", "are", "was", "were", "be",
    "been", "being", "have", "has", "had", "having", "do", "does", "did", "doing", "a", "an",
    "the", "and", "but", "if", "or", "because", "as", "until", "while", "of", "at", "by",
    "for", "with", "about", "against", "between", "into", "through", "during", "before",
    "after", "above", "below", "to", "from", "up", "down", "in", "out", "on", "off", "over",
    "under", "again", "further", "then", "once", "here", "there", "when", "where", "why",
    "how", "all", "any", "both", "each", "few", "more", "most", "other", "some", "such", "no",
    "nor", "not", "only", "own", "same", "so", "than", "too", "very", "s", "t", "can", "will",
    "just", "don", "should", "now",
];

/// A set of lowercase terms excluded from queries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stoplist {
    words: BTreeSet<String>,
}

impl Stoplist {
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self {
            words: words.into_iter().map(|w| w.as_ref().to_lowercase()).collect(),
        }
    }

    pub fn contains(&self, term: &str) -> bool {
        self.words.contains(term)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

impl Default for Stoplist {
    fn default() -> Self {
        Self::new(DEFAULT_STOPWORDS)
    }
}
