//! Passage segmentation and query-term passage scoring.

use std::collections::HashMap;

use crate::corpus::Document;
use crate::index::InvertedIndex;
use crate::text::tokenize;

#[derive(Debug, Clone, PartialEq)]
pub struct Passage {
    pub doc_id: String,
    /// Byte span in the document text.
    pub char_span: (usize, usize),
    pub text: String,
    pub sentence_count: usize,
    pub passage_score: f64,
}

/// Sentence windowing used when a document has no paragraph markup.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Windowing {
    pub window: usize,
    pub stride: usize,
}

impl Default for Windowing {
    fn default() -> Self {
        Self { window: 3, stride: 2 }
    }
}

/// Sentence spans within `text`. A sentence ends at `.`, `?` or `!` when
/// followed by whitespace and then an uppercase letter. Spans exclude
/// surrounding whitespace.
pub fn split_sentences(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = 0;
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (at, c) = chars[i];
        if matches!(c, '.' | '?' | '!') {
            let mut j = i + 1;
            while j < chars.len() && chars[j].1.is_whitespace() {
                j += 1;
            }
            if j > i + 1 && j < chars.len() && chars[j].1.is_uppercase() {
                push_trimmed(text, start, at + c.len_utf8(), &mut spans);
                start = chars[j].0;
                i = j;
                continue;
            }
        }
        i += 1;
    }
    push_trimmed(text, start, text.len(), &mut spans);
    spans
}

fn push_trimmed(text: &str, start: usize, end: usize, spans: &mut Vec<(usize, usize)>) {
    let slice = &text[start..end];
    let lead = slice.len() - slice.trim_start().len();
    let trimmed = slice.trim();
    if !trimmed.is_empty() {
        spans.push((start + lead, start + lead + trimmed.len()));
    }
}

/// Paragraphs when the document has them, otherwise overlapping windows of
/// sentences. The last window may be shorter than `window`.
pub fn segment_passages(doc: &Document, windowing: Windowing) -> Vec<Passage> {
    let make = |(s, e): (usize, usize), sentence_count: usize| Passage {
        doc_id: doc.doc_id.clone(),
        char_span: (s, e),
        text: doc.text[s..e].to_string(),
        sentence_count,
        passage_score: 0.0,
    };
    if !doc.paragraph_spans.is_empty() {
        return doc
            .paragraph_spans
            .iter()
            .filter(|(s, e)| e > s)
            .map(|&span| make(span, split_sentences(&doc.text[span.0..span.1]).len()))
            .collect();
    }
    let sentences = split_sentences(&doc.text);
    let window = windowing.window.max(1);
    let stride = windowing.stride.max(1);
    let mut passages = Vec::new();
    let mut first = 0;
    while first < sentences.len() {
        let last = (first + window).min(sentences.len());
        passages.push(make((sentences[first].0, sentences[last - 1].1), last - first));
        if last == sentences.len() {
            break;
        }
        first += stride;
    }
    passages
}

/// `sum over matched terms of idf(t) * (1 + ln count(t)) + coverage_weight * matched / |query|`.
pub fn score_passage(
    text: &str,
    query_terms: &[String],
    index: &InvertedIndex,
    coverage_weight: f64,
) -> f64 {
    if query_terms.is_empty() {
        return 0.0;
    }
    let mut counts: HashMap<String, u32> = HashMap::new();
    for tok in tokenize(text) {
        *counts.entry(tok.surface).or_default() += 1;
    }
    let mut score = 0.0;
    let mut matched = 0usize;
    let mut seen: Vec<&str> = Vec::new();
    for term in query_terms {
        if seen.contains(&term.as_str()) {
            continue;
        }
        seen.push(term);
        if let Some(&n) = counts.get(term.as_str()) {
            matched += 1;
            score += index.idf(term) * (1.0 + (n as f64).ln());
        }
    }
    score + coverage_weight * matched as f64 / seen.len() as f64
}
