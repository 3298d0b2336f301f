//! Candidate answer extraction conditioned on the expected answer type.
//!
//! | type                          | extractor                                  |
//! |-------------------------------|--------------------------------------------|
//! | `NUM:date`                    | date patterns                              |
//! | other `NUM:*`                 | quantity patterns                          |
//! | `NUM` (no fine label)         | date then quantity patterns                |
//! | `HUM:*`, `LOC:*`, `ENTY:*`    | capitalized-run recognizer                 |
//! | `ABBR:abb`                    | acronyms                                   |
//! | `ABBR:exp`                    | capitalized-run recognizer                 |
//! | `ABBR` (no fine label)        | acronyms then capitalized runs             |
//! | `DESC:*`                      | best-scoring sentence of the passage       |
//!
//! Overlapping matches are resolved first-come: earlier extractors and
//! earlier patterns win, then leftmost.

use std::collections::HashSet;
use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;

use super::passage::{score_passage, split_sentences, Passage};
use crate::error::IoContext;
use crate::index::InvertedIndex;
use crate::taxonomy::{Coarse, Label};
use crate::text::{tokenize, Stoplist};
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateAnswer {
    pub text: String,
    pub answer_type: Label,
    pub doc_id: String,
    /// Byte offset of `text` in the source document.
    pub offset: usize,
    /// Rank of the source passage among the kept passages (0 = best).
    pub passage_rank: usize,
    pub passage_score: f64,
    pub proximity_score: f64,
    pub redundancy_count: u32,
    pub final_score: f64,
}

/// Known person and location names, lowercased.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Gazetteer {
    pub persons: HashSet<String>,
    pub locations: HashSet<String>,
}

impl Gazetteer {
    pub fn from_lists<'a>(
        persons: impl IntoIterator<Item = &'a str>,
        locations: impl IntoIterator<Item = &'a str>,
    ) -> Self {
        let norm = |s: &str| s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
        Self {
            persons: persons.into_iter().map(norm).filter(|s| !s.is_empty()).collect(),
            locations: locations.into_iter().map(norm).filter(|s| !s.is_empty()).collect(),
        }
    }

    /// Loads one-name-per-line files; either may be absent.
    pub fn load(persons: Option<&Path>, locations: Option<&Path>) -> Result<Self> {
        let read = |p: Option<&Path>| -> Result<String> {
            match p {
                Some(p) => fs::read_to_string(p).io_context(p),
                None => Ok(String::new()),
            }
        };
        let persons = read(persons)?;
        let locations = read(locations)?;
        Ok(Self::from_lists(persons.lines(), locations.lines()))
    }

    fn lookup(&self, name: &str) -> (bool, bool) {
        let key = name.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
        (self.persons.contains(&key), self.locations.contains(&key))
    }
}

/// Everything extraction needs besides the passage itself.
pub struct ExtractionContext<'a> {
    pub query_terms: &'a [String],
    pub stoplist: &'a Stoplist,
    pub gazetteer: &'a Gazetteer,
    pub index: &'a InvertedIndex,
    pub coverage_weight: f64,
}

const MONTHS: &str = "January|February|March|April|May|June|July|August|September|October|November|December";

struct Patterns {
    dates: [Regex; 4],
    quantity: Regex,
    acronym: Regex,
    word: Regex,
}

fn patterns() -> &'static Patterns {
    static P: OnceLock<Patterns> = OnceLock::new();
    P.get_or_init(|| Patterns {
        dates: [
            Regex::new(&format!(r"\b\d{{1,2}}\s+(?:{MONTHS})\s+\d{{4}}\b")).unwrap(),
            Regex::new(&format!(r"\b(?:{MONTHS})\s+\d{{1,2}},\s*\d{{4}}\b")).unwrap(),
            Regex::new(&format!(r"\b(?:{MONTHS})\s+\d{{4}}\b")).unwrap(),
            Regex::new(r"\b[12]\d{3}\b").unwrap(),
        ],
        quantity: Regex::new(
            r"(?x)
            (?:[$€£¥]\s?)?
            \b(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?\b
            (?:\s(?:million|billion|trillion|thousand|hundred)\b)?
            (?:\s?%|\s(?:percent|per\ cent|dollars|euros|pounds|yen)\b)?",
        )
        .unwrap(),
        acronym: Regex::new(r"\b[A-Z][A-Z0-9&]+\b").unwrap(),
        word: Regex::new(r"\p{L}[\p{L}\p{N}'’\-]*").unwrap(),
    })
}

/// Local (passage-relative) spans, first-come on overlap.
#[derive(Default)]
struct SpanSet {
    spans: Vec<(usize, usize)>,
}

impl SpanSet {
    fn try_add(&mut self, s: usize, e: usize) -> bool {
        if s >= e || self.spans.iter().any(|&(a, b)| s < b && a < e) {
            return false;
        }
        self.spans.push((s, e));
        true
    }
}

fn date_spans(text: &str, out: &mut SpanSet) {
    for re in &patterns().dates {
        for m in re.find_iter(text) {
            out.try_add(m.start(), m.end());
        }
    }
}

fn quantity_spans(text: &str, out: &mut SpanSet) {
    for m in patterns().quantity.find_iter(text) {
        out.try_add(m.start(), m.end());
    }
}

fn is_query_or_stop(word: &str, ctx: &ExtractionContext<'_>) -> bool {
    let lower = word.to_lowercase();
    ctx.stoplist.contains(&lower)
        || tokenize(word)
            .iter()
            .any(|t| ctx.query_terms.iter().any(|q| q == &t.surface))
}

fn acronym_spans(text: &str, ctx: &ExtractionContext<'_>, out: &mut SpanSet) {
    for m in patterns().acronym.find_iter(text) {
        if !is_query_or_stop(m.as_str(), ctx) {
            out.try_add(m.start(), m.end());
        }
    }
}

fn sentence_initial(text: &str, start: usize) -> bool {
    let before = text[..start].trim_end_matches(|c: char| c.is_whitespace() || "\"'“‘(".contains(c));
    before.is_empty() || before.ends_with(['.', '?', '!'])
}

fn strip_possessive(word: &str) -> &str {
    for suffix in ["'s", "’s", "'", "’"] {
        if let Some(stem) = word.strip_suffix(suffix) {
            if !stem.is_empty() {
                return stem;
            }
        }
    }
    word
}

/// Maximal runs of capitalized words joined by whitespace, allowing lowercase
/// `of`, `de` and `van` between two capitalized words. Words that are
/// stopwords or query terms break runs. A run made of one sentence-initial
/// word is dropped unless the gazetteer agrees with the expected type; a run
/// the gazetteer files under the other entity kind is dropped.
fn capitalized_spans(text: &str, label: &Label, ctx: &ExtractionContext<'_>, out: &mut SpanSet) {
    struct Word<'t> {
        start: usize,
        end: usize,
        text: &'t str,
    }
    let words: Vec<Word<'_>> = patterns()
        .word
        .find_iter(text)
        .map(|m| {
            let w = strip_possessive(m.as_str());
            Word { start: m.start(), end: m.start() + w.len(), text: w }
        })
        .collect();
    let is_cap = |w: &Word<'_>| w.text.chars().next().is_some_and(char::is_uppercase);
    let usable = |w: &Word<'_>| is_cap(w) && !is_query_or_stop(w.text, ctx);
    let adjacent = |a: &Word<'_>, b: &Word<'_>| {
        let gap = &text[a.end..b.start];
        !gap.is_empty() && gap.chars().all(char::is_whitespace) && !gap.contains("\n\n")
    };
    let (want_person, want_location) = match label.coarse {
        Coarse::Hum => (true, false),
        Coarse::Loc => (false, true),
        _ => (false, false),
    };

    let mut i = 0;
    while i < words.len() {
        if !usable(&words[i]) {
            i += 1;
            continue;
        }
        let first = i;
        let mut last = i;
        loop {
            let next = last + 1;
            if next < words.len() && adjacent(&words[last], &words[next]) && usable(&words[next]) {
                last = next;
                continue;
            }
            if next + 1 < words.len()
                && matches!(words[next].text, "of" | "de" | "van")
                && adjacent(&words[last], &words[next])
                && adjacent(&words[next], &words[next + 1])
                && usable(&words[next + 1])
            {
                last = next + 1;
                continue;
            }
            break;
        }
        i = last + 1;

        let (s, e) = (words[first].start, words[last].end);
        let (is_person, is_location) = ctx.gazetteer.lookup(&text[s..e]);
        let agrees = (want_person && is_person) || (want_location && is_location);
        let conflicts = (want_person && is_location && !is_person)
            || (want_location && is_person && !is_location);
        if conflicts {
            continue;
        }
        if first == last && sentence_initial(text, s) && !agrees {
            continue;
        }
        out.try_add(s, e);
    }
}

fn best_sentence(passage: &Passage, ctx: &ExtractionContext<'_>, out: &mut SpanSet) {
    let mut best: Option<((usize, usize), f64)> = None;
    for span in split_sentences(&passage.text) {
        let score = score_passage(&passage.text[span.0..span.1], ctx.query_terms, ctx.index, ctx.coverage_weight);
        if best.is_none_or(|(_, b)| score > b) {
            best = Some((span, score));
        }
    }
    if let Some(((s, e), _)) = best {
        out.try_add(s, e);
    }
}

/// Candidates from one passage, in order of discovery. Scores other than
/// `passage_score` are filled in by ranking.
pub fn extract_candidates(
    passage: &Passage,
    passage_rank: usize,
    label: &Label,
    ctx: &ExtractionContext<'_>,
) -> Vec<CandidateAnswer> {
    let text = passage.text.as_str();
    let mut spans = SpanSet::default();
    match (label.coarse, label.fine) {
        (Coarse::Num, Some("date")) => date_spans(text, &mut spans),
        (Coarse::Num, Some(_)) => quantity_spans(text, &mut spans),
        (Coarse::Num, None) => {
            date_spans(text, &mut spans);
            quantity_spans(text, &mut spans);
        }
        (Coarse::Hum | Coarse::Loc | Coarse::Enty, _) | (Coarse::Abbr, Some("exp")) => {
            capitalized_spans(text, label, ctx, &mut spans)
        }
        (Coarse::Abbr, Some(_)) => acronym_spans(text, ctx, &mut spans),
        (Coarse::Abbr, None) => {
            acronym_spans(text, ctx, &mut spans);
            capitalized_spans(text, label, ctx, &mut spans);
        }
        (Coarse::Desc, _) => best_sentence(passage, ctx, &mut spans),
    }
    spans
        .spans
        .into_iter()
        .map(|(s, e)| CandidateAnswer {
            text: text[s..e].to_string(),
            answer_type: label.clone(),
            doc_id: passage.doc_id.clone(),
            offset: passage.char_span.0 + s,
            passage_rank,
            passage_score: passage.passage_score,
            proximity_score: 0.0,
            redundancy_count: 1,
            final_score: passage.passage_score,
        })
        .collect()
}
