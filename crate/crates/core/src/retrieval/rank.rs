//! Candidate ranking by passage score, proximity to query terms, and
//! redundancy across passages.

use std::cmp::Ordering;
use std::collections::HashSet;

use super::extract::CandidateAnswer;
use super::passage::Passage;
use crate::text::tokenize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankWeights {
    pub coverage: f64,
    pub proximity: f64,
    pub redundancy: f64,
}

impl Default for RankWeights {
    fn default() -> Self {
        Self { coverage: 2.0, proximity: 1.0, redundancy: 0.5 }
    }
}

/// `sum over query terms present in the passage of 1 / (1 + d)`, where `d` is
/// the token distance from the candidate span to the nearest occurrence
/// (0 when the occurrence lies inside the span).
pub fn proximity_score(passage: &Passage, local_span: (usize, usize), query_terms: &[String]) -> f64 {
    let tokens = tokenize(&passage.text);
    let inside: Vec<u32> = tokens
        .iter()
        .filter(|t| t.char_offset < local_span.1 && t.end() > local_span.0)
        .map(|t| t.position)
        .collect();
    let (Some(&first), Some(&last)) = (inside.first(), inside.last()) else {
        return 0.0;
    };
    let mut seen = HashSet::new();
    let mut score = 0.0;
    for term in query_terms {
        if !seen.insert(term.as_str()) {
            continue;
        }
        let nearest = tokens
            .iter()
            .filter(|t| &t.surface == term)
            .map(|t| {
                if t.position < first {
                    first - t.position
                } else {
                    t.position.saturating_sub(last)
                }
            })
            .min();
        if let Some(d) = nearest {
            score += 1.0 / (1.0 + d as f64);
        }
    }
    score
}

/// Case-insensitive whole-word occurrence of `needle` in `haystack`.
fn contains_phrase(haystack: &str, needle: &str) -> bool {
    if needle.is_empty() {
        return false;
    }
    let hay = haystack.to_lowercase();
    let needle = needle.to_lowercase();
    let boundary = |c: Option<char>| c.is_none_or(|c| !c.is_alphanumeric());
    hay.match_indices(&needle).any(|(at, m)| {
        boundary(hay[..at].chars().next_back()) && boundary(hay[at + m.len()..].chars().next())
    })
}

/// Number of passages containing the candidate text.
pub fn redundancy_count(text: &str, passages: &[Passage]) -> u32 {
    passages.iter().filter(|p| contains_phrase(&p.text, text)).count().max(1) as u32
}

fn tie_break(a: &CandidateAnswer, b: &CandidateAnswer) -> Ordering {
    b.final_score
        .total_cmp(&a.final_score)
        .then(a.passage_rank.cmp(&b.passage_rank))
        .then(a.offset.cmp(&b.offset))
        .then_with(|| a.text.cmp(&b.text))
}

/// Fills in proximity, redundancy and final scores, then sorts best first.
/// `passages` are the ranked passages that `passage_rank` indexes into.
pub fn rank_candidates(
    mut candidates: Vec<CandidateAnswer>,
    query_terms: &[String],
    passages: &[Passage],
    weights: RankWeights,
) -> Vec<CandidateAnswer> {
    for c in &mut candidates {
        let passage = &passages[c.passage_rank];
        let local = c.offset - passage.char_span.0;
        c.passage_score = passage.passage_score;
        c.proximity_score = proximity_score(passage, (local, local + c.text.len()), query_terms);
        c.redundancy_count = redundancy_count(&c.text, passages);
        c.final_score = c.passage_score
            + weights.proximity * c.proximity_score
            + weights.redundancy * (c.redundancy_count as f64 - 1.0);
    }
    candidates.sort_by(tie_break);
    candidates
}

/// Keeps the first of each group of case-insensitively equal texts.
pub fn dedup_candidates(ranked: Vec<CandidateAnswer>) -> Vec<CandidateAnswer> {
    let mut seen = HashSet::new();
    ranked
        .into_iter()
        .filter(|c| seen.insert(c.text.to_lowercase()))
        .collect()
}
