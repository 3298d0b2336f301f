//! BM25 document retrieval over the inverted index.

use std::collections::HashMap;

use crate::index::InvertedIndex;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Self { k1: 1.2, b: 0.75 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredDocument {
    pub doc_id: String,
    pub retrieval_score: f64,
}

/// Top `k` documents by BM25, score descending with ties broken by `doc_id`
/// ascending. Documents matching no query term are not returned.
pub fn retrieve_documents(
    index: &InvertedIndex,
    query_terms: &[String],
    k: usize,
    params: Bm25Params,
) -> Vec<ScoredDocument> {
    if query_terms.is_empty() || k == 0 || index.doc_count() == 0 {
        return Vec::new();
    }
    let avgdl = index.avg_doc_length;
    let mut scores: HashMap<&str, f64> = HashMap::new();
    let mut seen: Vec<&str> = Vec::new();
    for term in query_terms {
        if seen.contains(&term.as_str()) {
            continue;
        }
        seen.push(term);
        let Some(postings) = index.postings.get(term) else {
            continue;
        };
        let idf = index.idf(term);
        for p in postings {
            let tf = p.term_frequency as f64;
            let dl = index.doc_lengths[&p.doc_id] as f64;
            let norm = if avgdl > 0.0 { dl / avgdl } else { 0.0 };
            let w = idf * tf * (params.k1 + 1.0) / (tf + params.k1 * (1.0 - params.b + params.b * norm));
            *scores.entry(p.doc_id.as_str()).or_insert(0.0) += w;
        }
    }
    let mut ranked: Vec<ScoredDocument> = scores
        .into_iter()
        .map(|(doc_id, retrieval_score)| ScoredDocument { doc_id: doc_id.to_string(), retrieval_score })
        .collect();
    ranked.sort_by(|a, b| {
        b.retrieval_score
            .total_cmp(&a.retrieval_score)
            .then_with(|| a.doc_id.cmp(&b.doc_id))
    });
    ranked.truncate(k);
    ranked
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;
    use crate::index::build_index;

    fn q(terms: &[&str]) -> Vec<String> {
        terms.iter().map(|t| t.to_string()).collect()
    }

    #[test]
    fn single_matching_doc_ranks_alone() {
        let idx = build_index(vec![
            Document::new("d1", "apples and pears"),
            Document::new("d2", "the zebra runs"),
            Document::new("d3", "pears only"),
        ])
        .unwrap();
        let r = retrieve_documents(&idx, &q(&["zebra"]), 10, Bm25Params::default());
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].doc_id, "d2");
        assert!(r[0].retrieval_score > 0.0);
    }

    #[test]
    fn empty_query_returns_nothing() {
        let idx = build_index(vec![Document::new("d1", "text")]).unwrap();
        assert!(retrieve_documents(&idx, &[], 5, Bm25Params::default()).is_empty());
    }

    #[test]
    fn ties_break_by_doc_id_and_k_truncates() {
        let idx = build_index(vec![
            Document::new("c", "same words"),
            Document::new("a", "same words"),
            Document::new("b", "same words"),
        ])
        .unwrap();
        let r = retrieve_documents(&idx, &q(&["same"]), 2, Bm25Params::default());
        assert_eq!(r.iter().map(|d| d.doc_id.as_str()).collect::<Vec<_>>(), ["a", "b"]);
    }

    #[test]
    fn hand_computed_score() {
        // N=2, df(x)=1, idf = ln(1 + 1.5/1.5) = ln 2. d1 has length 2, avgdl 1.5.
        let idx = build_index(vec![Document::new("d1", "x y"), Document::new("d2", "z")]).unwrap();
        let r = retrieve_documents(&idx, &q(&["x"]), 1, Bm25Params::default());
        let expected = 2f64.ln() * 2.2 / (1.0 + 1.2 * (0.25 + 0.75 * 2.0 / 1.5));
        assert!((r[0].retrieval_score - expected).abs() < 1e-12);
    }
}
