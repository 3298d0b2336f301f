//! Answer retrieval: documents, then passages, then candidates, then one
//! answer per question.
//!
//! The answers artifact is UTF-8 text with a header line and one
//! tab-separated record per question, in question order:
//!
//! ```text
//! qid  answer|NIL  doc_id|-  final_score  candidates_considered
//! ```

pub mod bm25;
pub mod extract;
pub mod passage;
pub mod rank;

use std::fmt::Write as _;

use rayon::prelude::*;

pub use bm25::{retrieve_documents, Bm25Params, ScoredDocument};
pub use extract::{extract_candidates, CandidateAnswer, ExtractionContext, Gazetteer};
pub use passage::{score_passage, segment_passages, split_sentences, Passage, Windowing};
pub use rank::{dedup_candidates, rank_candidates, RankWeights};

use crate::analysis::QuestionAnalysis;
use crate::index::InvertedIndex;
use crate::text::Stoplist;
use crate::{Error, Result};

pub const ANSWERS_HEADER: &str = "# qanus answers v1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnswerParams {
    pub k: usize,
    pub max_passages: usize,
    pub weights: RankWeights,
    pub windowing: Windowing,
    pub bm25: Bm25Params,
}

impl Default for AnswerParams {
    fn default() -> Self {
        Self {
            k: 50,
            max_passages: 20,
            weights: RankWeights::default(),
            windowing: Windowing::default(),
            bm25: Bm25Params::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnswerRecord {
    pub qid: String,
    /// `None` is NIL.
    pub answer: Option<String>,
    pub supporting_doc: Option<String>,
    pub final_score: f64,
    pub rank_list_size: usize,
}

impl AnswerRecord {
    pub fn nil(qid: impl Into<String>) -> Self {
        Self {
            qid: qid.into(),
            answer: None,
            supporting_doc: None,
            final_score: 0.0,
            rank_list_size: 0,
        }
    }

    pub fn is_nil(&self) -> bool {
        self.answer.is_none()
    }
}

/// Shared, immutable resources for answering many questions.
pub struct Answerer<'a> {
    pub index: &'a InvertedIndex,
    pub stoplist: &'a Stoplist,
    pub gazetteer: &'a Gazetteer,
    pub params: AnswerParams,
}

impl Answerer<'_> {
    /// Passages from the top documents, ranked by score (ties keep document
    /// rank, then position), truncated to `max_passages`.
    pub fn ranked_passages(&self, query_terms: &[String]) -> Vec<Passage> {
        let docs = retrieve_documents(self.index, query_terms, self.params.k.max(1), self.params.bm25);
        let mut passages: Vec<Passage> = docs
            .iter()
            .filter_map(|d| self.index.document(&d.doc_id))
            .flat_map(|doc| segment_passages(doc, self.params.windowing))
            .map(|mut p| {
                p.passage_score =
                    score_passage(&p.text, query_terms, self.index, self.params.weights.coverage);
                p
            })
            .collect();
        passages.sort_by(|a, b| b.passage_score.total_cmp(&a.passage_score));
        passages.truncate(self.params.max_passages);
        passages
    }

    /// All ranked, deduplicated candidates for one question.
    pub fn candidates(&self, analysis: &QuestionAnalysis) -> Vec<CandidateAnswer> {
        if analysis.query_terms.is_empty() {
            return Vec::new();
        }
        let passages = self.ranked_passages(&analysis.query_terms);
        let ctx = ExtractionContext {
            query_terms: &analysis.query_terms,
            stoplist: self.stoplist,
            gazetteer: self.gazetteer,
            index: self.index,
            coverage_weight: self.params.weights.coverage,
        };
        let label = &analysis.answer_type.label;
        let candidates: Vec<CandidateAnswer> = passages
            .iter()
            .enumerate()
            .flat_map(|(rank, p)| extract_candidates(p, rank, label, &ctx))
            .collect();
        let ranked = rank_candidates(candidates, &analysis.query_terms, &passages, self.params.weights);
        dedup_candidates(ranked)
    }

    pub fn answer(&self, analysis: &QuestionAnalysis) -> AnswerRecord {
        let candidates = self.candidates(analysis);
        match candidates.first() {
            None => AnswerRecord::nil(&analysis.qid),
            Some(best) => AnswerRecord {
                qid: analysis.qid.clone(),
                answer: Some(best.text.clone()),
                supporting_doc: Some(best.doc_id.clone()),
                final_score: best.final_score,
                rank_list_size: candidates.len(),
            },
        }
    }

    /// Answers in input order; questions are processed in parallel.
    pub fn answer_all(&self, analyses: &[QuestionAnalysis]) -> Vec<AnswerRecord> {
        analyses.par_iter().map(|a| self.answer(a)).collect()
    }
}

pub fn answer_question(
    index: &InvertedIndex,
    analysis: &QuestionAnalysis,
    params: AnswerParams,
    stoplist: &Stoplist,
    gazetteer: &Gazetteer,
) -> AnswerRecord {
    Answerer { index, stoplist, gazetteer, params }.answer(analysis)
}

/// Score as written to artifacts and the ask loop: `0` for NIL.
pub fn format_score(record: &AnswerRecord) -> String {
    if record.is_nil() {
        "0".to_string()
    } else {
        format!("{:.6}", record.final_score)
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn render_answers(records: &[AnswerRecord]) -> String {
    let mut out = String::new();
    writeln!(out, "{ANSWERS_HEADER}").unwrap();
    for r in records {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            r.qid,
            r.answer.as_deref().map_or_else(|| "NIL".to_string(), one_line),
            r.supporting_doc.as_deref().unwrap_or("-"),
            format_score(r),
            r.rank_list_size,
        )
        .unwrap();
    }
    out
}

pub fn parse_answers(content: &str) -> Result<Vec<AnswerRecord>> {
    let malformed = |line: usize, reason: String| Error::Malformed { what: "answer record", line, reason };
    let mut lines = content.lines().enumerate();
    match lines.next() {
        Some((_, ANSWERS_HEADER)) => {}
        _ => return Err(malformed(1, format!("expected header `{ANSWERS_HEADER}`"))),
    }
    let mut out = Vec::new();
    for (idx, line) in lines {
        let no = idx + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [qid, answer, doc, score, size] = fields[..] else {
            return Err(malformed(no, format!("expected 5 fields, found {}", fields.len())));
        };
        let final_score: f64 = score.parse().map_err(|_| malformed(no, format!("bad score `{score}`")))?;
        let rank_list_size: usize =
            size.parse().map_err(|_| malformed(no, format!("bad candidate count `{size}`")))?;
        let (answer, supporting_doc) = match (answer, doc) {
            ("NIL", "-") => (None, None),
            ("NIL", _) | (_, "-") => {
                return Err(malformed(no, "NIL answers must have `-` as document".into()))
            }
            (a, d) => (Some(a.to_string()), Some(d.to_string())),
        };
        out.push(AnswerRecord { qid: qid.to_string(), answer, supporting_doc, final_score, rank_list_size });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::ClassifierSource;
    use crate::corpus::Document;
    use crate::index::build_index;
    use crate::taxonomy::AnswerType;
    use crate::text::tokenize;

    fn analysis(qid: &str, text: &str, query: &[&str], label: &str) -> QuestionAnalysis {
        QuestionAnalysis {
            qid: qid.into(),
            text: text.into(),
            tokens: tokenize(text),
            query_terms: query.iter().map(|s| s.to_string()).collect(),
            answer_type: AnswerType::new(label.parse().unwrap(), 1.0),
            classifier_source: ClassifierSource::Model,
        }
    }

    fn corpus() -> InvertedIndex {
        build_index(vec![
            Document::new("d1", "Weather was mild. Markets were calm."),
            Document::new("d2", "The Treaty of Valmora was signed on 12 March 1854 by envoys. Trade resumed in 1860."),
            Document::new("d3", "Zentrix Labs was founded by Miriam Castellano. Her partner Otto Brand joined later."),
        ])
        .unwrap()
    }

    #[test]
    fn planted_answers_come_back() {
        let index = corpus();
        let sl = Stoplist::default();
        let gaz = Gazetteer::default();
        let a = analysis("q1", "When was the Treaty of Valmora signed?", &["treaty", "valmora", "signed"], "NUM:date");
        let r = answer_question(&index, &a, AnswerParams::default(), &sl, &gaz);
        assert_eq!(r.answer.as_deref(), Some("12 March 1854"));
        assert_eq!(r.supporting_doc.as_deref(), Some("d2"));

        let a = analysis("q2", "Who founded Zentrix Labs?", &["founded", "zentrix", "labs"], "HUM:ind");
        let r = answer_question(&index, &a, AnswerParams::default(), &sl, &gaz);
        assert_eq!(r.answer.as_deref(), Some("Miriam Castellano"));
        assert_eq!(r.rank_list_size, 2);
    }

    #[test]
    fn nil_when_nothing_matches() {
        let index = corpus();
        let sl = Stoplist::default();
        let gaz = Gazetteer::default();
        let empty = analysis("q", "Who is he?", &[], "HUM:ind");
        assert!(answer_question(&index, &empty, AnswerParams::default(), &sl, &gaz).is_nil());
        let no_type_match = analysis("q", "When were markets calm?", &["markets", "calm"], "NUM:date");
        let r = answer_question(&index, &no_type_match, AnswerParams::default(), &sl, &gaz);
        assert!(r.is_nil());
        assert_eq!(r.supporting_doc, None);
    }

    #[test]
    fn candidates_are_document_slices() {
        let index = corpus();
        let sl = Stoplist::default();
        let gaz = Gazetteer::default();
        let answerer = Answerer { index: &index, stoplist: &sl, gazetteer: &gaz, params: AnswerParams::default() };
        for label in ["NUM:date", "HUM:ind", "NUM", "DESC:def", "ABBR", "ENTY:other", "LOC:city"] {
            let a = analysis("q", "x", &["signed", "founded", "trade"], label);
            for c in answerer.candidates(&a) {
                let doc = index.document(&c.doc_id).unwrap();
                assert_eq!(&doc.text[c.offset..c.offset + c.text.len()], c.text);
                assert!(c.final_score.is_finite());
            }
        }
    }

    #[test]
    fn answers_artifact_round_trip() {
        let records = vec![
            AnswerRecord {
                qid: "q1".into(),
                answer: Some("12 March\n1854".into()),
                supporting_doc: Some("d2".into()),
                final_score: 3.25,
                rank_list_size: 4,
            },
            AnswerRecord::nil("q2"),
        ];
        let text = render_answers(&records);
        assert_eq!(text, "# qanus answers v1\nq1\t12 March 1854\td2\t3.250000\t4\nq2\tNIL\t-\t0\t0\n");
        let back = parse_answers(&text).unwrap();
        assert_eq!(back[0].answer.as_deref(), Some("12 March 1854"));
        assert_eq!(back[1], records[1]);
        assert_eq!(render_answers(&back), text);
        assert!(parse_answers("# qanus answers v1\nq\tNIL\td1\t0\t0\n").is_err());
    }
}
