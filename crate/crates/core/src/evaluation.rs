//! Gold-standard judging and factoid accuracy.
//!
//! Gold files follow the TREC answer-pattern layout: `qid<SPACE>pattern` per
//! line, repeating the qid for alternative patterns. Patterns are
//! case-insensitive and unanchored. The literal pattern `NIL` matches only a
//! NIL answer.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use regex::{Regex, RegexBuilder};

use crate::error::IoContext;
use crate::retrieval::AnswerRecord;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct GoldPattern {
    pub qid: String,
    pub patterns: Vec<String>,
    compiled: Vec<Option<Regex>>,
}

impl GoldPattern {
    pub fn new(qid: impl Into<String>, patterns: Vec<String>) -> Result<Self> {
        let qid = qid.into();
        let compiled = patterns
            .iter()
            .map(|p| {
                if p == "NIL" {
                    return Ok(None);
                }
                RegexBuilder::new(p)
                    .case_insensitive(true)
                    .build()
                    .map(Some)
                    .map_err(|e| Error::BadPattern {
                        qid: qid.clone(),
                        pattern: p.clone(),
                        reason: e.to_string(),
                    })
            })
            .collect::<Result<_>>()?;
        Ok(Self { qid, patterns, compiled })
    }
}

/// Gold patterns in file order of first appearance.
#[derive(Debug, Clone, Default)]
pub struct GoldStandard {
    pub entries: Vec<GoldPattern>,
}

impl GoldStandard {
    pub fn get(&self, qid: &str) -> Option<&GoldPattern> {
        self.entries.iter().find(|g| g.qid == qid)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn parse_gold(content: &str) -> Result<GoldStandard> {
    let mut order: Vec<String> = Vec::new();
    let mut grouped: HashMap<String, Vec<String>> = HashMap::new();
    for (idx, raw) in content.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((qid, pattern)) = line.split_once(char::is_whitespace) else {
            return Err(Error::Malformed {
                what: "gold line",
                line: idx + 1,
                reason: "expected `qid pattern`".into(),
            });
        };
        let pattern = pattern.trim();
        if !grouped.contains_key(qid) {
            order.push(qid.to_string());
        }
        grouped.entry(qid.to_string()).or_default().push(pattern.to_string());
    }
    if order.is_empty() {
        return Err(Error::EmptyGold);
    }
    let entries = order
        .into_iter()
        .map(|qid| {
            let patterns = grouped.remove(&qid).unwrap_or_default();
            GoldPattern::new(qid, patterns)
        })
        .collect::<Result<_>>()?;
    Ok(GoldStandard { entries })
}

pub fn load_gold(path: &Path) -> Result<GoldStandard> {
    let content = fs::read_to_string(path).io_context(path)?;
    parse_gold(&content)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JudgedAnswer {
    pub qid: String,
    /// `None` is NIL.
    pub given: Option<String>,
    pub correct: bool,
    pub matched_pattern: Option<String>,
}

/// Correct iff some pattern matches anywhere in the answer; the first
/// matching pattern is recorded.
pub fn judge(answer: &AnswerRecord, gold: &GoldPattern) -> Result<JudgedAnswer> {
    if answer.qid != gold.qid {
        return Err(Error::QidMismatch { answer: answer.qid.clone(), gold: gold.qid.clone() });
    }
    let matched = gold
        .patterns
        .iter()
        .zip(&gold.compiled)
        .find(|(_, re)| match (re, &answer.answer) {
            (None, None) => true,
            (Some(re), Some(text)) => re.is_match(text),
            _ => false,
        })
        .map(|(p, _)| p.clone());
    Ok(JudgedAnswer {
        qid: answer.qid.clone(),
        given: answer.answer.clone(),
        correct: matched.is_some(),
        matched_pattern: matched,
    })
}

/// `correct / total_gold`.
pub fn accuracy(judgments: &[JudgedAnswer], total_gold: usize) -> Result<f64> {
    if total_gold == 0 {
        return Err(Error::EmptyTestSet);
    }
    let distinct: BTreeSet<&str> = judgments.iter().map(|j| j.qid.as_str()).collect();
    if distinct.len() > total_gold {
        return Err(Error::InconsistentTotal { judged: distinct.len(), total: total_gold });
    }
    Ok(count_correct(judgments) as f64 / total_gold as f64)
}

fn count_correct(judgments: &[JudgedAnswer]) -> usize {
    judgments.iter().filter(|j| j.correct).count()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub total_questions: usize,
    pub correct_count: usize,
    pub accuracy: f64,
    /// Judgments in gold order, for gold questions that received an answer.
    pub per_question: Vec<JudgedAnswer>,
    /// Gold questions with no system answer, in gold order.
    pub unanswered_qids: Vec<String>,
    /// Gold order of every qid, for report layout.
    gold_order: Vec<String>,
}

impl EvaluationReport {
    /// Accuracy rounded half-up to three decimals from the exact ratio.
    pub fn accuracy_display(&self) -> String {
        format_ratio(self.correct_count, self.total_questions)
    }
}

/// Renders `num / den` to three decimals with integer arithmetic.
pub fn format_ratio(num: usize, den: usize) -> String {
    if den == 0 {
        return "0.000".into();
    }
    let (num, den) = (num as u128, den as u128);
    let thousandths = (num * 1000 * 2 + den) / (den * 2);
    format!("{}.{:03}", thousandths / 1000, thousandths % 1000)
}

/// Judges every gold question. Answers for qids outside the gold standard
/// are ignored; gold questions without an answer count as wrong.
pub fn evaluate(answers: &[AnswerRecord], gold: &GoldStandard) -> Result<EvaluationReport> {
    if gold.is_empty() {
        return Err(Error::EmptyGold);
    }
    let by_qid: HashMap<&str, &AnswerRecord> = answers.iter().map(|a| (a.qid.as_str(), a)).collect();
    let mut per_question = Vec::new();
    let mut unanswered_qids = Vec::new();
    for g in &gold.entries {
        match by_qid.get(g.qid.as_str()) {
            Some(answer) => per_question.push(judge(answer, g)?),
            None => unanswered_qids.push(g.qid.clone()),
        }
    }
    let total_questions = gold.len();
    let accuracy = accuracy(&per_question, total_questions)?;
    Ok(EvaluationReport {
        total_questions,
        correct_count: count_correct(&per_question),
        accuracy,
        per_question,
        unanswered_qids,
        gold_order: gold.entries.iter().map(|g| g.qid.clone()).collect(),
    })
}

pub fn render_report(report: &EvaluationReport) -> String {
    let mut out = String::new();
    writeln!(out, "accuracy = {}", report.accuracy_display()).unwrap();
    writeln!(out, "correct = {}", report.correct_count).unwrap();
    writeln!(out, "total = {}", report.total_questions).unwrap();
    writeln!(out, "answered = {}", report.per_question.len()).unwrap();
    writeln!(out, "unanswered = {}", report.unanswered_qids.len()).unwrap();
    out.push('\n');
    let judged: HashMap<&str, &JudgedAnswer> =
        report.per_question.iter().map(|j| (j.qid.as_str(), j)).collect();
    for qid in &report.gold_order {
        match judged.get(qid.as_str()) {
            Some(j) => {
                let verdict = if j.correct { "CORRECT" } else { "WRONG" };
                let given = j.given.as_deref().unwrap_or("NIL");
                match &j.matched_pattern {
                    Some(p) => writeln!(out, "{qid}  {verdict}  {given}  [{p}]").unwrap(),
                    None => writeln!(out, "{qid}  {verdict}  {given}").unwrap(),
                }
            }
            None => writeln!(out, "{qid}  WRONG  (unanswered)").unwrap(),
        }
    }
    out
}

pub fn write_report(report: &EvaluationReport, path: &Path) -> Result<()> {
    fs::write(path, render_report(report)).io_context(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(qid: &str, answer: Option<&str>) -> AnswerRecord {
        AnswerRecord {
            qid: qid.into(),
            answer: answer.map(str::to_string),
            supporting_doc: answer.map(|_| "d".to_string()),
            final_score: 1.0,
            rank_list_size: 1,
        }
    }

    fn gold(qid: &str, patterns: &[&str]) -> GoldPattern {
        GoldPattern::new(qid, patterns.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    #[test]
    fn gold_grouping_and_errors() {
        let g = parse_gold("q1 rome\nq2 paris\nq1 roma\n").unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.get("q1").unwrap().patterns, ["rome", "roma"]);
        assert!(matches!(parse_gold("q1 (\n"), Err(Error::BadPattern { .. })));
        assert!(matches!(parse_gold(""), Err(Error::EmptyGold)));
        assert!(matches!(parse_gold("\n# only comments\n"), Err(Error::EmptyGold)));
    }

    #[test]
    fn judging() {
        let j = judge(&rec("q", Some("12 January 2004")), &gold("q", &[r"january\s+2004"])).unwrap();
        assert!(j.correct);
        assert_eq!(j.matched_pattern.as_deref(), Some(r"january\s+2004"));
        assert!(!judge(&rec("q", None), &gold("q", &["rome"])).unwrap().correct);
        assert!(!judge(&rec("q", Some("Gordon Moore and others")), &gold("q", &["^Gordon Moore$"])).unwrap().correct);
        assert!(judge(&rec("q", None), &gold("q", &["NIL"])).unwrap().correct);
        assert!(!judge(&rec("q", Some("the Nile")), &gold("q", &["NIL"])).unwrap().correct);
        assert!(matches!(judge(&rec("a", None), &gold("b", &["x"])), Err(Error::QidMismatch { .. })));
    }

    #[test]
    fn accuracy_formula() {
        let js: Vec<_> = (0..10)
            .map(|i| JudgedAnswer { qid: format!("q{i}"), given: None, correct: i < 3, matched_pattern: None })
            .collect();
        assert_eq!(accuracy(&js, 10).unwrap(), 0.3);
        assert_eq!(accuracy(&js[3..], 10).unwrap(), 0.0);
        assert!(matches!(accuracy(&[], 0), Err(Error::EmptyTestSet)));
        assert!(matches!(accuracy(&js, 5), Err(Error::InconsistentTotal { .. })));
    }

    #[test]
    fn ratio_rendering() {
        assert_eq!(format_ratio(3, 10), "0.300");
        assert_eq!(format_ratio(0, 7), "0.000");
        assert_eq!(format_ratio(1, 3), "0.333");
        assert_eq!(format_ratio(2, 3), "0.667");
        assert_eq!(format_ratio(1, 8), "0.125");
        assert_eq!(format_ratio(1, 16), "0.063");
        assert_eq!(format_ratio(5, 5), "1.000");
    }

    #[test]
    fn report_layout() {
        let g = parse_gold("q1 rome\nq2 paris\nq3 oslo\n").unwrap();
        let report = evaluate(&[rec("q2", Some("Paris, France")), rec("q1", None), rec("zz", Some("x"))], &g).unwrap();
        assert_eq!(report.total_questions, 3);
        assert_eq!(report.correct_count, 1);
        assert_eq!(report.unanswered_qids, ["q3"]);
        assert_eq!(
            render_report(&report),
            "accuracy = 0.333\ncorrect = 1\ntotal = 3\nanswered = 2\nunanswered = 1\n\n\
             q1  WRONG  NIL\nq2  CORRECT  Paris, France  [paris]\nq3  WRONG  (unanswered)\n"
        );
    }

    #[test]
    fn no_answers_at_all() {
        let g = parse_gold("a x\nb y\n").unwrap();
        let report = evaluate(&[], &g).unwrap();
        assert_eq!(report.accuracy, 0.0);
        let text = render_report(&report);
        assert!(text.starts_with("accuracy = 0.000\n"));
        assert!(text.contains("a  WRONG  (unanswered)\nb  WRONG  (unanswered)\n"));
    }
}
