//! Question analysis: query formation plus expected answer type.
//!
//! The analysis artifact handed to answer retrieval is UTF-8 text, one
//! tab-separated record per question after a header line:
//!
//! ```text
//! qid  query_terms(space separated)  coarse  fine|-  confidence  source  question text
//! ```

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::classifier::ClassifierModel;
use crate::question::Question;
use crate::taxonomy::{AnswerType, Coarse, Label};
use crate::text::{remove_stopwords, tokenize, Stoplist, Token};
use crate::{Error, Result};

pub const ANALYSIS_HEADER: &str = "# qanus analyses v1";

/// Below this model confidence a matching rule takes over.
pub const RULE_OVERRIDE_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassifierSource {
    Model,
    Rule,
    /// The model saw none of the question's features; its answer is the prior.
    Default,
}

impl fmt::Display for ClassifierSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassifierSource::Model => "model",
            ClassifierSource::Rule => "rule",
            ClassifierSource::Default => "default",
        })
    }
}

impl FromStr for ClassifierSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "model" => Ok(ClassifierSource::Model),
            "rule" => Ok(ClassifierSource::Rule),
            "default" => Ok(ClassifierSource::Default),
            other => Err(format!("unknown classifier source `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuestionAnalysis {
    pub qid: String,
    pub text: String,
    pub tokens: Vec<Token>,
    pub query_terms: Vec<String>,
    pub answer_type: AnswerType,
    pub classifier_source: ClassifierSource,
}

/// Fixed wh-word rules over the lowercased question.
pub fn rule_fallback(text: &str) -> Option<Label> {
    let q = text.trim().to_lowercase();
    let words: Vec<String> = crate::text::terms(&q);
    let starts = |w: &str| words.first().is_some_and(|f| f == w);
    let starts2 = |a: &str, b: &str| words.len() >= 2 && words[0] == a && words[1] == b;
    let label = |c, f| Some(Label::new(c, f).expect("rule table uses taxonomy labels"));
    if starts("who") {
        label(Coarse::Hum, "ind")
    } else if starts("where") {
        label(Coarse::Loc, "other")
    } else if starts("when") {
        label(Coarse::Num, "date")
    } else if starts2("how", "many") || starts2("how", "much") {
        label(Coarse::Num, "count")
    } else if q.contains("what year") || q.contains("which year") {
        label(Coarse::Num, "date")
    } else {
        None
    }
}

/// Order-preserving dedup of non-stopword question terms, then target terms.
pub fn form_query(tokens: &[Token], target: Option<&str>, stoplist: &Stoplist) -> Vec<String> {
    let mut query: Vec<String> = Vec::new();
    let target_tokens = target.map(tokenize).unwrap_or_default();
    let kept = remove_stopwords(tokens, stoplist)
        .into_iter()
        .chain(remove_stopwords(&target_tokens, stoplist));
    for tok in kept {
        if !query.contains(&tok.surface) {
            query.push(tok.surface);
        }
    }
    query
}

pub fn analyze(question: &Question, model: &ClassifierModel, stoplist: &Stoplist) -> QuestionAnalysis {
    let tokens = tokenize(&question.text);
    let query_terms = form_query(&tokens, question.target.as_deref(), stoplist);

    let predicted = model.classify(&question.text);
    let rule = rule_fallback(&question.text);
    let (answer_type, classifier_source) = match rule {
        Some(label) if predicted.confidence < RULE_OVERRIDE_THRESHOLD => {
            (AnswerType::new(label, 1.0), ClassifierSource::Rule)
        }
        _ if model.knows_nothing_about(&question.text) => (predicted, ClassifierSource::Default),
        _ => (predicted, ClassifierSource::Model),
    };

    QuestionAnalysis {
        qid: question.qid.clone(),
        text: question.text.clone(),
        tokens,
        query_terms,
        answer_type,
        classifier_source,
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn render_analyses(analyses: &[QuestionAnalysis]) -> String {
    let mut out = String::new();
    writeln!(out, "{ANALYSIS_HEADER}").unwrap();
    for a in analyses {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{:.6}\t{}\t{}",
            a.qid,
            a.query_terms.join(" "),
            a.answer_type.coarse(),
            a.answer_type.fine().unwrap_or("-"),
            a.answer_type.confidence,
            a.classifier_source,
            one_line(&a.text),
        )
        .unwrap();
    }
    out
}

pub fn parse_analyses(content: &str) -> Result<Vec<QuestionAnalysis>> {
    let malformed = |line: usize, reason: String| Error::Malformed { what: "analysis record", line, reason };
    let mut lines = content.lines().enumerate();
    match lines.next() {
        Some((_, ANALYSIS_HEADER)) => {}
        _ => return Err(malformed(1, format!("expected header `{ANALYSIS_HEADER}`"))),
    }
    let mut out = Vec::new();
    for (idx, line) in lines {
        let no = idx + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [qid, query, coarse, fine, confidence, source, text] = fields[..] else {
            return Err(malformed(no, format!("expected 7 fields, found {}", fields.len())));
        };
        let coarse: Coarse = coarse.parse().map_err(|e: Error| malformed(no, e.to_string()))?;
        let label = match fine {
            "-" => Label::coarse(coarse),
            f => Label::new(coarse, f).map_err(|e| malformed(no, e.to_string()))?,
        };
        let confidence: f64 = confidence
            .parse()
            .map_err(|_| malformed(no, format!("bad confidence `{confidence}`")))?;
        let classifier_source = source.parse().map_err(|e| malformed(no, e))?;
        out.push(QuestionAnalysis {
            qid: qid.to_string(),
            text: text.to_string(),
            tokens: tokenize(text),
            query_terms: query.split(' ').filter(|t| !t.is_empty()).map(str::to_string).collect(),
            answer_type: AnswerType::new(label, confidence),
            classifier_source,
        });
    }
    Ok(out)
}
