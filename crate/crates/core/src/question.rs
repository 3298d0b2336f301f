//! Input questions.
//!
//! Two layouts are read:
//!
//! * `trec-xml`: `<target id=".." text="...">` blocks holding `<q id="..."> question </q>`
//!   entries. Each question inherits its block's target text.
//! * `qline`: `qid<TAB>question` per line, no target.

use std::collections::HashSet;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use regex::Regex;

use crate::corpus::Reject;
use crate::error::IoContext;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Question {
    pub qid: String,
    pub text: String,
    pub target: Option<String>,
}

impl Question {
    pub fn new(qid: impl Into<String>, text: impl Into<String>) -> Self {
        Self { qid: qid.into(), text: text.into(), target: None }
    }

    pub fn with_target(mut self, target: impl Into<String>) -> Self {
        self.target = Some(target.into());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuestionFormat {
    TrecXml,
    Qline,
}

impl QuestionFormat {
    pub fn sniff(content: &str) -> Self {
        match content.trim_start().chars().next() {
            Some('<') => QuestionFormat::TrecXml,
            _ => QuestionFormat::Qline,
        }
    }
}

impl FromStr for QuestionFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "trec-xml" => Ok(QuestionFormat::TrecXml),
            "qline" => Ok(QuestionFormat::Qline),
            other => Err(format!("unknown question format `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParsedQuestions {
    pub questions: Vec<Question>,
    pub rejects: Vec<Reject>,
}

pub fn parse_questions(path: &Path, format: Option<QuestionFormat>) -> Result<ParsedQuestions> {
    let content = fs::read_to_string(path).io_context(path)?;
    let format = format.unwrap_or_else(|| QuestionFormat::sniff(&content));
    parse_questions_str(&content, format)
}

/// Malformed entries are skipped and reported; a repeated qid is fatal.
pub fn parse_questions_str(content: &str, format: QuestionFormat) -> Result<ParsedQuestions> {
    let parsed = match format {
        QuestionFormat::TrecXml => parse_trec_xml(content),
        QuestionFormat::Qline => parse_qline(content),
    };
    let mut seen = HashSet::new();
    for q in &parsed.questions {
        if !seen.insert(q.qid.as_str()) {
            return Err(Error::DuplicateQid(q.qid.clone()));
        }
    }
    Ok(parsed)
}

fn parse_qline(content: &str) -> ParsedQuestions {
    let mut out = ParsedQuestions::default();
    for (idx, raw) in content.lines().enumerate() {
        let line = idx + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        if raw.trim().is_empty() || raw.starts_with('#') {
            continue;
        }
        match raw.split_once('\t') {
            Some((qid, text)) if !qid.trim().is_empty() && !text.trim().is_empty() => {
                out.questions.push(Question::new(qid.trim(), text.trim()));
            }
            _ => out.rejects.push(Reject {
                line,
                reason: "expected `qid<TAB>question`".into(),
            }),
        }
    }
    out
}

struct XmlPatterns {
    target: Regex,
    text_attr: Regex,
    question: Regex,
    id_attr: Regex,
}

fn xml() -> &'static XmlPatterns {
    static PATTERNS: OnceLock<XmlPatterns> = OnceLock::new();
    PATTERNS.get_or_init(|| XmlPatterns {
        target: Regex::new(r"(?is)<target(\s[^>]*)?>(.*?)</target>").unwrap(),
        text_attr: Regex::new(r#"(?i)\btext\s*=\s*"([^"]*)""#).unwrap(),
        question: Regex::new(r"(?is)<q(\s[^>]*)?>(.*?)</q>").unwrap(),
        id_attr: Regex::new(r#"(?i)\bid\s*=\s*"([^"]*)""#).unwrap(),
    })
}

fn unescape(s: &str) -> String {
    s.replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&apos;", "'")
        .replace("&amp;", "&")
}

fn line_of(content: &str, byte: usize) -> usize {
    content[..byte].bytes().filter(|&b| b == b'\n').count() + 1
}

fn parse_trec_xml(content: &str) -> ParsedQuestions {
    let p = xml();
    let mut out = ParsedQuestions::default();
    for block in p.target.captures_iter(content) {
        let attrs = block.get(1).map_or("", |m| m.as_str());
        let target = p
            .text_attr
            .captures(attrs)
            .map(|c| unescape(c[1].trim()))
            .filter(|t| !t.is_empty());
        let body = block.get(2).unwrap();
        for q in p.question.captures_iter(body.as_str()) {
            let line = line_of(content, body.start() + q.get(0).unwrap().start());
            let qattrs = q.get(1).map_or("", |m| m.as_str());
            let qid = p.id_attr.captures(qattrs).map(|c| c[1].trim().to_string());
            let text = unescape(q[2].trim());
            match qid {
                Some(qid) if !qid.is_empty() && !text.is_empty() => {
                    out.questions.push(Question { qid, text, target: target.clone() });
                }
                _ => out.rejects.push(Reject {
                    line,
                    reason: "question needs an id attribute and non-empty text".into(),
                }),
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qline_three_questions_in_order() {
        let parsed =
            parse_questions_str("q1\tWho?\nq2\tWhat?\nq3\tWhen?\n", QuestionFormat::Qline).unwrap();
        let ids: Vec<_> = parsed.questions.iter().map(|q| q.qid.as_str()).collect();
        assert_eq!(ids, ["q1", "q2", "q3"]);
        assert!(parsed.questions.iter().all(|q| q.target.is_none()));
    }

    #[test]
    fn duplicate_qid_is_fatal() {
        let err = parse_questions_str("q1\tA?\nq1\tB?\n", QuestionFormat::Qline).unwrap_err();
        assert!(matches!(err, Error::DuplicateQid(q) if q == "q1"));
    }

    #[test]
    fn malformed_qline_is_reported() {
        let parsed = parse_questions_str("q1\tA?\nnotab\nq3\t \n", QuestionFormat::Qline).unwrap();
        assert_eq!(parsed.questions.len(), 1);
        assert_eq!(parsed.rejects.iter().map(|r| r.line).collect::<Vec<_>>(), [2, 3]);
    }

    #[test]
    fn trec_xml_carries_target() {
        let xml = r#"<trecqa year="2007">
<target id="216" text="Paul Krugman">
  <qa><q id="216.1" type="FACTOID">What is his academic specialty?</q></qa>
  <qa><q id="216.2" type="FACTOID">Where did he get his PhD &amp; when?</q></qa>
</target>
</trecqa>"#;
        let parsed = parse_questions_str(xml, QuestionFormat::TrecXml).unwrap();
        assert_eq!(parsed.questions.len(), 2);
        assert_eq!(parsed.questions[1].qid, "216.2");
        assert_eq!(parsed.questions[1].text, "Where did he get his PhD & when?");
        assert!(parsed
            .questions
            .iter()
            .all(|q| q.target.as_deref() == Some("Paul Krugman")));
    }

    #[test]
    fn sniff() {
        assert_eq!(QuestionFormat::sniff("<trecqa>"), QuestionFormat::TrecXml);
        assert_eq!(QuestionFormat::sniff("q1\tx"), QuestionFormat::Qline);
    }
}
