//! Source documents and the two supported corpus formats.
//!
//! `trec-sgml` follows the TREC/AQUAINT layout:
//!
//! ```text
//! <DOC>
//! <DOCNO> APW20040101.0001 </DOCNO>
//! <HEADLINE> optional </HEADLINE>
//! <TEXT>
//! <P> first paragraph </P>
//! <P> second paragraph </P>
//! </TEXT>
//! </DOC>
//! ```
//!
//! `<DOC id="...">` is accepted in place of `<DOCNO>`. When `<P>` markers are
//! present the stored text is the trimmed paragraphs joined by a blank line,
//! and each paragraph's byte span is recorded.
//!
//! `record-lines` holds one document per line: `doc_id<TAB>headline<TAB>text`.
//!
//! Malformed records are skipped and reported; parsing continues.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use regex::Regex;

use crate::error::IoContext;
use crate::Error;

/// One retrievable source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub doc_id: String,
    pub headline: Option<String>,
    pub text: String,
    /// Byte spans of source paragraphs within `text`; empty when the source
    /// had no paragraph markup.
    pub paragraph_spans: Vec<(usize, usize)>,
}

impl Document {
    pub fn new(doc_id: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            doc_id: doc_id.into(),
            headline: None,
            text: text.into(),
            paragraph_spans: Vec::new(),
        }
    }

    /// Checks the span invariants: ordered, non-overlapping, within bounds,
    /// and on character boundaries.
    pub fn spans_are_valid(&self) -> bool {
        let mut last_end = 0;
        for &(s, e) in &self.paragraph_spans {
            if s < last_end || e < s || e > self.text.len() {
                return false;
            }
            if !self.text.is_char_boundary(s) || !self.text.is_char_boundary(e) {
                return false;
            }
            last_end = e;
        }
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    TrecSgml,
    RecordLines,
}

impl CorpusFormat {
    /// Picks `trec-sgml` when the first non-blank character is `<`.
    pub fn sniff(content: &str) -> Self {
        match content.trim_start().chars().next() {
            Some('<') => CorpusFormat::TrecSgml,
            _ => CorpusFormat::RecordLines,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            CorpusFormat::TrecSgml => "trec-sgml",
            CorpusFormat::RecordLines => "record-lines",
        }
    }
}

impl FromStr for CorpusFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "trec-sgml" => Ok(CorpusFormat::TrecSgml),
            "record-lines" => Ok(CorpusFormat::RecordLines),
            other => Err(format!("unknown corpus format `{other}`")),
        }
    }
}

/// A skipped input record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reject {
    /// 1-based line number where the record starts.
    pub line: usize,
    pub reason: String,
}

impl fmt::Display for Reject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.reason)
    }
}

/// Renders rejects as the sidecar file body, one per line.
pub fn render_rejects(rejects: &[Reject]) -> String {
    rejects.iter().map(|r| format!("{r}\n")).collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParsedCorpus {
    pub documents: Vec<Document>,
    pub rejects: Vec<Reject>,
}

/// Reads and parses a corpus file. `format = None` sniffs the content.
pub fn parse_corpus(path: &Path, format: Option<CorpusFormat>) -> Result<ParsedCorpus, Error> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let content = fs::read_to_string(path).io_context(path)?;
    let format = format.unwrap_or_else(|| CorpusFormat::sniff(&content));
    Ok(parse_corpus_str(&content, format))
}

pub fn parse_corpus_str(content: &str, format: CorpusFormat) -> ParsedCorpus {
    match format {
        CorpusFormat::TrecSgml => parse_trec_sgml(content),
        CorpusFormat::RecordLines => parse_record_lines(content),
    }
}

fn parse_record_lines(content: &str) -> ParsedCorpus {
    let mut out = ParsedCorpus::default();
    for (idx, raw) in content.lines().enumerate() {
        let line = idx + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        if fields.len() != 3 {
            out.rejects.push(Reject {
                line,
                reason: format!("expected 3 tab-separated fields, found {}", fields.len()),
            });
            continue;
        }
        let doc_id = fields[0].trim();
        if doc_id.is_empty() {
            out.rejects.push(Reject { line, reason: "empty doc_id".into() });
            continue;
        }
        let headline = Some(fields[1].trim()).filter(|h| !h.is_empty());
        out.documents.push(Document {
            doc_id: doc_id.to_string(),
            headline: headline.map(str::to_string),
            text: fields[2].trim().to_string(),
            paragraph_spans: Vec::new(),
        });
    }
    out
}

struct SgmlPatterns {
    doc: Regex,
    doc_id_attr: Regex,
    docno: Regex,
    headline: Regex,
    text: Regex,
    para: Regex,
    tag: Regex,
}

fn sgml() -> &'static SgmlPatterns {
    static PATTERNS: OnceLock<SgmlPatterns> = OnceLock::new();
    PATTERNS.get_or_init(|| SgmlPatterns {
        doc: Regex::new(r"(?is)<DOC(\s[^>]*)?>(.*?)</DOC>").unwrap(),
        doc_id_attr: Regex::new(r#"(?i)\bid\s*=\s*"([^"]*)""#).unwrap(),
        docno: Regex::new(r"(?is)<DOCNO>(.*?)</DOCNO>").unwrap(),
        headline: Regex::new(r"(?is)<HEADLINE>(.*?)</HEADLINE>").unwrap(),
        text: Regex::new(r"(?is)<TEXT>(.*?)</TEXT>").unwrap(),
        para: Regex::new(r"(?i)<P(\s[^>]*)?>").unwrap(),
        tag: Regex::new(r"<[^>]*>").unwrap(),
    })
}

fn decode_entities(s: &str) -> String {
    s.replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&apos;", "'")
        .replace("&amp;", "&")
}

fn clean(fragment: &str) -> String {
    let stripped = sgml().tag.replace_all(fragment, " ");
    decode_entities(stripped.trim())
}

fn line_of(content: &str, byte: usize) -> usize {
    content[..byte].bytes().filter(|&b| b == b'\n').count() + 1
}

fn parse_trec_sgml(content: &str) -> ParsedCorpus {
    let p = sgml();
    let mut out = ParsedCorpus::default();
    for caps in p.doc.captures_iter(content) {
        let whole = caps.get(0).unwrap();
        let line = line_of(content, whole.start());
        let attrs = caps.get(1).map_or("", |m| m.as_str());
        let body = caps.get(2).map_or("", |m| m.as_str());

        let doc_id = p
            .docno
            .captures(body)
            .map(|c| clean(&c[1]))
            .or_else(|| p.doc_id_attr.captures(attrs).map(|c| c[1].trim().to_string()))
            .filter(|id| !id.is_empty());
        let Some(doc_id) = doc_id else {
            out.rejects.push(Reject { line, reason: "missing <DOCNO>".into() });
            continue;
        };
        let Some(text_caps) = p.text.captures(body) else {
            out.rejects.push(Reject {
                line,
                reason: format!("document {doc_id} has no <TEXT>"),
            });
            continue;
        };
        let headline = p
            .headline
            .captures(body)
            .map(|c| clean(&c[1]))
            .filter(|h| !h.is_empty());

        let raw_text = &text_caps[1];
        let mut text = String::new();
        let mut paragraph_spans = Vec::new();
        if p.para.is_match(raw_text) {
            // Content before the first <P> is ignored; a missing </P> ends at the next <P>.
            for para in p.para.split(raw_text).skip(1) {
                let cleaned = clean(para);
                if cleaned.is_empty() {
                    continue;
                }
                if !text.is_empty() {
                    text.push_str("\n\n");
                }
                let start = text.len();
                text.push_str(&cleaned);
                paragraph_spans.push((start, text.len()));
            }
        } else {
            text = clean(raw_text);
        }
        out.documents.push(Document { doc_id, headline, text, paragraph_spans });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_DOCS: &str = "<DOC>\n<DOCNO> D1 </DOCNO>\n<HEADLINE>Ships &amp; storms</HEADLINE>\n<TEXT>\n<P>First para.</P>\n<P>Second para.</P>\n</TEXT>\n</DOC>\n<DOC id=\"D2\" type=\"story\">\n<TEXT>Plain body text.</TEXT>\n</DOC>\n";

    #[test]
    fn parses_two_sgml_docs_in_order() {
        let parsed = parse_corpus_str(TWO_DOCS, CorpusFormat::TrecSgml);
        assert!(parsed.rejects.is_empty());
        assert_eq!(parsed.documents.len(), 2);
        let d1 = &parsed.documents[0];
        assert_eq!(d1.doc_id, "D1");
        assert_eq!(d1.headline.as_deref(), Some("Ships & storms"));
        assert_eq!(d1.text, "First para.\n\nSecond para.");
        assert_eq!(d1.paragraph_spans.len(), 2);
        assert_eq!(&d1.text[d1.paragraph_spans[1].0..d1.paragraph_spans[1].1], "Second para.");
        assert!(d1.spans_are_valid());
        let d2 = &parsed.documents[1];
        assert_eq!(d2.doc_id, "D2");
        assert_eq!(d2.text, "Plain body text.");
        assert!(d2.paragraph_spans.is_empty());
    }

    #[test]
    fn doc_without_docno_is_rejected() {
        let input = "<DOC>\n<TEXT>orphan</TEXT>\n</DOC>\n<DOC>\n<DOCNO>ok</DOCNO><TEXT>fine</TEXT>\n</DOC>";
        let parsed = parse_corpus_str(input, CorpusFormat::TrecSgml);
        assert_eq!(parsed.documents.len(), 1);
        assert_eq!(parsed.rejects.len(), 1);
        assert_eq!(parsed.rejects[0].line, 1);
        assert!(parsed.rejects[0].reason.contains("DOCNO"));
    }

    #[test]
    fn record_lines_skip_and_report() {
        let input = "d1\tHead\tBody one.\nbroken line without tabs\nd3\t\tBody three.\n";
        let parsed = parse_corpus_str(input, CorpusFormat::RecordLines);
        assert_eq!(parsed.documents.len(), 2);
        assert_eq!(parsed.documents[1].doc_id, "d3");
        assert_eq!(parsed.documents[1].headline, None);
        assert_eq!(parsed.rejects, vec![Reject {
            line: 2,
            reason: "expected 3 tab-separated fields, found 1".into()
        }]);
        assert_eq!(render_rejects(&parsed.rejects), "line 2: expected 3 tab-separated fields, found 1\n");
    }

    #[test]
    fn sniffing() {
        assert_eq!(CorpusFormat::sniff("  \n<DOC>"), CorpusFormat::TrecSgml);
        assert_eq!(CorpusFormat::sniff("d1\tx\ty"), CorpusFormat::RecordLines);
    }

    #[test]
    fn missing_file() {
        let err = parse_corpus(Path::new("/nonexistent/corpus.sgml"), None).unwrap_err();
        assert!(matches!(err, Error::MissingFile(_)));
    }
}
