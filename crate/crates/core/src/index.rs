//! Positional inverted index with stored documents.
//!
//! Every token is indexed, stopwords included; the stoplist only shapes
//! queries. Document text is kept in the index so later stages can cut
//! passages from it.
//!
//! # File layout (version 1)
//!
//! All integers are little-endian. Strings are a `u64` byte length followed by
//! UTF-8 bytes.
//!
//! ```text
//! magic       8 bytes  "QANUSIDX"
//! version     u32      1
//! "STAT"      u64 doc_count, u64 distinct_terms, u64 total_postings,
//!             f64 avg_doc_length (IEEE-754 bits)
//! "DOCS"      u64 n, then per document in doc_id order:
//!             str doc_id, u8 has_headline, [str headline], str text,
//!             u64 doc_length, u64 span_count, (u64 start, u64 end)*
//! "LEXI"      u64 n, then per term in byte order: str term, u64 df
//! "POST"      per lexicon term, per posting in doc_id order:
//!             u32 doc ordinal (into DOCS), u32 tf, u32 position * tf
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::corpus::Document;
use crate::error::IoContext;
use crate::text::tokenize;
use crate::{Error, Result};

pub const INDEX_MAGIC: &[u8; 8] = b"QANUSIDX";
pub const INDEX_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Posting {
    pub doc_id: String,
    pub term_frequency: u32,
    pub positions: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct InvertedIndex {
    /// Term to postings sorted by `doc_id`.
    pub postings: BTreeMap<String, Vec<Posting>>,
    pub doc_lengths: BTreeMap<String, u32>,
    pub avg_doc_length: f64,
    pub stored_docs: BTreeMap<String, Document>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexStats {
    pub doc_count: usize,
    pub distinct_terms: usize,
    pub total_postings: usize,
    pub avg_doc_length: f64,
}

impl std::fmt::Display for IndexStats {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "docs={} terms={} postings={} avg_doc_length={:.3}",
            self.doc_count, self.distinct_terms, self.total_postings, self.avg_doc_length
        )
    }
}

type TermPositions = BTreeMap<String, Vec<u32>>;

/// Builds the index. Documents are tokenized in parallel; the merge is keyed
/// by `doc_id` so the result does not depend on input order or scheduling.
pub fn build_index(documents: Vec<Document>) -> Result<InvertedIndex> {
    let mut stored_docs = BTreeMap::new();
    for doc in documents {
        if stored_docs.contains_key(&doc.doc_id) {
            return Err(Error::DuplicateDocId(doc.doc_id));
        }
        stored_docs.insert(doc.doc_id.clone(), doc);
    }

    let per_doc: Vec<(&String, u32, TermPositions)> = stored_docs
        .par_iter()
        .map(|(id, doc)| {
            let tokens = tokenize(&doc.text);
            let mut terms: BTreeMap<String, Vec<u32>> = BTreeMap::new();
            for tok in &tokens {
                terms.entry(tok.surface.clone()).or_default().push(tok.position);
            }
            (id, tokens.len() as u32, terms)
        })
        .collect();

    let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
    let mut doc_lengths = BTreeMap::new();
    // per_doc follows doc_id order, so each postings list is appended in order.
    for (id, len, terms) in per_doc {
        doc_lengths.insert(id.clone(), len);
        for (term, positions) in terms {
            postings.entry(term).or_default().push(Posting {
                doc_id: id.clone(),
                term_frequency: positions.len() as u32,
                positions,
            });
        }
    }

    let avg_doc_length = mean_length(&doc_lengths);
    Ok(InvertedIndex { postings, doc_lengths, avg_doc_length, stored_docs })
}

fn mean_length(doc_lengths: &BTreeMap<String, u32>) -> f64 {
    if doc_lengths.is_empty() {
        0.0
    } else {
        doc_lengths.values().map(|&l| l as u64).sum::<u64>() as f64 / doc_lengths.len() as f64
    }
}

impl InvertedIndex {
    pub fn doc_count(&self) -> usize {
        self.doc_lengths.len()
    }

    pub fn doc_freq(&self, term: &str) -> usize {
        self.postings.get(term).map_or(0, Vec::len)
    }

    /// `ln(1 + (N - df + 0.5) / (df + 0.5))`, never negative.
    pub fn idf(&self, term: &str) -> f64 {
        bm25_idf(self.doc_count(), self.doc_freq(term))
    }

    pub fn document(&self, doc_id: &str) -> Option<&Document> {
        self.stored_docs.get(doc_id)
    }

    pub fn stats(&self) -> IndexStats {
        IndexStats {
            doc_count: self.doc_count(),
            distinct_terms: self.postings.len(),
            total_postings: self.postings.values().map(Vec::len).sum(),
            avg_doc_length: self.avg_doc_length,
        }
    }

    /// Serializes to the versioned binary layout described in the module docs.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::default();
        w.raw(INDEX_MAGIC);
        w.u32(INDEX_VERSION);

        let stats = self.stats();
        w.raw(b"STAT");
        w.u64(stats.doc_count as u64);
        w.u64(stats.distinct_terms as u64);
        w.u64(stats.total_postings as u64);
        w.f64(self.avg_doc_length);

        w.raw(b"DOCS");
        w.u64(self.stored_docs.len() as u64);
        let mut ordinals = BTreeMap::new();
        for (ordinal, (id, doc)) in self.stored_docs.iter().enumerate() {
            ordinals.insert(id.as_str(), ordinal as u32);
            w.str(id);
            match &doc.headline {
                Some(h) => {
                    w.u8(1);
                    w.str(h);
                }
                None => w.u8(0),
            }
            w.str(&doc.text);
            w.u64(self.doc_lengths.get(id).copied().unwrap_or(0) as u64);
            w.u64(doc.paragraph_spans.len() as u64);
            for &(s, e) in &doc.paragraph_spans {
                w.u64(s as u64);
                w.u64(e as u64);
            }
        }

        w.raw(b"LEXI");
        w.u64(self.postings.len() as u64);
        for (term, list) in &self.postings {
            w.str(term);
            w.u64(list.len() as u64);
        }

        w.raw(b"POST");
        for list in self.postings.values() {
            for p in list {
                w.u32(ordinals[p.doc_id.as_str()]);
                w.u32(p.term_frequency);
                for &pos in &p.positions {
                    w.u32(pos);
                }
            }
        }
        w.buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, at: 0 };
        let magic = r.take(8)?;
        if magic != INDEX_MAGIC {
            return Err(Error::VersionMismatch {
                found: String::from_utf8_lossy(magic).into_owned(),
                expected: String::from_utf8_lossy(INDEX_MAGIC).into_owned(),
            });
        }
        let version = r.u32()?;
        if version != INDEX_VERSION {
            return Err(Error::VersionMismatch {
                found: version.to_string(),
                expected: INDEX_VERSION.to_string(),
            });
        }

        r.tag(b"STAT")?;
        let doc_count = r.u64()? as usize;
        let distinct_terms = r.u64()? as usize;
        let total_postings = r.u64()? as usize;
        let avg_doc_length = r.f64()?;

        r.tag(b"DOCS")?;
        let n_docs = r.u64()? as usize;
        if n_docs != doc_count {
            return Err(corrupt(format!("stats say {doc_count} docs, table has {n_docs}")));
        }
        let mut ids = Vec::with_capacity(n_docs);
        let mut stored_docs = BTreeMap::new();
        let mut doc_lengths = BTreeMap::new();
        for _ in 0..n_docs {
            let doc_id = r.str()?;
            let headline = match r.u8()? {
                0 => None,
                1 => Some(r.str()?),
                other => return Err(corrupt(format!("bad headline flag {other}"))),
            };
            let text = r.str()?;
            let len = r.u64()?;
            let n_spans = r.u64()? as usize;
            let mut paragraph_spans = Vec::with_capacity(n_spans.min(1 << 16));
            for _ in 0..n_spans {
                paragraph_spans.push((r.u64()? as usize, r.u64()? as usize));
            }
            let doc = Document { doc_id: doc_id.clone(), headline, text, paragraph_spans };
            if !doc.spans_are_valid() {
                return Err(corrupt(format!("invalid paragraph spans in {doc_id}")));
            }
            if ids.last().is_some_and(|prev: &String| prev >= &doc_id) {
                return Err(corrupt("documents out of order".into()));
            }
            ids.push(doc_id.clone());
            doc_lengths.insert(doc_id.clone(), len as u32);
            stored_docs.insert(doc_id, doc);
        }

        r.tag(b"LEXI")?;
        let n_terms = r.u64()? as usize;
        if n_terms != distinct_terms {
            return Err(corrupt(format!("stats say {distinct_terms} terms, lexicon has {n_terms}")));
        }
        let mut lexicon = Vec::with_capacity(n_terms);
        for _ in 0..n_terms {
            lexicon.push((r.str()?, r.u64()? as usize));
        }

        r.tag(b"POST")?;
        let mut postings = BTreeMap::new();
        let mut seen_postings = 0;
        for (term, df) in lexicon {
            let mut list = Vec::with_capacity(df.min(n_docs));
            for _ in 0..df {
                let ordinal = r.u32()? as usize;
                let doc_id = ids
                    .get(ordinal)
                    .ok_or_else(|| corrupt(format!("doc ordinal {ordinal} out of range")))?
                    .clone();
                let tf = r.u32()?;
                let mut positions = Vec::with_capacity((tf as usize).min(1 << 16));
                for _ in 0..tf {
                    positions.push(r.u32()?);
                }
                list.push(Posting { doc_id, term_frequency: tf, positions });
            }
            seen_postings += list.len();
            if postings.insert(term.clone(), list).is_some() {
                return Err(corrupt(format!("term `{term}` listed twice")));
            }
        }
        if seen_postings != total_postings {
            return Err(corrupt(format!(
                "stats say {total_postings} postings, found {seen_postings}"
            )));
        }
        if r.at != bytes.len() {
            return Err(corrupt(format!("{} trailing bytes", bytes.len() - r.at)));
        }
        Ok(InvertedIndex { postings, doc_lengths, avg_doc_length, stored_docs })
    }
}

pub fn bm25_idf(doc_count: usize, doc_freq: usize) -> f64 {
    let n = doc_count as f64;
    let df = doc_freq as f64;
    (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
}

pub fn write_index(index: &InvertedIndex, path: &Path) -> Result<()> {
    let mut file = fs::File::create(path).io_context(path)?;
    file.write_all(&index.to_bytes()).io_context(path)
}

pub fn load_index(path: &Path) -> Result<InvertedIndex> {
    let bytes = fs::read(path).io_context(path)?;
    InvertedIndex::from_bytes(&bytes)
}

fn corrupt(detail: String) -> Error {
    Error::CorruptIndex(detail)
}

#[derive(Default)]
struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn raw(&mut self, b: &[u8]) {
        self.buf.extend_from_slice(b);
    }
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.raw(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.raw(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.raw(&v.to_bits().to_le_bytes());
    }
    fn str(&mut self, s: &str) {
        self.u64(s.len() as u64);
        self.raw(s.as_bytes());
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .at
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| corrupt(format!("unexpected end of file at byte {}", self.at)))?;
        let out = &self.bytes[self.at..end];
        self.at = end;
        Ok(out)
    }
    fn tag(&mut self, expected: &[u8; 4]) -> Result<()> {
        let found = self.take(4)?;
        if found != expected {
            return Err(corrupt(format!(
                "expected section {}, found {:?}",
                String::from_utf8_lossy(expected),
                String::from_utf8_lossy(found)
            )));
        }
        Ok(())
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }
    fn str(&mut self) -> Result<String> {
        let len = self.u64()? as usize;
        let raw = self.take(len)?;
        String::from_utf8(raw.to_vec()).map_err(|e| corrupt(format!("invalid UTF-8: {e}")))
    }
}
