//! Seeded fixture generators for tests, benchmarks and demos.
//!
//! Everything here is a pure function of its seed. Words are invented from
//! syllables so that no fixture depends on an external word list.

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::Document;
use crate::taxonomy::Label;
use crate::text::DEFAULT_STOPWORDS;

const ONSETS: [&str; 18] = ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "st", "tr", "gl"];
const VOWELS: [&str; 6] = ["a", "e", "i", "o", "u", "ai"];
const CODAS: [&str; 6] = ["", "", "n", "r", "sk", "l"];
const MONTHS: [&str; 12] = [
    "January", "February", "March", "April", "May", "June", "July", "August", "September", "October",
    "November", "December",
];

/// Hands out invented lowercase words, never the same word twice.
struct WordMint {
    rng: ChaCha8Rng,
    used: HashSet<String>,
}

impl WordMint {
    fn new(seed: u64) -> Self {
        let used = DEFAULT_STOPWORDS.iter().map(|s| s.to_string()).collect();
        Self { rng: ChaCha8Rng::seed_from_u64(seed), used }
    }

    fn word(&mut self, syllables: std::ops::RangeInclusive<usize>) -> String {
        loop {
            let n = self.rng.gen_range(syllables.clone());
            let mut w = String::new();
            for _ in 0..n {
                w.push_str(ONSETS.choose(&mut self.rng).unwrap());
                w.push_str(VOWELS.choose(&mut self.rng).unwrap());
            }
            w.push_str(CODAS.choose(&mut self.rng).unwrap());
            if w.len() >= 4 && self.used.insert(w.clone()) {
                return w;
            }
        }
    }

    fn name(&mut self) -> String {
        capitalize(&self.word(2..=3))
    }

    fn words(&mut self, n: usize, syllables: std::ops::RangeInclusive<usize>) -> Vec<String> {
        (0..n).map(|_| self.word(syllables.clone())).collect()
    }
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    c.next().map_or_else(String::new, |f| f.to_uppercase().chain(c).collect())
}

fn thousands(n: u32) -> String {
    let digits = n.to_string();
    let mut out = String::new();
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

/// A lowercase filler sentence with a capitalized first word.
fn filler_sentence(rng: &mut ChaCha8Rng, vocab: &[String]) -> String {
    let n = rng.gen_range(6..=12);
    let words: Vec<&str> = (0..n).map(|_| vocab.choose(rng).unwrap().as_str()).collect();
    format!("{}.", capitalize(&words.join(" ")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FactKind {
    Date,
    Count,
    Person,
    Location,
}

impl FactKind {
    pub const ALL: [FactKind; 4] = [FactKind::Date, FactKind::Count, FactKind::Person, FactKind::Location];

    /// The label a correct classifier assigns to this kind's questions.
    pub fn label(&self) -> Label {
        let (coarse, fine) = match self {
            FactKind::Date => ("NUM", "date"),
            FactKind::Count => ("NUM", "count"),
            FactKind::Person => ("HUM", "ind"),
            FactKind::Location => ("LOC", "other"),
        };
        format!("{coarse}:{fine}").parse().expect("taxonomy label")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlantedFact {
    pub qid: String,
    pub kind: FactKind,
    pub question: String,
    pub answer: String,
    pub doc_id: String,
}

#[derive(Debug, Clone)]
pub struct PlantedFixture {
    pub documents: Vec<Document>,
    pub facts: Vec<PlantedFact>,
}

impl PlantedFixture {
    /// The corpus in `trec-sgml` layout.
    pub fn corpus_sgml(&self) -> String {
        let mut out = String::new();
        for doc in &self.documents {
            writeln!(out, "<DOC>\n<DOCNO> {} </DOCNO>", doc.doc_id).unwrap();
            if let Some(h) = &doc.headline {
                writeln!(out, "<HEADLINE> {h} </HEADLINE>").unwrap();
            }
            out.push_str("<TEXT>\n");
            for para in doc.text.split("\n\n") {
                writeln!(out, "<P>\n{para}\n</P>").unwrap();
            }
            out.push_str("</TEXT>\n</DOC>\n");
        }
        out
    }

    /// The questions in `qline` layout.
    pub fn questions_qline(&self) -> String {
        self.facts.iter().map(|f| format!("{}\t{}\n", f.qid, f.question)).collect()
    }

    /// One escaped literal pattern per question.
    pub fn gold(&self) -> String {
        self.facts
            .iter()
            .map(|f| format!("{} {}\n", f.qid, regex::escape(&f.answer)))
            .collect()
    }
}

struct Plant {
    sentence: String,
    distractor: String,
    question: String,
    answer: String,
}

fn plant(kind: FactKind, variant: usize, mint: &mut WordMint, rng: &mut ChaCha8Rng) -> Plant {
    let topic = mint.name();
    match kind {
        FactKind::Date => {
            let date = |rng: &mut ChaCha8Rng| {
                format!("{} {} {}", rng.gen_range(1..=28), MONTHS.choose(rng).unwrap(), rng.gen_range(1700..=1999))
            };
            let answer = date(rng);
            let other = date(rng);
            let (sentence, question) = match variant % 2 {
                0 => (
                    format!("The {topic} accord was ratified on {answer} by the assembly."),
                    format!("When was the {topic} accord ratified?"),
                ),
                _ => (
                    format!("The {topic} bridge opened to traffic on {answer} after years of work."),
                    format!("When did the {topic} bridge open?"),
                ),
            };
            let distractor = format!("A painting of {topic} was sold on {other}.");
            Plant { sentence, distractor, question, answer }
        }
        FactKind::Count => {
            let answer = thousands(rng.gen_range(1_200..=98_000));
            let other = thousands(rng.gen_range(1_200..=98_000));
            let (sentence, question) = match variant % 2 {
                0 => (
                    format!("The {topic} reservoir holds {answer} barrels of water in summer."),
                    format!("How many barrels does the {topic} reservoir hold?"),
                ),
                _ => (
                    format!("The {topic} library keeps {answer} volumes in its cellar."),
                    format!("How many volumes does the {topic} library keep?"),
                ),
            };
            let distractor = format!("Visitors to {topic} numbered {other} last season.");
            Plant { sentence, distractor, question, answer }
        }
        FactKind::Person => {
            let answer = format!("{} {}", mint.name(), mint.name());
            let other = format!("{} {}", mint.name(), mint.name());
            let (sentence, question) = match variant % 2 {
                0 => (
                    format!("The {topic} observatory was founded by {answer} in a dry spring."),
                    format!("Who founded the {topic} observatory?"),
                ),
                _ => (
                    format!("The {topic} symphony was composed by {answer} for the harvest."),
                    format!("Who composed the {topic} symphony?"),
                ),
            };
            let distractor = format!("Critics such as {other} admired {topic} greatly.");
            Plant { sentence, distractor, question, answer }
        }
        FactKind::Location => {
            let answer = mint.name();
            let other = mint.name();
            let (sentence, question) = match variant % 2 {
                0 => (
                    format!("The {topic} festival is held every year in {answer} near the coast."),
                    format!("Where is the {topic} festival held?"),
                ),
                _ => (
                    format!("The {topic} mint is located in {answer} beside the river."),
                    format!("Where is the {topic} mint located?"),
                ),
            };
            let distractor = format!("Traders from {other} spoke of {topic} often.");
            Plant { sentence, distractor, question, answer }
        }
    }
}

fn paragraphs(rng: &mut ChaCha8Rng, vocab: &[String], sentences: usize) -> Vec<Vec<String>> {
    let mut paras = Vec::new();
    let mut left = sentences;
    while left > 0 {
        let take = rng.gen_range(2..=4).min(left);
        paras.push((0..take).map(|_| filler_sentence(rng, vocab)).collect());
        left -= take;
    }
    paras
}

fn insert_sentence(rng: &mut ChaCha8Rng, paras: &mut [Vec<String>], sentence: String) {
    let p = rng.gen_range(0..paras.len());
    let at = rng.gen_range(0..=paras[p].len());
    paras[p].insert(at, sentence);
}

fn join(paras: &[Vec<String>]) -> String {
    paras.iter().map(|p| p.join(" ")).collect::<Vec<_>>().join("\n\n")
}

/// `doc_count` documents with `per_kind` planted facts of each [`FactKind`].
/// Each fact sits in its own document next to the question's content words;
/// a second document mentions the fact's topic beside a same-typed decoy.
pub fn planted_fixture(seed: u64, doc_count: usize, per_kind: usize) -> PlantedFixture {
    assert!(doc_count >= 2 * per_kind * FactKind::ALL.len(), "not enough documents to plant into");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mint = WordMint::new(seed ^ 0x9E37_79B9_7F4A_7C15);
    let vocab = mint.words(400, 1..=3);

    let mut bodies: Vec<Vec<Vec<String>>> = (0..doc_count)
        .map(|_| {
            let sentences = rng.gen_range(6..=14);
            paragraphs(&mut rng, &vocab, sentences)
        })
        .collect();
    let mut slots: Vec<usize> = (0..doc_count).collect();
    slots.shuffle(&mut rng);
    let mut slots = slots.into_iter();

    let mut facts = Vec::new();
    for i in 0..per_kind {
        for kind in FactKind::ALL {
            let p = plant(kind, i, &mut mint, &mut rng);
            let home = slots.next().unwrap();
            let decoy = slots.next().unwrap();
            insert_sentence(&mut rng, &mut bodies[home], p.sentence);
            insert_sentence(&mut rng, &mut bodies[decoy], p.distractor);
            facts.push(PlantedFact {
                qid: format!("Q{:02}", facts.len() + 1),
                kind,
                question: p.question,
                answer: p.answer,
                doc_id: format!("SYN{home:04}"),
            });
        }
    }

    let documents = bodies
        .iter()
        .enumerate()
        .map(|(i, paras)| {
            let text = join(paras);
            let spans = paragraph_spans(&text);
            Document {
                doc_id: format!("SYN{i:04}"),
                headline: Some(format!("Report {}", i + 1)),
                text,
                paragraph_spans: spans,
            }
        })
        .collect();
    PlantedFixture { documents, facts }
}

fn paragraph_spans(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = 0;
    for part in text.split("\n\n") {
        spans.push((start, start + part.len()));
        start += part.len() + 2;
    }
    spans
}

/// Documents over a Zipf-like vocabulary with mixed case, punctuation and
/// lengths. A few documents repeat earlier texts under new ids so rankings
/// contain exact score ties.
pub fn random_corpus(seed: u64, doc_count: usize) -> Vec<Document> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mint = WordMint::new(seed.wrapping_add(1));
    let vocab = mint.words(300, 1..=3);
    let weights: Vec<f64> = (1..=vocab.len()).map(|r| 1.0 / r as f64).collect();
    let dist = rand::distributions::WeightedIndex::new(&weights).unwrap();
    let mut docs: Vec<Document> = Vec::with_capacity(doc_count);
    for i in 0..doc_count {
        let id = format!("D{i:05}");
        if i >= 10 && rng.gen_bool(0.05) {
            let twin = docs[rng.gen_range(0..docs.len())].text.clone();
            docs.push(Document::new(id, twin));
            continue;
        }
        let len = rng.gen_range(5..=120);
        let mut text = String::new();
        for j in 0..len {
            let mut w = vocab[rng.sample(&dist)].clone();
            match rng.gen_range(0..10) {
                0 => w = capitalize(&w),
                1 => w = w.to_uppercase(),
                _ => {}
            }
            if j > 0 {
                text.push_str(if rng.gen_bool(0.1) { "\n" } else { " " });
            }
            text.push_str(&w);
            match rng.gen_range(0..12) {
                0 => text.push('.'),
                1 => text.push(','),
                2 => text.push_str("--"),
                _ => {}
            }
        }
        docs.push(Document::new(id, text));
    }
    docs
}

/// Queries of 1 to 4 terms drawn from the corpus vocabulary, with the odd
/// repeated or absent term.
pub fn random_queries(seed: u64, docs: &[Document], count: usize) -> Vec<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vocab: Vec<String> = docs
        .iter()
        .flat_map(|d| crate::text::terms(&d.text))
        .collect::<HashSet<_>>()
        .into_iter()
        .collect();
    vocab.sort();
    (0..count)
        .map(|_| {
            let n = rng.gen_range(1..=4);
            let mut q: Vec<String> = (0..n).map(|_| vocab.choose(&mut rng).unwrap().clone()).collect();
            if rng.gen_bool(0.2) {
                q.push(q[0].clone());
            }
            if rng.gen_bool(0.2) {
                q.push("zzzunseen".to_string());
            }
            q
        })
        .collect()
}

/// Training lines in the UIUC layout for six classes whose question words
/// come from pairwise disjoint vocabularies.
pub fn disjoint_training_lines(seed: u64, count: usize) -> Vec<String> {
    const LABELS: [&str; 6] = ["ABBR:exp", "DESC:def", "ENTY:animal", "HUM:ind", "LOC:city", "NUM:date"];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mint = WordMint::new(seed.wrapping_mul(31).wrapping_add(7));
    let vocabularies: Vec<Vec<String>> = LABELS.iter().map(|_| mint.words(40, 1..=3)).collect();
    (0..count)
        .map(|i| {
            let class = i % LABELS.len();
            let n = rng.gen_range(4..=10);
            let words: Vec<&str> = (0..n).map(|_| vocabularies[class].choose(&mut rng).unwrap().as_str()).collect();
            format!("{} {} ?", LABELS[class], words.join(" "))
        })
        .collect()
}

/// Question-like strings, some built from real question words and some from
/// invented ones.
pub fn random_questions(seed: u64, count: usize) -> Vec<String> {
    const STARTS: [&str; 9] = ["What", "Who", "When", "Where", "Why", "How many", "How", "Which", "Name"];
    const COMMON: [&str; 12] =
        ["is", "the", "of", "city", "year", "invented", "largest", "river", "born", "president", "called", "a"];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mint = WordMint::new(seed ^ 0xABCD);
    let invented = mint.words(200, 1..=3);
    (0..count)
        .map(|_| {
            let mut q = vec![STARTS.choose(&mut rng).unwrap().to_string()];
            for _ in 0..rng.gen_range(0..=10) {
                let w = if rng.gen_bool(0.5) {
                    COMMON.choose(&mut rng).unwrap().to_string()
                } else {
                    invented.choose(&mut rng).unwrap().clone()
                };
                q.push(w);
            }
            format!("{}?", q.join(" "))
        })
        .collect()
}
