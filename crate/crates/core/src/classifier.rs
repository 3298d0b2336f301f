//! Multinomial naive Bayes over question features.
//!
//! Likelihoods use add-alpha smoothing over the training vocabulary plus one
//! reserved slot for features never seen in training:
//!
//! ```text
//! P(f | c)     = (count(f, c) + alpha) / (total(c) + alpha * (|V| + 1))
//! P(unseen | c) =                alpha / (total(c) + alpha * (|V| + 1))
//! ```
//!
//! so each class's distribution over the vocabulary and the unseen slot sums
//! to one.
//!
//! Model files are plain text headed by `QANUSNB1`. They hold raw counts
//! only; every probability is re-derived on load. Lines are sorted so that
//! training input order never changes the bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::corpus::Reject;
use crate::error::IoContext;
use crate::taxonomy::{AnswerType, Label};
use crate::text::terms;
use crate::{Error, Result};

pub const MODEL_MAGIC: &str = "QANUSNB1";

const WH_WORDS: [&str; 7] = ["who", "what", "when", "where", "which", "why", "how"];

/// Feature multiset for a question, as sorted `(feature, count)` pairs.
///
/// Features: lowercased unigrams, `first2=<t0>_<t1>`, `wh=<first wh-word or
/// none>`, and `len=1-3|4-7|8+` over the token count.
pub fn extract_features(text: &str) -> BTreeMap<String, u64> {
    let tokens = terms(text);
    let mut features: BTreeMap<String, u64> = BTreeMap::new();
    for t in &tokens {
        *features.entry(t.clone()).or_default() += 1;
    }
    if tokens.len() >= 2 {
        *features.entry(format!("first2={}_{}", tokens[0], tokens[1])).or_default() += 1;
    }
    let wh = tokens
        .iter()
        .find(|t| WH_WORDS.contains(&t.as_str()))
        .map_or("none", String::as_str);
    *features.entry(format!("wh={wh}")).or_default() += 1;
    let bucket = match tokens.len() {
        0..=3 => "1-3",
        4..=7 => "4-7",
        _ => "8+",
    };
    *features.entry(format!("len={bucket}")).or_default() += 1;
    features
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelSpace {
    CoarseOnly,
    CoarseFine,
}

impl LabelSpace {
    pub fn as_str(&self) -> &'static str {
        match self {
            LabelSpace::CoarseOnly => "coarse",
            LabelSpace::CoarseFine => "coarse+fine",
        }
    }
}

impl FromStr for LabelSpace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coarse" => Ok(LabelSpace::CoarseOnly),
            "coarse+fine" => Ok(LabelSpace::CoarseFine),
            other => Err(Error::CorruptModel(format!("unknown label space `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainingExample {
    pub label: Label,
    pub text: String,
}

/// Parses `COARSE:fine question text` lines (the UIUC layout). Lines with an
/// unknown label or no text are rejected and reported.
pub fn parse_training_str(content: &str) -> (Vec<TrainingExample>, Vec<Reject>) {
    let mut examples = Vec::new();
    let mut rejects = Vec::new();
    for (idx, raw) in content.lines().enumerate() {
        let line = idx + 1;
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        let (label, text) = raw.split_once(char::is_whitespace).unwrap_or((raw, ""));
        let text = text.trim();
        match label.parse::<Label>() {
            Ok(label) if !text.is_empty() => {
                examples.push(TrainingExample { label, text: text.to_string() })
            }
            Ok(_) => rejects.push(Reject { line, reason: "missing question text".into() }),
            Err(e) => rejects.push(Reject { line, reason: e.to_string() }),
        }
    }
    (examples, rejects)
}

/// Non-empty lines in a training file; the denominator for the reject tolerance.
pub fn count_training_lines(content: &str) -> usize {
    content.lines().filter(|l| !l.trim().is_empty()).count()
}

#[derive(Debug, Clone, PartialEq)]
struct ClassStats {
    examples: u64,
    total_features: u64,
    features: BTreeMap<String, u64>,
    log_prior: f64,
    log_denominator: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierModel {
    pub label_space: LabelSpace,
    pub smoothing_alpha: f64,
    pub vocabulary: BTreeSet<String>,
    classes: BTreeMap<String, ClassStats>,
}

/// Posterior probability per label, in label order.
pub type Posterior = Vec<(String, f64)>;

pub fn train_classifier(
    examples: &[TrainingExample],
    alpha: f64,
    label_space: LabelSpace,
) -> Result<ClassifierModel> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::BadAlpha(alpha));
    }
    if examples.is_empty() {
        return Err(Error::NoExamples);
    }
    let mut counts: BTreeMap<String, (u64, BTreeMap<String, u64>)> = BTreeMap::new();
    for ex in examples {
        let label = match label_space {
            LabelSpace::CoarseOnly => ex.label.to_coarse(),
            LabelSpace::CoarseFine => ex.label.clone(),
        };
        let entry = counts.entry(label.to_string()).or_default();
        entry.0 += 1;
        for (f, n) in extract_features(&ex.text) {
            *entry.1.entry(f).or_default() += n;
        }
    }
    Ok(ClassifierModel::from_counts(label_space, alpha, counts))
}

impl ClassifierModel {
    fn from_counts(
        label_space: LabelSpace,
        alpha: f64,
        counts: BTreeMap<String, (u64, BTreeMap<String, u64>)>,
    ) -> Self {
        let vocabulary: BTreeSet<String> =
            counts.values().flat_map(|(_, f)| f.keys().cloned()).collect();
        let n_examples: u64 = counts.values().map(|(n, _)| n).sum();
        let slots = vocabulary.len() as f64 + 1.0;
        let classes = counts
            .into_iter()
            .map(|(label, (examples, features))| {
                let total_features: u64 = features.values().sum();
                let stats = ClassStats {
                    examples,
                    total_features,
                    features,
                    log_prior: (examples as f64 / n_examples as f64).ln(),
                    log_denominator: (total_features as f64 + alpha * slots).ln(),
                };
                (label, stats)
            })
            .collect();
        Self { label_space, smoothing_alpha: alpha, vocabulary, classes }
    }

    /// Labels in lexicographic order.
    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.classes.keys().map(String::as_str)
    }

    pub fn label_count(&self) -> usize {
        self.classes.len()
    }

    pub fn log_prior(&self, label: &str) -> Option<f64> {
        self.classes.get(label).map(|c| c.log_prior)
    }

    /// Smoothed log P(feature | label); features outside the vocabulary get
    /// the unseen slot.
    pub fn log_likelihood(&self, label: &str, feature: &str) -> Option<f64> {
        let class = self.classes.get(label)?;
        let count = if self.vocabulary.contains(feature) {
            class.features.get(feature).copied().unwrap_or(0) as f64
        } else {
            0.0
        };
        Some((count + self.smoothing_alpha).ln() - class.log_denominator)
    }

    pub fn unseen_log_likelihood(&self, label: &str) -> Option<f64> {
        self.classes
            .get(label)
            .map(|c| self.smoothing_alpha.ln() - c.log_denominator)
    }

    /// Unnormalized joint log scores per label.
    pub fn log_scores(&self, text: &str) -> Vec<(String, f64)> {
        let features = extract_features(text);
        self.classes
            .iter()
            .map(|(label, class)| {
                let mut score = class.log_prior;
                for (f, &n) in &features {
                    let count = if self.vocabulary.contains(f) {
                        class.features.get(f).copied().unwrap_or(0) as f64
                    } else {
                        0.0
                    };
                    score += n as f64 * ((count + self.smoothing_alpha).ln() - class.log_denominator);
                }
                (label.clone(), score)
            })
            .collect()
    }

    pub fn posterior(&self, text: &str) -> Posterior {
        let scores = self.log_scores(text);
        let max = scores.iter().map(|(_, s)| *s).fold(f64::NEG_INFINITY, f64::max);
        let exp: Vec<f64> = scores.iter().map(|(_, s)| (s - max).exp()).collect();
        let z: f64 = exp.iter().sum();
        scores
            .into_iter()
            .zip(exp)
            .map(|((label, _), e)| (label, e / z))
            .collect()
    }

    /// Argmax label; ties go to the lexicographically smallest label.
    pub fn classify(&self, text: &str) -> AnswerType {
        let posterior = self.posterior(text);
        let (label, p) = posterior
            .iter()
            .fold(None::<&(String, f64)>, |best, cur| match best {
                Some(b) if b.1 >= cur.1 => Some(b),
                _ => Some(cur),
            })
            .expect("a trained model has at least one label");
        let label: Label = label.parse().expect("model labels are validated on load");
        AnswerType::new(label, *p)
    }

    /// True when none of the question's features were seen in training.
    pub fn knows_nothing_about(&self, text: &str) -> bool {
        extract_features(text).keys().all(|f| !self.vocabulary.contains(f))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{MODEL_MAGIC}").unwrap();
        writeln!(out, "label_space {}", self.label_space.as_str()).unwrap();
        writeln!(out, "alpha {}", self.smoothing_alpha).unwrap();
        writeln!(out, "labels {}", self.classes.len()).unwrap();
        for (label, c) in &self.classes {
            writeln!(out, "label {label} {} {}", c.examples, c.total_features).unwrap();
        }
        writeln!(out, "vocab {}", self.vocabulary.len()).unwrap();
        for (label, c) in &self.classes {
            for (f, n) in &c.features {
                writeln!(out, "feature {label} {f} {n}").unwrap();
            }
        }
        out.push_str("end\n");
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |line: usize, msg: &str| Error::CorruptModel(format!("line {line}: {msg}"));
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut next = |what: &str| lines.next().ok_or_else(|| bad(0, &format!("missing {what}")));

        let (_, magic) = next("magic")?;
        if magic != MODEL_MAGIC {
            return Err(Error::VersionMismatch {
                found: magic.chars().take(16).collect(),
                expected: MODEL_MAGIC.into(),
            });
        }
        let field = |(no, line): (usize, &str), key: &str| -> Result<String> {
            line.strip_prefix(key)
                .and_then(|r| r.strip_prefix(' '))
                .map(str::to_string)
                .ok_or_else(|| bad(no, &format!("expected `{key}`")))
        };
        let label_space: LabelSpace = field(next("label_space")?, "label_space")?.parse()?;
        let alpha_line = next("alpha")?;
        let alpha: f64 = field(alpha_line, "alpha")?
            .parse()
            .map_err(|_| bad(alpha_line.0, "alpha is not a number"))?;
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::BadAlpha(alpha));
        }
        let n_line = next("labels")?;
        let n_labels: usize = field(n_line, "labels")?
            .parse()
            .map_err(|_| bad(n_line.0, "bad label count"))?;

        let mut counts: BTreeMap<String, (u64, BTreeMap<String, u64>)> = BTreeMap::new();
        let mut declared_totals = BTreeMap::new();
        for _ in 0..n_labels {
            let (no, line) = next("label")?;
            let parts: Vec<&str> = line.split(' ').collect();
            let [tag, label, examples, total] = parts[..] else {
                return Err(bad(no, "expected `label <name> <examples> <features>`"));
            };
            if tag != "label" {
                return Err(bad(no, "expected label line"));
            }
            label.parse::<Label>().map_err(|e| bad(no, &e.to_string()))?;
            let examples: u64 = examples.parse().map_err(|_| bad(no, "bad example count"))?;
            let total: u64 = total.parse().map_err(|_| bad(no, "bad feature total"))?;
            if examples == 0 {
                return Err(bad(no, "label with zero examples"));
            }
            counts.insert(label.to_string(), (examples, BTreeMap::new()));
            declared_totals.insert(label.to_string(), total);
        }
        let v_line = next("vocab")?;
        let n_vocab: usize = field(v_line, "vocab")?
            .parse()
            .map_err(|_| bad(v_line.0, "bad vocab size"))?;
        loop {
            let (no, line) = next("end")?;
            if line == "end" {
                break;
            }
            let parts: Vec<&str> = line.split(' ').collect();
            let ["feature", label, feature, n] = parts[..] else {
                return Err(bad(no, "expected `feature <label> <feature> <count>`"));
            };
            let n: u64 = n.parse().map_err(|_| bad(no, "bad feature count"))?;
            let entry = counts.get_mut(label).ok_or_else(|| bad(no, "feature for undeclared label"))?;
            entry.1.insert(feature.to_string(), n);
        }
        for (label, (_, features)) in &counts {
            let sum: u64 = features.values().sum();
            if declared_totals[label] != sum {
                return Err(Error::CorruptModel(format!(
                    "label {label}: declared {} features, counted {sum}",
                    declared_totals[label]
                )));
            }
        }
        if counts.is_empty() {
            return Err(Error::CorruptModel("model has no labels".into()));
        }
        let model = Self::from_counts(label_space, alpha, counts);
        if model.vocabulary.len() != n_vocab {
            return Err(Error::CorruptModel(format!(
                "declared vocabulary {n_vocab}, counted {}",
                model.vocabulary.len()
            )));
        }
        Ok(model)
    }
}

pub fn write_model(model: &ClassifierModel, path: &Path) -> Result<()> {
    fs::write(path, model.to_text()).io_context(path)
}

pub fn load_model(path: &Path) -> Result<ClassifierModel> {
    let text = fs::read_to_string(path).io_context(path)?;
    ClassifierModel::from_text(&text)
}
