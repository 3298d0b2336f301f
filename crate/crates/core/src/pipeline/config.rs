//! Pipeline configuration: flat `key = value` text with `#` comments.
//!
//! Path keys sit at the top level; tuning parameters are scoped by section
//! (`retrieval.k`). Relative paths resolve against the config file's
//! directory. Existence of paths is checked only by [`validate_config`], for
//! the stages actually requested.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::StageKind;
use crate::corpus::CorpusFormat;
use crate::error::IoContext;
use crate::question::QuestionFormat;
use crate::retrieval::{AnswerParams, Bm25Params, RankWeights, Windowing};
use crate::{Error, Result};

const REQUIRED_PATHS: [&str; 4] = ["corpus_path", "index_path", "questions_path", "answers_out_path"];
const OPTIONAL_PATHS: [&str; 4] = ["classifier_model_path", "gold_path", "report_out_path", "analysis_path"];

#[derive(Debug, Clone, Copy)]
enum ParamKind {
    PositiveInt,
    NonNegativeFloat,
    Choice(&'static [&'static str]),
    OptionalPath,
}

/// Every stage parameter with its default value.
pub const PARAM_DEFAULTS: [(&str, &str); 11] = [
    ("corpus.format", "auto"),
    ("questions.format", "auto"),
    ("retrieval.k", "50"),
    ("retrieval.max_passages", "20"),
    ("passage.window", "3"),
    ("passage.stride", "2"),
    ("weights.coverage", "2.0"),
    ("weights.proximity", "1.0"),
    ("weights.redundancy", "0.5"),
    ("extract.persons_gazetteer", ""),
    ("extract.locations_gazetteer", ""),
];

fn param_kind(key: &str) -> Option<ParamKind> {
    Some(match key {
        "corpus.format" => ParamKind::Choice(&["auto", "trec-sgml", "record-lines"]),
        "questions.format" => ParamKind::Choice(&["auto", "trec-xml", "qline"]),
        "retrieval.k" | "retrieval.max_passages" | "passage.window" | "passage.stride" => {
            ParamKind::PositiveInt
        }
        "weights.coverage" | "weights.proximity" | "weights.redundancy" => ParamKind::NonNegativeFloat,
        "extract.persons_gazetteer" | "extract.locations_gazetteer" => ParamKind::OptionalPath,
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineConfig {
    pub corpus_path: PathBuf,
    pub index_path: PathBuf,
    pub questions_path: PathBuf,
    pub classifier_model_path: Option<PathBuf>,
    pub gold_path: Option<PathBuf>,
    pub answers_out_path: PathBuf,
    pub report_out_path: Option<PathBuf>,
    pub analysis_path: Option<PathBuf>,
    /// Every known stage parameter, defaults filled in.
    pub stage_params: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationError {
    MissingPath { key: &'static str, path: PathBuf },
    MissingModelPath,
    MissingGoldPath,
    BadParam { key: String, reason: String },
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationError::MissingPath { key, path } => {
                write!(f, "{key}: {} does not exist", path.display())
            }
            ValidationError::MissingModelPath => {
                f.write_str("MissingModelPath: classifier_model_path is required for question processing")
            }
            ValidationError::MissingGoldPath => {
                f.write_str("MissingGoldPath: gold_path is required for evaluation")
            }
            ValidationError::BadParam { key, reason } => write!(f, "BadParam({key}): {reason}"),
        }
    }
}

pub fn load_config(path: &Path) -> Result<PipelineConfig> {
    if !path.is_file() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let text = fs::read_to_string(path).io_context(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, base)
}

/// Parses config text, resolving relative paths against `base`.
pub fn parse_config(text: &str, base: &Path) -> Result<PipelineConfig> {
    let mut values: BTreeMap<String, String> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::ParseError { line: line_no, message: "expected `key = value`".into() });
        };
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() {
            return Err(Error::ParseError { line: line_no, message: "empty key".into() });
        }
        let known = REQUIRED_PATHS.contains(&key) || OPTIONAL_PATHS.contains(&key) || param_kind(key).is_some();
        if !known {
            return Err(Error::UnknownKey(key.to_string()));
        }
        if values.insert(key.to_string(), value.to_string()).is_some() {
            return Err(Error::ParseError { line: line_no, message: format!("duplicate key `{key}`") });
        }
    }

    let resolve = |v: &str| -> PathBuf {
        let p = Path::new(v);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    };
    let required = |key: &'static str| -> Result<PathBuf> {
        match values.get(key) {
            Some(v) if !v.is_empty() => Ok(resolve(v)),
            _ => Err(Error::MissingKey(key.to_string())),
        }
    };
    let optional = |key: &str| values.get(key).filter(|v| !v.is_empty()).map(|v| resolve(v));

    let mut stage_params = BTreeMap::new();
    for (key, default) in PARAM_DEFAULTS {
        let value = values.get(key).cloned().unwrap_or_else(|| default.to_string());
        let value = match param_kind(key) {
            Some(ParamKind::OptionalPath) if !value.is_empty() => resolve(&value).display().to_string(),
            _ => value,
        };
        stage_params.insert(key.to_string(), value);
    }

    Ok(PipelineConfig {
        corpus_path: required("corpus_path")?,
        index_path: required("index_path")?,
        questions_path: required("questions_path")?,
        answers_out_path: required("answers_out_path")?,
        classifier_model_path: optional("classifier_model_path"),
        gold_path: optional("gold_path"),
        report_out_path: optional("report_out_path"),
        analysis_path: optional("analysis_path"),
        stage_params,
    })
}

fn check_param(key: &str, value: &str) -> Option<String> {
    match param_kind(key)? {
        ParamKind::PositiveInt => match value.parse::<usize>() {
            Ok(0) => Some("must be at least 1".into()),
            Ok(_) => None,
            Err(_) => Some("not an integer".into()),
        },
        ParamKind::NonNegativeFloat => match value.parse::<f64>() {
            Ok(v) if v.is_finite() && v >= 0.0 => None,
            Ok(_) => Some("must be a finite non-negative number".into()),
            Err(_) => Some("not a number".into()),
        },
        ParamKind::Choice(choices) => {
            (!choices.contains(&value)).then(|| format!("expected one of {}", choices.join(", ")))
        }
        ParamKind::OptionalPath => None,
    }
}

/// Problems that would stop the requested stages. Empty means runnable.
/// Artifacts produced by earlier stages are not checked here.
pub fn validate_config(config: &PipelineConfig, stages: &[StageKind]) -> Vec<ValidationError> {
    let mut errors = Vec::new();
    for (key, value) in &config.stage_params {
        if let Some(reason) = check_param(key, value) {
            errors.push(ValidationError::BadParam { key: key.clone(), reason });
        }
    }
    for stage in stages {
        match stage {
            StageKind::InfoSourcePrep => need(&mut errors, "corpus_path", &config.corpus_path),
            StageKind::QuestionProcessing => {
                need(&mut errors, "questions_path", &config.questions_path);
                match &config.classifier_model_path {
                    Some(p) => need(&mut errors, "classifier_model_path", p),
                    None => errors.push(ValidationError::MissingModelPath),
                }
            }
            StageKind::AnswerRetrieval => {
                for key in ["extract.persons_gazetteer", "extract.locations_gazetteer"] {
                    if let Some(p) = config.param_path(key) {
                        need(&mut errors, key, &p);
                    }
                }
            }
            StageKind::Evaluation => match &config.gold_path {
                Some(p) => need(&mut errors, "gold_path", p),
                None => errors.push(ValidationError::MissingGoldPath),
            },
        }
    }
    errors
}

fn need(errors: &mut Vec<ValidationError>, key: &'static str, path: &Path) {
    if !path.exists() {
        errors.push(ValidationError::MissingPath { key, path: path.to_path_buf() });
    }
}

fn sibling(path: &Path, name: &str) -> PathBuf {
    path.parent().unwrap_or(Path::new(".")).join(name)
}

impl PipelineConfig {
    /// Stage-2 output; defaults to `analyses.tsv` beside the answers file.
    pub fn analysis_path(&self) -> PathBuf {
        self.analysis_path
            .clone()
            .unwrap_or_else(|| sibling(&self.answers_out_path, "analyses.tsv"))
    }

    /// Stage-4 output; defaults to `report.txt` beside the answers file.
    pub fn report_path(&self) -> PathBuf {
        self.report_out_path
            .clone()
            .unwrap_or_else(|| sibling(&self.answers_out_path, "report.txt"))
    }

    pub fn manifest_path(&self) -> PathBuf {
        sibling(&self.report_path(), "run_manifest.txt")
    }

    pub fn param(&self, key: &str) -> &str {
        self.stage_params.get(key).map_or("", String::as_str)
    }

    fn typed<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        self.param(key).parse().map_err(|_| {
            Error::InvalidConfig(format!("{key} = `{}` has the wrong type", self.param(key)))
        })
    }

    pub fn param_path(&self, key: &str) -> Option<PathBuf> {
        Some(self.param(key)).filter(|v| !v.is_empty()).map(PathBuf::from)
    }

    pub fn corpus_format(&self) -> Result<Option<CorpusFormat>> {
        match self.param("corpus.format") {
            "auto" => Ok(None),
            other => other.parse().map(Some).map_err(Error::InvalidConfig),
        }
    }

    pub fn question_format(&self) -> Result<Option<QuestionFormat>> {
        match self.param("questions.format") {
            "auto" => Ok(None),
            other => other.parse().map(Some).map_err(Error::InvalidConfig),
        }
    }

    pub fn answer_params(&self) -> Result<AnswerParams> {
        Ok(AnswerParams {
            k: self.typed("retrieval.k")?,
            max_passages: self.typed("retrieval.max_passages")?,
            weights: RankWeights {
                coverage: self.typed("weights.coverage")?,
                proximity: self.typed("weights.proximity")?,
                redundancy: self.typed("weights.redundancy")?,
            },
            windowing: Windowing {
                window: self.typed("passage.window")?,
                stride: self.typed("passage.stride")?,
            },
            bm25: Bm25Params::default(),
        })
    }

    /// Canonical text form of the resolved configuration.
    pub fn canonical(&self) -> String {
        let mut entries: BTreeMap<&str, String> = BTreeMap::new();
        let show = |p: &Path| p.display().to_string();
        entries.insert("corpus_path", show(&self.corpus_path));
        entries.insert("index_path", show(&self.index_path));
        entries.insert("questions_path", show(&self.questions_path));
        entries.insert("answers_out_path", show(&self.answers_out_path));
        entries.insert("analysis_path", show(&self.analysis_path()));
        entries.insert("report_out_path", show(&self.report_path()));
        entries.insert("classifier_model_path", self.classifier_model_path.as_deref().map(show).unwrap_or_default());
        entries.insert("gold_path", self.gold_path.as_deref().map(show).unwrap_or_default());
        for (k, v) in &self.stage_params {
            entries.insert(k, v.clone());
        }
        entries.into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn digest(&self) -> String {
        format!("sha256:{}", hex::encode(Sha256::digest(self.canonical().as_bytes())))
    }
}
