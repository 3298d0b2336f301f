//! The four-stage pipeline framework.
//!
//! Each stage is split in two. The controller ([`run_pipeline`]) directs flow:
//! it checks ordering and inputs, times the stage, and persists whatever the
//! stage produces before the next stage starts. The engine (a
//! [`StageComponent`]) does the stage's processing and hands back its output
//! artifacts. Components are compiled in and registered with a [`Registry`];
//! the first component registered for a stage is its default.
//!
//! Stages communicate only through files, so any suffix of the pipeline can
//! be re-run in a later process.

mod config;
mod controller;
mod registry;

use std::fmt;
use std::str::FromStr;

pub use config::{load_config, parse_config, validate_config, PipelineConfig, ValidationError, PARAM_DEFAULTS};
pub use controller::{run_pipeline, RunManifest, StageRun};
pub use registry::{Artifact, Input, Registry, StageComponent};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StageKind {
    InfoSourcePrep,
    QuestionProcessing,
    AnswerRetrieval,
    Evaluation,
}

impl StageKind {
    /// Pipeline order.
    pub const ALL: [StageKind; 4] = [
        StageKind::InfoSourcePrep,
        StageKind::QuestionProcessing,
        StageKind::AnswerRetrieval,
        StageKind::Evaluation,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            StageKind::InfoSourcePrep => "info-source-prep",
            StageKind::QuestionProcessing => "question-processing",
            StageKind::AnswerRetrieval => "answer-retrieval",
            StageKind::Evaluation => "evaluation",
        }
    }

    fn ordinal(&self) -> usize {
        *self as usize
    }
}

impl fmt::Display for StageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StageKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StageKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown stage `{s}`"))
    }
}
