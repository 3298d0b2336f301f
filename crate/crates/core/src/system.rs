//! The reference QA system: one default component per stage.
//!
//! | stage | reads | writes |
//! |---|---|---|
//! | info-source-prep | corpus | index, `<index>.rejects` |
//! | question-processing | questions, classifier model | analyses, `<analyses>.rejects` |
//! | answer-retrieval | index, analyses | answers |
//! | evaluation | answers, gold | report |

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::analysis::{analyze, parse_analyses, render_analyses};
use crate::classifier::{load_model, ClassifierModel};
use crate::corpus::{parse_corpus, render_rejects};
use crate::error::IoContext;
use crate::evaluation::{evaluate, load_gold, render_report};
use crate::index::{build_index, load_index, InvertedIndex};
use crate::pipeline::{Artifact, Input, PipelineConfig, Registry, StageComponent, StageKind};
use crate::question::{parse_questions, Question};
use crate::retrieval::{parse_answers, render_answers, AnswerParams, AnswerRecord, Answerer, Gazetteer};
use crate::text::Stoplist;
use crate::{Error, Result};

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn rejects_path(artifact: &Path) -> PathBuf {
    with_suffix(artifact, ".rejects")
}

fn external(path: &Path) -> Input {
    Input { path: path.to_path_buf(), produced_by: None }
}

fn upstream(path: PathBuf, stage: StageKind) -> Input {
    Input { path, produced_by: Some(stage) }
}

fn model_path(config: &PipelineConfig) -> Result<&Path> {
    config
        .classifier_model_path
        .as_deref()
        .ok_or_else(|| Error::InvalidConfig("MissingModelPath: classifier_model_path is not set".into()))
}

fn gazetteer(config: &PipelineConfig) -> Result<Gazetteer> {
    Gazetteer::load(
        config.param_path("extract.persons_gazetteer").as_deref(),
        config.param_path("extract.locations_gazetteer").as_deref(),
    )
}

pub struct CorpusIndexer;

impl StageComponent for CorpusIndexer {
    fn name(&self) -> &str {
        "bm25-indexer"
    }

    fn inputs(&self, config: &PipelineConfig) -> Vec<Input> {
        vec![external(&config.corpus_path)]
    }

    fn run(&self, config: &PipelineConfig) -> Result<Vec<Artifact>> {
        let parsed = parse_corpus(&config.corpus_path, config.corpus_format()?)?;
        let index = build_index(parsed.documents)?;
        Ok(vec![
            Artifact::new(&config.index_path, index.to_bytes()),
            Artifact::new(rejects_path(&config.index_path), render_rejects(&parsed.rejects)),
        ])
    }
}

pub struct QuestionAnalyzer;

impl StageComponent for QuestionAnalyzer {
    fn name(&self) -> &str {
        "naive-bayes-qp"
    }

    fn inputs(&self, config: &PipelineConfig) -> Vec<Input> {
        let mut inputs = vec![external(&config.questions_path)];
        if let Some(p) = &config.classifier_model_path {
            inputs.push(external(p));
        }
        inputs
    }

    fn run(&self, config: &PipelineConfig) -> Result<Vec<Artifact>> {
        let model = load_model(model_path(config)?)?;
        let parsed = parse_questions(&config.questions_path, config.question_format()?)?;
        let stoplist = Stoplist::default();
        let analyses: Vec<_> = parsed.questions.iter().map(|q| analyze(q, &model, &stoplist)).collect();
        let analysis_path = config.analysis_path();
        Ok(vec![
            Artifact::new(&analysis_path, render_analyses(&analyses)),
            Artifact::new(rejects_path(&analysis_path), render_rejects(&parsed.rejects)),
        ])
    }
}

pub struct PassageAnswerer;

impl StageComponent for PassageAnswerer {
    fn name(&self) -> &str {
        "passage-answerer"
    }

    fn inputs(&self, config: &PipelineConfig) -> Vec<Input> {
        vec![
            upstream(config.index_path.clone(), StageKind::InfoSourcePrep),
            upstream(config.analysis_path(), StageKind::QuestionProcessing),
        ]
    }

    fn run(&self, config: &PipelineConfig) -> Result<Vec<Artifact>> {
        let params = config.answer_params()?;
        let gazetteer = gazetteer(config)?;
        let index = load_index(&config.index_path)?;
        let analysis_path = config.analysis_path();
        let analyses = parse_analyses(&fs::read_to_string(&analysis_path).io_context(&analysis_path)?)?;
        let stoplist = Stoplist::default();
        let answerer = Answerer { index: &index, stoplist: &stoplist, gazetteer: &gazetteer, params };
        let records = answerer.answer_all(&analyses);
        Ok(vec![Artifact::new(&config.answers_out_path, render_answers(&records))])
    }
}

pub struct PatternEvaluator;

impl StageComponent for PatternEvaluator {
    fn name(&self) -> &str {
        "trec-pattern-evaluator"
    }

    fn inputs(&self, config: &PipelineConfig) -> Vec<Input> {
        let mut inputs = vec![upstream(config.answers_out_path.clone(), StageKind::AnswerRetrieval)];
        if let Some(gold) = &config.gold_path {
            inputs.push(external(gold));
        }
        inputs
    }

    fn run(&self, config: &PipelineConfig) -> Result<Vec<Artifact>> {
        let gold_path = config
            .gold_path
            .as_deref()
            .ok_or_else(|| Error::InvalidConfig("MissingGoldPath: gold_path is not set".into()))?;
        let gold = load_gold(gold_path)?;
        let path = &config.answers_out_path;
        let answers = parse_answers(&fs::read_to_string(path).io_context(path)?)?;
        let report = evaluate(&answers, &gold)?;
        Ok(vec![Artifact::new(config.report_path(), render_report(&report))])
    }
}

pub fn reference_registry() -> Registry {
    let mut registry = Registry::new();
    let components: [(StageKind, Arc<dyn StageComponent>); 4] = [
        (StageKind::InfoSourcePrep, Arc::new(CorpusIndexer)),
        (StageKind::QuestionProcessing, Arc::new(QuestionAnalyzer)),
        (StageKind::AnswerRetrieval, Arc::new(PassageAnswerer)),
        (StageKind::Evaluation, Arc::new(PatternEvaluator)),
    ];
    for (stage, component) in components {
        registry.register(stage, component).expect("reference names are distinct");
    }
    registry
}

/// Index, model and retrieval settings loaded once for answering ad hoc
/// questions.
pub struct AskSession {
    pub index: InvertedIndex,
    pub model: ClassifierModel,
    pub stoplist: Stoplist,
    pub gazetteer: Gazetteer,
    pub params: AnswerParams,
}

impl AskSession {
    pub fn open(config: &PipelineConfig) -> Result<Self> {
        Ok(Self {
            index: load_index(&config.index_path)?,
            model: load_model(model_path(config)?)?,
            stoplist: Stoplist::default(),
            gazetteer: gazetteer(config)?,
            params: config.answer_params()?,
        })
    }

    pub fn ask(&self, qid: &str, text: &str) -> AnswerRecord {
        let analysis = analyze(&Question::new(qid, text), &self.model, &self.stoplist);
        Answerer {
            index: &self.index,
            stoplist: &self.stoplist,
            gazetteer: &self.gazetteer,
            params: self.params,
        }
        .answer(&analysis)
    }
}
