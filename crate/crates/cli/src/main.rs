use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use qanus_core::classifier::{
    count_training_lines, load_model, parse_training_str, train_classifier, write_model, LabelSpace,
};
use qanus_core::corpus::render_rejects;
use qanus_core::evaluation::format_ratio;
use qanus_core::index::load_index;
use qanus_core::pipeline::{load_config, run_pipeline, PipelineConfig, StageKind};
use qanus_core::retrieval::format_score;
use qanus_core::system::{reference_registry, rejects_path, AskSession};
use qanus_core::taxonomy::Label;
use qanus_core::Error;

/// Largest share of training lines that may be rejected.
const TRAINING_REJECT_TOLERANCE: f64 = 0.01;

#[derive(Parser)]
#[command(name = "qanus", version, about = "Factoid question answering over a local corpus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// Pipeline configuration file.
    #[arg(long)]
    config: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Build the inverted index from the corpus.
    Index(ConfigArg),
    /// Train the question classifier from a UIUC-format file.
    TrainClassifier {
        #[arg(long)]
        train_file: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Additive smoothing constant.
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Learn coarse classes only.
        #[arg(long)]
        coarse_only: bool,
    },
    /// Analyze questions into query terms and expected answer types.
    ProcessQuestions(ConfigArg),
    /// Answer analyzed questions from the index.
    Answer(ConfigArg),
    /// Judge answers against the gold patterns.
    Evaluate(ConfigArg),
    /// Run every stage; evaluation only when gold_path is set.
    RunAll(ConfigArg),
    /// Answer one question, or one per line of standard input.
    Ask {
        #[arg(long)]
        config: PathBuf,
        question: Vec<String>,
    },
    /// Show index statistics and classifier metadata.
    Stats(ConfigArg),
}

enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            Failure::Usage(e.into())
        } else {
            Failure::Runtime(e.into())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command) -> Outcome {
    match command {
        Command::Index(a) => cmd_index(&a.config),
        Command::TrainClassifier { train_file, out, alpha, coarse_only } => {
            cmd_train(&train_file, &out, alpha, coarse_only)
        }
        Command::ProcessQuestions(a) => run_stages(&load_config(&a.config)?, &[StageKind::QuestionProcessing]),
        Command::Answer(a) => run_stages(&load_config(&a.config)?, &[StageKind::AnswerRetrieval]),
        Command::Evaluate(a) => {
            let config = load_config(&a.config)?;
            run_stages(&config, &[StageKind::Evaluation])?;
            print_accuracy(&config)
        }
        Command::RunAll(a) => cmd_run_all(&a.config),
        Command::Ask { config, question } => cmd_ask(&config, &question),
        Command::Stats(a) => cmd_stats(&a.config),
    }
}

fn run_stages(config: &PipelineConfig, stages: &[StageKind]) -> Outcome {
    let manifest = run_pipeline(config, &reference_registry(), stages)?;
    for run in &manifest.stages_run {
        eprintln!("{} ({}) {:.3}s", run.stage, run.component, run.duration.as_secs_f64());
    }
    for stage in stages {
        let sidecar = match stage {
            StageKind::InfoSourcePrep => rejects_path(&config.index_path),
            StageKind::QuestionProcessing => rejects_path(&config.analysis_path()),
            _ => continue,
        };
        let rejects = fs::read_to_string(&sidecar).unwrap_or_default();
        let n = rejects.lines().count();
        if n > 0 {
            eprintln!("{stage}: {n} malformed record(s) skipped, see {}", sidecar.display());
        }
    }
    Ok(())
}

fn cmd_index(config_path: &Path) -> Outcome {
    let config = load_config(config_path)?;
    run_stages(&config, &[StageKind::InfoSourcePrep])?;
    println!("{}", load_index(&config.index_path)?.stats());
    Ok(())
}

fn cmd_run_all(config_path: &Path) -> Outcome {
    let config = load_config(config_path)?;
    let stages: &[StageKind] = if config.gold_path.is_some() { &StageKind::ALL } else { &StageKind::ALL[..3] };
    run_stages(&config, stages)?;
    if config.gold_path.is_some() {
        print_accuracy(&config)?;
    }
    Ok(())
}

fn print_accuracy(config: &PipelineConfig) -> Outcome {
    let path = config.report_path();
    let report = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()));
    let report = report.map_err(Failure::Runtime)?;
    if let Some(line) = report.lines().next() {
        println!("{line}");
    }
    Ok(())
}

fn cmd_train(train_file: &Path, out: &Path, alpha: f64, coarse_only: bool) -> Outcome {
    let content = match fs::read_to_string(train_file) {
        Ok(c) => c,
        Err(e) if e.kind() == io::ErrorKind::NotFound => {
            return Err(Error::MissingFile(train_file.to_path_buf()).into())
        }
        Err(e) => return Err(Failure::Runtime(anyhow!(e).context(format!("reading {}", train_file.display())))),
    };
    let (examples, rejects) = parse_training_str(&content);
    let total = count_training_lines(&content);
    if !rejects.is_empty() {
        eprint!("{}", render_rejects(&rejects));
        eprintln!("{} of {} training line(s) rejected", rejects.len(), total);
    }
    if total > 0 && rejects.len() as f64 > TRAINING_REJECT_TOLERANCE * total as f64 {
        return Err(Failure::Usage(anyhow!(
            "{} malformed training line(s) exceed the {}% tolerance",
            rejects.len(),
            TRAINING_REJECT_TOLERANCE * 100.0
        )));
    }
    let space = if coarse_only { LabelSpace::CoarseOnly } else { LabelSpace::CoarseFine };
    let model = train_classifier(&examples, alpha, space).map_err(|e| match e {
        Error::NoExamples => Failure::Usage(e.into()),
        other => other.into(),
    })?;
    write_model(&model, out)?;
    println!("{}", model_summary(&model));
    Ok(())
}

fn model_summary(model: &qanus_core::classifier::ClassifierModel) -> String {
    let mut coarse: Vec<_> = model
        .labels()
        .filter_map(|l| l.parse::<Label>().ok())
        .map(|l| l.coarse)
        .collect();
    coarse.dedup();
    format!(
        "labels={} classes={} vocab={} label_space={} alpha={}",
        coarse.len(),
        model.label_count(),
        model.vocabulary.len(),
        model.label_space.as_str(),
        model.smoothing_alpha
    )
}

fn cmd_ask(config_path: &Path, words: &[String]) -> Outcome {
    let config = load_config(config_path)?;
    let session = AskSession::open(&config)?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let answer = |qid: &str, text: &str, out: &mut io::StdoutLock<'_>| -> io::Result<()> {
        let record = session.ask(qid, text);
        writeln!(
            out,
            "{}\t{}\t{}",
            record.answer.as_deref().unwrap_or("NIL"),
            record.supporting_doc.as_deref().unwrap_or("-"),
            format_score(&record)
        )?;
        out.flush()
    };
    if !words.is_empty() {
        answer("ask", &words.join(" "), &mut out)?;
        return Ok(());
    }
    for (n, line) in io::stdin().lock().lines().enumerate() {
        answer(&format!("ask{}", n + 1), &line?, &mut out)?;
    }
    Ok(())
}

fn cmd_stats(config_path: &Path) -> Outcome {
    let config = load_config(config_path)?;
    let mut shown = false;
    if config.index_path.exists() {
        let index = load_index(&config.index_path)?;
        let stats = index.stats();
        println!("index {}: {stats}", config.index_path.display());
        shown = true;
    }
    if let Some(path) = config.classifier_model_path.as_deref().filter(|p| p.exists()) {
        let model = load_model(path)?;
        println!("model {}: {}", path.display(), model_summary(&model));
        shown = true;
    }
    let report = config.report_path();
    if let Ok(text) = fs::read_to_string(&report) {
        let correct = field(&text, "correct");
        let total = field(&text, "total");
        if let (Some(c), Some(t)) = (correct, total) {
            println!("report {}: accuracy={} correct={c} total={t}", report.display(), format_ratio(c, t));
        }
    }
    if shown {
        Ok(())
    } else {
        Err(Failure::Usage(anyhow!(
            "neither {} nor a classifier model exists yet",
            config.index_path.display()
        )))
    }
}

fn field(report: &str, key: &str) -> Option<usize> {
    report.lines().find_map(|l| {
        let (k, v) = l.split_once('=')?;
        (k.trim() == key).then(|| v.trim().parse().ok()).flatten()
    })
}
