use std::collections::BTreeSet;
use std::sync::{Arc, Mutex};

use proptest::prelude::*;
use qanus_core::analysis::{analyze, parse_analyses, render_analyses};
use qanus_core::classifier::{parse_training_str, train_classifier, ClassifierModel, LabelSpace, TrainingExample};
use qanus_core::corpus::Document;
use qanus_core::evaluation::{evaluate, format_ratio, judge, parse_gold, render_report, GoldPattern};
use qanus_core::index::{build_index, InvertedIndex};
use qanus_core::pipeline::{parse_config, run_pipeline, Artifact, Input, PipelineConfig, Registry, StageComponent, StageKind};
use qanus_core::question::Question;
use qanus_core::retrieval::{
    parse_answers, render_answers, score_passage, AnswerParams, AnswerRecord, Answerer, Gazetteer,
};
use qanus_core::taxonomy::{all_fine_labels, Coarse, Label};
use qanus_core::text::{tokenize, Stoplist};
use qanus_core::Result;

const WORDS: [&str; 24] = [
    "alpha", "beta", "gamma", "delta", "river", "stone", "the", "of", "Paris", "Lena", "Marsh", "1854", "12", "March",
    "NATO", "3,400", "über", "café", "was", "founded", "by", "in", "Oslo", "x",
];
const SEPARATORS: [&str; 7] = [" ", " ", " ", ", ", ". ", "\n", "--"];

fn text_strategy(max_words: usize) -> impl Strategy<Value = String> {
    prop::collection::vec((prop::sample::select(&WORDS[..]), prop::sample::select(&SEPARATORS[..])), 0..max_words)
        .prop_map(|parts| parts.into_iter().map(|(w, s)| format!("{w}{s}")).collect())
}

fn corpus_strategy() -> impl Strategy<Value = Vec<Document>> {
    prop::collection::vec(text_strategy(40), 0..12).prop_map(|texts| {
        texts
            .into_iter()
            .enumerate()
            .map(|(i, t)| Document::new(format!("D{i:02}"), t))
            .collect()
    })
}

fn query_strategy() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(&WORDS[..]), 0..5)
        .prop_map(|ws| ws.iter().flat_map(|w| tokenize(w)).map(|t| t.surface).collect())
}

fn shipped_model() -> ClassifierModel {
    let text = include_str!("../../../data/train_questions.txt");
    let (examples, rejects) = parse_training_str(text);
    assert!(rejects.is_empty());
    train_classifier(&examples, 1.0, LabelSpace::CoarseFine).unwrap()
}

fn label_strategy() -> impl Strategy<Value = Label> {
    let labels: Vec<Label> = all_fine_labels().collect();
    prop::sample::select(labels)
}

fn examples_strategy() -> impl Strategy<Value = Vec<TrainingExample>> {
    prop::collection::vec((label_strategy(), text_strategy(8)), 1..20)
        .prop_map(|v| v.into_iter().map(|(label, text)| TrainingExample { label, text }).collect())
}

// corpus ingest

proptest! {
    #[test]
    fn index_round_trips(docs in corpus_strategy()) {
        let index = build_index(docs).unwrap();
        prop_assert_eq!(InvertedIndex::from_bytes(&index.to_bytes()).unwrap(), index);
    }

    #[test]
    fn index_bytes_ignore_input_order(docs in corpus_strategy()) {
        let forward = build_index(docs.clone()).unwrap().to_bytes();
        let again = build_index(docs.clone()).unwrap().to_bytes();
        let reversed = build_index(docs.into_iter().rev().collect()).unwrap().to_bytes();
        prop_assert_eq!(&forward, &again);
        prop_assert_eq!(&forward, &reversed);
    }

    #[test]
    fn postings_point_at_their_term(docs in corpus_strategy()) {
        let index = build_index(docs).unwrap();
        for (term, postings) in &index.postings {
            for p in postings {
                let tokens = tokenize(&index.document(&p.doc_id).unwrap().text);
                prop_assert_eq!(p.positions.len(), p.term_frequency as usize);
                prop_assert!(p.positions.windows(2).all(|w| w[0] < w[1]));
                for &pos in &p.positions {
                    prop_assert_eq!(&tokens[pos as usize].surface, term);
                }
            }
        }
    }
}

// question processing

proptest! {
    #[test]
    fn posterior_normalizes(text in "\\PC{0,80}") {
        let model = shipped_model();
        let sum: f64 = model.posterior(&text).iter().map(|(_, p)| p).sum();
        prop_assert!((sum - 1.0).abs() <= 1e-6, "sum {}", sum);
    }

    #[test]
    fn posterior_normalizes_for_any_model(examples in examples_strategy(), text in text_strategy(12)) {
        let model = train_classifier(&examples, 0.5, LabelSpace::CoarseFine).unwrap();
        let sum: f64 = model.posterior(&text).iter().map(|(_, p)| p).sum();
        prop_assert!((sum - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn training_ignores_example_order(
        (examples, shuffled) in examples_strategy().prop_flat_map(|v| (Just(v.clone()), Just(v).prop_shuffle()))
    ) {
        let a = train_classifier(&examples, 1.0, LabelSpace::CoarseFine).unwrap();
        let b = train_classifier(&shuffled, 1.0, LabelSpace::CoarseFine).unwrap();
        prop_assert_eq!(a.to_text(), b.to_text());
    }

    /// Repeating every example k times with alpha scaled by k leaves every
    /// smoothed estimate, and hence every decision, unchanged.
    #[test]
    fn duplication_with_scaled_alpha_keeps_decisions(
        examples in examples_strategy(),
        k in 2usize..5,
        probes in prop::collection::vec(text_strategy(10), 1..8),
    ) {
        let base = train_classifier(&examples, 1.0, LabelSpace::CoarseFine).unwrap();
        let repeated: Vec<_> = examples.iter().flat_map(|e| std::iter::repeat_n(e.clone(), k)).collect();
        let scaled = train_classifier(&repeated, k as f64, LabelSpace::CoarseFine).unwrap();
        for text in probes {
            let (p, q) = (base.posterior(&text), scaled.posterior(&text));
            for ((l1, a), (l2, b)) in p.iter().zip(&q) {
                prop_assert_eq!(l1, l2);
                prop_assert!((a - b).abs() < 1e-9);
            }
            // Exact ties are broken by label name, which last-bit noise can flip.
            let mut sorted: Vec<f64> = p.iter().map(|(_, x)| *x).collect();
            sorted.sort_by(|a, b| b.total_cmp(a));
            if sorted.len() < 2 || sorted[0] - sorted[1] > 1e-9 {
                prop_assert_eq!(base.classify(&text).label, scaled.classify(&text).label);
            }
        }
    }

    #[test]
    fn analysis_stays_in_taxonomy(text in "\\PC{0,60}", coarse_only in any::<bool>()) {
        let text_file = include_str!("../../../data/train_questions.txt");
        let (examples, _) = parse_training_str(text_file);
        let space = if coarse_only { LabelSpace::CoarseOnly } else { LabelSpace::CoarseFine };
        let model = train_classifier(&examples, 1.0, space).unwrap();
        let allowed: BTreeSet<String> = all_fine_labels()
            .map(|l| l.to_string())
            .chain(Coarse::ALL.iter().map(|c| c.as_str().to_string()))
            .collect();
        let sl = Stoplist::default();
        let q = Question::new("q", text);
        let a = analyze(&q, &model, &sl);
        prop_assert!(allowed.contains(&a.answer_type.label.to_string()));
        prop_assert!((0.0..=1.0).contains(&a.answer_type.confidence));
        let b = analyze(&q, &model, &sl);
        prop_assert_eq!(a.query_terms, b.query_terms);
    }

    #[test]
    fn analyses_artifact_is_a_fixed_point(texts in prop::collection::vec(text_strategy(10), 0..6)) {
        let model = shipped_model();
        let sl = Stoplist::default();
        let analyses: Vec<_> = texts
            .iter()
            .enumerate()
            .map(|(i, t)| analyze(&Question::new(format!("q{i}"), t.clone()), &model, &sl))
            .collect();
        let once = render_analyses(&analyses);
        let twice = render_analyses(&parse_analyses(&once).unwrap());
        prop_assert_eq!(once, twice);
    }
}

// answer retrieval

proptest! {
    #[test]
    fn extra_query_term_occurrence_never_lowers_passage_score(
        docs in corpus_strategy(),
        passage in text_strategy(20),
        query in query_strategy(),
        pick in any::<prop::sample::Index>(),
    ) {
        let index = build_index(docs).unwrap();
        let present: Vec<&String> = query.iter().filter(|q| tokenize(&passage).iter().any(|t| &t.surface == *q)).collect();
        prop_assume!(!present.is_empty());
        let term = pick.get(&present);
        let before = score_passage(&passage, &query, &index, 2.0);
        let after = score_passage(&format!("{passage} {term}"), &query, &index, 2.0);
        prop_assert!(after >= before, "{} < {}", after, before);
    }

    #[test]
    fn candidates_are_slices_and_answers_are_stable(
        docs in corpus_strategy(),
        query in query_strategy(),
        label in label_strategy(),
    ) {
        let index = build_index(docs).unwrap();
        let sl = Stoplist::default();
        let gaz = Gazetteer::from_lists(["Lena Marsh"], ["Oslo", "Paris"]);
        let answerer = Answerer { index: &index, stoplist: &sl, gazetteer: &gaz, params: AnswerParams::default() };
        let analysis = qanus_core::analysis::QuestionAnalysis {
            qid: "q".into(),
            text: query.join(" "),
            tokens: tokenize(&query.join(" ")),
            query_terms: query.clone(),
            answer_type: qanus_core::taxonomy::AnswerType::new(label, 1.0),
            classifier_source: qanus_core::analysis::ClassifierSource::Model,
        };
        let candidates = answerer.candidates(&analysis);
        for c in &candidates {
            let doc = index.document(&c.doc_id).unwrap();
            prop_assert_eq!(&doc.text[c.offset..c.offset + c.text.len()], c.text.as_str());
        }
        let record = answerer.answer(&analysis);
        prop_assert_eq!(record.is_nil(), candidates.is_empty());
        let batch = answerer.answer_all(&[analysis.clone(), analysis.clone(), analysis]);
        prop_assert!(batch.iter().all(|r| r == &record));
        prop_assert_eq!(render_answers(&batch), render_answers(&[record.clone(), record.clone(), record]));
    }

    #[test]
    fn answers_artifact_is_a_fixed_point(
        rows in prop::collection::vec((text_strategy(4), any::<bool>(), 0.0f64..100.0, 0usize..50), 0..8)
    ) {
        let records: Vec<AnswerRecord> = rows
            .into_iter()
            .enumerate()
            .map(|(i, (text, nil, score, n))| {
                let answer = text.split_whitespace().collect::<Vec<_>>().join(" ");
                if nil || answer.is_empty() || answer == "NIL" {
                    AnswerRecord::nil(format!("q{i}"))
                } else {
                    AnswerRecord {
                        qid: format!("q{i}"),
                        answer: Some(answer),
                        supporting_doc: Some(format!("D{i}")),
                        final_score: score,
                        rank_list_size: n,
                    }
                }
            })
            .collect();
        let once = render_answers(&records);
        prop_assert_eq!(render_answers(&parse_answers(&once).unwrap()), once);
    }
}

// evaluation

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 { a } else { gcd(b, a % b) }
}

proptest! {
    #[test]
    fn accuracy_is_the_exact_ratio(verdicts in prop::collection::vec(prop::option::of(any::<bool>()), 1..40)) {
        let mut gold = String::new();
        let mut answers = Vec::new();
        for (i, v) in verdicts.iter().enumerate() {
            gold.push_str(&format!("q{i} ^right$\n"));
            match v {
                Some(true) => answers.push(AnswerRecord { answer: Some("right".into()), supporting_doc: Some("d".into()), ..AnswerRecord::nil(format!("q{i}")) }),
                Some(false) => answers.push(AnswerRecord::nil(format!("q{i}"))),
                None => {}
            }
        }
        let gold = parse_gold(&gold).unwrap();
        let report = evaluate(&answers, &gold).unwrap();
        let correct = verdicts.iter().filter(|v| **v == Some(true)).count();
        prop_assert_eq!(report.correct_count, correct);
        prop_assert_eq!(report.total_questions, verdicts.len());
        prop_assert!((0.0..=1.0).contains(&report.accuracy));
        prop_assert_eq!(report.accuracy, correct as f64 / verdicts.len() as f64);
        prop_assert_eq!(render_report(&report), render_report(&evaluate(&answers, &gold).unwrap()));
    }

    #[test]
    fn ratio_rendering_rounds_half_up(num in 0usize..5000, den in 1usize..5000) {
        prop_assume!(num <= den);
        // Independent oracle: reduce the fraction, then scale by 1000 with an explicit remainder test.
        let g = gcd(num as u128, den as u128).max(1);
        let (n, d) = (num as u128 / g, den as u128 / g);
        let scaled = n * 1000;
        let (q, r) = (scaled / d, scaled % d);
        let rounded = if 2 * r >= d { q + 1 } else { q };
        let want = format!("{}.{:03}", rounded / 1000, rounded % 1000);
        prop_assert_eq!(format_ratio(num, den), want);
    }

    #[test]
    fn judging_ignores_pattern_order(
        (patterns, shuffled) in prop::collection::vec(prop::sample::select(vec!["ott", "^Paris$", "NIL", "1854", "l[ae]na", "x{2}"]), 1..5)
            .prop_flat_map(|v| (Just(v.clone()), Just(v).prop_shuffle())),
        answer in prop::option::of(prop::sample::select(vec!["Ottawa", "paris", "Lena Marsh", "in 1854", "xx", "Oslo"])),
    ) {
        let record = AnswerRecord { answer: answer.map(str::to_string), ..AnswerRecord::nil("q") };
        let to_gold = |ps: &[&str]| GoldPattern::new("q", ps.iter().map(|s| s.to_string()).collect()).unwrap();
        let a = judge(&record, &to_gold(&patterns)).unwrap();
        let b = judge(&record, &to_gold(&shuffled)).unwrap();
        prop_assert_eq!(a.correct, b.correct);
    }
}

// pipeline

struct Probe {
    name: String,
    stage: StageKind,
    log: Arc<Mutex<Vec<StageKind>>>,
}

impl StageComponent for Probe {
    fn name(&self) -> &str {
        &self.name
    }
    fn inputs(&self, _: &PipelineConfig) -> Vec<Input> {
        Vec::new()
    }
    fn run(&self, config: &PipelineConfig) -> Result<Vec<Artifact>> {
        self.log.lock().unwrap().push(self.stage);
        Ok(vec![Artifact::new(config.answers_out_path.with_extension(self.stage.as_str()), self.name.clone())])
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn stages_run_in_pipeline_order(mask in 1u8..16) {
        let dir = tempfile::tempdir().unwrap();
        for f in ["c", "q", "m", "g"] {
            std::fs::write(dir.path().join(f), "").unwrap();
        }
        let config = parse_config(
            "corpus_path = c\nindex_path = i\nquestions_path = q\nclassifier_model_path = m\ngold_path = g\nanswers_out_path = out/a\n",
            dir.path(),
        ).unwrap();
        let log = Arc::new(Mutex::new(Vec::new()));
        let mut registry = Registry::new();
        for stage in StageKind::ALL {
            registry.register(stage, Arc::new(Probe { name: "p".into(), stage, log: log.clone() })).unwrap();
        }
        let requested: Vec<StageKind> = StageKind::ALL.into_iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, s)| s).collect();
        let manifest = run_pipeline(&config, &registry, &requested).unwrap();
        let order: Vec<StageKind> = manifest.stages_run.iter().map(|r| r.stage).collect();
        prop_assert_eq!(&order, &requested);
        prop_assert_eq!(&*log.lock().unwrap(), &requested);
    }

    #[test]
    fn first_registered_is_default(names in prop::collection::btree_set("[a-z]{1,6}", 1..6).prop_shuffle_vec()) {
        let log = Arc::new(Mutex::new(Vec::new()));
        let mut registry = Registry::new();
        for n in &names {
            let stage = StageKind::AnswerRetrieval;
            registry.register(stage, Arc::new(Probe { name: n.clone(), stage, log: log.clone() })).unwrap();
        }
        let default = registry.default_for(StageKind::AnswerRetrieval).unwrap();
        prop_assert_eq!(default.name(), names[0].as_str());
    }

    #[test]
    fn config_digest_ignores_line_order(
        lines in Just(vec![
            "corpus_path = c", "index_path = i", "questions_path = q", "answers_out_path = a",
            "retrieval.k = 10", "# comment", "weights.proximity = 1.5",
        ]).prop_shuffle()
    ) {
        let base = std::path::Path::new("/srv/qa");
        let a = parse_config(&lines.join("\n"), base).unwrap();
        let b = parse_config(&lines.iter().rev().cloned().collect::<Vec<_>>().join("\n"), base).unwrap();
        prop_assert_eq!(a.digest(), b.digest());
        prop_assert_eq!(a.digest(), parse_config(&lines.join("\n"), base).unwrap().digest());
    }
}

trait ShuffleVec {
    fn prop_shuffle_vec(self) -> BoxedStrategy<Vec<String>>;
}

impl<S: Strategy<Value = BTreeSet<String>> + 'static> ShuffleVec for S {
    fn prop_shuffle_vec(self) -> BoxedStrategy<Vec<String>> {
        self.prop_map(|s| s.into_iter().collect::<Vec<_>>()).prop_shuffle().boxed()
    }
}
