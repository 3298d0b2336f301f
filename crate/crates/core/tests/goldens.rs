//! Frozen artifacts, reviewed by hand when they were created.

use qanus_core::analysis::{analyze, render_analyses};
use qanus_core::classifier::{parse_training_str, train_classifier, LabelSpace};
use qanus_core::evaluation::{evaluate, parse_gold, render_report};
use qanus_core::question::Question;
use qanus_core::retrieval::parse_answers;
use qanus_core::synthetic::planted_fixture;
use qanus_core::text::Stoplist;

#[test]
fn planted_question_analyses() {
    let (examples, _) = parse_training_str(include_str!("../../../data/train_questions.txt"));
    let model = train_classifier(&examples, 1.0, LabelSpace::CoarseFine).unwrap();
    let fixture = planted_fixture(2010, 100, 5);
    let stoplist = Stoplist::default();
    let analyses: Vec<_> = fixture
        .facts
        .iter()
        .map(|f| analyze(&Question::new(&f.qid, &f.question), &model, &stoplist))
        .collect();
    for (a, f) in analyses.iter().zip(&fixture.facts) {
        assert_eq!(a.answer_type.label, f.kind.label(), "{}", f.question);
    }
    assert_eq!(render_analyses(&analyses), include_str!("golden/planted_analyses.tsv"));
}

#[test]
fn mixed_outcome_report() {
    let gold = parse_gold(include_str!("golden/mixed_gold.txt")).unwrap();
    let answers = parse_answers(include_str!("golden/mixed_answers.tsv")).unwrap();
    let report = evaluate(&answers, &gold).unwrap();
    assert_eq!(render_report(&report), include_str!("golden/mixed_report.txt"));
}
