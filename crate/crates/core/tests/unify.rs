use crisis_core::corpus::LabelClass;
use crisis_core::unify::{
    apply_label_mapping, fill_missing_languages, LabelMapping, LanguageDetector, ProfileDetector,
    RawRow,
};

const HELDOUT: &str = include_str!("fixtures/lang_heldout.tsv");

#[test]
fn detector_accuracy_on_heldout_sentences() {
    let detector = ProfileDetector::bundled();
    let mut total = 0;
    let mut correct = 0;
    let mut misses = Vec::new();
    for line in HELDOUT.lines() {
        let (code, text) = line.split_once('\t').unwrap();
        total += 1;
        let guess = detector.detect(text).unwrap();
        if guess.code == code {
            correct += 1;
        } else {
            misses.push(format!("{code}->{}: {text}", guess.code));
        }
    }
    assert_eq!(total, 300);
    let accuracy = correct as f64 / total as f64;
    assert!(accuracy >= 0.9, "accuracy {accuracy}, misses: {misses:#?}");
}

#[test]
fn missing_languages_are_filled() {
    let rows = vec![
        RawRow {
            source_dataset: "ChileEarthquakeT1".into(),
            id: "1".into(),
            text: "fuerte sismo en la costa, las personas salieron a la calle".into(),
            language: None,
            event_id: "chile".into(),
            original_label: "relevant".into(),
            has_location_meta: None,
            has_media_meta: None,
        },
        RawRow {
            source_dataset: "ChileEarthquakeT1".into(),
            id: "2".into(),
            text: "!!".into(),
            language: None,
            event_id: "chile".into(),
            original_label: "not relevant".into(),
            has_location_meta: None,
            has_media_meta: None,
        },
    ];
    let out = apply_label_mapping(&rows, &LabelMapping::shipped());
    assert_eq!(out.messages[1].label, LabelClass::NotRelated);
    let mut corpus = crisis_core::corpus::Corpus::new(out.messages, vec![], vec![]);
    let (filled, failed) = fill_missing_languages(&mut corpus, &ProfileDetector::bundled());
    assert_eq!(filled, 1);
    assert_eq!(failed, vec!["2".to_string()]);
    assert_eq!(corpus.messages[0].language, "es");
}
