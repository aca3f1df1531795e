use std::fs;

use crisis_core::corpus::{
    events_path, filter_corpus, load_corpus, save_corpus, Corpus, CorpusFormat, Event,
    GeographicSpread, HazardCategory, LabelClass, Message, Selection, TemporalDevelopment,
};
use crisis_core::Error;
use proptest::prelude::*;

fn event(id: &str, hazard: &str) -> Event {
    Event {
        id: id.into(),
        name: format!("{id} event"),
        hazard_type: hazard.into(),
        hazard_category: HazardCategory::Natural,
        hazard_subcategory: "geophysical".into(),
        temporal_development: TemporalDevelopment::Instantaneous,
        geographic_spread: GeographicSpread::Focalized,
        country: "Italy".into(),
        year: 2012,
    }
}

fn message(id: &str, dataset: &str, text: &str, lang: &str, event: &str, label: LabelClass) -> Message {
    Message {
        id: id.into(),
        text: text.into(),
        translated_text: None,
        language: lang.into(),
        event_id: event.into(),
        label,
        source_dataset: dataset.into(),
        original_label: "x".into(),
        has_location_meta: false,
        has_media_meta: false,
    }
}

#[test]
fn empty_file_gives_empty_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("corpus.jsonl");
    fs::write(&path, "").unwrap();
    let c = load_corpus(&path, CorpusFormat::UnifiedJsonLines).unwrap();
    assert!(c.is_empty());
    assert!(c.events.is_empty());
}

#[test]
fn duplicate_id_is_reported_at_second_occurrence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("corpus.jsonl");
    let c = Corpus::new(
        vec![
            message("a", "d", "one", "en", "e1", LabelClass::Related),
            message("b", "d", "two", "en", "e1", LabelClass::NotRelated),
            message("a", "d", "three", "en", "e1", LabelClass::Related),
        ],
        vec![event("e1", "earthquake")],
        vec!["d".into()],
    );
    save_corpus(&c, &path, CorpusFormat::UnifiedJsonLines).unwrap();
    match load_corpus(&path, CorpusFormat::UnifiedJsonLines) {
        Err(Error::DuplicateMessage { id, first_line, second_line, .. }) => {
            assert_eq!(id, "a");
            assert_eq!((first_line, second_line), (1, 3));
        }
        other => panic!("expected duplicate error, got {other:?}"),
    }
}

#[test]
fn same_id_in_different_datasets_is_allowed() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("corpus.jsonl");
    let c = Corpus::new(
        vec![
            message("a", "d1", "one", "en", "e1", LabelClass::Related),
            message("a", "d2", "two", "en", "e1", LabelClass::NotRelated),
        ],
        vec![event("e1", "earthquake")],
        vec!["d1".into(), "d2".into()],
    );
    save_corpus(&c, &path, CorpusFormat::UnifiedJsonLines).unwrap();
    assert_eq!(load_corpus(&path, CorpusFormat::UnifiedJsonLines).unwrap(), c);
}

#[test]
fn dangling_event_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("corpus.jsonl");
    let c = Corpus::new(
        vec![message("a", "d", "one", "en", "missing", LabelClass::Related)],
        vec![event("e1", "flood")],
        vec![],
    );
    save_corpus(&c, &path, CorpusFormat::UnifiedJsonLines).unwrap();
    assert!(matches!(
        load_corpus(&path, CorpusFormat::UnifiedJsonLines),
        Err(Error::DanglingEvent { event_id, .. }) if event_id == "missing"
    ));
}

#[test]
fn malformed_row_names_line_and_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("corpus.jsonl");
    let good = serde_json::to_string(&message("a", "d", "one", "en", "e1", LabelClass::Related)).unwrap();
    let bad = good.replace("\"a\"", "\"b\"").replace("\"related\"", "\"maybe\"");
    fs::write(&path, format!("{good}\n{bad}\n")).unwrap();
    fs::write(events_path(&path), serde_json::to_string(&event("e1", "flood")).unwrap() + "\n").unwrap();
    match load_corpus(&path, CorpusFormat::UnifiedJsonLines) {
        Err(Error::Malformed { line, field, .. }) => {
            assert_eq!(line, 2);
            assert_eq!(field, "label");
        }
        other => panic!("expected malformed error, got {other:?}"),
    }

    fs::write(&path, format!("{good}\n{{not json\n")).unwrap();
    assert!(matches!(
        load_corpus(&path, CorpusFormat::UnifiedJsonLines),
        Err(Error::Malformed { line: 2, .. })
    ));
}

#[test]
fn delimited_table_round_trip_and_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("corpus.csv");
    let mut m = message("a", "d", "text, with \"quotes\"\nand a newline", "es", "e1", LabelClass::Related);
    m.translated_text = Some("translated".into());
    m.has_media_meta = true;
    let c = Corpus::new(
        vec![m, message("b", "d", "plain", "it", "e2", LabelClass::NotRelated)],
        vec![event("e1", "earthquake"), event("e2", "flood")],
        vec!["d".into()],
    );
    save_corpus(&c, &path, CorpusFormat::DelimitedTable).unwrap();
    assert_eq!(load_corpus(&path, CorpusFormat::DelimitedTable).unwrap(), c);

    // metadata columns absent -> false
    let path2 = dir.path().join("bare.csv");
    fs::write(
        &path2,
        "id,text,language,event_id,label,source_dataset,original_label\n1,hola,es,e1,related,d,relevant\n",
    )
    .unwrap();
    fs::copy(events_path(&path), events_path(&path2)).unwrap();
    let bare = load_corpus(&path2, CorpusFormat::DelimitedTable).unwrap();
    assert!(!bare.messages[0].has_location_meta && !bare.messages[0].has_media_meta);
    assert_eq!(bare.messages[0].translated_text, None);
}

fn arb_message(n_events: usize) -> impl Strategy<Value = Message> {
    (
        "[a-z0-9]{1,8}",
        "[a-zA-Z ,.!?áé@#]{1,40}",
        prop::option::of("[a-z ]{1,20}"),
        prop::sample::select(vec!["en", "es", "it"]),
        0..n_events,
        any::<bool>(),
        any::<bool>(),
        any::<bool>(),
    )
        .prop_map(|(id, text, tr, lang, ev, related, loc, media)| Message {
            id,
            text,
            translated_text: tr,
            language: lang.into(),
            event_id: format!("e{ev}"),
            label: if related { LabelClass::Related } else { LabelClass::NotRelated },
            source_dataset: "d".into(),
            original_label: "orig".into(),
            has_location_meta: loc,
            has_media_meta: media,
        })
}

fn arb_corpus() -> impl Strategy<Value = Corpus> {
    prop::collection::vec(arb_message(3), 0..30).prop_map(|mut msgs| {
        let mut seen = std::collections::HashSet::new();
        msgs.retain(|m| seen.insert(m.id.clone()));
        let provenance = if msgs.is_empty() { vec![] } else { vec!["d".to_string()] };
        Corpus::new(
            msgs,
            vec![event("e0", "earthquake"), event("e1", "flood"), event("e2", "explosion")],
            provenance,
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn save_then_load_is_identity(c in arb_corpus(), csv in any::<bool>()) {
        let dir = tempfile::tempdir().unwrap();
        let (path, fmt) = if csv {
            (dir.path().join("c.csv"), CorpusFormat::DelimitedTable)
        } else {
            (dir.path().join("c.jsonl"), CorpusFormat::UnifiedJsonLines)
        };
        save_corpus(&c, &path, fmt).unwrap();
        let back = load_corpus(&path, fmt).unwrap();
        prop_assert_eq!(back.messages, c.messages);
        prop_assert_eq!(back.events, c.events);
    }

    #[test]
    fn sequential_filters_equal_conjunction(
        c in arb_corpus(),
        langs in prop::collection::btree_set(prop::sample::select(vec!["en", "es", "it"]), 1..3),
        hazards in prop::collection::btree_set(prop::sample::select(vec!["earthquake", "flood", "explosion"]), 1..3),
    ) {
        let p1 = Selection::new().with(crisis_core::corpus::Attribute::Language, langs.iter().copied());
        let p2 = Selection::new().with(crisis_core::corpus::Attribute::HazardType, hazards.iter().copied());
        let two_step = filter_corpus(&filter_corpus(&c, &p1), &p2);
        let joint = filter_corpus(&c, &p1.clone().and(p2.clone()));
        prop_assert_eq!(two_step, joint);
    }
}
