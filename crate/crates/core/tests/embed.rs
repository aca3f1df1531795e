use std::io::Write;

use crisis_core::corpus::{LabelClass, Message};
use crisis_core::embed::{
    build_representation, embed_mean, load_word_vectors, pool_contextual, CacheEntry, CachedTranslator,
    ContextualCache, DictionaryTranslator, RepresentationId, Resources, Translator, VectorTable,
};
use crisis_core::lingfeat::{Normalization, TokenSequence};
use crisis_core::synthetic::{synthetic_corpus, synthetic_resources, SyntheticConfig};
use crisis_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.path().join(name);
    std::fs::File::create(&p).unwrap().write_all(text.as_bytes()).unwrap();
    p
}

#[test]
fn vector_files_with_and_without_header() {
    let dir = tempfile::tempdir().unwrap();
    let plain = write(&dir, "a.txt", "quake 1 2 3\nflood 0.5 -1 2e-1\n");
    let t = load_word_vectors(&plain, 3).unwrap();
    assert_eq!(t.len(), 2);
    assert_eq!(t.get("flood").unwrap(), &[0.5, -1.0, 0.2]);

    let header = write(&dir, "b.txt", "2 3\nquake 1 2 3\nquake 9 9 9\n");
    let t = load_word_vectors(&header, 3).unwrap();
    assert_eq!(t.get("quake").unwrap(), &[1.0, 2.0, 3.0]);
    assert_eq!(t.warnings.len(), 1);

    let bad = write(&dir, "c.txt", "quake 1 2 3\nflood 1 2\n");
    match load_word_vectors(&bad, 3) {
        Err(Error::DimensionMismatch { line, expected, found, .. }) => assert_eq!((line, expected, found), (2, 3, 2)),
        other => panic!("unexpected {other:?}"),
    }
}

fn naive_mean(tokens: &[String], table: &VectorTable) -> Vec<f64> {
    (0..table.dims)
        .map(|d| {
            if tokens.is_empty() {
                return 0.0;
            }
            let total: f64 = tokens.iter().map(|t| table.get(t).map_or(0.0, |v| f64::from(v[d]))).sum();
            total / tokens.len() as f64
        })
        .collect()
}

#[test]
fn mean_embedding_matches_reference() {
    let mut r = ChaCha8Rng::seed_from_u64(3);
    let mut table = VectorTable::new("t", 8);
    let vocab: Vec<String> = (0..40).map(|i| format!("w{i}")).collect();
    for w in &vocab {
        table.insert(w.clone(), (0..8).map(|_| r.random_range(-3.0f32..3.0)).collect()).unwrap();
    }
    for case in 0..1000 {
        let len = if case % 50 == 0 { 0 } else { r.random_range(1..30) };
        let tokens: Vec<String> = (0..len)
            .map(|_| if r.random_bool(0.2) { format!("oov{}", r.random_range(0..5)) } else { vocab[r.random_range(0..40)].clone() })
            .collect();
        let seq = TokenSequence { tokens: tokens.clone(), normalization: Normalization::Placeholdered };
        let got = embed_mean(&seq, &table);
        for (a, b) in got.iter().zip(naive_mean(&tokens, &table)) {
            assert!((a - b).abs() <= 1e-12, "case {case}: {a} vs {b}");
        }
    }
}

#[test]
fn contextual_pooling_skips_padding_rows() {
    let m = CacheEntry::TokenMatrix(vec![vec![1.0, 1.0], vec![3.0, 3.0], vec![0.0, 0.0]]);
    assert_eq!(pool_contextual(&m, 2), vec![2.0, 2.0]);
    assert_eq!(pool_contextual(&CacheEntry::TokenMatrix(vec![vec![0.0, 0.0]]), 2), vec![0.0, 0.0]);
    assert_eq!(pool_contextual(&CacheEntry::Pooled(vec![0.5, -1.0]), 2), vec![0.5, -1.0]);
}

#[test]
fn cache_files_round_trip_and_report_errors() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = ContextualCache::new("m", 2);
    c.insert("a", CacheEntry::Pooled(vec![1.0, 2.0])).unwrap();
    c.insert("b", CacheEntry::TokenMatrix(vec![vec![1.0, 0.0], vec![0.0, 0.0]])).unwrap();
    assert!(c.insert("c", CacheEntry::Pooled(vec![1.0])).is_err());
    let p = dir.path().join("c.jsonl");
    c.save(&p).unwrap();
    let back = ContextualCache::load(&p, 2).unwrap();
    assert_eq!(back.entries, c.entries);
    assert!(matches!(back.pool("zz"), Err(Error::MissingCacheEntry { .. })));

    let mixed = write(&dir, "m.jsonl", "{\"id\":\"a\",\"model_name\":\"x\",\"vector\":[1,2]}\n{\"id\":\"b\",\"model_name\":\"y\",\"vector\":[1,2]}\n");
    assert!(matches!(ContextualCache::load(&mixed, 2), Err(Error::Malformed { line: 2, .. })));
    let short = write(&dir, "s.jsonl", "{\"id\":\"a\",\"model_name\":\"x\",\"vector\":[1,2,3]}\n");
    assert!(matches!(ContextualCache::load(&short, 2), Err(Error::DimensionMismatch { line: 1, .. })));
}

#[test]
fn representation_widths_are_fixed() {
    let cfg = SyntheticConfig { messages_per_event: 8, ..SyntheticConfig::default() };
    let mut corpus = synthetic_corpus(&cfg).unwrap();
    let mut odd = corpus.messages[0].clone();
    for (i, text) in ["", "🙂🙂", "RT @a: http://x.y", "ÆØÅ !!!"].iter().enumerate() {
        odd.id = format!("odd{i}");
        odd.text = text.to_string();
        odd.label = LabelClass::NotRelated;
        corpus.messages.push(odd.clone());
    }
    let res = synthetic_resources(&corpus, cfg.seed).unwrap().to_resources();
    let expected = [
        (RepresentationId::Lf, 48),
        (RepresentationId::MtGlove, 100),
        (RepresentationId::Muse, 300),
        (RepresentationId::MuseLf, 348),
        (RepresentationId::MBert, 768),
        (RepresentationId::MtBert, 768),
        (RepresentationId::XlmR, 768),
    ];
    for (rep, width) in expected {
        let m = build_representation(&corpus.messages, rep, &res).unwrap();
        assert_eq!(m.width(), width, "{rep}");
        assert_eq!(rep.width(), width);
        assert_eq!(m.len(), corpus.messages.len());
        assert!(m.rows.iter().all(|r| r.len() == width && r.iter().all(|v| v.is_finite())));
    }
}

#[test]
fn missing_resources_are_named() {
    let corpus = synthetic_corpus(&SyntheticConfig { messages_per_event: 4, ..SyntheticConfig::default() }).unwrap();
    for rep in [RepresentationId::MtGlove, RepresentationId::Muse, RepresentationId::XlmR] {
        let err = build_representation(&corpus.messages, rep, &Resources::default()).unwrap_err();
        assert!(matches!(err.root(), Error::MissingResource { .. } | Error::MissingTranslations(_)), "{rep}: {err}");
    }
}

#[test]
fn frozen_translation_cache_serves_hits_and_rejects_misses() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.jsonl");
    let mut dict = DictionaryTranslator::new();
    dict.add("es", "en", "sismo", "quake");
    {
        let live = CachedTranslator::open(&path, Some(Box::new(dict))).unwrap();
        assert_eq!(live.translate("Sismo fuerte", "es", "en").unwrap(), "quake fuerte");
    }
    let frozen = CachedTranslator::open(&path, None).unwrap();
    assert_eq!(frozen.len(), 1);
    assert_eq!(frozen.translate("Sismo fuerte", "es", "en").unwrap(), "quake fuerte");
    assert!(matches!(frozen.translate("otra cosa", "es", "en"), Err(Error::Translation(_))));

    let msg = Message {
        id: "m".into(),
        text: "Sismo fuerte".into(),
        translated_text: None,
        language: "es".into(),
        event_id: "e".into(),
        label: LabelClass::Related,
        source_dataset: "d".into(),
        original_label: "x".into(),
        has_location_meta: false,
        has_media_meta: false,
    };
    let texts = crisis_core::embed::pivot_texts(&[msg], Some(&frozen)).unwrap();
    assert_eq!(texts, vec!["quake fuerte".to_string()]);
}
