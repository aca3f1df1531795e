use crisis_core::corpus::LabelClass::{NotRelated as N, Related as R};
use crisis_core::embed::RepresentationId;
use crisis_core::evalx::{
    aggregate_matrix, confusion_counts, emit_report, f1_score, run_experiment, ConfusionCounts, EvalReport,
    ExperimentOptions, F1Mode, Metrics, ReportFormat, ReportOptions,
};
use crisis_core::forest::ForestParams;
use crisis_core::pipeline::{run_grid, Grid};
use crisis_core::scenario::{BuildOptions, ScenarioKind, ScenarioSpec};
use crisis_core::synthetic::{synthetic_corpus, synthetic_resources, SyntheticConfig};
use crisis_core::Error;
use proptest::prelude::*;

fn options(forest: &ForestParams, repeats: usize) -> ExperimentOptions<'_> {
    ExperimentOptions {
        repeats,
        master_seed: 17,
        forest,
        build: BuildOptions::default(),
    }
}

fn external_f1(c: &ConfusionCounts) -> (f64, f64, f64) {
    let f = |tp: f64, fp: f64, fneg: f64| if tp + fp + fneg == 0.0 { 0.0 } else { 2.0 * tp / (2.0 * tp + fp + fneg) };
    let (tp, fp, tn, fneg) = (c.tp as f64, c.fp as f64, c.tn as f64, c.fn_ as f64);
    let pos = f(tp, fp, fneg);
    let neg = f(tn, fneg, fp);
    let (sp, sn) = (tp + fneg, tn + fp);
    (pos, (pos + neg) / 2.0, (pos * sp + neg * sn) / (sp + sn))
}

#[test]
fn averaged_metrics_match_recomputation() {
    let cfg = SyntheticConfig::default();
    let corpus = synthetic_corpus(&cfg).unwrap();
    let res = synthetic_resources(&corpus, cfg.seed).unwrap().to_resources();
    let forest = ForestParams { n_trees: 15, ..ForestParams::default() };
    let spec = ScenarioSpec::new(ScenarioKind::MonolingualMultiDomain, "it", "flood", 17);
    let report = run_experiment(&corpus, &spec, RepresentationId::Muse, &res, &options(&forest, 5)).unwrap();
    assert_eq!(report.runs.len(), 5);
    let mut sums = (0.0, 0.0, 0.0);
    for run in &report.runs {
        let (p, m, w) = external_f1(&run.confusion);
        assert!((p - run.metrics.f1_positive).abs() < 1e-12);
        assert!((m - run.metrics.f1_macro).abs() < 1e-12);
        assert!((w - run.metrics.f1_weighted).abs() < 1e-12);
        assert_eq!(run.confusion.total() as usize, report.test_size);
        sums = (sums.0 + p, sums.1 + m, sums.2 + w);
    }
    assert!((report.averaged.f1_positive - sums.0 / 5.0).abs() < 1e-12);
    assert!((report.averaged.f1_macro - sums.1 / 5.0).abs() < 1e-12);
    assert!((report.averaged.f1_weighted - sums.2 / 5.0).abs() < 1e-12);
    let seeds: std::collections::BTreeSet<u64> = report.runs.iter().map(|r| r.seed).collect();
    assert_eq!(seeds.len(), 5);
}

#[test]
fn experiments_are_reproducible() {
    let cfg = SyntheticConfig { messages_per_event: 20, ..SyntheticConfig::default() };
    let corpus = synthetic_corpus(&cfg).unwrap();
    let res = synthetic_resources(&corpus, cfg.seed).unwrap().to_resources();
    let forest = ForestParams { n_trees: 10, ..ForestParams::default() };
    let spec = ScenarioSpec::new(ScenarioKind::CrossLingualMultiDomain, "es", "earthquake", 17);
    let a = run_experiment(&corpus, &spec, RepresentationId::Lf, &res, &options(&forest, 1)).unwrap();
    let b = run_experiment(&corpus, &spec, RepresentationId::Lf, &res, &options(&forest, 1)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn separable_data_is_learned() {
    let cfg = SyntheticConfig { label_noise: 0.0, messages_per_event: 80, ..SyntheticConfig::default() };
    let corpus = synthetic_corpus(&cfg).unwrap();
    let res = synthetic_resources(&corpus, cfg.seed).unwrap().to_resources();
    let forest = ForestParams::default();
    let spec = ScenarioSpec::new(ScenarioKind::MonolingualMonodomain, "en", "earthquake", 17);
    let r = run_experiment(&corpus, &spec, RepresentationId::XlmR, &res, &options(&forest, 3)).unwrap();
    assert!(r.averaged.f1_positive >= 0.95, "{:?}", r.averaged);
}

#[test]
fn errors_name_the_cell() {
    let corpus = synthetic_corpus(&SyntheticConfig::default()).unwrap();
    let forest = ForestParams::default();
    let spec = ScenarioSpec::new(ScenarioKind::MonolingualMonodomain, "es", "flood", 1);
    let err = run_experiment(&corpus, &spec, RepresentationId::MtGlove, &Default::default(), &options(&forest, 1))
        .unwrap_err();
    let text = err.to_string();
    assert!(text.contains("monolingual_monodomain/es/flood") && text.contains("MT_GloVe") && text.contains("features"), "{text}");
}

fn report(kind: ScenarioKind, lang: &str, f1: f64, hash: &str) -> EvalReport {
    let metrics = Metrics { f1_positive: f1, f1_macro: f1, f1_weighted: f1 };
    EvalReport {
        spec: ScenarioSpec::new(kind, lang, "flood", 0),
        representation: RepresentationId::Lf,
        test_hash: hash.into(),
        test_size: 10,
        runs: vec![],
        averaged: metrics,
    }
}

#[test]
fn aggregation_examples() {
    let k = ScenarioKind::MonolingualMonodomain;
    let m = aggregate_matrix(vec![report(k, "es", 0.80, "a"), report(k, "it", 0.86, "b")], false).unwrap();
    let avg = m.scenario_average(k, RepresentationId::Lf, F1Mode::Positive).unwrap();
    assert!((avg - 0.83).abs() < 1e-12);

    let single = aggregate_matrix(vec![report(k, "es", 0.7, "a")], false).unwrap();
    assert_eq!(single.scenario_average(k, RepresentationId::Lf, F1Mode::Macro), Some(0.7));

    let dup = aggregate_matrix(vec![report(k, "es", 0.7, "a"), report(k, "es", 0.7, "a")], false);
    assert!(matches!(dup, Err(Error::DuplicateCell(_))));
    let other = ScenarioKind::MonolingualCrossDomain;
    let mismatch = aggregate_matrix(vec![report(k, "es", 0.7, "a"), report(other, "es", 0.7, "b")], false);
    assert!(matches!(mismatch, Err(Error::TestSetMismatch(_))));
    let gap = vec![report(k, "es", 0.7, "a"), report(other, "it", 0.7, "b")];
    assert!(aggregate_matrix(gap.clone(), false).is_err());
    assert!(aggregate_matrix(gap, true).is_ok());
}

#[test]
fn grid_reports_are_byte_identical_across_runs() {
    let cfg = SyntheticConfig { messages_per_event: 20, ..SyntheticConfig::default() };
    let corpus = synthetic_corpus(&cfg).unwrap();
    let syn = synthetic_resources(&corpus, cfg.seed).unwrap();
    let res = syn.to_resources();
    let forest = ForestParams { n_trees: 8, ..ForestParams::default() };
    let grid = Grid {
        kinds: ScenarioKind::ALL.to_vec(),
        targets: vec![("es".into(), "flood".into()), ("en".into(), "explosion".into())],
        representations: vec![RepresentationId::Lf, RepresentationId::MBert],
    };
    let opts = ExperimentOptions {
        build: BuildOptions { translator: Some(&syn.dictionary), ..BuildOptions::default() },
        ..options(&forest, 2)
    };
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let m = run_grid(&corpus, &grid, &res, &opts).unwrap();
        // pivot-language target cannot host the kinds that need a second language
        assert_eq!(m.skipped.len(), 4 * 2);
        assert_eq!(m.cells.len(), (7 + 3) * 2);
        for f in ReportFormat::ALL {
            emit_report(&m, f, d.path(), ReportOptions::default()).unwrap();
        }
    }
    let mut names: Vec<_> = std::fs::read_dir(dirs[0].path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 5);
    for n in names {
        let a = std::fs::read(dirs[0].path().join(&n)).unwrap();
        let b = std::fs::read(dirs[1].path().join(&n)).unwrap();
        assert!(a == b, "{n:?} differs");
    }
}

#[test]
fn confusion_and_f1_examples() {
    let c = confusion_counts(&[R, R, N, N], &[R, N, N, R]).unwrap();
    assert_eq!((c.tp, c.fp, c.tn, c.fn_), (1, 1, 1, 1));
    let c = ConfusionCounts { tp: 8, fp: 2, tn: 0, fn_: 4 };
    assert_eq!(f1_score(&c, F1Mode::Positive), 16.0 / 22.0);
    let c = ConfusionCounts { tp: 0, fp: 0, tn: 10, fn_: 0 };
    assert_eq!(f1_score(&c, F1Mode::Positive), 0.0);
    assert_eq!(f1_score(&c, F1Mode::Macro), 0.5);
}

proptest! {
    #[test]
    fn positive_f1_ignores_true_negatives(tp in 0u64..50, fp in 0u64..50, fneg in 0u64..50, tn in 0u64..50, tn2 in 0u64..50) {
        let a = ConfusionCounts { tp, fp, tn, fn_: fneg };
        let b = ConfusionCounts { tn: tn2, ..a };
        prop_assert_eq!(f1_score(&a, F1Mode::Positive), f1_score(&b, F1Mode::Positive));
    }

    #[test]
    fn weighted_equals_macro_when_actuals_are_balanced(n in 1u64..40, tp_frac in 0u64..=100, tn_frac in 0u64..=100) {
        let tp = n * tp_frac / 100;
        let tn = n * tn_frac / 100;
        let c = ConfusionCounts { tp, fn_: n - tp, tn, fp: n - tn };
        prop_assert!((f1_score(&c, F1Mode::Weighted) - f1_score(&c, F1Mode::Macro)).abs() < 1e-12);
    }

    #[test]
    fn averages_stay_within_run_range(values in proptest::collection::vec(0.0f64..=1.0, 1..8)) {
        let runs: Vec<Metrics> = values.iter().map(|v| Metrics { f1_positive: *v, f1_macro: *v, f1_weighted: *v }).collect();
        let avg = Metrics::mean(&runs).f1_positive;
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(avg >= lo - 1e-12 && avg <= hi + 1e-12);
    }
}
