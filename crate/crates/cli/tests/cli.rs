use std::path::Path;
use std::process::{Command, Output};

fn crisis(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crisis"))
        .args(args)
        .current_dir(cwd)
        .env_remove("CRISIS_TRANSLATE_ENDPOINT")
        .output()
        .unwrap()
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn fixture() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    ok(&crisis(&["synth", "--out", "fx"], dir.path()));
    dir
}

#[test]
fn unknown_command_prints_usage_and_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = crisis(&["frobnicate"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    let out = crisis(&["run-matrix", "--no-such-flag"], dir.path());
    assert!(!out.status.success());
}

#[test]
fn run_matrix_is_byte_identical_across_invocations() {
    let dir = fixture();
    let root = dir.path();
    ok(&crisis(&["run-matrix", "--config", "fx/config.toml", "--out", "a", "--workers", "1"], root));
    ok(&crisis(&["run-matrix", "--config", "fx/config.toml", "--out", "b", "--workers", "4"], root));
    let mut names: Vec<_> = std::fs::read_dir(root.join("a")).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 6, "{names:?}");
    for n in names {
        let a = std::fs::read(root.join("a").join(&n)).unwrap();
        let b = std::fs::read(root.join("b").join(&n)).unwrap();
        assert!(a == b, "{n:?} differs");
    }
}

#[test]
fn scenario_writes_one_manifest_and_validates() {
    let dir = fixture();
    let root = dir.path();
    let args = [
        "scenario",
        "--config",
        "fx/config.toml",
        "--kind",
        "cross_lingual_monodomain",
        "--target-lang",
        "es",
        "--target-domain",
        "earthquake",
        "--out",
        "m",
    ];
    ok(&crisis(&args, root));
    let files: Vec<_> = std::fs::read_dir(root.join("m")).unwrap().collect();
    assert_eq!(files.len(), 1);
    let manifest = root.join("m/cross_lingual_monodomain_es_earthquake.manifest.json");
    let m = manifest.to_str().unwrap();
    ok(&crisis(&["validate", "--config", "fx/config.toml", "--manifest", m], root));
}

#[test]
fn step_commands_compose_into_the_matrix_result() {
    let dir = fixture();
    let root = dir.path();
    let base = ["--config", "fx/config.toml", "--rep", "muse"];
    let with = |extra: &[&str]| -> Vec<String> { base.iter().chain(extra).map(|s| s.to_string()).collect() };
    let run = |args: Vec<String>| ok(&crisis(&args.iter().map(String::as_str).collect::<Vec<_>>(), root));
    let mut a = vec!["scenario".to_string()];
    a.extend(with(&["--kind", "monolingual_multi_domain", "--target-lang", "it", "--target-domain", "earthquake", "--out", "m"]));
    run(a);
    let manifest = "m/monolingual_multi_domain_it_earthquake.manifest.json";
    let mut a = vec!["features".to_string()];
    a.extend(with(&["--manifest", manifest, "--out", "f"]));
    run(a);
    let mut a = vec!["train".to_string()];
    a.extend(with(&["--manifest", manifest, "--features", "f/features_muse.csv", "--out", "t"]));
    run(a);
    let mut a = vec!["eval".to_string()];
    a.extend(with(&["--manifest", manifest, "--features", "f/features_muse.csv", "--model", "t/model_run0.json", "--out", "e"]));
    run(a);
    run(vec!["report".into(), "--input".into(), "e/eval.json".into(), "--out".into(), "r".into()]);
    assert!(root.join("r/summary.csv").exists());

    let mut a = vec!["run-matrix".to_string()];
    a.extend(with(&["--kind", "monolingual_multi_domain", "--target-lang", "it", "--target-domain", "earthquake", "--out", "g"]));
    run(a);
    let eval: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(root.join("e/eval.json")).unwrap()).unwrap();
    let grid: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(root.join("g/matrix.json")).unwrap()).unwrap();
    assert_eq!(eval["runs"][0]["confusion"], grid["cells"][0]["runs"][0]["confusion"]);
    assert_eq!(eval["test_hash"], grid["cells"][0]["test_hash"]);
}

#[test]
fn invalid_config_is_itemized() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "corpus = [\"nope.jsonl\"]\nrepeats = 0\n[resources]\nglove = \"missing.txt\"\n").unwrap();
    let out = crisis(&["run-matrix", "--config", "c.toml"], dir.path());
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    for needle in ["repeats must be at least 1", "nope.jsonl", "missing.txt", "no targets"] {
        assert!(err.contains(needle), "missing `{needle}` in:\n{err}");
    }
}

#[test]
fn failures_name_scenario_representation_and_stage() {
    let dir = fixture();
    let root = dir.path();
    // no glove table configured
    let cfg = std::fs::read_to_string(root.join("fx/config.toml")).unwrap().replace("glove = \"glove.txt\"\n", "");
    std::fs::write(root.join("fx/broken.toml"), cfg).unwrap();
    let out = crisis(
        &["run-matrix", "--config", "fx/broken.toml", "--rep", "mt_glove", "--kind", "monolingual_monodomain"],
        root,
    );
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("[monolingual_monodomain/es/flood | MT_GloVe | features]"), "{err}");
}

#[test]
fn unify_maps_labels_and_annotates_events() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    std::fs::write(
        root.join("t6.csv"),
        "id,text,event_id,original_label\n1,the earthquake destroyed houses near the coast,nepal,on-topic\n2,great coffee this morning with friends,nepal,off-topic\n",
    )
    .unwrap();
    std::fs::write(
        root.join("tax.csv"),
        "event_id,name,hazard_type,hazard_category,hazard_subcategory,temporal_development,geographic_spread,country,year\nnepal,Nepal earthquake,earthquake,natural,geophysical,instantaneous,focalized,Nepal,2015\n",
    )
    .unwrap();
    let out = ok(&crisis(&["unify", "--source", "CrisisLexT6=t6.csv", "--taxonomy", "tax.csv", "--out", "u"], root));
    assert!(out.contains("2 messages, 1 events"), "{out}");
    let corpus = std::fs::read_to_string(root.join("u/corpus.jsonl")).unwrap();
    assert!(corpus.contains("\"not_related\"") && corpus.contains("\"en\""), "{corpus}");
    ok(&crisis(&["validate", "--corpus", "u/corpus.jsonl"], root));

    std::fs::write(root.join("bad.csv"), "id,text,event_id,original_label\n1,x,nepal,mystery label\n").unwrap();
    let out = crisis(&["unify", "--source", "CrisisLexT6=bad.csv", "--taxonomy", "tax.csv", "--out", "u2"], root);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("mystery label"));
}
