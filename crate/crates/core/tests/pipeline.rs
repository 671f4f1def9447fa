mod common;

use std::fs;
use std::path::Path;

use common::fixture;
use scalemate::config::PipelineConfig;
use scalemate::pipeline::{run_pipeline, Stage};

fn demo_config() -> PipelineConfig {
    PipelineConfig::load(fixture("demo/pipeline.toml")).unwrap()
}

fn read(dir: &Path, rel: &str) -> String {
    fs::read_to_string(dir.join(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

#[test]
fn demo_report_matches_golden_file() {
    let out = tempfile::tempdir().unwrap();
    run_pipeline(&demo_config(), out.path()).unwrap();
    let expected = fs::read_to_string(fixture("demo/expected_report.json")).unwrap();
    assert_eq!(read(out.path(), "report.json"), expected);
}

#[test]
fn demo_counts_are_as_hand_computed() {
    let out = tempfile::tempdir().unwrap();
    let report = run_pipeline(&demo_config(), out.path()).unwrap();

    // 200 sentences plus one untagged line.
    assert_eq!(report.corpus.stats.sentences, 200);
    assert_eq!(report.corpus.stats.malformed_lines, 1);
    let manifest = fs::read_to_string(fixture("demo/manifest.tsv")).unwrap();
    assert_eq!(report.matches.total as usize, manifest.lines().count() - 1);

    assert_eq!(report.histogram.total_pairs, 18);
    assert_eq!(report.histogram.ties, 1);
    assert_eq!(report.histogram.pairs_by_pattern_types["4"], 1);

    let raw = &report.rows[0];
    assert_eq!(
        (raw.method.as_str(), raw.filter.as_str(), raw.pairs),
        ("raw", "none", 18)
    );
    let subj = raw.subjectivity.as_ref().unwrap();
    assert_eq!((subj.test_count, subj.correct_count), (10, 9));
    let arousal = raw.arousal.as_ref().unwrap();
    assert_eq!((arousal.test_count, arousal.correct_count), (11, 8));
    let agreement = report.agreement.as_ref().unwrap();
    assert_eq!((agreement.compared, agreement.agreeing), (9, 8));
    let combined = raw.combined.as_ref().unwrap();
    assert_eq!((combined.test_count, combined.correct_count), (8, 7));

    // Four methods, four filter settings each.
    assert_eq!(report.rows.len(), 16);
    let antonyms = &report.rows[1];
    assert_eq!((antonyms.filter.as_str(), antonyms.pairs), ("antonyms", 16));
}

#[test]
fn outputs_are_identical_across_runs_and_jobs() {
    let mut config = demo_config();
    let first = tempfile::tempdir().unwrap();
    run_pipeline(&config, first.path()).unwrap();
    for jobs in [1, 3, 8] {
        config.jobs = jobs;
        let other = tempfile::tempdir().unwrap();
        run_pipeline(&config, other.path()).unwrap();
        for rel in [
            "report.json",
            "matches.tsv",
            "pairs.tsv",
            "filtered/vectors-combined.tsv",
        ] {
            assert_eq!(
                read(first.path(), rel),
                read(other.path(), rel),
                "{rel} with jobs={jobs}"
            );
        }
    }
}

#[test]
fn expected_files_are_written() {
    let out = tempfile::tempdir().unwrap();
    run_pipeline(&demo_config(), out.path()).unwrap();
    let mut filtered: Vec<String> = fs::read_dir(out.path().join("filtered"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    filtered.sort();
    assert_eq!(filtered.len(), 15);
    assert!(filtered.contains(&"raw-antonyms.tsv".to_string()));
    assert!(!filtered.contains(&"raw-none.tsv".to_string()));
    let leftovers: Vec<_> = fs::read_dir(out.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.starts_with(".staging"))
        .collect();
    assert!(leftovers.is_empty(), "{leftovers:?}");
}

#[test]
fn missing_resource_fails_validation_and_writes_nothing() {
    let mut config = demo_config();
    config.measures[1].resource = fixture("demo/no-such-attributes.tsv");
    let out = tempfile::tempdir().unwrap();
    let err = run_pipeline(&config, out.path()).unwrap_err();
    assert_eq!(err.stage, Stage::Validate);
    assert!(err.to_string().contains("no-such-attributes.tsv"), "{err}");
    assert_eq!(fs::read_dir(out.path()).unwrap().count(), 0);
}

#[test]
fn broken_resource_fails_load_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    for entry in fs::read_dir(fixture("demo")).unwrap() {
        let entry = entry.unwrap();
        fs::copy(entry.path(), dir.path().join(entry.file_name())).unwrap();
    }
    fs::write(dir.path().join("norms.csv"), "Word,A.Mean.Sum\nwarm,12.0\n").unwrap();
    let config = PipelineConfig::load(dir.path().join("pipeline.toml")).unwrap();
    let out = dir.path().join("out");
    let err = run_pipeline(&config, &out).unwrap_err();
    assert_eq!(err.stage, Stage::Load);
    assert!(!out.join("report.json").exists());
    assert!(!out.join("pairs.tsv").exists());
}

#[test]
fn report_echo_is_portable() {
    let out = tempfile::tempdir().unwrap();
    let report = run_pipeline(&demo_config(), out.path()).unwrap();
    let echo = report.config.to_string();
    assert!(!echo.contains(env!("CARGO_MANIFEST_DIR")), "{echo}");
    assert!(report.config.get("jobs").is_none());
    assert!(report.config.get("output_dir").is_none());
}
