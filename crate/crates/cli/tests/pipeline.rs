mod common;

use std::fs;

use scriptswitch::eval::{CellKey, Scope, SelectionGrid};
use scriptswitch::{LanguageCondition, Provenance};
use scriptswitch_cli::pipeline::SelectionReport;
use scriptswitch_cli::{ExperimentConfig, Runner, Stage, StageStatus};

use common::*;

fn run_all(config: &std::path::Path, out: &std::path::Path) {
    Runner::new(load(config, out), false).run_all().unwrap();
}

#[test]
fn repeated_runs_are_byte_identical() {
    let data = tempfile::tempdir().unwrap();
    let config = write_fixture(data.path(), &small_fixture(), 11, ExperimentConfig::default());
    let a = data.path().join("a");
    let b = data.path().join("b");
    run_all(&config, &a);
    run_all(&config, &b);
    let (ta, tb) = (read_tree(&a), read_tree(&b));
    assert!(ta.contains_key("manifest.json") && ta.contains_key("reports/selection.json"));
    assert!(!ta.keys().any(|k| k.starts_with(".staging")));
    assert_eq!(tree_diff(&ta, &tb), Vec::<String>::new());

    // relocating the data directory changes nothing either
    let moved = tempfile::tempdir().unwrap();
    for entry in ["data", "abstracts", "stream.txt", "experiment.toml"] {
        let from = data.path().join(entry);
        if from.is_dir() {
            fs::create_dir_all(moved.path().join(entry)).unwrap();
            for f in fs::read_dir(&from).unwrap() {
                let f = f.unwrap();
                fs::copy(f.path(), moved.path().join(entry).join(f.file_name())).unwrap();
            }
        } else {
            fs::copy(&from, moved.path().join(entry)).unwrap();
        }
    }
    let c = moved.path().join("c");
    run_all(&moved.path().join("experiment.toml"), &c);
    assert_eq!(tree_diff(&ta, &read_tree(&c)), Vec::<String>::new());
}

#[test]
fn stages_are_cached_until_inputs_change() {
    let data = tempfile::tempdir().unwrap();
    let config = write_fixture(data.path(), &small_fixture(), 12, ExperimentConfig::default());
    let out = data.path().join("out");
    run_all(&config, &out);

    let mut runner = Runner::new(load(&config, &out), false);
    for stage in [Stage::Stats, Stage::Augment, Stage::Mine, Stage::Adapt, Stage::Train, Stage::Evaluate, Stage::Select] {
        assert_eq!(runner.run(stage).unwrap(), StageStatus::Cached, "{stage}");
    }
    let mut forced = Runner::new(load(&config, &out), true);
    assert_eq!(forced.run(Stage::Select).unwrap(), StageStatus::Ran);

    // an edited dataset invalidates everything downstream of it
    let eng = data.path().join("data/ENG.tsv");
    let mut text = fs::read_to_string(&eng).unwrap();
    text.push_str("extra-1\tone more plain comment\tNONE\n");
    fs::write(&eng, text).unwrap();
    let mut runner = Runner::new(load(&config, &out), false);
    assert_eq!(runner.run(Stage::Stats).unwrap(), StageStatus::Ran);
    assert_eq!(runner.run(Stage::Train).unwrap(), StageStatus::Ran);
}

#[test]
fn evaluate_and_select_can_be_rerun_in_isolation() {
    let data = tempfile::tempdir().unwrap();
    let config = write_fixture(data.path(), &small_fixture(), 13, ExperimentConfig::default());
    let out = data.path().join("out");
    run_all(&config, &out);
    let before = read_tree(&out);

    fs::remove_dir_all(out.join("reports/cells")).unwrap();
    for f in ["reports/grid.json", "reports/grid.txt", "reports/selection.json"] {
        fs::remove_file(out.join(f)).unwrap();
    }
    let mut runner = Runner::new(load(&config, &out), false);
    assert_eq!(runner.run(Stage::Train).unwrap(), StageStatus::Cached);
    assert_eq!(runner.run(Stage::Evaluate).unwrap(), StageStatus::Ran);
    assert_eq!(runner.run(Stage::Select).unwrap(), StageStatus::Ran);
    assert_eq!(tree_diff(&before, &read_tree(&out)), Vec::<String>::new());
}

#[test]
fn failed_stage_leaves_no_partial_outputs() {
    let data = tempfile::tempdir().unwrap();
    let config = write_fixture(data.path(), &small_fixture(), 14, ExperimentConfig::default());
    let out = data.path().join("out");
    Runner::new(load(&config, &out), false).run(Stage::Stats).unwrap();
    // mining writes its language profiles before it reads the stream
    fs::remove_file(data.path().join("stream.txt")).unwrap();
    fs::create_dir(data.path().join("stream.txt")).unwrap();

    let err = Runner::new(load(&config, &out), false).run(Stage::Mine).unwrap_err();
    assert_eq!(err.exit_code(), 2, "{err}");
    assert!(err.to_string().starts_with("mine failed"), "{err}");
    assert!(!out.join("models/profiles").exists());
    assert!(!out.join("reports/mining.json").exists());
    assert!(!out.join(".staging").exists());
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert!(manifest["stages"].get("stats").is_some());
    assert!(manifest["stages"].get("mine").is_none());
}

#[test]
fn restricted_variants_shrink_the_grid() {
    let data = tempfile::tempdir().unwrap();
    let experiment = ExperimentConfig {
        variants: vec![Provenance::Baseline],
        ..Default::default()
    };
    let config = write_fixture(data.path(), &small_fixture(), 15, experiment);
    let out = data.path().join("out");
    run_all(&config, &out);

    let grid: SelectionGrid = serde_json::from_slice(&fs::read(out.join("reports/grid.json")).unwrap()).unwrap();
    assert_eq!(grid.cells.len(), 2 * LanguageCondition::ALL.len());
    for lang in LanguageCondition::ALL {
        for scope in Scope::ALL {
            assert!(grid.score(&CellKey::new(Provenance::Baseline, scope, lang)).is_some(), "{lang} {scope}");
        }
    }
    assert!(!out.join("corpora/synthetic.train.txt").exists());
    assert!(!out.join("corpora/organic.train.txt").exists());
    let selection: SelectionReport = serde_json::from_slice(&fs::read(out.join("reports/selection.json")).unwrap()).unwrap();
    assert_eq!(selection.selection.nominated.0, Provenance::Baseline);
    assert!(out.join(&selection.nominated_models[0]).exists());
}

#[test]
fn single_language_statistics() {
    let data = tempfile::tempdir().unwrap();
    let experiment = ExperimentConfig {
        languages: vec![LanguageCondition::Tam],
        ..Default::default()
    };
    let config = write_fixture(data.path(), &small_fixture(), 16, experiment);
    let out = data.path().join("out");
    Runner::new(load(&config, &out), false).run(Stage::Stats).unwrap();

    let rows: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("reports/class_distribution.json")).unwrap()).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["language"], "TAM");
    let sum: f64 = rows[0]["proportions"].as_object().unwrap().values().map(|v| v.as_f64().unwrap()).sum();
    assert!((sum - 1.0).abs() <= 0.01, "{sum}");

    for table in ["class_distribution.txt", "corpus_summary.txt", "script_mix.txt"] {
        let text = fs::read_to_string(out.join("reports").join(table)).unwrap();
        let widths: Vec<usize> = text.lines().map(|l| l.chars().count()).collect();
        assert_eq!(widths.len(), 2, "{table}:\n{text}");
        assert_eq!(widths[0], widths[1], "{table} columns misaligned:\n{text}");
        assert!(text.lines().nth(1).unwrap().starts_with("TAM"));
    }
    assert!(!out.join("models").exists());
}
