#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use scriptswitch::fixtures::{self, FixtureConfig};
use scriptswitch_cli::{Experiment, ExperimentConfig, Overrides};

/// Ten languages at a few percent of the shared-task sizes; a full run takes
/// a few seconds.
pub fn small_fixture() -> FixtureConfig {
    FixtureConfig {
        scale: 0.05,
        abstracts_per_language: 300,
        stream_size: 3000,
        heldout_per_language: 0,
        ..Default::default()
    }
}

/// Writes a generated bundle plus `experiment.toml` into `dir`.
pub fn write_fixture(dir: &Path, config: &FixtureConfig, seed: u64, experiment: ExperimentConfig) -> PathBuf {
    fixtures::generate(config, seed).unwrap().write(dir).unwrap();
    let path = dir.join("experiment.toml");
    let experiment = ExperimentConfig {
        seed: Some(seed),
        ..experiment
    };
    fs::write(&path, experiment.to_toml()).unwrap();
    path
}

pub fn load(config: &Path, output: &Path) -> Experiment {
    let overrides = Overrides {
        output_dir: Some(output.to_path_buf()),
        ..Default::default()
    };
    Experiment::load(config, &overrides).unwrap()
}

/// Every file below `dir`, keyed by `/`-separated relative path.
pub fn read_tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

/// Paths whose contents differ, plus paths present on only one side.
pub fn tree_diff(a: &BTreeMap<String, Vec<u8>>, b: &BTreeMap<String, Vec<u8>>) -> Vec<String> {
    let mut keys: Vec<&String> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter().filter(|k| a.get(*k) != b.get(*k)).cloned().collect()
}
