//! The experiment stages and their on-disk contract.
//!
//! ```text
//! <output>/
//!   manifest.json
//!   reports/   corpus_summary, class_distribution, script_mix, splits,
//!              mining, cells/<VARIANT>-<SCOPE>-<LANG>.json, grid, selection
//!   corpora/   baseline, synthetic, organic (train/eval text + manifest)
//!   models/    profiles/, features/, classifiers/, nominated/
//! ```
//!
//! Every stage pulls in its upstream stages first. A stage whose
//! fingerprint (config, input hashes, upstream fingerprints) matches the
//! manifest and whose outputs are unchanged on disk is not re-run.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use scriptswitch::corpus::{
    corpus_summary, distribution_table, load_dataset, render_distribution_table, resample_splits, DatasetSplit,
};
use scriptswitch::eval::{evaluate, render_grid, select_best, CellKey, ReportMetadata, Scope, SelectionGrid};
use scriptswitch::io::read_documents;
use scriptswitch::langid::{build_profile, mine_organic_multi, Detector};
use scriptswitch::model::{fit_feature_model, train_classifier, ClassifierModel, FeatureModel};
use scriptswitch::script::script_switch_summary;
use scriptswitch::seed::derive_seed;
use scriptswitch::translit::synthesize_augmented_corpus;
use scriptswitch::{AdaptationCorpus, LabeledExample, LanguageCondition, Provenance};

use crate::config::Experiment;
use crate::error::{CliError, CliResult, Context, ErrorKind};
use crate::output::{hash_file, sha256_hex, to_compact_json, to_json, Manifest, StageRecord, StageWriter};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Stats,
    Augment,
    Mine,
    Adapt,
    Train,
    Evaluate,
    Select,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Stats => "stats",
            Stage::Augment => "augment",
            Stage::Mine => "mine",
            Stage::Adapt => "adapt",
            Stage::Train => "train",
            Stage::Evaluate => "evaluate",
            Stage::Select => "select",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageStatus {
    Ran,
    Cached,
}

/// `<VARIANT>-MONO-<LANG>` or `<VARIANT>-MULTI`.
pub fn model_name(variant: Provenance, scope: Scope, language: LanguageCondition) -> String {
    match scope {
        Scope::Mono => format!("{variant}-MONO-{language}"),
        Scope::Multi => format!("{variant}-MULTI"),
    }
}

pub fn model_path(variant: Provenance, scope: Scope, language: LanguageCondition) -> String {
    format!("models/classifiers/{}.json", model_name(variant, scope, language))
}

pub fn cell_report_path(key: &CellKey) -> String {
    format!("reports/cells/{}-{}-{}.json", key.variant, key.scope, key.language)
}

fn features_path(variant: Provenance) -> String {
    format!("models/features/{}.json", variant.code().to_ascii_lowercase())
}

fn corpus_stem(variant: Provenance) -> String {
    variant.code().to_ascii_lowercase()
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SelectionReport {
    pub selection: scriptswitch::eval::Selection,
    pub nominated_models: Vec<String>,
}

pub struct Runner {
    pub exp: Experiment,
    pub manifest: Manifest,
    pub force: bool,
    datasets: Option<BTreeMap<LanguageCondition, Vec<LabeledExample>>>,
    splits: Option<BTreeMap<LanguageCondition, DatasetSplit>>,
    done: Vec<Stage>,
}

impl Runner {
    pub fn new(exp: Experiment, force: bool) -> Self {
        let mut manifest = Manifest::new(exp.recorded_config());
        if let Some(previous) = Manifest::read(&exp.output_dir) {
            if previous.config_sha256 == manifest.config_sha256 {
                manifest.seeds = previous.seeds;
            }
            manifest.stages = previous.stages;
        }
        manifest.seeds.insert("root".into(), exp.seed);
        Runner {
            exp,
            manifest,
            force,
            datasets: None,
            splits: None,
            done: Vec::new(),
        }
    }

    fn upstream(&self, stage: Stage) -> Vec<Stage> {
        match stage {
            Stage::Stats | Stage::Augment | Stage::Mine => vec![],
            Stage::Adapt => {
                let mut v = Vec::new();
                if self.exp.variants.contains(&Provenance::Synthetic) {
                    v.push(Stage::Augment);
                }
                if self.exp.variants.contains(&Provenance::Organic) {
                    v.push(Stage::Mine);
                }
                v
            }
            Stage::Train => vec![Stage::Adapt],
            Stage::Evaluate => vec![Stage::Train],
            Stage::Select => vec![Stage::Evaluate],
        }
    }

    fn input_files(&self, stage: Stage) -> Vec<std::path::PathBuf> {
        let datasets = self.exp.datasets.values().cloned();
        let abstracts = self.exp.abstracts.values().cloned();
        match stage {
            Stage::Stats | Stage::Adapt | Stage::Train | Stage::Evaluate => datasets.collect(),
            Stage::Augment => datasets.chain(abstracts).collect(),
            Stage::Mine => datasets.chain(self.exp.stream.clone()).collect(),
            Stage::Select => vec![],
        }
    }

    fn fingerprint(&mut self, stage: Stage) -> CliResult<String> {
        let mut inputs = BTreeMap::new();
        for path in self.input_files(stage) {
            let key = self.exp.display_path(&path);
            let hash = match self.manifest.inputs.get(&key) {
                Some(h) => h.clone(),
                None => {
                    let h = hash_file(&path).map_err(|e| missing_input(stage, &self.exp, &path, e))?;
                    self.manifest.inputs.insert(key.clone(), h.clone());
                    h
                }
            };
            inputs.insert(key, hash);
        }
        let upstream: BTreeMap<&str, String> = self
            .upstream(stage)
            .into_iter()
            .map(|s| {
                let fp = self.manifest.stages.get(s.name()).map(|r| r.fingerprint.clone()).unwrap_or_default();
                (s.name(), fp)
            })
            .collect();
        let material = json!({
            "stage": stage.name(),
            "config": self.manifest.config_sha256,
            "tool": self.manifest.tool_version,
            "inputs": inputs,
            "upstream": upstream,
        });
        Ok(sha256_hex(&to_json(&material)))
    }

    /// Runs `stage` (and whatever it depends on) unless it is up to date.
    pub fn run(&mut self, stage: Stage) -> CliResult<StageStatus> {
        for up in self.upstream(stage) {
            if !self.done.contains(&up) {
                self.run_inner(up, false)?;
            }
        }
        self.run_inner(stage, self.force)
    }

    /// Every stage: statistics, then the full modelling chain.
    pub fn run_all(&mut self) -> CliResult<()> {
        self.run(Stage::Stats)?;
        self.run(Stage::Select)?;
        Ok(())
    }

    fn run_inner(&mut self, stage: Stage, force: bool) -> CliResult<StageStatus> {
        for up in self.upstream(stage) {
            if !self.done.contains(&up) {
                self.run_inner(up, false)?;
            }
        }
        let fingerprint = self.fingerprint(stage)?;
        if !force && self.manifest.is_fresh(&self.exp.output_dir, stage.name(), &fingerprint) {
            log::info!("{stage}: up to date");
            self.done.push(stage);
            return Ok(StageStatus::Cached);
        }
        log::info!("{stage}: running");
        self.manifest.stages.remove(stage.name());
        let mut writer = StageWriter::new(&self.exp.output_dir, stage.name())?;
        let result = match stage {
            Stage::Stats => self.stats(&mut writer),
            Stage::Augment => self.augment(&mut writer),
            Stage::Mine => self.mine(&mut writer),
            Stage::Adapt => self.adapt(&mut writer),
            Stage::Train => self.train(&mut writer),
            Stage::Evaluate => self.evaluate(&mut writer),
            Stage::Select => self.select(&mut writer),
        };
        let summary = match result {
            Ok(summary) => summary,
            Err(e) => {
                drop(writer);
                self.manifest.write(&self.exp.output_dir)?;
                return Err(e);
            }
        };
        let outputs = writer.commit()?;
        self.manifest.stages.insert(
            stage.name().to_string(),
            StageRecord {
                fingerprint,
                summary,
                outputs,
            },
        );
        self.manifest.write(&self.exp.output_dir)?;
        self.done.push(stage);
        Ok(StageStatus::Ran)
    }

    fn datasets(&mut self, stage: &'static str) -> CliResult<&BTreeMap<LanguageCondition, Vec<LabeledExample>>> {
        if self.datasets.is_none() {
            let loaded: CliResult<BTreeMap<_, _>> = self
                .exp
                .datasets
                .par_iter()
                .map(|(&lang, path)| {
                    if !path.exists() {
                        return Err(CliError::data(
                            stage,
                            format!("no dataset for {lang}: {} does not exist", path.display()),
                        ));
                    }
                    load_dataset(path, lang)
                        .map(|d| (lang, d))
                        .map_err(|e| CliError::data(stage, format!("{lang}: {e}")))
                })
                .collect();
            self.datasets = Some(loaded?);
        }
        Ok(self.datasets.as_ref().expect("loaded"))
    }

    fn splits(&mut self, stage: &'static str) -> CliResult<&BTreeMap<LanguageCondition, DatasetSplit>> {
        if self.splits.is_none() {
            let ratios = self.exp.config.split_ratios;
            let root = self.exp.seed;
            let mut seeds = BTreeMap::new();
            let mut splits = BTreeMap::new();
            for (&lang, examples) in self.datasets(stage)? {
                let seed = derive_seed(root, &format!("split/{lang}"));
                seeds.insert(format!("split/{lang}"), seed);
                let split = resample_splits(examples, ratios, seed).map_err(|e| CliError::data(stage, format!("{lang}: {e}")))?;
                splits.insert(lang, split);
            }
            self.manifest.seeds.extend(seeds);
            self.splits = Some(splits);
        }
        Ok(self.splits.as_ref().expect("split"))
    }

    fn labelled_train(&mut self, stage: &'static str) -> CliResult<Vec<LabeledExample>> {
        Ok(self.splits(stage)?.values().flat_map(|s| s.train.iter().cloned()).collect())
    }

    fn stats(&mut self, w: &mut StageWriter) -> CliResult<serde_json::Value> {
        const S: &str = "stats";
        let datasets = self.datasets(S)?.clone();
        let summary = corpus_summary(&datasets);
        w.write("reports/corpus_summary.json", &to_json(&summary))?;
        w.write("reports/corpus_summary.txt", summary.render_table().as_bytes())?;
        let rows = distribution_table(&datasets).ctx(ErrorKind::Data, S)?;
        w.write("reports/class_distribution.json", &to_json(&rows))?;
        w.write("reports/class_distribution.txt", render_distribution_table(&rows).as_bytes())?;
        let all: Vec<LabeledExample> = datasets.values().flatten().cloned().collect();
        let mix = script_switch_summary(&all);
        for warning in &mix.warnings {
            log::warn!("{}: {}", warning.language, warning.message);
        }
        w.write("reports/script_mix.json", &to_json(&mix))?;
        w.write("reports/script_mix.txt", mix.render_table().as_bytes())?;
        let sizes: BTreeMap<String, serde_json::Value> = self
            .splits(S)?
            .iter()
            .map(|(l, s)| {
                let (train, validation, test) = s.sizes();
                (l.to_string(), json!({"train": train, "validation": validation, "test": test, "seed": s.seed}))
            })
            .collect();
        w.write("reports/splits.json", &to_json(&sizes))?;
        Ok(json!({ "languages": datasets.len(), "examples": all.len() }))
    }

    fn read_abstracts(&self, stage: &'static str) -> CliResult<BTreeMap<LanguageCondition, Vec<String>>> {
        self.exp
            .abstracts
            .par_iter()
            .map(|(&lang, path)| {
                read_documents(path)
                    .map(|docs| (lang, docs))
                    .map_err(|e| CliError::data(stage, format!("{lang} abstracts: {e}")))
            })
            .collect()
    }

    fn save_corpus(w: &mut StageWriter, corpus: &AdaptationCorpus, extra: serde_json::Value, stage: &'static str) -> CliResult<()> {
        let stem = corpus_stem(corpus.provenance);
        corpus.save(&w.staging_path("corpora"), &stem, extra).ctx(ErrorKind::Data, stage)?;
        for suffix in ["train.txt", "eval.txt", "manifest.json"] {
            w.adopt(&format!("corpora/{stem}.{suffix}"))?;
        }
        Ok(())
    }

    fn augment(&mut self, w: &mut StageWriter) -> CliResult<serde_json::Value> {
        const S: &str = "augment";
        if !self.exp.variants.contains(&Provenance::Synthetic) {
            return Ok(json!("synthetic variant disabled"));
        }
        let abstracts = self.read_abstracts(S)?;
        for lang in &self.exp.languages {
            if !abstracts.contains_key(lang) {
                log::warn!("{S}: no abstracts for {lang}");
            }
        }
        let train = self.labelled_train(S)?;
        let seed = derive_seed(self.exp.seed, "synthetic");
        self.manifest.seeds.insert("synthetic".into(), seed);
        let corpus = synthesize_augmented_corpus(&abstracts, &train, self.exp.config.sample_fraction, seed)
            .ctx(ErrorKind::Data, S)?;
        let extra = json!({
            "sample_fraction": self.exp.config.sample_fraction,
            "seed": seed,
            "abstracts": abstracts.iter().map(|(l, d)| (l.to_string(), d.len())).collect::<BTreeMap<_, _>>(),
        });
        Self::save_corpus(w, &corpus, extra, S)?;
        let (train_n, eval_n) = corpus.partition_sizes();
        Ok(json!({ "documents": corpus.len(), "train": train_n, "eval": eval_n, "sources": corpus.source_counts() }))
    }

    fn mine(&mut self, w: &mut StageWriter) -> CliResult<serde_json::Value> {
        const S: &str = "mine";
        if !self.exp.variants.contains(&Provenance::Organic) {
            return Ok(json!("organic variant disabled"));
        }
        let stream_path = self
            .exp
            .stream
            .clone()
            .ok_or_else(|| CliError::config(S, "the organic variant needs `organic_stream`"))?;
        let k = self.exp.config.langid.profile_size;
        let splits = self.splits(S)?.clone();
        let profiles = splits
            .par_iter()
            .map(|(&lang, split)| {
                build_profile(split.train.iter().map(|e| e.text.as_str()), lang, k)
                    .map_err(|e| CliError::data(S, format!("{lang} profile: {e}")))
            })
            .collect::<CliResult<Vec<_>>>()?;
        for p in &profiles {
            w.write(&format!("models/profiles/{}.profile", p.language), p.to_text().as_bytes())?;
        }
        let detector = Detector::new(profiles).ctx(ErrorKind::Data, S)?;
        let targets: Vec<LanguageCondition> = splits.keys().copied().filter(|l| !l.is_latin_native()).collect();
        let stream = read_documents(&stream_path).ctx(ErrorKind::Data, S)?;
        let mined = mine_organic_multi(stream, &targets, &detector, self.exp.config.langid.mining_params());
        let mut corpus = mined.corpus;
        corpus.extend_labelled(&self.labelled_train(S)?);
        w.write("reports/mining.json", &to_json(&mined.stats))?;
        let extra = json!({ "targets": targets, "mining": mined.stats });
        Self::save_corpus(w, &corpus, extra, S)?;
        Ok(json!({ "retained": mined.stats.retained, "examined": mined.stats.examined, "documents": corpus.len() }))
    }

    fn adapt(&mut self, w: &mut StageWriter) -> CliResult<serde_json::Value> {
        const S: &str = "adapt";
        let mut summary = BTreeMap::new();
        for variant in self.exp.variants.clone() {
            let corpus = match variant {
                Provenance::Baseline => {
                    let seed = derive_seed(self.exp.seed, "partition/baseline");
                    self.manifest.seeds.insert("partition/baseline".into(), seed);
                    let corpus = AdaptationCorpus::from_labelled(&self.labelled_train(S)?, seed);
                    Self::save_corpus(w, &corpus, json!({ "seed": seed }), S)?;
                    corpus
                }
                _ => AdaptationCorpus::load(&self.exp.output_dir.join("corpora"), &corpus_stem(variant))
                    .ctx(ErrorKind::Data, S)?,
            };
            let fm = fit_feature_model(&corpus, self.exp.config.vocabulary_size).ctx(ErrorKind::Training, S)?;
            w.write(&features_path(variant), &to_compact_json(&fm))?;
            summary.insert(variant.to_string(), json!({ "dim": fm.dim(), "documents": fm.documents, "version": fm.version }));
        }
        Ok(json!(summary))
    }

    fn load_features(&self, variant: Provenance, stage: &'static str) -> CliResult<FeatureModel> {
        let path = self.exp.output_dir.join(features_path(variant));
        let raw = std::fs::read(&path).map_err(|e| CliError::data(stage, format!("{}: {e}", path.display())))?;
        let fm: FeatureModel = serde_json::from_slice(&raw).ctx(ErrorKind::Data, stage)?;
        fm.validate().ctx(ErrorKind::Data, stage)?;
        Ok(fm)
    }

    fn cells(&self) -> Vec<CellKey> {
        let mut cells = Vec::new();
        for &variant in &self.exp.variants {
            for &scope in &self.exp.scopes {
                for &language in &self.exp.languages {
                    cells.push(CellKey::new(variant, scope, language));
                }
            }
        }
        cells
    }

    fn train(&mut self, w: &mut StageWriter) -> CliResult<serde_json::Value> {
        const S: &str = "train";
        let splits = self.splits(S)?.clone();
        let combined = DatasetSplit {
            train: splits.values().flat_map(|s| s.train.iter().cloned()).collect(),
            validation: splits.values().flat_map(|s| s.validation.iter().cloned()).collect(),
            test: splits.values().flat_map(|s| s.test.iter().cloned()).collect(),
            seed: self.exp.seed,
            ratios: self.exp.config.split_ratios,
        };
        let mut tasks: Vec<(String, Provenance, Option<LanguageCondition>)> = Vec::new();
        for &variant in &self.exp.variants {
            for &scope in &self.exp.scopes {
                match scope {
                    Scope::Mono => {
                        for &lang in &self.exp.languages {
                            tasks.push((model_name(variant, scope, lang), variant, Some(lang)));
                        }
                    }
                    Scope::Multi => tasks.push((model_name(variant, scope, LanguageCondition::Eng), variant, None)),
                }
            }
        }
        let features: BTreeMap<Provenance, FeatureModel> = self
            .exp
            .variants
            .iter()
            .map(|&v| Ok((v, self.load_features(v, S)?)))
            .collect::<CliResult<_>>()?;
        let root = self.exp.seed;
        let base = self.exp.config.training.clone();
        let trained: Vec<(String, u64, CliResult<ClassifierModel>)> = tasks
            .par_iter()
            .map(|(name, variant, lang)| {
                let seed = derive_seed(root, &format!("train/{name}"));
                let mut config = base.clone();
                config.seed = seed;
                let split = match lang {
                    Some(l) => &splits[l],
                    None => &combined,
                };
                let model = train_classifier(split, &features[variant], &config)
                    .map_err(|e| CliError::new(ErrorKind::Training, S, format!("{name}: {e}")));
                (name.clone(), seed, model)
            })
            .collect();
        let mut summary = BTreeMap::new();
        let mut warned = Vec::new();
        for (name, seed, model) in trained {
            let model = model?;
            self.manifest.seeds.insert(format!("train/{name}"), seed);
            for warning in &model.warnings {
                log::debug!("{name}: {warning}");
            }
            if let Some(first) = model.warnings.first() {
                warned.push((name.clone(), first.clone()));
            }
            let best = model.training_log.iter().find(|r| r.step == model.best_step).map(|r| r.eval_loss);
            summary.insert(name.clone(), json!({ "best_step": model.best_step, "eval_loss": best, "warnings": model.warnings }));
            w.write(&format!("models/classifiers/{name}.json"), &to_compact_json(&model))?;
        }
        match warned.as_slice() {
            [] => {}
            [(name, warning)] => log::warn!("{name}: {warning}"),
            [(name, warning), rest @ ..] => {
                log::warn!("{name}: {warning} (and {} more models with warnings; see the manifest)", rest.len())
            }
        }
        Ok(json!(summary))
    }

    fn evaluate(&mut self, w: &mut StageWriter) -> CliResult<serde_json::Value> {
        const S: &str = "evaluate";
        let splits = self.splits(S)?.clone();
        let cells = self.cells();
        let mut needed: Vec<String> = cells.iter().map(|c| model_path(c.variant, c.scope, c.language)).collect();
        needed.sort();
        needed.dedup();
        let models: BTreeMap<String, ClassifierModel> = needed
            .par_iter()
            .map(|rel| {
                ClassifierModel::load(&self.exp.output_dir.join(rel))
                    .map(|m| (rel.clone(), m))
                    .map_err(|e| CliError::data(S, format!("{rel}: {e}")))
            })
            .collect::<CliResult<_>>()?;
        let reports = cells
            .par_iter()
            .map(|key| {
                let model = &models[&model_path(key.variant, key.scope, key.language)];
                let test = &splits[&key.language].test;
                let gold: Vec<_> = test.iter().map(|e| e.label).collect();
                let predicted: Vec<_> = test.iter().map(|e| model.predict(&e.text).label).collect();
                let metadata = ReportMetadata {
                    language: Some(key.language),
                    variant: Some(key.variant),
                    scope: Some(key.scope),
                    seed: Some(model.config.seed),
                    model_version: Some(format!("{};{}", model.format, model.feature_model.version)),
                };
                evaluate(&gold, &predicted, &model.labels, metadata)
                    .map(|r| (*key, r))
                    .map_err(|e| CliError::data(S, format!("{key}: {e}")))
            })
            .collect::<CliResult<Vec<_>>>()?;
        let mut grid = SelectionGrid::new();
        for (key, report) in reports {
            w.write(&cell_report_path(&key), &to_json(&report))?;
            grid.insert_report(key, report);
        }
        w.write("reports/grid.json", &to_json(&grid))?;
        Ok(json!({ "cells": grid.cells.len() }))
    }

    fn select(&mut self, w: &mut StageWriter) -> CliResult<serde_json::Value> {
        const S: &str = "select";
        let path = self.exp.output_dir.join("reports/grid.json");
        let raw = std::fs::read(&path).map_err(|e| CliError::data(S, format!("{}: {e}", path.display())))?;
        let grid: SelectionGrid = serde_json::from_slice(&raw).ctx(ErrorKind::Data, S)?;
        let selection = select_best(&grid).ctx(ErrorKind::Data, S)?;
        let (variant, scope) = selection.nominated;
        let mut nominated_models: Vec<String> = self
            .exp
            .languages
            .iter()
            .map(|&l| model_path(variant, scope, l))
            .collect();
        nominated_models.dedup();
        for rel in &nominated_models {
            let bytes = std::fs::read(self.exp.output_dir.join(rel)).map_err(|e| CliError::data(S, format!("{rel}: {e}")))?;
            let file = Path::new(rel).file_name().expect("model file name").to_string_lossy();
            w.write(&format!("models/nominated/{file}"), &bytes)?;
        }
        w.write("reports/grid.txt", render_grid(&grid, &selection).as_bytes())?;
        let summary = json!({ "nominated": format!("{variant}-{scope}"), "winners": selection.winners });
        w.write(
            "reports/selection.json",
            &to_json(&SelectionReport {
                selection,
                nominated_models,
            }),
        )?;
        Ok(summary)
    }
}

fn missing_input(stage: Stage, exp: &Experiment, path: &Path, e: std::io::Error) -> CliError {
    let lang = exp
        .datasets
        .iter()
        .find(|(_, p)| p.as_path() == path)
        .map(|(l, _)| format!("no dataset for {l}: "))
        .unwrap_or_default();
    CliError::data(stage.name(), format!("{lang}{}: {e}", path.display()))
}
