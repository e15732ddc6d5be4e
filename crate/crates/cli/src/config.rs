//! Experiment configuration: one TOML document, optionally overridden by
//! command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use scriptswitch::eval::Scope;
use scriptswitch::langid::{MiningParams, DEFAULT_PROFILE_SIZE, MIN_DETECT_TEXT};
use scriptswitch::{LanguageCondition, Provenance, TrainConfig};

use crate::error::{CliError, CliResult};

/// Default data directory when the config does not name one.
pub const DATA_DIR_ENV: &str = "SCRIPTSWITCH_DATA_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LangidConfig {
    pub profile_size: usize,
    pub min_margin: f64,
    pub min_length: usize,
    pub max_docs_per_language: Option<usize>,
}

impl Default for LangidConfig {
    fn default() -> Self {
        LangidConfig {
            profile_size: DEFAULT_PROFILE_SIZE,
            min_margin: 0.0,
            min_length: MIN_DETECT_TEXT,
            max_docs_per_language: None,
        }
    }
}

impl LangidConfig {
    pub fn mining_params(&self) -> MiningParams {
        MiningParams {
            min_margin: self.min_margin,
            min_length: self.min_length,
            max_docs: self.max_docs_per_language.unwrap_or(usize::MAX),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub output_dir: PathBuf,
    pub data_dir: Option<PathBuf>,
    /// Empty means all ten conditions.
    pub languages: Vec<LanguageCondition>,
    pub variants: Vec<Provenance>,
    pub scopes: Vec<Scope>,
    /// Per-language dataset paths, relative to the data directory. Defaults
    /// to `data/<LANG>.tsv`.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub datasets: BTreeMap<String, PathBuf>,
    /// Per-language abstract corpora. Defaults to `abstracts/<LANG>.txt`
    /// when that file exists.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub abstracts: BTreeMap<String, PathBuf>,
    /// Defaults to `stream.txt`.
    pub organic_stream: Option<PathBuf>,
    pub split_ratios: [f64; 3],
    pub sample_fraction: f64,
    pub vocabulary_size: usize,
    pub langid: LangidConfig,
    /// `training.seed` must stay unset: every classifier gets its own seed
    /// derived from `seed` and the model name.
    pub training: TrainConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: None,
            output_dir: PathBuf::from("out"),
            data_dir: None,
            languages: Vec::new(),
            variants: Provenance::ALL.to_vec(),
            scopes: Scope::ALL.to_vec(),
            datasets: BTreeMap::new(),
            abstracts: BTreeMap::new(),
            organic_stream: None,
            split_ratios: [0.8, 0.1, 0.1],
            sample_fraction: 0.5,
            vocabulary_size: 50_000,
            langid: LangidConfig::default(),
            training: TrainConfig::default(),
        }
    }
}

/// Command-line values that replace config-file fields when present.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub data_dir: Option<PathBuf>,
    pub languages: Option<Vec<LanguageCondition>>,
    pub variants: Option<Vec<Provenance>>,
    pub scopes: Option<Vec<Scope>>,
    pub sample_fraction: Option<f64>,
    pub vocabulary_size: Option<usize>,
    pub epochs: Option<usize>,
}

const STAGE: &str = "config";

impl ExperimentConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::config(STAGE, e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        let mut value = toml::Value::try_from(self).expect("config serializes");
        if let Some(training) = value.get_mut("training").and_then(toml::Value::as_table_mut) {
            training.remove("seed");
        }
        toml::to_string_pretty(&value).expect("config serializes")
    }

    fn validate(&self) -> CliResult<()> {
        let bad = |msg: String| Err(CliError::config(STAGE, msg));
        if self.seed.is_none() {
            return bad("`seed` is mandatory".into());
        }
        let sum: f64 = self.split_ratios.iter().sum();
        if self.split_ratios.iter().any(|r| *r < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return bad(format!("split_ratios must be non-negative and sum to 1, got {:?}", self.split_ratios));
        }
        if !(0.0..=1.0).contains(&self.sample_fraction) {
            return bad(format!("sample_fraction must lie in [0, 1], got {}", self.sample_fraction));
        }
        if self.vocabulary_size == 0 {
            return bad("vocabulary_size must be positive".into());
        }
        if self.variants.is_empty() || self.scopes.is_empty() {
            return bad("at least one variant and one scope must be enabled".into());
        }
        if self.langid.profile_size == 0 {
            return bad("langid.profile_size must be positive".into());
        }
        for key in self.datasets.keys().chain(self.abstracts.keys()) {
            if key.parse::<LanguageCondition>().is_err() {
                return bad(format!("unknown language {key:?}"));
            }
        }
        if self.training.seed != 0 {
            return bad("training.seed is not configurable; per-model seeds derive from `seed`".into());
        }
        self.training.validate().map_err(|e| CliError::config(STAGE, e.to_string()))
    }
}

/// A validated configuration with every path resolved.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub data_dir: PathBuf,
    pub output_dir: PathBuf,
    pub languages: Vec<LanguageCondition>,
    pub variants: Vec<Provenance>,
    pub scopes: Vec<Scope>,
    pub datasets: BTreeMap<LanguageCondition, PathBuf>,
    pub abstracts: BTreeMap<LanguageCondition, PathBuf>,
    pub stream: Option<PathBuf>,
}

fn sorted_unique<T: Ord + Copy>(items: &[T]) -> Vec<T> {
    let mut v = items.to_vec();
    v.sort();
    v.dedup();
    v
}

impl Experiment {
    /// Loads `path`, applies `overrides` and resolves relative paths against
    /// the config file's directory.
    pub fn load(path: &Path, overrides: &Overrides) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(STAGE, format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_config(ExperimentConfig::parse(&text)?, &base, overrides)
    }

    pub fn from_config(mut config: ExperimentConfig, base: &Path, overrides: &Overrides) -> CliResult<Self> {
        let o = overrides.clone();
        if o.seed.is_some() {
            config.seed = o.seed;
        }
        if let Some(v) = o.languages {
            config.languages = v;
        }
        if let Some(v) = o.variants {
            config.variants = v;
        }
        if let Some(v) = o.scopes {
            config.scopes = v;
        }
        if let Some(v) = o.sample_fraction {
            config.sample_fraction = v;
        }
        if let Some(v) = o.vocabulary_size {
            config.vocabulary_size = v;
        }
        if let Some(v) = o.epochs {
            config.training.epochs = v;
        }
        config.validate()?;

        let output_dir = match o.output_dir {
            Some(dir) => dir,
            None => base.join(&config.output_dir),
        };
        let data_dir = match (o.data_dir, &config.data_dir, std::env::var_os(DATA_DIR_ENV)) {
            (Some(dir), _, _) => dir,
            (None, Some(dir), _) => base.join(dir),
            (None, None, Some(env)) => PathBuf::from(env),
            (None, None, None) => base.to_path_buf(),
        };
        let languages = if config.languages.is_empty() {
            LanguageCondition::ALL.to_vec()
        } else {
            sorted_unique(&config.languages)
        };
        let lookup = |map: &BTreeMap<String, PathBuf>, lang: LanguageCondition| {
            map.iter()
                .find(|(k, _)| k.parse::<LanguageCondition>().ok() == Some(lang))
                .map(|(_, p)| data_dir.join(p))
        };
        let mut datasets = BTreeMap::new();
        let mut abstracts = BTreeMap::new();
        for &lang in &languages {
            let dataset = lookup(&config.datasets, lang).unwrap_or_else(|| data_dir.join(format!("data/{lang}.tsv")));
            datasets.insert(lang, dataset);
            match lookup(&config.abstracts, lang) {
                Some(p) => {
                    abstracts.insert(lang, p);
                }
                None => {
                    let p = data_dir.join(format!("abstracts/{lang}.txt"));
                    if p.exists() {
                        abstracts.insert(lang, p);
                    }
                }
            }
        }
        let stream = match &config.organic_stream {
            Some(p) => Some(data_dir.join(p)),
            None => Some(data_dir.join("stream.txt")).filter(|p| p.exists()),
        };
        Ok(Experiment {
            seed: config.seed.expect("validated"),
            variants: sorted_unique(&config.variants),
            scopes: sorted_unique(&config.scopes),
            config,
            data_dir,
            output_dir,
            languages,
            datasets,
            abstracts,
            stream,
        })
    }

    /// Path as recorded in reports: relative to the data directory when
    /// possible, so outputs do not depend on where the data lives.
    pub fn display_path(&self, path: &Path) -> String {
        path.strip_prefix(&self.data_dir)
            .unwrap_or(path)
            .to_string_lossy()
            .replace('\\', "/")
    }

    /// The effective configuration as recorded in the manifest; the output
    /// and data locations are left out.
    pub fn recorded_config(&self) -> serde_json::Value {
        let mut c = self.config.clone();
        c.output_dir = PathBuf::new();
        c.data_dir = None;
        c.languages = self.languages.clone();
        c.variants = self.variants.clone();
        c.scopes = self.scopes.clone();
        c.datasets = self
            .datasets
            .iter()
            .map(|(l, p)| (l.to_string(), PathBuf::from(self.display_path(p))))
            .collect();
        c.abstracts = self
            .abstracts
            .iter()
            .map(|(l, p)| (l.to_string(), PathBuf::from(self.display_path(p))))
            .collect();
        c.organic_stream = self.stream.as_ref().map(|p| PathBuf::from(self.display_path(p)));
        serde_json::to_value(&c).expect("config serializes")
    }
}
