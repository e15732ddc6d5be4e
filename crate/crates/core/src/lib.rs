//! Script-switch aware homophobia/transphobia detection: corpus statistics,
//! transliteration-based augmentation, n-gram language identification,
//! linear classifiers and model selection.

pub mod adaptation;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod fixtures;
pub mod io;
pub mod langid;
pub mod model;
pub mod script;
pub mod seed;
pub mod translit;

pub use adaptation::{AdaptationCorpus, Partition, Provenance};
pub use corpus::{Label, LabeledExample, LanguageCondition, LanguageFamily};
pub use error::{Error, Result};
pub use eval::{CellKey, EvaluationReport, Scope, SelectionGrid};
pub use model::{ClassifierModel, FeatureModel, TrainConfig};
pub use script::ScriptClass;
