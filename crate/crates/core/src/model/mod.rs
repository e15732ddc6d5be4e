//! Feature models fitted on adaptation corpora and linear classifiers
//! trained on top of them with AdamW.

pub mod classifier;
pub mod features;
pub mod optim;

pub use classifier::{
    label_set_for, predict, train_classifier, train_classifier_with_labels, ClassifierModel, EvalRecord, LinearParams,
    Prediction, TrainConfig,
};
pub use features::{featurize, fit_feature_model, FeatureModel, SparseVector};
pub use optim::{adamw_step, AdamWParams, AdamWState};
