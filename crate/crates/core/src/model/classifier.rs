//! Multinomial logistic regression over sparse features, trained with
//! mini-batch AdamW and checkpoint selection on validation loss.

use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::{featurize, FeatureModel, SparseVector};
use super::optim::{adamw_step, AdamWParams, AdamWState};
use crate::corpus::{DatasetSplit, Label, LabeledExample};
use crate::error::{Error, Result};
use crate::{io, seed};

const CLASSIFIER_FORMAT: &str = "scriptswitch-classifier/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// Passes over the training part.
    pub epochs: usize,
    /// Validation loss is recorded every this many optimizer steps.
    pub eval_every: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub weight_decay: f64,
    pub seed: u64,
    /// Inverse-frequency class weights in the loss. Off unless asked for.
    pub class_weighted: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let opt = AdamWParams::default();
        TrainConfig {
            epochs: 4,
            eval_every: 500,
            batch_size: 32,
            learning_rate: opt.learning_rate,
            beta1: opt.beta1,
            beta2: opt.beta2,
            epsilon: opt.epsilon,
            weight_decay: opt.weight_decay,
            seed: 0,
            class_weighted: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(format!("train config: {msg}")));
        if self.epochs == 0 || self.eval_every == 0 || self.batch_size == 0 {
            return bad("epochs, eval_every and batch_size must be positive");
        }
        if !(self.learning_rate > 0.0 && self.epsilon > 0.0) {
            return bad("learning_rate and epsilon must be positive");
        }
        if !(self.beta1 > 0.0 && self.beta1 < 1.0 && self.beta2 > 0.0 && self.beta2 < 1.0) {
            return bad("beta1 and beta2 must lie in (0, 1)");
        }
        if !(self.weight_decay >= 0.0) {
            return bad("weight_decay must be non-negative");
        }
        Ok(())
    }

    pub fn optimizer(&self) -> AdamWParams {
        AdamWParams {
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
            weight_decay: self.weight_decay,
        }
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn log_sum_exp(logits: &[f64]) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln()
}

/// Weights (row-major, one row per label) followed by the bias, as one flat
/// parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearParams {
    pub n_labels: usize,
    pub dim: usize,
    pub values: Vec<f64>,
}

impl LinearParams {
    pub fn zeros(n_labels: usize, dim: usize) -> Self {
        LinearParams {
            n_labels,
            dim,
            values: vec![0.0; n_labels * dim + n_labels],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.values[..self.n_labels * self.dim]
    }

    pub fn bias(&self) -> &[f64] {
        &self.values[self.n_labels * self.dim..]
    }

    pub fn logits(&self, x: &SparseVector) -> Vec<f64> {
        logits(self.weights(), self.bias(), self.dim, x)
    }

    /// Weighted mean cross-entropy over the examples.
    pub fn loss(&self, xs: &[&SparseVector], ys: &[usize], sample_weights: Option<&[f64]>) -> f64 {
        let total: f64 = xs
            .iter()
            .zip(ys)
            .enumerate()
            .map(|(i, (x, &y))| {
                let z = self.logits(x);
                sample_weights.map_or(1.0, |w| w[i]) * (log_sum_exp(&z) - z[y])
            })
            .sum();
        total / xs.len() as f64
    }

    /// Loss and its gradient with respect to `values`.
    pub fn loss_and_gradient(&self, xs: &[&SparseVector], ys: &[usize], sample_weights: Option<&[f64]>) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; self.values.len()];
        let loss = self.accumulate_gradient(xs, ys, sample_weights, &mut grad);
        (loss, grad)
    }

    fn accumulate_gradient(
        &self,
        xs: &[&SparseVector],
        ys: &[usize],
        sample_weights: Option<&[f64]>,
        grad: &mut [f64],
    ) -> f64 {
        let n = xs.len() as f64;
        let bias_offset = self.n_labels * self.dim;
        let mut loss = 0.0;
        for (i, (x, &y)) in xs.iter().zip(ys).enumerate() {
            let sw = sample_weights.map_or(1.0, |w| w[i]);
            let z = self.logits(x);
            loss += sw * (log_sum_exp(&z) - z[y]);
            let p = softmax(&z);
            for (label, &pl) in p.iter().enumerate() {
                let delta = sw * (pl - if label == y { 1.0 } else { 0.0 }) / n;
                let row = label * self.dim;
                for &(j, w) in &x.entries {
                    grad[row + j as usize] += delta * w;
                }
                grad[bias_offset + label] += delta;
            }
        }
        loss / n
    }
}

fn logits(weights: &[f64], bias: &[f64], dim: usize, x: &SparseVector) -> Vec<f64> {
    bias.iter()
        .enumerate()
        .map(|(label, &b)| {
            let row = &weights[label * dim..(label + 1) * dim];
            b + x.entries.iter().map(|&(j, w)| row[j as usize] * w).sum::<f64>()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub step: usize,
    pub eval_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierModel {
    pub format: String,
    pub labels: Vec<Label>,
    /// `labels.len()` rows of `feature_model.dim()` weights, row-major.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub config: TrainConfig,
    pub training_log: Vec<EvalRecord>,
    pub best_step: usize,
    pub warnings: Vec<String>,
    pub feature_model: FeatureModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: Label,
    pub probabilities: Vec<(Label, f64)>,
    /// The text shared no n-gram with the vocabulary.
    pub oov: bool,
}

impl ClassifierModel {
    /// Untrained model with zero parameters.
    pub fn zeroed(feature_model: FeatureModel, labels: Vec<Label>, config: TrainConfig) -> Self {
        let dim = feature_model.dim();
        ClassifierModel {
            format: CLASSIFIER_FORMAT.to_string(),
            weights: vec![0.0; labels.len() * dim],
            bias: vec![0.0; labels.len()],
            labels,
            config,
            training_log: Vec::new(),
            best_step: 0,
            warnings: Vec::new(),
            feature_model,
        }
    }

    pub fn params(&self) -> LinearParams {
        let mut values = self.weights.clone();
        values.extend_from_slice(&self.bias);
        LinearParams {
            n_labels: self.labels.len(),
            dim: self.feature_model.dim(),
            values,
        }
    }

    pub fn predict_vector(&self, x: &SparseVector) -> Prediction {
        let z = logits(&self.weights, &self.bias, self.feature_model.dim(), x);
        let p = softmax(&z);
        let mut best = 0;
        for (i, &pi) in p.iter().enumerate() {
            if pi > p[best] {
                best = i;
            }
        }
        Prediction {
            label: self.labels[best],
            probabilities: self.labels.iter().copied().zip(p).collect(),
            oov: x.is_empty(),
        }
    }

    pub fn predict(&self, text: &str) -> Prediction {
        self.predict_vector(&featurize(text, &self.feature_model))
    }

    pub fn validate(&self) -> Result<()> {
        if self.format != CLASSIFIER_FORMAT {
            return Err(Error::Format(format!("unsupported classifier format {:?}", self.format)));
        }
        self.feature_model.validate()?;
        let dim = self.feature_model.dim();
        if self.weights.len() != self.labels.len() * dim || self.bias.len() != self.labels.len() {
            return Err(Error::Format("classifier weight shape does not match labels × vocabulary".into()));
        }
        if !self.training_log.is_empty() && !self.training_log.iter().any(|r| r.step == self.best_step) {
            return Err(Error::Format("best step missing from training log".into()));
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        io::write_file(path, serde_json::to_string(self)?.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let model: ClassifierModel =
            serde_json::from_str(&raw).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        model.validate()?;
        Ok(model)
    }
}

pub fn predict(model: &ClassifierModel, text: &str) -> Prediction {
    model.predict(text)
}

/// Binary label set when every example is from a binary condition.
pub fn label_set_for(split: &DatasetSplit) -> Vec<Label> {
    let all_binary = split
        .train
        .iter()
        .chain(&split.validation)
        .chain(&split.test)
        .all(|e| e.language.is_binary());
    if all_binary {
        Label::BINARY.to_vec()
    } else {
        Label::ALL.to_vec()
    }
}

pub fn train_classifier(split: &DatasetSplit, fm: &FeatureModel, config: &TrainConfig) -> Result<ClassifierModel> {
    train_classifier_with_labels(split, fm, &label_set_for(split), config)
}

fn encode(examples: &[LabeledExample], labels: &[Label], fm: &FeatureModel) -> Result<(Vec<SparseVector>, Vec<usize>)> {
    let ys = examples
        .iter()
        .map(|e| {
            labels.iter().position(|&l| l == e.label).ok_or_else(|| {
                Error::InvalidArgument(format!("label {} of example {} is outside the model label set", e.label, e.id))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let xs = examples.par_iter().map(|e| featurize(&e.text, fm)).collect();
    Ok((xs, ys))
}

/// Trains from zero initialization. Validation loss is recorded every
/// `eval_every` steps and after the final step; the returned parameters are
/// those of the lowest recorded loss (earliest on ties).
pub fn train_classifier_with_labels(
    split: &DatasetSplit,
    fm: &FeatureModel,
    labels: &[Label],
    config: &TrainConfig,
) -> Result<ClassifierModel> {
    config.validate()?;
    if split.train.is_empty() {
        return Err(Error::Empty("training part"));
    }
    if split.validation.is_empty() {
        return Err(Error::Empty("validation part"));
    }
    if labels.is_empty() {
        return Err(Error::Empty("label set"));
    }
    let (train_x, train_y) = encode(&split.train, labels, fm)?;
    let (val_x, val_y) = encode(&split.validation, labels, fm)?;
    let val_refs: Vec<&SparseVector> = val_x.iter().collect();

    let sample_weights: Option<Vec<f64>> = config.class_weighted.then(|| {
        let mut counts = vec![0usize; labels.len()];
        train_y.iter().for_each(|&y| counts[y] += 1);
        let n = train_y.len() as f64;
        let present = counts.iter().filter(|&&c| c > 0).count() as f64;
        train_y.iter().map(|&y| n / (present * counts[y] as f64)).collect()
    });

    let mut model = ClassifierModel::zeroed(fm.clone(), labels.to_vec(), config.clone());
    let mut params = model.params();
    let mut state = AdamWState::new(params.values.len());
    let hp = config.optimizer();

    let steps_per_epoch = train_x.len().div_ceil(config.batch_size);
    let total_steps = steps_per_epoch * config.epochs;
    if config.eval_every > total_steps {
        model.warnings.push(format!(
            "eval_every ({}) exceeds total steps ({total_steps}); only the final step is evaluated",
            config.eval_every
        ));
    }

    let mut rng = seed::substream(config.seed, "shuffle");
    let mut order: Vec<usize> = (0..train_x.len()).collect();
    let mut grad = vec![0.0; params.values.len()];
    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    let mut step = 0usize;
    let mut record = |step: usize, params: &LinearParams, log: &mut Vec<EvalRecord>| {
        let eval_loss = params.loss(&val_refs, &val_y, None);
        log.push(EvalRecord { step, eval_loss });
        if best.as_ref().map_or(true, |(b, _, _)| eval_loss < *b) {
            best = Some((eval_loss, step, params.values.clone()));
        }
    };

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            let xs: Vec<&SparseVector> = batch.iter().map(|&i| &train_x[i]).collect();
            let ys: Vec<usize> = batch.iter().map(|&i| train_y[i]).collect();
            let sw: Option<Vec<f64>> = sample_weights.as_ref().map(|w| batch.iter().map(|&i| w[i]).collect());
            grad.iter_mut().for_each(|g| *g = 0.0);
            params.accumulate_gradient(&xs, &ys, sw.as_deref(), &mut grad);
            adamw_step(&mut params.values, &grad, &mut state, &hp)?;
            step += 1;
            if step % config.eval_every == 0 {
                record(step, &params, &mut model.training_log);
            }
        }
    }
    if step % config.eval_every != 0 {
        record(step, &params, &mut model.training_log);
    }

    let (_, best_step, values) = best.expect("at least one evaluation");
    let split_at = labels.len() * fm.dim();
    model.weights = values[..split_at].to_vec();
    model.bias = values[split_at..].to_vec();
    model.best_step = best_step;
    Ok(model)
}
