use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::adaptation::Provenance;
use crate::corpus::{Label, LanguageCondition};
use crate::error::{Error, Result};

use super::grid::Scope;

/// Rows are gold labels, columns predicted labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<Label>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn from_counts(labels: Vec<Label>, counts: Vec<Vec<u64>>) -> Result<Self> {
        if counts.len() != labels.len() || counts.iter().any(|row| row.len() != labels.len()) {
            return Err(Error::ShapeMismatch(format!(
                "{} labels but a {}-row confusion matrix",
                labels.len(),
                counts.len()
            )));
        }
        Ok(ConfusionMatrix { labels, counts })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn support(&self, i: usize) -> u64 {
        self.counts[i].iter().sum()
    }

    pub fn predicted(&self, i: usize) -> u64 {
        self.counts.iter().map(|row| row[i]).sum()
    }

    /// Precision, recall and F1 of label `i`. Undefined ratios count as 0.
    pub fn scores(&self, i: usize) -> (f64, f64, f64) {
        let tp = self.counts[i][i] as f64;
        let ratio = |num: f64, den: u64| if den == 0 { 0.0 } else { num / den as f64 };
        let precision = ratio(tp, self.predicted(i));
        let recall = ratio(tp, self.support(i));
        (precision, recall, self.f1(i))
    }

    /// F1 of label `i` as 2·tp / (support + predicted), the harmonic mean of
    /// precision and recall without the intermediate ratios; 0 when the label
    /// never occurs.
    pub fn f1(&self, i: usize) -> f64 {
        let den = self.support(i) + self.predicted(i);
        if den == 0 {
            0.0
        } else {
            (2 * self.counts[i][i]) as f64 / den as f64
        }
    }

    fn check_nonempty(&self) -> Result<()> {
        if self.labels.is_empty() || self.total() == 0 {
            return Err(Error::Empty("confusion matrix"));
        }
        Ok(())
    }
}

/// Tallies gold/predicted pairs over `labels`.
pub fn confusion_matrix_with_labels(gold: &[Label], predicted: &[Label], labels: &[Label]) -> Result<ConfusionMatrix> {
    if gold.len() != predicted.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} gold labels but {} predictions",
            gold.len(),
            predicted.len()
        )));
    }
    if gold.is_empty() {
        return Err(Error::Empty("label sequences"));
    }
    let position = |l: Label| {
        labels
            .iter()
            .position(|&x| x == l)
            .ok_or_else(|| Error::InvalidArgument(format!("label {l} outside the label set")))
    };
    let mut counts = vec![vec![0u64; labels.len()]; labels.len()];
    for (&g, &p) in gold.iter().zip(predicted) {
        counts[position(g)?][position(p)?] += 1;
    }
    ConfusionMatrix::from_counts(labels.to_vec(), counts)
}

/// Confusion matrix over the sorted union of observed labels.
pub fn confusion_matrix(gold: &[Label], predicted: &[Label]) -> Result<ConfusionMatrix> {
    let labels: Vec<Label> = gold.iter().chain(predicted).copied().collect::<BTreeSet<_>>().into_iter().collect();
    confusion_matrix_with_labels(gold, predicted, &labels)
}

/// Unweighted mean of per-label F1; labels without support still count.
pub fn macro_f1(cm: &ConfusionMatrix) -> Result<f64> {
    cm.check_nonempty()?;
    let sum: f64 = (0..cm.labels.len()).map(|i| cm.f1(i)).sum();
    Ok(sum / cm.labels.len() as f64)
}

/// Per-label F1 weighted by gold support.
pub fn weighted_macro_f1(cm: &ConfusionMatrix) -> Result<f64> {
    cm.check_nonempty()?;
    let total = cm.total() as f64;
    Ok((0..cm.labels.len())
        .map(|i| cm.support(i) as f64 / total * cm.f1(i))
        .sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelScores {
    pub label: Label,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub language: Option<LanguageCondition>,
    pub variant: Option<Provenance>,
    pub scope: Option<Scope>,
    pub seed: Option<u64>,
    pub model_version: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub per_label: Vec<LabelScores>,
    pub macro_f1: f64,
    pub weighted_macro_f1: f64,
    pub confusion: ConfusionMatrix,
    pub metadata: ReportMetadata,
}

impl EvaluationReport {
    pub fn from_confusion(confusion: ConfusionMatrix, metadata: ReportMetadata) -> Result<Self> {
        let per_label = (0..confusion.labels.len())
            .map(|i| {
                let (precision, recall, f1) = confusion.scores(i);
                LabelScores {
                    label: confusion.labels[i],
                    precision,
                    recall,
                    f1,
                    support: confusion.support(i),
                }
            })
            .collect();
        Ok(EvaluationReport {
            per_label,
            macro_f1: macro_f1(&confusion)?,
            weighted_macro_f1: weighted_macro_f1(&confusion)?,
            confusion,
            metadata,
        })
    }
}

pub fn evaluate(gold: &[Label], predicted: &[Label], labels: &[Label], metadata: ReportMetadata) -> Result<EvaluationReport> {
    EvaluationReport::from_confusion(confusion_matrix_with_labels(gold, predicted, labels)?, metadata)
}
