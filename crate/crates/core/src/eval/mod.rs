//! Classification metrics and candidate-model selection.

pub mod grid;
pub mod metrics;

pub use grid::{render_grid, select_best, CellKey, Configuration, ConfigurationSummary, GridCell, Scope, Selection, SelectionGrid};
pub use metrics::{
    confusion_matrix, confusion_matrix_with_labels, evaluate, macro_f1, weighted_macro_f1, ConfusionMatrix,
    EvaluationReport, LabelScores, ReportMetadata,
};
