//! Line-by-line prediction with a saved classifier, as JSON Lines.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use scriptswitch::{ClassifierModel, Label};

use crate::error::{CliError, CliResult, Context, ErrorKind};

const STAGE: &str = "predict";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    /// 1-based input line number.
    pub line: usize,
    pub label: Label,
    pub probabilities: BTreeMap<Label, f64>,
    /// No known feature fired; the label comes from the bias alone.
    pub oov: bool,
}

pub fn load_model(path: &Path) -> CliResult<ClassifierModel> {
    ClassifierModel::load(path).map_err(|e| CliError::data(STAGE, e.to_string()))
}

/// One record per input line, blank lines included.
pub fn predict_lines<R: BufRead, W: Write>(model: &ClassifierModel, input: R, mut out: W) -> CliResult<usize> {
    let mut n = 0;
    for (i, line) in input.lines().enumerate() {
        let line = line.ctx(ErrorKind::Data, STAGE)?;
        let p = model.predict(&line);
        let record = PredictionRecord {
            line: i + 1,
            label: p.label,
            probabilities: p.probabilities.into_iter().collect(),
            oov: p.oov,
        };
        serde_json::to_writer(&mut out, &record).ctx(ErrorKind::Data, STAGE)?;
        out.write_all(b"\n").ctx(ErrorKind::Data, STAGE)?;
        n += 1;
    }
    out.flush().ctx(ErrorKind::Data, STAGE)?;
    Ok(n)
}

pub fn run_predict(model: &Path, input: &Path, output: Option<&Path>) -> CliResult<usize> {
    let model = load_model(model)?;
    let file = std::fs::File::open(input).map_err(|e| CliError::data(STAGE, format!("{}: {e}", input.display())))?;
    let reader = std::io::BufReader::new(file);
    match output {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|e| CliError::data(STAGE, format!("{}: {e}", path.display())))?;
            predict_lines(&model, reader, std::io::BufWriter::new(file))
        }
        None => predict_lines(&model, reader, std::io::stdout().lock()),
    }
}
