//! Labelled datasets: language conditions, label set, TSV ingestion,
//! seeded train/validation/test resampling and descriptive statistics.

use std::collections::{BTreeMap, HashSet};
use std::fmt::{self, Write as _};
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::script::ScriptClass;
use crate::seed;

/// The ten language conditions of the shared task. Declaration order is
/// alphabetical by code, so the derived `Ord` is the code order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum LanguageCondition {
    Eng,
    Esp,
    Guj,
    Hin,
    Kan,
    Mal,
    Mar,
    Tam,
    Tcy,
    Tel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LanguageFamily {
    IndoEuropean,
    Dravidian,
}

impl LanguageCondition {
    pub const ALL: [LanguageCondition; 10] = [
        LanguageCondition::Eng,
        LanguageCondition::Esp,
        LanguageCondition::Guj,
        LanguageCondition::Hin,
        LanguageCondition::Kan,
        LanguageCondition::Mal,
        LanguageCondition::Mar,
        LanguageCondition::Tam,
        LanguageCondition::Tcy,
        LanguageCondition::Tel,
    ];

    pub fn code(self) -> &'static str {
        match self {
            LanguageCondition::Eng => "ENG",
            LanguageCondition::Esp => "ESP",
            LanguageCondition::Guj => "GUJ",
            LanguageCondition::Hin => "HIN",
            LanguageCondition::Kan => "KAN",
            LanguageCondition::Mal => "MAL",
            LanguageCondition::Mar => "MAR",
            LanguageCondition::Tam => "TAM",
            LanguageCondition::Tcy => "TCY",
            LanguageCondition::Tel => "TEL",
        }
    }

    pub fn family(self) -> LanguageFamily {
        use LanguageCondition::*;
        match self {
            Eng | Esp | Guj | Hin | Mar => LanguageFamily::IndoEuropean,
            Kan | Mal | Tam | Tcy | Tel => LanguageFamily::Dravidian,
        }
    }

    /// Script the language is conventionally written in. Tulu uses Kannada.
    pub fn native_script(self) -> ScriptClass {
        use LanguageCondition::*;
        match self {
            Eng | Esp => ScriptClass::Latin,
            Hin | Mar => ScriptClass::Devanagari,
            Guj => ScriptClass::Gujarati,
            Kan | Tcy => ScriptClass::Kannada,
            Mal => ScriptClass::Malayalam,
            Tam => ScriptClass::Tamil,
            Tel => ScriptClass::Telugu,
        }
    }

    pub fn is_latin_native(self) -> bool {
        self.native_script() == ScriptClass::Latin
    }

    /// TCY is annotated with two classes only.
    pub fn is_binary(self) -> bool {
        self == LanguageCondition::Tcy
    }

    pub fn labels(self) -> &'static [Label] {
        if self.is_binary() {
            &Label::BINARY
        } else {
            &Label::ALL
        }
    }
}

impl fmt::Display for LanguageCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.code())
    }
}

impl FromStr for LanguageCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase();
        LanguageCondition::ALL
            .into_iter()
            .find(|l| l.code() == upper)
            .ok_or_else(|| Error::UnknownLanguage(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Label {
    None,
    Homo,
    Trans,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::None, Label::Homo, Label::Trans];
    pub const BINARY: [Label; 2] = [Label::None, Label::Homo];

    pub fn code(self) -> &'static str {
        match self {
            Label::None => "NONE",
            Label::Homo => "HOMO",
            Label::Trans => "TRANS",
        }
    }

    /// Parses a label through the alias table (case-insensitive).
    pub fn parse(raw: &str) -> Result<Label> {
        match raw.trim().to_lowercase().as_str() {
            "none" | "none-of-the-above" | "non-anti-lgbt+ content" | "non-anti-lgbtq+ content" => {
                Ok(Label::None)
            }
            "homo" | "homophobic" => Ok(Label::Homo),
            "trans" | "transphobic" => Ok(Label::Trans),
            _ => Err(Error::UnknownLabel(raw.to_string())),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub id: String,
    pub text: String,
    pub language: LanguageCondition,
    pub label: Label,
}

/// Loads a tab-separated dataset with header `id<TAB>text<TAB>label` (the id
/// column is optional, column order is free).
/// Reads a `.tsv` or `.tsv.gz` dataset file.
pub fn load_dataset(path: &Path, language: LanguageCondition) -> Result<Vec<LabeledExample>> {
    read_dataset(crate::io::open(path)?, path, language)
}

pub fn read_dataset<R: Read>(
    reader: R,
    source: &Path,
    language: LanguageCondition,
) -> Result<Vec<LabeledExample>> {
    let malformed = |row: usize, message: String| Error::MalformedRow {
        path: source.to_path_buf(),
        row,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .quoting(false)
        .flexible(true)
        .has_headers(true)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| malformed(0, format!("unreadable header: {e}")))?
        .clone();
    let column = |name: &str| headers.iter().position(|h| h.trim().eq_ignore_ascii_case(name));
    let text_col = column("text").ok_or_else(|| malformed(0, "missing `text` column".into()))?;
    let label_col = column("label").ok_or_else(|| malformed(0, "missing `label` column".into()))?;
    let id_col = column("id");

    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (index, record) in rdr.records().enumerate() {
        let row = index + 1;
        let record = record.map_err(|e| malformed(row, e.to_string()))?;
        if record.len() != headers.len() {
            return Err(malformed(
                row,
                format!("expected {} fields, found {}", headers.len(), record.len()),
            ));
        }
        let text = record[text_col].trim();
        if text.is_empty() {
            return Err(malformed(row, "empty text".into()));
        }
        let label = Label::parse(&record[label_col])?;
        if language.is_binary() && label == Label::Trans {
            return Err(Error::LabelNotPermitted {
                row,
                label: record[label_col].to_string(),
                language: language.to_string(),
            });
        }
        let id = match id_col {
            Some(col) if !record[col].trim().is_empty() => record[col].trim().to_string(),
            _ => format!("{}-{}", language, index),
        };
        if !seen.insert(id.clone()) {
            return Err(Error::DuplicateId(id));
        }
        out.push(LabeledExample {
            id,
            text: text.to_string(),
            language,
            label,
        });
    }
    Ok(out)
}

/// Serializes examples in the dataset format.
pub fn write_dataset(examples: &[LabeledExample]) -> String {
    let mut out = String::from("id\ttext\tlabel\n");
    for ex in examples {
        let _ = writeln!(out, "{}\t{}\t{}", ex.id, ex.text, ex.label);
    }
    out
}

/// Proportion of each label; labels absent from the input map to zero.
pub fn class_distribution(examples: &[LabeledExample]) -> Result<BTreeMap<Label, f64>> {
    if examples.is_empty() {
        return Err(Error::Empty("class distribution of an empty collection"));
    }
    let counts = label_counts(examples);
    let total = examples.len() as f64;
    Ok(counts
        .into_iter()
        .map(|(label, count)| (label, count as f64 / total))
        .collect())
}

pub fn label_counts(examples: &[LabeledExample]) -> BTreeMap<Label, usize> {
    let mut counts: BTreeMap<Label, usize> = Label::ALL.iter().map(|&l| (l, 0)).collect();
    for ex in examples {
        *counts.entry(ex.label).or_default() += 1;
    }
    counts
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: Vec<LabeledExample>,
    pub validation: Vec<LabeledExample>,
    pub test: Vec<LabeledExample>,
    pub seed: u64,
    pub ratios: [f64; 3],
}

impl DatasetSplit {
    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.train.len(), self.validation.len(), self.test.len())
    }
}

/// Seeded uniform shuffle followed by contiguous slicing into
/// train/validation/test. Validation and test sizes are floored, the
/// remainder goes to train.
pub fn resample_splits(examples: &[LabeledExample], ratios: [f64; 3], seed: u64) -> Result<DatasetSplit> {
    if ratios.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return Err(Error::InvalidArgument(format!("split ratios must be non-negative, got {ratios:?}")));
    }
    if (ratios.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("split ratios must sum to 1, got {ratios:?}")));
    }
    if examples.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 examples to split, got {}",
            examples.len()
        )));
    }
    let n = examples.len();
    let floor = |r: f64| ((r * n as f64) + 1e-9).floor() as usize;
    let n_val = floor(ratios[1]);
    let n_test = floor(ratios[2]);
    let n_train = n - n_val - n_test;

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::rng(seed));
    let pick = |range: std::ops::Range<usize>| -> Vec<LabeledExample> {
        order[range].iter().map(|&i| examples[i].clone()).collect()
    };
    Ok(DatasetSplit {
        train: pick(0..n_train),
        validation: pick(n_train..n_train + n_val),
        test: pick(n_train + n_val..n),
        seed,
        ratios,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub language: LanguageCondition,
    pub total: usize,
    pub label_counts: BTreeMap<Label, usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub rows: Vec<SummaryRow>,
}

/// Observation counts per language, largest first; ties by language code.
pub fn corpus_summary(datasets: &BTreeMap<LanguageCondition, Vec<LabeledExample>>) -> CorpusSummary {
    let mut rows: Vec<SummaryRow> = datasets
        .iter()
        .map(|(&language, examples)| SummaryRow {
            language,
            total: examples.len(),
            label_counts: label_counts(examples),
        })
        .collect();
    rows.sort_by(|a, b| b.total.cmp(&a.total).then(a.language.cmp(&b.language)));
    CorpusSummary { rows }
}

impl CorpusSummary {
    pub fn render_table(&self) -> String {
        let mut out = format!("{:<8}{:>10}{:>8}{:>8}{:>8}\n", "", "TOTAL", "NONE", "HOMO", "TRANS");
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{:<8}{:>10}{:>8}{:>8}{:>8}",
                row.language,
                row.total,
                row.label_counts[&Label::None],
                row.label_counts[&Label::Homo],
                row.label_counts[&Label::Trans],
            );
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionRow {
    pub language: LanguageCondition,
    pub proportions: BTreeMap<Label, f64>,
}

/// Class distribution table with one row per language, in code order.
pub fn distribution_table(
    datasets: &BTreeMap<LanguageCondition, Vec<LabeledExample>>,
) -> Result<Vec<DistributionRow>> {
    datasets
        .iter()
        .map(|(&language, examples)| {
            Ok(DistributionRow {
                language,
                proportions: class_distribution(examples)?,
            })
        })
        .collect()
}

/// Two-decimal table; labels outside a binary language's label set print `-`.
pub fn render_distribution_table(rows: &[DistributionRow]) -> String {
    let mut out = format!("{:<8}{:>8}{:>8}{:>8}\n", "", "NONE", "HOMO", "TRANS");
    for row in rows {
        let _ = write!(out, "{:<8}", row.language);
        for label in Label::ALL {
            if row.language.labels().contains(&label) {
                let _ = write!(out, "{:>8.2}", row.proportions[&label]);
            } else {
                let _ = write!(out, "{:>8}", "-");
            }
        }
        out.push('\n');
    }
    out
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn arb_examples() -> impl Strategy<Value = Vec<LabeledExample>> {
        prop::collection::vec(0usize..3, 3..200).prop_map(|labels| {
            labels
                .into_iter()
                .enumerate()
                .map(|(i, l)| LabeledExample {
                    id: format!("e{i}"),
                    text: format!("t{i}"),
                    language: LanguageCondition::Hin,
                    label: Label::ALL[l],
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn split_is_partition(data in arb_examples(), seed in any::<u64>()) {
            let split = resample_splits(&data, [0.8, 0.1, 0.1], seed).unwrap();
            let (a, b, c) = split.sizes();
            prop_assert_eq!(a + b + c, data.len());
            let mut ids: Vec<&str> = split.train.iter().chain(&split.validation).chain(&split.test)
                .map(|e| e.id.as_str()).collect();
            ids.sort_unstable();
            ids.dedup();
            prop_assert_eq!(ids.len(), data.len());
            let n = data.len() as f64;
            prop_assert!((b as f64 - 0.1 * n).abs() < 1.0 + 1e-9);
            prop_assert!((c as f64 - 0.1 * n).abs() < 1.0 + 1e-9);
        }

        #[test]
        fn distribution_reconstructs_counts(data in arb_examples()) {
            let dist = class_distribution(&data).unwrap();
            let counts = label_counts(&data);
            let total: f64 = dist.values().sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
            for (label, p) in dist {
                prop_assert!((p * data.len() as f64 - counts[&label] as f64).abs() < 1e-6);
            }
        }

        #[test]
        fn reshuffled_input_preserves_label_multiset(data in arb_examples(), seed in any::<u64>()) {
            let mut reversed = data.clone();
            reversed.reverse();
            let a = resample_splits(&data, [0.8, 0.1, 0.1], seed).unwrap();
            let b = resample_splits(&reversed, [0.8, 0.1, 0.1], seed).unwrap();
            let union = |s: &DatasetSplit| {
                let all: Vec<LabeledExample> = s.train.iter().chain(&s.validation).chain(&s.test).cloned().collect();
                label_counts(&all)
            };
            prop_assert_eq!(union(&a), union(&b));
        }
    }
}
