//! The variant × scope × language grid of candidate models and the choice
//! of a single configuration to submit.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::adaptation::Provenance;
use crate::corpus::LanguageCondition;
use crate::error::{Error, Result};

use super::metrics::EvaluationReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Scope {
    Mono,
    Multi,
}

impl Scope {
    pub const ALL: [Scope; 2] = [Scope::Mono, Scope::Multi];

    pub fn code(self) -> &'static str {
        match self {
            Scope::Mono => "MONO",
            Scope::Multi => "MULTI",
        }
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.code())
    }
}

impl FromStr for Scope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "MONO" => Ok(Scope::Mono),
            "MULTI" => Ok(Scope::Multi),
            _ => Err(Error::InvalidArgument(format!("unknown scope {s:?}"))),
        }
    }
}

/// A (variant, scope) pair.
pub type Configuration = (Provenance, Scope);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub variant: Provenance,
    pub scope: Scope,
    pub language: LanguageCondition,
}

impl CellKey {
    pub fn new(variant: Provenance, scope: Scope, language: LanguageCondition) -> Self {
        CellKey {
            variant,
            scope,
            language,
        }
    }

    pub fn configuration(&self) -> Configuration {
        (self.variant, self.scope)
    }
}

impl fmt::Display for CellKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.variant, self.scope, self.language)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub macro_f1: f64,
    pub report: Option<EvaluationReport>,
}

/// Cells are keyed by (variant, scope, language); the declared languages and
/// configurations are whatever appears in at least one cell.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "GridRepr", into = "GridRepr")]
pub struct SelectionGrid {
    pub cells: BTreeMap<CellKey, GridCell>,
}

#[derive(Serialize, Deserialize)]
struct GridEntry {
    #[serde(flatten)]
    key: CellKey,
    #[serde(flatten)]
    cell: GridCell,
}

#[derive(Serialize, Deserialize)]
struct GridRepr {
    cells: Vec<GridEntry>,
}

impl From<GridRepr> for SelectionGrid {
    fn from(r: GridRepr) -> Self {
        SelectionGrid {
            cells: r.cells.into_iter().map(|e| (e.key, e.cell)).collect(),
        }
    }
}

impl From<SelectionGrid> for GridRepr {
    fn from(g: SelectionGrid) -> Self {
        GridRepr {
            cells: g.cells.into_iter().map(|(key, cell)| GridEntry { key, cell }).collect(),
        }
    }
}

impl SelectionGrid {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert_score(&mut self, key: CellKey, macro_f1: f64) {
        self.cells.insert(key, GridCell { macro_f1, report: None });
    }

    pub fn insert_report(&mut self, key: CellKey, report: EvaluationReport) {
        self.cells.insert(
            key,
            GridCell {
                macro_f1: report.macro_f1,
                report: Some(report),
            },
        );
    }

    pub fn languages(&self) -> BTreeSet<LanguageCondition> {
        self.cells.keys().map(|k| k.language).collect()
    }

    pub fn configurations(&self) -> BTreeSet<Configuration> {
        self.cells.keys().map(CellKey::configuration).collect()
    }

    pub fn score(&self, key: &CellKey) -> Option<f64> {
        self.cells.get(key).map(|c| c.macro_f1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigurationSummary {
    pub variant: Provenance,
    pub scope: Scope,
    pub wins: usize,
    pub mean_macro_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    /// Per language, every configuration reaching the row maximum.
    pub winners: BTreeMap<LanguageCondition, Vec<Configuration>>,
    /// Configurations in nomination order.
    pub ranking: Vec<ConfigurationSummary>,
    pub nominated: Configuration,
}

impl Selection {
    pub fn is_winner(&self, key: &CellKey) -> bool {
        self.winners
            .get(&key.language)
            .is_some_and(|w| w.contains(&key.configuration()))
    }
}

/// Picks the per-language winners and nominates one configuration: highest
/// mean macro F1 across languages, then most wins, then variant/scope order.
pub fn select_best(grid: &SelectionGrid) -> Result<Selection> {
    let languages = grid.languages();
    let configurations = grid.configurations();
    if languages.is_empty() {
        return Err(Error::Empty("selection grid"));
    }
    for &(variant, scope) in &configurations {
        for &language in &languages {
            let key = CellKey::new(variant, scope, language);
            if !grid.cells.contains_key(&key) {
                return Err(Error::MissingCell(key.to_string()));
            }
        }
    }
    let score = |c: Configuration, l: LanguageCondition| grid.cells[&CellKey::new(c.0, c.1, l)].macro_f1;

    let mut winners = BTreeMap::new();
    for &language in &languages {
        let best = configurations
            .iter()
            .map(|&c| score(c, language))
            .fold(f64::NEG_INFINITY, f64::max);
        let row: Vec<Configuration> = configurations
            .iter()
            .copied()
            .filter(|&c| score(c, language) == best)
            .collect();
        winners.insert(language, row);
    }

    let mut ranking: Vec<ConfigurationSummary> = configurations
        .iter()
        .map(|&c| ConfigurationSummary {
            variant: c.0,
            scope: c.1,
            wins: winners.values().filter(|w| w.contains(&c)).count(),
            mean_macro_f1: languages.iter().map(|&l| score(c, l)).sum::<f64>() / languages.len() as f64,
        })
        .collect();
    // configurations is already in variant/scope order and the sort is stable
    ranking.sort_by(|a, b| {
        b.mean_macro_f1
            .total_cmp(&a.mean_macro_f1)
            .then_with(|| b.wins.cmp(&a.wins))
    });
    let nominated = (ranking[0].variant, ranking[0].scope);
    Ok(Selection {
        winners,
        ranking,
        nominated,
    })
}

/// Aligned text table: one row per language, one column per configuration,
/// winners marked with `*`.
pub fn render_grid(grid: &SelectionGrid, selection: &Selection) -> String {
    let configurations: Vec<Configuration> = grid.configurations().into_iter().collect();
    let mut out = String::new();
    let _ = write!(out, "{:<6}", "");
    for (v, _) in &configurations {
        let _ = write!(out, " {:>10}", v.code());
    }
    out.push('\n');
    let _ = write!(out, "{:<6}", "lang");
    for (_, s) in &configurations {
        let _ = write!(out, " {:>10}", s.code().to_ascii_lowercase());
    }
    out.push('\n');
    for language in grid.languages() {
        let _ = write!(out, "{:<6}", language.code());
        for &(v, s) in &configurations {
            let key = CellKey::new(v, s, language);
            let cell = match grid.score(&key) {
                Some(f1) if selection.is_winner(&key) => format!("*{f1:.4}"),
                Some(f1) => format!("{f1:.4}"),
                None => "-".to_string(),
            };
            let _ = write!(out, " {cell:>10}");
        }
        out.push('\n');
    }
    let _ = write!(out, "{:<6}", "mean");
    for &(v, s) in &configurations {
        let mean = selection
            .ranking
            .iter()
            .find(|r| r.variant == v && r.scope == s)
            .map_or(f64::NAN, |r| r.mean_macro_f1);
        let _ = write!(out, " {mean:>10.4}");
    }
    out.push('\n');
    let _ = writeln!(out, "nominated: {}-{}", selection.nominated.0, selection.nominated.1);
    out
}
