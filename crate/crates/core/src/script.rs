//! Word-level script classification and per-document Latin-script
//! proportions.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use unicode_script::{Script, UnicodeScript};

use crate::corpus::{LabeledExample, LanguageCondition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScriptClass {
    Latin,
    Devanagari,
    Gujarati,
    Kannada,
    Malayalam,
    Tamil,
    Telugu,
    OtherScript,
    /// No alphabetic code points at all (digits, punctuation, emoji).
    Neutral,
}

impl ScriptClass {
    pub const BRAHMIC: [ScriptClass; 6] = [
        ScriptClass::Devanagari,
        ScriptClass::Gujarati,
        ScriptClass::Kannada,
        ScriptClass::Malayalam,
        ScriptClass::Tamil,
        ScriptClass::Telugu,
    ];

    pub fn is_brahmic(self) -> bool {
        Self::BRAHMIC.contains(&self)
    }

    fn of_char(c: char) -> ScriptClass {
        match c.script() {
            Script::Latin => ScriptClass::Latin,
            Script::Devanagari => ScriptClass::Devanagari,
            Script::Gujarati => ScriptClass::Gujarati,
            Script::Kannada => ScriptClass::Kannada,
            Script::Malayalam => ScriptClass::Malayalam,
            Script::Tamil => ScriptClass::Tamil,
            Script::Telugu => ScriptClass::Telugu,
            _ => ScriptClass::OtherScript,
        }
    }
}

impl fmt::Display for ScriptClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Majority script over the alphabetic code points of `word`. Latin wins any
/// tie it takes part in; other ties resolve in declaration order.
pub fn classify_word_script(word: &str) -> ScriptClass {
    let mut counts = [0usize; 8];
    for c in word.chars().filter(|c| c.is_alphabetic()) {
        counts[ScriptClass::of_char(c) as usize] += 1;
    }
    let best = counts.iter().copied().max().unwrap_or(0);
    if best == 0 {
        return ScriptClass::Neutral;
    }
    const ORDER: [ScriptClass; 8] = [
        ScriptClass::Latin,
        ScriptClass::Devanagari,
        ScriptClass::Gujarati,
        ScriptClass::Kannada,
        ScriptClass::Malayalam,
        ScriptClass::Tamil,
        ScriptClass::Telugu,
        ScriptClass::OtherScript,
    ];
    ORDER
        .into_iter()
        .find(|class| counts[*class as usize] == best)
        .expect("some class reaches the maximum")
}

fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(c, '\u{00A1}'..='\u{00BF}' | '\u{2010}'..='\u{205E}' | '\u{0964}' | '\u{0965}' | '\u{3000}'..='\u{303F}')
}

/// Whitespace tokens with punctuation stripped from both ends.
pub fn words(text: &str) -> impl Iterator<Item = &str> {
    text.split_whitespace()
        .map(|tok| tok.trim_matches(is_punctuation))
        .filter(|tok| !tok.is_empty())
}

/// Fraction of non-neutral words written in Latin script; `None` when the
/// text has no non-neutral word.
pub fn latin_proportion(text: &str) -> Option<f64> {
    let (mut latin, mut counted) = (0usize, 0usize);
    for word in words(text) {
        match classify_word_script(word) {
            ScriptClass::Neutral => {}
            ScriptClass::Latin => {
                latin += 1;
                counted += 1;
            }
            _ => counted += 1,
        }
    }
    (counted > 0).then(|| latin as f64 / counted as f64)
}

/// Quantile by linear interpolation between closest ranks (inclusive method).
/// `sorted` must be ascending and nonempty.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptMixSummary {
    pub language: LanguageCondition,
    pub median: f64,
    pub lower_quartile: f64,
    pub upper_quartile: f64,
    pub lower_whisker: f64,
    pub upper_whisker: f64,
    pub n: usize,
    /// Share of documents with at least one Latin-script word.
    pub any_latin_fraction: f64,
}

impl ScriptMixSummary {
    pub fn from_proportions(language: LanguageCondition, proportions: &[f64]) -> Option<Self> {
        if proportions.is_empty() {
            return None;
        }
        let mut sorted = proportions.to_vec();
        sorted.sort_by(f64::total_cmp);
        let with_latin = sorted.iter().filter(|&&p| p > 0.0).count();
        Some(ScriptMixSummary {
            language,
            median: quantile(&sorted, 0.5),
            lower_quartile: quantile(&sorted, 0.25),
            upper_quartile: quantile(&sorted, 0.75),
            lower_whisker: sorted[0],
            upper_whisker: sorted[sorted.len() - 1],
            n: sorted.len(),
            any_latin_fraction: with_latin as f64 / sorted.len() as f64,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptMixWarning {
    pub language: LanguageCondition,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScriptMixReport {
    pub summaries: Vec<ScriptMixSummary>,
    pub warnings: Vec<ScriptMixWarning>,
}

/// Five-number summary of Latin proportions per language. Documents with no
/// countable word are excluded; a language left with none is reported as a
/// warning instead of a summary.
pub fn script_switch_summary(examples: &[LabeledExample]) -> ScriptMixReport {
    let proportions: Vec<(LanguageCondition, Option<f64>)> = examples
        .par_iter()
        .map(|ex| (ex.language, latin_proportion(&ex.text)))
        .collect();
    let mut by_language: BTreeMap<LanguageCondition, Vec<f64>> = BTreeMap::new();
    for (language, p) in proportions {
        let entry = by_language.entry(language).or_default();
        if let Some(p) = p {
            entry.push(p);
        }
    }
    let mut report = ScriptMixReport::default();
    for (language, props) in by_language {
        match ScriptMixSummary::from_proportions(language, &props) {
            Some(summary) => report.summaries.push(summary),
            None => {
                log::warn!("{language}: no document with a countable word, omitted from script summary");
                report.warnings.push(ScriptMixWarning {
                    language,
                    message: "no document with a countable word".into(),
                });
            }
        }
    }
    report
}

impl ScriptMixReport {
    pub fn render_table(&self) -> String {
        let mut out = format!(
            "{:<8}{:>8}{:>10}{:>10}{:>10}{:>10}{:>10}{:>10}\n",
            "", "n", "lo_whisk", "lo_quart", "median", "up_quart", "up_whisk", "any_latin"
        );
        for s in &self.summaries {
            let _ = writeln!(
                out,
                "{:<8}{:>8}{:>10.6}{:>10.6}{:>10.6}{:>10.6}{:>10.6}{:>10.6}",
                s.language,
                s.n,
                s.lower_whisker,
                s.lower_quartile,
                s.median,
                s.upper_quartile,
                s.upper_whisker,
                s.any_latin_fraction
            );
        }
        for w in &self.warnings {
            let _ = writeln!(out, "{:<8}omitted: {}", w.language, w.message);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Label;

    #[test]
    fn classifies_words() {
        assert_eq!(classify_word_script("hello"), ScriptClass::Latin);
        assert_eq!(classify_word_script("નમસ્તે"), ScriptClass::Gujarati);
        assert_eq!(classify_word_script("123!!"), ScriptClass::Neutral);
        assert_eq!(classify_word_script("🙂"), ScriptClass::Neutral);
        assert_eq!(classify_word_script("नमस्ते"), ScriptClass::Devanagari);
        assert_eq!(classify_word_script("வணக்கம்"), ScriptClass::Tamil);
        assert_eq!(classify_word_script("привет"), ScriptClass::OtherScript);
        // 3 Latin vs 2 Gujarati
        assert_eq!(classify_word_script("abcનમ"), ScriptClass::Latin);
        // tie involving Latin
        assert_eq!(classify_word_script("abનમ"), ScriptClass::Latin);
        assert_eq!(classify_word_script("aનમ"), ScriptClass::Gujarati);
    }

    #[test]
    fn proportions() {
        assert_eq!(latin_proportion("hello world"), Some(1.0));
        assert_eq!(latin_proportion("નમસ્તે મિત્રો"), Some(0.0));
        let p = latin_proportion("ok નમસ્તે મિત્રો").unwrap();
        assert!((p - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(latin_proportion("123 🙂 !!"), None);
        assert_eq!(latin_proportion(""), None);
        assert_eq!(latin_proportion("\"hello,\" 42 (world)."), Some(1.0));
    }

    #[test]
    fn quartiles_by_interpolation() {
        let s = ScriptMixSummary::from_proportions(LanguageCondition::Eng, &[0.0, 0.0, 0.0, 0.7]).unwrap();
        assert_eq!(s.median, 0.0);
        assert_eq!(s.lower_quartile, 0.0);
        assert!((s.upper_quartile - 0.175).abs() < 1e-12);
        assert_eq!((s.lower_whisker, s.upper_whisker), (0.0, 0.7));
        assert!((s.any_latin_fraction - 0.25).abs() < 1e-12);

        let s = ScriptMixSummary::from_proportions(LanguageCondition::Esp, &[1.0; 5]).unwrap();
        assert_eq!(
            (s.lower_whisker, s.lower_quartile, s.median, s.upper_quartile, s.upper_whisker),
            (1.0, 1.0, 1.0, 1.0, 1.0)
        );
    }

    #[test]
    fn summary_omits_languages_without_countable_words() {
        let mk = |language, text: &str| LabeledExample {
            id: text.into(),
            text: text.into(),
            language,
            label: Label::None,
        };
        let report = script_switch_summary(&[
            mk(LanguageCondition::Eng, "hello"),
            mk(LanguageCondition::Eng, "42"),
            mk(LanguageCondition::Hin, "🙂 !!"),
        ]);
        assert_eq!(report.summaries.len(), 1);
        assert_eq!(report.summaries[0].n, 1);
        assert_eq!(report.warnings.len(), 1);
        assert_eq!(report.warnings[0].language, LanguageCondition::Hin);
    }
}
