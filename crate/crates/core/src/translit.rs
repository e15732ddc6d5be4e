//! Rule-based romanization of Brahmic scripts and assembly of the synthetic
//! script-switched adaptation corpus.
//!
//! Rule tables are plain text, one per script, shipped in `tables/`:
//!
//! ```text
//! #! version	devanagari-iso15919-simple/1
//! #! inherent	a
//! [consonant]
//! क	k
//! [sign]
//! ा	ā
//! ```
//!
//! Rules are grouped into sections by role. A consonant is followed by the
//! inherent vowel unless the next match is a vowel sign (which replaces it) or
//! a virama (which suppresses it). Marks such as nukta are skipped inside the
//! consonant cluster. Matching is greedy, longest source first.

use std::collections::{BTreeMap, HashMap};
use std::sync::OnceLock;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::adaptation::{AdaptationCorpus, Provenance};
use crate::corpus::{LabeledExample, LanguageCondition};
use crate::error::{Error, Result};
use crate::script::ScriptClass;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    Consonant,
    Vowel,
    Sign,
    Virama,
    Mark,
    Other,
    Digit,
}

impl RuleKind {
    fn from_section(name: &str) -> Option<RuleKind> {
        Some(match name {
            "consonant" => RuleKind::Consonant,
            "vowel" => RuleKind::Vowel,
            "sign" => RuleKind::Sign,
            "virama" => RuleKind::Virama,
            "mark" => RuleKind::Mark,
            "other" => RuleKind::Other,
            "digit" => RuleKind::Digit,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    pub source: String,
    pub replacement: String,
    pub kind: RuleKind,
}

#[derive(Debug, Clone)]
pub struct TransliterationTable {
    pub script: ScriptClass,
    pub version: String,
    pub inherent: String,
    /// Longest source first, then by source.
    pub rules: Vec<Rule>,
    index: HashMap<String, usize>,
    max_source_len: usize,
}

fn block_ranges(script: ScriptClass) -> &'static [(char, char)] {
    match script {
        ScriptClass::Devanagari => &[('\u{0900}', '\u{097F}'), ('\u{A8E0}', '\u{A8FF}')],
        ScriptClass::Gujarati => &[('\u{0A80}', '\u{0AFF}')],
        ScriptClass::Tamil => &[('\u{0B80}', '\u{0BFF}'), ('\u{11FC0}', '\u{11FFF}')],
        ScriptClass::Telugu => &[('\u{0C00}', '\u{0C7F}')],
        ScriptClass::Kannada => &[('\u{0C80}', '\u{0CFF}')],
        ScriptClass::Malayalam => &[('\u{0D00}', '\u{0D7F}')],
        _ => &[],
    }
}

/// True when `c` lies in one of the Unicode blocks of `script`.
pub fn in_script_block(c: char, script: ScriptClass) -> bool {
    block_ranges(script).iter().any(|&(lo, hi)| (lo..=hi).contains(&c))
}

impl TransliterationTable {
    pub fn parse(name: &str, script: ScriptClass, source: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::RuleTable {
            table: name.to_string(),
            line,
            message,
        };
        let mut version = None;
        let mut inherent = String::from("a");
        let mut section = None;
        let mut rules: Vec<Rule> = Vec::new();
        let mut index = HashMap::new();
        for (i, raw) in source.lines().enumerate() {
            let line_no = i + 1;
            if let Some(directive) = raw.strip_prefix("#!") {
                let (key, value) = directive
                    .trim_start()
                    .split_once('\t')
                    .ok_or_else(|| err(line_no, "directive without value".into()))?;
                match key.trim() {
                    "version" => version = Some(value.trim().to_string()),
                    "inherent" => inherent = value.trim().to_string(),
                    "script" => {}
                    other => return Err(err(line_no, format!("unknown directive {other:?}"))),
                }
                continue;
            }
            if raw.starts_with('#') || raw.trim().is_empty() {
                continue;
            }
            if let Some(name) = raw.trim().strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = Some(
                    RuleKind::from_section(name).ok_or_else(|| err(line_no, format!("unknown section {name:?}")))?,
                );
                continue;
            }
            let kind = section.ok_or_else(|| err(line_no, "rule outside of a section".into()))?;
            let (src, replacement) = raw
                .split_once('\t')
                .ok_or_else(|| err(line_no, "expected source<TAB>replacement".into()))?;
            if src.is_empty() {
                return Err(err(line_no, "empty source".into()));
            }
            if index.insert(src.to_string(), rules.len()).is_some() {
                return Err(err(line_no, format!("duplicate source {src:?}")));
            }
            rules.push(Rule {
                source: src.to_string(),
                replacement: replacement.to_string(),
                kind,
            });
        }
        let version = version.ok_or_else(|| err(0, "missing version directive".into()))?;
        rules.sort_by(|a, b| {
            b.source
                .chars()
                .count()
                .cmp(&a.source.chars().count())
                .then_with(|| a.source.cmp(&b.source))
        });
        let index: HashMap<String, usize> = rules.iter().enumerate().map(|(i, r)| (r.source.clone(), i)).collect();
        let max_source_len = rules.iter().map(|r| r.source.chars().count()).max().unwrap_or(0);
        Ok(TransliterationTable {
            script,
            version,
            inherent,
            rules,
            index,
            max_source_len,
        })
    }

    /// The shipped table for a Brahmic script.
    pub fn builtin(script: ScriptClass) -> Result<&'static TransliterationTable> {
        static TABLES: OnceLock<Vec<TransliterationTable>> = OnceLock::new();
        let tables = TABLES.get_or_init(|| {
            BUILTIN_SOURCES
                .iter()
                .map(|(name, script, src)| {
                    TransliterationTable::parse(name, *script, src).expect("shipped rule tables parse")
                })
                .collect()
        });
        tables
            .iter()
            .find(|t| t.script == script)
            .ok_or_else(|| Error::UnsupportedScript(script.to_string()))
    }

    fn longest_match(&self, chars: &[char], at: usize) -> Option<&Rule> {
        let longest = self.max_source_len.min(chars.len() - at);
        let mut key = String::new();
        for len in (1..=longest).rev() {
            key.clear();
            key.extend(&chars[at..at + len]);
            if let Some(&i) = self.index.get(&key) {
                return Some(&self.rules[i]);
            }
        }
        None
    }

    pub fn apply(&self, text: &str) -> String {
        let chars: Vec<char> = text.chars().collect();
        let mut out = String::with_capacity(text.len());
        let mut i = 0;
        while i < chars.len() {
            let Some(rule) = self.longest_match(&chars, i) else {
                // Unmapped code points of the source block are dropped.
                if !in_script_block(chars[i], self.script) {
                    out.push(chars[i]);
                }
                i += 1;
                continue;
            };
            i += rule.source.chars().count();
            out.push_str(&rule.replacement);
            if rule.kind != RuleKind::Consonant {
                continue;
            }
            loop {
                match self.longest_match_at(&chars, i) {
                    Some(next) if next.kind == RuleKind::Mark => i += next.source.chars().count(),
                    Some(next) if next.kind == RuleKind::Sign => {
                        out.push_str(&next.replacement);
                        i += next.source.chars().count();
                        break;
                    }
                    Some(next) if next.kind == RuleKind::Virama => {
                        i += next.source.chars().count();
                        break;
                    }
                    _ => {
                        out.push_str(&self.inherent);
                        break;
                    }
                }
            }
        }
        out
    }

    fn longest_match_at(&self, chars: &[char], at: usize) -> Option<&Rule> {
        (at < chars.len()).then(|| self.longest_match(chars, at)).flatten()
    }
}

const BUILTIN_SOURCES: [(&str, ScriptClass, &str); 6] = [
    ("devanagari", ScriptClass::Devanagari, include_str!("../tables/devanagari.tsv")),
    ("gujarati", ScriptClass::Gujarati, include_str!("../tables/gujarati.tsv")),
    ("kannada", ScriptClass::Kannada, include_str!("../tables/kannada.tsv")),
    ("malayalam", ScriptClass::Malayalam, include_str!("../tables/malayalam.tsv")),
    ("tamil", ScriptClass::Tamil, include_str!("../tables/tamil.tsv")),
    ("telugu", ScriptClass::Telugu, include_str!("../tables/telugu.tsv")),
];

/// Romanizes the `script` portions of `text`; everything else passes through.
pub fn transliterate(text: &str, script: ScriptClass) -> Result<String> {
    Ok(TransliterationTable::builtin(script)?.apply(text))
}

/// Builds the synthetic adaptation corpus.
///
/// For every language all abstracts are kept; for languages not natively
/// written in Latin script a seeded ⌊fraction·n⌋ sample is additionally
/// transliterated. The labelled training texts are appended and a seeded
/// 95/5 train/eval partition is marked.
pub fn synthesize_augmented_corpus(
    abstracts: &BTreeMap<LanguageCondition, Vec<String>>,
    labelled: &[LabeledExample],
    sample_fraction: f64,
    seed: u64,
) -> Result<AdaptationCorpus> {
    if !(0.0..=1.0).contains(&sample_fraction) {
        return Err(Error::InvalidArgument(format!(
            "sample fraction must lie in [0, 1], got {sample_fraction}"
        )));
    }
    let mut corpus = AdaptationCorpus::new(Provenance::Synthetic);
    for (&language, docs) in abstracts {
        for doc in docs {
            corpus.push(doc.clone(), format!("abstract/{language}"));
        }
        if language.is_latin_native() {
            continue;
        }
        let table = TransliterationTable::builtin(language.native_script())?;
        let n = docs.len();
        let k = ((sample_fraction * n as f64) + 1e-9).floor() as usize;
        let mut rng = seed::rng(seed::derive_seed(seed, &format!("sample/{language}")));
        let mut picked = index::sample(&mut rng, n, k).into_vec();
        picked.sort_unstable();
        for i in picked {
            corpus.push(table.apply(&docs[i]), format!("translit/{language}"));
        }
    }
    corpus.extend_labelled(labelled);
    corpus.mark_random_partition(seed::derive_seed(seed, "partition/synthetic"));
    Ok(corpus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Label;
    use crate::script::{classify_word_script, latin_proportion, words};

    /// Hand application of the Devanagari rules to नमस्ते:
    /// न→n+a, म→m+a, स+्→s, त+े→t+ē.
    #[test]
    fn namaste_oracle() {
        assert_eq!(transliterate("नमस्ते", ScriptClass::Devanagari).unwrap(), "namastē");
    }

    #[test]
    fn known_words() {
        let cases = [
            ("हिन्दी", ScriptClass::Devanagari, "hindī"),
            ("क़िला", ScriptClass::Devanagari, "qilā"),
            ("क\u{093C}िला", ScriptClass::Devanagari, "qilā"),
            ("ज़\u{093E}", ScriptClass::Devanagari, "zā"),
            ("૧૨૩", ScriptClass::Gujarati, "123"),
            ("ગુજરાતી", ScriptClass::Gujarati, "gujarātī"),
            ("தமிழ்", ScriptClass::Tamil, "tamiḻ"),
            ("கொ", ScriptClass::Tamil, "ko"),
            ("க\u{0BC6}\u{0BBE}", ScriptClass::Tamil, "ko"),
            ("తెలుగు", ScriptClass::Telugu, "telugu"),
            ("ಕನ್ನಡ", ScriptClass::Kannada, "kannaḍa"),
            ("മലയാളം", ScriptClass::Malayalam, "malayāḷaṁ"),
            ("അവൻ", ScriptClass::Malayalam, "avan"),
            ("राम।", ScriptClass::Devanagari, "rāma."),
        ];
        for (input, script, expected) in cases {
            assert_eq!(transliterate(input, script).unwrap(), expected, "{input}");
        }
    }

    #[test]
    fn pass_through_and_errors() {
        assert_eq!(transliterate("hello", ScriptClass::Devanagari).unwrap(), "hello");
        assert_eq!(transliterate("", ScriptClass::Tamil).unwrap(), "");
        assert_eq!(transliterate("ok नमस्ते!", ScriptClass::Devanagari).unwrap(), "ok namastē!");
        assert!(matches!(
            transliterate("x", ScriptClass::Latin),
            Err(Error::UnsupportedScript(_))
        ));
        assert!(transliterate("x", ScriptClass::Neutral).is_err());
    }

    #[test]
    fn tables_cover_core_inventory() {
        // consonant KA, independent A, sign AA, virama, anusvara, digit zero
        let offsets = [0x15u32, 0x05, 0x3E, 0x4D, 0x02, 0x66];
        let bases = [
            (ScriptClass::Devanagari, 0x0900u32),
            (ScriptClass::Gujarati, 0x0A80),
            (ScriptClass::Tamil, 0x0B80),
            (ScriptClass::Telugu, 0x0C00),
            (ScriptClass::Kannada, 0x0C80),
            (ScriptClass::Malayalam, 0x0D00),
        ];
        for (script, base) in bases {
            let table = TransliterationTable::builtin(script).unwrap();
            assert!(table.version.contains("iso15919"));
            for off in offsets {
                let c = char::from_u32(base + off).unwrap().to_string();
                assert!(table.rules.iter().any(|r| r.source == c), "{script}: missing {c:?}");
            }
            if script != ScriptClass::Tamil {
                let visarga = char::from_u32(base + 0x03).unwrap().to_string();
                assert!(table.rules.iter().any(|r| r.source == visarga), "{script}: visarga");
            }
            for rule in &table.rules {
                assert!(rule.replacement.chars().count() <= 3, "{script}: {rule:?}");
            }
        }
    }

    #[test]
    fn parse_errors() {
        let bad = "#! version\tx\n[consonant]\nक\tk\nक\tg\n";
        assert!(TransliterationTable::parse("t", ScriptClass::Devanagari, bad).is_err());
        let bad = "#! version\tx\nक\tk\n";
        assert!(TransliterationTable::parse("t", ScriptClass::Devanagari, bad).is_err());
        let bad = "[consonant]\nक\tk\n";
        assert!(TransliterationTable::parse("t", ScriptClass::Devanagari, bad).is_err());
        let bad = "#! version\tx\n[consonant]\n\tk\n";
        assert!(TransliterationTable::parse("t", ScriptClass::Devanagari, bad).is_err());
    }

    #[test]
    fn every_rule_output_is_latin_or_neutral() {
        for script in ScriptClass::BRAHMIC {
            let table = TransliterationTable::builtin(script).unwrap();
            for rule in &table.rules {
                let out = table.apply(&rule.source);
                assert!(!out.chars().any(|c| in_script_block(c, script)), "{script} {rule:?} -> {out}");
                let class = classify_word_script(&out);
                assert!(
                    matches!(class, ScriptClass::Latin | ScriptClass::Neutral),
                    "{script} {rule:?} -> {out} ({class})"
                );
            }
        }
    }

    fn abstracts(n: usize) -> BTreeMap<LanguageCondition, Vec<String>> {
        let mut map = BTreeMap::new();
        map.insert(LanguageCondition::Eng, (0..n).map(|i| format!("english abstract {i}")).collect());
        map.insert(LanguageCondition::Hin, (0..n).map(|i| format!("नमस्ते दुनिया {i}")).collect());
        map
    }

    fn labelled() -> Vec<LabeledExample> {
        vec![LabeledExample {
            id: "a".into(),
            text: "labelled text".into(),
            language: LanguageCondition::Hin,
            label: Label::Homo,
        }]
    }

    #[test]
    fn synthesis_counts() {
        let corpus = synthesize_augmented_corpus(&abstracts(10), &labelled(), 0.5, 1).unwrap();
        let counts = corpus.source_counts();
        assert_eq!(counts["abstract/HIN"], 10);
        assert_eq!(counts["translit/HIN"], 5);
        assert_eq!(counts["abstract/ENG"], 10);
        assert!(!counts.contains_key("translit/ENG"));
        assert_eq!(counts["labelled/HIN"], 1);
        assert_eq!(corpus.provenance, Provenance::Synthetic);
        assert_eq!(corpus.partition_sizes(), (25, 1));
        for doc in corpus.documents.iter().filter(|d| d.source.starts_with("translit")) {
            assert_eq!(latin_proportion(&doc.text), Some(1.0));
        }

        let none = synthesize_augmented_corpus(&abstracts(4), &labelled(), 0.0, 1).unwrap();
        assert_eq!(none.len(), 9);
        let all = synthesize_augmented_corpus(&abstracts(4), &labelled(), 1.0, 1).unwrap();
        assert_eq!(all.source_counts()["translit/HIN"], 4);
        assert_eq!(all.len(), 8 + 4 + 1);

        assert!(synthesize_augmented_corpus(&abstracts(4), &labelled(), 1.5, 1).is_err());
        assert!(synthesize_augmented_corpus(&abstracts(4), &labelled(), -0.1, 1).is_err());

        let again = synthesize_augmented_corpus(&abstracts(10), &labelled(), 0.5, 1).unwrap();
        assert_eq!(corpus, again);
    }

    #[test]
    fn paper_scale_sample() {
        let mut map = BTreeMap::new();
        map.insert(LanguageCondition::Guj, (0..10_000).map(|i| format!("ગુજરાતી {i}")).collect());
        let corpus = synthesize_augmented_corpus(&map, &[], 0.5, 9).unwrap();
        let counts = corpus.source_counts();
        assert_eq!((counts["abstract/GUJ"], counts["translit/GUJ"]), (10_000, 5_000));
    }

    #[test]
    fn mixed_tokens_after_transliteration() {
        let out = transliterate("मेरा phone नंबर 42 है", ScriptClass::Devanagari).unwrap();
        assert_eq!(out, "mērā phone naṁbara 42 hai");
        assert!(words(&out).all(|w| matches!(classify_word_script(w), ScriptClass::Latin | ScriptClass::Neutral)));
    }
}
