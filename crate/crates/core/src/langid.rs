//! Character n-gram language profiles, an out-of-place rank distance
//! detector over them, and mining of organic documents from raw streams.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use unicode_script::{Script, UnicodeScript};

use crate::adaptation::{AdaptationCorpus, Provenance};
use crate::corpus::LanguageCondition;
use crate::error::{Error, Result};

pub const DEFAULT_PROFILE_SIZE: usize = 300;
pub const MAX_NGRAM: usize = 3;
pub const MIN_PROFILE_TEXT: usize = 100;
pub const MIN_DETECT_TEXT: usize = 20;
const PAD: char = '_';
const PROFILE_FORMAT: &str = "scriptswitch-profile/1";

/// Lowercases Latin letters, drops control characters and collapses
/// whitespace runs to a single space.
pub fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for c in text.chars() {
        if c.is_whitespace() {
            pending_space = true;
        } else if c.is_control() {
            continue;
        } else {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            if c.script() == Script::Latin {
                out.extend(c.to_lowercase());
            } else {
                out.push(c);
            }
        }
    }
    out
}

/// Counts n-grams (n = 1..=max_n) of every whitespace token padded with one
/// `_` on each side. Expects normalized text.
pub fn count_ngrams(normalized: &str, max_n: usize, counts: &mut HashMap<String, u64>) -> u64 {
    let mut seen = 0;
    let mut padded: Vec<char> = Vec::new();
    for token in normalized.split(' ').filter(|t| !t.is_empty()) {
        padded.clear();
        padded.push(PAD);
        padded.extend(token.chars());
        padded.push(PAD);
        for n in 1..=max_n {
            for window in padded.windows(n) {
                *counts.entry(window.iter().collect()).or_default() += 1;
                seen += 1;
            }
        }
    }
    seen
}

/// Most frequent first, ties lexicographic; truncated to `k`.
fn rank(counts: HashMap<String, u64>, k: usize) -> Vec<(String, usize)> {
    let mut entries: Vec<(String, u64)> = counts.into_iter().collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    entries
        .into_iter()
        .take(k)
        .enumerate()
        .map(|(i, (gram, _))| (gram, i + 1))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageProfile {
    pub language: LanguageCondition,
    /// Requested profile size; absent n-grams cost this much.
    pub k: usize,
    pub ngram_ranks: Vec<(String, usize)>,
    pub total_ngrams_seen: u64,
    pub version: String,
}

pub fn build_profile<'a, I>(texts: I, language: LanguageCondition, k: usize) -> Result<LanguageProfile>
where
    I: IntoIterator<Item = &'a str>,
{
    if k == 0 {
        return Err(Error::InvalidArgument("profile size must be positive".into()));
    }
    let mut counts = HashMap::new();
    let mut total = 0;
    let mut length = 0;
    for text in texts {
        let norm = normalize(text);
        length += norm.chars().count();
        total += count_ngrams(&norm, MAX_NGRAM, &mut counts);
    }
    if length < MIN_PROFILE_TEXT {
        return Err(Error::TextTooShort {
            len: length,
            min: MIN_PROFILE_TEXT,
        });
    }
    Ok(LanguageProfile {
        language,
        k,
        ngram_ranks: rank(counts, k),
        total_ngrams_seen: total,
        version: format!("{PROFILE_FORMAT};k={k};n=1-{MAX_NGRAM}"),
    })
}

impl LanguageProfile {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "#! format\t{PROFILE_FORMAT}");
        let _ = writeln!(out, "#! language\t{}", self.language);
        let _ = writeln!(out, "#! k\t{}", self.k);
        let _ = writeln!(out, "#! total\t{}", self.total_ngrams_seen);
        let _ = writeln!(out, "#! version\t{}", self.version);
        for (gram, rank) in &self.ngram_ranks {
            let _ = writeln!(out, "{gram}\t{rank}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |msg: String| Error::Format(format!("language profile: {msg}"));
        let mut header: HashMap<&str, &str> = HashMap::new();
        let mut ranks = Vec::new();
        for line in text.lines().filter(|l| !l.is_empty()) {
            let (key, value) = line.split_once('\t').ok_or_else(|| bad(format!("malformed line {line:?}")))?;
            if let Some(key) = key.strip_prefix("#! ") {
                header.insert(key, value);
            } else {
                let rank: usize = value.parse().map_err(|_| bad(format!("bad rank {value:?}")))?;
                if rank != ranks.len() + 1 {
                    return Err(bad(format!("rank gap at {key:?}")));
                }
                ranks.push((key.to_string(), rank));
            }
        }
        let field = |k: &str| header.get(k).copied().ok_or_else(|| bad(format!("missing {k}")));
        if field("format")? != PROFILE_FORMAT {
            return Err(bad(format!("unsupported format {:?}", field("format")?)));
        }
        Ok(LanguageProfile {
            language: field("language")?.parse()?,
            k: field("k")?.parse().map_err(|_| bad("bad k".into()))?,
            total_ngrams_seen: field("total")?.parse().map_err(|_| bad("bad total".into()))?,
            version: field("version")?.to_string(),
            ngram_ranks: ranks,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    /// Ascending by distance, ties by language code.
    pub candidates: Vec<(LanguageCondition, f64)>,
    /// Distance gap between the first and second candidate.
    pub margin: f64,
}

impl DetectionResult {
    pub fn top(&self) -> LanguageCondition {
        self.candidates[0].0
    }
}

/// Profiles with their rank lookup tables built once.
#[derive(Debug, Clone)]
pub struct Detector {
    profiles: Vec<(LanguageProfile, HashMap<String, usize>)>,
}

impl Detector {
    pub fn new(profiles: Vec<LanguageProfile>) -> Result<Self> {
        if profiles.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "language detection needs at least 2 profiles, got {}",
                profiles.len()
            )));
        }
        Ok(Detector {
            profiles: profiles
                .into_iter()
                .map(|p| {
                    let lookup = p.ngram_ranks.iter().cloned().collect();
                    (p, lookup)
                })
                .collect(),
        })
    }

    pub fn profiles(&self) -> impl Iterator<Item = &LanguageProfile> {
        self.profiles.iter().map(|(p, _)| p)
    }

    pub fn detect(&self, text: &str) -> Result<DetectionResult> {
        let norm = normalize(text);
        let len = norm.chars().count();
        if len < MIN_DETECT_TEXT {
            return Err(Error::TextTooShort {
                len,
                min: MIN_DETECT_TEXT,
            });
        }
        let mut counts = HashMap::new();
        count_ngrams(&norm, MAX_NGRAM, &mut counts);
        let k = self.profiles.iter().map(|(p, _)| p.k).max().unwrap_or(DEFAULT_PROFILE_SIZE);
        let doc = rank(counts, k);
        let mut candidates: Vec<(LanguageCondition, f64)> = self
            .profiles
            .iter()
            .map(|(profile, lookup)| (profile.language, out_of_place(&doc, lookup, profile.k) as f64))
            .collect();
        candidates.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        let margin = candidates[1].1 - candidates[0].1;
        Ok(DetectionResult { candidates, margin })
    }
}

/// Sum of rank displacements; n-grams missing from the profile cost `k`.
pub fn out_of_place(doc: &[(String, usize)], profile: &HashMap<String, usize>, k: usize) -> u64 {
    doc.iter()
        .map(|(gram, rank)| match profile.get(gram) {
            Some(&r) => r.abs_diff(*rank) as u64,
            None => k as u64,
        })
        .sum()
}

pub fn detect_language(text: &str, profiles: &[LanguageProfile]) -> Result<DetectionResult> {
    Detector::new(profiles.to_vec())?.detect(text)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiningParams {
    pub min_margin: f64,
    pub min_length: usize,
    /// Cap per target language.
    pub max_docs: usize,
}

impl Default for MiningParams {
    fn default() -> Self {
        MiningParams {
            min_margin: 0.0,
            min_length: MIN_DETECT_TEXT,
            max_docs: usize::MAX,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MiningStats {
    pub examined: usize,
    pub retained: BTreeMap<LanguageCondition, usize>,
    pub rejected_short: usize,
    pub rejected_language: usize,
    pub rejected_margin: usize,
    pub rejected_cap: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinedCorpus {
    pub corpus: AdaptationCorpus,
    pub stats: MiningStats,
}

pub fn mine_organic<I>(stream: I, target: LanguageCondition, detector: &Detector, params: MiningParams) -> MinedCorpus
where
    I: IntoIterator<Item = String>,
{
    mine_organic_multi(stream, &[target], detector, params)
}

const MINING_CHUNK: usize = 2048;

/// Single pass over `stream` assigning each document to its top-1 language
/// when that language is a target. Equivalent to merging per-target runs of
/// [`mine_organic`] in stream order.
pub fn mine_organic_multi<I>(
    stream: I,
    targets: &[LanguageCondition],
    detector: &Detector,
    params: MiningParams,
) -> MinedCorpus
where
    I: IntoIterator<Item = String>,
{
    let mut corpus = AdaptationCorpus::new(Provenance::Organic);
    let mut stats = MiningStats::default();
    let mut iter = stream.into_iter();
    let saturated = |stats: &MiningStats| {
        targets
            .iter()
            .all(|t| stats.retained.get(t).copied().unwrap_or(0) >= params.max_docs)
    };
    while !saturated(&stats) {
        let chunk: Vec<String> = iter.by_ref().take(MINING_CHUNK).collect();
        if chunk.is_empty() {
            break;
        }
        let scored: Vec<Option<DetectionResult>> = chunk
            .par_iter()
            .map(|doc| {
                let len = normalize(doc).chars().count();
                if len < params.min_length.max(MIN_DETECT_TEXT) {
                    None
                } else {
                    detector.detect(doc).ok()
                }
            })
            .collect();
        for (doc, result) in chunk.into_iter().zip(scored) {
            if saturated(&stats) {
                break;
            }
            stats.examined += 1;
            let Some(result) = result else {
                stats.rejected_short += 1;
                continue;
            };
            let top = result.top();
            if !targets.contains(&top) {
                stats.rejected_language += 1;
            } else if result.margin < params.min_margin {
                stats.rejected_margin += 1;
            } else if stats.retained.get(&top).copied().unwrap_or(0) >= params.max_docs {
                stats.rejected_cap += 1;
            } else {
                *stats.retained.entry(top).or_default() += 1;
                corpus.push(doc, format!("organic/{top}"));
            }
        }
    }
    corpus.mark_tail_partition();
    MinedCorpus { corpus, stats }
}
