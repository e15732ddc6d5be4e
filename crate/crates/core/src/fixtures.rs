//! Deterministic synthetic data for tests, demos and benchmarks.
//!
//! English and Spanish text is drawn from small real word lists. The Indic
//! languages use pseudo-words assembled from each script's consonants and
//! vowel signs, with a fixed per-language inventory so that languages sharing
//! a script (HIN/MAR, KAN/TCY) still have distinct character statistics.
//! Minority-label documents carry label marker words; documents are
//! romanized at per-language rates, and marker words are additionally
//! romanized on their own at `marker_romanization`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{write_dataset, Label, LabeledExample, LanguageCondition};
use crate::error::{Error, Result};
use crate::io::{write_documents, write_file};
use crate::script::ScriptClass;
use crate::seed;
use crate::translit::{RuleKind, TransliterationTable};

/// Observations per language in the shared-task training data.
pub const SHARED_TASK_SIZES: [(LanguageCondition, usize); 10] = [
    (LanguageCondition::Kan, 12220),
    (LanguageCondition::Tel, 10990),
    (LanguageCondition::Guj, 9859),
    (LanguageCondition::Mal, 4327),
    (LanguageCondition::Mar, 4250),
    (LanguageCondition::Eng, 3956),
    (LanguageCondition::Tam, 3328),
    (LanguageCondition::Hin, 2880),
    (LanguageCondition::Esp, 1586),
    (LanguageCondition::Tcy, 730),
];

/// NONE/HOMO/TRANS proportions per language.
pub const CLASS_RATES: [(LanguageCondition, [f64; 3]); 10] = [
    (LanguageCondition::Eng, [3496.0 / 3726.0, 221.0 / 3726.0, 9.0 / 3726.0]),
    (LanguageCondition::Esp, [0.57, 0.22, 0.22]),
    (LanguageCondition::Guj, [0.47, 0.28, 0.25]),
    (LanguageCondition::Hin, [0.95, 0.02, 0.04]),
    (LanguageCondition::Kan, [0.44, 0.27, 0.28]),
    (LanguageCondition::Mal, [0.79, 0.16, 0.06]),
    (LanguageCondition::Mar, [0.73, 0.16, 0.11]),
    (LanguageCondition::Tam, [0.77, 0.17, 0.06]),
    (LanguageCondition::Tcy, [0.74, 0.26, 0.0]),
    (LanguageCondition::Tel, [0.39, 0.32, 0.30]),
];

/// English label counts: 3,726 observations, 221 HOMO, 9 TRANS.
pub const ENG_LABEL_COUNTS: [usize; 3] = [3496, 221, 9];

const LEXICON_SEED: u64 = 0x5c41_7a1c_0de5_eed5;
const LEXICON_SIZE: usize = 480;
const MARKERS_PER_LABEL: usize = 6;
/// Chance that a general-register sentence mentions a marker word.
const BACKGROUND_MARKER_RATE: f64 = 0.04;

const ENGLISH: &[&str] = &[
    "the", "of", "and", "to", "in", "is", "you", "that", "it", "he", "was", "for", "on", "are", "as", "with", "his",
    "they", "at", "be", "this", "have", "from", "or", "one", "had", "by", "word", "but", "not", "what", "all", "were",
    "we", "when", "your", "can", "said", "there", "use", "each", "which", "she", "do", "how", "their", "if", "will",
    "up", "other", "about", "out", "many", "then", "them", "these", "so", "some", "her", "would", "make", "like",
    "him", "into", "time", "has", "look", "two", "more", "write", "go", "see", "number", "way", "could", "people",
    "my", "than", "first", "water", "been", "call", "who", "its", "now", "find", "long", "down", "day", "did", "get",
    "come", "made", "may", "part", "video", "song", "love", "movie", "watch", "really", "great", "good", "best",
    "channel", "music", "friends", "family", "beautiful", "happy", "life", "world", "always", "never", "thank",
    "please", "share", "support", "everyone", "amazing", "heart", "proud", "respect", "comment", "today", "year",
    "because", "why", "just", "know", "think", "should", "those", "every", "right", "still", "where", "after",
];

const SPANISH: &[&str] = &[
    "de", "la", "que", "el", "en", "y", "a", "los", "se", "del", "las", "un", "por", "con", "no", "una", "su", "para",
    "es", "al", "lo", "como", "más", "pero", "sus", "le", "ya", "o", "este", "sí", "porque", "esta", "entre",
    "cuando", "muy", "sin", "sobre", "también", "me", "hasta", "hay", "donde", "quien", "desde", "todo", "nos",
    "durante", "todos", "uno", "les", "ni", "contra", "otros", "ese", "eso", "ante", "ellos", "e", "esto", "mí",
    "antes", "algunos", "qué", "unos", "yo", "otro", "otras", "otra", "él", "tanto", "esa", "estos", "mucho",
    "quienes", "nada", "muchos", "cual", "poco", "ella", "estar", "estas", "algunas", "algo", "nosotros", "mi",
    "mis", "tú", "te", "ti", "tu", "tus", "ellas", "vídeo", "canción", "amor", "película", "gracias", "hermoso",
    "feliz", "vida", "mundo", "siempre", "nunca", "familia", "amigos", "respeto", "orgullo", "comentario", "hoy",
    "año", "gente", "bueno", "mejor", "música", "canal", "corazón", "apoyo", "todas", "saludos", "verdad",
];

const ENGLISH_MARKERS: [&[&str]; 2] = [
    &["unnatural", "abnormal", "sinful", "disgusting", "perverted", "deviant"],
    &["pretending", "costume", "delusional", "confused", "mutilated", "freakish"],
];

const SPANISH_MARKERS: [&[&str]; 2] = [
    &["antinatural", "anormal", "pecaminoso", "asqueroso", "pervertido", "desviado"],
    &["disfrazado", "fingiendo", "delirante", "confundido", "mutilado", "engendro"],
];

/// Share of documents written natively, word-by-word mixed, and fully
/// romanized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RomanizationProfile {
    pub native: f64,
    pub mixed: f64,
    pub full: f64,
}

impl RomanizationProfile {
    /// Rough per-language script-switching habits of the labelled data.
    pub fn for_language(language: LanguageCondition) -> Self {
        use LanguageCondition::*;
        let (native, mixed, full) = match language {
            Eng | Esp => (1.0, 0.0, 0.0),
            Guj | Kan | Tel => (0.92, 0.06, 0.02),
            Tam => (0.80, 0.15, 0.05),
            Mar => (0.45, 0.25, 0.30),
            Mal => (0.25, 0.30, 0.45),
            Tcy => (0.10, 0.10, 0.80),
            Hin => (0.05, 0.10, 0.85),
        };
        RomanizationProfile { native, mixed, full }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Native,
    Mixed,
    Full,
}

/// Word inventory of one language.
#[derive(Debug, Clone)]
pub struct Lexicon {
    pub language: LanguageCondition,
    pub words: Vec<String>,
    /// HOMO then TRANS marker words.
    pub markers: [Vec<String>; 2],
    zipf: WeightedIndex<f64>,
    table: Option<&'static TransliterationTable>,
}

struct Inventory {
    consonants: Vec<String>,
    consonant_weights: WeightedIndex<f64>,
    signs: Vec<String>,
    vowels: Vec<String>,
    virama: String,
    final_virama: f64,
}

impl Inventory {
    fn new(table: &TransliterationTable, rng: &mut ChaCha8Rng, final_virama: f64) -> Inventory {
        let single = |kind: RuleKind| -> Vec<String> {
            let mut v: Vec<String> = table
                .rules
                .iter()
                .filter(|r| r.kind == kind && r.source.chars().count() == 1)
                .map(|r| r.source.clone())
                .collect();
            v.sort();
            v
        };
        let mut consonants = single(RuleKind::Consonant);
        consonants.shuffle(rng);
        consonants.truncate((consonants.len() * 3 / 4).max(12));
        let mut signs = single(RuleKind::Sign);
        signs.shuffle(rng);
        signs.truncate(signs.len().min(7));
        let mut vowels = single(RuleKind::Vowel);
        vowels.shuffle(rng);
        vowels.truncate(4);
        let virama = single(RuleKind::Virama).into_iter().next().unwrap_or_default();
        let weights: Vec<f64> = (0..consonants.len()).map(|i| 1.0 / (i as f64 + 1.5)).collect();
        Inventory {
            consonant_weights: WeightedIndex::new(weights).expect("non-empty consonant inventory"),
            consonants,
            signs,
            vowels,
            virama,
            final_virama,
        }
    }

    fn word(&self, rng: &mut ChaCha8Rng) -> String {
        let syllables = [1usize, 2, 2, 2, 3, 3, 3, 4][rng.gen_range(0..8)];
        let mut w = String::new();
        if rng.gen_bool(0.1) && !self.vowels.is_empty() {
            w.push_str(&self.vowels[rng.gen_range(0..self.vowels.len())]);
        }
        for s in 0..syllables {
            w.push_str(&self.consonants[self.consonant_weights.sample(rng)]);
            if !self.virama.is_empty() && rng.gen_bool(0.08) && s + 1 < syllables {
                w.push_str(&self.virama);
                w.push_str(&self.consonants[self.consonant_weights.sample(rng)]);
            }
            if rng.gen_bool(0.6) && !self.signs.is_empty() {
                w.push_str(&self.signs[rng.gen_range(0..self.signs.len())]);
            }
        }
        if !self.virama.is_empty() && rng.gen_bool(self.final_virama) {
            w.push_str(&self.virama);
        }
        w
    }
}

fn zipf(n: usize) -> WeightedIndex<f64> {
    WeightedIndex::new((0..n).map(|i| 1.0 / (i as f64 + 2.0))).expect("non-empty lexicon")
}

impl Lexicon {
    fn build(language: LanguageCondition) -> Lexicon {
        let mut rng = seed::rng(seed::derive_seed(LEXICON_SEED, &format!("lexicon/{language}")));
        let (words, markers, table) = match language {
            LanguageCondition::Eng | LanguageCondition::Esp => {
                let (list, markers) = if language == LanguageCondition::Eng {
                    (ENGLISH, ENGLISH_MARKERS)
                } else {
                    (SPANISH, SPANISH_MARKERS)
                };
                let mut words: Vec<String> = list.iter().map(|w| w.to_string()).collect();
                // Function words lead the list; keep them frequent.
                words[20..].shuffle(&mut rng);
                let markers = markers.map(|m| m.iter().map(|w| w.to_string()).collect());
                (words, markers, None)
            }
            _ => {
                let table = TransliterationTable::builtin(language.native_script()).expect("Indic scripts have tables");
                let final_virama = match language.native_script() {
                    ScriptClass::Tamil | ScriptClass::Malayalam => 0.35,
                    _ => 0.05,
                };
                let inventory = Inventory::new(table, &mut rng, final_virama);
                let mut seen = std::collections::HashSet::new();
                let mut all = Vec::new();
                while all.len() < LEXICON_SIZE + 2 * MARKERS_PER_LABEL {
                    let w = inventory.word(&mut rng);
                    if seen.insert(w.clone()) {
                        all.push(w);
                    }
                }
                let trans = all.split_off(all.len() - MARKERS_PER_LABEL);
                let homo = all.split_off(all.len() - MARKERS_PER_LABEL);
                (all, [homo, trans], Some(table))
            }
        };
        Lexicon {
            language,
            zipf: zipf(words.len()),
            words,
            markers,
            table,
        }
    }

    /// Shared lexicon of `language`; identical across runs and seeds.
    pub fn get(language: LanguageCondition) -> &'static Lexicon {
        static ALL: OnceLock<Vec<Lexicon>> = OnceLock::new();
        let all = ALL.get_or_init(|| LanguageCondition::ALL.iter().map(|&l| Lexicon::build(l)).collect());
        &all[LanguageCondition::ALL.iter().position(|&l| l == language).expect("known language")]
    }

    fn word(&self, rng: &mut ChaCha8Rng) -> &str {
        &self.words[self.zipf.sample(rng)]
    }

    pub fn romanize(&self, word: &str) -> String {
        match self.table {
            Some(t) => t.apply(word),
            None => word.to_string(),
        }
    }

    fn sample_mode(&self, rng: &mut ChaCha8Rng, profile: RomanizationProfile) -> Mode {
        let x: f64 = rng.gen();
        if x < profile.native {
            Mode::Native
        } else if x < profile.native + profile.mixed {
            Mode::Mixed
        } else {
            Mode::Full
        }
    }

    fn finish(&self, words: Vec<String>, rng: &mut ChaCha8Rng) -> String {
        let mut text = words.join(" ");
        if self.table.is_none() {
            let mut chars = text.chars();
            if let Some(first) = chars.next() {
                text = first.to_uppercase().chain(chars).collect();
            }
        }
        match rng.gen_range(0..6) {
            0 => text.push('!'),
            1 => text.push('.'),
            _ => {}
        }
        text
    }

    fn words(&self, rng: &mut ChaCha8Rng, min: usize, max: usize) -> Vec<String> {
        let n = rng.gen_range(min..=max);
        (0..n).map(|_| self.word(rng).to_string()).collect()
    }

    /// A general-register native-script sentence of at least `min_chars`
    /// characters, occasionally mentioning a marker word.
    pub fn sentence(&self, rng: &mut ChaCha8Rng, min_chars: usize) -> String {
        let mut words = self.words(rng, 6, 14);
        if rng.gen_bool(BACKGROUND_MARKER_RATE) {
            let markers = &self.markers[rng.gen_range(0..2)];
            let at = rng.gen_range(0..=words.len());
            words.insert(at, markers[rng.gen_range(0..markers.len())].clone());
        }
        while words.iter().map(|w| w.chars().count() + 1).sum::<usize>() < min_chars + 1 {
            words.push(self.word(rng).to_string());
        }
        self.finish(words, rng)
    }

    /// A labelled social-media style comment.
    pub fn comment(
        &self,
        rng: &mut ChaCha8Rng,
        label: Label,
        profile: RomanizationProfile,
        marker_romanization: f64,
    ) -> String {
        let mode = self.sample_mode(rng, profile);
        let mut words = self.words(rng, 4, 12);
        let marker_count = match label {
            Label::None => usize::from(rng.gen_bool(0.02)),
            _ if rng.gen_bool(0.9) => rng.gen_range(1..=2),
            _ => 0,
        };
        let mut marker_slots = Vec::new();
        for _ in 0..marker_count {
            let kind = match label {
                Label::Homo => 0,
                Label::Trans => 1,
                Label::None => rng.gen_range(0..2),
            };
            let markers = &self.markers[kind];
            let at = rng.gen_range(0..=words.len());
            words.insert(at, markers[rng.gen_range(0..markers.len())].clone());
            marker_slots.iter_mut().for_each(|s: &mut usize| {
                if *s >= at {
                    *s += 1
                }
            });
            marker_slots.push(at);
        }
        for (i, w) in words.iter_mut().enumerate() {
            let romanize = match mode {
                Mode::Native => false,
                Mode::Full => true,
                Mode::Mixed => rng.gen_bool(0.5),
            } || (marker_slots.contains(&i) && rng.gen_bool(marker_romanization));
            if romanize {
                *w = self.romanize(w);
            }
        }
        self.finish(words, rng)
    }
}

/// Label counts for `n` observations of `language`: HOMO and TRANS rounded
/// from the class rates, NONE takes the rest.
pub fn label_counts_for(language: LanguageCondition, n: usize) -> [usize; 3] {
    let rates = CLASS_RATES.iter().find(|(l, _)| *l == language).map(|(_, r)| *r).expect("known language");
    let homo = (rates[1] * n as f64).round() as usize;
    let trans = (rates[2] * n as f64).round() as usize;
    let homo = homo.min(n);
    let trans = trans.min(n - homo);
    [n - homo - trans, homo, trans]
}

/// Labelled examples with exactly `counts` NONE/HOMO/TRANS in seeded order.
pub fn labelled_with_counts(
    language: LanguageCondition,
    counts: [usize; 3],
    marker_romanization: f64,
    seed: u64,
) -> Vec<LabeledExample> {
    let lexicon = Lexicon::get(language);
    let profile = RomanizationProfile::for_language(language);
    let mut labels: Vec<Label> = Label::ALL
        .iter()
        .zip(counts)
        .flat_map(|(&l, c)| std::iter::repeat(l).take(c))
        .collect();
    let mut rng = seed::substream(seed, &format!("fixture/labelled/{language}"));
    labels.shuffle(&mut rng);
    labels
        .into_iter()
        .enumerate()
        .map(|(i, label)| LabeledExample {
            id: format!("{language}-{i}"),
            text: lexicon.comment(&mut rng, label, profile, marker_romanization),
            language,
            label,
        })
        .collect()
}

pub fn labelled_dataset(
    language: LanguageCondition,
    n: usize,
    marker_romanization: f64,
    seed: u64,
) -> Vec<LabeledExample> {
    labelled_with_counts(language, label_counts_for(language, n), marker_romanization, seed)
}

/// Ten datasets sized as the shared-task training data.
pub fn shared_task_datasets(seed: u64) -> BTreeMap<LanguageCondition, Vec<LabeledExample>> {
    SHARED_TASK_SIZES
        .iter()
        .map(|&(l, n)| (l, labelled_dataset(l, n, 0.3, seed)))
        .collect()
}

/// The English dataset with 3,496/221/9 NONE/HOMO/TRANS examples.
pub fn eng_class_balance_dataset(seed: u64) -> Vec<LabeledExample> {
    labelled_with_counts(LanguageCondition::Eng, ENG_LABEL_COUNTS, 0.0, seed)
}

/// Native-script sentences of at least `min_chars` characters.
pub fn sentences(language: LanguageCondition, n: usize, min_chars: usize, stream: &str, seed: u64) -> Vec<String> {
    let lexicon = Lexicon::get(language);
    let mut rng = seed::substream(seed, &format!("fixture/{stream}/{language}"));
    (0..n).map(|_| lexicon.sentence(&mut rng, min_chars)).collect()
}

/// Unlabelled general-register text, one document per line.
pub fn abstracts(language: LanguageCondition, n: usize, seed: u64) -> Vec<String> {
    sentences(language, n, 0, "abstracts", seed)
}

/// Held-out sentences for language identification.
pub fn heldout_sentences(language: LanguageCondition, n: usize, min_chars: usize, seed: u64) -> Vec<String> {
    sentences(language, n, min_chars, "heldout", seed)
}

/// An unlabelled multilingual stream: comments from every language at
/// their romanization habits, interleaved with short noise lines.
pub fn organic_stream(n: usize, seed: u64) -> Vec<String> {
    const NOISE: &[&str] = &["ok", "👍👍", "123", "lol", "???", "nice", "🙏", "first", "www", "hmm"];
    let mut rng = seed::substream(seed, "fixture/stream");
    (0..n)
        .map(|_| {
            if rng.gen_bool(0.1) {
                return NOISE[rng.gen_range(0..NOISE.len())].to_string();
            }
            let language = LanguageCondition::ALL[rng.gen_range(0..LanguageCondition::ALL.len())];
            let lexicon = Lexicon::get(language);
            lexicon.comment(&mut rng, Label::None, RomanizationProfile::for_language(language), 0.0)
        })
        .collect()
}

/// Five Malayalam comments with Latin proportions 0, 0, 2/3, 1 and 1.
pub fn mal_script_mix_fixture() -> Vec<LabeledExample> {
    let texts = [
        "മലയാളം നല്ല ഭാഷ",
        "ഞാൻ വരാം",
        "njan varam ഇന്ന്",
        "enthu parayan",
        "adipoli movie",
    ];
    texts
        .iter()
        .enumerate()
        .map(|(i, t)| LabeledExample {
            id: format!("MAL-{i}"),
            text: t.to_string(),
            language: LanguageCondition::Mal,
            label: Label::None,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FixtureConfig {
    /// Multiplier on the shared-task dataset sizes.
    pub scale: f64,
    pub abstracts_per_language: usize,
    pub stream_size: usize,
    pub heldout_per_language: usize,
    pub marker_romanization: f64,
}

impl Default for FixtureConfig {
    fn default() -> Self {
        FixtureConfig {
            scale: 0.25,
            abstracts_per_language: 1500,
            stream_size: 20000,
            heldout_per_language: 500,
            marker_romanization: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureBundle {
    pub datasets: BTreeMap<LanguageCondition, Vec<LabeledExample>>,
    pub abstracts: BTreeMap<LanguageCondition, Vec<String>>,
    pub stream: Vec<String>,
    pub heldout: BTreeMap<LanguageCondition, Vec<String>>,
}

pub fn generate(config: &FixtureConfig, seed: u64) -> Result<FixtureBundle> {
    if !(config.scale > 0.0) || !(0.0..=1.0).contains(&config.marker_romanization) {
        return Err(Error::InvalidArgument(format!("invalid fixture configuration {config:?}")));
    }
    let mut bundle = FixtureBundle {
        datasets: BTreeMap::new(),
        abstracts: BTreeMap::new(),
        stream: organic_stream(config.stream_size, seed),
        heldout: BTreeMap::new(),
    };
    for &(language, n) in &SHARED_TASK_SIZES {
        let n = ((n as f64 * config.scale).round() as usize).max(20);
        bundle
            .datasets
            .insert(language, labelled_dataset(language, n, config.marker_romanization, seed));
        bundle
            .abstracts
            .insert(language, abstracts(language, config.abstracts_per_language, seed));
        bundle
            .heldout
            .insert(language, heldout_sentences(language, config.heldout_per_language, 40, seed));
    }
    Ok(bundle)
}

impl FixtureBundle {
    /// Writes `data/<LANG>.tsv`, `abstracts/<LANG>.txt`, `heldout/<LANG>.txt`
    /// and `stream.txt` under `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (language, examples) in &self.datasets {
            write_file(
                &dir.join("data").join(format!("{language}.tsv")),
                write_dataset(examples).as_bytes(),
            )?;
        }
        for (language, docs) in &self.abstracts {
            write_documents(
                &dir.join("abstracts").join(format!("{language}.txt")),
                docs.iter().map(String::as_str),
            )?;
        }
        for (language, docs) in &self.heldout {
            write_documents(
                &dir.join("heldout").join(format!("{language}.txt")),
                docs.iter().map(String::as_str),
            )?;
        }
        write_documents(&dir.join("stream.txt"), self.stream.iter().map(String::as_str))
    }
}
