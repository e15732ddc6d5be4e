//! Provenance-tagged document collections used to fit feature models.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::corpus::LabeledExample;
use crate::error::{Error, Result};
use crate::io;
use crate::seed;

/// Share of every adaptation corpus held out for evaluation.
pub const EVAL_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Provenance {
    Baseline,
    Synthetic,
    Organic,
}

impl Provenance {
    pub const ALL: [Provenance; 3] = [Provenance::Baseline, Provenance::Synthetic, Provenance::Organic];

    pub fn code(self) -> &'static str {
        match self {
            Provenance::Baseline => "BASELINE",
            Provenance::Synthetic => "SYNTHETIC",
            Provenance::Organic => "ORGANIC",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.code())
    }
}

impl std::str::FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Provenance::ALL
            .into_iter()
            .find(|p| p.code().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown corpus variant {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Partition {
    Train,
    Eval,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusDocument {
    pub text: String,
    /// Where the document came from, e.g. `abstract/GUJ` or `translit/GUJ`.
    pub source: String,
    pub partition: Partition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptationCorpus {
    pub provenance: Provenance,
    pub documents: Vec<CorpusDocument>,
}

impl AdaptationCorpus {
    pub fn new(provenance: Provenance) -> Self {
        AdaptationCorpus {
            provenance,
            documents: Vec::new(),
        }
    }

    /// The labelled training texts alone; the corpus behind the baseline
    /// feature model.
    pub fn from_labelled(labelled: &[LabeledExample], seed: u64) -> Self {
        let mut corpus = AdaptationCorpus::new(Provenance::Baseline);
        corpus.extend_labelled(labelled);
        corpus.mark_random_partition(seed);
        corpus
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn push(&mut self, text: impl Into<String>, source: impl Into<String>) {
        self.documents.push(CorpusDocument {
            text: text.into(),
            source: source.into(),
            partition: Partition::Train,
        });
    }

    pub fn extend_labelled(&mut self, labelled: &[LabeledExample]) {
        for ex in labelled {
            self.push(ex.text.clone(), format!("labelled/{}", ex.language));
        }
    }

    pub fn train_documents(&self) -> impl Iterator<Item = &CorpusDocument> {
        self.documents.iter().filter(|d| d.partition == Partition::Train)
    }

    pub fn partition_sizes(&self) -> (usize, usize) {
        let train = self.train_documents().count();
        (train, self.len() - train)
    }

    /// Marks ⌊5%⌋ of documents, chosen uniformly with `seed`, as eval.
    pub fn mark_random_partition(&mut self, seed: u64) {
        let n = self.len();
        let n_eval = eval_count(n);
        for doc in &mut self.documents {
            doc.partition = Partition::Train;
        }
        for i in index::sample(&mut seed::rng(seed), n, n_eval) {
            self.documents[i].partition = Partition::Eval;
        }
    }

    /// Marks the trailing ⌊5%⌋ of documents as eval, keeping order intact.
    pub fn mark_tail_partition(&mut self) {
        let n = self.len();
        let boundary = n - eval_count(n);
        for (i, doc) in self.documents.iter_mut().enumerate() {
            doc.partition = if i < boundary { Partition::Train } else { Partition::Eval };
        }
    }

    pub fn source_counts(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for doc in &self.documents {
            *counts.entry(doc.source.clone()).or_default() += 1;
        }
        counts
    }

    /// Writes `<stem>.train.txt`, `<stem>.eval.txt` and `<stem>.manifest.json`.
    pub fn save(&self, dir: &Path, stem: &str, extra: serde_json::Value) -> Result<()> {
        let pick = |p: Partition| self.documents.iter().filter(move |d| d.partition == p);
        io::write_documents(&dir.join(format!("{stem}.train.txt")), pick(Partition::Train).map(|d| d.text.as_str()))?;
        io::write_documents(&dir.join(format!("{stem}.eval.txt")), pick(Partition::Eval).map(|d| d.text.as_str()))?;
        let manifest = CorpusManifest {
            format: CORPUS_FORMAT.to_string(),
            provenance: self.provenance,
            train_sources: runs(pick(Partition::Train)),
            eval_sources: runs(pick(Partition::Eval)),
            source_counts: self.source_counts(),
            extra,
        };
        let json = serde_json::to_string_pretty(&manifest)?;
        io::write_file(&dir.join(format!("{stem}.manifest.json")), json.as_bytes())
    }

    pub fn load(dir: &Path, stem: &str) -> Result<Self> {
        let manifest_path = dir.join(format!("{stem}.manifest.json"));
        let raw = std::fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
        let manifest: CorpusManifest = serde_json::from_str(&raw)?;
        if manifest.format != CORPUS_FORMAT {
            return Err(Error::Format(format!(
                "{}: unsupported corpus format {:?}",
                manifest_path.display(),
                manifest.format
            )));
        }
        let mut corpus = AdaptationCorpus::new(manifest.provenance);
        for (partition, name, sources) in [
            (Partition::Train, "train", &manifest.train_sources),
            (Partition::Eval, "eval", &manifest.eval_sources),
        ] {
            let path = dir.join(format!("{stem}.{name}.txt"));
            let texts = io::read_documents(&path)?;
            let expected: usize = sources.iter().map(|r| r.count).sum();
            if texts.len() != expected {
                return Err(Error::Format(format!(
                    "{}: {} documents, manifest says {expected}",
                    path.display(),
                    texts.len()
                )));
            }
            let tags = sources.iter().flat_map(|r| std::iter::repeat(r.source.as_str()).take(r.count));
            for (text, tag) in texts.into_iter().zip(tags) {
                corpus.documents.push(CorpusDocument {
                    text,
                    source: tag.to_string(),
                    partition,
                });
            }
        }
        Ok(corpus)
    }
}

pub fn eval_count(n: usize) -> usize {
    ((n as f64 * EVAL_FRACTION) + 1e-9).floor() as usize
}

const CORPUS_FORMAT: &str = "scriptswitch-corpus/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SourceRun {
    source: String,
    count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CorpusManifest {
    format: String,
    provenance: Provenance,
    train_sources: Vec<SourceRun>,
    eval_sources: Vec<SourceRun>,
    source_counts: BTreeMap<String, usize>,
    extra: serde_json::Value,
}

fn runs<'a>(docs: impl Iterator<Item = &'a CorpusDocument>) -> Vec<SourceRun> {
    let mut out: Vec<SourceRun> = Vec::new();
    for doc in docs {
        match out.last_mut() {
            Some(run) if run.source == doc.source => run.count += 1,
            _ => out.push(SourceRun {
                source: doc.source.clone(),
                count: 1,
            }),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partitions_and_round_trip() {
        let mut corpus = AdaptationCorpus::new(Provenance::Synthetic);
        for i in 0..40 {
            corpus.push(format!("doc {i}"), if i < 25 { "abstract/HIN" } else { "translit/HIN" });
        }
        corpus.mark_random_partition(3);
        assert_eq!(corpus.partition_sizes(), (38, 2));

        let dir = tempfile::tempdir().unwrap();
        corpus.save(dir.path(), "synthetic", serde_json::json!({"seed": 3})).unwrap();
        let loaded = AdaptationCorpus::load(dir.path(), "synthetic").unwrap();
        assert_eq!(loaded.partition_sizes(), (38, 2));
        assert_eq!(loaded.source_counts(), corpus.source_counts());
        let texts = |c: &AdaptationCorpus, p| {
            c.documents.iter().filter(|d| d.partition == p).map(|d| (d.text.clone(), d.source.clone())).collect::<Vec<_>>()
        };
        assert_eq!(texts(&loaded, Partition::Eval), texts(&corpus, Partition::Eval));
        assert_eq!(texts(&loaded, Partition::Train), texts(&corpus, Partition::Train));
    }

    #[test]
    fn tail_partition_keeps_order() {
        let mut corpus = AdaptationCorpus::new(Provenance::Organic);
        for i in 0..21 {
            corpus.push(format!("{i}"), "organic/TAM");
        }
        corpus.mark_tail_partition();
        assert_eq!(corpus.documents[19].partition, Partition::Train);
        assert_eq!(corpus.documents[20].partition, Partition::Eval);

        let mut empty = AdaptationCorpus::new(Provenance::Organic);
        empty.mark_tail_partition();
        assert_eq!(empty.partition_sizes(), (0, 0));
    }
}
