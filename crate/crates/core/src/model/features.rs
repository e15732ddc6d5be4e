//! Character n-gram TF-IDF feature model.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::adaptation::{AdaptationCorpus, Provenance};
use crate::error::{Error, Result};
use crate::langid::normalize;

pub const MIN_N: usize = 2;
pub const MAX_N: usize = 4;
const FEATURE_FORMAT: &str = "scriptswitch-features/1";

/// N-grams (n = 2..=4) of each token padded with one space on either side.
fn ngrams(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut padded = Vec::new();
    for token in normalize(text).split(' ').filter(|t| !t.is_empty()) {
        padded.clear();
        padded.push(' ');
        padded.extend(token.chars());
        padded.push(' ');
        for n in MIN_N..=MAX_N {
            out.extend(padded.windows(n).map(|w| w.iter().collect::<String>()));
        }
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "FeatureModelRepr", into = "FeatureModelRepr")]
pub struct FeatureModel {
    pub vocabulary: Vec<String>,
    pub idf: Vec<f64>,
    pub provenance: Provenance,
    /// Number of train-partition documents the idf was computed over.
    pub documents: usize,
    pub version: String,
    index: HashMap<String, u32>,
}

#[derive(Serialize, Deserialize)]
struct FeatureModelRepr {
    format: String,
    provenance: Provenance,
    documents: usize,
    version: String,
    vocabulary: Vec<String>,
    idf: Vec<f64>,
}

impl From<FeatureModelRepr> for FeatureModel {
    fn from(r: FeatureModelRepr) -> Self {
        FeatureModel::new(r.vocabulary, r.idf, r.provenance, r.documents, r.version)
    }
}

impl From<FeatureModel> for FeatureModelRepr {
    fn from(m: FeatureModel) -> Self {
        FeatureModelRepr {
            format: FEATURE_FORMAT.to_string(),
            provenance: m.provenance,
            documents: m.documents,
            version: m.version,
            vocabulary: m.vocabulary,
            idf: m.idf,
        }
    }
}

impl PartialEq for FeatureModel {
    fn eq(&self, other: &Self) -> bool {
        self.vocabulary == other.vocabulary
            && self.idf == other.idf
            && self.provenance == other.provenance
            && self.documents == other.documents
            && self.version == other.version
    }
}

impl FeatureModel {
    pub fn new(vocabulary: Vec<String>, idf: Vec<f64>, provenance: Provenance, documents: usize, version: String) -> Self {
        let index = vocabulary.iter().enumerate().map(|(i, g)| (g.clone(), i as u32)).collect();
        FeatureModel {
            vocabulary,
            idf,
            provenance,
            documents,
            version,
            index,
        }
    }

    pub fn dim(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn index_of(&self, gram: &str) -> Option<u32> {
        self.index.get(gram).copied()
    }

    pub fn validate(&self) -> Result<()> {
        if self.vocabulary.len() != self.idf.len() || self.index.len() != self.vocabulary.len() {
            return Err(Error::Format("feature model vocabulary and idf disagree".into()));
        }
        Ok(())
    }

    /// Same model with every idf weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> FeatureModel {
        let mut out = self.clone();
        out.idf.iter_mut().for_each(|w| *w *= factor);
        out
    }
}

/// Keeps the `cap` n-grams with the highest document frequency over the
/// corpus train partition (ties lexicographic) and weights them by
/// `ln((1 + N) / (1 + df)) + 1`.
pub fn fit_feature_model(corpus: &AdaptationCorpus, cap: usize) -> Result<FeatureModel> {
    if corpus.is_empty() {
        return Err(Error::Empty("adaptation corpus"));
    }
    let mut df: HashMap<String, usize> = HashMap::new();
    let mut n_docs = 0usize;
    for doc in corpus.train_documents() {
        n_docs += 1;
        let unique: HashSet<String> = ngrams(&doc.text).into_iter().collect();
        for gram in unique {
            *df.entry(gram).or_default() += 1;
        }
    }
    if n_docs == 0 {
        return Err(Error::Empty("adaptation corpus train partition"));
    }
    let mut entries: Vec<(String, usize)> = df.into_iter().collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    entries.truncate(cap);
    let n = n_docs as f64;
    let idf = entries
        .iter()
        .map(|(_, d)| ((1.0 + n) / (1.0 + *d as f64)).ln() + 1.0)
        .collect();
    let vocabulary = entries.into_iter().map(|(g, _)| g).collect();
    let version = format!("{FEATURE_FORMAT};{};n={MIN_N}-{MAX_N};cap={cap}", corpus.provenance);
    Ok(FeatureModel::new(vocabulary, idf, corpus.provenance, n_docs, version))
}

/// Sparse, index-sorted, L2-normalized (or empty) feature vector.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    pub entries: Vec<(u32, f64)>,
}

impl SparseVector {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|(_, w)| w * w).sum::<f64>().sqrt()
    }

    /// Builds from unsorted (index, weight) pairs and L2-normalizes.
    pub fn from_weights(mut entries: Vec<(u32, f64)>) -> Self {
        entries.sort_by_key(|e| e.0);
        let v = SparseVector { entries };
        let norm = v.norm();
        if norm == 0.0 {
            return SparseVector::default();
        }
        SparseVector {
            entries: v.entries.into_iter().map(|(i, w)| (i, w / norm)).collect(),
        }
    }
}

pub fn featurize(text: &str, fm: &FeatureModel) -> SparseVector {
    let mut tf: HashMap<u32, f64> = HashMap::new();
    for gram in ngrams(text) {
        if let Some(i) = fm.index_of(&gram) {
            *tf.entry(i).or_default() += 1.0;
        }
    }
    SparseVector::from_weights(tf.into_iter().map(|(i, c)| (i, c * fm.idf[i as usize])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(texts: &[&str]) -> AdaptationCorpus {
        let mut c = AdaptationCorpus::new(Provenance::Baseline);
        for t in texts {
            c.push(*t, "test");
        }
        c
    }

    #[test]
    fn idf_formula() {
        let fm = fit_feature_model(&corpus(&["abab", "abcd"]), 1000).unwrap();
        let idf = |g: &str| fm.idf[fm.index_of(g).unwrap() as usize];
        assert_eq!(idf("ab"), 1.0);
        // ln(3/2) + 1
        assert!((idf("ba") - 1.405_465_108_108_164_4).abs() < 1e-12);
        assert!(fm.idf.iter().all(|&w| w >= 1.0));
        assert_eq!(fm.documents, 2);
    }

    #[test]
    fn vocabulary_cap_keeps_highest_df() {
        // df 3: " a", " ab", "ab"; the cap keeps the first two lexicographically
        let fm = fit_feature_model(&corpus(&["ab", "ab", "abc"]), 2).unwrap();
        assert_eq!(fm.dim(), 2);
        let mut kept = fm.vocabulary.clone();
        kept.sort();
        assert_eq!(kept, vec![" a", " ab"]);
        assert!(fit_feature_model(&corpus(&[]), 2).is_err());
    }

    #[test]
    fn idf_uses_train_partition_only() {
        let mut c = corpus(&["xy", "xy", "zz"]);
        c.documents[2].partition = crate::adaptation::Partition::Eval;
        let fm = fit_feature_model(&c, 100).unwrap();
        assert_eq!(fm.documents, 2);
        assert!(fm.index_of("zz").is_none());
    }

    #[test]
    fn featurize_examples() {
        let fm = FeatureModel::new(vec!["ab".into(), "cd".into()], vec![1.0, 1.0], Provenance::Baseline, 1, "t".into());
        assert!(featurize("zzz", &fm).is_empty());
        let v = featurize("ab ab ab", &fm);
        assert_eq!(v.entries, vec![(0, 1.0)]);
        let v = featurize("ab cd", &fm);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(v.entries.len(), 2);
        assert!((v.entries[0].1 - h).abs() < 1e-15 && (v.entries[1].1 - h).abs() < 1e-15);
    }

    #[test]
    fn serde_round_trip_rebuilds_index() {
        let fm = fit_feature_model(&corpus(&["hello world", "hello there"]), 50).unwrap();
        let json = serde_json::to_string(&fm).unwrap();
        let back: FeatureModel = serde_json::from_str(&json).unwrap();
        assert_eq!(fm, back);
        assert_eq!(featurize("hello", &fm), featurize("hello", &back));
    }
}
