use std::collections::{BTreeSet, HashMap, HashSet};

use super::{tokenize_words, EntityRecord, WordSequence};
use crate::{Error, Result};

/// Words occurring in more than this fraction of descriptions are stopwords.
pub const DEFAULT_STOPWORD_THRESHOLD: f64 = 0.20;

/// Document-frequency statistics over entity descriptions.
///
/// Lengths are word counts measured before stopword removal. The same length
/// is used for `avgdl` and for `|E|` in BM25 scoring.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusStats {
    doc_count: usize,
    doc_freq: HashMap<String, u32>,
    total_len: u64,
    threshold: f64,
    stopwords: HashSet<String>,
}

impl CorpusStats {
    /// Counts document frequencies over the entities' descriptions.
    pub fn build(entities: &[EntityRecord], threshold: f64) -> Result<Self> {
        let docs: Vec<WordSequence> = entities.iter().map(|e| tokenize_words(&e.description)).collect();
        Self::from_documents(&docs, threshold)
    }

    /// Same as [`CorpusStats::build`] for already tokenized descriptions.
    pub fn from_documents(docs: &[WordSequence], threshold: f64) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(Error::InvalidParam(format!("stopword threshold must be in (0, 1), got {threshold}")));
        }
        let mut doc_freq: HashMap<String, u32> = HashMap::new();
        let mut total_len = 0u64;
        for doc in docs {
            total_len += doc.len() as u64;
            let distinct: HashSet<&String> = doc.iter().collect();
            for w in distinct {
                *doc_freq.entry(w.clone()).or_default() += 1;
            }
        }
        Ok(Self::from_parts(docs.len(), doc_freq, total_len, threshold))
    }

    pub(crate) fn from_parts(doc_count: usize, doc_freq: HashMap<String, u32>, total_len: u64, threshold: f64) -> Self {
        let n = doc_count as f64;
        let stopwords = doc_freq.iter().filter(|(_, &df)| df as f64 / n > threshold).map(|(w, _)| w.clone()).collect();
        Self { doc_count, doc_freq, total_len, threshold, stopwords }
    }

    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    pub fn doc_freq(&self, word: &str) -> u32 {
        self.doc_freq.get(word).copied().unwrap_or(0)
    }

    pub(crate) fn doc_freqs(&self) -> &HashMap<String, u32> {
        &self.doc_freq
    }

    pub fn total_len(&self) -> u64 {
        self.total_len
    }

    pub fn avgdl(&self) -> f64 {
        self.total_len as f64 / self.doc_count as f64
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn is_stopword(&self, word: &str) -> bool {
        self.stopwords.contains(word)
    }

    /// Stopwords in lexicographic order.
    pub fn stopwords(&self) -> BTreeSet<&str> {
        self.stopwords.iter().map(String::as_str).collect()
    }

    pub fn vocabulary_size(&self) -> usize {
        self.doc_freq.len()
    }
}

/// Drops stopwords from `seq`, keeping order.
pub fn filter_stopwords(seq: &WordSequence, stats: &CorpusStats) -> WordSequence {
    seq.iter().filter(|w| !stats.is_stopword(w)).cloned().collect()
}
