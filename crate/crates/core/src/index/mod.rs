//! Inverted index over entity descriptions with Okapi BM25 scoring.

mod bm25;
mod persist;

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

pub use bm25::{idf, Bm25Params};

use crate::corpus::{tokenize_words, CorpusStats, EntityRecord, WordSequence};
use crate::par::{self, Execution};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    pub doc: u32,
    pub tf: u32,
}

/// Ranked retrieval output: distinct entities with non-increasing scores.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RetrievalResult {
    pub hits: Vec<Hit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hit {
    pub entity_id: String,
    pub score: f64,
}

impl RetrievalResult {
    pub fn len(&self) -> usize {
        self.hits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hits.is_empty()
    }

    pub fn contains(&self, entity_id: &str) -> bool {
        self.hits.iter().any(|h| h.entity_id == entity_id)
    }

    pub fn rank_of(&self, entity_id: &str) -> Option<usize> {
        self.hits.iter().position(|h| h.entity_id == entity_id)
    }
}

/// Write-once inverted index.
///
/// Postings hold non-stopword terms only; `doc_lengths` count every word of
/// the description, stopwords included, matching [`CorpusStats::avgdl`].
#[derive(Debug, Clone, PartialEq)]
pub struct InvertedIndex {
    params: Bm25Params,
    stats: CorpusStats,
    entity_ids: Vec<String>,
    ordinals: HashMap<String, u32>,
    doc_lengths: Vec<u32>,
    terms: Vec<String>,
    term_ids: HashMap<String, u32>,
    postings: Vec<Vec<Posting>>,
    // Derived on build and load.
    idf: Vec<f64>,
    length_norm: Vec<f64>,
}

impl InvertedIndex {
    /// Builds the index. `stats` must come from the same entity list.
    pub fn build(entities: &[EntityRecord], stats: CorpusStats, params: Bm25Params, exec: Execution) -> Result<Self> {
        params.validate()?;
        if stats.doc_count() != entities.len() {
            return Err(Error::InvalidParam(format!(
                "stats cover {} documents but {} entities were given",
                stats.doc_count(),
                entities.len()
            )));
        }
        let docs: Vec<WordSequence> = par::map(exec, entities, |e| tokenize_words(&e.description));

        let mut ordinals = HashMap::with_capacity(entities.len());
        for (i, e) in entities.iter().enumerate() {
            if ordinals.insert(e.entity_id.clone(), i as u32).is_some() {
                return Err(Error::DuplicateEntity(e.entity_id.clone()));
            }
        }

        // Per-document term counts in parallel; merged in document order so
        // posting lists come out sorted by ordinal.
        let per_doc: Vec<Vec<(String, u32)>> = par::map(exec, &docs, |doc| {
            let mut counts: HashMap<&str, u32> = HashMap::new();
            for w in doc.iter().filter(|w| !stats.is_stopword(w)) {
                *counts.entry(w.as_str()).or_default() += 1;
            }
            let mut v: Vec<(String, u32)> = counts.into_iter().map(|(w, c)| (w.to_string(), c)).collect();
            v.sort_unstable();
            v
        });

        let mut vocab: BTreeSet<&str> = BTreeSet::new();
        for d in &per_doc {
            vocab.extend(d.iter().map(|(w, _)| w.as_str()));
        }
        let terms: Vec<String> = vocab.into_iter().map(str::to_string).collect();
        let term_ids: HashMap<String, u32> = terms.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        let mut postings = vec![Vec::new(); terms.len()];
        for (doc, counts) in per_doc.iter().enumerate() {
            for (w, tf) in counts {
                postings[term_ids[w] as usize].push(Posting { doc: doc as u32, tf: *tf });
            }
        }

        let doc_lengths = docs.iter().map(|d| d.len() as u32).collect();
        Ok(Self::assemble(
            params,
            stats,
            entities.iter().map(|e| e.entity_id.clone()).collect(),
            ordinals,
            doc_lengths,
            terms,
            term_ids,
            postings,
        ))
    }

    /// Convenience: statistics and index in one step.
    pub fn from_entities(
        entities: &[EntityRecord],
        stopword_threshold: f64,
        params: Bm25Params,
        exec: Execution,
    ) -> Result<Self> {
        let stats = CorpusStats::build(entities, stopword_threshold)?;
        Self::build(entities, stats, params, exec)
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        params: Bm25Params,
        stats: CorpusStats,
        entity_ids: Vec<String>,
        ordinals: HashMap<String, u32>,
        doc_lengths: Vec<u32>,
        terms: Vec<String>,
        term_ids: HashMap<String, u32>,
        postings: Vec<Vec<Posting>>,
    ) -> Self {
        let n = stats.doc_count() as u64;
        let idf = terms.iter().map(|t| bm25::idf(stats.doc_freq(t) as u64, n)).collect();
        let avgdl = stats.avgdl();
        let length_norm = doc_lengths.iter().map(|&len| params.length_norm(len as f64, avgdl)).collect();
        Self { params, stats, entity_ids, ordinals, doc_lengths, terms, term_ids, postings, idf, length_norm }
    }

    pub fn params(&self) -> Bm25Params {
        self.params
    }

    pub fn stats(&self) -> &CorpusStats {
        &self.stats
    }

    pub fn doc_count(&self) -> usize {
        self.entity_ids.len()
    }

    pub fn entity_id(&self, ordinal: u32) -> Option<&str> {
        self.entity_ids.get(ordinal as usize).map(String::as_str)
    }

    pub fn ordinal(&self, entity_id: &str) -> Option<u32> {
        self.ordinals.get(entity_id).copied()
    }

    pub fn doc_length(&self, ordinal: u32) -> u32 {
        self.doc_lengths[ordinal as usize]
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Postings for `word`, sorted by document ordinal. Empty for stopwords
    /// and unseen words.
    pub fn postings(&self, word: &str) -> &[Posting] {
        match self.term_ids.get(word) {
            Some(&t) => &self.postings[t as usize],
            None => &[],
        }
    }

    pub fn term_frequency(&self, word: &str, ordinal: u32) -> u32 {
        let p = self.postings(word);
        match p.binary_search_by_key(&ordinal, |p| p.doc) {
            Ok(i) => p[i].tf,
            Err(_) => 0,
        }
    }

    #[inline]
    fn posting_score(&self, term: usize, p: Posting) -> f64 {
        let tf = p.tf as f64;
        self.idf[term] * tf * (self.params.k1 + 1.0) / (tf + self.length_norm[p.doc as usize])
    }

    /// BM25 weight of a single word against one entity's description.
    /// Zero when the word is absent from the description or is a stopword.
    pub fn bm25_word_score(&self, word: &str, entity_id: &str) -> Result<f64> {
        let ordinal = self.ordinal(entity_id).ok_or_else(|| Error::UnknownEntity(entity_id.to_string()))?;
        Ok(self.word_score_by_ordinal(word, ordinal))
    }

    pub fn word_score_by_ordinal(&self, word: &str, ordinal: u32) -> f64 {
        let Some(&t) = self.term_ids.get(word) else {
            return 0.0;
        };
        let p = &self.postings[t as usize];
        match p.binary_search_by_key(&ordinal, |p| p.doc) {
            Ok(i) => self.posting_score(t as usize, p[i]),
            Err(_) => 0.0,
        }
    }

    /// Top-`n` entities for a set-valued query.
    ///
    /// Each distinct word contributes once. Documents scoring 0 are left out;
    /// equal scores are ordered by ascending entity ordinal.
    pub fn retrieve<S: AsRef<str>>(&self, query: &[S], n: usize) -> RetrievalResult {
        let words: BTreeSet<&str> = query.iter().map(AsRef::as_ref).collect();
        let mut scores = vec![0.0f64; self.doc_count()];
        let mut touched: Vec<u32> = Vec::new();
        for w in words {
            let Some(&t) = self.term_ids.get(w) else {
                continue;
            };
            for &p in &self.postings[t as usize] {
                let s = &mut scores[p.doc as usize];
                if *s == 0.0 {
                    touched.push(p.doc);
                }
                *s += self.posting_score(t as usize, p);
            }
        }
        touched.retain(|&d| scores[d as usize] > 0.0);
        touched.sort_unstable();
        touched.dedup();
        let by_rank = |a: &u32, b: &u32| scores[*b as usize].total_cmp(&scores[*a as usize]).then_with(|| a.cmp(b));
        if n < touched.len() {
            if n == 0 {
                touched.clear();
            } else {
                touched.select_nth_unstable_by(n - 1, by_rank);
                touched.truncate(n);
            }
        }
        touched.sort_unstable_by(by_rank);
        RetrievalResult {
            hits: touched
                .into_iter()
                .map(|d| Hit { entity_id: self.entity_ids[d as usize].clone(), score: scores[d as usize] })
                .collect(),
        }
    }

    /// Runs many queries, one result per query in input order.
    pub fn retrieve_batch<Q>(&self, queries: &[Q], n: usize, exec: Execution) -> Vec<RetrievalResult>
    where
        Q: AsRef<[String]> + Sync,
    {
        par::map(exec, queries, |q| self.retrieve(q.as_ref(), n))
    }
}
