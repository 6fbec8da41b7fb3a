//! Independent oracles shared by the integration and acceptance tests.
//!
//! Nothing here calls into the library's scoring code; the BM25 scorer
//! works directly from raw token lists.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use kwsparse::extractor::{ModelConfig, TokenScoringModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Brute-force Okapi BM25 over documents given as lowercase token lists.
pub struct OracleBm25 {
    pub docs: Vec<Vec<String>>,
    pub k1: f64,
    pub b: f64,
    pub threshold: f64,
}

impl OracleBm25 {
    pub fn doc_freq(&self, w: &str) -> usize {
        self.docs.iter().filter(|d| d.iter().any(|x| x == w)).count()
    }

    pub fn is_stopword(&self, w: &str) -> bool {
        self.doc_freq(w) as f64 / self.docs.len() as f64 > self.threshold
    }

    pub fn idf(&self, w: &str) -> f64 {
        let n = self.docs.len() as f64;
        let df = self.doc_freq(w) as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    pub fn avgdl(&self) -> f64 {
        self.docs.iter().map(Vec::len).sum::<usize>() as f64 / self.docs.len() as f64
    }

    /// Weight of one word against document `d`; 0 for stopwords and absent words.
    pub fn word_score(&self, w: &str, d: usize) -> f64 {
        if self.is_stopword(w) {
            return 0.0;
        }
        let tf = self.docs[d].iter().filter(|x| *x == w).count() as f64;
        if tf == 0.0 {
            return 0.0;
        }
        let len = self.docs[d].len() as f64;
        let denom = tf + self.k1 * (1.0 - self.b + self.b * len / self.avgdl());
        self.idf(w) * tf * (self.k1 + 1.0) / denom
    }

    /// Score of a query treated as a set of words.
    pub fn score(&self, query: &[String], d: usize) -> f64 {
        let set: BTreeSet<&String> = query.iter().collect();
        set.into_iter().map(|w| self.word_score(w, d)).sum()
    }

    /// Top `n` documents with positive score, by score then ordinal.
    pub fn rank(&self, query: &[String], n: usize) -> Vec<(usize, f64)> {
        let mut all: Vec<(usize, f64)> =
            (0..self.docs.len()).map(|d| (d, self.score(query, d))).filter(|&(_, s)| s > 0.0).collect();
        all.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        all.truncate(n);
        all
    }
}

/// A random tiny corpus: up to `max_docs` documents over a vocabulary of
/// up to `max_vocab` words `w0`, `w1`, ... drawn with a skewed distribution
/// so that some words become stopwords.
pub fn random_corpus(rng: &mut ChaCha8Rng, max_docs: usize, max_vocab: usize) -> Vec<Vec<String>> {
    let docs = rng.random_range(1..=max_docs);
    let vocab = rng.random_range(1..=max_vocab);
    (0..docs)
        .map(|_| {
            let len = rng.random_range(0..=15);
            (0..len)
                .map(|_| {
                    let u: f64 = rng.random();
                    format!("w{}", ((u * u) * vocab as f64) as usize)
                })
                .collect()
        })
        .collect()
}

pub fn random_query(rng: &mut ChaCha8Rng, max_vocab: usize) -> Vec<String> {
    let len = rng.random_range(0..=8);
    (0..len).map(|_| format!("w{}", rng.random_range(0..max_vocab + 3))).collect()
}

/// Counts occurrences per word, for cross-checking postings.
pub fn term_counts(doc: &[String]) -> HashMap<&str, usize> {
    let mut m = HashMap::new();
    for w in doc {
        *m.entry(w.as_str()).or_insert(0) += 1;
    }
    m
}

pub const FD_STEP: f64 = 1e-4;

/// Below this norm a gradient group counts as zero on both sides. Central
/// differences carry round-off of roughly `f64::EPSILON * loss / FD_STEP`
/// (about 1e-12) per entry, so a group whose exact gradient is zero, such
/// as attention key biases under softmax shift invariance, would otherwise
/// report a relative error near 1 between two noise values.
pub const ZERO_GRADIENT_NORM: f64 = 1e-9;

/// Per-parameter-group relative error between the analytic gradient and
/// central finite differences, as `|a - n| / max(|a|, |n|)` on L2 norms.
pub fn gradient_errors(seed: u64, cfg: ModelConfig, len: usize) -> Vec<(String, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = TokenScoringModel::new(cfg, seed).unwrap();
    // move away from the symmetric init so every group gets a real signal
    model.params_mut().for_each_mut(|_, xs| {
        for x in xs {
            *x += rng.random_range(-0.3..0.3);
        }
    });
    let ids: Vec<u32> = (0..len).map(|_| rng.random_range(0..cfg.vocab_size as u32)).collect();
    let labels: Vec<u8> = (0..len).map(|_| rng.random_range(0..2)).collect();
    let (_, analytic) = model.loss_and_gradient(&ids, &labels).unwrap();

    let names: Vec<(String, usize)> = model.params().tensors().iter().map(|(n, t)| (n.clone(), t.len())).collect();
    let mut out = Vec::new();
    for (g, (name, n)) in names.iter().enumerate() {
        let mut numeric = vec![0.0; *n];
        for (i, slot) in numeric.iter_mut().enumerate() {
            let orig = model.params().tensors()[g].1[i];
            let mut at = |v: f64| {
                model.params_mut().tensors_mut()[g].1[i] = v;
                model.loss(&ids, &labels).unwrap()
            };
            let plus = at(orig + FD_STEP);
            let minus = at(orig - FD_STEP);
            at(orig);
            *slot = (plus - minus) / (2.0 * FD_STEP);
        }
        let a = analytic.tensors()[g].1.to_vec();
        let diff: f64 = a.iter().zip(&numeric).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nn: f64 = numeric.iter().map(|x| x * x).sum::<f64>().sqrt();
        let denom = na.max(nn);
        let rel = if denom < ZERO_GRADIENT_NORM { diff } else { diff / denom };
        out.push((name.clone(), rel));
    }
    out
}

/// Small models covering several depth/width/head combinations.
pub fn gradient_cases() -> Vec<(u64, ModelConfig, usize)> {
    vec![
        (1, ModelConfig { vocab_size: 11, d_model: 8, layers: 2, heads: 2, ffn_dim: 12, max_len: 12 }, 7),
        (2, ModelConfig { vocab_size: 9, d_model: 16, layers: 1, heads: 4, ffn_dim: 16, max_len: 12 }, 12),
        (3, ModelConfig { vocab_size: 6, d_model: 4, layers: 3, heads: 1, ffn_dim: 8, max_len: 12 }, 3),
    ]
}
