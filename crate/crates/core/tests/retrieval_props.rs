mod common;

use std::collections::HashMap;

use common::{random_corpus, random_query, term_counts, OracleBm25};
use kwsparse::corpus::{filter_stopwords, tokenize_words, CorpusStats, EntityRecord};
use kwsparse::index::{idf, Bm25Params, InvertedIndex};
use kwsparse::par::Execution;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn entities(docs: &[Vec<String>]) -> Vec<EntityRecord> {
    docs.iter().enumerate().map(|(i, d)| EntityRecord::new(format!("d{i}"), "", d.join(" "))).collect()
}

fn build(docs: &[Vec<String>], params: Bm25Params, threshold: f64) -> InvertedIndex {
    InvertedIndex::from_entities(&entities(docs), threshold, params, Execution::Sequential).unwrap()
}

fn all_scores(index: &InvertedIndex, q: &[String]) -> HashMap<String, f64> {
    index.retrieve(q, index.doc_count()).hits.into_iter().map(|h| (h.entity_id, h.score)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn matches_brute_force(seed in any::<u64>(), k1 in 0.1f64..3.0, b in 0.0f64..=1.0, threshold in 0.05f64..0.95, n in 1usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let docs = random_corpus(&mut rng, 20, 50);
        let index = build(&docs, Bm25Params::new(k1, b).unwrap(), threshold);
        let oracle = OracleBm25 { docs, k1, b, threshold };
        for _ in 0..5 {
            let q = random_query(&mut rng, 50);
            let got = index.retrieve(&q, n);
            let want = oracle.rank(&q, n);
            prop_assert_eq!(got.len(), want.len());
            for (h, (d, s)) in got.hits.iter().zip(&want) {
                prop_assert_eq!(&h.entity_id, &format!("d{d}"));
                prop_assert!((h.score - s).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn postings_match_term_counts(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let docs = random_corpus(&mut rng, 20, 50);
        let index = build(&docs, Bm25Params::default(), 0.2);
        for (d, doc) in docs.iter().enumerate() {
            prop_assert_eq!(index.doc_length(d as u32) as usize, doc.len());
            for (w, c) in term_counts(doc) {
                let expected = if index.stats().is_stopword(w) { 0 } else { c as u32 };
                prop_assert_eq!(index.term_frequency(w, d as u32), expected);
            }
        }
    }

    #[test]
    fn adding_a_word_never_lowers_a_score(seed in any::<u64>(), extra in 0usize..53) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let docs = random_corpus(&mut rng, 20, 50);
        let index = build(&docs, Bm25Params::default(), 0.2);
        let q = random_query(&mut rng, 50);
        let mut bigger = q.clone();
        bigger.push(format!("w{extra}"));
        let before = all_scores(&index, &q);
        let after = all_scores(&index, &bigger);
        for (id, s) in before {
            prop_assert!(after.get(&id).copied().unwrap_or(0.0) >= s);
        }
    }

    #[test]
    fn idf_is_non_negative(n in 1u64..100_000, frac in 0.0f64..=1.0) {
        let df = ((n as f64) * frac) as u64;
        prop_assert!(idf(df, n) >= 0.0);
        prop_assert!(idf(df, n).is_finite());
    }

    #[test]
    fn index_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let docs = random_corpus(&mut rng, 20, 50);
        let index = build(&docs, Bm25Params::default(), 0.2);
        let mut bytes = Vec::new();
        index.write_to(&mut bytes).unwrap();
        let back = InvertedIndex::read_from(bytes.as_slice()).unwrap();
        for _ in 0..5 {
            let q = random_query(&mut rng, 50);
            prop_assert_eq!(index.retrieve(&q, 10), back.retrieve(&q, 10));
        }
        let mut again = Vec::new();
        back.write_to(&mut again).unwrap();
        prop_assert_eq!(bytes, again);
    }

    #[test]
    fn avgdl_and_filtering(seed in any::<u64>(), threshold in 0.05f64..0.95) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let docs = random_corpus(&mut rng, 20, 50);
        let stats = CorpusStats::build(&entities(&docs), threshold).unwrap();
        let total: usize = docs.iter().map(Vec::len).sum();
        prop_assert!((stats.avgdl() - total as f64 / docs.len() as f64).abs() < 1e-12);

        let text = random_query(&mut rng, 50).join(" ");
        let words = tokenize_words(&text);
        let kept = filter_stopwords(&words, &stats);
        prop_assert!(kept.iter().all(|w| !stats.is_stopword(w)));
        let expected: Vec<&String> = words.iter().filter(|w| !stats.is_stopword(w)).collect();
        prop_assert_eq!(kept.iter().collect::<Vec<_>>(), expected);
    }
}

#[test]
fn parallel_build_equals_sequential() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let docs = random_corpus(&mut rng, 20, 50);
    let es = entities(&docs);
    let seq = InvertedIndex::from_entities(&es, 0.2, Bm25Params::default(), Execution::Sequential).unwrap();
    let par = InvertedIndex::from_entities(&es, 0.2, Bm25Params::default(), Execution::Parallel).unwrap();
    let (mut a, mut b) = (Vec::new(), Vec::new());
    seq.write_to(&mut a).unwrap();
    par.write_to(&mut b).unwrap();
    assert_eq!(a, b);
}

#[test]
fn batch_retrieval_preserves_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let docs = random_corpus(&mut rng, 20, 50);
    let index = build(&docs, Bm25Params::default(), 0.2);
    let queries: Vec<Vec<String>> = (0..40).map(|_| random_query(&mut rng, 50)).collect();
    let batch = index.retrieve_batch(&queries, 5, Execution::Parallel);
    for (q, r) in queries.iter().zip(&batch) {
        assert_eq!(&index.retrieve(q, 5), r);
    }
}
