use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{ExtractorInput, TokenScoringModel};
use crate::corpus::CorpusStats;
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredWord {
    pub word: String,
    pub score: f64,
}

/// Top-`k` distinct context words by model score.
///
/// A word's score is the maximum over all its pieces and occurrences. Ties
/// go to the word that appears first. Special tokens and stopwords are never
/// returned.
pub fn extract_keywords(
    model: &TokenScoringModel,
    input: &ExtractorInput,
    k: usize,
    stats: &CorpusStats,
) -> Result<Vec<ScoredWord>> {
    if k == 0 {
        return Ok(Vec::new());
    }
    let scores = model.score_tokens(&input.token_ids)?;
    Ok(rank_words(input, &scores, k, stats))
}

pub(crate) fn rank_words(input: &ExtractorInput, scores: &[f64], k: usize, stats: &CorpusStats) -> Vec<ScoredWord> {
    // word -> (best score, first position)
    let mut best: HashMap<&str, (f64, usize)> = HashMap::new();
    for (pos, &s) in scores.iter().enumerate() {
        let Some(word) = input.word_at(pos) else {
            continue;
        };
        if stats.is_stopword(word) {
            continue;
        }
        best.entry(word).and_modify(|e| e.0 = e.0.max(s)).or_insert((s, pos));
    }
    let mut ranked: Vec<(&str, f64, usize)> = best.into_iter().map(|(w, (s, p))| (w, s, p)).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.2.cmp(&b.2)));
    ranked.into_iter().take(k).map(|(w, s, _)| ScoredWord { word: w.to_string(), score: s }).collect()
}
