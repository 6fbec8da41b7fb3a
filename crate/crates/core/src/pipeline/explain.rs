use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ExtractorView;
use crate::corpus::{tokenize_words, EntityRecord, MentionRecord};
use crate::extractor::{build_extractor_input, extract_keywords};
use crate::index::InvertedIndex;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkedWord {
    pub word: String,
    pub mention: bool,
    pub keyword: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeywordExplanation {
    pub word: String,
    pub extractor_score: f64,
    /// BM25 weight of the word against the entity description.
    pub bm25_score: f64,
    pub in_description: bool,
}

/// Side-by-side view of a mention's extracted keywords and the entity
/// description they overlap with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplainReport {
    pub mention_id: String,
    pub entity_id: String,
    pub context: Vec<MarkedWord>,
    pub description: Vec<MarkedWord>,
    pub keywords: Vec<KeywordExplanation>,
}

pub fn explain(
    mention: &MentionRecord,
    extractor: ExtractorView<'_>,
    index: &InvertedIndex,
    entity: &EntityRecord,
    k: usize,
) -> Result<ExplainReport> {
    let ordinal = index.ordinal(&entity.entity_id).ok_or_else(|| Error::UnknownEntity(entity.entity_id.clone()))?;
    let input = build_extractor_input(mention, extractor.vocab, extractor.window)?;
    let extracted = extract_keywords(extractor.model, &input, k, index.stats())?;
    let keyword_set: HashSet<&str> = extracted.iter().map(|w| w.word.as_str()).collect();

    let context = input
        .words
        .iter()
        .enumerate()
        .map(|(i, w)| MarkedWord {
            word: w.clone(),
            mention: input.mention_span.contains(&i),
            keyword: keyword_set.contains(w.as_str()),
        })
        .collect();
    let description_words = tokenize_words(&entity.description);
    let in_description: HashSet<&str> = description_words.iter().map(String::as_str).collect();
    let description = description_words
        .iter()
        .map(|w| MarkedWord { word: w.clone(), mention: false, keyword: keyword_set.contains(w.as_str()) })
        .collect();
    let keywords = extracted
        .iter()
        .map(|kw| KeywordExplanation {
            word: kw.word.clone(),
            extractor_score: kw.score,
            bm25_score: index.word_score_by_ordinal(&kw.word, ordinal),
            in_description: in_description.contains(kw.word.as_str()),
        })
        .collect();
    Ok(ExplainReport {
        mention_id: mention.mention_id.clone(),
        entity_id: entity.entity_id.clone(),
        context,
        description,
        keywords,
    })
}

impl ExplainReport {
    /// Words marked as keywords in both panes.
    pub fn overlap(&self) -> Vec<&str> {
        self.keywords.iter().filter(|k| k.in_description).map(|k| k.word.as_str()).collect()
    }
}

fn render(words: &[MarkedWord]) -> String {
    let mut parts = Vec::with_capacity(words.len());
    for (i, w) in words.iter().enumerate() {
        let mut s = String::new();
        let starts = w.mention && (i == 0 || !words[i - 1].mention);
        let ends = w.mention && words.get(i + 1).is_none_or(|n| !n.mention);
        if starts {
            s.push('[');
        }
        if w.keyword {
            s.push('*');
            s.push_str(&w.word);
            s.push('*');
        } else {
            s.push_str(&w.word);
        }
        if ends {
            s.push(']');
        }
        parts.push(s);
    }
    parts.join(" ")
}

impl fmt::Display for ExplainReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mention {} -> entity {}", self.mention_id, self.entity_id)?;
        writeln!(f, "context:     {}", render(&self.context))?;
        writeln!(f, "description: {}", render(&self.description))?;
        if self.keywords.is_empty() {
            return write!(f, "keywords:    (none)");
        }
        write!(f, "keywords:")?;
        for k in &self.keywords {
            write!(
                f,
                "\n  {:<20} extractor {:.4}  bm25 {:.4}{}",
                k.word,
                k.extractor_score,
                k.bm25_score,
                if k.in_description { "  (in description)" } else { "" }
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::VocabBuilder;
    use crate::extractor::{KeywordExtractor, ModelConfig, TokenScoringModel, WindowConfig};
    use crate::index::Bm25Params;
    use crate::par::Execution;

    fn setup() -> (Vec<EntityRecord>, InvertedIndex, KeywordExtractor) {
        let es: Vec<EntityRecord> = [
            "Domino Coffee is a restaurant in Domino City",
            "Lego is a toy",
            "Anzu is a character",
            "A train station",
            "The manga volume",
        ]
        .iter()
        .enumerate()
        .map(|(i, d)| EntityRecord::new(format!("E{i}"), "", *d))
        .collect();
        let idx = InvertedIndex::from_entities(&es, 0.2, Bm25Params::default(), Execution::Sequential).unwrap();
        let vocab = VocabBuilder::default().build("they met at domino station coffee shop".split(' '));
        let cfg = ModelConfig { vocab_size: vocab.len(), d_model: 8, layers: 1, heads: 2, ffn_dim: 8, max_len: 32 };
        let window = WindowConfig { max_len: 32, left_len: 12, right_len: 12 };
        let x = KeywordExtractor::new(TokenScoringModel::new(cfg, 0).unwrap(), vocab, window).unwrap();
        (es, idx, x)
    }

    #[test]
    fn no_keywords_no_highlights() {
        let (es, idx, x) = setup();
        let m = MentionRecord::new("m", "They met at", "Domino", "Station", "E0");
        let r = explain(&m, (&x).into(), &idx, &es[0], 0).unwrap();
        assert!(r.keywords.is_empty());
        assert!(r.context.iter().chain(&r.description).all(|w| !w.keyword));
        let text = r.to_string();
        assert!(text.contains("[domino]"), "{text}");
        assert!(text.contains("(none)"));
    }

    #[test]
    fn shared_keyword_marked_in_both_panes() {
        let (es, idx, x) = setup();
        let m = MentionRecord::new("m", "They met at", "Domino", "Station", "E0");
        let r = explain(&m, (&x).into(), &idx, &es[0], 32).unwrap();
        assert!(r.overlap().contains(&"domino"));
        assert!(r.context.iter().any(|w| w.word == "domino" && w.keyword));
        assert_eq!(r.description.iter().filter(|w| w.word == "domino" && w.keyword).count(), 2);
        let dom = r.keywords.iter().find(|k| k.word == "domino").unwrap();
        assert!((dom.bm25_score - idx.bm25_word_score("domino", "E0").unwrap()).abs() < 1e-15);
        let station = r.keywords.iter().find(|k| k.word == "station").unwrap();
        assert!(!station.in_description);
        assert_eq!(station.bm25_score, 0.0);
        assert!(r.to_string().contains("*domino*"));
    }
}
