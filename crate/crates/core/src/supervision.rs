//! Weak keyword labels from mention-context / entity-description overlap.
//!
//! The candidate keywords of a mention are the non-stopword words shared by
//! its full context (left context, mention and right context) and the gold
//! entity's description. They are ranked by their BM25 weight against that
//! description and the top `k` become keywords. Every word piece of every
//! occurrence of a keyword inside the extractor window is labeled 1.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{
    filter_stopwords, tokenize_words, CorpusStats, EntityRecord, MentionRecord, WordPieceVocab, WordSequence,
};
use crate::extractor::{build_extractor_input, ExtractorInput, LabeledInput, ScoredWord, WindowConfig};
use crate::index::InvertedIndex;
use crate::par::{self, Execution};
use crate::{Error, Result};

/// Distantly supervised keywords for one mention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeywordLabelSet {
    pub mention_id: String,
    /// Selected keywords, highest score first.
    pub keywords: Vec<ScoredWord>,
    /// All overlap words before selection.
    pub preliminary: BTreeSet<String>,
    pub k_used: usize,
}

impl KeywordLabelSet {
    pub fn contains(&self, word: &str) -> bool {
        self.keywords.iter().any(|k| k.word == word)
    }
}

/// One binary label per extractor input position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenLabels {
    pub mention_id: String,
    pub labels: Vec<u8>,
}

/// `words(M_l) ++ words(m) ++ words(M_r)`.
pub fn context_words(mention: &MentionRecord) -> WordSequence {
    let mut words = tokenize_words(&mention.left_context).into_words();
    words.extend(tokenize_words(&mention.mention).into_words());
    words.extend(tokenize_words(&mention.right_context).into_words());
    WordSequence::new(words)
}

/// Non-stopword words occurring both in the mention's full context and in
/// the entity description.
pub fn build_preliminary_keywords(
    mention: &MentionRecord,
    entity: &EntityRecord,
    stats: &CorpusStats,
) -> BTreeSet<String> {
    let context = filter_stopwords(&context_words(mention), stats).word_set();
    let description = filter_stopwords(&tokenize_words(&entity.description), stats).word_set();
    context.intersection(&description).cloned().collect()
}

/// Ranks overlap words by BM25 weight against `entity_id` (ties in
/// lexicographic order) and keeps the first `k`.
pub fn rank_and_select(
    mention_id: &str,
    preliminary: &BTreeSet<String>,
    entity_id: &str,
    index: &InvertedIndex,
    k: usize,
) -> Result<KeywordLabelSet> {
    let ordinal = index.ordinal(entity_id).ok_or_else(|| Error::UnknownEntity(entity_id.to_string()))?;
    // BTreeSet iteration is lexicographic and the sort is stable, so equal
    // scores keep lexicographic order.
    let mut scored: Vec<ScoredWord> = preliminary
        .iter()
        .map(|w| ScoredWord { word: w.clone(), score: index.word_score_by_ordinal(w, ordinal) })
        .collect();
    scored.sort_by(|a, b| b.score.total_cmp(&a.score));
    scored.truncate(k);
    Ok(KeywordLabelSet {
        mention_id: mention_id.to_string(),
        keywords: scored,
        preliminary: preliminary.clone(),
        k_used: k,
    })
}

/// Labels every piece whose word is a keyword; specials and other pieces
/// get 0.
pub fn project_labels(input: &ExtractorInput, keywords: &KeywordLabelSet) -> TokenLabels {
    let labels = (0..input.len())
        .map(|i| match input.word_at(i) {
            Some(w) if keywords.contains(w) => 1,
            _ => 0,
        })
        .collect();
    TokenLabels { mention_id: keywords.mention_id.clone(), labels }
}

/// Keywords, extractor input and labels for one mention.
#[derive(Debug, Clone, PartialEq)]
pub struct DistilledExample {
    pub keywords: KeywordLabelSet,
    pub input: ExtractorInput,
    pub labels: TokenLabels,
}

impl DistilledExample {
    pub fn to_labeled(&self) -> LabeledInput {
        LabeledInput { input: self.input.clone(), labels: self.labels.labels.clone() }
    }
}

/// Generates weak labels for mentions against one entity corpus.
pub struct DistantSupervisor<'a> {
    index: &'a InvertedIndex,
    entities: HashMap<&'a str, &'a EntityRecord>,
    vocab: &'a WordPieceVocab,
    window: WindowConfig,
    k: usize,
}

impl<'a> DistantSupervisor<'a> {
    pub fn new(
        index: &'a InvertedIndex,
        entities: &'a [EntityRecord],
        vocab: &'a WordPieceVocab,
        window: WindowConfig,
        k: usize,
    ) -> Self {
        Self { index, entities: entities.iter().map(|e| (e.entity_id.as_str(), e)).collect(), vocab, window, k }
    }

    pub fn label(&self, mention: &MentionRecord) -> Result<DistilledExample> {
        let entity = self.entities.get(mention.gold_entity_id.as_str()).ok_or_else(|| Error::DanglingGold {
            mention_id: mention.mention_id.clone(),
            entity_id: mention.gold_entity_id.clone(),
        })?;
        let preliminary = build_preliminary_keywords(mention, entity, self.index.stats());
        let keywords = rank_and_select(&mention.mention_id, &preliminary, &entity.entity_id, self.index, self.k)?;
        let input = build_extractor_input(mention, self.vocab, self.window)?;
        let labels = project_labels(&input, &keywords);
        Ok(DistilledExample { keywords, input, labels })
    }

    /// Labels all mentions, in input order.
    pub fn label_all(&self, mentions: &[MentionRecord], exec: Execution) -> Result<Vec<DistilledExample>> {
        par::try_map(exec, mentions, |m| self.label(m))
    }
}

/// One line of the label dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub mention_id: String,
    pub keywords: Vec<ScoredWord>,
    pub token_labels: Vec<u8>,
    pub token_ids: Vec<u32>,
    pub words: Vec<String>,
    pub piece_to_word: Vec<Option<usize>>,
    pub mention_span: [usize; 2],
}

impl From<&DistilledExample> for LabelRecord {
    fn from(ex: &DistilledExample) -> Self {
        Self {
            mention_id: ex.keywords.mention_id.clone(),
            keywords: ex.keywords.keywords.clone(),
            token_labels: ex.labels.labels.clone(),
            token_ids: ex.input.token_ids.clone(),
            words: ex.input.words.clone(),
            piece_to_word: ex.input.piece_to_word.clone(),
            mention_span: [ex.input.mention_span.start, ex.input.mention_span.end],
        }
    }
}

impl LabelRecord {
    pub fn to_labeled(&self) -> Result<LabeledInput> {
        let n = self.token_ids.len();
        if self.token_labels.len() != n || self.piece_to_word.len() != n {
            return Err(Error::LengthMismatch(n, self.token_labels.len()));
        }
        if self.piece_to_word.iter().flatten().any(|&w| w >= self.words.len()) {
            return Err(Error::InvalidParam(format!("label record {} points past its word list", self.mention_id)));
        }
        Ok(LabeledInput {
            input: ExtractorInput {
                token_ids: self.token_ids.clone(),
                piece_to_word: self.piece_to_word.clone(),
                words: self.words.clone(),
                mention_span: self.mention_span[0]..self.mention_span[1],
            },
            labels: self.token_labels.clone(),
        })
    }
}

pub fn write_label_dump(path: impl AsRef<Path>, examples: &[DistilledExample]) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    for ex in examples {
        serde_json::to_writer(&mut w, &LabelRecord::from(ex))?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_label_dump(path: impl AsRef<Path>) -> Result<Vec<LabelRecord>> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}
