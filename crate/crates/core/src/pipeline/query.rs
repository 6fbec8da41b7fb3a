use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{filter_stopwords, tokenize_words, CorpusStats, MentionRecord, WordPieceVocab, WordSequence};
use crate::extractor::{
    build_extractor_input, extract_keywords, KeywordExtractor, ScoredWord, TokenScoringModel, WindowConfig,
};
use crate::{Error, Result};

/// Words kept on each side of the mention in full-context mode.
pub const DEFAULT_CONTEXT_WORDS: usize = 64;

/// Which words make up the BM25 query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QueryMode {
    /// Mention words only.
    MentionOnly,
    /// Every context word in the window, mention included.
    FullContext,
    /// Mention words plus extracted keywords.
    Keywords,
    /// Extracted keywords only.
    KeywordsOnly,
}

impl QueryMode {
    pub const ALL: [QueryMode; 4] =
        [QueryMode::MentionOnly, QueryMode::FullContext, QueryMode::Keywords, QueryMode::KeywordsOnly];

    pub fn as_str(self) -> &'static str {
        match self {
            QueryMode::MentionOnly => "mention-only",
            QueryMode::FullContext => "full-context",
            QueryMode::Keywords => "keywords",
            QueryMode::KeywordsOnly => "keywords-only",
        }
    }

    pub fn needs_model(self) -> bool {
        matches!(self, QueryMode::Keywords | QueryMode::KeywordsOnly)
    }
}

impl fmt::Display for QueryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QueryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        QueryMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidParam(format!("unknown query mode {s:?}")))
    }
}

/// A built query. `terms` is the set sent to the index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuerySpec {
    pub mode: QueryMode,
    pub mention_words: BTreeSet<String>,
    /// Extracted keywords with their scores, highest first. Empty in the
    /// modes that do not use the extractor.
    pub keywords: Vec<ScoredWord>,
    pub terms: BTreeSet<String>,
}

impl QuerySpec {
    pub fn terms(&self) -> Vec<String> {
        self.terms.iter().cloned().collect()
    }
}

/// Borrowed model, vocabulary and window: enough to extract keywords
/// without owning a [`KeywordExtractor`].
#[derive(Debug, Clone, Copy)]
pub struct ExtractorView<'a> {
    pub model: &'a TokenScoringModel,
    pub vocab: &'a WordPieceVocab,
    pub window: WindowConfig,
}

impl<'a> From<&'a KeywordExtractor> for ExtractorView<'a> {
    fn from(x: &'a KeywordExtractor) -> Self {
        Self { model: &x.model, vocab: &x.vocab, window: x.window }
    }
}

/// Builds queries in one mode. All words are stopword-filtered.
#[derive(Debug, Clone, Copy)]
pub struct QueryBuilder<'a> {
    pub mode: QueryMode,
    pub extractor: Option<ExtractorView<'a>>,
    pub k: usize,
    pub stats: &'a CorpusStats,
    /// Words kept on each side of the mention in full-context mode.
    pub context_words: usize,
}

impl<'a> QueryBuilder<'a> {
    pub fn new(mode: QueryMode, stats: &'a CorpusStats) -> Self {
        Self { mode, extractor: None, k: super::DEFAULT_K, stats, context_words: DEFAULT_CONTEXT_WORDS }
    }

    pub fn with_extractor(mut self, extractor: impl Into<ExtractorView<'a>>) -> Self {
        self.extractor = Some(extractor.into());
        self
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    fn filtered_set(&self, words: WordSequence) -> BTreeSet<String> {
        filter_stopwords(&words, self.stats).into_words().into_iter().collect()
    }

    pub fn build(&self, mention: &MentionRecord) -> Result<QuerySpec> {
        let mention_words = self.filtered_set(tokenize_words(&mention.mention));
        let keywords = if self.mode.needs_model() {
            let x = self.extractor.ok_or(Error::MissingModel(self.mode.as_str()))?;
            let input = build_extractor_input(mention, x.vocab, x.window)?;
            extract_keywords(x.model, &input, self.k, self.stats)?
        } else {
            Vec::new()
        };
        let terms = match self.mode {
            QueryMode::MentionOnly => mention_words.clone(),
            QueryMode::FullContext => {
                let left = tokenize_words(&mention.left_context).into_words();
                let right = tokenize_words(&mention.right_context).into_words();
                let keep_left = left.len().saturating_sub(self.context_words);
                let mut words: Vec<String> = left[keep_left..].to_vec();
                words.extend(tokenize_words(&mention.mention).into_words());
                words.extend(right.into_iter().take(self.context_words));
                self.filtered_set(WordSequence::new(words))
            }
            QueryMode::Keywords => {
                let mut t = mention_words.clone();
                t.extend(keywords.iter().map(|k| k.word.clone()));
                t
            }
            QueryMode::KeywordsOnly => keywords.iter().map(|k| k.word.clone()).collect(),
        };
        Ok(QuerySpec { mode: self.mode, mention_words, keywords, terms })
    }
}
