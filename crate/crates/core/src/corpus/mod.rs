//! Entity and mention corpora, word tokenization, corpus statistics and the
//! word-piece vocabulary used by the keyword extractor.

mod records;
mod stats;
mod text;
mod wordpiece;

pub use records::{
    load_corpus, load_entities, load_mentions, DomainSplit, EntityRecord, LoadOptions, MentionRecord, SplitManifest,
};
pub use stats::{filter_stopwords, CorpusStats, DEFAULT_STOPWORD_THRESHOLD};
pub use text::{tokenize_words, WordSequence};
pub use wordpiece::{SpecialToken, VocabBuilder, WordPieceVocab};
