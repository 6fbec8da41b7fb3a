//! Keyword-expanded sparse candidate retrieval for few-shot entity linking.
//!
//! A mention is turned into a BM25 query made of its own words plus a small
//! set of context keywords. The keywords come from a token-classification
//! model trained on weak labels: context words that also occur in the gold
//! entity's description, ranked by their BM25 weight against that
//! description.
//!
//! The crate is organised bottom-up:
//!
//! - [`corpus`]: records, word tokenization, corpus statistics with
//!   document-frequency stopwords, and a word-piece vocabulary.
//! - [`index`]: an inverted index with Okapi BM25 scoring and top-n retrieval.
//! - [`supervision`]: weak keyword labels from context/description overlap.
//! - [`extractor`]: the token scoring model, its loss, training loop and
//!   keyword extraction.
//! - [`pipeline`]: query construction, Recall@n evaluation, `explain`
//!   reports and experiment orchestration.
//!
//! Data-parallel loops (index construction, label generation, per-example
//! gradients, evaluation) run on rayon when the `parallel` feature is enabled
//! (the default) and fall back to plain iterators otherwise. See [`par`].

pub mod corpus;
mod error;
pub mod extractor;
pub mod index;
mod io;
pub mod par;
pub mod pipeline;
pub mod supervision;
pub mod synth;

pub use error::{Error, Result};
