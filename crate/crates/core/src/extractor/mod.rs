//! Token-classification keyword extractor.
//!
//! A mention is rendered as `[CLS] left [START] mention [END] right [SEP]`
//! in word pieces, encoded by a small self-attention encoder, and each
//! position is scored by a linear head followed by a sigmoid. Training uses
//! binary cross-entropy against weak labels; inference keeps the top-k
//! distinct context words.

mod checkpoint;
mod extract;
mod input;
mod loss;
mod model;
mod optim;
mod train;

pub use checkpoint::{KeywordExtractor, CHECKPOINT_VERSION};
pub use extract::{extract_keywords, ScoredWord};
pub use input::{build_extractor_input, ExtractorInput, WindowConfig};
pub use loss::{bce_loss, bce_loss_with_logit_grad, SCORE_EPSILON};
pub use model::{ModelConfig, Params, TokenScoringModel};
pub use optim::AdamW;
pub use train::{token_f1, train, DevSelection, LabeledInput, TrainConfig, TrainLog, TrainOutcome};
