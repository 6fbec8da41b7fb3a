//! Checkpoint layout (little-endian):
//!
//! ```text
//! magic      8 bytes "KWSPCKPT"
//! version    u32     currently 1
//! model      u64 x 6 vocab_size, d_model, layers, heads, ffn_dim, max_len
//! window     u64 x 3 max_len, left_len, right_len
//! vocab      u64 count, count x str (id order, specials first)
//! tensors    u64 count, count x (str name, u64 len, len x f64)
//! ```
//!
//! Tensors appear in [`Params::tensors`] order and are stored bit-exact.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{
    build_extractor_input, extract_keywords, ExtractorInput, ModelConfig, Params, ScoredWord, TokenScoringModel,
    WindowConfig,
};
use crate::corpus::{CorpusStats, MentionRecord, WordPieceVocab};
use crate::io::{Reader, Writer};
use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"KWSPCKPT";
pub const CHECKPOINT_VERSION: u32 = 1;

/// A trained model bundled with the vocabulary and window it was trained
/// with.
#[derive(Debug, Clone, PartialEq)]
pub struct KeywordExtractor {
    pub model: TokenScoringModel,
    pub vocab: WordPieceVocab,
    pub window: WindowConfig,
}

impl KeywordExtractor {
    pub fn new(model: TokenScoringModel, vocab: WordPieceVocab, window: WindowConfig) -> Result<Self> {
        if model.config().vocab_size != vocab.len() {
            return Err(Error::InvalidParam(format!(
                "model expects {} pieces, vocabulary has {}",
                model.config().vocab_size,
                vocab.len()
            )));
        }
        if window.max_len > model.config().max_len {
            return Err(Error::InvalidParam("window longer than model max_len".into()));
        }
        Ok(Self { model, vocab, window })
    }

    pub fn input(&self, mention: &MentionRecord) -> Result<ExtractorInput> {
        build_extractor_input(mention, &self.vocab, self.window)
    }

    pub fn extract(&self, mention: &MentionRecord, k: usize, stats: &CorpusStats) -> Result<Vec<ScoredWord>> {
        extract_keywords(&self.model, &self.input(mention)?, k, stats)
    }

    pub fn write_to<W: Write>(&self, out: W) -> Result<()> {
        let mut w = Writer::new(out);
        w.bytes(MAGIC)?;
        w.u32(CHECKPOINT_VERSION)?;
        let c = self.model.config();
        for v in [c.vocab_size, c.d_model, c.layers, c.heads, c.ffn_dim, c.max_len] {
            w.len(v)?;
        }
        for v in [self.window.max_len, self.window.left_len, self.window.right_len] {
            w.len(v)?;
        }
        w.len(self.vocab.len())?;
        for p in self.vocab.pieces() {
            w.str(p)?;
        }
        let tensors = self.model.params().tensors();
        w.len(tensors.len())?;
        for (name, data) in tensors {
            w.str(&name)?;
            w.f64s(data)?;
        }
        w.finish()?;
        Ok(())
    }

    pub fn read_from<R: Read>(input: R) -> Result<Self> {
        let mut r = Reader::new(input);
        r.expect_magic(MAGIC)?;
        let version = r.u32()?;
        if version != CHECKPOINT_VERSION {
            return Err(Error::Format(format!(
                "unsupported checkpoint version {version}, expected {CHECKPOINT_VERSION}"
            )));
        }
        let config = ModelConfig {
            vocab_size: r.len()?,
            d_model: r.len()?,
            layers: r.len()?,
            heads: r.len()?,
            ffn_dim: r.len()?,
            max_len: r.len()?,
        };
        config.validate()?;
        let window = WindowConfig { max_len: r.len()?, left_len: r.len()?, right_len: r.len()? };
        let n = r.len()?;
        let pieces = (0..n).map(|_| r.str()).collect::<Result<Vec<_>>>()?;
        let vocab = WordPieceVocab::from_lines(pieces.iter().map(String::as_str))?;

        let mut params = Params::zeros(&config);
        let count = r.len()?;
        let mut slots = params.tensors_mut();
        if count != slots.len() {
            return Err(Error::Format(format!("expected {} tensors, found {count}", slots.len())));
        }
        for (expected, slot) in slots.iter_mut() {
            let name = r.str()?;
            if &name != expected {
                return Err(Error::Format(format!("expected tensor {expected}, found {name}")));
            }
            let data = r.f64s()?;
            if data.len() != slot.len() {
                return Err(Error::Format(format!(
                    "tensor {name}: expected {} values, found {}",
                    slot.len(),
                    data.len()
                )));
            }
            slot.copy_from_slice(&data);
        }
        drop(slots);
        r.expect_eof()?;
        let model = TokenScoringModel::from_params(config, params)?;
        Self::new(model, vocab, window)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(BufWriter::new(f))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(BufReader::new(f))
    }
}
