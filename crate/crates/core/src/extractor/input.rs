use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize_words, MentionRecord, SpecialToken, WordPieceVocab};
use crate::{Error, Result};

/// Context window for the extractor input, in word pieces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowConfig {
    pub max_len: usize,
    pub left_len: usize,
    pub right_len: usize,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self { max_len: 128, left_len: 64, right_len: 64 }
    }
}

/// Word-piece encoding of `[CLS] M_l [START] m [END] M_r [SEP]`.
///
/// `words` lists the (possibly partially) kept source words in order;
/// `piece_to_word[i]` is `None` for the four special positions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractorInput {
    pub token_ids: Vec<u32>,
    pub piece_to_word: Vec<Option<usize>>,
    pub words: Vec<String>,
    /// Word indices of the mention inside `words`.
    pub mention_span: Range<usize>,
}

impl ExtractorInput {
    pub fn len(&self) -> usize {
        self.token_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.token_ids.is_empty()
    }

    /// Word owning position `i`, if any.
    pub fn word_at(&self, i: usize) -> Option<&str> {
        self.piece_to_word[i].map(|w| self.words[w].as_str())
    }

    pub fn mention_words(&self) -> &[String] {
        &self.words[self.mention_span.clone()]
    }
}

fn encode(vocab: &WordPieceVocab, text: &str) -> (Vec<String>, Vec<u32>, Vec<usize>) {
    let words = tokenize_words(text).into_words();
    let (ids, owners) = vocab.encode_words(&words);
    (words, ids, owners)
}

/// Builds the extractor input for `mention`.
///
/// The left context keeps its rightmost pieces, the right context its
/// leftmost. Each side is capped at its own length; if both together still
/// do not fit next to the mention, the shorter side keeps what it has up to
/// half the remaining budget and the other side takes the rest. The mention
/// is never truncated.
pub fn build_extractor_input(
    mention: &MentionRecord,
    vocab: &WordPieceVocab,
    window: WindowConfig,
) -> Result<ExtractorInput> {
    let (lw, lids, lown) = encode(vocab, &mention.left_context);
    let (mw, mids, mown) = encode(vocab, &mention.mention);
    let (rw, rids, rown) = encode(vocab, &mention.right_context);

    let max_mention = window.max_len.saturating_sub(4);
    if mids.len() > max_mention {
        return Err(Error::MentionTooLong { pieces: mids.len(), max: max_mention });
    }
    let budget = max_mention - mids.len();
    let left_cap = lids.len().min(window.left_len);
    let right_cap = rids.len().min(window.right_len);
    let (left_keep, right_keep) = if left_cap + right_cap <= budget {
        (left_cap, right_cap)
    } else {
        let left = left_cap.min((budget / 2).max(budget.saturating_sub(right_cap)));
        (left, right_cap.min(budget - left))
    };

    let mut token_ids = Vec::with_capacity(left_keep + mids.len() + right_keep + 4);
    let mut piece_to_word = Vec::with_capacity(token_ids.capacity());
    let mut words = Vec::new();

    token_ids.push(SpecialToken::Cls.id());
    piece_to_word.push(None);

    let lstart = lids.len() - left_keep;
    if left_keep > 0 {
        let first_word = lown[lstart];
        words.extend_from_slice(&lw[first_word..]);
        for i in lstart..lids.len() {
            token_ids.push(lids[i]);
            piece_to_word.push(Some(lown[i] - first_word));
        }
    }

    token_ids.push(SpecialToken::Start.id());
    piece_to_word.push(None);
    let moff = words.len();
    words.extend(mw);
    for (&id, &w) in mids.iter().zip(&mown) {
        token_ids.push(id);
        piece_to_word.push(Some(moff + w));
    }
    let mention_span = moff..words.len();
    token_ids.push(SpecialToken::End.id());
    piece_to_word.push(None);

    if right_keep > 0 {
        let roff = words.len();
        let last_word = rown[right_keep - 1];
        words.extend_from_slice(&rw[..=last_word]);
        for i in 0..right_keep {
            token_ids.push(rids[i]);
            piece_to_word.push(Some(roff + rown[i]));
        }
    }

    token_ids.push(SpecialToken::Sep.id());
    piece_to_word.push(None);

    Ok(ExtractorInput { token_ids, piece_to_word, words, mention_span })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::VocabBuilder;

    fn vocab() -> WordPieceVocab {
        VocabBuilder::default()
            .build("anzu bought magazines domino station coffee shop w0 w1 w2 w3 w4 w5 w6 w7 w8 w9".split(' '))
    }

    fn mention(left: &str, m: &str, right: &str) -> MentionRecord {
        MentionRecord::new("m", left, m, right, "E")
    }

    #[test]
    fn empty_contexts() {
        let v = vocab();
        let x = build_extractor_input(&mention("", "coffee shop", ""), &v, WindowConfig::default()).unwrap();
        let s = |t: SpecialToken| t.id();
        assert_eq!(
            x.token_ids,
            vec![
                s(SpecialToken::Cls),
                s(SpecialToken::Start),
                v.id("coffee").unwrap(),
                v.id("shop").unwrap(),
                s(SpecialToken::End),
                s(SpecialToken::Sep)
            ]
        );
        assert_eq!(x.mention_words(), ["coffee", "shop"]);
        assert_eq!(x.piece_to_word, vec![None, None, Some(0), Some(1), None, None]);
    }

    #[test]
    fn long_left_context_keeps_rightmost() {
        let v = vocab();
        let left: Vec<String> = (0..200).map(|i| format!("w{}", i % 10)).collect();
        let w = WindowConfig { max_len: 512, left_len: 64, right_len: 64 };
        let x = build_extractor_input(&mention(&left.join(" "), "coffee", "anzu"), &v, w).unwrap();
        // every w_i is a single piece
        assert_eq!(x.words.len(), 64 + 1 + 1);
        assert_eq!(x.words[..64], left[136..]);
        assert_eq!(x.len(), 64 + 1 + 1 + 4);
    }

    #[test]
    fn total_length_bounded() {
        let v = vocab();
        let side: Vec<String> = (0..100).map(|i| format!("w{}", i % 10)).collect();
        let side = side.join(" ");
        let w = WindowConfig { max_len: 32, left_len: 64, right_len: 64 };
        let x = build_extractor_input(&mention(&side, "coffee shop", &side), &v, w).unwrap();
        assert_eq!(x.len(), 32);
        assert_eq!(x.token_ids[0], SpecialToken::Cls.id());
        assert_eq!(*x.token_ids.last().unwrap(), SpecialToken::Sep.id());
        let starts = x.token_ids.iter().filter(|&&t| t == SpecialToken::Start.id()).count();
        let ends = x.token_ids.iter().filter(|&&t| t == SpecialToken::End.id()).count();
        assert_eq!((starts, ends), (1, 1));
    }

    #[test]
    fn short_side_keeps_everything() {
        let v = vocab();
        let left: Vec<String> = (0..100).map(|i| format!("w{}", i % 10)).collect();
        let w = WindowConfig { max_len: 32, left_len: 64, right_len: 64 };
        let x = build_extractor_input(&mention(&left.join(" "), "coffee", "anzu"), &v, w).unwrap();
        assert_eq!(x.len(), 32);
        assert_eq!(x.words.last().unwrap(), "anzu");
    }

    #[test]
    fn mention_too_long() {
        let v = vocab();
        let m: Vec<&str> = std::iter::repeat_n("coffee", 10).collect();
        let w = WindowConfig { max_len: 12, left_len: 4, right_len: 4 };
        let err = build_extractor_input(&mention("", &m.join(" "), ""), &v, w).unwrap_err();
        assert!(matches!(err, Error::MentionTooLong { pieces: 10, max: 8 }));
    }

    #[test]
    fn partial_word_at_left_boundary_stays_aligned() {
        let v = WordPieceVocab::from_pieces(["a", "##b", "##c", "x", "m"]);
        let w = WindowConfig { max_len: 64, left_len: 2, right_len: 0 };
        let x = build_extractor_input(&mention("x abc", "m", ""), &v, w).unwrap();
        // "abc" = a ##b ##c; only "##b ##c" fit
        assert_eq!(x.words, ["abc", "m"]);
        assert_eq!(x.piece_to_word[1..3], [Some(0), Some(0)]);
    }
}
