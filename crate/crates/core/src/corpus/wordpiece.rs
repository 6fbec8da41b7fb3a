use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use crate::{Error, Result};

/// Reserved vocabulary entries. Their ids are fixed at `0..6`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpecialToken {
    Pad,
    Unk,
    Cls,
    Sep,
    Start,
    End,
}

impl SpecialToken {
    pub const ALL: [SpecialToken; 6] = [
        SpecialToken::Pad,
        SpecialToken::Unk,
        SpecialToken::Cls,
        SpecialToken::Sep,
        SpecialToken::Start,
        SpecialToken::End,
    ];

    pub fn id(self) -> u32 {
        self as u32
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SpecialToken::Pad => "[PAD]",
            SpecialToken::Unk => "[UNK]",
            SpecialToken::Cls => "[CLS]",
            SpecialToken::Sep => "[SEP]",
            SpecialToken::Start => "[START]",
            SpecialToken::End => "[END]",
        }
    }
}

const CONTINUATION: &str = "##";
const MAX_WORD_CHARS: usize = 100;

/// Word-piece vocabulary with greedy longest-match segmentation.
///
/// A word's first piece is looked up as-is, later pieces with a `##` prefix.
/// Words that cannot be segmented map to a single `[UNK]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordPieceVocab {
    pieces: Vec<String>,
    ids: HashMap<String, u32>,
    longest_piece: usize,
}

impl WordPieceVocab {
    /// Builds a vocabulary from explicit pieces. Special tokens are prepended
    /// and duplicates ignored.
    pub fn from_pieces<I, S>(pieces: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut all: Vec<String> = SpecialToken::ALL.iter().map(|t| t.as_str().to_string()).collect();
        let mut ids: HashMap<String, u32> = all.iter().enumerate().map(|(i, p)| (p.clone(), i as u32)).collect();
        for p in pieces {
            let p = p.into();
            if p.is_empty() || ids.contains_key(&p) {
                continue;
            }
            ids.insert(p.clone(), all.len() as u32);
            all.push(p);
        }
        let longest_piece = all.iter().map(|p| p.trim_start_matches(CONTINUATION).chars().count()).max().unwrap_or(1);
        Self { pieces: all, ids, longest_piece }
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn id(&self, piece: &str) -> Option<u32> {
        self.ids.get(piece).copied()
    }

    pub fn piece(&self, id: u32) -> Option<&str> {
        self.pieces.get(id as usize).map(String::as_str)
    }

    pub fn pieces(&self) -> &[String] {
        &self.pieces
    }

    pub fn is_special(id: u32) -> bool {
        (id as usize) < SpecialToken::ALL.len()
    }

    /// Segments one normalized word into piece ids. Always returns at least
    /// one id.
    pub fn tokenize_word(&self, word: &str) -> Vec<u32> {
        let chars: Vec<char> = word.chars().collect();
        if chars.is_empty() || chars.len() > MAX_WORD_CHARS {
            return vec![SpecialToken::Unk.id()];
        }
        let mut out = Vec::new();
        let mut start = 0;
        let mut buf = String::new();
        while start < chars.len() {
            let mut end = chars.len().min(start + self.longest_piece);
            let mut found = None;
            while end > start {
                buf.clear();
                if start > 0 {
                    buf.push_str(CONTINUATION);
                }
                buf.extend(&chars[start..end]);
                if let Some(id) = self.id(&buf) {
                    found = Some(id);
                    break;
                }
                end -= 1;
            }
            match found {
                Some(id) => {
                    out.push(id);
                    start = end;
                }
                None => return vec![SpecialToken::Unk.id()],
            }
        }
        out
    }

    /// Segments a word sequence; returns piece ids and, for each piece, the
    /// index of the word it came from.
    pub fn encode_words<S: AsRef<str>>(&self, words: &[S]) -> (Vec<u32>, Vec<usize>) {
        let mut ids = Vec::new();
        let mut owners = Vec::new();
        for (i, w) in words.iter().enumerate() {
            for id in self.tokenize_word(w.as_ref()) {
                ids.push(id);
                owners.push(i);
            }
        }
        (ids, owners)
    }

    /// Writes one piece per line in id order.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = self.pieces.join("\n");
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_lines(text.lines())
    }

    /// Parses the `save` layout: special tokens first, then one piece per line.
    pub(crate) fn from_lines<'a>(mut lines: impl Iterator<Item = &'a str>) -> Result<Self> {
        for tok in SpecialToken::ALL {
            match lines.next() {
                Some(l) if l == tok.as_str() => {}
                other => {
                    return Err(Error::Format(format!(
                        "vocabulary must start with {}, found {:?}",
                        tok.as_str(),
                        other
                    )))
                }
            }
        }
        let rest: Vec<&str> = lines.filter(|l| !l.is_empty()).collect();
        let vocab = Self::from_pieces(rest.iter().copied());
        if vocab.len() != rest.len() + SpecialToken::ALL.len() {
            return Err(Error::Format("duplicate pieces in vocabulary".into()));
        }
        Ok(vocab)
    }
}

/// Deterministic vocabulary construction from a word corpus.
///
/// The vocabulary holds every character seen (both as a word start and as a
/// `##` continuation), the most frequent whole words, and the most frequent
/// word prefixes and continuation chunks among the remaining words.
#[derive(Debug, Clone)]
pub struct VocabBuilder {
    pub max_words: usize,
    pub max_subwords: usize,
    pub min_subword_count: usize,
}

impl Default for VocabBuilder {
    fn default() -> Self {
        Self { max_words: 20_000, max_subwords: 4_000, min_subword_count: 2 }
    }
}

fn top_by_count(counts: HashMap<String, usize>, limit: usize, min_count: usize) -> Vec<String> {
    let mut v: Vec<(String, usize)> = counts.into_iter().filter(|(_, c)| *c >= min_count).collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v.into_iter().take(limit).map(|(w, _)| w).collect()
}

impl VocabBuilder {
    pub fn build<'a, I>(&self, words: I) -> WordPieceVocab
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut word_counts: HashMap<String, usize> = HashMap::new();
        for w in words {
            if !w.is_empty() && w.chars().count() <= MAX_WORD_CHARS {
                *word_counts.entry(w.to_string()).or_default() += 1;
            }
        }

        let mut pieces: BTreeSet<String> = BTreeSet::new();
        for w in word_counts.keys() {
            for (i, c) in w.chars().enumerate() {
                pieces.insert(if i == 0 { c.to_string() } else { format!("{CONTINUATION}{c}") });
            }
        }

        let whole = top_by_count(word_counts.clone(), self.max_words, 1);
        let kept: std::collections::HashSet<&String> = whole.iter().collect();
        let mut sub_counts: HashMap<String, usize> = HashMap::new();
        for (w, &c) in &word_counts {
            if kept.contains(w) {
                continue;
            }
            let chars: Vec<char> = w.chars().collect();
            for len in 2..=chars.len().min(6) {
                *sub_counts.entry(chars[..len].iter().collect()).or_default() += c;
            }
            for start in 1..chars.len() {
                for len in 2..=(chars.len() - start).min(4) {
                    let s: String = chars[start..start + len].iter().collect();
                    *sub_counts.entry(format!("{CONTINUATION}{s}")).or_default() += c;
                }
            }
        }
        pieces.extend(top_by_count(sub_counts, self.max_subwords, self.min_subword_count));
        pieces.extend(whole);
        WordPieceVocab::from_pieces(pieces)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn special_ids_are_fixed() {
        let v = WordPieceVocab::from_pieces(["a"]);
        for t in SpecialToken::ALL {
            assert_eq!(v.id(t.as_str()), Some(t.id()));
        }
        assert_eq!(v.id("a"), Some(6));
    }

    #[test]
    fn greedy_longest_match() {
        let v = WordPieceVocab::from_pieces(["un", "unaff", "##able", "##aff", "##a", "##ble"]);
        let ids = v.tokenize_word("unaffable");
        let pieces: Vec<&str> = ids.iter().map(|&i| v.piece(i).unwrap()).collect();
        assert_eq!(pieces, ["unaff", "##able"]);
    }

    #[test]
    fn unsegmentable_word_is_unk() {
        let v = WordPieceVocab::from_pieces(["a", "##b"]);
        assert_eq!(v.tokenize_word("ac"), vec![SpecialToken::Unk.id()]);
        assert_eq!(v.tokenize_word(""), vec![SpecialToken::Unk.id()]);
    }

    #[test]
    fn builder_falls_back_to_characters() {
        let v = VocabBuilder { max_words: 1, ..Default::default() }.build(["domino", "domino", "coffee"]);
        assert_eq!(v.tokenize_word("domino").len(), 1);
        let coffee = v.tokenize_word("coffee");
        assert!(coffee.len() > 1);
        assert!(!coffee.contains(&SpecialToken::Unk.id()));
        // unseen word made of seen characters
        assert!(!v.tokenize_word("coin").contains(&SpecialToken::Unk.id()));
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let v = VocabBuilder::default().build(["alpha", "beta", "alphabet"]);
        let p = dir.path().join("vocab.txt");
        v.save(&p).unwrap();
        assert_eq!(WordPieceVocab::load(&p).unwrap(), v);
    }

    #[test]
    fn load_rejects_missing_specials() {
        assert!(WordPieceVocab::from_lines(["a", "b"].into_iter()).is_err());
    }

    proptest! {
        #[test]
        fn seen_words_decompose_into_known_pieces(words in prop::collection::vec("[a-z0-9]{1,12}", 1..30)) {
            let v = VocabBuilder { max_words: 5, max_subwords: 20, min_subword_count: 1 }
                .build(words.iter().map(String::as_str));
            let ids: Vec<u32> = (0..v.len() as u32).collect();
            prop_assert_eq!(ids.len(), v.pieces().len());
            for w in &words {
                let pieces = v.tokenize_word(w);
                prop_assert!(!pieces.is_empty());
                prop_assert!(!pieces.contains(&SpecialToken::Unk.id()));
                let rebuilt: String = pieces
                    .iter()
                    .map(|&i| v.piece(i).unwrap().trim_start_matches(CONTINUATION))
                    .collect();
                prop_assert_eq!(&rebuilt, w);
            }
        }
    }
}
