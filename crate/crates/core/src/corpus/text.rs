use std::collections::BTreeSet;

/// An ordered sequence of normalized words.
///
/// Every word is non-empty, lowercase and consists only of alphanumeric
/// characters. Order follows the source text.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WordSequence(Vec<String>);

impl WordSequence {
    pub fn new(words: Vec<String>) -> Self {
        debug_assert!(words.iter().all(|w| !w.is_empty()));
        Self(words)
    }

    pub fn words(&self) -> &[String] {
        &self.0
    }

    pub fn into_words(self) -> Vec<String> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, String> {
        self.0.iter()
    }

    /// Set view of the sequence.
    pub fn word_set(&self) -> BTreeSet<String> {
        self.0.iter().cloned().collect()
    }

    pub fn join(&self) -> String {
        self.0.join(" ")
    }
}

impl<'a> IntoIterator for &'a WordSequence {
    type Item = &'a String;
    type IntoIter = std::slice::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl FromIterator<String> for WordSequence {
    fn from_iter<I: IntoIterator<Item = String>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// Splits `text` into normalized words.
///
/// Normalization table:
///
/// | input                         | rule                                  |
/// |-------------------------------|---------------------------------------|
/// | alphanumeric char (Unicode)   | kept, lowercased                      |
/// | anything else (space, `-`, `!`, `'`, `:` ...) | word boundary         |
/// | run of boundary chars         | a single boundary, no empty words     |
///
/// So `"Yu-Gi-Oh!"` becomes `[yu, gi, oh]` and `"10:00"` becomes `[10, 00]`.
/// The same rule is used on the query side and the index side.
pub fn tokenize_words(text: &str) -> WordSequence {
    let mut words = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            // Some lowercase mappings emit combining marks; drop them so the
            // output stays alphanumeric.
            current.extend(ch.to_lowercase().filter(|c| c.is_alphanumeric()));
        } else if !current.is_empty() {
            words.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        words.push(current);
    }
    WordSequence(words)
}
