use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Okapi BM25 free parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Self { k1: 1.5, b: 0.75 }
    }
}

impl Bm25Params {
    pub fn new(k1: f64, b: f64) -> Result<Self> {
        let p = Self { k1, b };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k1 > 0.0 && self.k1.is_finite()) {
            return Err(Error::InvalidParam(format!("k1 must be positive, got {}", self.k1)));
        }
        if !(0.0..=1.0).contains(&self.b) {
            return Err(Error::InvalidParam(format!("b must be in [0, 1], got {}", self.b)));
        }
        Ok(())
    }

    /// `k1 * (1 - b + b * len / avgdl)`. A corpus of empty documents has
    /// `avgdl = 0`; the length term is dropped then.
    pub fn length_norm(&self, doc_len: f64, avgdl: f64) -> f64 {
        let rel = if avgdl > 0.0 { doc_len / avgdl } else { 1.0 };
        self.k1 * (1.0 - self.b + self.b * rel)
    }
}

/// Lucene-style IDF, `ln(1 + (N - df + 0.5) / (df + 0.5))`. Non-negative for
/// `df <= N`.
pub fn idf(doc_freq: u64, doc_count: u64) -> f64 {
    debug_assert!(doc_freq <= doc_count, "{doc_freq} > {doc_count}");
    let x = (doc_count as f64 - doc_freq as f64 + 0.5) / (doc_freq as f64 + 0.5);
    x.ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let p = Bm25Params::default();
        assert_eq!((p.k1, p.b), (1.5, 0.75));
    }

    #[test]
    fn validation() {
        assert!(Bm25Params::new(0.0, 0.5).is_err());
        assert!(Bm25Params::new(1.2, 1.1).is_err());
        assert!(Bm25Params::new(1.2, -0.1).is_err());
        assert!(Bm25Params::new(1.2, 0.0).is_ok());
    }

    #[test]
    fn idf_values() {
        assert!((idf(1, 2) - std::f64::consts::LN_2).abs() < 1e-15);
        for n in 1..30 {
            for df in 0..=n {
                assert!(idf(df, n) >= 0.0);
            }
        }
        assert!(idf(1, 100) > idf(50, 100));
    }
}
