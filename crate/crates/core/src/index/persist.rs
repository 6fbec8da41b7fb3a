//! Index file layout (all integers and floats little-endian):
//!
//! ```text
//! magic        8 bytes  "KWSPIDX\0"
//! version      u32      currently 1
//! params       f64 k1, f64 b
//! stats        u64 doc_count, u64 total_len, f64 threshold,
//!              u64 entries, then entries x (str word, u32 df) sorted by word
//! documents    u64 count, then count x (str entity_id, u32 length) by ordinal
//! postings     u64 terms, then terms x (str term, u64 len, len x (u32 doc, u32 tf))
//!              sorted by term
//! ```
//!
//! `str` is a u64 byte length followed by UTF-8 bytes. Stopwords, IDF and
//! length norms are recomputed on load.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Bm25Params, InvertedIndex, Posting};
use crate::corpus::CorpusStats;
use crate::io::{Reader, Writer};
use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"KWSPIDX\0";
pub const FORMAT_VERSION: u32 = 1;

impl InvertedIndex {
    pub fn write_to<W: Write>(&self, out: W) -> Result<()> {
        let mut w = Writer::new(out);
        w.bytes(MAGIC)?;
        w.u32(FORMAT_VERSION)?;
        w.f64(self.params.k1)?;
        w.f64(self.params.b)?;

        w.u64(self.stats.doc_count() as u64)?;
        w.u64(self.stats.total_len())?;
        w.f64(self.stats.threshold())?;
        let mut df: Vec<(&String, &u32)> = self.stats.doc_freqs().iter().collect();
        df.sort_unstable();
        w.len(df.len())?;
        for (word, &count) in df {
            w.str(word)?;
            w.u32(count)?;
        }

        w.len(self.entity_ids.len())?;
        for (id, &len) in self.entity_ids.iter().zip(&self.doc_lengths) {
            w.str(id)?;
            w.u32(len)?;
        }

        w.len(self.terms.len())?;
        for (term, list) in self.terms.iter().zip(&self.postings) {
            w.str(term)?;
            w.len(list.len())?;
            for p in list {
                w.u32(p.doc)?;
                w.u32(p.tf)?;
            }
        }
        w.finish()?;
        Ok(())
    }

    pub fn read_from<R: Read>(input: R) -> Result<Self> {
        let mut r = Reader::new(input);
        r.expect_magic(MAGIC)?;
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported index version {version}, expected {FORMAT_VERSION}")));
        }
        let params = Bm25Params { k1: r.f64()?, b: r.f64()? };
        params.validate()?;

        let doc_count = r.len()?;
        let total_len = r.u64()?;
        let threshold = r.f64()?;
        let entries = r.len()?;
        let mut doc_freq = HashMap::with_capacity(entries);
        for _ in 0..entries {
            let word = r.str()?;
            let df = r.u32()?;
            if df as usize > doc_count {
                return Err(Error::Format(format!("df {df} of {word:?} exceeds doc count")));
            }
            doc_freq.insert(word, df);
        }
        let stats = CorpusStats::from_parts(doc_count, doc_freq, total_len, threshold);

        let n = r.len()?;
        if n != doc_count {
            return Err(Error::Format(format!("{n} documents but stats say {doc_count}")));
        }
        let mut entity_ids = Vec::with_capacity(n);
        let mut doc_lengths = Vec::with_capacity(n);
        let mut ordinals = HashMap::with_capacity(n);
        for i in 0..n {
            let id = r.str()?;
            if ordinals.insert(id.clone(), i as u32).is_some() {
                return Err(Error::DuplicateEntity(id));
            }
            entity_ids.push(id);
            doc_lengths.push(r.u32()?);
        }

        let n_terms = r.len()?;
        let mut terms = Vec::with_capacity(n_terms);
        let mut term_ids = HashMap::with_capacity(n_terms);
        let mut postings = Vec::with_capacity(n_terms);
        for t in 0..n_terms {
            let term = r.str()?;
            let len = r.len()?;
            let mut list = Vec::with_capacity(len);
            for _ in 0..len {
                let doc = r.u32()?;
                let tf = r.u32()?;
                if doc as usize >= n || tf == 0 {
                    return Err(Error::Format(format!("bad posting ({doc}, {tf}) for {term:?}")));
                }
                list.push(Posting { doc, tf });
            }
            term_ids.insert(term.clone(), t as u32);
            terms.push(term);
            postings.push(list);
        }
        r.expect_eof()?;

        Ok(Self::assemble(params, stats, entity_ids, ordinals, doc_lengths, terms, term_ids, postings))
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
