//! Seeded synthetic corpora for tests, benchmarks and smoke runs.
//!
//! Words are made-up syllable strings, so nothing here depends on a natural
//! language word list and every generator is reproducible from its seed.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{DomainSplit, EntityRecord, MentionRecord};
use crate::{Error, Result};

const ONSETS: [&str; 14] = ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z"];
const VOWELS: [&str; 5] = ["a", "e", "i", "o", "u"];

/// Draws pronounceable pseudo-words that never repeat within one generator.
#[derive(Debug)]
pub struct WordFactory {
    rng: ChaCha8Rng,
    seen: HashSet<String>,
}

impl WordFactory {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), seen: HashSet::new() }
    }

    /// Marks words as taken so they are never generated.
    pub fn reserve<'a>(&mut self, words: impl IntoIterator<Item = &'a str>) {
        self.seen.extend(words.into_iter().map(str::to_string));
    }

    pub fn fresh(&mut self) -> String {
        loop {
            let syllables = self.rng.random_range(2..=4);
            let mut w = String::new();
            for _ in 0..syllables {
                w.push_str(ONSETS.choose(&mut self.rng).unwrap());
                w.push_str(VOWELS.choose(&mut self.rng).unwrap());
            }
            if self.seen.insert(w.clone()) {
                return w;
            }
        }
    }

    pub fn many(&mut self, n: usize) -> Vec<String> {
        (0..n).map(|_| self.fresh()).collect()
    }
}

/// A sentence in which the word right after a sentinel is the keyword.
#[derive(Debug, Clone)]
pub struct SentinelExample {
    pub mention: MentionRecord,
    pub keyword: String,
}

pub const SENTINEL: &str = "zq";

/// Mentions whose single keyword is the word following [`SENTINEL`].
///
/// Each example uses `words_per_side` distinct pool words on each side of a
/// one-word mention, so the keyword occurs exactly once. The sentinel sits
/// at a random position on a random side.
pub fn sentinel_examples(count: usize, words_per_side: usize, pool: &[String], seed: u64) -> Vec<SentinelExample> {
    assert!(pool.len() > 2 * words_per_side + 1, "word pool too small");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let mut words: Vec<&String> = pool.choose_multiple(&mut rng, 2 * words_per_side + 1).collect();
            words.shuffle(&mut rng);
            let mention = words.pop().unwrap().clone();
            let (left, right) = words.split_at_mut(words_per_side);
            let on_left = rng.random_bool(0.5);
            let side: &[&String] = if on_left { left } else { right };
            // Position of the keyword within its side; the sentinel goes right before it.
            let pos = rng.random_range(0..side.len());
            let keyword = side[pos].clone();
            let render = |ws: &[&String], insert_at: Option<usize>| {
                let mut out = Vec::with_capacity(ws.len() + 1);
                for (j, w) in ws.iter().enumerate() {
                    if insert_at == Some(j) {
                        out.push(SENTINEL);
                    }
                    out.push(w.as_str());
                }
                out.join(" ")
            };
            let (l, r) = if on_left {
                (render(left, Some(pos)), render(right, None))
            } else {
                (render(left, None), render(right, Some(pos)))
            };
            SentinelExample { mention: MentionRecord::new(format!("s{i}"), l, mention, r, "none"), keyword }
        })
        .collect()
}

/// Parameters for [`mismatch_corpus`].
#[derive(Debug, Clone)]
pub struct MismatchConfig {
    pub entities: usize,
    /// Words unique to each entity description.
    pub signature_words: usize,
    /// Shared filler words per description.
    pub filler_per_description: usize,
    pub filler_pool: usize,
    /// Context words per side, before cue and signature insertions.
    pub context_words: usize,
    /// Signatures of other entities mixed into each context, without a cue.
    pub distractors: usize,
    pub train: usize,
    pub dev: usize,
    pub test: usize,
}

impl Default for MismatchConfig {
    fn default() -> Self {
        Self {
            entities: 200,
            signature_words: 3,
            filler_per_description: 10,
            filler_pool: 300,
            context_words: 40,
            distractors: 2,
            train: 300,
            dev: 50,
            test: 200,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MismatchCorpus {
    pub entities: Vec<EntityRecord>,
    pub train: Vec<MentionRecord>,
    pub dev: Vec<MentionRecord>,
    pub test: Vec<MentionRecord>,
}

impl MismatchCorpus {
    /// Writes `<name>/{entities,train,dev,test}.jsonl` under `dir` and returns
    /// the matching split entry.
    pub fn write_domain(&self, dir: &Path, name: &str) -> Result<DomainSplit> {
        let root = dir.join(name);
        std::fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        let split = DomainSplit {
            name: name.to_string(),
            entities: root.join("entities.jsonl"),
            train: root.join("train.jsonl"),
            dev: root.join("dev.jsonl"),
            test: root.join("test.jsonl"),
        };
        write_jsonl(&split.entities, &self.entities)?;
        write_jsonl(&split.train, &self.train)?;
        write_jsonl(&split.dev, &self.dev)?;
        write_jsonl(&split.test, &self.test)?;
        Ok(split)
    }
}

/// One JSON object per line.
pub fn write_jsonl<T: serde::Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// The word that precedes each gold signature word in a mismatch context.
pub const CUE: &str = "called";

/// A corpus where mention surfaces never occur in any description.
///
/// Every entity gets a few signature words that appear in no other
/// description. A mention's surface is drawn from a separate pool, so a
/// query made of mention words alone matches nothing. The gold entity's
/// signature words appear in the context, each right after [`CUE`], mixed
/// with filler words and with signature words of other entities.
pub fn mismatch_corpus(cfg: &MismatchConfig, seed: u64) -> MismatchCorpus {
    let mut words = WordFactory::new(seed);
    words.reserve([CUE, SENTINEL]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);

    let fillers = words.many(cfg.filler_pool);
    let surfaces = words.many(40);
    let signatures: Vec<Vec<String>> = (0..cfg.entities).map(|_| words.many(cfg.signature_words)).collect();

    let entities = signatures
        .iter()
        .enumerate()
        .map(|(i, sig)| {
            let mut desc: Vec<&str> = sig.iter().map(String::as_str).collect();
            desc.extend(fillers.choose_multiple(&mut rng, cfg.filler_per_description).map(String::as_str));
            desc.shuffle(&mut rng);
            EntityRecord::new(format!("E{i}"), format!("entity {i}"), desc.join(" "))
        })
        .collect::<Vec<_>>();

    let mut mention = |id: String| {
        let gold = rng.random_range(0..cfg.entities);
        let mut inserts: Vec<Vec<&str>> = signatures[gold].iter().map(|w| vec![CUE, w.as_str()]).collect();
        for _ in 0..cfg.distractors {
            let other = loop {
                let o = rng.random_range(0..cfg.entities);
                if o != gold {
                    break o;
                }
            };
            inserts.push(vec![signatures[other].choose(&mut rng).unwrap().as_str()]);
        }
        let mut sides: [Vec<&str>; 2] = [
            fillers.choose_multiple(&mut rng, cfg.context_words).map(String::as_str).collect(),
            fillers.choose_multiple(&mut rng, cfg.context_words).map(String::as_str).collect(),
        ];
        for ins in inserts {
            let side = &mut sides[rng.random_range(0..2)];
            let at = rng.random_range(0..=side.len());
            side.splice(at..at, ins);
        }
        let surface_len = rng.random_range(1..=2);
        let surface: Vec<&str> = surfaces.choose_multiple(&mut rng, surface_len).map(String::as_str).collect();
        MentionRecord::new(id, sides[0].join(" "), surface.join(" "), sides[1].join(" "), format!("E{gold}"))
    };
    let mut split = |prefix: &str, n: usize| (0..n).map(|i| mention(format!("{prefix}{i}"))).collect::<Vec<_>>();
    let train = split("train", cfg.train);
    let dev = split("dev", cfg.dev);
    let test = split("test", cfg.test);
    MismatchCorpus { entities, train, dev, test }
}
