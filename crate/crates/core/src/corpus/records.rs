use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// An entity and its description document, the unit of retrieval.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityRecord {
    #[serde(rename = "document_id")]
    pub entity_id: String,
    pub title: String,
    /// The description document. May be empty.
    #[serde(rename = "text")]
    pub description: String,
}

impl EntityRecord {
    pub fn new(entity_id: impl Into<String>, title: impl Into<String>, description: impl Into<String>) -> Self {
        Self { entity_id: entity_id.into(), title: title.into(), description: description.into() }
    }
}

/// A mention with its surrounding context and gold entity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentionRecord {
    pub mention_id: String,
    #[serde(rename = "text")]
    pub mention: String,
    #[serde(default)]
    pub left_context: String,
    #[serde(default)]
    pub right_context: String,
    #[serde(rename = "label_document_id")]
    pub gold_entity_id: String,
}

impl MentionRecord {
    pub fn new(
        mention_id: impl Into<String>,
        left_context: impl Into<String>,
        mention: impl Into<String>,
        right_context: impl Into<String>,
        gold_entity_id: impl Into<String>,
    ) -> Self {
        Self {
            mention_id: mention_id.into(),
            mention: mention.into(),
            left_context: left_context.into(),
            right_context: right_context.into(),
            gold_entity_id: gold_entity_id.into(),
        }
    }

    /// The full passage `M_l m M_r` joined with spaces.
    pub fn full_context(&self) -> String {
        format!("{} {} {}", self.left_context, self.mention, self.right_context)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Reject mentions whose gold entity is missing instead of dropping them
    /// with a warning.
    pub strict: bool,
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

/// Reads an entities JSON-lines file. Entity ids must be unique.
pub fn load_entities(path: impl AsRef<Path>) -> Result<Vec<EntityRecord>> {
    let entities: Vec<EntityRecord> = read_jsonl(path.as_ref())?;
    let mut seen = HashSet::with_capacity(entities.len());
    for e in &entities {
        if !seen.insert(e.entity_id.as_str()) {
            return Err(Error::DuplicateEntity(e.entity_id.clone()));
        }
    }
    Ok(entities)
}

/// Reads a mentions JSON-lines file. Mentions must have a non-empty surface.
pub fn load_mentions(path: impl AsRef<Path>) -> Result<Vec<MentionRecord>> {
    let path = path.as_ref();
    let mentions: Vec<MentionRecord> = read_jsonl(path)?;
    if let Some(m) = mentions.iter().find(|m| m.mention.trim().is_empty()) {
        return Err(Error::MalformedRecord {
            path: path.to_path_buf(),
            line: 0,
            message: format!("mention {} has an empty surface string", m.mention_id),
        });
    }
    Ok(mentions)
}

/// Loads entities and mentions and checks that every gold id resolves.
///
/// In strict mode a dangling gold id is an error; otherwise the mention is
/// dropped and a warning is logged.
pub fn load_corpus(
    entities_path: impl AsRef<Path>,
    mentions_path: impl AsRef<Path>,
    opts: LoadOptions,
) -> Result<(Vec<EntityRecord>, Vec<MentionRecord>)> {
    let entities = load_entities(entities_path)?;
    let mentions = load_mentions(mentions_path)?;
    let ids: HashSet<&str> = entities.iter().map(|e| e.entity_id.as_str()).collect();
    let mut kept = Vec::with_capacity(mentions.len());
    for m in mentions {
        if ids.contains(m.gold_entity_id.as_str()) {
            kept.push(m);
        } else if opts.strict {
            return Err(Error::DanglingGold { mention_id: m.mention_id, entity_id: m.gold_entity_id });
        } else {
            log::warn!("dropping mention {}: gold entity {} not in corpus", m.mention_id, m.gold_entity_id);
        }
    }
    Ok((entities, kept))
}

/// One domain of a train/dev/test split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainSplit {
    pub name: String,
    pub entities: PathBuf,
    pub train: PathBuf,
    pub dev: PathBuf,
    pub test: PathBuf,
}

/// Per-domain train/dev/test mention files.
///
/// ```json
/// {"domains": [{"name": "lego", "entities": "lego/documents.jsonl",
///   "train": "lego/train.jsonl", "dev": "lego/dev.jsonl", "test": "lego/test.jsonl"}]}
/// ```
///
/// Relative paths are resolved against the manifest's directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub domains: Vec<DomainSplit>,
}

impl SplitManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut manifest: SplitManifest = serde_json::from_str(&text)?;
        if let Some(base) = path.parent() {
            manifest.resolve_relative_to(base);
        }
        Ok(manifest)
    }

    pub fn resolve_relative_to(&mut self, base: &Path) {
        for d in &mut self.domains {
            for p in [&mut d.entities, &mut d.train, &mut d.dev, &mut d.test] {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
    }
}
