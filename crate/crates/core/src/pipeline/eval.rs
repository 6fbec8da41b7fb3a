use std::fmt;

use serde::{Deserialize, Serialize};

use super::QueryBuilder;
use crate::corpus::MentionRecord;
use crate::index::InvertedIndex;
use crate::par::{self, Execution};
use crate::{Error, Result};

/// Recall@n for one domain, in percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainRecall {
    pub domain: String,
    pub n: usize,
    pub recall: f64,
    pub count: usize,
}

/// Per-domain recalls with unweighted (macro) and mention-weighted (micro)
/// averages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub domains: Vec<DomainRecall>,
    pub macro_avg: f64,
    pub micro_avg: f64,
}

impl EvalReport {
    pub fn from_domains(n: usize, domains: Vec<DomainRecall>) -> Result<Self> {
        if domains.is_empty() {
            return Err(Error::EmptyMentions);
        }
        let macro_avg = domains.iter().map(|d| d.recall).sum::<f64>() / domains.len() as f64;
        let total: usize = domains.iter().map(|d| d.count).sum();
        if total == 0 {
            return Err(Error::EmptyMentions);
        }
        let micro_avg = domains.iter().map(|d| d.recall * d.count as f64).sum::<f64>() / total as f64;
        Ok(Self { n, domains, macro_avg, micro_avg })
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.domains.iter().map(|d| d.domain.len()).max().unwrap_or(0).max(13);
        writeln!(f, "{:<width$}  {:>8}  {:>10}", "domain", "mentions", format!("R@{}", self.n))?;
        for d in &self.domains {
            writeln!(f, "{:<width$}  {:>8}  {:>10.2}", d.domain, d.count, d.recall)?;
        }
        writeln!(f, "{:<width$}  {:>8}  {:>10.2}", "macro average", "", self.macro_avg)?;
        write!(f, "{:<width$}  {:>8}  {:>10.2}", "micro average", "", self.micro_avg)
    }
}

/// Percentage of mentions whose gold entity is among the top `n` results.
pub fn evaluate_domain(
    domain: &str,
    mentions: &[MentionRecord],
    index: &InvertedIndex,
    builder: &QueryBuilder<'_>,
    n: usize,
    exec: Execution,
) -> Result<DomainRecall> {
    if mentions.is_empty() {
        return Err(Error::EmptyMentions);
    }
    if n == 0 {
        return Err(Error::InvalidParam("n must be at least 1".into()));
    }
    let found = par::try_map(exec, mentions, |m| -> Result<bool> {
        if index.ordinal(&m.gold_entity_id).is_none() {
            return Err(Error::DanglingGold { mention_id: m.mention_id.clone(), entity_id: m.gold_entity_id.clone() });
        }
        let q = builder.build(m)?;
        Ok(index.retrieve(&q.terms(), n).contains(&m.gold_entity_id))
    })?;
    let hits = found.iter().filter(|&&f| f).count();
    Ok(DomainRecall {
        domain: domain.to_string(),
        n,
        recall: 100.0 * hits as f64 / mentions.len() as f64,
        count: mentions.len(),
    })
}

/// Single-domain convenience wrapper around [`evaluate_domain`].
pub fn evaluate_recall(
    mentions: &[MentionRecord],
    index: &InvertedIndex,
    builder: &QueryBuilder<'_>,
    n: usize,
    exec: Execution,
) -> Result<EvalReport> {
    let d = evaluate_domain("all", mentions, index, builder, n, exec)?;
    EvalReport::from_domains(n, vec![d])
}
