//! Multi-domain, multi-seed evaluation driven by a TOML file.
//!
//! ```toml
//! manifest = "splits.json"      # per-domain entity and mention files
//! output_dir = "runs/demo"
//! modes = ["mention-only", "full-context", "keywords", "keywords-only"]
//! n = 64                        # Recall@n
//! k = 32                        # keywords per mention (labels and queries)
//! seeds = [0, 1, 2, 3, 4]
//! stopword_threshold = 0.2
//! strict = true                 # reject mentions with unknown gold ids
//! context_words = 64            # per side, full-context mode
//!
//! [bm25]
//! k1 = 1.5
//! b = 0.75
//!
//! [window]                      # extractor input, in word pieces
//! max_len = 128
//! left_len = 64
//! right_len = 64
//!
//! [model]
//! d_model = 64
//! layers = 2
//! heads = 4
//! ffn_dim = 256
//!
//! [train]
//! learning_rate = 1e-3
//! weight_decay = 0.01
//! batch_size = 8
//! epochs = 10
//!
//! [vocab]
//! max_words = 20000
//! max_subwords = 4000
//! min_subword_count = 2
//! ```
//!
//! Every key is optional except `manifest` and `output_dir`. Relative paths
//! are resolved against the config file's directory. One extractor is
//! trained per domain and seed; the epoch with the best dev Recall@n in
//! `keywords` mode is kept. Each mode gets `report_<mode>.json` in the
//! output directory.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{
    evaluate_domain, DomainRecall, EvalReport, ExtractorView, QueryBuilder, QueryMode, DEFAULT_CONTEXT_WORDS,
    DEFAULT_K, DEFAULT_N,
};
use crate::corpus::{
    load_corpus, tokenize_words, DomainSplit, LoadOptions, SplitManifest, VocabBuilder, DEFAULT_STOPWORD_THRESHOLD,
};
use crate::extractor::{
    train, DevSelection, KeywordExtractor, ModelConfig, TokenScoringModel, TrainConfig, WindowConfig,
};
use crate::index::{Bm25Params, InvertedIndex};
use crate::par::Execution;
use crate::supervision::DistantSupervisor;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSettings {
    pub d_model: usize,
    pub layers: usize,
    pub heads: usize,
    pub ffn_dim: usize,
}

impl Default for ModelSettings {
    fn default() -> Self {
        let s = ModelConfig::small(1);
        Self { d_model: s.d_model, layers: s.layers, heads: s.heads, ffn_dim: s.ffn_dim }
    }
}

impl ModelSettings {
    pub fn config(&self, vocab_size: usize, max_len: usize) -> ModelConfig {
        ModelConfig {
            vocab_size,
            d_model: self.d_model,
            layers: self.layers,
            heads: self.heads,
            ffn_dim: self.ffn_dim,
            max_len,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VocabSettings {
    pub max_words: usize,
    pub max_subwords: usize,
    pub min_subword_count: usize,
}

impl Default for VocabSettings {
    fn default() -> Self {
        let b = VocabBuilder::default();
        Self { max_words: b.max_words, max_subwords: b.max_subwords, min_subword_count: b.min_subword_count }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub manifest: PathBuf,
    pub output_dir: PathBuf,
    pub modes: Vec<QueryMode>,
    pub n: usize,
    pub k: usize,
    pub seeds: Vec<u64>,
    pub stopword_threshold: f64,
    pub strict: bool,
    pub context_words: usize,
    pub bm25: Bm25Params,
    pub window: WindowConfig,
    pub model: ModelSettings,
    pub train: TrainConfig,
    pub vocab: VocabSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            manifest: PathBuf::new(),
            output_dir: PathBuf::new(),
            modes: vec![QueryMode::MentionOnly, QueryMode::FullContext, QueryMode::Keywords],
            n: DEFAULT_N,
            k: DEFAULT_K,
            seeds: vec![0],
            stopword_threshold: DEFAULT_STOPWORD_THRESHOLD,
            strict: true,
            context_words: DEFAULT_CONTEXT_WORDS,
            bm25: Bm25Params::default(),
            window: WindowConfig::default(),
            model: ModelSettings::default(),
            train: TrainConfig::default(),
            vocab: VocabSettings::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.manifest.as_os_str().is_empty() {
            return bad("`manifest` is required");
        }
        if self.output_dir.as_os_str().is_empty() {
            return bad("`output_dir` is required");
        }
        if self.modes.is_empty() {
            return bad("`modes` must not be empty");
        }
        if self.n == 0 {
            return bad("`n` must be at least 1");
        }
        if self.seeds.is_empty() {
            return bad("`seeds` must not be empty");
        }
        self.bm25.validate()?;
        self.train.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedReport {
    pub seed: u64,
    pub report: EvalReport,
}

/// Results for one query mode. Modes without a model are deterministic and
/// have no per-seed entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeReport {
    pub mode: QueryMode,
    pub seeds: Vec<SeedReport>,
    /// Per-domain recall averaged over seeds.
    pub mean: EvalReport,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub reports: Vec<ModeReport>,
    pub files: Vec<PathBuf>,
}

/// Loads the config at `path` and runs it.
pub fn run_experiment(path: impl AsRef<Path>) -> Result<ExperimentOutcome> {
    let path = path.as_ref();
    let cfg = ExperimentConfig::load(path).map_err(|e| e.in_stage("loading config"))?;
    let base = path.parent().unwrap_or(Path::new("."));
    run_experiment_with(&cfg, base, Execution::default())
}

// domain -> per-mode, per-seed recalls
struct DomainResult {
    baseline: Vec<(QueryMode, DomainRecall)>,
    per_seed: Vec<(u64, Vec<(QueryMode, DomainRecall)>)>,
}

pub fn run_experiment_with(cfg: &ExperimentConfig, base: &Path, exec: Execution) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let manifest = SplitManifest::load(base.join(&cfg.manifest)).map_err(|e| e.in_stage("loading split manifest"))?;
    if manifest.domains.is_empty() {
        return Err(Error::Config("split manifest lists no domains".into()));
    }
    let out_dir = base.join(&cfg.output_dir);
    std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;

    let mut results = Vec::with_capacity(manifest.domains.len());
    for domain in &manifest.domains {
        log::info!("domain {}", domain.name);
        results.push(run_domain(cfg, domain, &out_dir, exec)?);
    }

    let modes: BTreeSet<QueryMode> = cfg.modes.iter().copied().collect();
    let mut reports = Vec::new();
    let mut files = Vec::new();
    for mode in modes {
        let report = if mode.needs_model() {
            let mut seeds = Vec::new();
            for (i, &seed) in cfg.seeds.iter().enumerate() {
                let domains = results.iter().map(|r| pick(&r.per_seed[i].1, mode)).collect();
                seeds.push(SeedReport { seed, report: EvalReport::from_domains(cfg.n, domains)? });
            }
            let mean_domains = (0..results.len())
                .map(|d| {
                    let first = &seeds[0].report.domains[d];
                    let mean = seeds.iter().map(|s| s.report.domains[d].recall).sum::<f64>() / seeds.len() as f64;
                    DomainRecall { recall: mean, ..first.clone() }
                })
                .collect();
            ModeReport { mode, seeds, mean: EvalReport::from_domains(cfg.n, mean_domains)? }
        } else {
            let domains = results.iter().map(|r| pick(&r.baseline, mode)).collect();
            ModeReport { mode, seeds: Vec::new(), mean: EvalReport::from_domains(cfg.n, domains)? }
        };
        let path = out_dir.join(format!("report_{mode}.json"));
        std::fs::write(&path, serde_json::to_string_pretty(&report)?).map_err(|e| Error::io(&path, e))?;
        files.push(path);
        reports.push(report);
    }
    Ok(ExperimentOutcome { reports, files })
}

fn pick(recalls: &[(QueryMode, DomainRecall)], mode: QueryMode) -> DomainRecall {
    recalls.iter().find(|(m, _)| *m == mode).map(|(_, r)| r.clone()).expect("every requested mode is evaluated")
}

fn run_domain(cfg: &ExperimentConfig, domain: &DomainSplit, out_dir: &Path, exec: Execution) -> Result<DomainResult> {
    let stage = |what: &str| format!("domain {}: {what}", domain.name);
    let opts = LoadOptions { strict: cfg.strict };
    let load = |path: &Path, what: &str| {
        load_corpus(&domain.entities, path, opts).map(|(_, m)| m).map_err(|e| e.in_stage(stage(what)))
    };
    let entities = crate::corpus::load_entities(&domain.entities).map_err(|e| e.in_stage(stage("loading entities")))?;
    let test = load(&domain.test, "loading test mentions")?;

    let index = InvertedIndex::from_entities(&entities, cfg.stopword_threshold, cfg.bm25, exec)
        .map_err(|e| e.in_stage(stage("indexing")))?;
    let stats = index.stats();
    let builder =
        |mode| QueryBuilder { context_words: cfg.context_words, ..QueryBuilder::new(mode, stats).with_k(cfg.k) };

    let mut baseline = Vec::new();
    for &mode in cfg.modes.iter().filter(|m| !m.needs_model()) {
        let r = evaluate_domain(&domain.name, &test, &index, &builder(mode), cfg.n, exec)
            .map_err(|e| e.in_stage(stage(&format!("evaluating {mode}"))))?;
        log::info!("{}: {mode} R@{} = {:.2}", domain.name, cfg.n, r.recall);
        baseline.push((mode, r));
    }

    let mut per_seed = Vec::new();
    if cfg.modes.iter().any(|m| m.needs_model()) {
        let train_m = load(&domain.train, "loading train mentions")?;
        let dev_m = load(&domain.dev, "loading dev mentions")?;

        let mut words: Vec<String> =
            entities.iter().flat_map(|e| tokenize_words(&e.description).into_words()).collect();
        for m in train_m.iter().chain(&dev_m) {
            words.extend(tokenize_words(&m.full_context()).into_words());
        }
        let vocab = VocabBuilder {
            max_words: cfg.vocab.max_words,
            max_subwords: cfg.vocab.max_subwords,
            min_subword_count: cfg.vocab.min_subword_count,
        }
        .build(words.iter().map(String::as_str));

        let supervisor = DistantSupervisor::new(&index, &entities, &vocab, cfg.window, cfg.k);
        let examples: Vec<_> = supervisor
            .label_all(&train_m, exec)
            .map_err(|e| e.in_stage(stage("distant supervision")))?
            .iter()
            .map(|d| d.to_labeled())
            .collect();

        let model_cfg = cfg.model.config(vocab.len(), cfg.window.max_len);
        for &seed in &cfg.seeds {
            let what = format!("training seed {seed}");
            let model = TokenScoringModel::new(model_cfg, seed).map_err(|e| e.in_stage(stage(&what)))?;
            let train_cfg = TrainConfig { seed, execution: exec, ..cfg.train.clone() };
            let dev_recall = |m: &TokenScoringModel| -> Result<f64> {
                let view = ExtractorView { model: m, vocab: &vocab, window: cfg.window };
                let b = builder(QueryMode::Keywords).with_extractor(view);
                Ok(evaluate_domain(&domain.name, &dev_m, &index, &b, cfg.n, exec)?.recall)
            };
            let selection = if dev_m.is_empty() { DevSelection::Last } else { DevSelection::Metric(&dev_recall) };
            let outcome = train(model, &examples, &train_cfg, selection).map_err(|e| e.in_stage(stage(&what)))?;
            log::info!(
                "{} seed {seed}: best epoch {} of {}",
                domain.name,
                outcome.log.best_epoch + 1,
                outcome.log.epoch_losses.len()
            );

            let extractor = KeywordExtractor::new(outcome.model, vocab.clone(), cfg.window)?;
            let ckpt = out_dir.join(format!("ckpt_{}_seed{seed}.bin", domain.name));
            extractor.save(&ckpt)?;
            let log_path = out_dir.join(format!("trainlog_{}_seed{seed}.json", domain.name));
            std::fs::write(&log_path, serde_json::to_string_pretty(&outcome.log)?)
                .map_err(|e| Error::io(&log_path, e))?;

            let mut recalls = Vec::new();
            for &mode in cfg.modes.iter().filter(|m| m.needs_model()) {
                let b = builder(mode).with_extractor(&extractor);
                let r = evaluate_domain(&domain.name, &test, &index, &b, cfg.n, exec)
                    .map_err(|e| e.in_stage(stage(&format!("evaluating {mode}, seed {seed}"))))?;
                log::info!("{} seed {seed}: {mode} R@{} = {:.2}", domain.name, cfg.n, r.recall);
                recalls.push((mode, r));
            }
            per_seed.push((seed, recalls));
        }
    }
    Ok(DomainResult { baseline, per_seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_parsing() {
        let cfg = ExperimentConfig::from_toml_str(
            r#"
            manifest = "splits.json"
            output_dir = "out"
            modes = ["mention-only", "keywords"]
            seeds = [1, 2]
            [train]
            epochs = 3
            "#,
        )
        .unwrap();
        assert_eq!(cfg.n, 64);
        assert_eq!(cfg.k, 32);
        assert_eq!(cfg.bm25, Bm25Params::default());
        assert_eq!(cfg.window, WindowConfig::default());
        assert_eq!(cfg.train.epochs, 3);
        assert_eq!(cfg.train.batch_size, 8);
        assert_eq!(cfg.modes, [QueryMode::MentionOnly, QueryMode::Keywords]);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ExperimentConfig::from_toml_str("output_dir = \"o\"").is_err());
        assert!(ExperimentConfig::from_toml_str("manifest = \"m\"\noutput_dir = \"o\"\nmodes = [\"bogus\"]").is_err());
        assert!(ExperimentConfig::from_toml_str("manifest = \"m\"\noutput_dir = \"o\"\nunknown = 1").is_err());
        assert!(ExperimentConfig::from_toml_str("manifest = \"m\"\noutput_dir = \"o\"\nseeds = []").is_err());
    }

    #[test]
    fn missing_manifest_names_stage() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig { manifest: "nope.json".into(), output_dir: "out".into(), ..Default::default() };
        let err = run_experiment_with(&cfg, dir.path(), Execution::Sequential).unwrap_err();
        assert!(err.to_string().contains("loading split manifest"), "{err}");
    }
}
