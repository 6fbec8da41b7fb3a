use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use kwsparse::corpus::{
    load_corpus, load_entities, load_mentions, tokenize_words, LoadOptions, VocabBuilder, WordPieceVocab,
    DEFAULT_STOPWORD_THRESHOLD,
};
use kwsparse::extractor::{
    train, DevSelection, KeywordExtractor, ModelConfig, TokenScoringModel, TrainConfig, WindowConfig,
};
use kwsparse::index::{Bm25Params, InvertedIndex};
use kwsparse::par::Execution;
use kwsparse::pipeline::{
    evaluate_domain, explain, run_experiment_with, EvalReport, ExperimentConfig, QueryBuilder, QueryMode, DEFAULT_K,
    DEFAULT_N,
};
use kwsparse::supervision::{read_label_dump, write_label_dump, DistantSupervisor};
use serde_json::json;

/// Keyword-augmented sparse retrieval for entity linking.
#[derive(Parser)]
#[command(name = "kwsparse", version)]
struct Cli {
    /// Run everything on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a BM25 index over entity descriptions.
    Index(IndexArgs),
    /// Generate weak keyword labels for training mentions.
    Distill(DistillArgs),
    /// Train a keyword extractor on a label dump.
    Train(TrainArgs),
    /// Print the top-k keywords the extractor picks for each mention.
    Extract(ExtractArgs),
    /// Retrieve candidate entities for each mention.
    Retrieve(RetrieveArgs),
    /// Compute Recall@n over one or more domains.
    Eval(EvalArgs),
    /// Show extracted keywords next to the gold entity description.
    Explain(ExplainArgs),
    /// Run a full multi-domain, multi-seed experiment from a TOML config.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct IndexArgs {
    #[arg(long)]
    entities: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = Bm25Params::default().k1)]
    k1: f64,
    #[arg(long, default_value_t = Bm25Params::default().b)]
    b: f64,
    #[arg(long, default_value_t = DEFAULT_STOPWORD_THRESHOLD)]
    stopword_threshold: f64,
}

#[derive(Args, Clone, Copy)]
struct WindowArgs {
    /// Extractor input length in word pieces, specials included.
    #[arg(long, default_value_t = WindowConfig::default().max_len)]
    max_len: usize,
    #[arg(long, default_value_t = WindowConfig::default().left_len)]
    left_len: usize,
    #[arg(long, default_value_t = WindowConfig::default().right_len)]
    right_len: usize,
}

impl From<WindowArgs> for WindowConfig {
    fn from(w: WindowArgs) -> Self {
        WindowConfig { max_len: w.max_len, left_len: w.left_len, right_len: w.right_len }
    }
}

#[derive(Args)]
#[group(id = "vocab_source", required = true, multiple = false, args = ["vocab", "vocab_out"])]
struct DistillArgs {
    #[arg(long)]
    entities: PathBuf,
    #[arg(long)]
    mentions: PathBuf,
    /// Label dump to write (JSON lines).
    #[arg(long)]
    out: PathBuf,
    /// Existing word-piece vocabulary.
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Build a vocabulary from descriptions and mention contexts and save it here.
    #[arg(long)]
    vocab_out: Option<PathBuf>,
    /// Prebuilt index; built from --entities with default settings if omitted.
    #[arg(long)]
    index: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    #[command(flatten)]
    window: WindowArgs,
    /// Fail on mentions whose gold entity is missing instead of dropping them.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    labels: PathBuf,
    /// Dev label dump; the epoch with the lowest dev loss is kept.
    #[arg(long)]
    dev: Option<PathBuf>,
    #[arg(long)]
    vocab: PathBuf,
    /// Checkpoint to write.
    #[arg(long)]
    out: PathBuf,
    /// Per-epoch losses as JSON.
    #[arg(long)]
    log: Option<PathBuf>,
    #[arg(long, default_value_t = TrainConfig::default().learning_rate)]
    lr: f64,
    #[arg(long, default_value_t = TrainConfig::default().weight_decay)]
    weight_decay: f64,
    #[arg(long, default_value_t = TrainConfig::default().batch_size)]
    batch_size: usize,
    #[arg(long, default_value_t = TrainConfig::default().epochs)]
    epochs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = ModelConfig::small(1).d_model)]
    d_model: usize,
    #[arg(long, default_value_t = ModelConfig::small(1).layers)]
    layers: usize,
    #[arg(long, default_value_t = ModelConfig::small(1).heads)]
    heads: usize,
    #[arg(long, default_value_t = ModelConfig::small(1).ffn_dim)]
    ffn_dim: usize,
    #[command(flatten)]
    window: WindowArgs,
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long)]
    ckpt: PathBuf,
    #[arg(long)]
    mentions: PathBuf,
    /// Index whose stopword list filters the keywords.
    #[arg(long)]
    index: PathBuf,
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long, default_value = "keywords")]
    mode: QueryMode,
    /// Keywords per mention in keyword modes.
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    /// Candidates per mention.
    #[arg(long, default_value_t = DEFAULT_N)]
    n: usize,
}

#[derive(Args)]
struct RetrieveArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long)]
    mentions: PathBuf,
    /// Extractor checkpoint; required in keyword modes.
    #[arg(long)]
    ckpt: Option<PathBuf>,
    #[command(flatten)]
    query: QueryArgs,
}

#[derive(Args)]
struct EvalArgs {
    /// One index per domain.
    #[arg(long, required = true)]
    index: Vec<PathBuf>,
    /// One mention file per domain, in the same order as --index.
    #[arg(long, required = true)]
    mentions: Vec<PathBuf>,
    /// Either one checkpoint for all domains or one per domain.
    #[arg(long)]
    ckpt: Vec<PathBuf>,
    /// Domain names; defaults to the mention file stems.
    #[arg(long)]
    name: Vec<String>,
    #[command(flatten)]
    query: QueryArgs,
    /// Also write the full-precision report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct ExplainArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long)]
    entities: PathBuf,
    #[arg(long)]
    mentions: PathBuf,
    #[arg(long)]
    ckpt: PathBuf,
    #[arg(long)]
    mention_id: String,
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    /// Print JSON instead of the marked-up text view.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    match cli.command {
        Command::Index(a) => cmd_index(a, exec),
        Command::Distill(a) => cmd_distill(a, exec),
        Command::Train(a) => cmd_train(a, exec),
        Command::Extract(a) => cmd_extract(a),
        Command::Retrieve(a) => cmd_retrieve(a, exec),
        Command::Eval(a) => cmd_eval(a, exec),
        Command::Explain(a) => cmd_explain(a),
        Command::Experiment(a) => cmd_experiment(a, exec),
    }
}

fn cmd_index(a: IndexArgs, exec: Execution) -> Result<()> {
    let entities = load_entities(&a.entities)?;
    let params = Bm25Params::new(a.k1, a.b)?;
    let index = InvertedIndex::from_entities(&entities, a.stopword_threshold, params, exec)?;
    index.save(&a.out)?;
    log::info!(
        "indexed {} entities, {} terms, {} stopwords -> {}",
        index.doc_count(),
        index.term_count(),
        index.stats().stopwords().len(),
        a.out.display()
    );
    Ok(())
}

fn cmd_distill(a: DistillArgs, exec: Execution) -> Result<()> {
    let (entities, mentions) = load_corpus(&a.entities, &a.mentions, LoadOptions { strict: a.strict })?;
    let index = match &a.index {
        Some(p) => InvertedIndex::load(p)?,
        None => InvertedIndex::from_entities(&entities, DEFAULT_STOPWORD_THRESHOLD, Bm25Params::default(), exec)?,
    };
    let vocab = match (&a.vocab, &a.vocab_out) {
        (Some(p), _) => WordPieceVocab::load(p)?,
        (None, Some(out)) => {
            let mut words: Vec<String> = Vec::new();
            for e in &entities {
                words.extend(tokenize_words(&e.description).into_words());
            }
            for m in &mentions {
                words.extend(tokenize_words(&m.full_context()).into_words());
            }
            let vocab = VocabBuilder::default().build(words.iter().map(String::as_str));
            vocab.save(out)?;
            log::info!("wrote {} pieces to {}", vocab.len(), out.display());
            vocab
        }
        (None, None) => unreachable!("clap requires one vocabulary source"),
    };
    let supervisor = DistantSupervisor::new(&index, &entities, &vocab, a.window.into(), a.k);
    let examples = supervisor.label_all(&mentions, exec)?;
    write_label_dump(&a.out, &examples)?;
    let empty = examples.iter().filter(|e| e.keywords.keywords.is_empty()).count();
    log::info!("labeled {} mentions ({} with no overlapping keyword) -> {}", examples.len(), empty, a.out.display());
    Ok(())
}

fn read_labeled(path: &Path) -> Result<Vec<kwsparse::extractor::LabeledInput>> {
    read_label_dump(path)?
        .iter()
        .map(|r| r.to_labeled().map_err(Into::into))
        .collect::<Result<_>>()
        .with_context(|| format!("reading labels from {}", path.display()))
}

fn cmd_train(a: TrainArgs, exec: Execution) -> Result<()> {
    let vocab = WordPieceVocab::load(&a.vocab)?;
    let examples = read_labeled(&a.labels)?;
    let dev = a.dev.as_deref().map(read_labeled).transpose()?;
    let window: WindowConfig = a.window.into();
    let max_len = examples.iter().map(|e| e.input.len()).max().unwrap_or(0);
    ensure!(
        max_len <= window.max_len,
        "labels contain an input of {max_len} pieces but --max-len is {}",
        window.max_len
    );
    let cfg = ModelConfig {
        vocab_size: vocab.len(),
        d_model: a.d_model,
        layers: a.layers,
        heads: a.heads,
        ffn_dim: a.ffn_dim,
        max_len: window.max_len,
    };
    let model = TokenScoringModel::new(cfg, a.seed)?;
    let train_cfg = TrainConfig {
        learning_rate: a.lr,
        weight_decay: a.weight_decay,
        batch_size: a.batch_size,
        epochs: a.epochs,
        seed: a.seed,
        execution: exec,
    };
    let selection = match &dev {
        Some(d) if !d.is_empty() => DevSelection::Loss(d),
        _ => DevSelection::Last,
    };
    let outcome = train(model, &examples, &train_cfg, selection)?;
    for (i, loss) in outcome.log.epoch_losses.iter().enumerate() {
        match outcome.log.dev_scores.get(i) {
            Some(d) => log::info!("epoch {}: train loss {loss:.5}, dev {d:.5}", i + 1),
            None => log::info!("epoch {}: train loss {loss:.5}", i + 1),
        }
    }
    log::info!("keeping epoch {}", outcome.log.best_epoch + 1);
    if let Some(p) = &a.log {
        std::fs::write(p, serde_json::to_string_pretty(&outcome.log)?)?;
    }
    KeywordExtractor::new(outcome.model, vocab, window)?.save(&a.out)?;
    Ok(())
}

fn stdout_lines() -> BufWriter<io::StdoutLock<'static>> {
    BufWriter::new(io::stdout().lock())
}

fn cmd_extract(a: ExtractArgs) -> Result<()> {
    let extractor = KeywordExtractor::load(&a.ckpt)?;
    let index = InvertedIndex::load(&a.index)?;
    let mentions = load_mentions(&a.mentions)?;
    let mut out = stdout_lines();
    for m in &mentions {
        let keywords = extractor.extract(m, a.k, index.stats())?;
        serde_json::to_writer(&mut out, &json!({ "mention_id": m.mention_id, "keywords": keywords }))?;
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

fn load_ckpt(path: Option<&Path>, mode: QueryMode) -> Result<Option<KeywordExtractor>> {
    match path {
        Some(p) => Ok(Some(KeywordExtractor::load(p)?)),
        None if mode.needs_model() => bail!("mode {mode} needs --ckpt"),
        None => Ok(None),
    }
}

fn builder<'a>(q: &QueryArgs, index: &'a InvertedIndex, ext: Option<&'a KeywordExtractor>) -> QueryBuilder<'a> {
    let b = QueryBuilder::new(q.mode, index.stats()).with_k(q.k);
    match ext {
        Some(e) if q.mode.needs_model() => b.with_extractor(e),
        _ => b,
    }
}

fn cmd_retrieve(a: RetrieveArgs, exec: Execution) -> Result<()> {
    let index = InvertedIndex::load(&a.index)?;
    let mentions = load_mentions(&a.mentions)?;
    let ext = load_ckpt(a.ckpt.as_deref(), a.query.mode)?;
    let b = builder(&a.query, &index, ext.as_ref());
    let queries = mentions.iter().map(|m| b.build(m).map(|q| q.terms())).collect::<kwsparse::Result<Vec<_>>>()?;
    let results = index.retrieve_batch(&queries, a.query.n, exec);
    let mut out = stdout_lines();
    for ((m, q), r) in mentions.iter().zip(&queries).zip(&results) {
        let line = json!({
            "mention_id": m.mention_id,
            "query": q,
            "hits": r.hits,
            "gold_rank": r.rank_of(&m.gold_entity_id).map(|r| r + 1),
        });
        serde_json::to_writer(&mut out, &line)?;
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_eval(a: EvalArgs, exec: Execution) -> Result<()> {
    let domains = a.mentions.len();
    ensure!(a.index.len() == domains, "got {} --index but {domains} --mentions", a.index.len());
    ensure!(a.ckpt.len() <= 1 || a.ckpt.len() == domains, "give one --ckpt for all domains or one per domain");
    ensure!(a.name.is_empty() || a.name.len() == domains, "give one --name per domain");
    let ckpts = a.ckpt.iter().map(KeywordExtractor::load).collect::<kwsparse::Result<Vec<_>>>()?;
    if ckpts.is_empty() && a.query.mode.needs_model() {
        bail!("mode {} needs --ckpt", a.query.mode);
    }

    let mut recalls = Vec::with_capacity(domains);
    for d in 0..domains {
        let name = match a.name.get(d) {
            Some(n) => n.clone(),
            None => a.mentions[d]
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| format!("domain{d}")),
        };
        let index = InvertedIndex::load(&a.index[d])?;
        let mentions = load_mentions(&a.mentions[d])?;
        let ext = ckpts.get(d).or(ckpts.first());
        let b = builder(&a.query, &index, ext);
        let r = evaluate_domain(&name, &mentions, &index, &b, a.query.n, exec)
            .with_context(|| format!("evaluating {name}"))?;
        recalls.push(r);
    }
    let report = EvalReport::from_domains(a.query.n, recalls)?;
    println!("mode {}", a.query.mode);
    println!("{report}");
    if let Some(p) = &a.json {
        std::fs::write(p, serde_json::to_string_pretty(&report)?)?;
    }
    Ok(())
}

fn cmd_explain(a: ExplainArgs) -> Result<()> {
    let index = InvertedIndex::load(&a.index)?;
    let entities = load_entities(&a.entities)?;
    let mentions = load_mentions(&a.mentions)?;
    let ext = KeywordExtractor::load(&a.ckpt)?;
    let mention = mentions
        .iter()
        .find(|m| m.mention_id == a.mention_id)
        .with_context(|| format!("no mention with id {}", a.mention_id))?;
    let entity = entities
        .iter()
        .find(|e| e.entity_id == mention.gold_entity_id)
        .with_context(|| format!("gold entity {} not in {}", mention.gold_entity_id, a.entities.display()))?;
    let report = explain(mention, (&ext).into(), &index, entity, a.k)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!("{report}");
    }
    Ok(())
}

fn cmd_experiment(a: ExperimentArgs, exec: Execution) -> Result<()> {
    let cfg = ExperimentConfig::load(&a.config)?;
    let base = a.config.parent().unwrap_or(Path::new("."));
    let outcome = run_experiment_with(&cfg, base, exec)?;
    for r in &outcome.reports {
        println!("mode {}", r.mode);
        for s in &r.seeds {
            println!("  seed {}: macro {:.2}  micro {:.2}", s.seed, s.report.macro_avg, s.report.micro_avg);
        }
        println!("{}\n", r.mean);
    }
    for f in &outcome.files {
        log::info!("wrote {}", f.display());
    }
    Ok(())
}
