use std::path::Path;

use kwsparse::corpus::{load_corpus, tokenize_words, LoadOptions, MentionRecord, SplitManifest, VocabBuilder};
use kwsparse::extractor::{
    train, DevSelection, KeywordExtractor, LabeledInput, ModelConfig, TokenScoringModel, TrainConfig, WindowConfig,
};
use kwsparse::index::{Bm25Params, InvertedIndex};
use kwsparse::par::Execution;
use kwsparse::pipeline::{
    evaluate_domain, evaluate_recall, run_experiment, ExperimentConfig, ModeReport, QueryBuilder, QueryMode,
};
use kwsparse::supervision::DistantSupervisor;
use kwsparse::synth::{mismatch_corpus, write_jsonl, MismatchConfig, MismatchCorpus};
use kwsparse::Error;
use proptest::prelude::*;

fn small_spec() -> MismatchConfig {
    MismatchConfig { entities: 60, context_words: 20, train: 160, dev: 20, test: 60, ..MismatchConfig::default() }
}

fn small_model(vocab: usize) -> ModelConfig {
    ModelConfig { d_model: 32, layers: 1, heads: 4, ffn_dim: 64, ..ModelConfig::small(vocab) }
}

fn trained(corpus: &MismatchCorpus, index: &InvertedIndex) -> KeywordExtractor {
    let mut words: Vec<String> =
        corpus.entities.iter().flat_map(|e| tokenize_words(&e.description).into_words()).collect();
    for m in &corpus.train {
        words.extend(tokenize_words(&m.full_context()).into_words());
    }
    let vocab = VocabBuilder::default().build(words.iter().map(String::as_str));
    let window = WindowConfig::default();
    let sup = DistantSupervisor::new(index, &corpus.entities, &vocab, window, 32);
    let examples: Vec<LabeledInput> =
        sup.label_all(&corpus.train, Execution::Parallel).unwrap().iter().map(|d| d.to_labeled()).collect();
    let model = TokenScoringModel::new(small_model(vocab.len()), 0).unwrap();
    let out =
        train(model, &examples, &TrainConfig { epochs: 4, ..TrainConfig::default() }, DevSelection::Last).unwrap();
    KeywordExtractor::new(out.model, vocab, window).unwrap()
}

#[test]
fn keywords_beat_mention_words_on_mismatch_corpus() {
    let corpus = mismatch_corpus(&small_spec(), 21);
    let index =
        InvertedIndex::from_entities(&corpus.entities, 0.2, Bm25Params::default(), Execution::Parallel).unwrap();
    let ext = trained(&corpus, &index);
    let recall = |mode: QueryMode| {
        let b = QueryBuilder::new(mode, index.stats()).with_extractor(&ext);
        evaluate_domain("m", &corpus.test, &index, &b, 64, Execution::Parallel).unwrap().recall
    };
    let mention = recall(QueryMode::MentionOnly);
    let keywords = recall(QueryMode::Keywords);
    let keywords_only = recall(QueryMode::KeywordsOnly);
    assert_eq!(mention, 0.0);
    assert!(keywords > mention, "keywords {keywords} vs mention-only {mention}");
    // no mention word ever matches, so dropping them changes nothing
    assert_eq!(keywords, keywords_only);

    let b = QueryBuilder::new(QueryMode::Keywords, index.stats()).with_extractor(&ext);
    for m in corpus.test.iter().take(10) {
        assert_eq!(b.build(m).unwrap(), b.build(m).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn recall_is_monotone_in_n(seed in any::<u64>(), mode_i in 0usize..2) {
        let corpus = mismatch_corpus(&MismatchConfig { entities: 40, train: 0, dev: 0, test: 30, ..MismatchConfig::default() }, seed);
        let index = InvertedIndex::from_entities(&corpus.entities, 0.2, Bm25Params::default(), Execution::Sequential).unwrap();
        let mode = [QueryMode::MentionOnly, QueryMode::FullContext][mode_i];
        let b = QueryBuilder::new(mode, index.stats());
        let mut last = 0.0;
        for n in [1, 2, 5, 10, 20, 40, 64] {
            let r = evaluate_recall(&corpus.test, &index, &b, n, Execution::Sequential).unwrap();
            prop_assert!(r.macro_avg >= last);
            prop_assert!((0.0..=100.0).contains(&r.macro_avg));
            last = r.macro_avg;
        }
        // every entity fits in the top 64: full context always finds the
        // gold signatures, mention words never match anything
        let expected = if mode == QueryMode::FullContext { 100.0 } else { 0.0 };
        prop_assert_eq!(last, expected);
    }
}

#[test]
fn loader_reports_split_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = mismatch_corpus(
        &MismatchConfig { entities: 30, train: 50, dev: 50, test: 1100, ..MismatchConfig::default() },
        2,
    );
    let split = corpus.write_domain(dir.path(), "forgotten_realms").unwrap();
    let manifest_path = dir.path().join("splits.json");
    std::fs::write(&manifest_path, serde_json::to_string(&SplitManifest { domains: vec![split] }).unwrap()).unwrap();
    let manifest = SplitManifest::load(&manifest_path).unwrap();
    let d = &manifest.domains[0];
    let count = |p: &Path| load_corpus(&d.entities, p, LoadOptions { strict: true }).unwrap().1.len();
    assert_eq!((count(&d.train), count(&d.dev), count(&d.test)), (50, 50, 1100));
}

fn experiment_dir(modes: &[&str], seeds: &[u64]) -> (tempfile::TempDir, std::path::PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let cfg =
        MismatchConfig { entities: 40, context_words: 15, train: 40, dev: 10, test: 20, ..MismatchConfig::default() };
    let domains = vec![
        mismatch_corpus(&cfg, 1).write_domain(dir.path(), "alpha").unwrap(),
        mismatch_corpus(&MismatchConfig { test: 35, ..cfg }, 2).write_domain(dir.path(), "beta").unwrap(),
    ];
    std::fs::write(dir.path().join("splits.json"), serde_json::to_string(&SplitManifest { domains }).unwrap()).unwrap();
    let modes = modes.iter().map(|m| format!("\"{m}\"")).collect::<Vec<_>>().join(", ");
    let seeds = seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(", ");
    let config = format!(
        "manifest = \"splits.json\"\noutput_dir = \"out\"\nmodes = [{modes}]\nseeds = [{seeds}]\n\
         [model]\nd_model = 16\nlayers = 1\nheads = 2\nffn_dim = 32\n[train]\nepochs = 2\n"
    );
    let path = dir.path().join("experiment.toml");
    std::fs::write(&path, config).unwrap();
    (dir, path)
}

#[test]
fn experiment_writes_one_report_per_mode() {
    let (dir, config) = experiment_dir(&["mention-only", "full-context", "keywords", "keywords-only"], &[0, 1]);
    let outcome = run_experiment(&config).unwrap();
    assert_eq!(outcome.files.len(), 4);
    for mode in QueryMode::ALL {
        let path = dir.path().join(format!("out/report_{mode}.json"));
        let report: ModeReport = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(report.mode, mode);
        assert_eq!(report.mean.n, 64);
        assert_eq!(report.mean.domains.len(), 2);
        assert_eq!(report.mean.domains[1].count, 35);
        if mode.needs_model() {
            assert_eq!(report.seeds.len(), 2);
            for d in 0..2 {
                let mean = (report.seeds[0].report.domains[d].recall + report.seeds[1].report.domains[d].recall) / 2.0;
                assert!((report.mean.domains[d].recall - mean).abs() < 1e-12);
            }
        } else {
            assert!(report.seeds.is_empty());
        }
    }
    for name in ["alpha", "beta"] {
        for seed in [0, 1] {
            let ckpt = dir.path().join(format!("out/ckpt_{name}_seed{seed}.bin"));
            KeywordExtractor::load(&ckpt).unwrap();
        }
    }
}

#[test]
fn experiment_names_failing_stage() {
    let (dir, config) = experiment_dir(&["mention-only"], &[0]);
    // break the second domain's test file
    let bad = dir.path().join("beta/test.jsonl");
    std::fs::write(&bad, "{not json}\n").unwrap();
    let err = run_experiment(&config).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("domain beta") && msg.contains("test mentions"), "{msg}");

    // a dangling gold id is fatal because experiments load strictly
    let m = MentionRecord::new("x", "", "thing", "", "E999");
    write_jsonl(&bad, &[m]).unwrap();
    let err = run_experiment(&config).unwrap_err();
    assert!(matches!(err, Error::Stage { .. }), "{err}");
}

#[test]
fn config_round_trips_through_toml() {
    let cfg = ExperimentConfig { manifest: "m.json".into(), output_dir: "o".into(), ..ExperimentConfig::default() };
    let text = toml::to_string(&cfg).unwrap();
    assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), cfg);
}
