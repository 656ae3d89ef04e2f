//! Score several fusion weights on the synthetic project, then run the
//! one-way ANOVA, Bonferroni-corrected pairwise t-tests and Cohen's d.
//!
//! ```text
//! cargo run --example compare_models -- [ap|recall|ncg|norm_area] [paired|unpaired]
//! ```

use std::collections::BTreeMap;

use tar_rank::corpus::TokenizerConfig;
use tar_rank::embeddings::MockEmbedder;
use tar_rank::evalmetrics::{evaluate_run, CutoffSpec, TopicMetrics};
use tar_rank::fusion::{rerank_pipeline, EmbeddingScorer, RerankOptions};
use tar_rank::index::{build_index, run_baseline, FieldSet, RetrievalConfig};
use tar_rank::query::{query_text, AbbreviationTable};
use tar_rank::stats::{compare_models, TestMode};
use tar_rank::synth::{SynthConfig, SynthProject};

pub fn run(metric: &str, mode: TestMode) -> tar_rank::Result<()> {
    let p = SynthProject::generate(&SynthConfig {
        topics: 8,
        ..Default::default()
    })?;
    let abbrev = AbbreviationTable::parse(&p.abbreviations, "synthetic")?;
    let index = build_index(&p.corpus, FieldSet::all(), TokenizerConfig::default())?;
    let base = run_baseline(&p.topics, &index, &abbrev, &RetrievalConfig::default())?;

    let embedder = MockEmbedder::new(128);
    let scorer = EmbeddingScorer::new(&embedder, &p.corpus, p.topics.iter().map(|t| (t, query_text(t, &abbrev))));
    let mut models: Vec<(String, BTreeMap<String, TopicMetrics>)> = Vec::new();
    for lambda in [1.0, 0.8, 0.5, 0.0] {
        let mut opts = RerankOptions::default();
        opts.fusion.lambda = lambda;
        let run = rerank_pipeline(&base.rankings, &scorer, &opts)?;
        let report = evaluate_run(&run, &p.qrels, CutoffSpec::default(), false)?;
        models.push((format!("lambda_{lambda}"), report.per_topic));
    }

    let report = compare_models(&models, metric, mode, 0.05)?;
    print!("{}", report.to_matrix_text());
    println!();
    print!("{}", report.to_csv());
    Ok(())
}

fn main() -> tar_rank::Result<()> {
    let mut args = std::env::args().skip(1);
    let metric = args.next().unwrap_or_else(|| "ap".into());
    let mode = match args.next() {
        Some(m) => m.parse()?,
        None => TestMode::Paired,
    };
    run(&metric, mode)
}
