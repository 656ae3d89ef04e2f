//! BM25 with TF-IDF expansion and RM3 feedback over each topic's candidate
//! set, written as a TREC run.
//!
//! ```text
//! cargo run --example baseline_run -- [rm3-weight]
//! ```

use tar_rank::corpus::{parse_corpus, parse_topics, TokenizerConfig};
use tar_rank::index::{build_index, run_baseline, topic_query, FieldSet, RetrievalConfig, Rm3Params};
use tar_rank::query::AbbreviationTable;
use tar_rank::run::run_to_trec;

const PROJECT: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/project");

pub fn run(rm3_weight: f64) -> tar_rank::Result<()> {
    let docs = parse_corpus(format!("{PROJECT}/corpus.jsonl").as_ref())?;
    let topics = parse_topics(format!("{PROJECT}/topics.txt").as_ref())?;
    let abbrev = AbbreviationTable::load(format!("{PROJECT}/abbrev.tsv").as_ref())?;
    let index = build_index(&docs, FieldSet::all(), TokenizerConfig::default())?;

    let config = RetrievalConfig {
        rm3: Some(Rm3Params {
            original_query_weight: rm3_weight,
            ..Default::default()
        }),
        ..Default::default()
    };
    for t in &topics {
        let q = topic_query(t, &index, &abbrev, config.qe_terms)?;
        let tokens: Vec<&str> = q.tokens().collect();
        println!("{}: {} query terms, first {:?}", t.id, tokens.len(), &tokens[..tokens.len().min(6)]);
    }
    let out = run_baseline(&topics, &index, &abbrev, &config)?;
    for (topic, err) in &out.failures {
        eprintln!("{topic}: {err}");
    }
    print!("{}", run_to_trec(&out.rankings));
    Ok(())
}

fn main() -> tar_rank::Result<()> {
    let weight = match std::env::args().nth(1) {
        Some(w) => w
            .parse()
            .map_err(|_| tar_rank::Error::Usage(format!("not a number: {w}")))?,
        None => 0.5,
    };
    run(weight)
}
