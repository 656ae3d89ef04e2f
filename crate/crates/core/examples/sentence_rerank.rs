//! Re-rank a baseline run by fusing it with pooled sentence similarities
//! from the hashed bag-of-words embedder.
//!
//! ```text
//! cargo run --example sentence_rerank -- [lambda] [mean|max|weighted]
//! ```

use tar_rank::corpus::{parse_corpus, parse_topics};
use tar_rank::embeddings::{score_sentences, MockEmbedder};
use tar_rank::fusion::{rerank_pipeline, EmbeddingScorer, Pooling, RerankOptions};
use tar_rank::query::{query_text, AbbreviationTable};
use tar_rank::run::{parse_run, run_to_trec};

const PROJECT: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/project");

pub fn run(lambda: f64, pooling: Pooling) -> tar_rank::Result<()> {
    let docs = parse_corpus(format!("{PROJECT}/corpus.jsonl").as_ref())?;
    let topics = parse_topics(format!("{PROJECT}/topics.txt").as_ref())?;
    let abbrev = AbbreviationTable::load(format!("{PROJECT}/abbrev.tsv").as_ref())?;
    let baseline = parse_run(format!("{PROJECT}/expected_baseline.run").as_ref())?;

    let embedder = MockEmbedder::new(128);
    let topic = &topics[0];
    let text = query_text(topic, &abbrev);
    let scored = score_sentences(topic, &docs[0], &embedder, &text)?;
    println!("{} vs pmid {}: sentence cosines {:?}", topic.id, docs[0].pmid, scored.scores);

    let scorer = EmbeddingScorer::new(&embedder, &docs, topics.iter().map(|t| (t, query_text(t, &abbrev))));
    let mut opts = RerankOptions::default();
    opts.fusion.lambda = lambda;
    opts.fusion.pooling = pooling;
    let fused = rerank_pipeline(&baseline, &scorer, &opts)?;
    for (b, f) in baseline.iter().zip(&fused) {
        println!("{}  baseline {:?}", b.topic_id, b.pmids().collect::<Vec<_>>());
        println!("{}  fused    {:?}", f.topic_id, f.pmids().collect::<Vec<_>>());
    }
    print!("{}", run_to_trec(&fused));
    Ok(())
}

fn main() -> tar_rank::Result<()> {
    let mut args = std::env::args().skip(1);
    let lambda = match args.next() {
        Some(l) => l
            .parse()
            .map_err(|_| tar_rank::Error::Usage(format!("not a number: {l}")))?,
        None => 0.8,
    };
    let pooling = match args.next() {
        Some(p) => p.parse()?,
        None => Pooling::Mean,
    };
    run(lambda, pooling)
}
