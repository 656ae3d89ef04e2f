//! The `EMB1` embedding file: materialize query and sentence vectors for a
//! corpus, save, reload, and rerank from the file instead of the embedder.
//! An external encoder only has to write the same keys.
//!
//! ```text
//! cargo run --example embedding_store -- [dim]
//! ```

use tar_rank::corpus::{parse_corpus, parse_topics};
use tar_rank::embeddings::{
    materialize_store, query_key, sentence_key, split_sentences, EmbeddingStore, MockEmbedder,
};
use tar_rank::fusion::{rerank_pipeline, EmbeddingScorer, RerankOptions};
use tar_rank::query::{query_text, AbbreviationTable};
use tar_rank::run::parse_run;

const PROJECT: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/project");

pub fn run(dim: usize) -> tar_rank::Result<()> {
    let docs = parse_corpus(format!("{PROJECT}/corpus.jsonl").as_ref())?;
    let topics = parse_topics(format!("{PROJECT}/topics.txt").as_ref())?;
    let abbrev = AbbreviationTable::load(format!("{PROJECT}/abbrev.tsv").as_ref())?;
    let texts: Vec<_> = topics.iter().map(|t| (t, query_text(t, &abbrev))).collect();

    let doc = &docs[0];
    println!("sentences of pmid {}:", doc.pmid);
    for (i, s) in split_sentences(&doc.abstract_text).iter().enumerate() {
        println!("  {i}: {s}");
    }
    println!("keys look like {} and {}", query_key(&topics[0].id), sentence_key(&doc.pmid, 0));

    let mock = MockEmbedder::new(dim);
    let store = materialize_store(&mock, dim, &docs, &texts)?;
    let dir = tempfile::tempdir().map_err(|e| tar_rank::Error::Usage(e.to_string()))?;
    let path = dir.path().join("fixture.emb1");
    store.save(&path)?;
    let loaded = EmbeddingStore::load(&path)?;
    println!("{} vectors of dimension {} in {}", loaded.len(), loaded.dim(), path.display());

    let baseline = parse_run(format!("{PROJECT}/expected_baseline.run").as_ref())?;
    let opts = RerankOptions::default();
    let from_file = rerank_pipeline(&baseline, &EmbeddingScorer::new(&loaded, &docs, texts.clone()), &opts)?;
    let direct = rerank_pipeline(&baseline, &EmbeddingScorer::new(&mock, &docs, texts), &opts)?;
    println!("file-backed rerank equals on-the-fly rerank: {}", from_file == direct);
    Ok(())
}

fn main() -> tar_rank::Result<()> {
    let dim = match std::env::args().nth(1) {
        Some(d) => d
            .parse()
            .map_err(|_| tar_rank::Error::Usage(format!("not a dimension: {d}")))?,
        None => 64,
    };
    run(dim)
}
