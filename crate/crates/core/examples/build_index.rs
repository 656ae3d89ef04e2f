//! Index a JSONL corpus, inspect its statistics and round-trip the binary
//! `TARIDX1` file.
//!
//! ```text
//! cargo run --example build_index -- [corpus.jsonl]
//! ```

use std::path::PathBuf;

use tar_rank::corpus::{parse_corpus, TokenizerConfig};
use tar_rank::index::{build_index, FieldSet, InvertedIndex};

const FIXTURE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/project/corpus.jsonl");

pub fn run(corpus: PathBuf) -> tar_rank::Result<()> {
    let docs = parse_corpus(&corpus)?;
    let index = build_index(&docs, FieldSet::all(), TokenizerConfig::default())?;
    println!(
        "{} documents, {} terms, mean length {:.2}",
        index.doc_count(),
        index.vocab_size(),
        index.avg_doc_length()
    );
    for term in ["aspirin", "infarct", "trial"] {
        println!("df({term}) = {}", index.df(term));
    }
    if let Some(doc) = index.doc_id(&docs[0].pmid) {
        let mut top: Vec<_> = index
            .doc_terms(doc)
            .iter()
            .map(|&(t, _)| (index.term(t), index.tfidf_weight(index.term(t), doc)))
            .collect();
        top.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        println!("heaviest TF-IDF terms of pmid {}: {:?}", docs[0].pmid, &top[..top.len().min(5)]);
    }

    let dir = tempfile::tempdir().map_err(|e| tar_rank::Error::Usage(e.to_string()))?;
    let path = dir.path().join("corpus.taridx");
    index.save(&path)?;
    let back = InvertedIndex::load(&path)?;
    println!(
        "saved {} bytes; reload identical: {}",
        std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0),
        back == index
    );
    Ok(())
}

fn main() -> tar_rank::Result<()> {
    run(std::env::args().nth(1).map_or_else(|| FIXTURE.into(), PathBuf::from))
}
