//! File formats: write → read → write is byte-identical, and malformed
//! input is rejected with a located error.

use std::path::{Path, PathBuf};

use proptest::prelude::*;
use tar_rank::corpus::{
    corpus_to_string, parse_corpus, parse_corpus_str, parse_qrels_str, parse_topics,
    parse_topics_str, topics_to_string, TokenizerConfig,
};
use tar_rank::embeddings::{
    materialize_store, EmbeddingStore, EmbeddingVector, MockEmbedder, SentenceScoreFile,
};
use tar_rank::evalmetrics::{parse_metrics_csv, CutoffSpec};
use tar_rank::index::{build_index, FieldSet, InvertedIndex};
use tar_rank::query::{query_text, AbbreviationTable};
use tar_rank::run::{parse_run, parse_run_str, run_to_trec, write_run};
use tar_rank::Error;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/project").join(name)
}

#[test]
fn run_file_second_write_is_identical() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["expected_baseline.run", "expected_fused.run"] {
        let run = parse_run(&fixture(name)).unwrap();
        let (a, b) = (dir.path().join("a.run"), dir.path().join("b.run"));
        write_run(&a, &run).unwrap();
        write_run(&b, &parse_run(&a).unwrap()).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap(), "{name}");
    }
}

#[test]
fn run_parse_errors_carry_line_numbers() {
    let bad = "T Q0 1 1 2.0 tag\nT Q0 2 2 notanumber tag\n";
    let e = parse_run_str(bad, "r.run").unwrap_err().to_string();
    assert!(e.starts_with("r.run:2:"), "{e}");
    assert!(parse_run_str("T Q0 1 1 2.0\n", "r").is_err());
    assert!(parse_run_str("T Q0 1 1 2.0 t\nT Q0 1 2 1.0 t\n", "r").is_err());
}

#[test]
fn qrels_second_write_is_identical() {
    let text = std::fs::read_to_string(fixture("qrels.txt")).unwrap();
    let first = parse_qrels_str(&text, "q").unwrap().to_trec();
    let second = parse_qrels_str(&first, "q").unwrap().to_trec();
    assert_eq!(first, second);
    assert!(parse_qrels_str("T 0 1\n", "q").is_err());
    assert!(parse_qrels_str("T 0 1 x\n", "q").is_err());
}

#[test]
fn corpus_and_topics_second_write_is_identical() {
    let docs = parse_corpus(&fixture("corpus.jsonl")).unwrap();
    let first = corpus_to_string(&docs);
    let second = corpus_to_string(&parse_corpus_str(&first, "c").unwrap());
    assert_eq!(first, second);

    let topics = parse_topics(&fixture("topics.txt")).unwrap();
    let first = topics_to_string(&topics);
    let again = parse_topics_str(&first, "t").unwrap();
    assert_eq!(again, topics);
    assert_eq!(topics_to_string(&again), first);
}

fn fixture_store() -> EmbeddingStore {
    let corpus = parse_corpus(&fixture("corpus.jsonl")).unwrap();
    let topics = parse_topics(&fixture("topics.txt")).unwrap();
    let abbrev = AbbreviationTable::load(&fixture("abbrev.tsv")).unwrap();
    let texts: Vec<_> = topics.iter().map(|t| (t, query_text(t, &abbrev))).collect();
    materialize_store(&MockEmbedder::new(32), 32, &corpus, &texts).unwrap()
}

#[test]
fn emb1_second_write_is_identical() {
    let dir = tempfile::tempdir().unwrap();
    let store = fixture_store();
    assert!(store.get("q:CD001").is_some() && store.get("s:101:0").is_some());
    let (a, b) = (dir.path().join("a.emb1"), dir.path().join("b.emb1"));
    store.save(&a).unwrap();
    let back = EmbeddingStore::load(&a).unwrap();
    back.save(&b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    for key in store.keys() {
        let (x, y) = (store.get(key).unwrap(), back.get(key).unwrap());
        assert!(x.0.iter().zip(&y.0).all(|(p, q)| p.to_bits() == q.to_bits()), "{key}");
    }
}

#[test]
fn emb1_rejects_malformed_records() {
    assert!(EmbeddingStore::parse("", "e").is_err());
    assert!(EmbeddingStore::parse("EMB2 3\n", "e").is_err());
    assert!(EmbeddingStore::parse("EMB1 x\n", "e").is_err());
    assert!(matches!(
        EmbeddingStore::parse("EMB1 3\nq:T 1 2\n", "e"),
        Err(Error::DimensionMismatch { .. })
    ));
    assert!(matches!(
        EmbeddingStore::parse("EMB1 2\nq:T 1 2\nq:T 1 2\n", "e"),
        Err(Error::DuplicateKey(_))
    ));
    let e = EmbeddingStore::parse("EMB1 2\nq:T 1 2\ns:1:0 1 oops\n", "e.emb1").unwrap_err();
    assert!(e.to_string().starts_with("e.emb1:3:"), "{e}");
}

#[test]
fn sentence_score_file_second_write_is_identical() {
    let text = std::fs::read_to_string(fixture("expected_sentence_scores.txt")).unwrap();
    let first = SentenceScoreFile::parse(&text, "s").unwrap().to_text();
    assert_eq!(SentenceScoreFile::parse(&first, "s").unwrap().to_text(), first);
    assert!(SentenceScoreFile::parse("T 1 1 0.5\n", "s").is_err());
    assert!(SentenceScoreFile::parse("T 1 0 0.5\nT 1 0 0.2\n", "s").is_err());
    assert!(SentenceScoreFile::parse("T 1 0 NaN\n", "s").is_err());
}

fn fixture_index() -> InvertedIndex {
    let corpus = parse_corpus(&fixture("corpus.jsonl")).unwrap();
    build_index(&corpus, FieldSet::all(), TokenizerConfig::default()).unwrap()
}

#[test]
fn index_second_write_is_identical() {
    let dir = tempfile::tempdir().unwrap();
    let index = fixture_index();
    let (a, b) = (dir.path().join("a.taridx"), dir.path().join("b.taridx"));
    index.save(&a).unwrap();
    let back = InvertedIndex::load(&a).unwrap();
    assert_eq!(back, index);
    back.save(&b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn index_rejects_corrupt_bytes() {
    let bytes = fixture_index().to_bytes();
    let bad = |b: &[u8]| matches!(InvertedIndex::from_bytes(b), Err(Error::IndexFormat(_)));
    assert!(bad(b"NOTANIDX"));
    assert!(bad(&bytes[..bytes.len() - 1]));
    let mut trailing = bytes.clone();
    trailing.push(0);
    assert!(bad(&trailing));
    let mut version = bytes.clone();
    version[7] = 9;
    assert!(bad(&version));
    assert!(bad(&[]));
}

#[test]
fn metrics_csv_second_write_is_identical() {
    let run = parse_run(&fixture("expected_baseline.run")).unwrap();
    let qrels = tar_rank::corpus::parse_qrels(&fixture("qrels.txt")).unwrap();
    let report = tar_rank::evalmetrics::evaluate_run(&run, &qrels, CutoffSpec::default(), false).unwrap();
    let first = report.to_csv();
    let parsed = parse_metrics_csv(&first, "m").unwrap();
    assert_eq!(parsed, report.per_topic);
    assert!(parse_metrics_csv("topic,ap\nT,0.5\n", "m").is_err());
}

proptest! {
    #[test]
    fn emb1_round_trip_any_vectors(vs in prop::collection::vec(prop::collection::vec(-1e30f32..1e30, 3), 1..8)) {
        let mut store = EmbeddingStore::new(3).unwrap();
        for (i, v) in vs.iter().enumerate() {
            store.insert(&format!("s:{i}:0"), EmbeddingVector(v.clone())).unwrap();
        }
        let text = store.to_text();
        let back = EmbeddingStore::parse(&text, "e").unwrap();
        prop_assert_eq!(back.to_text(), text);
        for (i, v) in vs.iter().enumerate() {
            let got = &back.get(&format!("s:{i}:0")).unwrap().0;
            prop_assert!(got.iter().zip(v).all(|(a, b)| a.to_bits() == b.to_bits()));
        }
    }

    #[test]
    fn run_round_trip_any_tags(tag in "[A-Za-z0-9_.-]{1,12}", topic in "[A-Z]{2}[0-9]{1,4}") {
        let r = vec![tar_rank::run::Ranking::from_scores(&topic, &tag, vec![("7".into(), 0.5), ("12".into(), 0.5), ("3".into(), 2.0)])];
        let text = run_to_trec(&r);
        prop_assert_eq!(run_to_trec(&parse_run_str(&text, "r").unwrap()), text);
    }
}
