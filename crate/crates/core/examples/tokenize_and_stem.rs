//! The text pipeline: alphanumeric split, lowercasing, stopword removal and
//! Porter stemming, then Boolean-query cleanup with abbreviation expansion.
//!
//! ```text
//! cargo run --example tokenize_and_stem -- "Any text to tokenize"
//! ```

use tar_rank::corpus::{tokenize, TokenizerConfig};
use tar_rank::query::{boolean_query_words, preprocess_boolean_query, AbbreviationTable};

pub fn run(text: &str) -> tar_rank::Result<()> {
    let stemmed = TokenizerConfig::default();
    println!("input:      {text}");
    println!("stemmed:    {:?}", tokenize(text, &stemmed));
    println!("unstemmed:  {:?}", tokenize(text, &TokenizerConfig::unstemmed()));

    let raw = "(\"Myocardial Infarction\"[Mesh] OR MI[tiab]) AND (aspirin[tiab] NOT rats) AND #3";
    let abbrev = AbbreviationTable::builtin();
    println!("\nboolean:    {raw}");
    println!("words:      {:?}", boolean_query_words(raw, &abbrev));
    println!("tokens:     {:?}", preprocess_boolean_query(raw, &abbrev, &stemmed));
    Ok(())
}

fn main() -> tar_rank::Result<()> {
    let text = std::env::args().nth(1).unwrap_or_else(|| {
        "Randomized controlled trials of aspirin for the prevention of cardiovascular events".into()
    });
    run(&text)
}
