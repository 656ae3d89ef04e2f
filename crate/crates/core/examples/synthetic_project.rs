//! Write the deterministic synthetic review project (corpus, topics, qrels,
//! abbreviations) so the `tar-rank` binary can be tried end to end.
//!
//! ```text
//! cargo run --example synthetic_project -- /tmp/synth
//! tar-rank index --corpus /tmp/synth/corpus.jsonl --out /tmp/synth/index.taridx
//! ```

use std::path::Path;

use tar_rank::synth::{SynthConfig, SynthProject};

pub fn run(dir: &Path) -> tar_rank::Result<()> {
    let config = SynthConfig::default();
    let project = SynthProject::generate(&config)?;
    let paths = project.write_to(dir)?;
    println!(
        "{} topics, {} documents, {} judged pairs",
        project.topics.len(),
        project.corpus.len(),
        project.qrels.len()
    );
    for t in &project.topics {
        println!("{}  {}  ({} relevant)", t.id, t.title, project.qrels.num_relevant(&t.id));
    }
    for p in [&paths.corpus, &paths.topics, &paths.qrels, &paths.abbrev] {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> tar_rank::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "synthetic-project".into());
    run(Path::new(&dir))
}
