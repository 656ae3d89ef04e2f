//! Metric value against candidate-set size, as CSV and a text chart.
//! Synthetic topics are cut to different sizes so the x axis varies.
//!
//! ```text
//! cargo run --example plot_topic_size -- [metric]
//! ```

use tar_rank::cli::ascii_chart;
use tar_rank::corpus::TokenizerConfig;
use tar_rank::evalmetrics::{evaluate_run, plot_csv, plot_data, CutoffSpec};
use tar_rank::index::{build_index, run_baseline, FieldSet, RetrievalConfig};
use tar_rank::query::AbbreviationTable;
use tar_rank::synth::{SynthConfig, SynthProject};

pub fn run(metric: &str) -> tar_rank::Result<()> {
    let mut p = SynthProject::generate(&SynthConfig {
        topics: 6,
        ..Default::default()
    })?;
    for (i, t) in p.topics.iter_mut().enumerate() {
        t.candidate_pmids.truncate(15 + 5 * i);
    }
    let abbrev = AbbreviationTable::parse(&p.abbreviations, "synthetic")?;
    let index = build_index(&p.corpus, FieldSet::all(), TokenizerConfig::default())?;
    let base = run_baseline(&p.topics, &index, &abbrev, &RetrievalConfig::default())?;
    let report = evaluate_run(&base.rankings, &p.qrels, CutoffSpec::default(), false)?;

    let rows = plot_data(&report.per_topic, &p.topics, metric)?;
    print!("{}", plot_csv(&rows, metric));
    println!();
    print!("{}", ascii_chart(&rows));
    Ok(())
}

fn main() -> tar_rank::Result<()> {
    run(&std::env::args().nth(1).unwrap_or_else(|| "norm_area".into()))
}
