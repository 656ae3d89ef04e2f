//! Per-topic AP, recall, NCG and normalized area of a run, as a table and
//! as CSV, under both cutoff modes.
//!
//! ```text
//! cargo run --example evaluate_run -- [run] [qrels]
//! ```

use std::path::PathBuf;

use tar_rank::corpus::parse_qrels;
use tar_rank::evalmetrics::{evaluate_run, CutoffSpec};
use tar_rank::run::parse_run;

const PROJECT: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/project");

pub fn run(run: PathBuf, qrels: PathBuf) -> tar_rank::Result<()> {
    let rankings = parse_run(&run)?;
    let qrels = parse_qrels(&qrels)?;
    for cutoff in [CutoffSpec::default(), CutoffSpec::Absolute(2)] {
        let report = evaluate_run(&rankings, &qrels, cutoff, false)?;
        println!("{}", report.to_table());
        print!("{}", report.to_csv());
        for (topic, why) in &report.errors {
            eprintln!("{topic}: {why}");
        }
        println!();
    }
    Ok(())
}

fn main() -> tar_rank::Result<()> {
    let mut args = std::env::args().skip(1);
    let run_path = args.next().map_or_else(|| format!("{PROJECT}/expected_baseline.run").into(), PathBuf::from);
    let qrels = args.next().map_or_else(|| format!("{PROJECT}/qrels.txt").into(), PathBuf::from);
    run(run_path, qrels)
}
