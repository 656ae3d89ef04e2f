//! The `tar-rank` command line: `index`, `run`, `rerank`, `eval`, `stats`,
//! `plot` and `selftest`.
//!
//! Settings come from flags, then from an optional TOML file (`--config` or
//! `TAR_RANK_CONFIG`), then from built-in defaults. Relative paths in the
//! file are resolved against the file's directory. Data goes to `--out` or
//! stdout; logs go to stderr.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::corpus::{parse_corpus, parse_qrels, parse_topics, Stemmer, TokenizerConfig};
use crate::embeddings::{materialize_store, EmbeddingStore, MockEmbedder, SentenceScoreFile};
use crate::error::{Error, Result};
use crate::evalmetrics::{
    evaluate_run, load_metrics_csv, plot_csv, plot_data, CutoffSpec, MetricsReport, PlotRow,
    TopicMetrics,
};
use crate::fusion::{rerank_pipeline, EmbeddingScorer, FusionParams, Pooling, RerankOptions, SentenceScoreSource};
use crate::index::{build_index, run_baseline, Bm25Params, Depth, FieldSet, InvertedIndex, RetrievalConfig, Rm3Params};
use crate::query::{query_text, AbbreviationTable};
use crate::run::{parse_run, run_to_trec, Ranking};
use crate::stats::{compare_models, TestMode};
use crate::synth::{SynthConfig, SynthProject};

#[derive(Debug, Parser)]
#[command(name = "tar-rank", version, about = "Candidate-set ranking and evaluation for technology-assisted review")]
pub struct Cli {
    /// TOML settings file; flags override its values.
    #[arg(long, global = true, env = "TAR_RANK_CONFIG", value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads (default: number of processors).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build and save an inverted index of a JSONL corpus.
    Index(IndexArgs),
    /// BM25 + TF-IDF expansion + RM3 baseline over each topic's candidates.
    Run(RunArgs),
    /// Fuse a baseline run with pooled sentence scores.
    Rerank(RerankArgs),
    /// Per-topic and mean metrics of a run.
    Eval(EvalArgs),
    /// ANOVA and Bonferroni-corrected pairwise tests across models.
    Stats(StatsArgs),
    /// Metric against candidate-set size.
    Plot(PlotArgs),
    /// Built-in oracle checks and a double pipeline run on a synthetic project.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated fields: title, abstract, pmid, authors, journal, year, mesh, medline_ta.
    #[arg(long)]
    pub fields: Option<String>,
    #[arg(long)]
    pub no_stem: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub index: Option<PathBuf>,
    #[arg(long)]
    pub topics: Option<PathBuf>,
    /// Abbreviation table (`abbrev<TAB>expansion`); the built-in list otherwise.
    #[arg(long)]
    pub abbrev: Option<PathBuf>,
    /// TF-IDF expansion terms, 0 to disable.
    #[arg(long)]
    pub qe_terms: Option<usize>,
    #[arg(long)]
    pub k1: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub rm3_terms: Option<usize>,
    #[arg(long)]
    pub rm3_docs: Option<usize>,
    #[arg(long)]
    pub rm3_weight: Option<f64>,
    #[arg(long)]
    pub no_rm3: bool,
    /// Keep at most this many documents per topic (default: all candidates).
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub tag: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the topics that succeeded and exit 0 even if some failed.
    #[arg(long)]
    pub keep_going: bool,
}

#[derive(Debug, Args)]
pub struct RerankArgs {
    #[arg(long)]
    pub run: Option<PathBuf>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub topics: Option<PathBuf>,
    #[arg(long)]
    pub abbrev: Option<PathBuf>,
    /// EMB1 embedding file.
    #[arg(long, conflicts_with_all = ["sentence_scores", "mock"])]
    pub embeddings: Option<PathBuf>,
    /// Precomputed `topic pmid index score` file.
    #[arg(long, conflicts_with = "mock")]
    pub sentence_scores: Option<PathBuf>,
    /// Hashed bag-of-words embeddings computed on the fly.
    #[arg(long)]
    pub mock: bool,
    #[arg(long)]
    pub mock_dim: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// mean, max or weighted.
    #[arg(long)]
    pub pooling: Option<String>,
    /// Comma-separated sentence weights for weighted pooling.
    #[arg(long)]
    pub weights: Option<String>,
    #[arg(long)]
    pub no_normalize: bool,
    /// Fraction of a topic's documents allowed to lack sentence data.
    #[arg(long)]
    pub missing_tolerance: Option<f64>,
    #[arg(long)]
    pub tag: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub run: Option<PathBuf>,
    #[arg(long)]
    pub qrels: Option<PathBuf>,
    #[arg(long, conflicts_with = "cutoff_abs")]
    pub cutoff_percent: Option<f64>,
    #[arg(long)]
    pub cutoff_abs: Option<usize>,
    /// Leave topics without relevant documents out of the means.
    #[arg(long)]
    pub skip_empty: bool,
    /// Metrics CSV; the table goes to stdout when set.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// `TAG=FILE` or `FILE` (tag = file stem); repeat for each model.
    #[arg(long = "metrics", required = true)]
    pub metrics: Vec<String>,
    #[arg(long)]
    pub metric: Option<String>,
    /// paired or unpaired-pooled.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Pairwise CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Significance matrix text.
    #[arg(long)]
    pub matrix_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub metrics: PathBuf,
    #[arg(long)]
    pub topics: Option<PathBuf>,
    #[arg(long)]
    pub metric: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    /// Keep the generated projects here instead of a temporary directory.
    #[arg(long)]
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub paths: PathsSection,
    #[serde(default)]
    pub index: IndexSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub rerank: RerankSection,
    #[serde(default)]
    pub eval: EvalSection,
    #[serde(default)]
    pub stats: StatsSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsSection {
    pub corpus: Option<PathBuf>,
    pub topics: Option<PathBuf>,
    pub qrels: Option<PathBuf>,
    pub abbrev: Option<PathBuf>,
    pub index: Option<PathBuf>,
    pub run: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub sentence_scores: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexSection {
    pub fields: Option<String>,
    pub stem: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub k1: Option<f64>,
    pub b: Option<f64>,
    pub qe_terms: Option<usize>,
    pub rm3: Option<bool>,
    pub rm3_terms: Option<usize>,
    pub rm3_docs: Option<usize>,
    pub rm3_weight: Option<f64>,
    pub depth: Option<usize>,
    pub tag: Option<String>,
    pub keep_going: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RerankSection {
    pub lambda: Option<f64>,
    pub pooling: Option<String>,
    pub weights: Option<Vec<f64>>,
    pub normalize: Option<bool>,
    pub mock_dim: Option<usize>,
    pub missing_tolerance: Option<f64>,
    pub tag: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSection {
    pub cutoff_percent: Option<f64>,
    pub cutoff_abs: Option<usize>,
    pub skip_empty: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsSection {
    pub metric: Option<String>,
    pub mode: Option<String>,
    pub alpha: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: FileConfig = toml::from_str(&text)
            .map_err(|e| Error::parse(path.display(), 0, e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let p = &mut cfg.paths;
        for slot in [
            &mut p.corpus,
            &mut p.topics,
            &mut p.qrels,
            &mut p.abbrev,
            &mut p.index,
            &mut p.run,
            &mut p.embeddings,
            &mut p.sentence_scores,
        ] {
            if let Some(rel) = slot.as_ref().filter(|q| q.is_relative()) {
                *slot = Some(base.join(rel));
            }
        }
        Ok(cfg)
    }
}

pub const DEFAULT_MOCK_DIM: usize = 128;

fn required(flag: Option<PathBuf>, file: &Option<PathBuf>, name: &str) -> Result<PathBuf> {
    flag.or_else(|| file.clone())
        .ok_or_else(|| Error::Usage(format!("--{name} is required (flag or [paths] {name})")))
}

fn existing(path: PathBuf) -> Result<PathBuf> {
    if path.exists() {
        Ok(path)
    } else {
        Err(Error::io(
            &path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory"),
        ))
    }
}

fn emit(out: Option<&Path>, data: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, data).map_err(|e| Error::io(p, e)),
        None => std::io::stdout()
            .lock()
            .write_all(data.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

fn load_abbrev(path: Option<PathBuf>) -> Result<AbbreviationTable> {
    match path {
        Some(p) => AbbreviationTable::load(&existing(p)?),
        None => Ok(AbbreviationTable::builtin()),
    }
}

// Resolved jobs. `selftest` builds these directly.

#[derive(Debug, Clone)]
pub struct IndexJob {
    pub corpus: PathBuf,
    pub out: PathBuf,
    pub fields: FieldSet,
    pub tokenizer: TokenizerConfig,
}

#[derive(Debug, Clone)]
pub struct RunJob {
    pub index: PathBuf,
    pub topics: PathBuf,
    pub abbrev: Option<PathBuf>,
    pub retrieval: RetrievalConfig,
    pub keep_going: bool,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub enum ScoreSourceSpec {
    Embeddings(PathBuf),
    SentenceScores(PathBuf),
    Mock(usize),
}

#[derive(Debug, Clone)]
pub struct RerankJob {
    pub run: PathBuf,
    pub source: ScoreSourceSpec,
    pub corpus: Option<PathBuf>,
    pub topics: Option<PathBuf>,
    pub abbrev: Option<PathBuf>,
    pub options: RerankOptions,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct EvalJob {
    pub run: PathBuf,
    pub qrels: PathBuf,
    pub cutoff: CutoffSpec,
    pub skip_empty: bool,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct StatsJob {
    pub metrics: Vec<(String, PathBuf)>,
    pub metric: String,
    pub mode: TestMode,
    pub alpha: f64,
    pub out: Option<PathBuf>,
    pub matrix_out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct PlotJob {
    pub metrics: PathBuf,
    pub topics: PathBuf,
    pub metric: String,
    pub out: Option<PathBuf>,
}

pub fn exec_index(job: &IndexJob) -> Result<InvertedIndex> {
    let docs = parse_corpus(&existing(job.corpus.clone())?)?;
    let index = build_index(&docs, job.fields, job.tokenizer.clone())?;
    index.save(&job.out)?;
    eprintln!(
        "indexed N={} vocabulary={} avg_doc_length={:.4}",
        index.doc_count(),
        index.vocab_size(),
        index.avg_doc_length()
    );
    Ok(index)
}

pub fn exec_run(job: &RunJob) -> Result<Vec<Ranking>> {
    let index = InvertedIndex::load(&existing(job.index.clone())?)?;
    let topics = parse_topics(&existing(job.topics.clone())?)?;
    let abbrev = load_abbrev(job.abbrev.clone())?;
    let out = run_baseline(&topics, &index, &abbrev, &job.retrieval)?;
    for (t, e) in &out.failures {
        log::error!("topic {t}: {e}");
    }
    if !out.failures.is_empty() && !job.keep_going {
        return Err(Error::TopicFailures(
            out.failures.iter().map(|(t, e)| format!("{t}: {e}")).collect(),
        ));
    }
    emit(job.out.as_deref(), &run_to_trec(&out.rankings))?;
    Ok(out.rankings)
}

pub fn exec_rerank(job: &RerankJob) -> Result<Vec<Ranking>> {
    let baseline = parse_run(&existing(job.run.clone())?)?;
    let fused = match &job.source {
        ScoreSourceSpec::SentenceScores(p) => {
            let file = SentenceScoreFile::load(&existing(p.clone())?)?;
            rerank_pipeline(&baseline, &file, &job.options)?
        }
        spec => {
            let corpus_path = job
                .corpus
                .clone()
                .ok_or_else(|| Error::Usage("--corpus is required for embedding scores".into()))?;
            let topics_path = job
                .topics
                .clone()
                .ok_or_else(|| Error::Usage("--topics is required for embedding scores".into()))?;
            let corpus = parse_corpus(&existing(corpus_path)?)?;
            let topics = parse_topics(&existing(topics_path)?)?;
            let abbrev = load_abbrev(job.abbrev.clone())?;
            let texts: Vec<_> = topics.iter().map(|t| (t, query_text(t, &abbrev))).collect();
            let store;
            let mock;
            let provider: &dyn crate::embeddings::EmbeddingProvider = match spec {
                ScoreSourceSpec::Embeddings(p) => {
                    store = EmbeddingStore::load(&existing(p.clone())?)?;
                    &store
                }
                ScoreSourceSpec::Mock(dim) => {
                    if *dim == 0 {
                        return Err(Error::InvalidParameter("mock dimension must be >= 1".into()));
                    }
                    mock = MockEmbedder::new(*dim);
                    &mock
                }
                ScoreSourceSpec::SentenceScores(_) => unreachable!(),
            };
            let scorer = EmbeddingScorer::new(provider, &corpus, texts);
            let source: &dyn SentenceScoreSource = &scorer;
            rerank_pipeline(&baseline, source, &job.options)?
        }
    };
    emit(job.out.as_deref(), &run_to_trec(&fused))?;
    Ok(fused)
}

pub fn exec_eval(job: &EvalJob) -> Result<MetricsReport> {
    let run = parse_run(&existing(job.run.clone())?)?;
    let qrels = parse_qrels(&existing(job.qrels.clone())?)?;
    let report = evaluate_run(&run, &qrels, job.cutoff, job.skip_empty)?;
    for (t, e) in &report.errors {
        log::warn!("topic {t}: {e}");
    }
    for t in &report.empty_topics {
        log::warn!("topic {t}: no relevant documents; metrics are 0");
    }
    emit(job.out.as_deref(), &report.to_csv())?;
    Ok(report)
}

pub fn exec_stats(job: &StatsJob) -> Result<crate::stats::StatsReport> {
    let tables = job
        .metrics
        .iter()
        .map(|(tag, p)| Ok((tag.clone(), load_metrics_csv(&existing(p.clone())?)?)))
        .collect::<Result<Vec<(String, BTreeMap<String, TopicMetrics>)>>>()?;
    let report = compare_models(&tables, &job.metric, job.mode, job.alpha)?;
    emit(job.out.as_deref(), &report.to_csv())?;
    match &job.matrix_out {
        Some(p) => emit(Some(p), &report.to_matrix_text())?,
        None => {
            if job.out.is_none() {
                emit(None, "\n")?;
            }
            emit(None, &report.to_matrix_text())?
        }
    }
    Ok(report)
}

pub fn exec_plot(job: &PlotJob) -> Result<Vec<PlotRow>> {
    let per_topic = load_metrics_csv(&existing(job.metrics.clone())?)?;
    let topics = parse_topics(&existing(job.topics.clone())?)?;
    let rows = plot_data(&per_topic, &topics, &job.metric)?;
    emit(job.out.as_deref(), &plot_csv(&rows, &job.metric))?;
    Ok(rows)
}

/// Horizontal bars, one per topic, for a terminal.
pub fn ascii_chart(rows: &[PlotRow]) -> String {
    let mut chart = String::new();
    for r in rows {
        let bar = "#".repeat((r.value.clamp(0.0, 1.0) * 40.0).round() as usize);
        chart.push_str(&format!("{:<12} {:>7} |{bar} {:.3}\n", r.topic_id, r.topic_size, r.value));
    }
    chart
}

fn parse_metrics_arg(spec: &str) -> (String, PathBuf) {
    match spec.split_once('=') {
        Some((tag, path)) if !tag.is_empty() => (tag.to_string(), PathBuf::from(path)),
        _ => {
            let p = PathBuf::from(spec);
            let tag = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| spec.to_string());
            (tag, p)
        }
    }
}

fn parse_weights(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|w| {
            w.trim()
                .parse::<f64>()
                .map_err(|_| Error::Usage(format!("bad weight {w:?} in --weights")))
        })
        .collect()
}

fn cutoff_from(percent: Option<f64>, abs: Option<usize>) -> CutoffSpec {
    match (percent, abs) {
        (Some(p), _) => CutoffSpec::Percent(p),
        (None, Some(k)) => CutoffSpec::Absolute(k),
        (None, None) => CutoffSpec::default(),
    }
}

fn execute(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(&existing(p.clone())?)?,
        None => FileConfig::default(),
    };
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(Error::Usage("--jobs must be at least 1".into()));
        }
        // a second initialization in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
    let paths = &file.paths;
    match cli.command {
        Command::Index(a) => {
            let fields = match a.fields.or(file.index.fields.clone()) {
                Some(f) => FieldSet::parse(&f)?,
                None => FieldSet::all(),
            };
            let stem = !a.no_stem && file.index.stem.unwrap_or(true);
            let tokenizer = if stem {
                TokenizerConfig::default()
            } else {
                TokenizerConfig {
                    stemmer: Stemmer::None,
                    ..TokenizerConfig::default()
                }
            };
            exec_index(&IndexJob {
                corpus: required(a.corpus, &paths.corpus, "corpus")?,
                out: a
                    .out
                    .or_else(|| paths.index.clone())
                    .ok_or_else(|| Error::Usage("--out is required".into()))?,
                fields,
                tokenizer,
            })?;
        }
        Command::Run(a) => {
            let r = &file.run;
            let bm25 = Bm25Params {
                k1: a.k1.or(r.k1).unwrap_or(Bm25Params::default().k1),
                b: a.b.or(r.b).unwrap_or(Bm25Params::default().b),
            };
            let use_rm3 = !a.no_rm3 && r.rm3.unwrap_or(true);
            let d = Rm3Params::default();
            let rm3 = use_rm3.then(|| Rm3Params {
                fb_terms: a.rm3_terms.or(r.rm3_terms).unwrap_or(d.fb_terms),
                fb_docs: a.rm3_docs.or(r.rm3_docs).unwrap_or(d.fb_docs),
                original_query_weight: a.rm3_weight.or(r.rm3_weight).unwrap_or(d.original_query_weight),
            });
            let retrieval = RetrievalConfig {
                bm25,
                rm3,
                qe_terms: a.qe_terms.or(r.qe_terms).unwrap_or(crate::query::DEFAULT_QE_TERMS),
                depth: a.depth.or(r.depth).map_or(Depth::Full, Depth::Cutoff),
                tag: a
                    .tag
                    .or(r.tag.clone())
                    .unwrap_or_else(|| RetrievalConfig::default().tag),
            };
            exec_run(&RunJob {
                index: required(a.index, &paths.index, "index")?,
                topics: required(a.topics, &paths.topics, "topics")?,
                abbrev: a.abbrev.or(paths.abbrev.clone()),
                retrieval,
                keep_going: a.keep_going || r.keep_going.unwrap_or(false),
                out: a.out,
            })?;
        }
        Command::Rerank(a) => {
            let r = &file.rerank;
            let source = if let Some(p) = a.embeddings {
                ScoreSourceSpec::Embeddings(p)
            } else if let Some(p) = a.sentence_scores {
                ScoreSourceSpec::SentenceScores(p)
            } else if a.mock {
                ScoreSourceSpec::Mock(a.mock_dim.or(r.mock_dim).unwrap_or(DEFAULT_MOCK_DIM))
            } else if let Some(p) = paths.embeddings.clone() {
                ScoreSourceSpec::Embeddings(p)
            } else if let Some(p) = paths.sentence_scores.clone() {
                ScoreSourceSpec::SentenceScores(p)
            } else {
                return Err(Error::Usage(
                    "one of --embeddings, --sentence-scores or --mock is required".into(),
                ));
            };
            let d = RerankOptions::default();
            let pooling: Pooling = match a.pooling.or(r.pooling.clone()) {
                Some(p) => p.parse()?,
                None => d.fusion.pooling,
            };
            let weights = match a.weights {
                Some(w) => Some(parse_weights(&w)?),
                None => r.weights.clone(),
            };
            let options = RerankOptions {
                fusion: FusionParams {
                    lambda: a.lambda.or(r.lambda).unwrap_or(d.fusion.lambda),
                    pooling,
                    weights,
                    normalize_inputs: !a.no_normalize && r.normalize.unwrap_or(true),
                },
                missing_tolerance: a
                    .missing_tolerance
                    .or(r.missing_tolerance)
                    .unwrap_or(d.missing_tolerance),
                tag: a.tag.or(r.tag.clone()).unwrap_or(d.tag),
            };
            exec_rerank(&RerankJob {
                run: required(a.run, &paths.run, "run")?,
                source,
                corpus: a.corpus.or(paths.corpus.clone()),
                topics: a.topics.or(paths.topics.clone()),
                abbrev: a.abbrev.or(paths.abbrev.clone()),
                options,
                out: a.out,
            })?;
        }
        Command::Eval(a) => {
            let e = &file.eval;
            let cutoff = if a.cutoff_percent.is_some() || a.cutoff_abs.is_some() {
                cutoff_from(a.cutoff_percent, a.cutoff_abs)
            } else {
                cutoff_from(e.cutoff_percent, e.cutoff_abs)
            };
            let to_file = a.out.is_some();
            let report = exec_eval(&EvalJob {
                run: required(a.run, &paths.run, "run")?,
                qrels: required(a.qrels, &paths.qrels, "qrels")?,
                cutoff,
                skip_empty: a.skip_empty || e.skip_empty.unwrap_or(false),
                out: a.out,
            })?;
            if to_file {
                emit(None, &report.to_table())?;
            }
        }
        Command::Stats(a) => {
            let s = &file.stats;
            let mode = match a.mode.or(s.mode.clone()) {
                Some(m) => m.parse()?,
                None => TestMode::default(),
            };
            exec_stats(&StatsJob {
                metrics: a.metrics.iter().map(|m| parse_metrics_arg(m)).collect(),
                metric: a.metric.or(s.metric.clone()).unwrap_or_else(|| "ap".into()),
                mode,
                alpha: a.alpha.or(s.alpha).unwrap_or(0.05),
                out: a.out,
                matrix_out: a.matrix_out,
            })?;
        }
        Command::Plot(a) => {
            let to_file = a.out.is_some();
            let rows = exec_plot(&PlotJob {
                metrics: a.metrics,
                topics: required(a.topics, &paths.topics, "topics")?,
                metric: a
                    .metric
                    .or(file.stats.metric.clone())
                    .unwrap_or_else(|| "ap".into()),
                out: a.out,
            })?;
            if to_file {
                emit(None, &ascii_chart(&rows))?;
            }
        }
        Command::Selftest(a) => selftest(a.dir.as_deref())?,
    }
    Ok(())
}

/// Parse `args` (program name first), run, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .format_timestamp(None)
        .try_init();
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

struct Checks {
    failures: Vec<String>,
}

impl Checks {
    fn check(&mut self, name: &str, ok: bool, detail: impl FnOnce() -> String) {
        if ok {
            println!("ok    {name}");
        } else {
            let d = detail();
            println!("FAIL  {name}: {d}");
            self.failures.push(format!("{name}: {d}"));
        }
    }
}

fn oracle_checks(c: &mut Checks) -> Result<()> {
    use crate::porter::stem;
    let stems = [
        ("caresses", "caress"),
        ("ponies", "poni"),
        ("relational", "relat"),
        ("generalizations", "gener"),
        ("hopping", "hop"),
    ];
    let bad: Vec<_> = stems.iter().filter(|(w, s)| stem(w) != *s).collect();
    c.check("porter stemmer samples", bad.is_empty(), || format!("{bad:?}"));

    let h = crate::embeddings::fnv1a64(b"a");
    c.check("fnv1a64 test vector", h == 0xaf63_dc4c_8601_ec8c, || format!("{h:x}"));

    let d = |p: &str, t: &str| crate::corpus::Document {
        pmid: p.into(),
        abstract_text: t.into(),
        ..Default::default()
    };
    let index = build_index(
        &[d("1", "heart attack"), d("2", "lung")],
        FieldSet::text_only(),
        TokenizerConfig::default(),
    )?;
    let q = crate::query::Query {
        topic_id: "t".into(),
        terms: vec![crate::query::QueryTerm {
            token: "heart".into(),
            weight: 1.0,
            provenance: crate::query::Provenance::Title,
        }],
    };
    let p = Bm25Params::default();
    let got = crate::index::bm25_score(&q, 0, &index, &p);
    let want = 2f64.ln() * (p.k1 + 1.0) / (1.0 + p.k1 * (1.0 - p.b + p.b * 2.0 / 1.5));
    c.check("bm25 direct formula", (got - want).abs() < 1e-12, || format!("{got} vs {want}"));

    let j = |rel: &[bool], r| crate::evalmetrics::Judged {
        relevant: rel.to_vec(),
        total_relevant: r,
    };
    let ap = j(&[true, false, true], 2).average_precision();
    c.check("average precision 5/6", (ap - 5.0 / 6.0).abs() < 1e-15, || ap.to_string());
    let na = j(&[false, false, true], 1).norm_area();
    c.check("norm_area relevant-last 1/3", na == 1.0 / 3.0, || na.to_string());

    let base = Ranking::from_scores("t", "b", vec![("a".into(), 5.0), ("b".into(), 1.0), ("c".into(), 1.0)]);
    let pooled = [("a", 0.7), ("b", 0.0), ("c", 1.0)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
    let fused = crate::fusion::fuse_run(&base, &pooled, &FusionParams::default(), "f")?;
    let top = fused.ranking.entries.iter().find(|e| e.pmid == "a").map(|e| e.score);
    c.check(
        "fusion spot value 0.94",
        top.is_some_and(|s| (s - 0.94).abs() < 1e-12),
        || format!("{top:?}"),
    );

    let t = crate::stats::t_cdf(2.0, 10.0)?;
    c.check("t_cdf(2, 10)", (t - 0.963_305_982_614_629_7).abs() < 1e-8, || t.to_string());
    let f = crate::stats::f_cdf(3.0, 2.0, 27.0)?;
    c.check("f_cdf(3, 2, 27)", (f - 0.933_400_245_573_943_6).abs() < 1e-8, || f.to_string());
    Ok(())
}

const PIPELINE_OUTPUTS: [&str; 11] = [
    "index.taridx",
    "baseline.run",
    "embeddings.emb1",
    "fused.run",
    "baseline.csv",
    "fused.csv",
    "stats.csv",
    "stats_matrix.txt",
    "plot.csv",
    "corpus.jsonl",
    "qrels.txt",
];

/// Full pipeline on the synthetic project; returns mean AP of the baseline
/// and fused runs.
pub fn synthetic_pipeline(dir: &Path) -> Result<(f64, f64)> {
    let project = SynthProject::generate(&SynthConfig::default())?;
    let paths = project.write_to(dir)?;
    exec_index(&IndexJob {
        corpus: paths.corpus.clone(),
        out: dir.join("index.taridx"),
        fields: FieldSet::all(),
        tokenizer: TokenizerConfig::default(),
    })?;
    exec_run(&RunJob {
        index: dir.join("index.taridx"),
        topics: paths.topics.clone(),
        abbrev: Some(paths.abbrev.clone()),
        retrieval: RetrievalConfig::default(),
        keep_going: false,
        out: Some(dir.join("baseline.run")),
    })?;

    let abbrev = AbbreviationTable::load(&paths.abbrev)?;
    let texts: Vec<_> = project
        .topics
        .iter()
        .map(|t| (t, query_text(t, &abbrev)))
        .collect();
    let store = materialize_store(&MockEmbedder::new(DEFAULT_MOCK_DIM), DEFAULT_MOCK_DIM, &project.corpus, &texts)?;
    store.save(&dir.join("embeddings.emb1"))?;
    exec_rerank(&RerankJob {
        run: dir.join("baseline.run"),
        source: ScoreSourceSpec::Embeddings(dir.join("embeddings.emb1")),
        corpus: Some(paths.corpus.clone()),
        topics: Some(paths.topics.clone()),
        abbrev: Some(paths.abbrev.clone()),
        options: RerankOptions::default(),
        out: Some(dir.join("fused.run")),
    })?;

    let mut means = Vec::new();
    for name in ["baseline", "fused"] {
        let report = exec_eval(&EvalJob {
            run: dir.join(format!("{name}.run")),
            qrels: paths.qrels.clone(),
            cutoff: CutoffSpec::default(),
            skip_empty: false,
            out: Some(dir.join(format!("{name}.csv"))),
        })?;
        means.push(report.macro_avg.map_or(0.0, |m| m.ap));
    }
    exec_stats(&StatsJob {
        metrics: ["baseline", "fused"]
            .iter()
            .map(|n| (n.to_string(), dir.join(format!("{n}.csv"))))
            .collect(),
        metric: "ap".into(),
        mode: TestMode::Paired,
        alpha: 0.05,
        out: Some(dir.join("stats.csv")),
        matrix_out: Some(dir.join("stats_matrix.txt")),
    })?;
    exec_plot(&PlotJob {
        metrics: dir.join("fused.csv"),
        topics: paths.topics,
        metric: "ap".into(),
        out: Some(dir.join("plot.csv")),
    })?;
    Ok((means[0], means[1]))
}

/// Oracle spot checks, then the synthetic pipeline twice with a byte
/// comparison of every output.
pub fn selftest(dir: Option<&Path>) -> Result<()> {
    let tmp;
    let root = match dir {
        Some(d) => d.to_path_buf(),
        None => {
            tmp = tempfile::tempdir().map_err(|e| Error::io(std::env::temp_dir(), e))?;
            tmp.path().to_path_buf()
        }
    };
    let mut c = Checks { failures: Vec::new() };
    oracle_checks(&mut c)?;

    let (a, b) = (root.join("round1"), root.join("round2"));
    let (base_ap, fused_ap) = synthetic_pipeline(&a)?;
    synthetic_pipeline(&b)?;
    for name in PIPELINE_OUTPUTS {
        let x = std::fs::read(a.join(name)).map_err(|e| Error::io(a.join(name), e))?;
        let y = std::fs::read(b.join(name)).map_err(|e| Error::io(b.join(name), e))?;
        c.check(&format!("deterministic {name}"), x == y, || "outputs differ".into());
    }
    c.check(
        "fused mean AP above baseline",
        fused_ap > base_ap,
        || format!("fused {fused_ap} vs baseline {base_ap}"),
    );
    if c.failures.is_empty() {
        println!("selftest passed");
        Ok(())
    } else {
        Err(Error::SelfTest(c.failures.join("; ")))
    }
}
