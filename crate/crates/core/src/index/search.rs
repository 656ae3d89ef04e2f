//! Candidate-set retrieval and the full baseline pipeline.

use rayon::prelude::*;

use super::{bm25_score, rm3_expand, Bm25Params, InvertedIndex, Rm3Params};
use crate::corpus::{cmp_pmid, Topic};
use crate::error::{Error, Result};
use crate::query::{expand_query_tfidf, formulate_query, AbbreviationTable, Query};
use crate::run::Ranking;

/// How many entries to keep per topic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Depth {
    /// The whole candidate set, so recall can reach 1.
    #[default]
    Full,
    Cutoff(usize),
}

impl Depth {
    fn limit(self, candidates: usize) -> usize {
        match self {
            Depth::Full => candidates,
            Depth::Cutoff(d) => d.min(candidates),
        }
    }
}

/// Score only the topic's candidates. Candidates missing from the index go
/// after every scored document, at `min score - 1`, in identifier order.
pub fn search_subset(
    query: &Query,
    topic: &Topic,
    index: &InvertedIndex,
    params: &Bm25Params,
    depth: Depth,
    tag: &str,
) -> Result<Ranking> {
    if depth == Depth::Cutoff(0) {
        return Err(Error::InvalidParameter("depth must be at least 1".into()));
    }
    let mut scored = Vec::new();
    let mut missing = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for pmid in &topic.candidate_pmids {
        if !seen.insert(pmid.as_str()) {
            continue;
        }
        match index.doc_id(pmid) {
            Some(doc) => scored.push((pmid.clone(), bm25_score(query, doc, index, params))),
            None => missing.push(pmid.clone()),
        }
    }
    let floor = scored
        .iter()
        .map(|(_, s)| *s)
        .fold(f64::INFINITY, f64::min);
    let sentinel = if floor.is_finite() { floor - 1.0 } else { 0.0 };

    let mut ranking = Ranking::from_scores(&topic.id, tag, scored);
    missing.sort_by(|a, b| cmp_pmid(a, b));
    let start = ranking.len();
    ranking
        .entries
        .extend(missing.into_iter().enumerate().map(|(i, pmid)| crate::run::RunEntry {
            pmid,
            rank: start + i + 1,
            score: sentinel,
        }));
    ranking.truncate(depth.limit(seen.len()));
    Ok(ranking)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalConfig {
    pub bm25: Bm25Params,
    /// `None` skips the feedback pass.
    pub rm3: Option<Rm3Params>,
    /// TF-IDF expansion terms; 0 disables expansion.
    pub qe_terms: usize,
    pub depth: Depth,
    pub tag: String,
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        Self {
            bm25: Bm25Params::default(),
            rm3: Some(Rm3Params::default()),
            qe_terms: crate::query::DEFAULT_QE_TERMS,
            depth: Depth::Full,
            tag: "bm25_rm3".into(),
        }
    }
}

impl RetrievalConfig {
    pub fn validate(&self) -> Result<()> {
        self.bm25.validate()?;
        if let Some(r) = &self.rm3 {
            r.validate()?;
        }
        if self.depth == Depth::Cutoff(0) {
            return Err(Error::InvalidParameter("depth must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug)]
pub struct BaselineOutput {
    /// Successful topics, in input order.
    pub rankings: Vec<Ranking>,
    pub failures: Vec<(String, Error)>,
}

/// The expanded first-pass query for one topic.
pub fn topic_query(
    topic: &Topic,
    index: &InvertedIndex,
    abbrev: &AbbreviationTable,
    qe_terms: usize,
) -> Result<Query> {
    let query = formulate_query(topic, abbrev, index.tokenizer_config())?;
    if qe_terms == 0 {
        return Ok(query);
    }
    let docs: Vec<_> = topic
        .candidate_pmids
        .iter()
        .filter_map(|p| index.doc_id(p))
        .collect();
    expand_query_tfidf(&query, index, &docs, qe_terms)
}

fn run_topic(
    topic: &Topic,
    index: &InvertedIndex,
    abbrev: &AbbreviationTable,
    config: &RetrievalConfig,
) -> Result<Ranking> {
    let query = topic_query(topic, index, abbrev, config.qe_terms)?;
    let first = search_subset(&query, topic, index, &config.bm25, Depth::Full, &config.tag)?;
    let Some(rm3) = &config.rm3 else {
        let mut r = first;
        r.truncate(config.depth.limit(topic.candidate_pmids.len()));
        return Ok(r);
    };
    let expanded = rm3_expand(&query, &first, index, rm3)?;
    search_subset(&expanded, topic, index, &config.bm25, config.depth, &config.tag)
}

/// formulate → TF-IDF expansion → BM25 → RM3 → BM25, per topic. A failing
/// topic is reported and the rest still run.
pub fn run_baseline(
    topics: &[Topic],
    index: &InvertedIndex,
    abbrev: &AbbreviationTable,
    config: &RetrievalConfig,
) -> Result<BaselineOutput> {
    config.validate()?;
    let results: Vec<Result<Ranking>> = topics
        .par_iter()
        .map(|t| run_topic(t, index, abbrev, config))
        .collect();
    let mut out = BaselineOutput {
        rankings: Vec::new(),
        failures: Vec::new(),
    };
    for (topic, r) in topics.iter().zip(results) {
        match r {
            Ok(r) => out.rankings.push(r),
            Err(e) => out.failures.push((topic.id.clone(), e)),
        }
    }
    Ok(out)
}
