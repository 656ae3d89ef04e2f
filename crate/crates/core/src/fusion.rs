//! Interpolating baseline scores with pooled sentence scores:
//! `score = λ·S_doc + (1 − λ)·pool(S_1..S_n)`.

use std::collections::{BTreeMap, HashMap};
use std::str::FromStr;

use rayon::prelude::*;

use crate::corpus::{Document, Topic};
use crate::embeddings::{score_sentences, EmbeddingProvider, SentenceScoreFile};
use crate::error::{Error, Result};
use crate::run::Ranking;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pooling {
    /// Average sentence score.
    #[default]
    Mean,
    /// Best sentence score.
    Max,
    /// `Σ w_i·s_i`; all-ones weights when none are given.
    Weighted,
}

impl FromStr for Pooling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Pooling::Mean),
            "max" => Ok(Pooling::Max),
            "weighted" => Ok(Pooling::Weighted),
            other => Err(Error::InvalidParameter(format!(
                "unknown pooling {other:?} (mean, max, weighted)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusionParams {
    pub lambda: f64,
    pub pooling: Pooling,
    pub weights: Option<Vec<f64>>,
    pub normalize_inputs: bool,
}

impl Default for FusionParams {
    fn default() -> Self {
        Self {
            lambda: 0.8,
            pooling: Pooling::Mean,
            weights: None,
            normalize_inputs: true,
        }
    }
}

impl FusionParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be in [0,1], got {}",
                self.lambda
            )));
        }
        if let Some(w) = &self.weights {
            if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return Err(Error::InvalidParameter("weights must be finite and >= 0".into()));
            }
        }
        Ok(())
    }
}

/// Empty input pools to 0 under every mode.
pub fn pool_sentence_scores(scores: &[f64], params: &FusionParams) -> Result<f64> {
    if scores.is_empty() {
        return Ok(0.0);
    }
    Ok(match params.pooling {
        Pooling::Mean => scores.iter().sum::<f64>() / scores.len() as f64,
        Pooling::Max => scores.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        Pooling::Weighted => match &params.weights {
            None => scores.iter().sum(),
            Some(w) if w.len() == scores.len() => scores.iter().zip(w).map(|(s, w)| s * w).sum(),
            Some(w) => {
                return Err(Error::InvalidParameter(format!(
                    "{} weights for {} sentences",
                    w.len(),
                    scores.len()
                )))
            }
        },
    })
}

/// `(x − min)/(max − min)`; a constant map goes to 0.5 everywhere.
pub fn minmax_normalize<K: Ord + Clone>(scores: &BTreeMap<K, f64>) -> BTreeMap<K, f64> {
    let min = scores.values().copied().fold(f64::INFINITY, f64::min);
    let max = scores.values().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    scores
        .iter()
        .map(|(k, &x)| {
            let v = if span > 0.0 { (x - min) / span } else { 0.5 };
            (k.clone(), v)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fused {
    pub ranking: Ranking,
    /// Baseline documents that had no new score (treated as 0).
    pub missing: usize,
}

/// Interpolate one topic's baseline with new per-document scores and re-sort.
pub fn fuse_run(
    baseline: &Ranking,
    new_scores: &HashMap<String, f64>,
    params: &FusionParams,
    tag: &str,
) -> Result<Fused> {
    params.validate()?;
    let base: BTreeMap<&str, f64> = baseline
        .entries
        .iter()
        .map(|e| (e.pmid.as_str(), e.score))
        .collect();
    let present: BTreeMap<&str, f64> = base
        .keys()
        .filter_map(|&p| new_scores.get(p).map(|&s| (p, s)))
        .collect();
    let missing = base.len() - present.len();
    let (base, new) = if params.normalize_inputs {
        (minmax_normalize(&base), minmax_normalize(&present))
    } else {
        (base, present)
    };
    let lambda = params.lambda;
    let scored = base
        .iter()
        .map(|(&pmid, &s_doc)| {
            let s_new = new.get(pmid).copied().unwrap_or(0.0);
            (pmid.to_string(), lambda * s_doc + (1.0 - lambda) * s_new)
        })
        .collect();
    Ok(Fused {
        ranking: Ranking::from_scores(&baseline.topic_id, tag, scored),
        missing,
    })
}

/// Where per-sentence scores for a (topic, document) pair come from.
pub trait SentenceScoreSource: Sync {
    /// `None` when the source has no data for the pair.
    fn sentence_scores(&self, topic_id: &str, pmid: &str) -> Result<Option<Vec<f64>>>;
}

impl SentenceScoreSource for SentenceScoreFile {
    fn sentence_scores(&self, topic_id: &str, pmid: &str) -> Result<Option<Vec<f64>>> {
        Ok(self.get(topic_id, pmid).map(<[f64]>::to_vec))
    }
}

/// Computes sentence scores on demand from an embedding provider.
pub struct EmbeddingScorer<'a> {
    provider: &'a dyn EmbeddingProvider,
    docs: HashMap<&'a str, &'a Document>,
    topics: HashMap<&'a str, (&'a Topic, String)>,
}

impl<'a> EmbeddingScorer<'a> {
    /// `query_texts` pairs each topic with the text its query embedding is
    /// computed from.
    pub fn new(
        provider: &'a dyn EmbeddingProvider,
        corpus: &'a [Document],
        query_texts: impl IntoIterator<Item = (&'a Topic, String)>,
    ) -> Self {
        Self {
            provider,
            docs: corpus.iter().map(|d| (d.pmid.as_str(), d)).collect(),
            topics: query_texts
                .into_iter()
                .map(|(t, q)| (t.id.as_str(), (t, q)))
                .collect(),
        }
    }
}

impl SentenceScoreSource for EmbeddingScorer<'_> {
    fn sentence_scores(&self, topic_id: &str, pmid: &str) -> Result<Option<Vec<f64>>> {
        let Some((topic, text)) = self.topics.get(topic_id) else {
            return Ok(None);
        };
        // a candidate with no record has no sentences
        let Some(doc) = self.docs.get(pmid) else {
            return Ok(Some(Vec::new()));
        };
        Ok(Some(score_sentences(topic, doc, self.provider, text)?.scores))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RerankOptions {
    pub fusion: FusionParams,
    /// Largest tolerated fraction of baseline documents without sentence data.
    pub missing_tolerance: f64,
    pub tag: String,
}

impl Default for RerankOptions {
    fn default() -> Self {
        Self {
            fusion: FusionParams::default(),
            missing_tolerance: 0.0,
            tag: "fused".into(),
        }
    }
}

fn rerank_topic(
    baseline: &Ranking,
    source: &dyn SentenceScoreSource,
    opts: &RerankOptions,
) -> Result<Ranking> {
    let mut pooled = HashMap::new();
    let mut first_missing = None;
    for e in &baseline.entries {
        match source.sentence_scores(&baseline.topic_id, &e.pmid)? {
            Some(s) => {
                pooled.insert(e.pmid.clone(), pool_sentence_scores(&s, &opts.fusion)?);
            }
            None => {
                first_missing.get_or_insert_with(|| e.pmid.clone());
            }
        }
    }
    let missing = baseline.len() - pooled.len();
    if let Some(pmid) = first_missing {
        let frac = missing as f64 / baseline.len() as f64;
        if frac > opts.missing_tolerance {
            return Err(Error::MissingSentenceData {
                topic: baseline.topic_id.clone(),
                pmid,
            });
        }
        log::warn!(
            "topic {}: {missing} document(s) without sentence data scored as 0",
            baseline.topic_id
        );
    }
    Ok(fuse_run(baseline, &pooled, &opts.fusion, &opts.tag)?.ranking)
}

/// Pool and fuse every topic of a baseline run; output keeps input order.
pub fn rerank_pipeline(
    baseline: &[Ranking],
    source: &dyn SentenceScoreSource,
    opts: &RerankOptions,
) -> Result<Vec<Ranking>> {
    opts.fusion.validate()?;
    baseline
        .par_iter()
        .map(|r| rerank_topic(r, source, opts))
        .collect()
}
