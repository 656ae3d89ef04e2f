//! RM3 pseudo-relevance feedback.
//!
//! Feedback documents are weighted by their first-pass scores shifted so
//! the lowest is 0 and divided by the sum (uniform when the sum is 0). A
//! term's feedback weight is `Σ_d p(d)·tf(w,d)/len(d)`. The expanded query
//! interpolates the normalized original weights with the normalized weights
//! of the top feedback terms.

use std::collections::BTreeMap;

use super::{DocId, InvertedIndex};
use crate::error::{Error, Result};
use crate::query::{Provenance, Query, QueryTerm};
use crate::run::Ranking;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rm3Params {
    pub fb_terms: usize,
    pub fb_docs: usize,
    pub original_query_weight: f64,
}

impl Default for Rm3Params {
    fn default() -> Self {
        Self {
            fb_terms: 10,
            fb_docs: 10,
            original_query_weight: 0.5,
        }
    }
}

impl Rm3Params {
    pub fn validate(&self) -> Result<()> {
        if self.fb_docs < 1 {
            return Err(Error::InvalidParameter("fb_docs must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.original_query_weight) {
            return Err(Error::InvalidParameter(format!(
                "original query weight must be in [0,1], got {}",
                self.original_query_weight
            )));
        }
        Ok(())
    }
}

/// `p(d)` for the feedback documents, in ranking order.
pub(crate) fn feedback_doc_weights(scores: &[f64]) -> Vec<f64> {
    let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let shifted: Vec<f64> = scores.iter().map(|s| s - min).collect();
    let sum: f64 = shifted.iter().sum();
    if sum > 0.0 {
        shifted.iter().map(|s| s / sum).collect()
    } else {
        vec![1.0 / scores.len() as f64; scores.len()]
    }
}

pub fn rm3_expand(
    query: &Query,
    initial: &Ranking,
    index: &InvertedIndex,
    params: &Rm3Params,
) -> Result<Query> {
    params.validate()?;
    // candidates missing from the corpus have no text to learn from
    let top: Vec<(DocId, f64)> = initial
        .entries
        .iter()
        .filter_map(|e| index.doc_id(&e.pmid).map(|d| (d, e.score)))
        .take(params.fb_docs)
        .collect();
    if top.iter().all(|&(d, _)| index.doc_length(d) == 0) {
        return Ok(query.clone());
    }

    let scores: Vec<f64> = top.iter().map(|&(_, s)| s).collect();
    let p = feedback_doc_weights(&scores);
    let mut fb: BTreeMap<&str, f64> = BTreeMap::new();
    for (&(doc, _), &pd) in top.iter().zip(&p) {
        let len = index.doc_length(doc);
        if len == 0 || pd == 0.0 {
            continue;
        }
        for &(term, tf) in index.doc_terms(doc) {
            *fb.entry(index.term(term)).or_insert(0.0) += pd * tf as f64 / len as f64;
        }
    }
    let mut ranked: Vec<(&str, f64)> = fb.into_iter().filter(|(_, w)| *w > 0.0).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.truncate(params.fb_terms);
    let fb_total: f64 = ranked.iter().map(|(_, w)| w).sum();

    // aggregate original terms by token, first-occurrence order
    let mut original: Vec<QueryTerm> = Vec::new();
    for t in &query.terms {
        match original.iter_mut().find(|o| o.token == t.token) {
            Some(o) => o.weight += t.weight,
            None => original.push(t.clone()),
        }
    }
    let orig_total: f64 = original.iter().map(|t| t.weight).sum();
    if orig_total <= 0.0 {
        return Ok(query.clone());
    }

    let alpha = params.original_query_weight;
    let mut terms: Vec<QueryTerm> = original
        .into_iter()
        .map(|mut t| {
            t.weight = alpha * (t.weight / orig_total);
            t
        })
        .collect();
    if fb_total > 0.0 {
        for (token, w) in ranked {
            let add = (1.0 - alpha) * (w / fb_total);
            match terms.iter_mut().find(|t| t.token == token) {
                Some(t) => t.weight += add,
                None => terms.push(QueryTerm {
                    token: token.to_string(),
                    weight: add,
                    provenance: Provenance::Feedback,
                }),
            }
        }
    }
    terms.retain(|t| t.weight > 0.0);
    Ok(Query {
        topic_id: query.topic_id.clone(),
        terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doc_weights_shift_and_normalize() {
        let p = feedback_doc_weights(&[3.0, 2.0, 1.0]);
        assert_eq!(p, vec![2.0 / 3.0, 1.0 / 3.0, 0.0]);
        assert_eq!(feedback_doc_weights(&[2.0, 2.0]), vec![0.5, 0.5]);
    }

    #[test]
    fn params_validate() {
        assert!(Rm3Params::default().validate().is_ok());
        let bad = Rm3Params {
            fb_docs: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = Rm3Params {
            original_query_weight: 1.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
