use super::{DocId, InvertedIndex, TermId};
use crate::error::{Error, Result};
use crate::query::Query;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Self { k1: 0.9, b: 0.4 }
    }
}

impl Bm25Params {
    pub fn validate(&self) -> Result<()> {
        if !(self.k1.is_finite() && self.k1 >= 0.0) {
            return Err(Error::InvalidParameter(format!("k1 must be >= 0, got {}", self.k1)));
        }
        if !(0.0..=1.0).contains(&self.b) {
            return Err(Error::InvalidParameter(format!("b must be in [0,1], got {}", self.b)));
        }
        Ok(())
    }
}

impl InvertedIndex {
    /// `ln(1 + (N - df + 0.5)/(df + 0.5))`.
    pub fn bm25_idf(&self, df: usize) -> f64 {
        let n = self.doc_count() as f64;
        let df = df as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    pub(crate) fn bm25_term(&self, term: TermId, doc: DocId, params: &Bm25Params) -> f64 {
        let tf = self.tf_id(term, doc);
        if tf == 0 {
            return 0.0;
        }
        let tf = tf as f64;
        let len = self.doc_length(doc) as f64;
        let norm = 1.0 - params.b + params.b * len / self.avg_doc_length();
        self.bm25_idf(self.df_id(term)) * tf * (params.k1 + 1.0) / (tf + params.k1 * norm)
    }
}

/// Weighted sum of per-term BM25 contributions; repeated query terms count
/// once per occurrence.
pub fn bm25_score(query: &Query, doc: DocId, index: &InvertedIndex, params: &Bm25Params) -> f64 {
    query
        .terms
        .iter()
        .filter_map(|t| index.term_id(&t.token).map(|id| (id, t.weight)))
        .map(|(id, w)| w * index.bm25_term(id, doc, params))
        .sum()
}
