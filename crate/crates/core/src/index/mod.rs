//! Inverted index over document fields.
//!
//! Terms are stored in sorted order and documents keep corpus order, so an
//! index built from the same documents is identical regardless of how the
//! per-document tokenization was scheduled.

mod bm25;
mod persist;
mod rm3;
mod search;

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::corpus::{tokenize, Document, TokenizerConfig};
use crate::error::{Error, Result};

pub use bm25::{bm25_score, Bm25Params};
pub use rm3::{rm3_expand, Rm3Params};
pub use search::{run_baseline, search_subset, topic_query, BaselineOutput, Depth, RetrievalConfig};

pub type DocId = usize;
pub type TermId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Field {
    Title,
    Abstract,
    Pmid,
    Authors,
    Journal,
    Year,
    Mesh,
    MedlineTa,
}

impl Field {
    pub const ALL: [Field; 8] = [
        Field::Title,
        Field::Abstract,
        Field::Pmid,
        Field::Authors,
        Field::Journal,
        Field::Year,
        Field::Mesh,
        Field::MedlineTa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Field::Title => "title",
            Field::Abstract => "abstract",
            Field::Pmid => "pmid",
            Field::Authors => "authors",
            Field::Journal => "journal",
            Field::Year => "year",
            Field::Mesh => "mesh",
            Field::MedlineTa => "medline_ta",
        }
    }

    pub fn from_name(name: &str) -> Option<Field> {
        Field::ALL.into_iter().find(|f| f.name() == name)
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

/// Set of indexed fields, stored as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldSet(u8);

impl FieldSet {
    pub fn all() -> Self {
        FieldSet(0xff)
    }

    pub fn empty() -> Self {
        FieldSet(0)
    }

    pub fn text_only() -> Self {
        Self::of(&[Field::Title, Field::Abstract])
    }

    pub fn of(fields: &[Field]) -> Self {
        FieldSet(fields.iter().fold(0, |m, f| m | f.bit()))
    }

    /// Comma-separated field names, e.g. `title,abstract`.
    pub fn parse(list: &str) -> Result<Self> {
        let mut set = FieldSet::empty();
        for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let f = Field::from_name(name)
                .ok_or_else(|| Error::InvalidParameter(format!("unknown field {name:?}")))?;
            set.0 |= f.bit();
        }
        Ok(set)
    }

    pub fn contains(self, f: Field) -> bool {
        self.0 & f.bit() != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub(crate) fn bits(self) -> u8 {
        self.0
    }

    pub(crate) fn from_bits(bits: u8) -> Self {
        FieldSet(bits)
    }
}

/// Concatenated text of the selected fields.
pub fn indexed_text(doc: &Document, fields: FieldSet) -> String {
    let mut parts: Vec<String> = Vec::new();
    for f in Field::ALL {
        if !fields.contains(f) {
            continue;
        }
        match f {
            Field::Title => parts.push(doc.title.clone()),
            Field::Abstract => parts.push(doc.abstract_text.clone()),
            Field::Pmid => parts.push(doc.pmid.clone()),
            Field::Authors => parts.push(doc.authors.join(" ")),
            Field::Journal => parts.push(doc.journal.clone()),
            Field::Year if doc.year != 0 => parts.push(doc.year.to_string()),
            Field::Year => {}
            Field::Mesh => parts.push(doc.mesh_terms.join(" ")),
            Field::MedlineTa => parts.push(doc.medline_ta.clone()),
        }
    }
    parts.join(" ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    pub doc: DocId,
    pub tf: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvertedIndex {
    config: TokenizerConfig,
    fields: FieldSet,
    pmids: Vec<String>,
    pmid_to_doc: HashMap<String, DocId>,
    doc_lengths: Vec<u32>,
    avg_doc_length: f64,
    vocab: Vec<String>,
    term_ids: HashMap<String, TermId>,
    postings: Vec<Vec<Posting>>,
    /// Per-document `(term, tf)` sorted by term id.
    forward: Vec<Vec<(TermId, u32)>>,
}

pub fn build_index(
    docs: &[Document],
    fields: FieldSet,
    config: TokenizerConfig,
) -> Result<InvertedIndex> {
    if fields.is_empty() {
        return Err(Error::InvalidParameter("no fields selected for indexing".into()));
    }
    if docs.is_empty() {
        return Err(Error::InvalidParameter("cannot index an empty corpus".into()));
    }
    let counted: Vec<(u32, BTreeMap<String, u32>)> = docs
        .par_iter()
        .map(|d| {
            let tokens = tokenize(&indexed_text(d, fields), &config);
            let mut tf = BTreeMap::new();
            for t in &tokens {
                *tf.entry(t.clone()).or_insert(0u32) += 1;
            }
            (tokens.len() as u32, tf)
        })
        .collect();

    let mut by_term: BTreeMap<&str, Vec<Posting>> = BTreeMap::new();
    for (doc, (_, tf)) in counted.iter().enumerate() {
        for (term, &n) in tf {
            by_term.entry(term).or_default().push(Posting { doc, tf: n });
        }
    }
    let (vocab, postings): (Vec<String>, Vec<Vec<Posting>>) =
        by_term.into_iter().map(|(t, p)| (t.to_string(), p)).unzip();

    let pmids = docs.iter().map(|d| d.pmid.clone()).collect();
    let doc_lengths = counted.iter().map(|(len, _)| *len).collect();
    Ok(InvertedIndex::assemble(config, fields, pmids, doc_lengths, vocab, postings))
}

impl InvertedIndex {
    fn assemble(
        config: TokenizerConfig,
        fields: FieldSet,
        pmids: Vec<String>,
        doc_lengths: Vec<u32>,
        vocab: Vec<String>,
        postings: Vec<Vec<Posting>>,
    ) -> Self {
        let n = pmids.len();
        let pmid_to_doc = pmids.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        let term_ids = vocab.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        let mut forward = vec![Vec::new(); n];
        for (term, plist) in postings.iter().enumerate() {
            for p in plist {
                forward[p.doc].push((term, p.tf));
            }
        }
        let total: u64 = doc_lengths.iter().map(|&l| l as u64).sum();
        let avg_doc_length = if n == 0 { 0.0 } else { total as f64 / n as f64 };
        Self {
            config,
            fields,
            pmids,
            pmid_to_doc,
            doc_lengths,
            avg_doc_length,
            vocab,
            term_ids,
            postings,
            forward,
        }
    }

    pub fn tokenizer_config(&self) -> &TokenizerConfig {
        &self.config
    }

    pub fn fields(&self) -> FieldSet {
        self.fields
    }

    pub fn doc_count(&self) -> usize {
        self.pmids.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn avg_doc_length(&self) -> f64 {
        self.avg_doc_length
    }

    pub fn doc_length(&self, doc: DocId) -> u32 {
        self.doc_lengths[doc]
    }

    pub fn pmid(&self, doc: DocId) -> &str {
        &self.pmids[doc]
    }

    pub fn doc_id(&self, pmid: &str) -> Option<DocId> {
        self.pmid_to_doc.get(pmid).copied()
    }

    pub fn term(&self, id: TermId) -> &str {
        &self.vocab[id]
    }

    pub fn term_id(&self, token: &str) -> Option<TermId> {
        self.term_ids.get(token).copied()
    }

    pub fn postings(&self, token: &str) -> &[Posting] {
        self.term_id(token).map_or(&[], |t| &self.postings[t])
    }

    pub fn df(&self, token: &str) -> usize {
        self.postings(token).len()
    }

    pub(crate) fn df_id(&self, term: TermId) -> usize {
        self.postings[term].len()
    }

    pub fn doc_terms(&self, doc: DocId) -> &[(TermId, u32)] {
        &self.forward[doc]
    }

    pub fn tf(&self, token: &str, doc: DocId) -> u32 {
        self.term_id(token).map_or(0, |t| self.tf_id(t, doc))
    }

    pub(crate) fn tf_id(&self, term: TermId, doc: DocId) -> u32 {
        let terms = &self.forward[doc];
        terms
            .binary_search_by_key(&term, |&(t, _)| t)
            .map_or(0, |i| terms[i].1)
    }

    /// `ln(1 + N/df)` for the TF-IDF scheme.
    pub(crate) fn idf_tfidf(&self, term: TermId) -> f64 {
        (1.0 + self.doc_count() as f64 / self.df_id(term) as f64).ln()
    }

    /// `tf · ln(1 + N/df)`; 0 when the term is absent from the document.
    pub fn tfidf_weight(&self, token: &str, doc: DocId) -> f64 {
        match self.term_id(token) {
            Some(t) => {
                let tf = self.tf_id(t, doc);
                if tf == 0 {
                    0.0
                } else {
                    tf as f64 * self.idf_tfidf(t)
                }
            }
            None => 0.0,
        }
    }

    pub fn tfidf_vector(&self, doc: DocId) -> SparseVector {
        SparseVector(
            self.forward[doc]
                .iter()
                .map(|&(t, tf)| (t, tf as f64 * self.idf_tfidf(t)))
                .collect(),
        )
    }

    /// TF-IDF vector of arbitrary text against this index's statistics;
    /// out-of-vocabulary tokens are dropped.
    pub fn tfidf_text_vector(&self, text: &str) -> SparseVector {
        let mut tf: BTreeMap<TermId, u32> = BTreeMap::new();
        for tok in tokenize(text, &self.config) {
            if let Some(t) = self.term_id(&tok) {
                *tf.entry(t).or_insert(0) += 1;
            }
        }
        SparseVector(
            tf.into_iter()
                .map(|(t, n)| (t, n as f64 * self.idf_tfidf(t)))
                .collect(),
        )
    }
}

/// Sparse vector with strictly increasing dimension ids.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVector(pub Vec<(usize, f64)>);

impl SparseVector {
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.0[i].1 * other.0[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }
}

/// Cosine of two sparse vectors; 0 when either norm is 0.
pub fn cosine_sparse(u: &SparseVector, v: &SparseVector) -> f64 {
    let denom = u.norm() * v.norm();
    if denom == 0.0 {
        0.0
    } else {
        (u.dot(v) / denom).clamp(-1.0, 1.0)
    }
}

/// Cosine of two dense vectors; 0 when either norm is 0.
pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::InvalidParameter(format!(
            "dimension mismatch: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    let (mut dot, mut nu, mut nv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    let denom = nu.sqrt() * nv.sqrt();
    Ok(if denom == 0.0 {
        0.0
    } else {
        (dot / denom).clamp(-1.0, 1.0)
    })
}
