//! Sentence segmentation, embedding providers and per-sentence similarity.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::corpus::{split_alnum, tokenize, Document, Topic, TokenizerConfig};
use crate::error::{Error, Result};
use crate::index::cosine_similarity;

/// Sentences shorter than this many alphanumeric tokens are dropped.
pub const MIN_SENTENCE_TOKENS: usize = 2;

/// Split after `.`, `!` or `?` when followed by whitespace or end of text.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut it = text.char_indices().peekable();
    while let Some((i, c)) = it.next() {
        if !matches!(c, '.' | '!' | '?') {
            continue;
        }
        let boundary = match it.peek() {
            None => true,
            Some(&(_, n)) => n.is_whitespace(),
        };
        if boundary {
            let end = i + c.len_utf8();
            push_sentence(&mut out, &text[start..end]);
            start = end;
        }
    }
    push_sentence(&mut out, &text[start..]);
    out
}

fn push_sentence(out: &mut Vec<String>, seg: &str) {
    let seg = seg.trim();
    if split_alnum(seg).count() >= MIN_SENTENCE_TOKENS {
        out.push(seg.to_string());
    }
}

/// Title sentences followed by abstract sentences; indices run across both.
pub fn document_sentences(doc: &Document) -> Vec<String> {
    let mut s = split_sentences(&doc.title);
    s.extend(split_sentences(&doc.abstract_text));
    s
}

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector(pub Vec<f32>);

impl EmbeddingVector {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&v| v as f64).collect()
    }

    pub fn cosine(&self, other: &EmbeddingVector) -> Result<f64> {
        cosine_similarity(&self.to_f64(), &other.to_f64())
    }
}

/// Hashed bag-of-tokens embedding, L2-normalized; all-stopword text maps to
/// the zero vector.
pub fn mock_embed(text: &str, dim: usize, config: &TokenizerConfig) -> EmbeddingVector {
    assert!(dim >= 1, "embedding dimension must be positive");
    let mut v = vec![0.0f64; dim];
    for tok in tokenize(text, config) {
        v[(fnv1a64(tok.as_bytes()) % dim as u64) as usize] += 1.0;
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    EmbeddingVector(v.into_iter().map(|x| x as f32).collect())
}

pub fn query_key(topic_id: &str) -> String {
    format!("q:{topic_id}")
}

pub fn sentence_key(pmid: &str, index: usize) -> String {
    format!("s:{pmid}:{index}")
}

pub trait EmbeddingProvider: Sync {
    fn query_embedding(&self, topic_id: &str, text: &str) -> Result<EmbeddingVector>;
    fn sentence_embedding(&self, pmid: &str, index: usize, text: &str) -> Result<EmbeddingVector>;
}

/// Offline provider backed by [`mock_embed`].
#[derive(Debug, Clone)]
pub struct MockEmbedder {
    pub dim: usize,
    pub config: TokenizerConfig,
}

impl MockEmbedder {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            config: TokenizerConfig::default(),
        }
    }
}

impl EmbeddingProvider for MockEmbedder {
    fn query_embedding(&self, _topic_id: &str, text: &str) -> Result<EmbeddingVector> {
        Ok(mock_embed(text, self.dim, &self.config))
    }

    fn sentence_embedding(&self, _pmid: &str, _index: usize, text: &str) -> Result<EmbeddingVector> {
        Ok(mock_embed(text, self.dim, &self.config))
    }
}

/// Precomputed vectors keyed `q:<topic>` / `s:<pmid>:<i>`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    dim: usize,
    vectors: BTreeMap<String, EmbeddingVector>,
}

impl EmbeddingStore {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("embedding dimension must be >= 1".into()));
        }
        Ok(Self {
            dim,
            vectors: BTreeMap::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<&EmbeddingVector> {
        self.vectors.get(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.vectors.keys().map(String::as_str)
    }

    pub fn insert(&mut self, key: &str, v: EmbeddingVector) -> Result<()> {
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(Error::InvalidParameter(format!("bad embedding key {key:?}")));
        }
        if v.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                key: key.to_string(),
                expected: self.dim,
                found: v.dim(),
            });
        }
        if v.0.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite value under key {key}")));
        }
        if self.vectors.insert(key.to_string(), v).is_some() {
            return Err(Error::DuplicateKey(key.to_string()));
        }
        Ok(())
    }

    fn lookup(&self, key: &str) -> Result<EmbeddingVector> {
        self.vectors
            .get(key)
            .cloned()
            .ok_or_else(|| Error::MissingEmbedding(key.to_string()))
    }

    /// `EMB1 <dim>` header, then `<key> <f1> ... <fdim>` per record.
    pub fn to_text(&self) -> String {
        let mut out = format!("EMB1 {}\n", self.dim);
        for (k, v) in &self.vectors {
            out.push_str(k);
            for x in &v.0 {
                let _ = write!(out, " {x}");
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(origin, 1, "missing EMB1 header"))?;
        let dim = match header.split_whitespace().collect::<Vec<_>>()[..] {
            ["EMB1", d] => d
                .parse::<usize>()
                .map_err(|_| Error::parse(origin, 1, format!("bad dimension {d:?}")))?,
            _ => return Err(Error::parse(origin, 1, "expected 'EMB1 <dim>'")),
        };
        let mut store = Self::new(dim)?;
        for (i, line) in lines {
            let mut f = line.split_whitespace();
            let Some(key) = f.next() else { continue };
            let values = f
                .map(|s| s.parse::<f32>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::parse(origin, i + 1, format!("record {key}: {e}")))?;
            store.insert(key, EmbeddingVector(values))?;
        }
        Ok(store)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// Every query and sentence vector a provider would serve for `corpus`,
/// collected into a store with the EMB1 key layout.
pub fn materialize_store(
    provider: &dyn EmbeddingProvider,
    dim: usize,
    corpus: &[Document],
    query_texts: &[(&Topic, String)],
) -> Result<EmbeddingStore> {
    let mut store = EmbeddingStore::new(dim)?;
    for (topic, text) in query_texts {
        store.insert(&query_key(&topic.id), provider.query_embedding(&topic.id, text)?)?;
    }
    for doc in corpus {
        for (i, s) in document_sentences(doc).iter().enumerate() {
            store.insert(&sentence_key(&doc.pmid, i), provider.sentence_embedding(&doc.pmid, i, s)?)?;
        }
    }
    Ok(store)
}

impl EmbeddingProvider for EmbeddingStore {
    fn query_embedding(&self, topic_id: &str, _text: &str) -> Result<EmbeddingVector> {
        self.lookup(&query_key(topic_id))
    }

    fn sentence_embedding(&self, pmid: &str, index: usize, _text: &str) -> Result<EmbeddingVector> {
        self.lookup(&sentence_key(pmid, index))
    }
}

/// Per-sentence scores for one (topic, document) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceScores {
    pub topic_id: String,
    pub pmid: String,
    pub scores: Vec<f64>,
}

/// Cosine between the query embedding and every title+abstract sentence.
pub fn score_sentences(
    topic: &Topic,
    doc: &Document,
    provider: &dyn EmbeddingProvider,
    query_text: &str,
) -> Result<SentenceScores> {
    let sentences = document_sentences(doc);
    let mut scores = Vec::with_capacity(sentences.len());
    if !sentences.is_empty() {
        let q = provider.query_embedding(&topic.id, query_text)?;
        for (i, s) in sentences.iter().enumerate() {
            let v = provider.sentence_embedding(&doc.pmid, i, s)?;
            scores.push(q.cosine(&v)?);
        }
    }
    Ok(SentenceScores {
        topic_id: topic.id.clone(),
        pmid: doc.pmid.clone(),
        scores,
    })
}

/// Sentence scores produced by an external classifier, one
/// `topic pmid sentence_index score` record per line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SentenceScoreFile {
    scores: BTreeMap<(String, String), Vec<f64>>,
}

impl SentenceScoreFile {
    pub fn get(&self, topic: &str, pmid: &str) -> Option<&[f64]> {
        self.scores
            .get(&(topic.to_string(), pmid.to_string()))
            .map(Vec::as_slice)
    }

    pub fn insert(&mut self, s: SentenceScores) {
        self.scores.insert((s.topic_id, s.pmid), s.scores);
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut raw: BTreeMap<(String, String), BTreeMap<usize, f64>> = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.is_empty() {
                continue;
            }
            let [topic, pmid, idx, score] = f[..] else {
                return Err(Error::parse(origin, i + 1, "expected 'topic pmid sentence_index score'"));
            };
            let idx: usize = idx
                .parse()
                .map_err(|_| Error::parse(origin, i + 1, format!("bad sentence index {idx:?}")))?;
            let score: f64 = score
                .parse()
                .ok()
                .filter(|s: &f64| s.is_finite())
                .ok_or_else(|| Error::parse(origin, i + 1, format!("bad score {score:?}")))?;
            let slot = raw.entry((topic.to_string(), pmid.to_string())).or_default();
            if slot.insert(idx, score).is_some() {
                return Err(Error::parse(
                    origin,
                    i + 1,
                    format!("duplicate sentence {topic} {pmid} {idx}"),
                ));
            }
        }
        let mut scores = BTreeMap::new();
        for (key, m) in raw {
            if m.keys().enumerate().any(|(expect, &got)| expect != got) {
                return Err(Error::parse(
                    origin,
                    0,
                    format!("topic {} pmid {}: sentence indices are not 0..n", key.0, key.1),
                ));
            }
            scores.insert(key, m.into_values().collect());
        }
        Ok(Self { scores })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for ((topic, pmid), scores) in &self.scores {
            for (i, s) in scores.iter().enumerate() {
                let _ = writeln!(out, "{topic} {pmid} {i} {s}");
            }
        }
        out
    }
}
