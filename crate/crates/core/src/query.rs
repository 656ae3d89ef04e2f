//! Query formulation: title + cleaned Boolean query, abbreviation expansion,
//! and TF-IDF term expansion over a topic's candidate documents.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use crate::corpus::{normalize_token, split_alnum, tokenize, Topic, TokenizerConfig};
use crate::error::{Error, Result};
use crate::index::{DocId, InvertedIndex};

/// Default number of TF-IDF expansion terms.
pub const DEFAULT_QE_TERMS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Title,
    Boolean,
    Expansion,
    Feedback,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryTerm {
    pub token: String,
    pub weight: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub topic_id: String,
    pub terms: Vec<QueryTerm>,
}

impl Query {
    pub fn contains(&self, token: &str) -> bool {
        self.terms.iter().any(|t| t.token == token)
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().map(|t| t.token.as_str())
    }
}

/// Lowercased abbreviation → expansion phrase.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AbbreviationTable {
    entries: BTreeMap<String, String>,
}

const DEFAULT_ABBREV: &str = include_str!("../data/default_abbrev.tsv");

impl AbbreviationTable {
    /// The small medical list shipped with the crate.
    pub fn builtin() -> Self {
        Self::parse(DEFAULT_ABBREV, "builtin").expect("builtin abbreviation table is valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// `abbrev<TAB>expansion` per line; `#` starts a comment line.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let Some((abbrev, expansion)) = line.split_once('\t') else {
                return Err(Error::parse(origin, i + 1, "expected 'abbrev<TAB>expansion'"));
            };
            let key = abbrev.trim().to_ascii_lowercase();
            if key.is_empty() {
                return Err(Error::parse(origin, i + 1, "empty abbreviation"));
            }
            if entries.insert(key.clone(), expansion.trim().to_string()).is_some() {
                return Err(Error::parse(origin, i + 1, format!("duplicate abbreviation {key:?}")));
            }
        }
        Ok(Self { entries })
    }

    pub fn insert(&mut self, abbrev: &str, expansion: &str) {
        self.entries
            .insert(abbrev.to_ascii_lowercase(), expansion.to_string());
    }

    pub fn get(&self, token: &str) -> Option<&str> {
        self.entries
            .get(&token.to_ascii_lowercase())
            .map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Surface words of a Boolean query: operators, `[field]` tags, `#n` line
/// references and symbols removed, abbreviations expanded. Not yet
/// lowercased, stopped or stemmed.
pub fn boolean_query_words(raw: &str, abbrev: &AbbreviationTable) -> Vec<String> {
    let mut cleaned = String::with_capacity(raw.len());
    let mut chars = raw.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '[' => {
                // drop through the closing bracket (or end of input)
                for d in chars.by_ref() {
                    if d == ']' {
                        break;
                    }
                }
                cleaned.push(' ');
            }
            '#' => {
                while chars.peek().is_some_and(|d| d.is_ascii_digit()) {
                    chars.next();
                }
                cleaned.push(' ');
            }
            _ => cleaned.push(c),
        }
    }

    let mut words = Vec::new();
    for tok in split_alnum(&cleaned) {
        if matches!(tok.to_ascii_lowercase().as_str(), "and" | "or" | "not") {
            continue;
        }
        match abbrev.get(tok) {
            Some(exp) => words.extend(split_alnum(exp).map(str::to_string)),
            None => words.push(tok.to_string()),
        }
    }
    words
}

pub fn preprocess_boolean_query(
    raw: &str,
    abbrev: &AbbreviationTable,
    config: &TokenizerConfig,
) -> Vec<String> {
    boolean_query_words(raw, abbrev)
        .iter()
        .filter_map(|w| normalize_token(w, config))
        .collect()
}

/// Title tokens followed by the preprocessed Boolean query, weight 1 each.
pub fn formulate_query(
    topic: &Topic,
    abbrev: &AbbreviationTable,
    config: &TokenizerConfig,
) -> Result<Query> {
    let term = |token: String, provenance| QueryTerm {
        token,
        weight: 1.0,
        provenance,
    };
    let mut terms: Vec<QueryTerm> = tokenize(&topic.title, config)
        .into_iter()
        .map(|t| term(t, Provenance::Title))
        .collect();
    terms.extend(
        preprocess_boolean_query(&topic.boolean_query_raw, abbrev, config)
            .into_iter()
            .map(|t| term(t, Provenance::Boolean)),
    );
    if terms.is_empty() {
        return Err(Error::EmptyQuery(topic.id.clone()));
    }
    Ok(Query {
        topic_id: topic.id.clone(),
        terms,
    })
}

/// The text handed to sentence encoders: raw title plus the cleaned
/// Boolean-query words, space separated.
pub fn query_text(topic: &Topic, abbrev: &AbbreviationTable) -> String {
    let mut parts = vec![topic.title.trim().to_string()];
    parts.extend(boolean_query_words(&topic.boolean_query_raw, abbrev));
    parts.retain(|p| !p.is_empty());
    parts.join(" ")
}

/// Sum of tf·idf over `docs` for every term occurring in them.
pub fn tfidf_term_scores(index: &InvertedIndex, docs: &[DocId]) -> BTreeMap<String, f64> {
    let mut scores: BTreeMap<String, f64> = BTreeMap::new();
    for &doc in docs {
        for &(term, tf) in index.doc_terms(doc) {
            let w = tf as f64 * index.idf_tfidf(term);
            *scores.entry(index.term(term).to_string()).or_insert(0.0) += w;
        }
    }
    scores
}

/// Append the `k` highest summed-TF-IDF terms of `docs` that are not already
/// in the query. Ties go to the lexicographically smaller term.
pub fn expand_query_tfidf(
    query: &Query,
    index: &InvertedIndex,
    docs: &[DocId],
    k: usize,
) -> Result<Query> {
    if k == 0 {
        return Err(Error::InvalidParameter("expansion size must be at least 1".into()));
    }
    let present: HashSet<&str> = query.tokens().collect();
    let mut ranked: Vec<(String, f64)> = tfidf_term_scores(index, docs)
        .into_iter()
        .filter(|(t, _)| !present.contains(t.as_str()))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

    let mut out = query.clone();
    out.terms.extend(ranked.into_iter().take(k).map(|(token, _)| QueryTerm {
        token,
        weight: 1.0,
        provenance: Provenance::Expansion,
    }));
    Ok(out)
}
