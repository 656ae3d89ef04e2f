//! Documents, topics, relevance judgments and the shared token pipeline.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::porter;

/// One PubMed-style record.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Document {
    pub pmid: String,
    #[serde(default)]
    pub title: String,
    #[serde(default, rename = "abstract")]
    pub abstract_text: String,
    #[serde(default)]
    pub authors: Vec<String>,
    #[serde(default)]
    pub journal: String,
    /// Four-digit year, 0 when unknown.
    #[serde(default, deserialize_with = "de_year")]
    pub year: u32,
    #[serde(default, rename = "mesh")]
    pub mesh_terms: Vec<String>,
    #[serde(default)]
    pub medline_ta: String,
}

fn de_year<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<u32, D::Error> {
    let v = serde_json::Value::deserialize(d)?;
    let year = match v {
        serde_json::Value::Number(n) => n.as_u64().unwrap_or(0),
        serde_json::Value::String(s) => s.trim().parse::<u64>().unwrap_or(0),
        _ => 0,
    };
    Ok(if (1800..=2100).contains(&year) { year as u32 } else { 0 })
}

/// One systematic review: id, title, raw Boolean query and its candidate set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topic {
    pub id: String,
    pub title: String,
    pub boolean_query_raw: String,
    /// The candidate ("A set") pmids in file order, without duplicates.
    pub candidate_pmids: Vec<String>,
}

/// Binary relevance judgments keyed by topic then pmid.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QrelSet {
    judgments: BTreeMap<String, BTreeMap<String, u8>>,
}

impl QrelSet {
    pub fn insert(&mut self, topic: &str, pmid: &str, relevance: u8) {
        self.judgments
            .entry(topic.to_string())
            .or_default()
            .insert(pmid.to_string(), relevance.min(1));
    }

    /// Unjudged pairs are irrelevant.
    pub fn relevance(&self, topic: &str, pmid: &str) -> u8 {
        self.judgments
            .get(topic)
            .and_then(|m| m.get(pmid))
            .copied()
            .unwrap_or(0)
    }

    pub fn is_relevant(&self, topic: &str, pmid: &str) -> bool {
        self.relevance(topic, pmid) == 1
    }

    pub fn num_relevant(&self, topic: &str) -> usize {
        self.judgments
            .get(topic)
            .map_or(0, |m| m.values().filter(|&&r| r == 1).count())
    }

    pub fn has_topic(&self, topic: &str) -> bool {
        self.judgments.contains_key(topic)
    }

    pub fn topics(&self) -> impl Iterator<Item = &str> {
        self.judgments.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.judgments.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// TREC qrels text, topics in sorted order and pmids in identifier order.
    pub fn to_trec(&self) -> String {
        let mut out = String::new();
        for (topic, m) in &self.judgments {
            let mut pmids: Vec<&String> = m.keys().collect();
            pmids.sort_by(|a, b| cmp_pmid(a, b));
            for pmid in pmids {
                let _ = writeln!(out, "{topic} 0 {pmid} {}", m[pmid]);
            }
        }
        out
    }
}

/// Identifier order: numeric when both are all digits, else lexicographic.
pub fn cmp_pmid(a: &str, b: &str) -> Ordering {
    let numeric = |s: &str| !s.is_empty() && s.bytes().all(|c| c.is_ascii_digit());
    if numeric(a) && numeric(b) {
        let (ta, tb) = (a.trim_start_matches('0'), b.trim_start_matches('0'));
        ta.len().cmp(&tb.len()).then_with(|| ta.cmp(tb)).then_with(|| a.cmp(b))
    } else {
        a.cmp(b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Stemmer {
    #[default]
    Porter,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Stopwords {
    /// The shipped English list.
    #[default]
    English,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TokenizerConfig {
    pub lowercase: bool,
    pub stopwords: Stopwords,
    pub stemmer: Stemmer,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        Self {
            lowercase: true,
            stopwords: Stopwords::English,
            stemmer: Stemmer::Porter,
        }
    }
}

impl TokenizerConfig {
    pub fn unstemmed() -> Self {
        Self {
            stemmer: Stemmer::None,
            ..Self::default()
        }
    }
}

const STOPWORDS_TXT: &str = include_str!("../data/stopwords.txt");

pub fn english_stopwords() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| STOPWORDS_TXT.split_whitespace().collect())
}

/// Maximal runs of ASCII letters/digits.
pub fn split_alnum(text: &str) -> impl Iterator<Item = &str> {
    text.split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|s| !s.is_empty())
}

/// split → lowercase → drop stopwords → stem.
pub fn tokenize(text: &str, config: &TokenizerConfig) -> Vec<String> {
    split_alnum(text)
        .filter_map(|raw| normalize_token(raw, config))
        .collect()
}

/// Run one already-split token through the rest of the pipeline.
pub fn normalize_token(raw: &str, config: &TokenizerConfig) -> Option<String> {
    let tok = if config.lowercase {
        raw.to_ascii_lowercase()
    } else {
        raw.to_string()
    };
    if config.stopwords == Stopwords::English
        && english_stopwords().contains(tok.to_ascii_lowercase().as_str())
    {
        return None;
    }
    Some(match config.stemmer {
        Stemmer::Porter => porter::stem(&tok),
        Stemmer::None => tok,
    })
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn parse_corpus(path: &Path) -> Result<Vec<Document>> {
    parse_corpus_str(&read(path)?, &path.display().to_string())
}

pub fn parse_corpus_str(text: &str, origin: &str) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document =
            serde_json::from_str(line).map_err(|e| Error::parse(origin, i + 1, e.to_string()))?;
        if doc.pmid.trim().is_empty() {
            return Err(Error::parse(origin, i + 1, "empty pmid"));
        }
        if !seen.insert(doc.pmid.clone()) {
            return Err(Error::DuplicatePmid(doc.pmid));
        }
        docs.push(doc);
    }
    Ok(docs)
}

/// One JSON object per line, in the given order.
pub fn corpus_to_string(docs: &[Document]) -> String {
    let mut out = String::new();
    for d in docs {
        out.push_str(&serde_json::to_string(d).expect("document serializes"));
        out.push('\n');
    }
    out
}

pub fn parse_topics(path: &Path) -> Result<Vec<Topic>> {
    parse_topics_str(&read(path)?, &path.display().to_string())
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Header,
    Query,
    Pids,
}

struct TopicBuilder {
    id: String,
    title: Option<String>,
    query: Option<Vec<String>>,
    pids: Option<Vec<String>>,
}

impl TopicBuilder {
    fn finish(self) -> Result<Topic> {
        let missing = |section| Error::MissingSection {
            topic: self.id.clone(),
            section,
        };
        let title = self.title.clone().ok_or_else(|| missing("Title"))?;
        let query = self.query.clone().ok_or_else(|| missing("Query"))?;
        let pids = self.pids.clone().ok_or_else(|| missing("Pids"))?;
        let mut seen = HashSet::new();
        let candidate_pmids: Vec<String> = pids.into_iter().filter(|p| seen.insert(p.clone())).collect();
        if candidate_pmids.is_empty() {
            return Err(missing("Pids"));
        }
        Ok(Topic {
            id: self.id,
            title,
            boolean_query_raw: query.join("\n"),
            candidate_pmids,
        })
    }
}

pub fn parse_topics_str(text: &str, origin: &str) -> Result<Vec<Topic>> {
    let mut topics = Vec::new();
    let mut ids = HashSet::new();
    let mut current: Option<TopicBuilder> = None;
    let mut section = Section::Header;

    let mut flush = |b: Option<TopicBuilder>, topics: &mut Vec<Topic>| -> Result<()> {
        if let Some(b) = b {
            let t = b.finish()?;
            if !ids.insert(t.id.clone()) {
                return Err(Error::DuplicateKey(format!("topic {}", t.id)));
            }
            topics.push(t);
        }
        Ok(())
    };

    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            flush(current.take(), &mut topics)?;
            section = Section::Header;
            continue;
        }
        let indented = line.starts_with([' ', '\t']);
        if !indented {
            if let Some(id) = trimmed.strip_prefix("Topic:") {
                flush(current.take(), &mut topics)?;
                let id = id.trim();
                if id.is_empty() {
                    return Err(Error::parse(origin, i + 1, "empty topic id"));
                }
                current = Some(TopicBuilder {
                    id: id.to_string(),
                    title: None,
                    query: None,
                    pids: None,
                });
                section = Section::Header;
                continue;
            }
        }
        let Some(b) = current.as_mut() else {
            return Err(Error::parse(origin, i + 1, "content before any 'Topic:' line"));
        };
        if !indented {
            if let Some(title) = trimmed.strip_prefix("Title:") {
                b.title = Some(title.trim().to_string());
                section = Section::Header;
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix("Query:") {
                let mut q = Vec::new();
                if !rest.trim().is_empty() {
                    q.push(rest.trim().to_string());
                }
                b.query = Some(q);
                section = Section::Query;
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix("Pids:") {
                let mut p = Vec::new();
                p.extend(rest.split_whitespace().map(str::to_string));
                b.pids = Some(p);
                section = Section::Pids;
                continue;
            }
        }
        match section {
            Section::Query => b.query.get_or_insert_with(Vec::new).push(trimmed.to_string()),
            Section::Pids => b
                .pids
                .get_or_insert_with(Vec::new)
                .extend(trimmed.split_whitespace().map(str::to_string)),
            Section::Header => {
                return Err(Error::parse(origin, i + 1, format!("unexpected line {trimmed:?}")))
            }
        }
    }
    flush(current.take(), &mut topics)?;
    Ok(topics)
}

/// Canonical topic-file rendering; parses back to the same topics.
pub fn topics_to_string(topics: &[Topic]) -> String {
    let mut out = String::new();
    for (i, t) in topics.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "Topic: {}", t.id);
        let _ = writeln!(out, "Title: {}", t.title);
        out.push_str("Query:\n");
        for line in t.boolean_query_raw.lines().filter(|l| !l.trim().is_empty()) {
            let _ = writeln!(out, "  {}", line.trim());
        }
        out.push_str("Pids:\n");
        for p in &t.candidate_pmids {
            let _ = writeln!(out, "  {p}");
        }
    }
    out
}

pub fn parse_qrels(path: &Path) -> Result<QrelSet> {
    parse_qrels_str(&read(path)?, &path.display().to_string())
}

pub fn parse_qrels_str(text: &str, origin: &str) -> Result<QrelSet> {
    let mut q = QrelSet::default();
    for (i, line) in text.lines().enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let [topic, _iteration, pmid, rel] = fields[..] else {
            return Err(Error::parse(origin, i + 1, "expected 'topic iteration pmid relevance'"));
        };
        let rel = match rel {
            "0" => 0,
            "1" => 1,
            other => {
                return Err(Error::parse(origin, i + 1, format!("relevance {other:?} is not 0 or 1")))
            }
        };
        q.insert(topic, pmid, rel);
    }
    Ok(q)
}

/// Distinct topic ids across a topic list, for quick membership checks.
pub fn topic_ids(topics: &[Topic]) -> BTreeSet<&str> {
    topics.iter().map(|t| t.id.as_str()).collect()
}
