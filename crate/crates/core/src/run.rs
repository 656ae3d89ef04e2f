//! Ranked result lists and the TREC run format (`topic Q0 pmid rank score tag`).

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::path::Path;

use crate::corpus::cmp_pmid;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RunEntry {
    pub pmid: String,
    /// 1-based.
    pub rank: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    pub topic_id: String,
    pub tag: String,
    pub entries: Vec<RunEntry>,
}

/// Descending score, then ascending identifier.
pub fn cmp_scored(a: (&str, f64), b: (&str, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| cmp_pmid(a.0, b.0))
}

impl Ranking {
    /// Sort by the tie rule and assign ranks 1..n. Scores must not be NaN.
    pub fn from_scores(topic_id: &str, tag: &str, mut scored: Vec<(String, f64)>) -> Self {
        debug_assert!(scored.iter().all(|(_, s)| !s.is_nan()));
        scored.sort_by(|a, b| cmp_scored((&a.0, a.1), (&b.0, b.1)));
        let entries = scored
            .into_iter()
            .enumerate()
            .map(|(i, (pmid, score))| RunEntry {
                pmid,
                rank: i + 1,
                score,
            })
            .collect();
        Self {
            topic_id: topic_id.to_string(),
            tag: tag.to_string(),
            entries,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn pmids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.pmid.as_str())
    }

    pub fn truncate(&mut self, depth: usize) {
        self.entries.truncate(depth);
    }

    /// Consecutive ranks, sorted by the tie rule, no duplicate pmid.
    pub fn is_valid(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.entries.iter().enumerate().all(|(i, e)| {
            e.rank == i + 1 && seen.insert(e.pmid.as_str()) && !e.score.is_nan()
        }) && self.entries.windows(2).all(|w| {
            cmp_scored((&w[0].pmid, w[0].score), (&w[1].pmid, w[1].score)) != Ordering::Greater
        })
    }
}

pub fn run_to_trec(rankings: &[Ranking]) -> String {
    let mut out = String::new();
    for r in rankings {
        for e in &r.entries {
            let _ = writeln!(out, "{} Q0 {} {} {} {}", r.topic_id, e.pmid, e.rank, e.score, r.tag);
        }
    }
    out
}

/// Topics keep first-appearance order; entries are ordered by their rank
/// field. A ranking takes the tag of its first line.
pub fn parse_run_str(text: &str, origin: &str) -> Result<Vec<Ranking>> {
    let mut rankings: Vec<Ranking> = Vec::new();
    let mut pos: std::collections::HashMap<String, usize> = Default::default();
    for (i, line) in text.lines().enumerate() {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.is_empty() {
            continue;
        }
        let [topic, _q0, pmid, rank, score, tag] = f[..] else {
            return Err(Error::parse(origin, i + 1, "expected 'topic Q0 pmid rank score tag'"));
        };
        let rank: usize = rank
            .parse()
            .map_err(|_| Error::parse(origin, i + 1, format!("bad rank {rank:?}")))?;
        let score: f64 = score
            .parse()
            .ok()
            .filter(|s: &f64| !s.is_nan())
            .ok_or_else(|| Error::parse(origin, i + 1, format!("bad score {score:?}")))?;
        let k = *pos.entry(topic.to_string()).or_insert_with(|| {
            rankings.push(Ranking {
                topic_id: topic.to_string(),
                tag: tag.to_string(),
                entries: Vec::new(),
            });
            rankings.len() - 1
        });
        rankings[k].entries.push(RunEntry {
            pmid: pmid.to_string(),
            rank,
            score,
        });
    }
    for r in &mut rankings {
        r.entries.sort_by_key(|e| e.rank);
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = r.entries.iter().find(|e| !seen.insert(e.pmid.clone())) {
            return Err(Error::parse(
                origin,
                0,
                format!("topic {}: duplicate pmid {}", r.topic_id, dup.pmid),
            ));
        }
    }
    Ok(rankings)
}

pub fn parse_run(path: &Path) -> Result<Vec<Ranking>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_run_str(&text, &path.display().to_string())
}

pub fn write_run(path: &Path, rankings: &[Ranking]) -> Result<()> {
    std::fs::write(path, run_to_trec(rankings)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tie_rule_and_ranks() {
        let r = Ranking::from_scores(
            "T",
            "x",
            vec![("10".into(), 1.0), ("9".into(), 1.0), ("3".into(), 2.0)],
        );
        assert_eq!(r.pmids().collect::<Vec<_>>(), vec!["3", "9", "10"]);
        assert_eq!(r.entries.iter().map(|e| e.rank).collect::<Vec<_>>(), vec![1, 2, 3]);
        assert!(r.is_valid());
    }

    #[test]
    fn trec_round_trip_bit_exact() {
        let r = Ranking::from_scores(
            "CD1",
            "bm25",
            vec![("1".into(), 0.1 + 0.2), ("2".into(), -1e-300), ("3".into(), 1.0 / 3.0)],
        );
        let text = run_to_trec(std::slice::from_ref(&r));
        let back = parse_run_str(&text, "r").unwrap();
        assert_eq!(back, vec![r]);
        assert_eq!(run_to_trec(&back), text);
    }

    #[test]
    fn malformed_lines() {
        assert!(parse_run_str("CD1 Q0 1 one 0.5 t\n", "r").is_err());
        assert!(parse_run_str("CD1 Q0 1 1 0.5\n", "r").is_err());
        assert!(parse_run_str("CD1 Q0 1 1 0.5 t\nCD1 Q0 1 2 0.4 t\n", "r").is_err());
    }
}
