//! CLEF-TAR style evaluation: average precision, recall, normalized
//! cumulative gain at a cutoff, and normalized area under the cumulative
//! recall curve.
//!
//! Relevance is binary. `R` is the number of relevant judgments for the
//! topic, including relevant documents the ranking never retrieved.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::corpus::{QrelSet, Topic};
use crate::error::{Error, Result};
use crate::run::Ranking;

pub const METRIC_NAMES: [&str; 4] = ["ap", "recall", "ncg", "norm_area"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CutoffSpec {
    /// `ceil(p·n/100)` of a ranking of length n.
    Percent(f64),
    Absolute(usize),
}

impl Default for CutoffSpec {
    fn default() -> Self {
        CutoffSpec::Percent(20.0)
    }
}

impl CutoffSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            CutoffSpec::Percent(p) if p > 0.0 && p <= 100.0 => Ok(()),
            CutoffSpec::Absolute(k) if k >= 1 => Ok(()),
            other => Err(Error::InvalidParameter(format!("invalid cutoff {other:?}"))),
        }
    }

    pub fn resolve(&self, n: usize) -> usize {
        match *self {
            CutoffSpec::Percent(p) => ((p * n as f64) / 100.0).ceil() as usize,
            CutoffSpec::Absolute(k) => k.min(n),
        }
        .min(n)
    }
}

impl std::fmt::Display for CutoffSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CutoffSpec::Percent(p) => write!(f, "{p}%"),
            CutoffSpec::Absolute(k) => write!(f, "{k}"),
        }
    }
}

/// Relevance flags in rank order plus the topic's relevant total.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Judged {
    pub relevant: Vec<bool>,
    pub total_relevant: usize,
}

impl Judged {
    pub fn new(ranking: &Ranking, qrels: &QrelSet) -> Self {
        Self {
            relevant: ranking
                .pmids()
                .map(|p| qrels.is_relevant(&ranking.topic_id, p))
                .collect(),
            total_relevant: qrels.num_relevant(&ranking.topic_id),
        }
    }

    fn found_within(&self, k: usize) -> usize {
        self.relevant[..k.min(self.relevant.len())]
            .iter()
            .filter(|&&r| r)
            .count()
    }

    pub fn average_precision(&self) -> f64 {
        if self.total_relevant == 0 {
            return 0.0;
        }
        let mut found = 0usize;
        let mut sum = 0.0;
        for (i, &rel) in self.relevant.iter().enumerate() {
            if rel {
                found += 1;
                sum += found as f64 / (i + 1) as f64;
            }
        }
        sum / self.total_relevant as f64
    }

    pub fn recall(&self, depth: Option<usize>) -> f64 {
        if self.total_relevant == 0 {
            return 0.0;
        }
        let k = depth.unwrap_or(self.relevant.len());
        self.found_within(k) as f64 / self.total_relevant as f64
    }

    pub fn ncg(&self, cutoff: CutoffSpec) -> f64 {
        self.recall(Some(cutoff.resolve(self.relevant.len())))
    }

    pub fn norm_area(&self) -> f64 {
        let r = self.total_relevant;
        if r == 0 || self.relevant.is_empty() {
            return 0.0;
        }
        // both areas scaled by R so the ratio is of two integers
        let mut found = 0u64;
        let mut area = 0u64;
        let mut optimal = 0u64;
        for (i, &rel) in self.relevant.iter().enumerate() {
            found += rel as u64;
            area += found;
            optimal += ((i + 1).min(r)) as u64;
        }
        area as f64 / optimal as f64
    }
}

pub fn average_precision(ranking: &Ranking, qrels: &QrelSet) -> f64 {
    Judged::new(ranking, qrels).average_precision()
}

pub fn recall(ranking: &Ranking, qrels: &QrelSet, depth: Option<usize>) -> f64 {
    Judged::new(ranking, qrels).recall(depth)
}

pub fn ncg_at(ranking: &Ranking, qrels: &QrelSet, cutoff: CutoffSpec) -> f64 {
    Judged::new(ranking, qrels).ncg(cutoff)
}

pub fn norm_area(ranking: &Ranking, qrels: &QrelSet) -> f64 {
    Judged::new(ranking, qrels).norm_area()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopicMetrics {
    pub ap: f64,
    pub recall: f64,
    pub ncg: f64,
    pub norm_area: f64,
    pub num_docs: usize,
    pub num_relevant: usize,
}

impl TopicMetrics {
    pub fn compute(ranking: &Ranking, qrels: &QrelSet, cutoff: CutoffSpec) -> Self {
        let j = Judged::new(ranking, qrels);
        Self {
            ap: j.average_precision(),
            recall: j.recall(None),
            ncg: j.ncg(cutoff),
            norm_area: j.norm_area(),
            num_docs: ranking.len(),
            num_relevant: j.total_relevant,
        }
    }

    pub fn get(&self, metric: &str) -> Result<f64> {
        match metric {
            "ap" => Ok(self.ap),
            "recall" => Ok(self.recall),
            "ncg" => Ok(self.ncg),
            "norm_area" => Ok(self.norm_area),
            other => Err(unknown_metric(other)),
        }
    }
}

fn unknown_metric(name: &str) -> Error {
    Error::UnknownMetric {
        name: name.to_string(),
        valid: METRIC_NAMES.to_vec(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacroMetrics {
    pub ap: f64,
    pub recall: f64,
    pub ncg: f64,
    pub norm_area: f64,
    pub topics: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub per_topic: BTreeMap<String, TopicMetrics>,
    /// `None` when no topic contributed (e.g. an empty run).
    pub macro_avg: Option<MacroMetrics>,
    pub cutoff: CutoffSpec,
    /// Run topics that have no judgments.
    pub errors: Vec<(String, String)>,
    /// Topics with zero relevant documents.
    pub empty_topics: Vec<String>,
    /// Judged topics absent from the run.
    pub unranked_topics: Vec<String>,
}

/// Per-topic metrics plus macro means. With `skip_empty`, topics without
/// relevant documents are left out of the means.
pub fn evaluate_run(
    run: &[Ranking],
    qrels: &QrelSet,
    cutoff: CutoffSpec,
    skip_empty: bool,
) -> Result<MetricsReport> {
    cutoff.validate()?;
    let mut per_topic = BTreeMap::new();
    let mut errors = Vec::new();
    let mut empty_topics = Vec::new();
    for r in run {
        if !qrels.has_topic(&r.topic_id) {
            errors.push((r.topic_id.clone(), "topic absent from qrels".to_string()));
            continue;
        }
        let m = TopicMetrics::compute(r, qrels, cutoff);
        if m.num_relevant == 0 {
            empty_topics.push(r.topic_id.clone());
        }
        per_topic.insert(r.topic_id.clone(), m);
    }
    let unranked_topics: Vec<String> = qrels
        .topics()
        .filter(|t| !per_topic.contains_key(*t) && !errors.iter().any(|(e, _)| e == t))
        .map(str::to_string)
        .collect();
    if !unranked_topics.is_empty() {
        log::warn!("{} judged topic(s) not in the run", unranked_topics.len());
    }

    let included: Vec<&TopicMetrics> = per_topic
        .values()
        .filter(|m| !(skip_empty && m.num_relevant == 0))
        .collect();
    let macro_avg = (!included.is_empty()).then(|| {
        let n = included.len() as f64;
        let mean = |f: fn(&TopicMetrics) -> f64| included.iter().map(|m| f(m)).sum::<f64>() / n;
        MacroMetrics {
            ap: mean(|m| m.ap),
            recall: mean(|m| m.recall),
            ncg: mean(|m| m.ncg),
            norm_area: mean(|m| m.norm_area),
            topics: included.len(),
        }
    });
    Ok(MetricsReport {
        per_topic,
        macro_avg,
        cutoff,
        errors,
        empty_topics,
        unranked_topics,
    })
}

pub const CSV_HEADER: &str = "topic,ap,recall,ncg,norm_area,num_docs,num_relevant";

impl MetricsReport {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{CSV_HEADER}\n");
        for (t, m) in &self.per_topic {
            let _ = writeln!(
                out,
                "{t},{},{},{},{},{},{}",
                m.ap, m.recall, m.ncg, m.norm_area, m.num_docs, m.num_relevant
            );
        }
        out
    }

    /// Fixed-width table with a closing line of macro means.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<16} {:>8} {:>8} {:>8} {:>10} {:>8} {:>8}",
            "topic",
            "AP",
            "R",
            format!("NCG@{}", self.cutoff),
            "norm_area",
            "docs",
            "rel"
        );
        for (t, m) in &self.per_topic {
            let _ = writeln!(
                out,
                "{:<16} {:>8.4} {:>8.4} {:>8.4} {:>10.4} {:>8} {:>8}",
                t, m.ap, m.recall, m.ncg, m.norm_area, m.num_docs, m.num_relevant
            );
        }
        match &self.macro_avg {
            Some(a) => {
                let _ = writeln!(
                    out,
                    "{:<16} {:>8.4} {:>8.4} {:>8.4} {:>10.4} {:>8} {:>8}",
                    "all", a.ap, a.recall, a.ncg, a.norm_area, a.topics, ""
                );
            }
            None => out.push_str("all              (undefined: no topics evaluated)\n"),
        }
        for (t, e) in &self.errors {
            let _ = writeln!(out, "error {t}: {e}");
        }
        for t in &self.empty_topics {
            let _ = writeln!(out, "warning {t}: no relevant documents");
        }
        out
    }
}

/// Per-topic rows read back from [`MetricsReport::to_csv`].
pub fn parse_metrics_csv(text: &str, origin: &str) -> Result<BTreeMap<String, TopicMetrics>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(Error::parse(origin, 1, format!("expected header {CSV_HEADER:?}"))),
    }
    let mut out = BTreeMap::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(Error::parse(origin, i + 1, "expected 7 columns"));
        }
        let num = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::parse(origin, i + 1, format!("bad number {s:?}")))
        };
        let int = |s: &str| -> Result<usize> {
            s.parse()
                .map_err(|_| Error::parse(origin, i + 1, format!("bad count {s:?}")))
        };
        let m = TopicMetrics {
            ap: num(f[1])?,
            recall: num(f[2])?,
            ncg: num(f[3])?,
            norm_area: num(f[4])?,
            num_docs: int(f[5])?,
            num_relevant: int(f[6])?,
        };
        if out.insert(f[0].to_string(), m).is_some() {
            return Err(Error::parse(origin, i + 1, format!("duplicate topic {}", f[0])));
        }
    }
    Ok(out)
}

pub fn load_metrics_csv(path: &Path) -> Result<BTreeMap<String, TopicMetrics>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_metrics_csv(&text, &path.display().to_string())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotRow {
    pub topic_id: String,
    pub topic_size: usize,
    pub value: f64,
}

/// Metric value against candidate-set size, smallest topics first.
pub fn plot_data(
    per_topic: &BTreeMap<String, TopicMetrics>,
    topics: &[Topic],
    metric: &str,
) -> Result<Vec<PlotRow>> {
    if !METRIC_NAMES.contains(&metric) {
        return Err(unknown_metric(metric));
    }
    let mut rows = Vec::new();
    let mut missing = Vec::new();
    for t in topics {
        match per_topic.get(&t.id) {
            Some(m) => rows.push(PlotRow {
                topic_id: t.id.clone(),
                topic_size: t.candidate_pmids.len(),
                value: m.get(metric)?,
            }),
            None => missing.push(t.id.clone()),
        }
    }
    if !missing.is_empty() {
        return Err(Error::TopicMismatch { missing });
    }
    rows.sort_by(|a, b| a.topic_size.cmp(&b.topic_size).then_with(|| a.topic_id.cmp(&b.topic_id)));
    Ok(rows)
}

pub fn plot_csv(rows: &[PlotRow], metric: &str) -> String {
    let mut out = format!("topic,topic_size,{metric}\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r.topic_id, r.topic_size, r.value);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn judged(rel: &[u8], total: usize) -> Judged {
        Judged {
            relevant: rel.iter().map(|&r| r == 1).collect(),
            total_relevant: total,
        }
    }

    #[test]
    fn ap_hand_values() {
        assert!((judged(&[1, 0, 1], 2).average_precision() - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(judged(&[1, 1, 0, 0], 2).average_precision(), 1.0);
        assert_eq!(judged(&[0, 0], 0).average_precision(), 0.0);
        // unretrieved relevant doc still counts in R
        assert_eq!(judged(&[1, 0], 2).average_precision(), 0.5);
    }

    #[test]
    fn recall_cases() {
        assert_eq!(judged(&[0, 1], 1).recall(None), 1.0);
        assert_eq!(judged(&[0, 1], 1).recall(Some(1)), 0.0);
        assert_eq!(judged(&[1, 1, 1, 1], 4).recall(Some(1)), 0.25);
    }

    #[test]
    fn ncg_cases() {
        let j = judged(&[1, 1, 0, 0, 0, 0, 0, 1, 1, 0], 4);
        assert_eq!(CutoffSpec::Percent(20.0).resolve(10), 2);
        assert_eq!(j.ncg(CutoffSpec::Percent(20.0)), 0.5);
        assert_eq!(j.ncg(CutoffSpec::Percent(100.0)), j.recall(None));
        assert_eq!(j.ncg(CutoffSpec::Absolute(50)), j.recall(None));
        assert_eq!(j.ncg(CutoffSpec::Absolute(1)), 0.25);
        assert!(CutoffSpec::Percent(0.0).validate().is_err());
        assert!(CutoffSpec::Absolute(0).validate().is_err());
    }

    #[test]
    fn norm_area_cases() {
        assert_eq!(judged(&[0, 0, 1], 1).norm_area(), 1.0 / 3.0);
        assert_eq!(judged(&[1, 1, 0], 2).norm_area(), 1.0);
        assert!(judged(&[0, 1, 0], 1).norm_area() > judged(&[0, 0, 1], 1).norm_area());
        assert_eq!(judged(&[0, 0], 0).norm_area(), 0.0);
    }

    fn qrels() -> QrelSet {
        crate::corpus::parse_qrels_str("A 0 1 1\nA 0 2 0\nA 0 3 1\nB 0 9 1\nC 0 5 1\n", "q").unwrap()
    }

    #[test]
    fn report_and_csv() {
        let a = Ranking::from_scores("A", "t", vec![("1".into(), 3.0), ("2".into(), 2.0), ("3".into(), 1.0)]);
        let b = Ranking::from_scores("B", "t", vec![("9".into(), 1.0)]);
        let z = Ranking::from_scores("Z", "t", vec![("1".into(), 1.0)]);
        let rep = evaluate_run(&[a, b, z], &qrels(), CutoffSpec::default(), false).unwrap();
        assert_eq!(rep.per_topic.len(), 2);
        assert_eq!(rep.errors.len(), 1);
        assert_eq!(rep.unranked_topics, vec!["C"]);
        let m = rep.macro_avg.unwrap();
        assert!((m.ap - (5.0 / 6.0 + 1.0) / 2.0).abs() < 1e-12);
        assert_eq!(m.recall, 1.0);
        let back = parse_metrics_csv(&rep.to_csv(), "m").unwrap();
        assert_eq!(back, rep.per_topic);
        assert!(rep.to_table().contains("all"));

        let empty = evaluate_run(&[], &qrels(), CutoffSpec::default(), false).unwrap();
        assert!(empty.per_topic.is_empty());
        assert!(empty.macro_avg.is_none());
    }

    #[test]
    fn plot_sorted_by_size() {
        let mk = |id: &str, n: usize| Topic {
            id: id.into(),
            title: String::new(),
            boolean_query_raw: String::new(),
            candidate_pmids: (0..n).map(|i| i.to_string()).collect(),
        };
        let m = TopicMetrics {
            ap: 0.5,
            recall: 1.0,
            ncg: 0.2,
            norm_area: 0.7,
            num_docs: 1,
            num_relevant: 1,
        };
        let per: BTreeMap<String, TopicMetrics> = ["x", "y", "z"]
            .iter()
            .map(|t| (t.to_string(), m))
            .collect();
        let topics = [mk("x", 1000), mk("y", 10), mk("z", 100)];
        let rows = plot_data(&per, &topics, "ap").unwrap();
        assert_eq!(rows.iter().map(|r| r.topic_size).collect::<Vec<_>>(), vec![10, 100, 1000]);
        assert!(rows.iter().all(|r| r.value == 0.5));
        assert!(matches!(plot_data(&per, &topics, "xyz"), Err(Error::UnknownMetric { .. })));
    }
}
