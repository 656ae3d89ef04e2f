//! Deterministic synthetic review project used by `selftest`, the examples
//! and the acceptance suite.
//!
//! Each topic has three keywords. Relevant documents mention them together
//! in one short sentence; decoys repeat them across long filler sentences,
//! which BM25 rewards and sentence similarity does not; the rest is noise.
//! Variation comes from FNV hashes of fixed strings, so the project is the
//! same on every machine.

use std::path::{Path, PathBuf};

use crate::corpus::{corpus_to_string, topics_to_string, Document, QrelSet, Topic};
use crate::embeddings::fnv1a64;
use crate::error::{Error, Result};

const KEYWORDS: [[&str; 3]; 8] = [
    ["cardiomyopathy", "echocardiography", "troponin"],
    ["appendicitis", "ultrasonography", "leukocytosis"],
    ["tuberculosis", "sputum", "interferon"],
    ["pancreatitis", "lipase", "amylase"],
    ["osteoporosis", "densitometry", "bisphosphonate"],
    ["melanoma", "dermoscopy", "biopsy"],
    ["asthma", "spirometry", "eosinophil"],
    ["sepsis", "procalcitonin", "lactate"],
];

const FILLER: [&str; 64] = [
    "patients", "cohort", "hospital", "clinical", "outcome", "baseline", "follow", "trial",
    "randomized", "participants", "secondary", "primary", "measure", "regional", "center",
    "national", "survey", "registry", "period", "annual", "community", "practice", "general",
    "treatment", "therapy", "dose", "weekly", "daily", "record", "chart", "review", "protocol",
    "sample", "population", "adult", "children", "elderly", "female", "male", "urban", "rural",
    "income", "insurance", "cost", "resource", "staff", "nurse", "physician", "visit", "admission",
    "discharge", "readmission", "mortality", "morbidity", "quality", "safety", "adherence",
    "education", "program", "training", "guideline", "policy", "model", "estimate",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub topics: usize,
    pub docs_per_topic: usize,
    pub relevant_per_topic: usize,
    pub decoys_per_topic: usize,
    /// Filler words per decoy sentence.
    pub decoy_sentence_len: usize,
    pub decoy_sentences: usize,
    /// Distinguishes otherwise identical projects.
    pub salt: String,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            topics: 5,
            docs_per_topic: 40,
            relevant_per_topic: 8,
            decoys_per_topic: 10,
            decoy_sentence_len: 14,
            decoy_sentences: 5,
            salt: "tar".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthProject {
    pub corpus: Vec<Document>,
    pub topics: Vec<Topic>,
    pub qrels: QrelSet,
    /// `abbrev<TAB>expansion` lines.
    pub abbreviations: String,
}

/// Paths of a project written by [`SynthProject::write_to`].
#[derive(Debug, Clone)]
pub struct SynthPaths {
    pub corpus: PathBuf,
    pub topics: PathBuf,
    pub qrels: PathBuf,
    pub abbrev: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Role {
    Relevant,
    Decoy,
    Noise,
}

struct Hasher<'a> {
    salt: &'a str,
}

impl Hasher<'_> {
    fn h(&self, parts: &[&dyn std::fmt::Display]) -> u64 {
        let mut s = self.salt.to_string();
        for p in parts {
            s.push('|');
            s.push_str(&p.to_string());
        }
        fnv1a64(s.as_bytes())
    }

    fn pick(&self, n: usize, parts: &[&dyn std::fmt::Display]) -> usize {
        (self.h(parts) % n as u64) as usize
    }

    fn filler(&self, n: usize, parts: &[&dyn std::fmt::Display]) -> Vec<&'static str> {
        let seed = self.h(parts);
        (0..n)
            .map(|i| FILLER[(fnv1a64(&[seed.to_le_bytes(), (i as u64).to_le_bytes()].concat())
                % FILLER.len() as u64) as usize])
            .collect()
    }
}

fn sentence(words: &[&str]) -> String {
    let mut s = words.join(" ");
    if let Some(first) = s.get(..1) {
        s.replace_range(..1, &first.to_uppercase());
    }
    s.push('.');
    s
}

impl SynthProject {
    pub fn generate(config: &SynthConfig) -> Result<Self> {
        if config.topics == 0 || config.topics > KEYWORDS.len() {
            return Err(Error::InvalidParameter(format!(
                "synthetic topics must be in 1..={}",
                KEYWORDS.len()
            )));
        }
        if config.relevant_per_topic == 0
            || config.relevant_per_topic + config.decoys_per_topic > config.docs_per_topic
        {
            return Err(Error::InvalidParameter(
                "relevant + decoy documents must fit in the topic and relevant must be >= 1".into(),
            ));
        }
        let hs = Hasher { salt: &config.salt };
        let mut corpus = Vec::new();
        let mut topics = Vec::new();
        let mut qrels = QrelSet::default();
        let mut abbreviations = String::new();

        for t in 0..config.topics {
            let kw = KEYWORDS[t];
            let topic_id = format!("CD{:03}", 100 + t);
            let abbrev = format!("syn{t}");
            abbreviations.push_str(&format!("{abbrev}\t{} {}\n", kw[0], kw[1]));

            // role order by hash rank within the topic
            let mut order: Vec<usize> = (0..config.docs_per_topic).collect();
            order.sort_by_key(|&i| (hs.h(&[&"role", &t, &i]), i));
            let mut roles = vec![Role::Noise; config.docs_per_topic];
            for (rank, &i) in order.iter().enumerate() {
                roles[i] = if rank < config.relevant_per_topic {
                    Role::Relevant
                } else if rank < config.relevant_per_topic + config.decoys_per_topic {
                    Role::Decoy
                } else {
                    Role::Noise
                };
            }

            let mut pmids = Vec::new();
            for (i, &role) in roles.iter().enumerate() {
                let pmid = (10_000 + t * config.docs_per_topic + i).to_string();
                let doc = make_doc(&hs, config, &pmid, kw, role, t, i);
                qrels.insert(&topic_id, &pmid, (role == Role::Relevant) as u8);
                pmids.push(pmid);
                corpus.push(doc);
            }
            topics.push(Topic {
                id: topic_id,
                title: format!("Diagnostic accuracy of {} and {} for {}", kw[1], kw[2], kw[0]),
                boolean_query_raw: format!(
                    "({}[tiab] OR {abbrev}[tiab]) AND ({}[Mesh] OR {}[tiab]) AND #{}",
                    kw[0],
                    kw[1],
                    kw[2],
                    t + 1
                ),
                candidate_pmids: pmids,
            });
        }
        Ok(Self {
            corpus,
            topics,
            qrels,
            abbreviations,
        })
    }

    pub fn write_to(&self, dir: &Path) -> Result<SynthPaths> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let paths = SynthPaths {
            corpus: dir.join("corpus.jsonl"),
            topics: dir.join("topics.txt"),
            qrels: dir.join("qrels.txt"),
            abbrev: dir.join("abbrev.tsv"),
        };
        let write = |p: &Path, s: String| std::fs::write(p, s).map_err(|e| Error::io(p, e));
        write(&paths.corpus, corpus_to_string(&self.corpus))?;
        write(&paths.topics, topics_to_string(&self.topics))?;
        write(&paths.qrels, self.qrels.to_trec())?;
        write(&paths.abbrev, self.abbreviations.clone())?;
        Ok(paths)
    }
}

fn make_doc(
    hs: &Hasher,
    config: &SynthConfig,
    pmid: &str,
    kw: [&str; 3],
    role: Role,
    t: usize,
    i: usize,
) -> Document {
    let title = sentence(&hs.filler(5 + hs.pick(3, &[&"tl", &pmid]), &[&"title", &pmid]));
    let mut sentences = Vec::new();
    match role {
        Role::Relevant => {
            let n = 1 + hs.pick(2, &[&"rn", &pmid]);
            for s in 0..n {
                sentences.push(sentence(&hs.filler(8, &[&"rf", &pmid, &s])));
            }
            let extra = hs.filler(1, &[&"rk", &pmid]);
            let pos = hs.pick(n + 1, &[&"rp", &pmid]);
            sentences.insert(pos, sentence(&[kw[0], kw[1], kw[2], extra[0]]));
        }
        Role::Decoy => {
            for s in 0..config.decoy_sentences {
                let mut words = hs.filler(config.decoy_sentence_len, &[&"df", &pmid, &s]);
                let k = kw[hs.pick(3, &[&"dk", &pmid, &s])];
                let at = hs.pick(words.len(), &[&"da", &pmid, &s]);
                words.insert(at, k);
                sentences.push(sentence(&words));
            }
        }
        Role::Noise => {
            let n = 2 + hs.pick(3, &[&"nn", &pmid]);
            for s in 0..n {
                sentences.push(sentence(&hs.filler(10, &[&"nf", &pmid, &s])));
            }
        }
    }
    Document {
        pmid: pmid.to_string(),
        title,
        abstract_text: sentences.join(" "),
        authors: vec![format!("Author{} A", hs.pick(50, &[&"au", &pmid]))],
        journal: ["BMJ", "Lancet", "JAMA", "N Engl J Med"][hs.pick(4, &[&"j", &pmid])].into(),
        year: 2000 + hs.pick(18, &[&"y", &t, &i]) as u32,
        mesh_terms: vec!["Humans".into()],
        medline_ta: String::new(),
    }
}
