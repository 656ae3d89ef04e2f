//! On-disk index format.
//!
//! ```text
//! "TARIDX1" u8:version
//! u8:lowercase u8:stopwords u8:stemmer u8:field-bits
//! u32:n_docs  { str:pmid u32:doc_length } * n_docs
//! u32:n_terms { str:term u32:n_postings { u32:doc u32:tf } * n_postings } * n_terms
//! ```
//! All integers little-endian; `str` is a u32 byte length followed by UTF-8.

use std::path::Path;

use super::{FieldSet, InvertedIndex, Posting};
use crate::corpus::{Stemmer, Stopwords, TokenizerConfig};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 7] = b"TARIDX1";
pub const VERSION: u8 = 1;

impl InvertedIndex {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.push(self.config.lowercase as u8);
        out.push(match self.config.stopwords {
            Stopwords::English => 1,
            Stopwords::None => 0,
        });
        out.push(match self.config.stemmer {
            Stemmer::Porter => 1,
            Stemmer::None => 0,
        });
        out.push(self.fields.bits());

        put_u32(&mut out, self.pmids.len());
        for (pmid, &len) in self.pmids.iter().zip(&self.doc_lengths) {
            put_str(&mut out, pmid);
            out.extend_from_slice(&len.to_le_bytes());
        }
        put_u32(&mut out, self.vocab.len());
        for (term, plist) in self.vocab.iter().zip(&self.postings) {
            put_str(&mut out, term);
            put_u32(&mut out, plist.len());
            for p in plist {
                put_u32(&mut out, p.doc);
                out.extend_from_slice(&p.tf.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(MAGIC.len())? != MAGIC {
            return Err(Error::IndexFormat("bad magic (not a TARIDX1 file)".into()));
        }
        let version = r.u8()?;
        if version != VERSION {
            return Err(Error::IndexFormat(format!("unsupported version {version}")));
        }
        let lowercase = r.u8()? != 0;
        let stopwords = match r.u8()? {
            0 => Stopwords::None,
            1 => Stopwords::English,
            v => return Err(Error::IndexFormat(format!("bad stopword flag {v}"))),
        };
        let stemmer = match r.u8()? {
            0 => Stemmer::None,
            1 => Stemmer::Porter,
            v => return Err(Error::IndexFormat(format!("bad stemmer flag {v}"))),
        };
        let fields = FieldSet::from_bits(r.u8()?);

        let n_docs = r.u32()? as usize;
        let mut pmids = Vec::with_capacity(n_docs.min(1 << 20));
        let mut doc_lengths = Vec::with_capacity(n_docs.min(1 << 20));
        for _ in 0..n_docs {
            pmids.push(r.string()?);
            doc_lengths.push(r.u32()?);
        }
        let n_terms = r.u32()? as usize;
        let mut vocab = Vec::with_capacity(n_terms.min(1 << 20));
        let mut postings = Vec::with_capacity(n_terms.min(1 << 20));
        for _ in 0..n_terms {
            let term = r.string()?;
            if vocab.last().is_some_and(|prev: &String| prev >= &term) {
                return Err(Error::IndexFormat(format!("terms not sorted at {term:?}")));
            }
            let n = r.u32()? as usize;
            let mut plist = Vec::with_capacity(n.min(n_docs));
            for _ in 0..n {
                let doc = r.u32()? as usize;
                let tf = r.u32()?;
                if doc >= n_docs {
                    return Err(Error::IndexFormat(format!("posting doc {doc} out of range")));
                }
                plist.push(Posting { doc, tf });
            }
            vocab.push(term);
            postings.push(plist);
        }
        if r.pos != bytes.len() {
            return Err(Error::IndexFormat("trailing bytes".into()));
        }
        let config = TokenizerConfig {
            lowercase,
            stopwords,
            stemmer,
        };
        Ok(Self::assemble(config, fields, pmids, doc_lengths, vocab, postings))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

fn put_u32(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&(v as u32).to_le_bytes());
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    put_u32(out, s.len());
    out.extend_from_slice(s.as_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::IndexFormat("truncated file".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn string(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec())
            .map_err(|_| Error::IndexFormat("invalid UTF-8 string".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;
    use crate::index::build_index;

    fn sample() -> InvertedIndex {
        let d = |p: &str, t: &str| Document {
            pmid: p.into(),
            title: t.into(),
            year: 2018,
            ..Default::default()
        };
        build_index(
            &[d("10", "Heart failure trial"), d("2", "Statin therapy in heart disease")],
            FieldSet::all(),
            TokenizerConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn round_trip_identity() {
        let idx = sample();
        let bytes = idx.to_bytes();
        assert_eq!(&bytes[..7], b"TARIDX1");
        let back = InvertedIndex::from_bytes(&bytes).unwrap();
        assert_eq!(back, idx);
        assert_eq!(back.to_bytes(), bytes);
    }

    #[test]
    fn rejects_bad_headers() {
        let mut bytes = sample().to_bytes();
        bytes[7] = 9;
        assert!(matches!(InvertedIndex::from_bytes(&bytes), Err(Error::IndexFormat(_))));
        bytes[0] = b'X';
        assert!(matches!(InvertedIndex::from_bytes(&bytes), Err(Error::IndexFormat(_))));
        let good = sample().to_bytes();
        assert!(InvertedIndex::from_bytes(&good[..good.len() - 1]).is_err());
    }
}
