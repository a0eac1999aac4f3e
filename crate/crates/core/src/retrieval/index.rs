//! Inverted index and BM25 scoring.
//!
//! ```text
//! score(D, Q) = Σ_{t ∈ Q} IDF(t) · tf(t, D) · (k1 + 1) / (tf(t, D) + k1 · (1 − b + b · |D| / avgdl))
//! IDF(t)      = ln(1 + (N − df(t) + 0.5) / (df(t) + 0.5))
//! ```
//!
//! Query terms are summed with multiplicity, so a term repeated in the query
//! contributes once per occurrence.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{rank_top_k, ScoredDoc};
use crate::corpus::{normalize, Corpus};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 0.9, b: 0.4 }
    }
}

/// `(doc ordinal, term frequency)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting(pub u32, pub u32);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvertedIndex {
    postings: BTreeMap<String, Vec<Posting>>,
    doc_lengths: Vec<u32>,
    avg_doc_len: f64,
    doc_ids: Vec<String>,
}

impl InvertedIndex {
    pub fn build(corpus: &Corpus) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
        let mut doc_lengths = Vec::with_capacity(corpus.len());
        let mut doc_ids = Vec::with_capacity(corpus.len());
        let mut counts: HashMap<String, u32> = HashMap::new();
        for (ordinal, doc) in corpus.docs().iter().enumerate() {
            let tokens = normalize(&doc.text, false);
            doc_lengths.push(tokens.len() as u32);
            doc_ids.push(doc.id.clone());
            counts.clear();
            for t in tokens.into_tokens() {
                *counts.entry(t).or_default() += 1;
            }
            for (term, tf) in counts.drain() {
                postings
                    .entry(term)
                    .or_default()
                    .push(Posting(ordinal as u32, tf));
            }
        }
        // Ordinals were pushed in increasing order per term.
        Ok(InvertedIndex {
            postings,
            doc_lengths,
            avg_doc_len: corpus.stats().avg_doc_len,
            doc_ids,
        })
    }

    pub fn doc_count(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn avg_doc_len(&self) -> f64 {
        self.avg_doc_len
    }

    pub fn doc_id(&self, ordinal: u32) -> &str {
        &self.doc_ids[ordinal as usize]
    }

    pub fn doc_length(&self, ordinal: u32) -> u32 {
        self.doc_lengths[ordinal as usize]
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn terms(&self) -> impl Iterator<Item = (&str, &[Posting])> {
        self.postings
            .iter()
            .map(|(t, p)| (t.as_str(), p.as_slice()))
    }

    pub fn df(&self, term: &str) -> usize {
        self.postings(term).len()
    }

    pub fn idf(&self, term: &str) -> f64 {
        let n = self.doc_count() as f64;
        let df = self.df(term) as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    /// Check internal consistency: term frequencies sum to document lengths
    /// and every posting points at a known document.
    pub fn check_consistency(&self) -> Result<()> {
        let mut sums = vec![0u64; self.doc_count()];
        for (term, plist) in &self.postings {
            for p in plist {
                let slot = sums.get_mut(p.0 as usize).ok_or_else(|| {
                    Error::Invalid(format!("term {term:?} points at unknown doc {}", p.0))
                })?;
                *slot += u64::from(p.1);
            }
        }
        for (ordinal, (sum, len)) in sums.iter().zip(&self.doc_lengths).enumerate() {
            if *sum != u64::from(*len) {
                return Err(Error::Invalid(format!(
                    "doc {} has length {len} but postings sum to {sum}",
                    self.doc_ids[ordinal]
                )));
            }
        }
        if self.doc_lengths.len() != self.doc_ids.len() {
            return Err(Error::Invalid("doc_lengths and id map disagree".into()));
        }
        Ok(())
    }
}

/// Top-`k` documents for `query` under BM25. Ties go to the smaller doc id;
/// documents sharing no term with the query are never returned.
pub fn bm25_retrieve(
    index: &InvertedIndex,
    query: &str,
    k: usize,
    params: Bm25Params,
) -> Result<Vec<ScoredDoc>> {
    let terms = normalize(query, false);
    if terms.is_empty() {
        return Err(Error::EmptyQuery);
    }
    let Bm25Params { k1, b } = params;
    let avgdl = index.avg_doc_len();
    let mut acc: HashMap<u32, f64> = HashMap::new();
    for term in &terms {
        let idf = index.idf(term);
        for &Posting(ordinal, tf) in index.postings(term) {
            let tf = f64::from(tf);
            let len = f64::from(index.doc_length(ordinal));
            let norm = if avgdl > 0.0 { len / avgdl } else { 0.0 };
            let w = idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * norm));
            *acc.entry(ordinal).or_default() += w;
        }
    }
    let hits = acc
        .into_iter()
        .map(|(ordinal, score)| (index.doc_id(ordinal).to_owned(), score))
        .collect();
    Ok(rank_top_k(hits, k))
}
