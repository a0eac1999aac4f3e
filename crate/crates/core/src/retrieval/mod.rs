//! Evidence retrieval.
//!
//! Lexical search runs over an [`InvertedIndex`] with BM25 scoring; dense
//! search is an exact scan over an [`EmbeddingTable`](crate::EmbeddingTable).
//! A [`Retriever`] combines either backend with a [`RetrievalConfig`] to
//! build one [`EvidencePool`] per instance.

mod dense;
mod index;
mod interleave;
mod mmr;
mod pool;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dense::dense_retrieve;
pub use index::{bm25_retrieve, Bm25Params, InvertedIndex, Posting};
pub use interleave::{interleave_round_robin, interleave_round_robin_by};
pub use mmr::{mmr_rerank, TfIdfSimilarity};
pub use pool::{facet_label, EvidencePool, PoolEntry, Retriever, ORACLE_PREFIX, QUERY_LABEL};

/// One hit in a ranked list. `rank` is 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredDoc {
    pub doc_id: String,
    pub score: f64,
    pub rank: usize,
}

/// Sort `(id, score)` hits by score descending then id ascending, keep the
/// top `k`, and assign ranks.
pub(crate) fn rank_top_k(mut hits: Vec<(String, f64)>, k: usize) -> Vec<ScoredDoc> {
    let by_score =
        |a: &(String, f64), b: &(String, f64)| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0));
    if hits.len() > k && k > 0 {
        hits.select_nth_unstable_by(k - 1, by_score);
        hits.truncate(k);
    }
    hits.sort_by(by_score);
    hits.truncate(k);
    hits.into_iter()
        .enumerate()
        .map(|(i, (doc_id, score))| ScoredDoc {
            doc_id,
            score,
            rank: i + 1,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RetrievalMode {
    Lexical,
    Dense,
}

/// How the evidence pool relates to the query and the target facets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alignment {
    /// Retrieve with the raw query only.
    QueryOnly,
    /// Retrieve with the query and with the query expanded by each facet,
    /// then interleave.
    FacetAligned,
    /// The ground-truth facets themselves are the evidence.
    Oracle,
    /// No evidence at all.
    ClosedBook,
}

fn default_candidate_n() -> usize {
    50
}
fn default_k1() -> f64 {
    Bm25Params::default().k1
}
fn default_b() -> f64 {
    Bm25Params::default().b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalConfig {
    pub mode: RetrievalMode,
    pub alignment: Alignment,
    pub k: usize,
    #[serde(default = "default_candidate_n")]
    pub candidate_n: usize,
    #[serde(default)]
    pub mmr_lambda: Option<f64>,
    #[serde(default = "default_k1")]
    pub bm25_k1: f64,
    #[serde(default = "default_b")]
    pub bm25_b: f64,
}

impl RetrievalConfig {
    pub fn new(mode: RetrievalMode, alignment: Alignment, k: usize) -> Self {
        RetrievalConfig {
            mode,
            alignment,
            k,
            candidate_n: default_candidate_n(),
            mmr_lambda: None,
            bm25_k1: default_k1(),
            bm25_b: default_b(),
        }
    }

    pub fn with_mmr(mut self, lambda: f64, candidate_n: usize) -> Self {
        self.mmr_lambda = Some(lambda);
        self.candidate_n = candidate_n;
        self
    }

    pub fn bm25(&self) -> Bm25Params {
        Bm25Params {
            k1: self.bm25_k1,
            b: self.bm25_b,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("k must be positive".into()));
        }
        if self.candidate_n == 0 {
            return Err(Error::Config("candidate_n must be positive".into()));
        }
        if let Some(lambda) = self.mmr_lambda {
            if !(0.0..=1.0).contains(&lambda) {
                return Err(Error::Config(format!("mmr_lambda {lambda} outside [0, 1]")));
            }
            if self.k > self.candidate_n {
                return Err(Error::Config(format!(
                    "k ({}) exceeds candidate_n ({}) with MMR enabled",
                    self.k, self.candidate_n
                )));
            }
        }
        if !(self.bm25_k1.is_finite() && self.bm25_k1 >= 0.0) {
            return Err(Error::Config(
                "bm25_k1 must be finite and non-negative".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.bm25_b) {
            return Err(Error::Config("bm25_b must lie in [0, 1]".into()));
        }
        Ok(())
    }
}
