//! Maximal Marginal Relevance reranking.
//!
//! Greedy selection over a candidate list. At every step the candidate `d`
//! maximizing
//!
//! ```text
//! λ · rel(d) − (1 − λ) · max_{s ∈ selected} sim(d, s)
//! ```
//!
//! is taken, where `rel` is the candidate score min-max normalized over the
//! whole candidate set. λ = 1 is pure relevance, λ = 0 pure novelty.

use std::collections::HashMap;

use super::{InvertedIndex, ScoredDoc};
use crate::corpus::normalize;
use crate::error::{Error, Result};

/// Rerank `candidates` down to `k` items. The first pick is always the most
/// relevant candidate; ties go to the better original rank. Output keeps the
/// original scores and carries new 1-based ranks.
pub fn mmr_rerank<F>(
    candidates: &[ScoredDoc],
    lambda: f64,
    k: usize,
    sim: F,
) -> Result<Vec<ScoredDoc>>
where
    F: Fn(&ScoredDoc, &ScoredDoc) -> f64,
{
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Invalid(format!(
            "mmr lambda {lambda} outside [0, 1]"
        )));
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    if candidates.is_empty() {
        return Err(Error::Invalid("mmr over an empty candidate set".into()));
    }
    if k > candidates.len() {
        return Err(Error::Invalid(format!(
            "mmr asked for {k} items from {} candidates",
            candidates.len()
        )));
    }

    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by_key(|&i| candidates[i].rank);

    let (lo, hi) = candidates
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
            (lo.min(c.score), hi.max(c.score))
        });
    let rel = |i: usize| {
        if hi > lo {
            (candidates[i].score - lo) / (hi - lo)
        } else {
            1.0
        }
    };

    // max similarity of each candidate to the selected set so far
    let mut redundancy = vec![f64::NEG_INFINITY; candidates.len()];
    let mut taken = vec![false; candidates.len()];
    let mut picked = Vec::with_capacity(k);

    for step in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for &i in &order {
            if taken[i] {
                continue;
            }
            let objective = if step == 0 {
                rel(i)
            } else {
                lambda * rel(i) - (1.0 - lambda) * redundancy[i]
            };
            if best.is_none_or(|(_, b)| objective > b) {
                best = Some((i, objective));
            }
        }
        let (chosen, _) = best.expect("k <= candidates");
        taken[chosen] = true;
        picked.push(chosen);
        for i in 0..candidates.len() {
            if !taken[i] {
                let s = sim(&candidates[i], &candidates[chosen]);
                if s > redundancy[i] {
                    redundancy[i] = s;
                }
            }
        }
    }

    Ok(picked
        .into_iter()
        .enumerate()
        .map(|(pos, i)| ScoredDoc {
            rank: pos + 1,
            ..candidates[i].clone()
        })
        .collect())
}

/// Cosine similarity between TF-IDF vectors of documents, with document
/// frequencies taken from an index. Used for MMR when no embeddings exist.
#[derive(Debug, Clone)]
pub struct TfIdfSimilarity {
    vectors: HashMap<String, HashMap<String, f64>>,
}

impl TfIdfSimilarity {
    /// Build vectors for the given `(id, text)` pairs.
    pub fn new<'a, I>(index: &InvertedIndex, docs: I) -> Self
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let n = index.doc_count().max(1) as f64;
        let vectors = docs
            .into_iter()
            .map(|(id, text)| {
                let mut tf: HashMap<String, f64> = HashMap::new();
                for t in normalize(text, false).into_tokens() {
                    *tf.entry(t).or_default() += 1.0;
                }
                for (term, w) in tf.iter_mut() {
                    let df = index.df(term).max(1) as f64;
                    *w *= (n / df).ln() + 1.0;
                }
                (id.to_owned(), tf)
            })
            .collect();
        TfIdfSimilarity { vectors }
    }

    pub fn similarity(&self, a: &str, b: &str) -> f64 {
        let (Some(va), Some(vb)) = (self.vectors.get(a), self.vectors.get(b)) else {
            return 0.0;
        };
        let dot: f64 = va
            .iter()
            .filter_map(|(t, x)| vb.get(t).map(|y| x * y))
            .sum();
        let na = va.values().map(|x| x * x).sum::<f64>().sqrt();
        let nb = vb.values().map(|x| x * x).sum::<f64>().sqrt();
        if na == 0.0 || nb == 0.0 {
            0.0
        } else {
            dot / (na * nb)
        }
    }
}
