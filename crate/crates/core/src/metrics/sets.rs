use std::collections::HashSet;

use super::bleu::bleu_tokens;
use super::matching::{match_facet_pairs, FacetAssignment};
use super::{Embedder, Prf};
use crate::corpus::{canonical, cosine, normalize};
use crate::error::{Error, Result};

fn word_set(facets: &[impl AsRef<str>]) -> HashSet<String> {
    facets
        .iter()
        .flat_map(|f| normalize(f.as_ref(), false).into_tokens())
        .collect()
}

fn facet_set(facets: &[impl AsRef<str>]) -> HashSet<String> {
    facets
        .iter()
        .map(|f| canonical(f.as_ref()))
        .filter(|f| !f.is_empty())
        .collect()
}

/// Word-level overlap between the generated and reference facet sets.
///
/// Both sides are reduced to the *set* of normalized words over all their
/// facets; precision and recall are the shared fraction of each.
///
/// ```
/// use facetpool::metrics::term_overlap;
/// let prf = term_overlap(&["windows 10"], &["windows 10", "windows 7"]).unwrap();
/// assert_eq!(prf.precision, 1.0);
/// assert!((prf.recall - 2.0 / 3.0).abs() < 1e-12);
/// ```
pub fn term_overlap(generated: &[impl AsRef<str>], truth: &[impl AsRef<str>]) -> Result<Prf> {
    let wf = word_set(generated);
    let wg = word_set(truth);
    if wf.is_empty() || wg.is_empty() {
        return Err(Error::Invalid(
            "term overlap needs words on both sides".into(),
        ));
    }
    let shared = wf.intersection(&wg).count() as f64;
    Ok(Prf::new(shared / wf.len() as f64, shared / wg.len() as f64))
}

/// Facet-level exact match over deduplicated, normalized facet strings.
pub fn exact_match(generated: &[impl AsRef<str>], truth: &[impl AsRef<str>]) -> Result<Prf> {
    let f = facet_set(generated);
    let g = facet_set(truth);
    if f.is_empty() || g.is_empty() {
        return Err(Error::Invalid(
            "exact match needs facets on both sides".into(),
        ));
    }
    let shared = f.intersection(&g).count() as f64;
    Ok(Prf::new(shared / f.len() as f64, shared / g.len() as f64))
}

/// Set-BLEU-1..4 under the optimal BLEU-1 pairing.
pub fn set_bleu(generated: &[impl AsRef<str>], truth: &[impl AsRef<str>]) -> [f64; 4] {
    let assignment = match_facet_pairs(generated, truth);
    set_bleu_with(generated, truth, &assignment)
}

/// Set-BLEU for a given pairing. Unmatched facets on either side count as
/// zero-score pairs, so the denominator is `max(|F|, |G|)`.
pub fn set_bleu_with(
    generated: &[impl AsRef<str>],
    truth: &[impl AsRef<str>],
    assignment: &FacetAssignment,
) -> [f64; 4] {
    let denom = generated.len().max(truth.len());
    let mut out = [0.0; 4];
    if denom == 0 {
        return out;
    }
    let toks = |s: &str| normalize(s, false).into_tokens();
    let pairs: Vec<_> = assignment
        .pairs
        .iter()
        .map(|&(i, j, _)| (toks(generated[i].as_ref()), toks(truth[j].as_ref())))
        .collect();
    for (slot, n) in out.iter_mut().zip(1..=4) {
        let sum: f64 = pairs.iter().map(|(c, r)| bleu_tokens(c, r, n)).sum();
        *slot = sum / denom as f64;
    }
    out
}

/// Embedding-similarity counterpart of Set-BERT.
///
/// Pairs come from the BLEU-1 matching; each pair scores the cosine of the
/// two facet embeddings clipped to `[0, 1]`. Precision divides the summed
/// pair scores by `|F|`, recall by `|G|`.
pub fn set_sim(
    generated: &[impl AsRef<str>],
    truth: &[impl AsRef<str>],
    embedder: &dyn Embedder,
) -> Result<Prf> {
    let assignment = match_facet_pairs(generated, truth);
    set_sim_with(generated, truth, &assignment, embedder)
}

pub fn set_sim_with(
    generated: &[impl AsRef<str>],
    truth: &[impl AsRef<str>],
    assignment: &FacetAssignment,
    embedder: &dyn Embedder,
) -> Result<Prf> {
    if generated.is_empty() || truth.is_empty() {
        return Err(Error::Invalid(
            "set similarity needs facets on both sides".into(),
        ));
    }
    let mut total = 0.0;
    for &(i, j, _) in &assignment.pairs {
        let a = embedder.embed(generated[i].as_ref())?;
        let b = embedder.embed(truth[j].as_ref())?;
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                found: b.len(),
            });
        }
        total += cosine(&a, &b).clamp(0.0, 1.0);
    }
    Ok(Prf::new(
        total / generated.len() as f64,
        total / truth.len() as f64,
    ))
}
