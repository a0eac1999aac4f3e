use std::collections::HashMap;

use crate::corpus::normalize;

/// Sentence-level BLEU of `candidate` against a single `reference`, with
/// uniform weights over n-gram orders `1..=n`.
///
/// Unigram precision is unsmoothed, so a candidate sharing no word with the
/// reference scores 0. Higher orders use add-one smoothing,
/// `(matches + 1) / (max(total, 1) + 1)`. A candidate too short to contain
/// any k-gram therefore gets precision 1/2 at that order, which is what keeps
/// BLEU-3 and BLEU-4 of short identical facets below 1. The brevity penalty
/// is `exp(1 − r/c)` when the candidate is shorter than the reference.
///
/// Both inputs go through [`normalize`](crate::normalize) first.
///
/// # Panics
///
/// If `n` is outside `1..=4`.
pub fn bleu_n(candidate: &str, reference: &str, n: usize) -> f64 {
    assert!((1..=4).contains(&n), "BLEU order {n} outside 1..=4");
    let cand = normalize(candidate, false).into_tokens();
    let refr = normalize(reference, false).into_tokens();
    bleu_tokens(&cand, &refr, n)
}

pub(crate) fn bleu_tokens(cand: &[String], refr: &[String], n: usize) -> f64 {
    let c = cand.len();
    if c == 0 {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for order in 1..=n {
        let (matches, total) = clipped_matches(cand, refr, order);
        let p = if order == 1 {
            if matches == 0 {
                return 0.0;
            }
            matches as f64 / total as f64
        } else {
            (matches as f64 + 1.0) / (total.max(1) as f64 + 1.0)
        };
        log_sum += p.ln();
    }
    let r = refr.len();
    let bp = if c < r {
        (1.0 - r as f64 / c as f64).exp()
    } else {
        1.0
    };
    bp * (log_sum / n as f64).exp()
}

fn ngram_counts(tokens: &[String], order: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= order {
        for w in tokens.windows(order) {
            *counts.entry(w).or_default() += 1;
        }
    }
    counts
}

/// `(clipped matches, candidate n-gram count)` at one order.
fn clipped_matches(cand: &[String], refr: &[String], order: usize) -> (usize, usize) {
    let total = cand.len().saturating_sub(order - 1);
    let rc = ngram_counts(refr, order);
    let matches = ngram_counts(cand, order)
        .into_iter()
        .map(|(g, cnt)| cnt.min(rc.get(g).copied().unwrap_or(0)))
        .sum();
    (matches, total)
}
