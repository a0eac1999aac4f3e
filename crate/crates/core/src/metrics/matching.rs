//! Optimal one-to-one pairing of generated and reference facets.
//!
//! Pairs maximize the summed BLEU-1 score and always number
//! `min(|F|, |G|)`. Among optimal pairings the canonical one is chosen: the
//! smaller side (the generated side when sizes are equal) is walked in index
//! order and each element takes the lowest partner index that still admits
//! an optimal completion.

use serde::{Deserialize, Serialize};

use super::bleu::bleu_tokens;
use crate::corpus::normalize;

/// Totals within this distance count as equal when choosing among optima.
pub const TIE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacetAssignment {
    /// `(generated index, truth index, BLEU-1)` sorted by generated index.
    pub pairs: Vec<(usize, usize, f64)>,
    pub unmatched_generated: Vec<usize>,
    pub unmatched_truth: Vec<usize>,
}

impl FacetAssignment {
    pub fn total(&self) -> f64 {
        self.pairs.iter().map(|p| p.2).sum()
    }

    /// Assemble an assignment from `(generated, truth)` index pairs.
    pub fn from_pairs(
        generated: &[impl AsRef<str>],
        truth: &[impl AsRef<str>],
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Self {
        let weights = bleu1_matrix(generated, truth);
        let mut pairs: Vec<(usize, usize, f64)> = pairs
            .into_iter()
            .map(|(i, j)| (i, j, weights[i][j]))
            .collect();
        pairs.sort_by_key(|p| p.0);
        let unmatched_generated = (0..generated.len())
            .filter(|i| !pairs.iter().any(|p| p.0 == *i))
            .collect();
        let unmatched_truth = (0..truth.len())
            .filter(|j| !pairs.iter().any(|p| p.1 == *j))
            .collect();
        FacetAssignment {
            pairs,
            unmatched_generated,
            unmatched_truth,
        }
    }
}

/// `w[i][j]` = BLEU-1 of generated facet `i` against truth facet `j`.
pub fn bleu1_matrix(generated: &[impl AsRef<str>], truth: &[impl AsRef<str>]) -> Vec<Vec<f64>> {
    let g: Vec<_> = generated
        .iter()
        .map(|s| normalize(s.as_ref(), false).into_tokens())
        .collect();
    let t: Vec<_> = truth
        .iter()
        .map(|s| normalize(s.as_ref(), false).into_tokens())
        .collect();
    g.iter()
        .map(|gi| t.iter().map(|tj| bleu_tokens(gi, tj, 1)).collect())
        .collect()
}

/// Best BLEU-1 pairing between generated facets and ground truth.
pub fn match_facet_pairs(
    generated: &[impl AsRef<str>],
    truth: &[impl AsRef<str>],
) -> FacetAssignment {
    let weights = bleu1_matrix(generated, truth);
    let transposed = generated.len() > truth.len();
    let rows = if transposed {
        transpose(&weights, truth.len())
    } else {
        weights
    };
    let cols = if transposed {
        generated.len()
    } else {
        truth.len()
    };
    let chosen = canonical_assignment(&rows, cols);
    let pairs = chosen
        .iter()
        .enumerate()
        .map(|(r, &c)| if transposed { (c, r) } else { (r, c) });
    FacetAssignment::from_pairs(generated, truth, pairs)
}

fn transpose(m: &[Vec<f64>], cols: usize) -> Vec<Vec<f64>> {
    (0..cols)
        .map(|j| m.iter().map(|row| row[j]).collect())
        .collect()
}

/// For a `r × c` weight matrix with `r ≤ c`, the column taken by each row in
/// the canonical maximum-weight assignment.
fn canonical_assignment(w: &[Vec<f64>], cols: usize) -> Vec<usize> {
    let rows = w.len();
    let mut used = vec![false; cols];
    let mut out = Vec::with_capacity(rows);
    for r in 0..rows {
        let target = best_completion(w, r, &used);
        let mut pick = None;
        for c in 0..cols {
            if used[c] {
                continue;
            }
            used[c] = true;
            let value = w[r][c] + best_completion(w, r + 1, &used);
            used[c] = false;
            if value >= target - TIE_EPS {
                pick = Some(c);
                break;
            }
        }
        let c = pick.expect("some column attains the optimum");
        used[c] = true;
        out.push(c);
    }
    out
}

/// Maximum total weight assigning rows `from..` to distinct unused columns.
fn best_completion(w: &[Vec<f64>], from: usize, used: &[bool]) -> f64 {
    let free: Vec<usize> = (0..used.len()).filter(|&c| !used[c]).collect();
    let sub: Vec<Vec<f64>> = w[from..]
        .iter()
        .map(|row| free.iter().map(|&c| -row[c]).collect())
        .collect();
    -hungarian_min(&sub)
}

/// Minimum-cost assignment of every row to a distinct column (rows ≤ cols).
/// Returns the optimal cost.
fn hungarian_min(cost: &[Vec<f64>]) -> f64 {
    let n = cost.len();
    if n == 0 {
        return 0.0;
    }
    let m = cost[0].len();
    debug_assert!(n <= m);
    // 1-based potentials formulation; column 0 is a sentinel.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut way = vec![0usize; m + 1];
    let mut row_of = vec![0usize; m + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut visited = vec![false; m + 1];
        loop {
            visited[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if visited[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if visited[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=m)
        .filter(|&j| row_of[j] != 0)
        .map(|j| cost[row_of[j] - 1][j - 1])
        .sum()
}
