//! Facet-set evaluation metrics.
//!
//! | family        | unit  | compares                                   |
//! |---------------|-------|--------------------------------------------|
//! | Term Overlap  | word  | sets of normalized words                   |
//! | Exact Match   | facet | sets of normalized facet strings           |
//! | Set-BLEU-n    | pair  | BLEU-n over optimally paired facets        |
//! | Set-Sim       | pair  | embedding cosine over the same pairs       |
//!
//! Pairing uses the maximum total BLEU-1 assignment, see
//! [`match_facet_pairs`].

mod bleu;
mod embed;
mod matching;
mod sets;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub use bleu::bleu_n;
pub use embed::{Embedder, HashedBagOfWords, IndicatorEmbedder, TableEmbedder};
pub use matching::{bleu1_matrix, match_facet_pairs, FacetAssignment, TIE_EPS};
pub use sets::{exact_match, set_bleu, set_bleu_with, set_sim, set_sim_with, term_overlap};

/// Precision, recall and their harmonic mean.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub fn new(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Prf {
            precision,
            recall,
            f1,
        }
    }
}

/// The full metric suite for one generated facet list.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub term_overlap: Prf,
    pub exact_match: Prf,
    pub set_sim: Prf,
    pub set_bleu: [f64; 4],
}

impl MetricReport {
    /// Column names, in the order of [`MetricReport::values`].
    pub const COLUMNS: [&'static str; 13] = [
        "term_overlap.precision",
        "term_overlap.recall",
        "term_overlap.f1",
        "exact_match.precision",
        "exact_match.recall",
        "exact_match.f1",
        "set_sim.precision",
        "set_sim.recall",
        "set_sim.f1",
        "set_bleu.1",
        "set_bleu.2",
        "set_bleu.3",
        "set_bleu.4",
    ];

    pub fn values(&self) -> [f64; 13] {
        let [b1, b2, b3, b4] = self.set_bleu;
        [
            self.term_overlap.precision,
            self.term_overlap.recall,
            self.term_overlap.f1,
            self.exact_match.precision,
            self.exact_match.recall,
            self.exact_match.f1,
            self.set_sim.precision,
            self.set_sim.recall,
            self.set_sim.f1,
            b1,
            b2,
            b3,
            b4,
        ]
    }

    /// Look up one value by its column name, e.g. `"exact_match.f1"`.
    pub fn select(&self, name: &str) -> Option<f64> {
        Self::COLUMNS
            .iter()
            .position(|c| *c == name)
            .map(|i| self.values()[i])
    }

    /// Field-wise mean. Empty input gives all zeros.
    pub fn mean<'a>(reports: impl IntoIterator<Item = &'a MetricReport>) -> MetricReport {
        let mut sums = [0.0; 13];
        let mut n = 0usize;
        for r in reports {
            for (s, v) in sums.iter_mut().zip(r.values()) {
                *s += v;
            }
            n += 1;
        }
        if n > 0 {
            for s in &mut sums {
                *s /= n as f64;
            }
        }
        Self::from_values(sums)
    }

    pub(crate) fn from_values(v: [f64; 13]) -> MetricReport {
        let prf = |i: usize| Prf {
            precision: v[i],
            recall: v[i + 1],
            f1: v[i + 2],
        };
        MetricReport {
            term_overlap: prf(0),
            exact_match: prf(3),
            set_sim: prf(6),
            set_bleu: [v[9], v[10], v[11], v[12]],
        }
    }
}

/// Compute every metric for one generated facet list against ground truth.
pub fn evaluate_instance(
    generated: &[impl AsRef<str>],
    truth: &[impl AsRef<str>],
    embedder: &dyn Embedder,
) -> Result<MetricReport> {
    let assignment = match_facet_pairs(generated, truth);
    Ok(MetricReport {
        term_overlap: term_overlap(generated, truth)?,
        exact_match: exact_match(generated, truth)?,
        set_sim: set_sim_with(generated, truth, &assignment, embedder)?,
        set_bleu: set_bleu_with(generated, truth, &assignment),
    })
}
