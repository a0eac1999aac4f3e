use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{normalize, ClarificationInstance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaxonomyReport {
    /// Most frequent facet words, by count descending then alphabetically.
    pub top_words: Vec<(String, usize)>,
    /// Share of instances with at least one facet containing a top word.
    pub biased_fraction: f64,
    pub biased_count: usize,
    pub instance_count: usize,
}

/// Count stopword-filtered facet words over all instances and measure how
/// many instances draw on the `top_k` most frequent ones.
///
/// When `top_k` covers the whole vocabulary every instance is "biased"; the
/// fraction only means something when the top words are a small slice.
pub fn taxonomy_analysis(instances: &[ClarificationInstance], top_k: usize) -> TaxonomyReport {
    let mut freq: HashMap<String, usize> = HashMap::new();
    for inst in instances {
        for facet in &inst.facets {
            for w in normalize(facet, true).into_tokens() {
                *freq.entry(w).or_default() += 1;
            }
        }
    }
    let mut ranked: Vec<(String, usize)> = freq.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(top_k);

    let top: HashSet<&str> = ranked.iter().map(|(w, _)| w.as_str()).collect();
    let biased_count = instances
        .iter()
        .filter(|inst| {
            inst.facets
                .iter()
                .any(|f| normalize(f, true).iter().any(|w| top.contains(w.as_str())))
        })
        .count();
    let biased_fraction = if instances.is_empty() {
        0.0
    } else {
        biased_count as f64 / instances.len() as f64
    };
    TaxonomyReport {
        top_words: ranked,
        biased_fraction,
        biased_count,
        instance_count: instances.len(),
    }
}
