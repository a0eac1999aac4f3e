use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{mean, partition, Skipped};
use crate::corpus::{canonical, normalize, ClarificationInstance};
use crate::error::{Error, Result};
use crate::retrieval::{RetrievalConfig, Retriever};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentInstance {
    pub instance_id: String,
    pub term_overlap_recall: f64,
    pub exact_match_recall: f64,
}

/// How well evidence pools cover the target facets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentReport {
    pub config: RetrievalConfig,
    pub term_overlap_recall: f64,
    pub exact_match_recall: f64,
    pub evaluated_count: usize,
    pub skipped_count: usize,
    pub skipped: Vec<Skipped>,
    pub per_instance: Vec<AlignmentInstance>,
}

/// Term-overlap recall: share of the facets' words present anywhere in the
/// pool. Exact-match recall: share of distinct facets found as a contiguous
/// token run inside a single pool document.
pub fn alignment_stats(
    instances: &[ClarificationInstance],
    retriever: &Retriever,
    k: usize,
) -> Result<AlignmentReport> {
    if instances.is_empty() {
        return Err(Error::Invalid(
            "alignment statistics need at least one instance".into(),
        ));
    }
    let retriever = retriever.with_k(k)?;
    let outcomes: Vec<_> = instances
        .par_iter()
        .map(|inst| (inst.id.clone(), instance_alignment(&retriever, inst)))
        .collect();
    let (per_instance, skipped) = partition(outcomes);
    Ok(AlignmentReport {
        config: retriever.config().clone(),
        term_overlap_recall: mean(per_instance.iter().map(|p| p.term_overlap_recall)),
        exact_match_recall: mean(per_instance.iter().map(|p| p.exact_match_recall)),
        evaluated_count: per_instance.len(),
        skipped_count: skipped.len(),
        skipped,
        per_instance,
    })
}

fn instance_alignment(
    retriever: &Retriever,
    inst: &ClarificationInstance,
) -> Result<AlignmentInstance> {
    let pool = retriever.build_pool(inst)?;
    let docs: Vec<_> = retriever
        .evidence_texts(&pool, inst)?
        .iter()
        .map(|t| normalize(t, false))
        .collect();
    let evidence_words: HashSet<&str> = docs
        .iter()
        .flat_map(|d| d.iter().map(String::as_str))
        .collect();

    let facet_words: HashSet<String> = inst
        .facets
        .iter()
        .flat_map(|f| normalize(f, false).into_tokens())
        .collect();
    let covered = facet_words
        .iter()
        .filter(|w| evidence_words.contains(w.as_str()))
        .count();
    let term_overlap_recall = covered as f64 / facet_words.len() as f64;

    let facets: HashSet<String> = inst.facets.iter().map(|f| canonical(f)).collect();
    let found = facets
        .iter()
        .filter(|f| {
            let needle = normalize(f, false).into_tokens();
            docs.iter().any(|d| d.contains_sequence(&needle))
        })
        .count();
    Ok(AlignmentInstance {
        instance_id: inst.id.clone(),
        term_overlap_recall,
        exact_match_recall: found as f64 / facets.len() as f64,
    })
}
