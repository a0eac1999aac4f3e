use crate::corpus::canonical;
use crate::error::{Error, Result};
use crate::retrieval::interleave_round_robin_by;

/// Ensemble facet lists from several generators by round-robin
/// interleaving, skipping facets that normalize to one already taken.
/// Lists usually hold [`DEFAULT_MAX_FACETS`](super::DEFAULT_MAX_FACETS).
pub fn fuse_round_robin(facet_lists: &[Vec<String>], max_facets: usize) -> Result<Vec<String>> {
    if facet_lists.iter().all(Vec::is_empty) {
        return Err(Error::Invalid(
            "nothing to fuse: every facet list is empty".into(),
        ));
    }
    let cleaned: Vec<Vec<String>> = facet_lists
        .iter()
        .map(|l| {
            l.iter()
                .filter(|f| !canonical(f).is_empty())
                .cloned()
                .collect()
        })
        .collect();
    Ok(interleave_round_robin_by(&cleaned, max_facets, |f| {
        canonical(f)
    }))
}
