use super::{rank_top_k, ScoredDoc};
use crate::corpus::EmbeddingTable;
use crate::error::{Error, Result};

/// Exact top-`k` scan by inner product, or by cosine when
/// `normalize_vectors` is set. Ties go to the smaller id.
pub fn dense_retrieve(
    table: &EmbeddingTable,
    query_vector: &[f64],
    k: usize,
    normalize_vectors: bool,
) -> Result<Vec<ScoredDoc>> {
    if query_vector.len() != table.dim() {
        return Err(Error::DimensionMismatch {
            expected: table.dim(),
            found: query_vector.len(),
        });
    }
    let qnorm = norm(query_vector);
    let hits = table
        .iter()
        .map(|(id, v)| {
            let dot: f64 = v.iter().zip(query_vector).map(|(a, b)| a * b).sum();
            let score = if normalize_vectors {
                let denom = norm(v) * qnorm;
                if denom == 0.0 {
                    0.0
                } else {
                    dot / denom
                }
            } else {
                dot
            };
            (id.to_owned(), score)
        })
        .collect();
    Ok(rank_top_k(hits, k))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
