use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{partition, Skipped};
use crate::corpus::ClarificationInstance;
use crate::error::{Error, Result};
use crate::generator::{Generator, GeneratorRequest};
use crate::metrics::{evaluate_instance, Embedder, MetricReport};
use crate::retrieval::Retriever;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub n_evidence: usize,
    pub mean: MetricReport,
    pub evaluated_count: usize,
    pub skipped_count: usize,
    pub skipped: Vec<Skipped>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub points: Vec<SweepPoint>,
}

/// Metric means as the generator sees the first `n` pool entries, for each
/// `n` in `n_values`. Pools are built once at the largest `n` and truncated.
pub fn evidence_size_sweep(
    instances: &[ClarificationInstance],
    generator: &dyn Generator,
    retriever: &Retriever,
    n_values: &[usize],
    max_facets: usize,
    embedder: &dyn Embedder,
) -> Result<SweepReport> {
    if n_values.is_empty() || n_values[0] == 0 || n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(format!(
            "evidence sizes must be strictly increasing positive integers, got {n_values:?}"
        )));
    }
    let largest = *n_values.last().unwrap();
    let retriever = retriever.with_k(largest)?;
    let pools: Vec<_> = instances
        .par_iter()
        .map(|inst| retriever.build_pool(inst))
        .collect();

    let points = n_values
        .iter()
        .map(|&n| {
            let outcomes: Vec<_> = instances
                .par_iter()
                .zip(&pools)
                .map(|(inst, pool)| {
                    let result = pool.as_ref().map_err(clone_err).and_then(|pool| {
                        let texts = retriever.evidence_texts(&pool.truncated(n), inst)?;
                        let request = GeneratorRequest::new(inst.query.clone(), texts, max_facets);
                        let generated = generator.generate(&request)?;
                        evaluate_instance(&generated.facets, &inst.facets, embedder)
                    });
                    (inst.id.clone(), result)
                })
                .collect();
            let (reports, skipped) = partition(outcomes);
            SweepPoint {
                n_evidence: n,
                mean: MetricReport::mean(&reports),
                evaluated_count: reports.len(),
                skipped_count: skipped.len(),
                skipped,
            }
        })
        .collect();
    Ok(SweepReport { points })
}

fn clone_err(e: &Error) -> Error {
    Error::Invalid(format!("pool construction failed: {e}"))
}

/// `n` followed by one column per metric.
pub fn sweep_csv(report: &SweepReport) -> String {
    let mut out = String::from("n");
    for c in MetricReport::COLUMNS {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for p in &report.points {
        out.push_str(&p.n_evidence.to_string());
        for v in p.mean.values() {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::corpus::Corpus;
    use crate::generator::ExtractiveGenerator;
    use crate::metrics::HashedBagOfWords;
    use crate::retrieval::{Alignment, RetrievalConfig, RetrievalMode};

    fn instance(id: &str, facet: &str) -> ClarificationInstance {
        ClarificationInstance {
            id: id.into(),
            query: format!("query {id}"),
            question: None,
            facets: vec![facet.into()],
        }
    }

    fn retriever(alignment: Alignment) -> Retriever {
        let config = RetrievalConfig::new(RetrievalMode::Lexical, alignment, 1);
        Retriever::new(Arc::new(Corpus::new(vec![]).unwrap()), None, config).unwrap()
    }

    #[test]
    fn single_facet_oracle_is_recovered() {
        let instances = [
            instance("a", "cast"),
            instance("b", "plot summary"),
            instance("c", "release date"),
        ];
        let report = evidence_size_sweep(
            &instances,
            &ExtractiveGenerator,
            &retriever(Alignment::Oracle),
            &[1],
            1,
            &HashedBagOfWords::default(),
        )
        .unwrap();
        assert_eq!(report.points.len(), 1);
        assert_eq!(report.points[0].mean.exact_match.recall, 1.0);
    }

    #[test]
    fn points_follow_n_values() {
        let instances = [instance("a", "cast")];
        let report = evidence_size_sweep(
            &instances,
            &ExtractiveGenerator,
            &retriever(Alignment::Oracle),
            &[1, 2, 3],
            5,
            &HashedBagOfWords::default(),
        )
        .unwrap();
        let ns: Vec<_> = report.points.iter().map(|p| p.n_evidence).collect();
        assert_eq!(ns, [1, 2, 3]);
        let csv = sweep_csv(&report);
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.starts_with("n,term_overlap.precision"));
    }

    #[test]
    fn closed_book_skips() {
        let instances = [instance("a", "cast")];
        let report = evidence_size_sweep(
            &instances,
            &ExtractiveGenerator,
            &retriever(Alignment::ClosedBook),
            &[1],
            5,
            &HashedBagOfWords::default(),
        )
        .unwrap();
        assert_eq!(report.points[0].skipped_count, 1);
        assert!(report.points[0].skipped[0].reason.contains("no evidence"));
    }

    #[test]
    fn rejects_bad_n_values() {
        let r = retriever(Alignment::Oracle);
        for bad in [&[][..], &[0], &[2, 2], &[3, 1]] {
            assert!(evidence_size_sweep(
                &[],
                &ExtractiveGenerator,
                &r,
                bad,
                5,
                &HashedBagOfWords::default()
            )
            .is_err());
        }
    }
}
