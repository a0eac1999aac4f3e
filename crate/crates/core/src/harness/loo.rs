//! Leave-one-out faithfulness.
//!
//! For each instance one ground-truth facet is drawn at random. The generator
//! runs twice, once on the full facet-aligned pool and once on the pool with
//! that facet's documents removed, and the recall of the chosen facet is
//! compared. A generator that grounds its facets in the evidence loses most
//! of that recall; one that ignores the evidence loses none.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{instance_rng, mean, partition, Skipped};
use crate::corpus::ClarificationInstance;
use crate::error::{Error, Result};
use crate::generator::{Generator, GeneratorRequest, DEFAULT_MAX_FACETS};
use crate::metrics::{exact_match, term_overlap};
use crate::retrieval::{facet_label, Alignment, Retriever};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LooMetric {
    TermOverlap,
    ExactMatch,
}

impl std::str::FromStr for LooMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "term_overlap" => Ok(LooMetric::TermOverlap),
            "exact_match" => Ok(LooMetric::ExactMatch),
            other => Err(Error::Config(format!("unknown LOO metric {other:?}"))),
        }
    }
}

impl LooMetric {
    fn recall(self, generated: &[String], facet: &str) -> Result<f64> {
        let truth = [facet];
        Ok(match self {
            LooMetric::TermOverlap => term_overlap(generated, &truth)?.recall,
            LooMetric::ExactMatch => exact_match(generated, &truth)?.recall,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LooOptions {
    pub seed: u64,
    pub metric: LooMetric,
    /// Only drop documents retrieved *exclusively* for the chosen facet.
    pub sole_provenance_only: bool,
    pub max_facets: usize,
}

impl LooOptions {
    pub fn new(seed: u64, metric: LooMetric) -> Self {
        LooOptions {
            seed,
            metric,
            sole_provenance_only: false,
            max_facets: DEFAULT_MAX_FACETS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LooInstance {
    pub instance_id: String,
    pub chosen_facet_index: usize,
    pub recall: f64,
    pub recall_loo: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LooReport {
    pub metric_kind: LooMetric,
    pub seed: u64,
    pub sole_provenance_only: bool,
    pub recall: f64,
    pub recall_loo: f64,
    /// `100 · (recall_loo − recall) / recall`; absent when `recall` is 0.
    pub delta_pct: Option<f64>,
    pub evaluated_count: usize,
    pub skipped_count: usize,
    pub skipped: Vec<Skipped>,
    pub per_instance: Vec<LooInstance>,
}

pub fn loo_faithfulness(
    instances: &[ClarificationInstance],
    generator: &dyn Generator,
    retriever: &Retriever,
    options: LooOptions,
) -> Result<LooReport> {
    if retriever.config().alignment != Alignment::FacetAligned {
        return Err(Error::Config(
            "leave-one-out needs facet-aligned pools".into(),
        ));
    }
    let outcomes: Vec<_> = instances
        .par_iter()
        .map(|inst| {
            (
                inst.id.clone(),
                loo_instance(inst, generator, retriever, &options),
            )
        })
        .collect();
    let (per_instance, skipped) = partition(outcomes);
    let recall = mean(per_instance.iter().map(|p| p.recall));
    let recall_loo = mean(per_instance.iter().map(|p| p.recall_loo));
    let delta_pct = (recall > 0.0).then(|| 100.0 * (recall_loo - recall) / recall);
    Ok(LooReport {
        metric_kind: options.metric,
        seed: options.seed,
        sole_provenance_only: options.sole_provenance_only,
        recall,
        recall_loo,
        delta_pct,
        evaluated_count: per_instance.len(),
        skipped_count: skipped.len(),
        skipped,
        per_instance,
    })
}

fn loo_instance(
    inst: &ClarificationInstance,
    generator: &dyn Generator,
    retriever: &Retriever,
    options: &LooOptions,
) -> Result<LooInstance> {
    if inst.facets.is_empty() {
        return Err(Error::Invalid("instance has no facets".into()));
    }
    let chosen = instance_rng(options.seed, &inst.id).random_range(0..inst.facets.len());
    let facet = &inst.facets[chosen];

    let full = retriever.build_pool(inst)?;
    let reduced = full.without_label(&facet_label(chosen), options.sole_provenance_only);

    let run = |pool| -> Result<f64> {
        let texts = retriever.evidence_texts(pool, inst)?;
        let request = GeneratorRequest::new(inst.query.clone(), texts, options.max_facets);
        let generated = generator.generate(&request)?;
        options.metric.recall(&generated.facets, facet)
    };
    let recall = run(&full)?;
    let recall_loo = run(&reduced)?;
    Ok(LooInstance {
        instance_id: inst.id.clone(),
        chosen_facet_index: chosen,
        recall,
        recall_loo,
    })
}
