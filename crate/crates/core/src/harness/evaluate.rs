//! Scoring stored generator output against ground truth, one line at a time.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::ClarificationInstance;
use crate::error::{Error, Result};
use crate::io::{write_atomic, JsonlReader};
use crate::metrics::{evaluate_instance, Embedder, MetricReport};

/// One line of a generated-facets file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedRecord {
    pub id: String,
    #[serde(default)]
    pub question: Option<String>,
    pub facets: Vec<String>,
}

/// One line of an evaluation output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredInstance {
    pub instance_id: String,
    pub report: MetricReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationSummary {
    pub mean: MetricReport,
    pub evaluated_count: usize,
}

/// Score `generated` against `truth`, writing one [`ScoredInstance`] per
/// line to `out`.
///
/// Both files are read in lockstep and must list the same ids in the same
/// order, so memory does not grow with the dataset. Any mismatch is an
/// error naming the offending id, and `out` is left untouched.
pub fn evaluate_files(
    generated: &Path,
    truth: &Path,
    embedder: &dyn Embedder,
    out: &Path,
) -> Result<EvaluationSummary> {
    let mut gen_lines = JsonlReader::<GeneratedRecord>::open(generated)?;
    let truth_lines = JsonlReader::<ClarificationInstance>::open(truth)?;
    let mut sum = [0.0f64; 13];
    let mut count = 0usize;
    write_atomic(out, |w| {
        for item in truth_lines {
            let (_, inst) = item?;
            inst.validate()?;
            let record = match gen_lines.next() {
                Some(r) => r?.1,
                None => {
                    return Err(Error::Invalid(format!(
                        "instance {:?} missing from generated output",
                        inst.id
                    )))
                }
            };
            if record.id != inst.id {
                return Err(Error::Invalid(format!(
                    "instance {:?} missing from generated output (found {:?} in its place)",
                    inst.id, record.id
                )));
            }
            let report = evaluate_instance(&record.facets, &inst.facets, embedder)?;
            for (s, v) in sum.iter_mut().zip(report.values()) {
                *s += v;
            }
            count += 1;
            let line = ScoredInstance {
                instance_id: inst.id,
                report,
            };
            serde_json::to_writer(&mut *w, &line).map_err(|e| Error::Invalid(e.to_string()))?;
            writeln!(w).map_err(|e| Error::io(out, e))?;
        }
        if let Some(extra) = gen_lines.next() {
            return Err(Error::Invalid(format!(
                "generated output has {:?} beyond the end of the ground truth",
                extra?.1.id
            )));
        }
        Ok(())
    })?;
    let values = sum.map(|s| if count == 0 { 0.0 } else { s / count as f64 });
    Ok(EvaluationSummary {
        mean: MetricReport::from_values(values),
        evaluated_count: count,
    })
}
