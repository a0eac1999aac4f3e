//! Config-driven end-to-end runs: build pools, generate, evaluate, report.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{partition, Skipped};
use crate::corpus::{
    load_corpus, load_embeddings, load_instances, ClarificationInstance, EmbeddingTable,
};
use crate::error::{Error, Result};
use crate::generator::{
    ExtractiveGenerator, Generator, GeneratorRequest, RemoteGenerator, DEFAULT_MAX_FACETS,
};
use crate::io::{write_atomic, write_json_atomic};
use crate::metrics::{evaluate_instance, Embedder, HashedBagOfWords, MetricReport, TableEmbedder};
use crate::retrieval::{RetrievalConfig, Retriever};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    Extractive,
    Remote,
}

fn default_max_facets() -> usize {
    DEFAULT_MAX_FACETS
}

fn default_timeout() -> f64 {
    30.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    #[serde(default)]
    pub endpoint: Option<String>,
    #[serde(default = "default_max_facets")]
    pub max_facets: usize,
    #[serde(default)]
    pub emit_question: bool,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
}

/// Which embedder backs the Set-Sim metric.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetSimKind {
    /// Hashed bag-of-words vectors; needs no data.
    #[default]
    Hashed,
    /// Facet vectors looked up in the experiment's embedding table.
    Embeddings,
}

/// The experiment file. Relative paths are resolved against the directory
/// holding the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub corpus: PathBuf,
    pub instances: PathBuf,
    #[serde(default)]
    pub embeddings: Option<PathBuf>,
    pub retrieval: RetrievalConfig,
    pub generator: GeneratorSpec,
    #[serde(default)]
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub set_sim: SetSimKind,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: e.line(),
                message: e.to_string(),
            })?;
        let base = path.parent().unwrap_or(Path::new(""));
        config.resolve_paths(base);
        Ok(config)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.corpus);
        fix(&mut self.instances);
        fix(&mut self.output_dir);
        if let Some(p) = &mut self.embeddings {
            fix(p);
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.retrieval.validate()?;
        if self.generator.max_facets == 0 {
            return Err(Error::Config(
                "generator.max_facets must be at least 1".into(),
            ));
        }
        if self.generator.kind == GeneratorKind::Remote && self.generator.endpoint.is_none() {
            return Err(Error::Config("remote generator needs an endpoint".into()));
        }
        if !(self.generator.timeout_secs.is_finite() && self.generator.timeout_secs > 0.0) {
            return Err(Error::Config(
                "generator.timeout_secs must be positive".into(),
            ));
        }
        if self.set_sim == SetSimKind::Embeddings && self.embeddings.is_none() {
            return Err(Error::Config(
                "set_sim = embeddings needs an embeddings file".into(),
            ));
        }
        Ok(())
    }

    /// Report label; defaults to a description of the retrieval setup.
    pub fn display_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            let r = &self.retrieval;
            let mut s = format!(
                "{}|{}|k={}",
                serde_json::to_value(r.mode)
                    .unwrap()
                    .as_str()
                    .unwrap_or_default(),
                serde_json::to_value(r.alignment)
                    .unwrap()
                    .as_str()
                    .unwrap_or_default(),
                r.k
            );
            if let Some(l) = r.mmr_lambda {
                s.push_str(&format!("|mmr={l}"));
            }
            s
        })
    }

    /// SHA-256 over the config's canonical JSON form.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(
            serde_json::to_vec(self).expect("config serializes"),
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputProvenance {
    pub role: String,
    pub path: PathBuf,
    pub sha256: String,
}

fn provenance(role: &str, path: &Path) -> Result<InputProvenance> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(InputProvenance {
        role: role.into(),
        path: path.to_path_buf(),
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}

/// Everything an experiment needs, loaded and validated up front.
pub struct LoadedExperiment {
    pub config: ExperimentConfig,
    pub instances: Vec<ClarificationInstance>,
    pub retriever: Retriever,
    pub generator: Box<dyn Generator>,
    pub embedder: Box<dyn Embedder>,
    pub inputs: Vec<InputProvenance>,
}

impl LoadedExperiment {
    pub fn load(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let corpus = Arc::new(load_corpus(&config.corpus)?);
        let instances = load_instances(&config.instances)?;
        let embeddings: Option<Arc<EmbeddingTable>> = match &config.embeddings {
            Some(p) => Some(Arc::new(load_embeddings(p)?)),
            None => None,
        };
        let mut inputs = vec![
            provenance("corpus", &config.corpus)?,
            provenance("instances", &config.instances)?,
        ];
        if let Some(p) = &config.embeddings {
            inputs.push(provenance("embeddings", p)?);
        }
        let retriever = Retriever::new(corpus, embeddings.clone(), config.retrieval.clone())?;
        let generator: Box<dyn Generator> = match config.generator.kind {
            GeneratorKind::Extractive => Box::new(ExtractiveGenerator),
            GeneratorKind::Remote => Box::new(RemoteGenerator::new(
                config.generator.endpoint.clone().unwrap_or_default(),
                Duration::from_secs_f64(config.generator.timeout_secs),
            )),
        };
        let embedder: Box<dyn Embedder> = match (config.set_sim, embeddings) {
            (SetSimKind::Embeddings, Some(table)) => Box::new(TableEmbedder::new(table)),
            _ => Box::new(HashedBagOfWords::default()),
        };
        Ok(LoadedExperiment {
            config,
            instances,
            retriever,
            generator,
            embedder,
            inputs,
        })
    }

    pub fn request(&self, inst: &ClarificationInstance, evidence: Vec<String>) -> GeneratorRequest {
        GeneratorRequest {
            query: inst.query.clone(),
            evidence_texts: evidence,
            max_facets: self.config.generator.max_facets,
            emit_question: self.config.generator.emit_question,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceResult {
    pub instance_id: String,
    pub question: Option<String>,
    pub generated: Vec<String>,
    pub evidence_count: usize,
    pub report: MetricReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub config_hash: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub inputs: Vec<InputProvenance>,
    pub mean: MetricReport,
    pub evaluated_count: usize,
    pub skipped_count: usize,
    pub skipped: Vec<Skipped>,
    pub per_instance: Vec<InstanceResult>,
}

impl ExperimentReport {
    /// Per-instance values of one metric column, for paired comparisons.
    pub fn metric_by_instance(&self, metric: &str) -> Result<Vec<(String, f64)>> {
        self.per_instance
            .iter()
            .map(|r| {
                r.report
                    .select(metric)
                    .map(|v| (r.instance_id.clone(), v))
                    .ok_or_else(|| Error::Config(format!("unknown metric {metric:?}")))
            })
            .collect()
    }

    /// Write `report.json` and `summary.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        write_json_atomic(&dir.join("report.json"), self)?;
        let csv = summary_csv(std::slice::from_ref(self));
        write_atomic(&dir.join("summary.csv"), |out| {
            out.write_all(csv.as_bytes())
                .map_err(|e| Error::io(dir.join("summary.csv"), e))
        })
    }
}

/// One row per report, metric columns in table order.
pub fn summary_csv(reports: &[ExperimentReport]) -> String {
    let mut out = String::from("configuration,evaluated,skipped");
    for c in MetricReport::COLUMNS {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for r in reports {
        out.push_str(&csv_field(&r.name));
        out.push_str(&format!(",{},{}", r.evaluated_count, r.skipped_count));
        for v in r.mean.values() {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Run the whole pipeline for every instance.
pub fn run_experiment(exp: &LoadedExperiment) -> ExperimentReport {
    let outcomes: Vec<_> = exp
        .instances
        .par_iter()
        .map(|inst| {
            let result = (|| {
                let pool = exp.retriever.build_pool(inst)?;
                let texts = exp.retriever.evidence_texts(&pool, inst)?;
                let generated = exp.generator.generate(&exp.request(inst, texts))?;
                let report =
                    evaluate_instance(&generated.facets, &inst.facets, exp.embedder.as_ref())?;
                Ok(InstanceResult {
                    instance_id: inst.id.clone(),
                    question: generated.question,
                    generated: generated.facets,
                    evidence_count: pool.len(),
                    report,
                })
            })();
            (inst.id.clone(), result)
        })
        .collect();
    let (per_instance, skipped) = partition(outcomes);
    ExperimentReport {
        name: exp.config.display_name(),
        config_hash: exp.config.hash(),
        seed: exp.config.seed,
        config: exp.config.clone(),
        inputs: exp.inputs.clone(),
        mean: MetricReport::mean(per_instance.iter().map(|r| &r.report)),
        evaluated_count: per_instance.len(),
        skipped_count: skipped.len(),
        skipped,
        per_instance,
    }
}

/// Per-instance values of `metric` from either a `report.json` written by an
/// experiment or a scores file written by [`evaluate_files`](super::evaluate_files).
pub fn load_instance_scores(path: &Path, metric: &str) -> Result<Vec<(String, f64)>> {
    if !MetricReport::COLUMNS.contains(&metric) {
        return Err(Error::Config(format!(
            "unknown metric {metric:?}; expected one of {}",
            MetricReport::COLUMNS.join(", ")
        )));
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if let Ok(report) = serde_json::from_str::<ExperimentReport>(&text) {
        return report.metric_by_instance(metric);
    }
    let mut out = Vec::new();
    crate::io::for_each_jsonl(path, |_, s: super::ScoredInstance| {
        out.push((s.instance_id, s.report.select(metric).unwrap_or_default()));
        Ok(())
    })?;
    Ok(out)
}
