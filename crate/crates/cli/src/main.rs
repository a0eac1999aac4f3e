use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use facetpool::corpus::{load_corpus, load_embeddings, load_instances};
use facetpool::harness::{
    alignment_stats, evaluate_files, evidence_size_sweep, load_instance_scores, loo_faithfulness,
    paired_bootstrap, run_experiment, sweep_csv, taxonomy_analysis, with_parallelism,
    ExperimentConfig, GeneratorKind, LoadedExperiment, LooMetric, LooOptions, SetSimKind,
};
use facetpool::io::{write_atomic, write_json_atomic, write_jsonl_atomic};
use facetpool::metrics::{Embedder, HashedBagOfWords, TableEmbedder};
use facetpool::retrieval::{bm25_retrieve, Alignment, Bm25Params, InvertedIndex, RetrievalMode};
use facetpool::{Error, ErrorKind};
use serde_json::json;

const INDEX_FILE: &str = "index.json";

#[derive(Parser)]
#[command(
    name = "facetpool",
    version,
    about = "Build, diversify and audit evidence pools for facet generation"
)]
struct Cli {
    /// Print a JSON document instead of the one-line summary.
    #[arg(long, global = true)]
    json: bool,

    /// Worker threads (default: available hardware parallelism).
    #[arg(long, global = true, value_name = "N")]
    parallelism: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a BM25 inverted index from a corpus.
    Index {
        #[arg(long)]
        corpus: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Query an index built by `index`.
    Retrieve {
        /// Index directory or index file.
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        query: String,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = Bm25Params::default().k1)]
        k1: f64,
        #[arg(long, default_value_t = Bm25Params::default().b)]
        b: f64,
    },
    /// Build one evidence pool per instance.
    Pool {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        instances: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Score generated facets against ground truth.
    Evaluate {
        #[arg(long)]
        generated: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        /// Facet embeddings for Set-Sim (default: hashed bag of words).
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// How much of the ground truth the evidence pools contain.
    AlignStats {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Leave-one-out faithfulness.
    Loo {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "term_overlap", value_parser = parse_loo_metric)]
        metric: LooMetric,
        /// Drop only documents retrieved solely for the chosen facet.
        #[arg(long)]
        sole_provenance_only: bool,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Metric means as a function of the number of evidence documents.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated, strictly increasing evidence sizes.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        /// CSV output; the full report goes next to it as JSON.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Most frequent facet words and the share of instances using them.
    Taxonomy {
        #[arg(long)]
        instances: PathBuf,
        #[arg(long, default_value_t = 20)]
        top_k: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a full configuration and write report.json and summary.csv.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Paired bootstrap comparison of two per-instance score files.
    Bootstrap {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Metric column, e.g. `exact_match.f1`.
        #[arg(long)]
        metric: String,
        #[arg(long)]
        iters: usize,
        #[arg(long)]
        seed: u64,
    },
}

/// Values that replace the corresponding experiment config keys.
#[derive(Args, Default)]
struct Overrides {
    #[arg(long, help_heading = "Config overrides")]
    corpus: Option<PathBuf>,
    #[arg(long, help_heading = "Config overrides")]
    embeddings: Option<PathBuf>,
    #[arg(long, help_heading = "Config overrides")]
    output_dir: Option<PathBuf>,
    #[arg(long, value_parser = parse_snake::<RetrievalMode>, help_heading = "Config overrides")]
    mode: Option<RetrievalMode>,
    #[arg(long, value_parser = parse_snake::<Alignment>, help_heading = "Config overrides")]
    alignment: Option<Alignment>,
    #[arg(long = "k", help_heading = "Config overrides")]
    k: Option<usize>,
    #[arg(long, help_heading = "Config overrides")]
    candidate_n: Option<usize>,
    #[arg(long, help_heading = "Config overrides")]
    mmr_lambda: Option<f64>,
    #[arg(long, help_heading = "Config overrides")]
    bm25_k1: Option<f64>,
    #[arg(long, help_heading = "Config overrides")]
    bm25_b: Option<f64>,
    #[arg(long, value_parser = parse_snake::<GeneratorKind>, help_heading = "Config overrides")]
    generator: Option<GeneratorKind>,
    #[arg(long, help_heading = "Config overrides")]
    endpoint: Option<String>,
    #[arg(long, help_heading = "Config overrides")]
    max_facets: Option<usize>,
    #[arg(long, help_heading = "Config overrides")]
    config_seed: Option<u64>,
    #[arg(long, value_parser = parse_snake::<SetSimKind>, help_heading = "Config overrides")]
    set_sim: Option<SetSimKind>,
    #[arg(long, help_heading = "Config overrides")]
    name: Option<String>,
}

impl Overrides {
    fn apply(self, c: &mut ExperimentConfig) {
        let Overrides {
            corpus,
            embeddings,
            output_dir,
            mode,
            alignment,
            k,
            candidate_n,
            mmr_lambda,
            bm25_k1,
            bm25_b,
            generator,
            endpoint,
            max_facets,
            config_seed,
            set_sim,
            name,
        } = self;
        set(&mut c.corpus, corpus);
        if embeddings.is_some() {
            c.embeddings = embeddings;
        }
        set(&mut c.output_dir, output_dir);
        set(&mut c.retrieval.mode, mode);
        set(&mut c.retrieval.alignment, alignment);
        set(&mut c.retrieval.k, k);
        set(&mut c.retrieval.candidate_n, candidate_n);
        if mmr_lambda.is_some() {
            c.retrieval.mmr_lambda = mmr_lambda;
        }
        set(&mut c.retrieval.bm25_k1, bm25_k1);
        set(&mut c.retrieval.bm25_b, bm25_b);
        set(&mut c.generator.kind, generator);
        if endpoint.is_some() {
            c.generator.endpoint = endpoint;
        }
        set(&mut c.generator.max_facets, max_facets);
        set(&mut c.seed, config_seed);
        set(&mut c.set_sim, set_sim);
        if name.is_some() {
            c.name = name;
        }
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn parse_snake<T: serde::de::DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

fn parse_loo_metric(s: &str) -> Result<LooMetric, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn load_experiment(config: &Path, overrides: Overrides) -> facetpool::Result<LoadedExperiment> {
    let mut c = ExperimentConfig::load(config)?;
    overrides.apply(&mut c);
    LoadedExperiment::load(c)
}

/// What a successful command reports: a one-line summary and its JSON form.
struct Outcome {
    line: String,
    json: serde_json::Value,
}

fn run(command: Command) -> facetpool::Result<Outcome> {
    match command {
        Command::Index { corpus, out } => {
            let corpus = load_corpus(&corpus)?;
            let index = InvertedIndex::build(&corpus)?;
            let path = out.join(INDEX_FILE);
            write_atomic(&path, |w| {
                serde_json::to_writer(w, &index).map_err(|e| Error::Invalid(e.to_string()))
            })?;
            Ok(Outcome {
                line: format!(
                    "indexed {} documents, {} terms -> {}",
                    index.doc_count(),
                    index.terms().count(),
                    path.display()
                ),
                json: json!({"documents": index.doc_count(), "terms": index.terms().count(), "index": path}),
            })
        }
        Command::Retrieve {
            index,
            query,
            k,
            k1,
            b,
        } => {
            let path = if index.is_dir() {
                index.join(INDEX_FILE)
            } else {
                index
            };
            let text = std::fs::read_to_string(&path).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?;
            let index: InvertedIndex = serde_json::from_str(&text).map_err(|e| Error::Parse {
                path: path.clone(),
                line: e.line(),
                message: e.to_string(),
            })?;
            index.check_consistency()?;
            let hits = bm25_retrieve(&index, &query, k, Bm25Params { k1, b })?;
            let line = hits
                .iter()
                .map(|h| format!("{}:{}:{:.6}", h.rank, h.doc_id, h.score))
                .collect::<Vec<_>>()
                .join(" ");
            Ok(Outcome {
                line: if line.is_empty() {
                    "no hits".into()
                } else {
                    line
                },
                json: json!(hits),
            })
        }
        Command::Pool {
            config,
            instances,
            out,
            overrides,
        } => {
            let exp = load_experiment(&config, overrides)?;
            let instances = load_instances(&instances)?;
            let pools = instances
                .iter()
                .map(|i| exp.retriever.build_pool(i))
                .collect::<facetpool::Result<Vec<_>>>()?;
            write_jsonl_atomic(&out, &pools)?;
            let entries: usize = pools.iter().map(|p| p.len()).sum();
            Ok(Outcome {
                line: format!(
                    "{} pools, {} entries -> {}",
                    pools.len(),
                    entries,
                    out.display()
                ),
                json: json!({"pools": pools.len(), "entries": entries, "out": out}),
            })
        }
        Command::Evaluate {
            generated,
            truth,
            embeddings,
            out,
        } => {
            let embedder: Box<dyn Embedder> = match embeddings {
                Some(p) => Box::new(TableEmbedder::new(Arc::new(load_embeddings(&p)?))),
                None => Box::new(HashedBagOfWords::default()),
            };
            let summary = evaluate_files(&generated, &truth, embedder.as_ref(), &out)?;
            Ok(Outcome {
                line: format!(
                    "evaluated {} instances: exact_match.f1={:.4} set_bleu.1={:.4} -> {}",
                    summary.evaluated_count,
                    summary.mean.exact_match.f1,
                    summary.mean.set_bleu[0],
                    out.display()
                ),
                json: json!(summary),
            })
        }
        Command::AlignStats {
            config,
            out,
            overrides,
        } => {
            let exp = load_experiment(&config, overrides)?;
            let report = alignment_stats(&exp.instances, &exp.retriever, exp.config.retrieval.k)?;
            write_json_atomic(&out, &report)?;
            Ok(Outcome {
                line: format!(
                    "term_overlap_recall={:.4} exact_match_recall={:.4} evaluated={} skipped={}",
                    report.term_overlap_recall,
                    report.exact_match_recall,
                    report.evaluated_count,
                    report.skipped_count
                ),
                json: json!({
                    "term_overlap_recall": report.term_overlap_recall,
                    "exact_match_recall": report.exact_match_recall,
                    "evaluated_count": report.evaluated_count,
                    "skipped_count": report.skipped_count,
                }),
            })
        }
        Command::Loo {
            config,
            seed,
            metric,
            sole_provenance_only,
            out,
            overrides,
        } => {
            let exp = load_experiment(&config, overrides)?;
            let mut options = LooOptions::new(seed, metric);
            options.sole_provenance_only = sole_provenance_only;
            options.max_facets = exp.config.generator.max_facets;
            let report = loo_faithfulness(
                &exp.instances,
                exp.generator.as_ref(),
                &exp.retriever,
                options,
            )?;
            write_json_atomic(&out, &report)?;
            let delta = report
                .delta_pct
                .map_or("n/a".to_string(), |d| format!("{d:.2}%"));
            Ok(Outcome {
                line: format!(
                    "recall={:.4} recall_loo={:.4} delta={} evaluated={} skipped={}",
                    report.recall,
                    report.recall_loo,
                    delta,
                    report.evaluated_count,
                    report.skipped_count
                ),
                json: json!({
                    "recall": report.recall,
                    "recall_loo": report.recall_loo,
                    "delta_pct": report.delta_pct,
                    "evaluated_count": report.evaluated_count,
                    "skipped_count": report.skipped_count,
                }),
            })
        }
        Command::Sweep {
            config,
            n,
            out,
            overrides,
        } => {
            let exp = load_experiment(&config, overrides)?;
            let report = evidence_size_sweep(
                &exp.instances,
                exp.generator.as_ref(),
                &exp.retriever,
                &n,
                exp.config.generator.max_facets,
                exp.embedder.as_ref(),
            )?;
            let csv = sweep_csv(&report);
            write_json_atomic(&out.with_extension("json"), &report)?;
            write_atomic(&out, |w| {
                w.write_all(csv.as_bytes()).map_err(|e| Error::Io {
                    path: out.clone(),
                    source: e,
                })
            })?;
            Ok(Outcome {
                line: format!("{} sweep points -> {}", report.points.len(), out.display()),
                json: json!(report),
            })
        }
        Command::Taxonomy {
            instances,
            top_k,
            out,
        } => {
            let instances = load_instances(&instances)?;
            let report = taxonomy_analysis(&instances, top_k);
            write_json_atomic(&out, &report)?;
            Ok(Outcome {
                line: format!(
                    "biased_fraction={:.4} ({} of {} instances), top word {}",
                    report.biased_fraction,
                    report.biased_count,
                    report.instance_count,
                    report.top_words.first().map_or("-", |(w, _)| w.as_str())
                ),
                json: json!(report),
            })
        }
        Command::Experiment { config, overrides } => {
            let exp = load_experiment(&config, overrides)?;
            let report = run_experiment(&exp);
            report.write(&exp.config.output_dir)?;
            Ok(Outcome {
                line: format!(
                    "{}: evaluated={} skipped={} exact_match.f1={:.4} -> {}",
                    report.name,
                    report.evaluated_count,
                    report.skipped_count,
                    report.mean.exact_match.f1,
                    exp.config.output_dir.display()
                ),
                json: json!({
                    "name": report.name,
                    "config_hash": report.config_hash,
                    "evaluated_count": report.evaluated_count,
                    "skipped_count": report.skipped_count,
                    "mean": report.mean,
                    "output_dir": exp.config.output_dir,
                }),
            })
        }
        Command::Bootstrap {
            a,
            b,
            metric,
            iters,
            seed,
        } => {
            let a = load_instance_scores(&a, &metric)?;
            let b = load_instance_scores(&b, &metric)?;
            let r = paired_bootstrap(&a, &b, iters, seed)?;
            Ok(Outcome {
                line: format!(
                    "{metric}: mean_diff={:.6} 95% CI [{:.6}, {:.6}] over {} instances",
                    r.mean_diff, r.ci_low, r.ci_high, r.instance_count
                ),
                json: json!(r),
            })
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e.kind() {
        ErrorKind::Data => 2,
        ErrorKind::Generator | ErrorKind::Io => 3,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let json = cli.json;
    let command = cli.command;
    let result = with_parallelism(cli.parallelism, move || run(command)).and_then(|r| r);
    match result {
        Ok(outcome) => {
            if json {
                println!("{}", outcome.json);
            } else {
                println!("{}", outcome.line);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            log::debug!("{e:?}");
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
