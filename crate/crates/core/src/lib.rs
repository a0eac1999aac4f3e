//! Evidence pools and evaluation tooling for clarifying-question generation.
//!
//! A clarifying question offers a handful of *facets*, candidate refinements of
//! an ambiguous search query. This crate covers everything around the neural
//! generator that produces them:
//!
//! * [`corpus`]: loading documents, annotated instances and embedding tables,
//!   plus the shared tokenizer.
//! * [`retrieval`]: BM25 and dense retrieval, facet-aligned round-robin pools,
//!   MMR diversification, oracle and closed-book pools.
//! * [`metrics`]: Term Overlap, Exact Match, Set-BLEU and Set-Sim, all built
//!   on an optimal BLEU-1 pairing of generated and reference facets.
//! * [`generator`]: the generator boundary (remote HTTP service or a local
//!   extractive baseline) and round-robin fusion of facet lists.
//! * [`harness`]: alignment statistics, leave-one-out faithfulness, evidence
//!   size sweeps, taxonomy bias, end-to-end experiments and paired bootstrap.
//!
//! The guide under `book/` walks through each of these with runnable snippets.

pub mod corpus;
pub mod error;
pub mod generator;
pub mod harness;
pub mod io;
pub mod metrics;
pub mod retrieval;

pub use corpus::{normalize, ClarificationInstance, Corpus, Document, EmbeddingTable, TokenList};
pub use error::{Error, ErrorKind, Result};

// The guide's code blocks are compiled and run as doc-tests from here.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/tokenization.md")]
    mod tokenization {}
    #[doc = include_str!("../../../book/src/retrieval.md")]
    mod retrieval {}
    #[doc = include_str!("../../../book/src/diversification.md")]
    mod diversification {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/generators.md")]
    mod generators {}
    #[doc = include_str!("../../../book/src/faithfulness.md")]
    mod faithfulness {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
