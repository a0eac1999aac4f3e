//! The clarifying-question generator boundary.
//!
//! A [`Generator`] turns a query plus evidence texts into a [`Clarification`].
//! Neural generators live behind an HTTP service ([`RemoteGenerator`]);
//! [`ExtractiveGenerator`] is a local baseline whose facets are always copied
//! from the evidence, which makes it a useful control for faithfulness audits.

mod extractive;
mod fusion;
mod remote;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::corpus::canonical;
use crate::error::{Error, Result};

pub use extractive::{extractive_generate, ExtractiveGenerator};
pub use fusion::fuse_round_robin;
pub use remote::{remote_generate, RemoteGenerator, RemoteOutput};

/// Default number of facets per clarification pane.
pub const DEFAULT_MAX_FACETS: usize = 5;

/// Question text emitted by generators that only produce facets.
pub const TEMPLATE_QUESTION: &str = "Select one to refine your search";

/// A generated clarifying question and its facets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clarification {
    pub question: Option<String>,
    pub facets: Vec<String>,
}

impl Clarification {
    /// Normalizes facets, drops blanks and duplicates (first wins), and
    /// rejects an empty result.
    pub fn new(
        question: Option<String>,
        facets: impl IntoIterator<Item = impl AsRef<str>>,
    ) -> Result<Self> {
        let mut seen = HashSet::new();
        let facets: Vec<String> = facets
            .into_iter()
            .map(|f| canonical(f.as_ref()))
            .filter(|f| !f.is_empty() && seen.insert(f.clone()))
            .collect();
        if facets.is_empty() {
            return Err(Error::generator("generator returned no facets"));
        }
        Ok(Clarification { question, facets })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorRequest {
    pub query: String,
    #[serde(rename = "evidence")]
    pub evidence_texts: Vec<String>,
    pub max_facets: usize,
    pub emit_question: bool,
}

impl GeneratorRequest {
    pub fn new(query: impl Into<String>, evidence_texts: Vec<String>, max_facets: usize) -> Self {
        GeneratorRequest {
            query: query.into(),
            evidence_texts,
            max_facets,
            emit_question: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_facets == 0 {
            return Err(Error::Invalid("max_facets must be at least 1".into()));
        }
        Ok(())
    }
}

pub trait Generator: Send + Sync {
    fn generate(&self, request: &GeneratorRequest) -> Result<Clarification>;
}

impl<F> Generator for F
where
    F: Fn(&GeneratorRequest) -> Result<Clarification> + Send + Sync,
{
    fn generate(&self, request: &GeneratorRequest) -> Result<Clarification> {
        self(request)
    }
}
