//! Documents, annotated instances and embedding tables.
//!
//! All three are read from line-delimited JSON and are immutable once built,
//! so they can be shared freely between worker threads.

mod embeddings;
mod text;

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::for_each_jsonl;

pub use embeddings::{cosine, load_embeddings, EmbeddingTable};
pub use text::{canonical, is_stopword, normalize, stopwords, TokenList};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub doc_count: usize,
    pub total_token_count: usize,
    pub avg_doc_len: f64,
}

impl CorpusStats {
    fn compute(docs: &[Document]) -> Self {
        let total_token_count: usize = docs.iter().map(|d| normalize(&d.text, false).len()).sum();
        let avg_doc_len = if docs.is_empty() {
            0.0
        } else {
            total_token_count as f64 / docs.len() as f64
        };
        CorpusStats {
            doc_count: docs.len(),
            total_token_count,
            avg_doc_len,
        }
    }
}

/// An ordered document collection with unique ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    docs: Vec<Document>,
    stats: CorpusStats,
    by_id: HashMap<String, usize>,
}

impl Corpus {
    /// Build a corpus from documents, rejecting empty ids, blank texts and
    /// duplicate ids.
    pub fn new(docs: Vec<Document>) -> Result<Self> {
        let mut by_id = HashMap::with_capacity(docs.len());
        for (ordinal, doc) in docs.iter().enumerate() {
            validate_document(doc)?;
            if by_id.insert(doc.id.clone(), ordinal).is_some() {
                return Err(Error::Invalid(format!(
                    "duplicate document id {:?}",
                    doc.id
                )));
            }
        }
        let stats = CorpusStats::compute(&docs);
        Ok(Corpus { docs, stats, by_id })
    }

    pub fn docs(&self) -> &[Document] {
        &self.docs
    }

    pub fn stats(&self) -> CorpusStats {
        self.stats
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.by_id.get(id).map(|&i| &self.docs[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.by_id.contains_key(id)
    }

    /// Stats recomputed from scratch, for consistency checks.
    pub fn recompute_stats(&self) -> CorpusStats {
        CorpusStats::compute(&self.docs)
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        crate::io::write_jsonl_atomic(path, &self.docs)
    }
}

fn validate_document(doc: &Document) -> Result<()> {
    if doc.id.is_empty() {
        return Err(Error::Invalid("document with empty id".into()));
    }
    if doc.text.trim().is_empty() {
        return Err(Error::Invalid(format!(
            "document {:?} has empty text",
            doc.id
        )));
    }
    Ok(())
}

/// Read a corpus from `{"id", "text"}` lines. Duplicate ids are an error that
/// names the offending line.
pub fn load_corpus(path: &Path) -> Result<Corpus> {
    let mut docs = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for_each_jsonl(path, |line, doc: Document| {
        validate_document(&doc).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line,
            message: e.to_string(),
        })?;
        if seen.insert(doc.id.clone(), line).is_some() {
            return Err(Error::DuplicateId {
                path: path.to_path_buf(),
                line,
                id: doc.id,
            });
        }
        docs.push(doc);
        Ok(())
    })?;
    Corpus::new(docs)
}

/// A query with its ground-truth facets and optional clarifying question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClarificationInstance {
    pub id: String,
    pub query: String,
    #[serde(default)]
    pub question: Option<String>,
    pub facets: Vec<String>,
}

impl ClarificationInstance {
    pub fn validate(&self) -> Result<()> {
        if self.facets.is_empty() {
            return Err(Error::Invalid(format!(
                "instance {:?} has no facets",
                self.id
            )));
        }
        if let Some(i) = self
            .facets
            .iter()
            .position(|f| normalize(f, false).is_empty())
        {
            return Err(Error::Invalid(format!(
                "instance {:?}: facet {} is empty after normalization",
                self.id,
                i + 1
            )));
        }
        Ok(())
    }
}

pub fn load_instances(path: &Path) -> Result<Vec<ClarificationInstance>> {
    let mut out = Vec::new();
    for_each_jsonl(path, |line, inst: ClarificationInstance| {
        inst.validate().map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line,
            message: e.to_string(),
        })?;
        out.push(inst);
        Ok(())
    })?;
    Ok(out)
}
