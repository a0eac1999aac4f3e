use std::collections::HashMap;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::io::for_each_jsonl;

/// Dense vectors keyed by id. Every vector has exactly `dim` finite components.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    entries: HashMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Invalid(
                "embedding dimension must be positive".into(),
            ));
        }
        Ok(EmbeddingTable {
            dim,
            entries: HashMap::new(),
        })
    }

    /// Insert a vector, replacing any previous one for `id`.
    pub fn insert(&mut self, id: impl Into<String>, vector: Vec<f64>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: vector.len(),
            });
        }
        if vector.iter().any(|x| !x.is_finite()) {
            return Err(Error::Invalid("non-finite vector component".into()));
        }
        self.entries.insert(id.into(), vector);
        Ok(())
    }

    pub fn from_entries<I, S>(dim: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        let mut table = EmbeddingTable::new(dim)?;
        for (id, v) in entries {
            table.insert(id, v)?;
        }
        Ok(table)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, id: &str) -> Option<&[f64]> {
        self.entries.get(id).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    /// A copy restricted to ids accepted by `keep`.
    pub fn filtered(&self, mut keep: impl FnMut(&str) -> bool) -> EmbeddingTable {
        EmbeddingTable {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .filter(|(k, _)| keep(k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }
}

#[derive(Deserialize)]
struct Line {
    id: String,
    // Parsed as raw JSON so that NaN/Infinity spelled as strings are reported
    // as non-finite values rather than type errors.
    vector: Vec<serde_json::Value>,
}

/// Read `{"id", "vector"}` lines. The first line fixes the dimension.
pub fn load_embeddings(path: &Path) -> Result<EmbeddingTable> {
    let mut table: Option<EmbeddingTable> = None;
    for_each_jsonl(path, |line, rec: Line| {
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let vector = rec
            .vector
            .iter()
            .map(|v| match v {
                serde_json::Value::Number(n) => n.as_f64().filter(|x| x.is_finite()),
                _ => None,
            })
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| parse_err(format!("non-finite value in vector for {:?}", rec.id)))?;
        let table = match &mut table {
            Some(t) => t,
            None => table
                .insert(EmbeddingTable::new(vector.len()).map_err(|e| parse_err(e.to_string()))?),
        };
        if table.entries.contains_key(&rec.id) {
            return Err(Error::DuplicateId {
                path: path.to_path_buf(),
                line,
                id: rec.id,
            });
        }
        table
            .insert(rec.id, vector)
            .map_err(|e| parse_err(e.to_string()))
    })?;
    table.ok_or_else(|| Error::Invalid(format!("{}: no embeddings", path.display())))
}

/// Cosine similarity; 0 when either vector has zero norm.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}
