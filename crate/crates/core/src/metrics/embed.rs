use std::collections::HashMap;
use std::sync::Arc;

use crate::corpus::{canonical, normalize, EmbeddingTable};
use crate::error::{Error, Result};

/// Maps a facet string to a dense vector for Set-Sim.
pub trait Embedder: Send + Sync {
    fn embed(&self, text: &str) -> Result<Vec<f64>>;
}

/// One orthogonal unit vector per distinct normalized string from a fixed
/// vocabulary. Cosine is 1 for equal facets and 0 otherwise.
#[derive(Debug, Clone)]
pub struct IndicatorEmbedder {
    slots: HashMap<String, usize>,
}

impl IndicatorEmbedder {
    pub fn new<I, S>(vocabulary: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut slots = HashMap::new();
        for s in vocabulary {
            let key = canonical(s.as_ref());
            let next = slots.len();
            slots.entry(key).or_insert(next);
        }
        IndicatorEmbedder { slots }
    }
}

impl Embedder for IndicatorEmbedder {
    fn embed(&self, text: &str) -> Result<Vec<f64>> {
        let slot = self
            .slots
            .get(&canonical(text))
            .ok_or_else(|| Error::Embedder {
                facet: text.to_owned(),
                message: "not in vocabulary".into(),
            })?;
        let mut v = vec![0.0; self.slots.len()];
        v[*slot] = 1.0;
        Ok(v)
    }
}

/// Looks facets up in an [`EmbeddingTable`] by their raw text, then by their
/// normalized form.
#[derive(Debug, Clone)]
pub struct TableEmbedder {
    table: Arc<EmbeddingTable>,
}

impl TableEmbedder {
    pub fn new(table: Arc<EmbeddingTable>) -> Self {
        TableEmbedder { table }
    }
}

impl Embedder for TableEmbedder {
    fn embed(&self, text: &str) -> Result<Vec<f64>> {
        self.table
            .get(text)
            .or_else(|| self.table.get(&canonical(text)))
            .map(<[f64]>::to_vec)
            .ok_or_else(|| Error::Embedder {
                facet: text.to_owned(),
                message: "no vector in embedding table".into(),
            })
    }
}

/// Bag-of-words counts hashed into a fixed number of buckets (FNV-1a).
/// Needs no external data; distinct words can collide, so cosine between
/// unrelated facets is occasionally above zero.
#[derive(Debug, Clone, Copy)]
pub struct HashedBagOfWords {
    pub dim: usize,
}

impl Default for HashedBagOfWords {
    fn default() -> Self {
        HashedBagOfWords { dim: 4096 }
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

impl Embedder for HashedBagOfWords {
    fn embed(&self, text: &str) -> Result<Vec<f64>> {
        let mut v = vec![0.0; self.dim.max(1)];
        let len = v.len() as u64;
        for t in normalize(text, false).iter() {
            v[(fnv1a(t.as_bytes()) % len) as usize] += 1.0;
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::cosine;

    #[test]
    fn indicator_is_orthonormal() {
        let e = IndicatorEmbedder::new(["Cast", "cast", "plot"]);
        let a = e.embed("cast").unwrap();
        let b = e.embed("CAST!").unwrap();
        let c = e.embed("plot").unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(cosine(&a, &b), 1.0);
        assert_eq!(cosine(&a, &c), 0.0);
    }

    #[test]
    fn table_lookup_falls_back_to_normalized() {
        let t = EmbeddingTable::from_entries(2, [("cast list", vec![1.0, 0.0])]).unwrap();
        let e = TableEmbedder::new(Arc::new(t));
        assert!(e.embed("Cast List").is_ok());
        assert!(matches!(e.embed("plot"), Err(Error::Embedder { .. })));
    }

    #[test]
    fn hashed_bag_known_value() {
        // FNV-1a of the empty string is the offset basis.
        assert_eq!(fnv1a(b""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(fnv1a(b"a"), 0xaf63_dc4c_8601_ec8c);
        let e = HashedBagOfWords::default();
        let a = e.embed("red car").unwrap();
        let b = e.embed("car red").unwrap();
        assert!((cosine(&a, &b) - 1.0).abs() < 1e-12);
        assert_eq!(a.iter().sum::<f64>(), 2.0);
    }
}
