use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{
    bm25_retrieve, dense_retrieve, interleave_round_robin_by, mmr_rerank, Alignment, InvertedIndex,
    RetrievalConfig, RetrievalMode, ScoredDoc, TfIdfSimilarity,
};
use crate::corpus::{cosine, ClarificationInstance, Corpus, EmbeddingTable};
use crate::error::{Error, Result};

/// Id prefix of the synthetic documents in oracle pools (`oracle:1`, ...).
pub const ORACLE_PREFIX: &str = "oracle:";

/// Label of the plain-query sub-retrieval.
pub const QUERY_LABEL: &str = "Q";

/// Label of the sub-retrieval for facet `i` (0-based): `F1`, `F2`, ...
pub fn facet_label(i: usize) -> String {
    format!("F{}", i + 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolEntry {
    pub doc_id: String,
    pub score: f64,
    /// Labels of every sub-query whose result list contained this document,
    /// in sub-query order.
    pub provenance: Vec<String>,
}

/// The evidence handed to a generator for one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidencePool {
    pub instance_id: String,
    pub config: RetrievalConfig,
    pub entries: Vec<PoolEntry>,
}

impl EvidencePool {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The first `n` entries.
    pub fn truncated(&self, n: usize) -> EvidencePool {
        EvidencePool {
            entries: self.entries.iter().take(n).cloned().collect(),
            ..self.clone()
        }
    }

    /// Drop entries retrieved for `label`. With `sole_only`, an entry is only
    /// dropped when `label` is its only provenance.
    pub fn without_label(&self, label: &str, sole_only: bool) -> EvidencePool {
        let keep = |e: &PoolEntry| {
            let has = e.provenance.iter().any(|l| l == label);
            !(has && (!sole_only || e.provenance.len() == 1))
        };
        EvidencePool {
            entries: self.entries.iter().filter(|e| keep(e)).cloned().collect(),
            ..self.clone()
        }
    }
}

/// Builds evidence pools for instances from shared, read-only retrieval data.
///
/// Cloning is cheap; the corpus, index and embeddings sit behind `Arc`s.
#[derive(Debug, Clone)]
pub struct Retriever {
    corpus: Arc<Corpus>,
    index: Option<Arc<InvertedIndex>>,
    embeddings: Option<Arc<EmbeddingTable>>,
    doc_vectors: Option<Arc<EmbeddingTable>>,
    config: RetrievalConfig,
}

fn needs_search(config: &RetrievalConfig) -> bool {
    matches!(
        config.alignment,
        Alignment::QueryOnly | Alignment::FacetAligned
    )
}

impl Retriever {
    /// `embeddings` holds document vectors (keyed by document id) and, for
    /// dense retrieval, query vectors keyed by the exact sub-query text.
    pub fn new(
        corpus: Arc<Corpus>,
        embeddings: Option<Arc<EmbeddingTable>>,
        config: RetrievalConfig,
    ) -> Result<Self> {
        let doc_vectors = embeddings
            .as_ref()
            .map(|t| Arc::new(t.filtered(|id| corpus.contains(id))));
        let mut r = Retriever {
            corpus,
            index: None,
            embeddings,
            doc_vectors,
            config: config.clone(),
        };
        r = r.with_config(config)?;
        Ok(r)
    }

    /// Same data, different configuration. Builds the inverted index on
    /// first use.
    pub fn with_config(&self, config: RetrievalConfig) -> Result<Self> {
        config.validate()?;
        let mut index = self.index.clone();
        if needs_search(&config) {
            match config.mode {
                RetrievalMode::Lexical if index.is_none() => {
                    index = Some(Arc::new(InvertedIndex::build(&self.corpus)?));
                }
                RetrievalMode::Dense if self.doc_vectors.as_ref().is_none_or(|t| t.is_empty()) => {
                    return Err(Error::Config(
                        "dense retrieval needs embeddings for the corpus documents".into(),
                    ));
                }
                _ => {}
            }
        }
        Ok(Retriever {
            index,
            config,
            ..self.clone()
        })
    }

    pub fn with_k(&self, k: usize) -> Result<Self> {
        let mut config = self.config.clone();
        config.k = k;
        if config.mmr_lambda.is_some() && config.candidate_n < k {
            config.candidate_n = k;
        }
        self.with_config(config)
    }

    pub fn config(&self) -> &RetrievalConfig {
        &self.config
    }

    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    pub fn index(&self) -> Option<&InvertedIndex> {
        self.index.as_deref()
    }

    /// `(label, text)` for every sub-query the configured alignment issues.
    pub fn sub_queries(&self, instance: &ClarificationInstance) -> Vec<(String, String)> {
        let mut out = vec![(QUERY_LABEL.to_string(), instance.query.clone())];
        if self.config.alignment == Alignment::FacetAligned {
            for (i, facet) in instance.facets.iter().enumerate() {
                out.push((facet_label(i), format!("{} {}", instance.query, facet)));
            }
        }
        out
    }

    fn search(&self, text: &str, depth: usize) -> Result<Vec<ScoredDoc>> {
        match self.config.mode {
            RetrievalMode::Lexical => {
                let index = self.index.as_ref().expect("index built for lexical search");
                bm25_retrieve(index, text, depth, self.config.bm25())
            }
            RetrievalMode::Dense => {
                let table = self.embeddings.as_ref().expect("checked in with_config");
                let docs = self.doc_vectors.as_ref().expect("checked in with_config");
                let q = table
                    .get(text)
                    .ok_or_else(|| Error::Invalid(format!("no query vector for {text:?}")))?;
                dense_retrieve(docs, q, depth, true)
            }
        }
    }

    pub fn build_pool(&self, instance: &ClarificationInstance) -> Result<EvidencePool> {
        let config = &self.config;
        let entries = match config.alignment {
            Alignment::ClosedBook => Vec::new(),
            Alignment::Oracle => instance
                .facets
                .iter()
                .take(config.k)
                .enumerate()
                .map(|(i, _)| PoolEntry {
                    doc_id: format!("{ORACLE_PREFIX}{}", i + 1),
                    score: 1.0,
                    provenance: vec![facet_label(i)],
                })
                .collect(),
            Alignment::QueryOnly | Alignment::FacetAligned => self.retrieved_entries(instance)?,
        };
        Ok(EvidencePool {
            instance_id: instance.id.clone(),
            config: config.clone(),
            entries,
        })
    }

    fn retrieved_entries(&self, instance: &ClarificationInstance) -> Result<Vec<PoolEntry>> {
        let config = &self.config;
        let depth = if config.mmr_lambda.is_some() {
            config.candidate_n
        } else {
            config.k
        };
        let subs = self.sub_queries(instance);
        let lists = subs
            .iter()
            .map(|(_, text)| self.search(text, depth))
            .collect::<Result<Vec<_>>>()?;
        let merged = interleave_round_robin_by(&lists, depth, |d| d.doc_id.clone());
        let provenance = |doc_id: &str| -> Vec<String> {
            subs.iter()
                .zip(&lists)
                .filter(|(_, list)| list.iter().any(|d| d.doc_id == doc_id))
                .map(|((label, _), _)| label.clone())
                .collect()
        };
        let candidates: Vec<ScoredDoc> = merged
            .into_iter()
            .enumerate()
            .map(|(i, d)| ScoredDoc { rank: i + 1, ..d })
            .collect();
        let selected = match config.mmr_lambda {
            Some(lambda) if !candidates.is_empty() => {
                let k = config.k.min(candidates.len());
                self.diversify(&candidates, lambda, k)?
            }
            _ => candidates.into_iter().take(config.k).collect(),
        };
        Ok(selected
            .into_iter()
            .map(|d| PoolEntry {
                provenance: provenance(&d.doc_id),
                doc_id: d.doc_id,
                score: d.score,
            })
            .collect())
    }

    fn diversify(&self, candidates: &[ScoredDoc], lambda: f64, k: usize) -> Result<Vec<ScoredDoc>> {
        let vectors = self
            .doc_vectors
            .as_deref()
            .filter(|t| candidates.iter().all(|c| t.get(&c.doc_id).is_some()));
        match (vectors, self.index.as_deref()) {
            (Some(table), _) => mmr_rerank(candidates, lambda, k, |a, b| {
                cosine(table.get(&a.doc_id).unwrap(), table.get(&b.doc_id).unwrap())
            }),
            (None, Some(index)) => {
                let sim = TfIdfSimilarity::new(
                    index,
                    candidates.iter().filter_map(|c| {
                        self.corpus
                            .get(&c.doc_id)
                            .map(|d| (d.id.as_str(), d.text.as_str()))
                    }),
                );
                mmr_rerank(candidates, lambda, k, |a, b| {
                    sim.similarity(&a.doc_id, &b.doc_id)
                })
            }
            (None, None) => Err(Error::Config(
                "MMR needs embeddings or a lexical index".into(),
            )),
        }
    }

    /// Text of every pool entry, in pool order.
    pub fn evidence_texts(
        &self,
        pool: &EvidencePool,
        instance: &ClarificationInstance,
    ) -> Result<Vec<String>> {
        pool.entries
            .iter()
            .map(|e| {
                if pool.config.alignment == Alignment::Oracle {
                    if let Some(i) = e
                        .doc_id
                        .strip_prefix(ORACLE_PREFIX)
                        .and_then(|n| n.parse::<usize>().ok())
                    {
                        return instance
                            .facets
                            .get(i.wrapping_sub(1))
                            .cloned()
                            .ok_or_else(|| {
                                Error::Invalid(format!("no facet behind {}", e.doc_id))
                            });
                    }
                }
                self.corpus
                    .get(&e.doc_id)
                    .map(|d| d.text.clone())
                    .ok_or_else(|| {
                        Error::Invalid(format!("pool references unknown document {:?}", e.doc_id))
                    })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;
    use std::collections::HashSet;

    fn corpus(docs: &[(&str, &str)]) -> Arc<Corpus> {
        Arc::new(
            Corpus::new(
                docs.iter()
                    .map(|(id, t)| Document {
                        id: id.to_string(),
                        text: t.to_string(),
                    })
                    .collect(),
            )
            .unwrap(),
        )
    }

    fn instance(query: &str, facets: &[&str]) -> ClarificationInstance {
        ClarificationInstance {
            id: "i1".into(),
            query: query.into(),
            question: None,
            facets: facets.iter().map(|f| f.to_string()).collect(),
        }
    }

    fn lexical(alignment: Alignment, k: usize) -> RetrievalConfig {
        RetrievalConfig::new(RetrievalMode::Lexical, alignment, k)
    }

    #[test]
    fn oracle_pool() {
        let r =
            Retriever::new(corpus(&[("d", "x")]), None, lexical(Alignment::Oracle, 10)).unwrap();
        let inst = instance("movie", &["cast", "quotes"]);
        let pool = r.build_pool(&inst).unwrap();
        assert_eq!(pool.len(), 2);
        assert_eq!(r.evidence_texts(&pool, &inst).unwrap(), ["cast", "quotes"]);
        assert_eq!(pool.entries[1].provenance, ["F2"]);
        assert!(r.index().is_none());
    }

    #[test]
    fn closed_book_pool() {
        let r = Retriever::new(
            corpus(&[("d", "x")]),
            None,
            lexical(Alignment::ClosedBook, 10),
        )
        .unwrap();
        assert!(r
            .build_pool(&instance("movie", &["cast"]))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn shared_top_doc_has_union_provenance() {
        // "hub" mentions both the query and the facet, so it tops both lists.
        let c = corpus(&[
            ("hub", "leiden weather leiden weather"),
            ("q", "leiden city"),
            ("f", "weather today"),
        ]);
        let r = Retriever::new(c, None, lexical(Alignment::FacetAligned, 3)).unwrap();
        let pool = r.build_pool(&instance("leiden", &["weather"])).unwrap();
        assert_eq!(pool.entries[0].doc_id, "hub");
        assert_eq!(pool.entries[0].provenance, ["Q", "F1"]);
        let ids: Vec<_> = pool.entries.iter().map(|e| e.doc_id.as_str()).collect();
        assert_eq!(ids.iter().filter(|&&d| d == "hub").count(), 1);
        assert_eq!(ids, ["hub", "q", "f"]);
        assert_eq!(pool.entries[2].provenance, ["F1"]);
    }

    #[test]
    fn query_only_provenance() {
        let c = corpus(&[("a", "leiden city"), ("b", "leiden weather"), ("c", "rome")]);
        let r = Retriever::new(c, None, lexical(Alignment::QueryOnly, 5)).unwrap();
        let pool = r.build_pool(&instance("leiden", &["weather"])).unwrap();
        assert_eq!(pool.len(), 2);
        assert!(pool.entries.iter().all(|e| e.provenance == ["Q"]));
    }

    #[test]
    fn pool_invariants_hold() {
        let c = corpus(&[
            ("a", "x y z"),
            ("b", "x y"),
            ("c", "y z w"),
            ("d", "x w"),
            ("e", "z"),
        ]);
        for k in 1..6 {
            let r = Retriever::new(c.clone(), None, lexical(Alignment::FacetAligned, k)).unwrap();
            let pool = r.build_pool(&instance("x", &["y", "z", "w"])).unwrap();
            assert!(pool.len() <= k);
            let ids: HashSet<_> = pool.entries.iter().map(|e| &e.doc_id).collect();
            assert_eq!(ids.len(), pool.len());
            for e in &pool.entries {
                assert!(!e.provenance.is_empty());
                assert!(e
                    .provenance
                    .iter()
                    .all(|l| ["Q", "F1", "F2", "F3"].contains(&l.as_str())));
            }
        }
    }

    #[test]
    fn mmr_pool_is_diverse() {
        let c = corpus(&[
            ("a1", "jaguar car engine speed"),
            ("a2", "jaguar car engine speed"),
            ("b", "jaguar cat jungle"),
        ]);
        // b has normalized relevance 0, so novelty must outweigh it: λ = 0.3 gives
        // a2 → 0.3 − 0.7·1 = −0.4 and b → −0.7·sim(b, a1) ≈ −0.085.
        let cfg = lexical(Alignment::QueryOnly, 2).with_mmr(0.3, 3);
        let r = Retriever::new(c.clone(), None, cfg).unwrap();
        let pool = r.build_pool(&instance("jaguar car", &["cat"])).unwrap();
        let ids: Vec<_> = pool.entries.iter().map(|e| e.doc_id.as_str()).collect();
        assert_eq!(ids, ["a1", "b"]);

        let plain = Retriever::new(c, None, lexical(Alignment::QueryOnly, 2)).unwrap();
        let ids: Vec<_> = plain
            .build_pool(&instance("jaguar car", &["cat"]))
            .unwrap()
            .entries
            .into_iter()
            .map(|e| e.doc_id)
            .collect();
        assert_eq!(ids, ["a1", "a2"]);
    }

    #[test]
    fn dense_pool_uses_query_vectors() {
        let c = corpus(&[("d1", "one"), ("d2", "two")]);
        let table = EmbeddingTable::from_entries(
            2,
            [
                ("d1", vec![1.0, 0.0]),
                ("d2", vec![0.0, 1.0]),
                ("q", vec![0.1, 1.0]),
                ("q f", vec![1.0, 0.0]),
            ],
        )
        .unwrap();
        let cfg = RetrievalConfig::new(RetrievalMode::Dense, Alignment::FacetAligned, 2);
        let r = Retriever::new(c.clone(), Some(Arc::new(table)), cfg).unwrap();
        let pool = r.build_pool(&instance("q", &["f"])).unwrap();
        let ids: Vec<_> = pool.entries.iter().map(|e| e.doc_id.as_str()).collect();
        assert_eq!(ids, ["d2", "d1"]);
        // Query vectors are not searchable documents.
        assert!(pool.entries.iter().all(|e| c.contains(&e.doc_id)));

        let missing = r.build_pool(&instance("unknown", &["f"]));
        assert!(missing.is_err());
        let no_vectors = Retriever::new(
            c,
            None,
            RetrievalConfig::new(RetrievalMode::Dense, Alignment::QueryOnly, 2),
        );
        assert!(no_vectors.is_err());
    }

    #[test]
    fn label_removal() {
        let pool = EvidencePool {
            instance_id: "i".into(),
            config: lexical(Alignment::FacetAligned, 3),
            entries: vec![
                PoolEntry {
                    doc_id: "a".into(),
                    score: 1.0,
                    provenance: vec!["Q".into(), "F1".into()],
                },
                PoolEntry {
                    doc_id: "b".into(),
                    score: 1.0,
                    provenance: vec!["F1".into()],
                },
                PoolEntry {
                    doc_id: "c".into(),
                    score: 1.0,
                    provenance: vec!["F2".into()],
                },
            ],
        };
        let all = pool.without_label("F1", false);
        assert_eq!(
            all.entries
                .iter()
                .map(|e| e.doc_id.as_str())
                .collect::<Vec<_>>(),
            ["c"]
        );
        let sole = pool.without_label("F1", true);
        assert_eq!(
            sole.entries
                .iter()
                .map(|e| e.doc_id.as_str())
                .collect::<Vec<_>>(),
            ["a", "c"]
        );
        assert_eq!(pool.truncated(1).len(), 1);
    }
}
