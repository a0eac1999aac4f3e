//! Generated corpora with known answers, for checking the harness itself.

use crate::corpus::{ClarificationInstance, Corpus, Document};

/// Number of query-only distractor documents per instance.
pub const DISTRACTORS_PER_INSTANCE: usize = 3;

/// A corpus where every facet lives verbatim in its own document.
///
/// Instance `i` has query `topic{i}` and two or three facets built from
/// pseudo-words that occur nowhere else. Facet documents hold the facet but
/// not the query word; distractor documents hold the query word padded with
/// stopwords. Retrieving by the query alone therefore finds only distractors,
/// while retrieving by query plus facet finds the facet document first.
pub fn planted_corpus(instances: usize) -> (Corpus, Vec<ClarificationInstance>) {
    const PADDING: [&str; DISTRACTORS_PER_INSTANCE] = ["the", "of the", "and the of"];
    let mut docs = Vec::new();
    let mut out = Vec::with_capacity(instances);
    for i in 0..instances {
        let query = format!("topic{i}");
        for (d, pad) in PADDING.iter().enumerate() {
            docs.push(Document {
                id: format!("d{i}-{d}"),
                text: format!("{query} {pad}"),
            });
        }
        let facets: Vec<String> = (0..2 + i % 2)
            .map(|j| {
                let facet = if j == 1 {
                    format!("w{i}f{j} x{i}f{j}")
                } else {
                    format!("w{i}f{j}")
                };
                docs.push(Document {
                    id: format!("f{i}-{j}"),
                    text: format!("the {facet}"),
                });
                facet
            })
            .collect();
        out.push(ClarificationInstance {
            id: format!("s{i:03}"),
            query,
            question: None,
            facets,
        });
    }
    let corpus = Corpus::new(docs).expect("generated ids are unique");
    (corpus, out)
}
