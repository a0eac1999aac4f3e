use std::collections::{HashMap, HashSet};

use super::{Clarification, Generator, GeneratorRequest, TEMPLATE_QUESTION};
use crate::corpus::normalize;
use crate::error::{Error, Result};

/// Offline baseline: pick the most frequent unigrams and bigrams of the
/// evidence (stopwords removed), skipping n-grams made only of query words.
///
/// A candidate scores `occurrences × documents containing it`; ties keep
/// first-occurrence order, a bigram ahead of the unigram it starts with.
/// Every facet is a contiguous run of the stopword-filtered tokens of some
/// evidence text.
pub fn extractive_generate(request: &GeneratorRequest) -> Result<Clarification> {
    request.validate()?;
    if request.evidence_texts.is_empty() {
        return Err(Error::generator("no evidence"));
    }
    let query: HashSet<String> = normalize(&request.query, false)
        .into_tokens()
        .into_iter()
        .collect();

    struct Stats {
        first: usize,
        freq: usize,
        docs: HashSet<usize>,
    }
    let mut stats: HashMap<String, Stats> = HashMap::new();
    let mut seen_order = 0usize;
    for (doc, text) in request.evidence_texts.iter().enumerate() {
        let tokens = normalize(text, true).into_tokens();
        for pos in 0..tokens.len() {
            for len in [2, 1] {
                let Some(gram) = tokens.get(pos..pos + len) else {
                    continue;
                };
                if gram.iter().all(|t| query.contains(t)) {
                    continue;
                }
                let entry = stats.entry(gram.join(" ")).or_insert_with(|| {
                    seen_order += 1;
                    Stats {
                        first: seen_order,
                        freq: 0,
                        docs: HashSet::new(),
                    }
                });
                entry.freq += 1;
                entry.docs.insert(doc);
            }
        }
    }
    if stats.is_empty() {
        return Err(Error::generator("no candidates"));
    }
    let mut ranked: Vec<(String, usize, usize)> = stats
        .into_iter()
        .map(|(gram, s)| (gram, s.freq * s.docs.len(), s.first))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));
    let facets = ranked.into_iter().take(request.max_facets).map(|(g, ..)| g);
    let question = request.emit_question.then(|| TEMPLATE_QUESTION.to_string());
    Clarification::new(question, facets)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ExtractiveGenerator;

impl Generator for ExtractiveGenerator {
    fn generate(&self, request: &GeneratorRequest) -> Result<Clarification> {
        extractive_generate(request)
    }
}
