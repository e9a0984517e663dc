//! Lexical TF-IDF embeddings and top-k few-shot retrieval.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::fed::FewShotExample;
use crate::text;

pub const DEFAULT_K: usize = 8;

/// Sparse L2-normalized term vector. Terms are stemmed unigrams and
/// adjacent bigrams.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EmbeddingVector {
    weights: BTreeMap<String, f64>,
}

impl EmbeddingVector {
    pub fn is_zero(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &BTreeMap<String, f64> {
        &self.weights
    }

    pub fn norm(&self) -> f64 {
        self.weights.values().map(|w| w * w).sum::<f64>().sqrt()
    }

    /// Cosine similarity; both vectors are already unit length.
    pub fn cosine(&self, other: &EmbeddingVector) -> f64 {
        let (small, large) = if self.weights.len() <= other.weights.len() {
            (self, other)
        } else {
            (other, self)
        };
        let dot: f64 = small
            .weights
            .iter()
            .filter_map(|(t, w)| large.weights.get(t).map(|v| w * v))
            .sum();
        dot.clamp(0.0, 1.0)
    }
}

/// Unigrams then bigrams, in text order.
pub fn terms(input: &str) -> Vec<String> {
    let unigrams = text::stems(input);
    let mut out = unigrams.clone();
    out.extend(unigrams.windows(2).map(|w| format!("{} {}", w[0], w[1])));
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DocumentFrequency {
    pub documents: usize,
    counts: HashMap<String, usize>,
}

impl DocumentFrequency {
    pub fn build<'a>(docs: impl IntoIterator<Item = &'a str>) -> Self {
        let mut df = DocumentFrequency::default();
        for doc in docs {
            df.documents += 1;
            let mut unique = terms(doc);
            unique.sort();
            unique.dedup();
            for t in unique {
                *df.counts.entry(t).or_insert(0) += 1;
            }
        }
        df
    }

    pub fn count(&self, term: &str) -> usize {
        self.counts.get(term).copied().unwrap_or(0)
    }

    /// Smoothed inverse document frequency, `ln((N+1)/(df+1)) + 1`.
    pub fn idf(&self, term: &str) -> f64 {
        ((self.documents as f64 + 1.0) / (self.count(term) as f64 + 1.0)).ln() + 1.0
    }
}

pub fn embed(input: &str, df: &DocumentFrequency) -> EmbeddingVector {
    let mut tf: BTreeMap<String, f64> = BTreeMap::new();
    for t in terms(input) {
        *tf.entry(t).or_insert(0.0) += 1.0;
    }
    let mut weights: BTreeMap<String, f64> = tf
        .into_iter()
        .map(|(t, count)| {
            let w = count * df.idf(&t);
            (t, w)
        })
        .collect();
    let norm = weights.values().map(|w| w * w).sum::<f64>().sqrt();
    if norm > 0.0 {
        for w in weights.values_mut() {
            *w /= norm;
        }
    }
    EmbeddingVector { weights }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RetrievalError {
    #[error("retrieval index is empty")]
    EmptyIndex,
    #[error("k must be at least 1")]
    ZeroK,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scored {
    /// Position of the example in the index.
    pub position: usize,
    pub example: FewShotExample,
    pub score: f64,
}

/// One vector per few-shot example; rebuilt whenever the dataset changes.
#[derive(Debug, Clone)]
pub struct RetrievalIndex {
    examples: Vec<FewShotExample>,
    vectors: Vec<EmbeddingVector>,
    df: DocumentFrequency,
    pub k_default: usize,
}

impl RetrievalIndex {
    pub fn build(examples: Vec<FewShotExample>) -> Self {
        let df = DocumentFrequency::build(examples.iter().map(|e| e.nlc.as_str()));
        let vectors = examples.iter().map(|e| embed(&e.nlc, &df)).collect();
        RetrievalIndex {
            examples,
            vectors,
            df,
            k_default: DEFAULT_K,
        }
    }

    pub fn examples(&self) -> &[FewShotExample] {
        &self.examples
    }

    pub fn vectors(&self) -> &[EmbeddingVector] {
        &self.vectors
    }

    pub fn document_frequency(&self) -> &DocumentFrequency {
        &self.df
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn embed(&self, query: &str) -> EmbeddingVector {
        embed(query, &self.df)
    }

    /// The `k` best examples by cosine, highest first; ties go to the
    /// example that comes first in the dataset.
    pub fn top_k(&self, query: &str, k: usize) -> Result<Vec<Scored>, RetrievalError> {
        if k == 0 {
            return Err(RetrievalError::ZeroK);
        }
        if self.examples.is_empty() {
            return Err(RetrievalError::EmptyIndex);
        }
        let q = self.embed(query);
        // Min-heap of the current best k: the heap top is the weakest kept hit.
        let mut heap: BinaryHeap<Hit> = BinaryHeap::with_capacity(k + 1);
        for (position, v) in self.vectors.iter().enumerate() {
            let hit = Hit {
                score: q.cosine(v),
                position,
            };
            if heap.len() < k {
                heap.push(hit);
            } else if hit < *heap.peek().expect("heap holds k items") {
                heap.pop();
                heap.push(hit);
            }
        }
        Ok(heap
            .into_sorted_vec()
            .into_iter()
            .map(|h| Scored {
                position: h.position,
                example: self.examples[h.position].clone(),
                score: h.score,
            })
            .collect())
    }
}

// Ordered so that "better" hits compare as smaller: higher score first,
// then lower position.
#[derive(Debug, Clone, Copy)]
struct Hit {
    score: f64,
    position: usize,
}

impl PartialEq for Hit {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Hit {}

impl PartialOrd for Hit {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Hit {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .score
            .total_cmp(&self.score)
            .then(self.position.cmp(&other.position))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fed::Source;

    fn ex(nlc: &str, ce: &str) -> FewShotExample {
        FewShotExample {
            nlc: nlc.into(),
            ce: ce.into(),
            value: None,
            app: "t".into(),
            source: Source::Template,
        }
    }

    #[test]
    fn self_similarity_is_one() {
        let df = DocumentFrequency::build(["change the margins to narrow", "create a new folder"]);
        for t in ["change the margins to narrow", "zebra", "a b c d"] {
            let v = embed(t, &df);
            assert!((v.norm() - 1.0).abs() < 1e-12);
            assert!((v.cosine(&v) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn disjoint_texts_are_orthogonal() {
        let df = DocumentFrequency::build(["alpha beta", "gamma delta"]);
        assert_eq!(embed("alpha beta", &df).cosine(&embed("gamma delta", &df)), 0.0);
    }

    #[test]
    fn empty_text_is_the_zero_vector() {
        let df = DocumentFrequency::build(["alpha"]);
        let v = embed("  ...  ", &df);
        assert!(v.is_zero());
        assert_eq!(v.cosine(&embed("alpha", &df)), 0.0);
    }

    #[test]
    fn bigrams_are_emitted() {
        assert_eq!(terms("Font Size up"), ["font", "size", "up", "font size", "size up"]);
    }

    #[test]
    fn idf_is_smoothed() {
        let df = DocumentFrequency::build(["a b", "a c"]);
        assert!((df.idf("a") - ((3.0f64 / 3.0).ln() + 1.0)).abs() < 1e-15);
        assert!((df.idf("b") - ((3.0f64 / 2.0).ln() + 1.0)).abs() < 1e-15);
        assert!((df.idf("zzz") - (3.0f64.ln() + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn verbatim_query_ranks_first() {
        let index = RetrievalIndex::build(vec![
            ex("Create a new folder.", "new item"),
            ex("Change the Margins to Narrow.", "Margins"),
            ex("Change the Margins to Wide.", "Margins"),
        ]);
        let hits = index.top_k("Change the Margins to Narrow.", 2).unwrap();
        assert_eq!(hits[0].position, 1);
        assert!((hits[0].score - 1.0).abs() < 1e-12);
        assert_eq!(hits.len(), 2);
    }

    #[test]
    fn ties_break_by_position() {
        let index = RetrievalIndex::build(vec![ex("same words", "a"), ex("other", "b"), ex("same words", "c")]);
        let hits = index.top_k("same words", 3).unwrap();
        let order: Vec<_> = hits.iter().map(|h| h.position).collect();
        assert_eq!(order, [0, 2, 1]);
    }

    #[test]
    fn short_index_returns_everything() {
        let index = RetrievalIndex::build(vec![ex("one", "a")]);
        assert_eq!(index.top_k("one", 8).unwrap().len(), 1);
    }

    #[test]
    fn errors() {
        let empty = RetrievalIndex::build(vec![]);
        assert_eq!(empty.top_k("x", 3).unwrap_err(), RetrievalError::EmptyIndex);
        let index = RetrievalIndex::build(vec![ex("one", "a")]);
        assert_eq!(index.top_k("x", 0).unwrap_err(), RetrievalError::ZeroK);
    }
}
