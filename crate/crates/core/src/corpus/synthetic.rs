//! Generated corpora where the class is carried by word order alone.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{LabeledCorpus, LabeledDocument, RawDocument, Vocabulary, WordSequence};
use crate::error::{invalid, Result};

/// Two-class corpus over two topics. Topic one favours the first half of the
/// vocabulary and topic two the second half. Class `A` documents draw their
/// first half from topic one and their second half from topic two; class
/// `B` documents do the reverse. Both classes share the same expected global
/// word histogram, so a bag of words cannot separate them.
#[derive(Debug, Clone)]
pub struct OrderedTopics {
    pub documents: usize,
    pub vocab_size: usize,
    pub min_len: usize,
    pub max_len: usize,
    /// Probability that a word is drawn from the active topic's half of the
    /// vocabulary rather than the other half.
    pub purity: f64,
    pub seed: u64,
}

impl Default for OrderedTopics {
    fn default() -> Self {
        Self {
            documents: 200,
            vocab_size: 10,
            min_len: 30,
            max_len: 60,
            purity: 0.85,
            seed: 2007,
        }
    }
}

impl OrderedTopics {
    pub fn generate(&self) -> Result<LabeledCorpus> {
        if self.vocab_size < 2 || !self.vocab_size.is_multiple_of(2) {
            return Err(invalid("vocabulary size must be even and at least 2"));
        }
        if self.min_len < 2 || self.min_len > self.max_len {
            return Err(invalid(
                "document lengths must satisfy 2 <= min_len <= max_len",
            ));
        }
        if !(0.0..=1.0).contains(&self.purity) {
            return Err(invalid("purity must lie in [0, 1]"));
        }
        let vocab = Vocabulary::from_tokens((1..=self.vocab_size).map(|j| format!("w{j}")))?;
        let half = self.vocab_size / 2;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut items = Vec::with_capacity(self.documents);
        for d in 0..self.documents {
            let class_a = d % 2 == 0;
            let len = rng.random_range(self.min_len..=self.max_len);
            let words = (0..len)
                .map(|pos| {
                    let first_half_of_doc = pos < len / 2;
                    let topic_one = first_half_of_doc == class_a;
                    let on_topic = rng.random_bool(self.purity);
                    let low_half = topic_one == on_topic;
                    let offset = rng.random_range(0..half);
                    if low_half {
                        1 + offset
                    } else {
                        1 + half + offset
                    }
                })
                .collect();
            items.push(LabeledDocument {
                sequence: WordSequence::new(words)?,
                label: if class_a { "A" } else { "B" }.to_string(),
            });
        }
        LabeledCorpus::new(items, Arc::new(vocab))
    }
}

/// Renders a corpus back to text, one document per entry, so it can be
/// written as a TSV corpus file.
pub fn to_raw(corpus: &LabeledCorpus) -> Vec<RawDocument> {
    corpus
        .items
        .iter()
        .map(|doc| RawDocument {
            label: doc.label.clone(),
            text: doc
                .sequence
                .indices()
                .iter()
                .map(|&i| corpus.vocabulary.token(i).unwrap_or(super::OOV_TOKEN))
                .collect::<Vec<_>>()
                .join(" "),
        })
        .collect()
}
