//! Turning raw text into word sequences over a shared vocabulary.
//!
//! Vocabulary indices are 1-based everywhere in the public interface: the
//! first token of a vocabulary of size `|V|` has index 1 and the last has
//! index `|V|`.

mod io;
pub mod synthetic;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};

pub use io::{
    load_raw_corpus, read_label_dirs, read_tsv, read_vocabulary, write_vocabulary, RawDocument,
};

/// Token reserved for out-of-vocabulary words. Tokenization never produces
/// angle brackets, so it cannot collide with a real token.
pub const OOV_TOKEN: &str = "<oov>";

/// Settings for [`tokenize`].
#[derive(Debug, Clone)]
pub struct TokenizerConfig {
    pub lowercase: bool,
    pub stopwords: HashSet<String>,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        Self {
            lowercase: true,
            stopwords: HashSet::new(),
        }
    }
}

/// Splits `text` on runs of non-alphanumeric characters.
pub fn tokenize(text: &str, config: &TokenizerConfig) -> Vec<String> {
    text.split(|ch: char| !ch.is_alphanumeric())
        .filter(|tok| !tok.is_empty())
        .map(|tok| {
            if config.lowercase {
                tok.to_lowercase()
            } else {
                tok.to_string()
            }
        })
        .filter(|tok| !config.stopwords.contains(tok))
        .collect()
}

/// Bijection between token strings and the indices `1..=|V|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    token_to_index: HashMap<String, usize>,
    index_to_token: Vec<String>,
    oov: Option<usize>,
}

impl Vocabulary {
    /// Builds a vocabulary from tokens listed in index order (index 1 first).
    pub fn from_tokens<I, S>(tokens: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut token_to_index = HashMap::new();
        let mut index_to_token = Vec::new();
        let mut oov = None;
        for tok in tokens {
            let tok = tok.into();
            let index = index_to_token.len() + 1;
            if token_to_index.insert(tok.clone(), index).is_some() {
                return Err(invalid(format!("duplicate vocabulary token {tok:?}")));
            }
            if tok == OOV_TOKEN {
                oov = Some(index);
            }
            index_to_token.push(tok);
        }
        if index_to_token.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        Ok(Self {
            token_to_index,
            index_to_token,
            oov,
        })
    }

    pub fn size(&self) -> usize {
        self.index_to_token.len()
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.token_to_index.get(token).copied()
    }

    /// Token at 1-based `index`.
    pub fn token(&self, index: usize) -> Option<&str> {
        index
            .checked_sub(1)
            .and_then(|i| self.index_to_token.get(i))
            .map(String::as_str)
    }

    /// Index of the out-of-vocabulary sentinel, if this vocabulary has one.
    pub fn oov_index(&self) -> Option<usize> {
        self.oov
    }

    /// `(index, token)` pairs in index order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &str)> {
        self.index_to_token
            .iter()
            .enumerate()
            .map(|(i, t)| (i + 1, t.as_str()))
    }
}

/// Assigns indices to tokens seen at least `min_count` times, in order of
/// first occurrence. When `min_count > 1` the OOV sentinel takes the last
/// index.
pub fn build_vocabulary<S: AsRef<str>>(
    documents: &[Vec<S>],
    min_count: usize,
) -> Result<Vocabulary> {
    if min_count == 0 {
        return Err(invalid("min_count must be at least 1"));
    }
    let mut order: Vec<&str> = Vec::new();
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for tok in documents.iter().flatten() {
        let tok = tok.as_ref();
        let count = counts.entry(tok).or_insert(0);
        if *count == 0 {
            order.push(tok);
        }
        *count += 1;
    }
    let kept: Vec<&str> = order
        .into_iter()
        .filter(|tok| counts[tok] >= min_count)
        .collect();
    if kept.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    let sentinel = (min_count > 1).then_some(OOV_TOKEN);
    Vocabulary::from_tokens(kept.into_iter().chain(sentinel))
}

/// A document as a nonempty list of 1-based vocabulary indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WordSequence(Vec<usize>);

impl WordSequence {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::NoInVocabularyWords);
        }
        if indices.contains(&0) {
            return Err(invalid("vocabulary indices are 1-based"));
        }
        Ok(Self(indices))
    }

    /// Document length `N`.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    /// Largest index used; a lower bound on the vocabulary size.
    pub fn max_index(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }

    pub(crate) fn check_vocab(&self, vocab_size: usize) -> Result<()> {
        if self.max_index() > vocab_size {
            return Err(invalid(format!(
                "word index {} exceeds vocabulary size {vocab_size}",
                self.max_index()
            )));
        }
        Ok(())
    }
}

/// Maps tokens to indices. Unknown tokens go to the OOV sentinel when the
/// vocabulary has one and are dropped otherwise.
pub fn encode<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary) -> Result<WordSequence> {
    let indices: Vec<usize> = tokens
        .iter()
        .filter_map(|tok| vocab.index_of(tok.as_ref()).or(vocab.oov_index()))
        .collect();
    WordSequence::new(indices)
}

pub fn decode<'v>(sequence: &WordSequence, vocab: &'v Vocabulary) -> Result<Vec<&'v str>> {
    sequence
        .indices()
        .iter()
        .map(|&i| {
            vocab
                .token(i)
                .ok_or_else(|| invalid(format!("index {i} not in vocabulary")))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledDocument {
    pub sequence: WordSequence,
    pub label: String,
}

/// Labeled word sequences sharing one vocabulary.
#[derive(Debug, Clone)]
pub struct LabeledCorpus {
    pub items: Vec<LabeledDocument>,
    pub vocabulary: Arc<Vocabulary>,
}

impl LabeledCorpus {
    pub fn new(items: Vec<LabeledDocument>, vocabulary: Arc<Vocabulary>) -> Result<Self> {
        for item in &items {
            item.sequence.check_vocab(vocabulary.size())?;
        }
        Ok(Self { items, vocabulary })
    }

    /// Tokenizes and encodes raw documents. Documents with no in-vocabulary
    /// words are left out; their positions in `raw` are returned alongside.
    pub fn from_raw(
        raw: &[RawDocument],
        tokenizer: &TokenizerConfig,
        vocabulary: Arc<Vocabulary>,
    ) -> (Self, Vec<usize>) {
        let mut items = Vec::with_capacity(raw.len());
        let mut skipped = Vec::new();
        for (pos, doc) in raw.iter().enumerate() {
            match encode(&tokenize(&doc.text, tokenizer), &vocabulary) {
                Ok(sequence) => items.push(LabeledDocument {
                    sequence,
                    label: doc.label.clone(),
                }),
                Err(_) => skipped.push(pos),
            }
        }
        (Self { items, vocabulary }, skipped)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocabulary.size()
    }

    /// Distinct labels in sorted order.
    pub fn labels(&self) -> Vec<String> {
        let set: std::collections::BTreeSet<&str> =
            self.items.iter().map(|d| d.label.as_str()).collect();
        set.into_iter().map(str::to_string).collect()
    }

    fn subset(&self, positions: &[usize]) -> Self {
        Self {
            items: positions.iter().map(|&i| self.items[i].clone()).collect(),
            vocabulary: Arc::clone(&self.vocabulary),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplitMode {
    /// Uniformly random subset.
    Random,
    /// Per-label quotas proportional to label frequency.
    #[default]
    Stratified,
}

/// Splits into train and test parts holding `train_fraction` of the items
/// (rounded) in the train part.
pub fn split_corpus(
    corpus: &LabeledCorpus,
    train_fraction: f64,
    seed: u64,
    mode: SplitMode,
) -> Result<(LabeledCorpus, LabeledCorpus)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(invalid(format!(
            "train fraction {train_fraction} must lie strictly between 0 and 1"
        )));
    }
    let train_size = (train_fraction * corpus.len() as f64).round() as usize;
    split_by_count(corpus, train_size, seed, mode)
}

/// Like [`split_corpus`] with an explicit train-set size. Both parts keep
/// the original corpus order.
pub fn split_by_count(
    corpus: &LabeledCorpus,
    train_size: usize,
    seed: u64,
    mode: SplitMode,
) -> Result<(LabeledCorpus, LabeledCorpus)> {
    let n = corpus.len();
    if n < 2 {
        return Err(invalid("corpus needs at least two items to split"));
    }
    if train_size == 0 || train_size >= n {
        return Err(invalid(format!(
            "train size {train_size} must be between 1 and {} for a corpus of {n}",
            n - 1
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = match mode {
        SplitMode::Random => {
            let mut all: Vec<usize> = (0..n).collect();
            all.shuffle(&mut rng);
            all.truncate(train_size);
            all
        }
        SplitMode::Stratified => {
            let mut by_label: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
            for (i, doc) in corpus.items.iter().enumerate() {
                by_label.entry(doc.label.as_str()).or_default().push(i);
            }
            let sizes: Vec<usize> = by_label.values().map(Vec::len).collect();
            let quotas = proportional_quotas(&sizes, train_size);
            let mut chosen = Vec::with_capacity(train_size);
            for (mut members, quota) in by_label.into_values().zip(quotas) {
                members.shuffle(&mut rng);
                chosen.extend_from_slice(&members[..quota]);
            }
            chosen
        }
    };
    chosen.sort_unstable();
    let mut in_train = vec![false; n];
    for &i in &chosen {
        in_train[i] = true;
    }
    let rest: Vec<usize> = (0..n).filter(|&i| !in_train[i]).collect();
    Ok((corpus.subset(&chosen), corpus.subset(&rest)))
}

/// Largest-remainder apportionment of `total` over groups of the given
/// sizes. Remainder ties go to the earlier group.
fn proportional_quotas(sizes: &[usize], total: usize) -> Vec<usize> {
    let n: usize = sizes.iter().sum();
    let mut quotas: Vec<usize> = sizes.iter().map(|&s| s * total / n).collect();
    let mut remainders: Vec<(usize, usize)> = sizes
        .iter()
        .enumerate()
        .map(|(g, &s)| (s * total % n, g))
        .collect();
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut left = total - quotas.iter().sum::<usize>();
    for (_, g) in remainders {
        if left == 0 {
            break;
        }
        if quotas[g] < sizes[g] {
            quotas[g] += 1;
            left -= 1;
        }
    }
    quotas
}
