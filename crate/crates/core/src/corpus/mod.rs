//! Labeled sentences, label inventories and corpus statistics.

mod conll;
mod synth;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub use conll::{parse_conll, write_conll};
pub use synth::{generate_synthetic, synthetic_vocab, SynthConfig, SyntheticSplits};

/// The label every corpus may use for non-entity tokens.
pub const OUTSIDE: &str = "O";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CorpusError {
    /// 1-based line number of a non-blank line that is not exactly `word<TAB>tag`.
    MalformedLine(usize),
    EmptyCorpus,
    InvalidSentence(String),
    InvalidConfig(String),
}

impl fmt::Display for CorpusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorpusError::MalformedLine(line) => {
                write!(f, "line {line}: expected `word<TAB>tag`")
            }
            CorpusError::EmptyCorpus => f.write_str("corpus contains no sentences"),
            CorpusError::InvalidSentence(why) => write!(f, "invalid sentence: {why}"),
            CorpusError::InvalidConfig(why) => write!(f, "invalid synthetic config: {why}"),
        }
    }
}

impl core::error::Error for CorpusError {}

fn is_valid_word(word: &str) -> bool {
    !word.is_empty() && !word.chars().any(char::is_whitespace)
}

/// One sentence: words paired with their tags.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabeledSentence {
    words: Vec<String>,
    tags: Vec<String>,
}

impl LabeledSentence {
    pub fn new(words: Vec<String>, tags: Vec<String>) -> Result<Self, CorpusError> {
        if words.len() != tags.len() {
            return Err(CorpusError::InvalidSentence(alloc::format!(
                "{} words but {} tags",
                words.len(),
                tags.len()
            )));
        }
        if let Some(w) = words.iter().find(|w| !is_valid_word(w)) {
            return Err(CorpusError::InvalidSentence(alloc::format!(
                "word {w:?} is empty or contains whitespace"
            )));
        }
        if let Some(t) = tags.iter().find(|t| !is_valid_word(t)) {
            return Err(CorpusError::InvalidSentence(alloc::format!(
                "tag {t:?} is empty or contains whitespace"
            )));
        }
        Ok(Self { words, tags })
    }

    pub fn from_pairs<W: Into<String>, T: Into<String>>(
        pairs: impl IntoIterator<Item = (W, T)>,
    ) -> Result<Self, CorpusError> {
        let (words, tags) = pairs.into_iter().map(|(w, t)| (w.into(), t.into())).unzip();
        Self::new(words, tags)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn tags(&self) -> &[String] {
        &self.tags
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Split {
    Train,
    Test,
    Validation,
    Unsplit,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
            Split::Validation => "validation",
            Split::Unsplit => "unsplit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledCorpus {
    pub sentences: Vec<LabeledSentence>,
    pub split: Split,
}

impl LabeledCorpus {
    pub fn new(sentences: Vec<LabeledSentence>, split: Split) -> Self {
        Self { sentences, split }
    }

    pub fn with_split(mut self, split: Split) -> Self {
        self.split = split;
        self
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn iter(&self) -> core::slice::Iter<'_, LabeledSentence> {
        self.sentences.iter()
    }
}

/// Ordered label inventory: `"O"` first, then every other label sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSet {
    labels: Vec<String>,
    index: BTreeMap<String, usize>,
}

impl LabelSet {
    /// Builds the canonical ordering from any collection of labels; `"O"` is
    /// always included.
    pub fn from_labels<S: AsRef<str>>(labels: impl IntoIterator<Item = S>) -> Self {
        let mut rest: Vec<String> = labels
            .into_iter()
            .map(|l| String::from(l.as_ref()))
            .filter(|l| l != OUTSIDE)
            .collect();
        rest.sort();
        rest.dedup();
        let mut ordered = Vec::with_capacity(rest.len() + 1);
        ordered.push(String::from(OUTSIDE));
        ordered.extend(rest);
        Self::from_ordered(ordered).expect("canonical order is valid")
    }

    /// Accepts a label list exactly as given (e.g. decoded from a checkpoint).
    pub fn from_ordered(labels: Vec<String>) -> Result<Self, CorpusError> {
        let mut index = BTreeMap::new();
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(CorpusError::InvalidSentence(alloc::format!("duplicate label {l:?}")));
            }
        }
        if !index.contains_key(OUTSIDE) {
            return Err(CorpusError::InvalidSentence(String::from("label set lacks \"O\"")));
        }
        Ok(Self { labels, index })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn contains(&self, label: &str) -> bool {
        self.index.contains_key(label)
    }

    pub fn is_superset_of(&self, other: &LabelSet) -> bool {
        other.labels.iter().all(|l| self.contains(l))
    }
}

/// Every tag occurring in the corpus exactly once, in canonical order.
pub fn build_label_set(corpus: &LabeledCorpus) -> LabelSet {
    LabelSet::from_labels(corpus.iter().flat_map(|s| s.tags().iter()))
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CorpusStats {
    pub sentence_count: usize,
    pub token_count: usize,
    /// Tokens whose tag is not `"O"`.
    pub tag_count: usize,
    pub per_label_counts: BTreeMap<String, usize>,
}

pub fn corpus_stats(corpus: &LabeledCorpus) -> CorpusStats {
    let mut stats = CorpusStats {
        sentence_count: corpus.len(),
        ..CorpusStats::default()
    };
    for sentence in corpus.iter() {
        stats.token_count += sentence.len();
        for tag in sentence.tags() {
            *stats.per_label_counts.entry(tag.clone()).or_insert(0) += 1;
            if tag != OUTSIDE {
                stats.tag_count += 1;
            }
        }
    }
    stats
}
