//! Vocab tables and segmentation of words into model inputs.
//!
//! Two segmentation modes share one output type, [`SubwordEncoding`]:
//! word mode maps each word to one id (the baseline), subword mode applies
//! greedy longest-match-first WordPiece. Both keep a `word_ids` map from
//! subtoken position to source word so labels can be aligned either way.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::corpus::LabeledCorpus;

pub const DEFAULT_CONTINUATION_PREFIX: &str = "##";
pub const DEFAULT_MAX_WORD_CHARS: usize = 100;
pub const DEFAULT_UNK: &str = "[UNK]";
pub const DEFAULT_PAD: &str = "[PAD]";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenizerError {
    /// Token and the zero-based line on which it appeared a second time.
    DuplicateToken {
        token: String,
        line: usize,
    },
    MissingSpecial(String),
    InvariantViolation {
        sentence: usize,
        reason: String,
    },
}

impl fmt::Display for TokenizerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenizerError::DuplicateToken { token, line } => {
                write!(f, "duplicate token {token:?} on line {}", line + 1)
            }
            TokenizerError::MissingSpecial(tok) => write!(f, "special token {tok:?} missing from vocab"),
            TokenizerError::InvariantViolation { sentence, reason } => {
                write!(f, "sentence {sentence}: {reason}")
            }
        }
    }
}

impl core::error::Error for TokenizerError {}

/// Token string <-> id table. Ids are the zero-based line numbers of the
/// source file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    id_of: BTreeMap<String, u32>,
    tokens: Vec<String>,
    unk_token: String,
    pad_token: String,
    continuation_prefix: String,
    max_word_chars: usize,
}

impl Vocab {
    pub fn from_tokens(
        tokens: Vec<String>,
        unk_token: &str,
        pad_token: &str,
        continuation_prefix: &str,
    ) -> Result<Self, TokenizerError> {
        let mut id_of = BTreeMap::new();
        for (line, tok) in tokens.iter().enumerate() {
            if id_of.insert(tok.clone(), line as u32).is_some() {
                return Err(TokenizerError::DuplicateToken {
                    token: tok.clone(),
                    line,
                });
            }
        }
        for special in [unk_token, pad_token] {
            if !id_of.contains_key(special) {
                return Err(TokenizerError::MissingSpecial(String::from(special)));
            }
        }
        Ok(Self {
            id_of,
            tokens,
            unk_token: String::from(unk_token),
            pad_token: String::from(pad_token),
            continuation_prefix: String::from(continuation_prefix),
            max_word_chars: DEFAULT_MAX_WORD_CHARS,
        })
    }

    /// Parses `vocab.txt` text: one token per line, `\n` separated, an
    /// optional trailing newline, `\r\n` tolerated.
    pub fn from_text(
        text: &str,
        unk_token: &str,
        pad_token: &str,
        continuation_prefix: &str,
    ) -> Result<Self, TokenizerError> {
        let body = text.strip_suffix('\n').unwrap_or(text);
        let tokens = if body.is_empty() {
            Vec::new()
        } else {
            body.split('\n')
                .map(|l| String::from(l.strip_suffix('\r').unwrap_or(l)))
                .collect()
        };
        Self::from_tokens(tokens, unk_token, pad_token, continuation_prefix)
    }

    pub fn with_max_word_chars(mut self, max: usize) -> Self {
        self.max_word_chars = max;
        self
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.id_of.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn unk_token(&self) -> &str {
        &self.unk_token
    }

    pub fn pad_token(&self) -> &str {
        &self.pad_token
    }

    pub fn unk_id(&self) -> u32 {
        self.id_of[&self.unk_token]
    }

    pub fn pad_id(&self) -> u32 {
        self.id_of[&self.pad_token]
    }

    pub fn continuation_prefix(&self) -> &str {
        &self.continuation_prefix
    }

    pub fn max_word_chars(&self) -> usize {
        self.max_word_chars
    }

    /// FNV-1a over the token list and special-token settings; identifies the
    /// vocab a checkpoint was trained with.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv1a::new();
        for tok in &self.tokens {
            h.write(tok.as_bytes());
            h.write(&[0xff]);
        }
        h.write(self.unk_token.as_bytes());
        h.write(&[0xfe]);
        h.write(self.pad_token.as_bytes());
        h.write(&[0xfe]);
        h.write(self.continuation_prefix.as_bytes());
        h.write(&(self.max_word_chars as u64).to_le_bytes());
        h.finish()
    }
}

/// 64-bit FNV-1a.
#[derive(Debug, Clone)]
pub struct Fnv1a(u64);

impl Fnv1a {
    pub fn new() -> Self {
        Fnv1a(0xcbf2_9ce4_8422_2325)
    }

    pub fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    pub fn finish(&self) -> u64 {
        self.0
    }
}

impl Default for Fnv1a {
    fn default() -> Self {
        Self::new()
    }
}

/// Word-level vocab for the baseline: `[PAD]`=0, `[UNK]`=1, then every word
/// with frequency >= `min_freq` in first-occurrence order.
pub fn build_word_vocab(corpus: &LabeledCorpus, min_freq: usize) -> Vocab {
    let min_freq = min_freq.max(1);
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut order: Vec<&str> = Vec::new();
    for word in corpus.iter().flat_map(|s| s.words()) {
        let c = counts.entry(word.as_str()).or_insert(0);
        if *c == 0 {
            order.push(word);
        }
        *c += 1;
    }
    let mut tokens = Vec::with_capacity(order.len() + 2);
    tokens.push(String::from(DEFAULT_PAD));
    tokens.push(String::from(DEFAULT_UNK));
    tokens.extend(
        order
            .into_iter()
            .filter(|w| counts[w] >= min_freq && *w != DEFAULT_PAD && *w != DEFAULT_UNK)
            .map(String::from),
    );
    Vocab::from_tokens(tokens, DEFAULT_UNK, DEFAULT_PAD, DEFAULT_CONTINUATION_PREFIX)
        .expect("word vocab entries are distinct")
}

/// Greedy longest-match-first WordPiece ids for one word; `None` means the
/// whole word maps to the unknown token.
fn wordpiece_ids(word: &str, vocab: &Vocab) -> Option<Vec<u32>> {
    // Byte offsets of every char boundary, including the end.
    let bounds: Vec<usize> = word
        .char_indices()
        .map(|(i, _)| i)
        .chain(core::iter::once(word.len()))
        .collect();
    let n_chars = bounds.len() - 1;
    if n_chars == 0 || n_chars > vocab.max_word_chars {
        return None;
    }
    let mut ids = Vec::new();
    let mut candidate = String::new();
    let mut start = 0;
    while start < n_chars {
        let mut found = None;
        let mut end = n_chars;
        while end > start {
            candidate.clear();
            if start > 0 {
                candidate.push_str(&vocab.continuation_prefix);
            }
            candidate.push_str(&word[bounds[start]..bounds[end]]);
            if let Some(id) = vocab.id(&candidate) {
                found = Some(id);
                break;
            }
            end -= 1;
        }
        ids.push(found?);
        start = end;
    }
    Some(ids)
}

/// Splits a word into vocab pieces by greedy longest match; any position
/// without a match, or a word longer than `max_word_chars` characters,
/// yields `[unk_token]`.
pub fn wordpiece_word(word: &str, vocab: &Vocab) -> Vec<String> {
    match wordpiece_ids(word, vocab) {
        Some(ids) => ids
            .into_iter()
            .map(|id| String::from(vocab.token(id).expect("id from vocab")))
            .collect(),
        None => alloc::vec![vocab.unk_token.clone()],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Subword,
    Word,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Subword => "subword",
            Mode::Word => "word",
        }
    }
}

/// Subtokens of one sentence plus the map back to source words.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash)]
pub struct SubwordEncoding {
    pub subtokens: Vec<String>,
    pub ids: Vec<u32>,
    /// Source-word index of each subtoken; non-decreasing, no gaps.
    pub word_ids: Vec<usize>,
}

impl SubwordEncoding {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Number of source words, i.e. `1 + max(word_ids)`.
    pub fn word_count(&self) -> usize {
        self.word_ids.last().map_or(0, |w| w + 1)
    }

    /// Subtoken position range of every word.
    pub fn word_spans(&self) -> Vec<core::ops::Range<usize>> {
        let mut spans: Vec<core::ops::Range<usize>> = Vec::with_capacity(self.word_count());
        for (pos, &w) in self.word_ids.iter().enumerate() {
            if w == spans.len() {
                spans.push(pos..pos + 1);
            } else {
                spans[w].end = pos + 1;
            }
        }
        spans
    }

    /// Checks the structural invariants: equal lengths, `word_ids` starting at
    /// 0 and growing by at most one per step.
    pub fn validate(&self) -> Result<(), String> {
        if self.subtokens.len() != self.ids.len() || self.ids.len() != self.word_ids.len() {
            return Err(format!(
                "length mismatch: {} subtokens, {} ids, {} word_ids",
                self.subtokens.len(),
                self.ids.len(),
                self.word_ids.len()
            ));
        }
        let mut expected_next = 0usize;
        for (pos, &w) in self.word_ids.iter().enumerate() {
            if w + 1 == expected_next {
                continue;
            }
            if w == expected_next {
                expected_next += 1;
                continue;
            }
            if w < expected_next {
                return Err(format!("word_ids not non-decreasing at position {pos}"));
            }
            return Err(format!(
                "word index {} never appears (position {pos} jumps to {w})",
                expected_next
            ));
        }
        Ok(())
    }
}

/// Segments pre-split words in either mode. No `[CLS]`/`[SEP]` are added.
pub fn segment_sentence<S: AsRef<str>>(words: &[S], vocab: &Vocab, mode: Mode) -> SubwordEncoding {
    let mut enc = SubwordEncoding::default();
    for (wi, word) in words.iter().enumerate() {
        let word = word.as_ref();
        match mode {
            Mode::Word => {
                enc.subtokens.push(String::from(word));
                enc.ids.push(vocab.id(word).unwrap_or_else(|| vocab.unk_id()));
                enc.word_ids.push(wi);
            }
            Mode::Subword => match wordpiece_ids(word, vocab) {
                Some(ids) => {
                    for id in ids {
                        enc.subtokens
                            .push(String::from(vocab.token(id).expect("id from vocab")));
                        enc.ids.push(id);
                        enc.word_ids.push(wi);
                    }
                }
                None => {
                    enc.subtokens.push(vocab.unk_token.clone());
                    enc.ids.push(vocab.unk_id());
                    enc.word_ids.push(wi);
                }
            },
        }
    }
    enc
}

/// A vocab together with the segmentation mode it is used in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segmenter {
    pub vocab: Vocab,
    pub mode: Mode,
}

impl Segmenter {
    pub fn new(vocab: Vocab, mode: Mode) -> Self {
        Self { vocab, mode }
    }

    pub fn segment<S: AsRef<str>>(&self, words: &[S]) -> SubwordEncoding {
        segment_sentence(words, &self.vocab, self.mode)
    }

    pub fn segment_corpus(&self, corpus: &LabeledCorpus) -> Vec<SubwordEncoding> {
        corpus.iter().map(|s| self.segment(s.words())).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FertilityStats {
    pub words_total: usize,
    pub subtokens_total: usize,
    /// `subtokens_total / words_total`; 1.0 for an empty corpus.
    pub fertility: f64,
    /// Fraction of words that became the single unknown token.
    pub unk_word_rate: f64,
    /// Sentence length in subtokens -> number of sentences.
    pub length_histogram: BTreeMap<usize, usize>,
}

/// Statistics over already segmented sentences. A word counts as unknown
/// when it is a single subtoken equal to `unk_id`.
pub fn fertility_from_encodings<'a>(
    encodings: impl IntoIterator<Item = &'a SubwordEncoding>,
    unk_id: Option<u32>,
) -> FertilityStats {
    let mut stats = FertilityStats::default();
    let mut unk_words = 0usize;
    for enc in encodings {
        stats.words_total += enc.word_count();
        stats.subtokens_total += enc.len();
        *stats.length_histogram.entry(enc.len()).or_insert(0) += 1;
        if let Some(unk) = unk_id {
            unk_words += enc
                .word_spans()
                .iter()
                .filter(|r| r.len() == 1 && enc.ids[r.start] == unk)
                .count();
        }
    }
    if stats.words_total == 0 {
        stats.fertility = 1.0;
    } else {
        stats.fertility = stats.subtokens_total as f64 / stats.words_total as f64;
        stats.unk_word_rate = unk_words as f64 / stats.words_total as f64;
    }
    stats
}

pub fn fertility_stats(corpus: &LabeledCorpus, vocab: &Vocab, mode: Mode) -> FertilityStats {
    let encodings: Vec<SubwordEncoding> = corpus
        .iter()
        .map(|s| segment_sentence(s.words(), vocab, mode))
        .collect();
    fertility_from_encodings(&encodings, Some(vocab.unk_id()))
}

/// Validates externally produced encodings (e.g. SentencePiece or BPE
/// output) sentence by sentence; `sentence` in errors is 1-based.
pub fn validate_external(encodings: &[SubwordEncoding]) -> Result<(), TokenizerError> {
    for (i, enc) in encodings.iter().enumerate() {
        enc.validate().map_err(|reason| TokenizerError::InvariantViolation {
            sentence: i + 1,
            reason,
        })?;
    }
    Ok(())
}

/// Checks that each encoding covers exactly the words of its sentence.
pub fn check_alignment_with(corpus: &LabeledCorpus, encodings: &[SubwordEncoding]) -> Result<(), TokenizerError> {
    if corpus.len() != encodings.len() {
        return Err(TokenizerError::InvariantViolation {
            sentence: corpus.len().min(encodings.len()) + 1,
            reason: format!("{} sentences in corpus but {} encodings", corpus.len(), encodings.len()),
        });
    }
    for (i, (s, enc)) in corpus.iter().zip(encodings).enumerate() {
        if enc.word_count() != s.len() {
            return Err(TokenizerError::InvariantViolation {
                sentence: i + 1,
                reason: format!("{} words but encoding covers {}", s.len(), enc.word_count()),
            });
        }
    }
    Ok(())
}
