//! Synthetic corpus in which an entity word is `stem + suffix` and the
//! suffix alone decides the entity class. Test and validation entities draw
//! their stems from a held-out pool at a configurable rate, which makes them
//! out-of-vocabulary for a word-level tokenizer while their suffix remains a
//! known subword piece.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{CorpusError, LabeledCorpus, LabeledSentence, Split, OUTSIDE};
use crate::rng::SplitMix64;

const FILLERS: &[&str] = &[
    "ani", "ahe", "hote", "madhye", "yethe", "tyanni", "sangitle", "kele", "aaj", "nantar", "saathi", "mhanun", "pan",
    "ek", "don", "navin", "motha", "lok", "kaam", "vel", "divas", "paus", "shala", "ghar", "raste", "pani", "bajar",
    "sabha", "prashna", "uttar", "yojana", "vikas", "khel", "baatmi", "mahiti", "kadhi", "sarva", "kahi", "tithe",
    "yeil",
];

const CONSONANTS: &[u8] = b"bcdfghjklmnprstvy";
const VOWELS: &[u8] = b"aeiou";

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    /// Entity class names; tags are emitted as `B-<class>`.
    pub classes: Vec<String>,
    pub stems_per_class: usize,
    /// Suffix inventory per class, in the same order as `classes`.
    pub suffixes: Vec<Vec<String>>,
    pub n_train: usize,
    pub n_validation: usize,
    pub n_test: usize,
    pub len_min: usize,
    pub len_max: usize,
    /// Probability that a test/validation entity uses a stem never seen in train.
    pub oov_rate: f64,
    /// Probability that a sentence position holds an entity.
    pub entity_rate: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            classes: ["NEL", "NEP", "NEO"].iter().map(|s| String::from(*s)).collect(),
            stems_per_class: 30,
            suffixes: [&["pur", "nagar"][..], &["rao", "kar"][..], &["sena", "dal"][..]]
                .iter()
                .map(|v| v.iter().map(|s| String::from(*s)).collect())
                .collect(),
            n_train: 400,
            n_validation: 100,
            n_test: 200,
            len_min: 5,
            len_max: 12,
            oov_rate: 0.6,
            entity_rate: 0.3,
            seed: 13,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), CorpusError> {
        let bad = |why: String| Err(CorpusError::InvalidConfig(why));
        if self.classes.is_empty() {
            return bad("no entity classes".into());
        }
        if self.stems_per_class == 0 {
            return bad("stems_per_class must be at least 1".into());
        }
        if self.suffixes.len() != self.classes.len() {
            return bad(format!(
                "{} classes but {} suffix groups",
                self.classes.len(),
                self.suffixes.len()
            ));
        }
        for (class, group) in self.classes.iter().zip(&self.suffixes) {
            if group.is_empty() {
                return bad(format!("class {class} has an empty suffix inventory"));
            }
            if let Some(s) = group
                .iter()
                .find(|s| s.is_empty() || !s.chars().all(|c| c.is_ascii_lowercase()))
            {
                return bad(format!("suffix {s:?} must be non-empty lowercase ascii"));
            }
        }
        let all: Vec<(usize, &String)> = self
            .suffixes
            .iter()
            .enumerate()
            .flat_map(|(c, g)| g.iter().map(move |s| (c, s)))
            .collect();
        for &(ca, a) in &all {
            for &(cb, b) in &all {
                if ca != cb && b.ends_with(a.as_str()) {
                    return bad(format!(
                        "suffix {a:?} ends suffix {b:?} of another class; classes would be ambiguous"
                    ));
                }
            }
        }
        if self.len_min == 0 || self.len_min > self.len_max {
            return bad("need 1 <= len_min <= len_max".into());
        }
        if !(0.0..=1.0).contains(&self.oov_rate) || !(0.0..=1.0).contains(&self.entity_rate) {
            return bad("rates must lie in [0, 1]".into());
        }
        if self.n_train == 0 {
            return bad("n_train must be at least 1".into());
        }
        Ok(())
    }
}

/// Words the generator draws from; also the source of the matching vocab.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    pub classes: Vec<String>,
    pub suffixes: Vec<Vec<String>>,
    pub fillers: Vec<String>,
    pub train_stems: Vec<Vec<String>>,
    pub heldout_stems: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSplits {
    pub train: LabeledCorpus,
    pub validation: LabeledCorpus,
    pub test: LabeledCorpus,
    pub lexicon: Lexicon,
}

fn random_stem(rng: &mut SplitMix64) -> String {
    let syllables = rng.range_inclusive(2, 3);
    let mut s = String::new();
    for _ in 0..syllables {
        s.push(CONSONANTS[rng.below(CONSONANTS.len())] as char);
        s.push(VOWELS[rng.below(VOWELS.len())] as char);
    }
    s
}

/// True when greedy longest-match could prefer `longer` over `shorter` while
/// segmenting `shorter + suffix`.
fn shadows(longer: &str, shorter: &str, suffixes: &[&str]) -> bool {
    longer.len() > shorter.len()
        && longer.starts_with(shorter)
        && suffixes.iter().any(|s| s.starts_with(&longer[shorter.len()..]))
}

pub fn generate_synthetic(config: &SynthConfig, seed: u64) -> Result<SyntheticSplits, CorpusError> {
    config.validate()?;
    let mut rng = SplitMix64::new(seed);
    let all_suffixes: Vec<&str> = config.suffixes.iter().flatten().map(String::as_str).collect();

    let fillers: Vec<String> = FILLERS
        .iter()
        .filter(|f| !all_suffixes.iter().any(|s| f.ends_with(s)))
        .map(|f| String::from(*f))
        .collect();

    let mut taken: BTreeSet<String> = fillers.iter().cloned().collect();
    let mut accepted: Vec<String> = fillers.clone();
    let mut draw_pool = |rng: &mut SplitMix64| -> Result<Vec<String>, CorpusError> {
        let mut pool = Vec::with_capacity(config.stems_per_class);
        let mut attempts = 0usize;
        while pool.len() < config.stems_per_class {
            attempts += 1;
            if attempts > 1000 * config.stems_per_class + 10_000 {
                return Err(CorpusError::InvalidConfig(
                    "could not draw enough distinct stems".into(),
                ));
            }
            let stem = random_stem(rng);
            if taken.contains(&stem)
                || all_suffixes.iter().any(|s| stem.ends_with(s))
                || accepted
                    .iter()
                    .any(|a| shadows(&stem, a, &all_suffixes) || shadows(a, &stem, &all_suffixes))
            {
                continue;
            }
            taken.insert(stem.clone());
            accepted.push(stem.clone());
            pool.push(stem);
        }
        Ok(pool)
    };

    let mut train_stems = Vec::new();
    let mut heldout_stems = Vec::new();
    for _ in &config.classes {
        train_stems.push(draw_pool(&mut rng)?);
        heldout_stems.push(draw_pool(&mut rng)?);
    }

    let lexicon = Lexicon {
        classes: config.classes.clone(),
        suffixes: config.suffixes.clone(),
        fillers,
        train_stems,
        heldout_stems,
    };

    let mut train_rng = rng.fork();
    let mut val_rng = rng.fork();
    let mut test_rng = rng.fork();
    let train = make_split(config, &lexicon, config.n_train, 0.0, Split::Train, &mut train_rng)?;
    let validation = make_split(
        config,
        &lexicon,
        config.n_validation,
        config.oov_rate,
        Split::Validation,
        &mut val_rng,
    )?;
    let test = make_split(
        config,
        &lexicon,
        config.n_test,
        config.oov_rate,
        Split::Test,
        &mut test_rng,
    )?;
    Ok(SyntheticSplits {
        train,
        validation,
        test,
        lexicon,
    })
}

fn make_split(
    config: &SynthConfig,
    lexicon: &Lexicon,
    count: usize,
    oov_rate: f64,
    split: Split,
    rng: &mut SplitMix64,
) -> Result<LabeledCorpus, CorpusError> {
    let mut sentences = Vec::with_capacity(count);
    for _ in 0..count {
        let len = rng.range_inclusive(config.len_min, config.len_max);
        let mut words = Vec::with_capacity(len);
        let mut tags = Vec::with_capacity(len);
        for _ in 0..len {
            if rng.bernoulli(config.entity_rate) {
                let class = rng.below(lexicon.classes.len());
                let pool = if rng.bernoulli(oov_rate) {
                    &lexicon.heldout_stems[class]
                } else {
                    &lexicon.train_stems[class]
                };
                let stem = &pool[rng.below(pool.len())];
                let group = &lexicon.suffixes[class];
                let suffix = &group[rng.below(group.len())];
                words.push(format!("{stem}{suffix}"));
                tags.push(format!("B-{}", lexicon.classes[class]));
            } else {
                words.push(lexicon.fillers[rng.below(lexicon.fillers.len())].clone());
                tags.push(String::from(OUTSIDE));
            }
        }
        sentences.push(LabeledSentence::new(words, tags)?);
    }
    Ok(LabeledCorpus::new(sentences, split))
}

/// A WordPiece vocab covering the whole synthetic language: fillers and every
/// stem (train and held-out) as word-initial pieces, each suffix as a
/// continuation piece, and single letters in both positions as fallback.
pub fn synthetic_vocab(lexicon: &Lexicon) -> Vec<String> {
    let mut lines: Vec<String> = ["[PAD]", "[UNK]"].iter().map(|s| String::from(*s)).collect();
    let mut seen: BTreeSet<String> = lines.iter().cloned().collect();
    let mut push = |tok: String, lines: &mut Vec<String>| {
        if seen.insert(tok.clone()) {
            lines.push(tok);
        }
    };
    for c in b'a'..=b'z' {
        push(String::from(c as char), &mut lines);
        push(format!("##{}", c as char), &mut lines);
    }
    for f in &lexicon.fillers {
        push(f.clone(), &mut lines);
    }
    for pool in lexicon.train_stems.iter().chain(&lexicon.heldout_stems) {
        for stem in pool {
            push(stem.clone(), &mut lines);
        }
    }
    for group in &lexicon.suffixes {
        for s in group {
            push(format!("##{s}"), &mut lines);
        }
    }
    lines
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::write_conll;

    #[test]
    fn deterministic_for_seed() {
        let config = SynthConfig::default();
        let a = generate_synthetic(&config, 5).unwrap();
        let b = generate_synthetic(&config, 5).unwrap();
        assert_eq!(write_conll(&a.train), write_conll(&b.train));
        assert_eq!(write_conll(&a.test), write_conll(&b.test));
        let c = generate_synthetic(&config, 6).unwrap();
        assert_ne!(write_conll(&a.train), write_conll(&c.train));
    }

    #[test]
    fn suffix_decides_class() {
        let config = SynthConfig::default();
        let splits = generate_synthetic(&config, 1).unwrap();
        for corpus in [&splits.train, &splits.validation, &splits.test] {
            for s in corpus.iter() {
                for (w, t) in s.words().iter().zip(s.tags()) {
                    if w.ends_with("pur") || w.ends_with("nagar") {
                        assert_eq!(t, "B-NEL", "{w}");
                    }
                    if t == "B-NEL" {
                        assert!(w.ends_with("pur") || w.ends_with("nagar"));
                    }
                }
            }
        }
    }

    #[test]
    fn full_oov_rate_shares_no_stems() {
        let config = SynthConfig {
            oov_rate: 1.0,
            ..SynthConfig::default()
        };
        let splits = generate_synthetic(&config, 2).unwrap();
        let train_words: BTreeSet<&String> = splits
            .train
            .iter()
            .flat_map(|s| s.words().iter().zip(s.tags()))
            .filter(|(_, t)| t.as_str() != OUTSIDE)
            .map(|(w, _)| w)
            .collect();
        let stems_of = |w: &str| {
            let suffix = all_suffix_of(&config, w).unwrap();
            String::from(&w[..w.len() - suffix.len()])
        };
        let train_stems: BTreeSet<String> = train_words.iter().map(|w| stems_of(w)).collect();
        for s in splits.test.iter() {
            for (w, t) in s.words().iter().zip(s.tags()) {
                if t != OUTSIDE {
                    assert!(!train_stems.contains(&stems_of(w)), "{w} leaked");
                }
            }
        }
    }

    fn all_suffix_of<'a>(config: &'a SynthConfig, word: &str) -> Option<&'a String> {
        config.suffixes.iter().flatten().find(|s| word.ends_with(s.as_str()))
    }

    #[test]
    fn rejects_empty_inventories() {
        let mut config = SynthConfig {
            stems_per_class: 0,
            ..SynthConfig::default()
        };
        assert!(matches!(
            generate_synthetic(&config, 0),
            Err(CorpusError::InvalidConfig(_))
        ));
        config.stems_per_class = 3;
        config.suffixes[1].clear();
        assert!(matches!(
            generate_synthetic(&config, 0),
            Err(CorpusError::InvalidConfig(_))
        ));
    }

    #[test]
    fn vocab_has_no_duplicates() {
        let splits = generate_synthetic(&SynthConfig::default(), 3).unwrap();
        let vocab = synthetic_vocab(&splits.lexicon);
        let set: BTreeSet<&String> = vocab.iter().collect();
        assert_eq!(set.len(), vocab.len());
        assert_eq!(vocab[0], "[PAD]");
    }
}
