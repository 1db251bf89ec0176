//! Hybrid subword/shallow-network named entity recognition.
//!
//! The crate is `no_std` and only needs `alloc`. It covers the whole
//! labeling pipeline on in-memory data:
//!
//! * [`corpus`]: labeled sentences, CoNLL text format, statistics, a
//!   synthetic inflected-entity corpus generator.
//! * [`tokenizers`]: vocab tables, greedy longest-match WordPiece, word-level
//!   baseline segmentation, fertility statistics.
//! * [`alignment`]: copying word labels onto subtokens before training and
//!   merging subtoken predictions back onto words afterwards.
//! * [`nn`]: embedding, conv1d, LSTM/BiLSTM, dense, masked softmax
//!   cross-entropy and RMSProp with hand-written backward passes.
//! * [`taggers`]: CNN/LSTM/BiLSTM taggers, training loop, prediction,
//!   checkpoint encoding.
//! * [`metrics`]: token and span level precision/recall/F1 and accuracy.
//!
//! File IO, configuration files and the command line live in the companion
//! `hybridner` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod alignment;
pub mod corpus;
pub mod metrics;
pub mod nn;
pub mod rng;
pub mod taggers;
pub mod tokenizers;

pub use alignment::{club_labels, propagate_labels, ClubbingStrategy};
pub use corpus::{LabelSet, LabeledCorpus, LabeledSentence, Split};
pub use rng::SplitMix64;
pub use taggers::{Arch, Hyperparams, TaggerModel, TrainConfig};
pub use tokenizers::{Mode, Segmenter, SubwordEncoding, Vocab};
