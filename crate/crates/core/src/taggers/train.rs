use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{Params, TaggerError, TaggerModel};
use crate::alignment::{pad_truncate, propagate_labels, ClubbingStrategy, PaddedBatch};
use crate::corpus::{LabelSet, LabeledCorpus};
use crate::metrics;
use crate::nn::{masked_softmax_ce_sum, RmsProp, RmsPropConfig};
use crate::rng::SplitMix64;
use crate::tokenizers::{check_alignment_with, validate_external, Segmenter, SubwordEncoding};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    /// Subtokens per row; longer sentences are cut at a word boundary.
    pub max_len: usize,
    pub learning_rate: f64,
    pub rho: f64,
    pub epsilon: f64,
    /// Seeds the per-epoch shuffle.
    pub seed: u64,
    /// Stop after this many epochs without a validation macro-F1 gain.
    /// Ignored without a validation split.
    pub patience: Option<usize>,
    /// Clubbing used for the validation metric.
    pub strategy: ClubbingStrategy,
    /// Optional global L2 gradient-norm clip.
    pub clip_norm: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 20,
            batch_size: 16,
            max_len: 128,
            learning_rate: 1e-3,
            rho: 0.9,
            epsilon: 1e-8,
            seed: 0,
            patience: Some(3),
            strategy: ClubbingStrategy::First,
            clip_norm: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TaggerError> {
        let bad = |why: &str| Err(TaggerError::InvalidHyper(String::from(why)));
        if self.epochs == 0 || self.batch_size == 0 || self.max_len == 0 {
            return bad("epochs, batch_size and max_len must be positive");
        }
        if !(self.learning_rate > 0.0) || !(self.epsilon > 0.0) || !(self.rho > 0.0 && self.rho < 1.0) {
            return bad("need learning_rate > 0, epsilon > 0, 0 < rho < 1");
        }
        if self.patience == Some(0) {
            return bad("patience must be positive");
        }
        if matches!(self.clip_norm, Some(c) if !(c > 0.0)) {
            return bad("clip_norm must be positive");
        }
        Ok(())
    }

    pub fn optimizer(&self) -> RmsPropConfig {
        RmsPropConfig {
            learning_rate: self.learning_rate,
            rho: self.rho,
            epsilon: self.epsilon,
        }
    }
}

/// One sentence ready for the model: its encoding and the label index of
/// every source word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedSentence {
    pub encoding: SubwordEncoding,
    pub word_labels: Vec<usize>,
}

/// An encoded split. Label indices refer to the label set it was built with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub sentences: Vec<EncodedSentence>,
}

impl Dataset {
    /// Pairs a corpus with its encodings (one per sentence) and maps tags to
    /// indices of `labels`.
    pub fn from_encodings(
        corpus: &LabeledCorpus,
        encodings: Vec<SubwordEncoding>,
        labels: &LabelSet,
    ) -> Result<Self, TaggerError> {
        validate_external(&encodings)?;
        check_alignment_with(corpus, &encodings)?;
        let mut sentences = Vec::with_capacity(corpus.len());
        for (i, (s, encoding)) in corpus.iter().zip(encodings).enumerate() {
            let word_labels = s
                .tags()
                .iter()
                .map(|t| {
                    labels.index_of(t).ok_or_else(|| {
                        TaggerError::LabelMismatch(format!("sentence {}: label {t:?} not in label set", i + 1))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            sentences.push(EncodedSentence { encoding, word_labels });
        }
        Ok(Self { sentences })
    }

    pub fn segment(corpus: &LabeledCorpus, segmenter: &Segmenter, labels: &LabelSet) -> Result<Self, TaggerError> {
        Self::from_encodings(corpus, segmenter.segment_corpus(corpus), labels)
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn encodings(&self) -> impl Iterator<Item = &SubwordEncoding> {
        self.sentences.iter().map(|s| &s.encoding)
    }

    /// Pads and truncates the sentences at `indices` into one batch, with
    /// word labels propagated to every subtoken.
    pub fn batch(&self, indices: &[usize], max_len: usize, pad_id: u32) -> Result<PaddedBatch, TaggerError> {
        let mut rows = Vec::with_capacity(indices.len());
        for &i in indices {
            let s = &self.sentences[i];
            let sub_labels = propagate_labels(&s.word_labels, &s.encoding)?;
            rows.push(pad_truncate(&s.encoding, &sub_labels, max_len, pad_id, 0)?);
        }
        Ok(PaddedBatch {
            max_len,
            rows,
            sources: indices.to_vec(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    /// Mean cross-entropy per real subtoken over the epoch.
    pub train_loss: f64,
    /// Root-token macro-F1 on the validation split after clubbing.
    pub val_macro_f1: Option<f64>,
    pub seconds: f64,
    pub truncated_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose parameters were kept (validation runs only).
    pub best_epoch: Option<usize>,
    pub stopped_early: bool,
}

impl TrainHistory {
    pub fn losses(&self) -> Vec<f64> {
        self.epochs.iter().map(|e| e.train_loss).collect()
    }
}

pub fn train(
    model: &mut TaggerModel,
    train_set: &Dataset,
    val_set: Option<&Dataset>,
    config: &TrainConfig,
) -> Result<TrainHistory, TaggerError> {
    train_with_clock(model, train_set, val_set, config, &mut || 0.0)
}

/// `clock` returns seconds from an arbitrary origin; it only feeds
/// [`EpochRecord::seconds`].
pub fn train_with_clock(
    model: &mut TaggerModel,
    train_set: &Dataset,
    val_set: Option<&Dataset>,
    config: &TrainConfig,
    clock: &mut dyn FnMut() -> f64,
) -> Result<TrainHistory, TaggerError> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(TaggerError::EmptySplit);
    }
    for sentence in train_set
        .sentences
        .iter()
        .chain(val_set.iter().flat_map(|v| &v.sentences))
    {
        if let Some(&bad) = sentence.word_labels.iter().find(|&&l| l >= model.labels.len()) {
            return Err(TaggerError::LabelMismatch(format!(
                "label index {bad} outside the model's {} labels",
                model.labels.len()
            )));
        }
    }
    let val_set = val_set.filter(|v| !v.is_empty());

    let pad_id = model.tokenizer.pad_id();
    let mut rng = SplitMix64::new(config.seed);
    let mut optimizer = RmsProp::new(config.optimizer(), model.params.tensors().iter().map(|t| t.len()));
    let mut grads: Params = model.params.zeros_like();
    let mut order: Vec<usize> = (0..train_set.len()).collect();

    let mut history = TrainHistory::default();
    let mut best: Option<(f64, Params)> = None;
    let mut since_best = 0usize;

    for epoch in 1..=config.epochs {
        let start = clock();
        rng.shuffle(&mut order);
        let mut loss_sum = 0.0;
        let mut positions = 0usize;
        let mut truncated_rows = 0usize;

        for chunk in order.chunks(config.batch_size) {
            let batch = train_set.batch(chunk, config.max_len, pad_id)?;
            truncated_rows += batch.truncated_rows();
            let real = batch.real_positions();
            if real == 0 {
                continue;
            }
            grads.fill_zero();
            let scale = 1.0 / real as f64;
            for row in &batch.rows {
                if row.kept == 0 {
                    continue;
                }
                // Padding sits strictly after `kept`, so restricting the pass
                // to the real prefix is exactly the masked computation.
                let ids = &row.ids[..row.kept];
                let (logits, cache) = model.params.forward(ids)?;
                let (nll, mut grad_logits, _) =
                    masked_softmax_ce_sum(&logits, &row.label_indices[..row.kept], &row.mask[..row.kept])?;
                grad_logits.scale(scale);
                model.params.backward(ids, &cache, &grad_logits, &mut grads)?;
                loss_sum += nll;
            }
            positions += real;
            if let Some(max_norm) = config.clip_norm {
                let norm = crate::nn::math::sqrt(grads.tensors().iter().map(|t| t.sum_squares()).sum());
                if norm > max_norm {
                    let factor = max_norm / norm;
                    for g in grads.tensors_mut() {
                        g.scale(factor);
                    }
                }
            }
            optimizer.step(model.params.tensors_mut(), grads.tensors())?;
        }

        let train_loss = if positions == 0 {
            0.0
        } else {
            loss_sum / positions as f64
        };
        let val_macro_f1 = match val_set {
            Some(v) => Some(
                metrics::evaluate_dataset(model, v, config.strategy, None)
                    .map_err(|e| match e {
                        metrics::MetricsError::Tagger(t) => t,
                        other => TaggerError::LabelMismatch(other.to_string()),
                    })?
                    .token
                    .macro_avg
                    .f1,
            ),
            None => None,
        };
        history.epochs.push(EpochRecord {
            epoch,
            train_loss,
            val_macro_f1,
            seconds: clock() - start,
            truncated_rows,
        });

        if let Some(f1) = val_macro_f1 {
            let improved = best.as_ref().is_none_or(|(b, _)| f1 > *b);
            if improved {
                best = Some((f1, model.params.clone()));
                history.best_epoch = Some(epoch);
                since_best = 0;
            } else {
                since_best += 1;
                if config.patience.is_some_and(|p| since_best >= p) {
                    history.stopped_early = epoch < config.epochs;
                    break;
                }
            }
        }
    }
    if let Some((_, params)) = best {
        model.params = params;
    }
    Ok(history)
}
