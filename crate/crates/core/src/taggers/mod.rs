//! Single-layer CNN / LSTM / BiLSTM sequence taggers.
//!
//! Every architecture is `ids → embedding → layer → dense → softmax`, one
//! prediction per input subtoken:
//!
//! | arch   | layer output            |
//! |--------|-------------------------|
//! | CNN    | conv1d + ReLU, `filters` |
//! | LSTM   | `hidden`                |
//! | BiLSTM | `2 × hidden`            |

mod checkpoint;
mod train;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub use checkpoint::{decode_checkpoint, encode_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use train::{train, train_with_clock, Dataset, EncodedSentence, EpochRecord, TrainConfig, TrainHistory};

use crate::alignment::{club_labels, AlignError, ClubbingStrategy};
use crate::corpus::LabelSet;
use crate::nn::{
    masked_softmax_ce, softmax_rows, BiLstm, BiLstmCache, Conv1d, Conv1dCache, Dense, Embedding, Lstm, LstmCache,
    NnError, Tensor,
};
use crate::rng::SplitMix64;
use crate::tokenizers::{Fnv1a, Segmenter, SubwordEncoding, TokenizerError};

#[derive(Debug, Clone, PartialEq)]
pub enum TaggerError {
    InvalidHyper(String),
    EmptySplit,
    LabelMismatch(String),
    VersionMismatch {
        found: u32,
        expected: u32,
    },
    CorruptCheckpoint(String),
    /// The model was trained on external segmentations and cannot segment raw words.
    NoNativeTokenizer,
    Nn(NnError),
    Align(AlignError),
    Tokenizer(TokenizerError),
}

impl fmt::Display for TaggerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TaggerError::InvalidHyper(why) => write!(f, "invalid hyperparameters: {why}"),
            TaggerError::EmptySplit => f.write_str("training split is empty"),
            TaggerError::LabelMismatch(why) => write!(f, "label mismatch: {why}"),
            TaggerError::VersionMismatch { found, expected } => {
                write!(f, "checkpoint format version {found}, this build reads {expected}")
            }
            TaggerError::CorruptCheckpoint(why) => write!(f, "corrupt checkpoint: {why}"),
            TaggerError::NoNativeTokenizer => {
                f.write_str("model uses external segmentations; supply pre-segmented input")
            }
            TaggerError::Nn(e) => write!(f, "{e}"),
            TaggerError::Align(e) => write!(f, "{e}"),
            TaggerError::Tokenizer(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for TaggerError {}

impl From<NnError> for TaggerError {
    fn from(e: NnError) -> Self {
        TaggerError::Nn(e)
    }
}

impl From<AlignError> for TaggerError {
    fn from(e: AlignError) -> Self {
        TaggerError::Align(e)
    }
}

impl From<TokenizerError> for TaggerError {
    fn from(e: TokenizerError) -> Self {
        TaggerError::Tokenizer(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Arch {
    Cnn,
    Lstm,
    BiLstm,
}

impl Arch {
    pub const ALL: [Arch; 3] = [Arch::Cnn, Arch::Lstm, Arch::BiLstm];

    pub fn name(self) -> &'static str {
        match self {
            Arch::Cnn => "cnn",
            Arch::Lstm => "lstm",
            Arch::BiLstm => "bilstm",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Arch::Cnn => "CNN",
            Arch::Lstm => "LSTM",
            Arch::BiLstm => "BiLSTM",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cnn" => Some(Arch::Cnn),
            "lstm" => Some(Arch::Lstm),
            "bilstm" => Some(Arch::BiLstm),
            _ => None,
        }
    }

    fn code(self) -> u8 {
        match self {
            Arch::Cnn => 0,
            Arch::Lstm => 1,
            Arch::BiLstm => 2,
        }
    }

    fn from_code(code: u8) -> Option<Self> {
        Arch::ALL.into_iter().find(|a| a.code() == code)
    }
}

/// Architecture sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Hyperparams {
    pub embed_dim: usize,
    pub conv_filters: usize,
    pub conv_kernel: usize,
    pub lstm_hidden: usize,
    /// Hidden units per direction.
    pub bilstm_hidden: usize,
    pub num_labels: usize,
}

impl Hyperparams {
    /// 300-d embeddings, 512 conv filters of width 3, 512 LSTM units,
    /// 512 BiLSTM units per direction.
    pub fn standard(num_labels: usize) -> Self {
        Self {
            embed_dim: 300,
            conv_filters: 512,
            conv_kernel: 3,
            lstm_hidden: 512,
            bilstm_hidden: 512,
            num_labels,
        }
    }

    pub fn validate(&self) -> Result<(), TaggerError> {
        let fields = [
            ("embed_dim", self.embed_dim),
            ("conv_filters", self.conv_filters),
            ("conv_kernel", self.conv_kernel),
            ("lstm_hidden", self.lstm_hidden),
            ("bilstm_hidden", self.bilstm_hidden),
            ("num_labels", self.num_labels),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| *v == 0) {
            return Err(TaggerError::InvalidHyper(format!("{name} must be positive")));
        }
        if self.conv_kernel.is_multiple_of(2) {
            return Err(TaggerError::InvalidHyper(format!(
                "conv_kernel must be odd for same padding, got {}",
                self.conv_kernel
            )));
        }
        Ok(())
    }

    /// Width of the representation the dense layer reads.
    pub fn layer_width(&self, arch: Arch) -> usize {
        match arch {
            Arch::Cnn => self.conv_filters,
            Arch::Lstm => self.lstm_hidden,
            Arch::BiLstm => 2 * self.bilstm_hidden,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ArchLayer {
    Cnn(Conv1d),
    Lstm(Lstm),
    BiLstm(BiLstm),
}

/// All trainable tensors of a tagger.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub embedding: Embedding,
    pub layer: ArchLayer,
    pub dense: Dense,
}

enum LayerCache {
    Cnn(Conv1dCache),
    Lstm(LstmCache),
    BiLstm(BiLstmCache),
}

/// Activations kept from a forward pass for the backward pass.
pub struct ForwardCache {
    embedded: Tensor,
    layer_out: Tensor,
    layer: LayerCache,
}

impl Params {
    pub fn zeros_like(&self) -> Self {
        Self {
            embedding: self.embedding.zeros_like(),
            layer: match &self.layer {
                ArchLayer::Cnn(c) => ArchLayer::Cnn(c.zeros_like()),
                ArchLayer::Lstm(l) => ArchLayer::Lstm(l.zeros_like()),
                ArchLayer::BiLstm(b) => ArchLayer::BiLstm(b.zeros_like()),
            },
            dense: self.dense.zeros_like(),
        }
    }

    /// Named tensors in a fixed order (optimizer slots, checkpoint layout).
    pub fn named(&self) -> Vec<(&'static str, &Tensor)> {
        let mut out = alloc::vec![("embedding.table", &self.embedding.table)];
        match &self.layer {
            ArchLayer::Cnn(c) => {
                out.push(("conv.kernel", &c.kernel));
                out.push(("conv.bias", &c.bias));
            }
            ArchLayer::Lstm(l) => {
                out.push(("lstm.w_x", &l.w_x));
                out.push(("lstm.w_h", &l.w_h));
                out.push(("lstm.b", &l.b));
            }
            ArchLayer::BiLstm(b) => {
                out.push(("bilstm.fwd.w_x", &b.forward.w_x));
                out.push(("bilstm.fwd.w_h", &b.forward.w_h));
                out.push(("bilstm.fwd.b", &b.forward.b));
                out.push(("bilstm.bwd.w_x", &b.backward.w_x));
                out.push(("bilstm.bwd.w_h", &b.backward.w_h));
                out.push(("bilstm.bwd.b", &b.backward.b));
            }
        }
        out.push(("dense.w", &self.dense.w));
        out.push(("dense.b", &self.dense.b));
        out
    }

    /// Same order as [`Params::named`].
    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = alloc::vec![&mut self.embedding.table];
        match &mut self.layer {
            ArchLayer::Cnn(c) => {
                out.push(&mut c.kernel);
                out.push(&mut c.bias);
            }
            ArchLayer::Lstm(l) => {
                out.push(&mut l.w_x);
                out.push(&mut l.w_h);
                out.push(&mut l.b);
            }
            ArchLayer::BiLstm(b) => {
                out.push(&mut b.forward.w_x);
                out.push(&mut b.forward.w_h);
                out.push(&mut b.forward.b);
                out.push(&mut b.backward.w_x);
                out.push(&mut b.backward.w_h);
                out.push(&mut b.backward.b);
            }
        }
        out.push(&mut self.dense.w);
        out.push(&mut self.dense.b);
        out
    }

    pub fn tensors(&self) -> Vec<&Tensor> {
        self.named().into_iter().map(|(_, t)| t).collect()
    }

    pub fn fill_zero(&mut self) {
        for t in self.tensors_mut() {
            t.fill_zero();
        }
    }

    pub fn count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    fn forward(&self, ids: &[u32]) -> Result<(Tensor, ForwardCache), NnError> {
        let embedded = self.embedding.forward(ids)?;
        let (layer_out, layer) = match &self.layer {
            ArchLayer::Cnn(c) => {
                let (y, cache) = c.forward(&embedded)?;
                (y, LayerCache::Cnn(cache))
            }
            ArchLayer::Lstm(l) => {
                let (y, cache) = l.forward(&embedded)?;
                (y, LayerCache::Lstm(cache))
            }
            ArchLayer::BiLstm(b) => {
                let (y, cache) = b.forward(&embedded)?;
                (y, LayerCache::BiLstm(cache))
            }
        };
        let logits = self.dense.forward(&layer_out)?;
        Ok((
            logits,
            ForwardCache {
                embedded,
                layer_out,
                layer,
            },
        ))
    }

    fn backward(
        &self,
        ids: &[u32],
        cache: &ForwardCache,
        grad_logits: &Tensor,
        grads: &mut Params,
    ) -> Result<(), NnError> {
        let grad_layer = self.dense.backward(&cache.layer_out, grad_logits, &mut grads.dense)?;
        let grad_emb = match (&self.layer, &cache.layer, &mut grads.layer) {
            (ArchLayer::Cnn(c), LayerCache::Cnn(cc), ArchLayer::Cnn(g)) => {
                c.backward(&cache.embedded, cc, &grad_layer, g)?
            }
            (ArchLayer::Lstm(l), LayerCache::Lstm(lc), ArchLayer::Lstm(g)) => {
                l.backward(&cache.embedded, lc, &grad_layer, g)?
            }
            (ArchLayer::BiLstm(b), LayerCache::BiLstm(bc), ArchLayer::BiLstm(g)) => {
                b.backward(&cache.embedded, bc, &grad_layer, g)?
            }
            _ => {
                return Err(NnError::ShapeMismatch(
                    "gradient buffers of another architecture".into(),
                ))
            }
        };
        self.embedding.backward(ids, &grad_emb, &mut grads.embedding)
    }
}

/// Where a model's input ids come from.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelTokenizer {
    /// Word or WordPiece segmentation over a vocab stored with the model.
    Native(Segmenter),
    /// Ids produced by an outside tokenizer with `vocab_size` entries.
    External { vocab_size: usize },
}

impl ModelTokenizer {
    pub fn vocab_size(&self) -> usize {
        match self {
            ModelTokenizer::Native(s) => s.vocab.len(),
            ModelTokenizer::External { vocab_size } => *vocab_size,
        }
    }

    pub fn fingerprint(&self) -> u64 {
        match self {
            ModelTokenizer::Native(s) => s.vocab.fingerprint(),
            ModelTokenizer::External { vocab_size } => {
                let mut h = Fnv1a::new();
                h.write(b"external");
                h.write(&(*vocab_size as u64).to_le_bytes());
                h.finish()
            }
        }
    }

    pub fn pad_id(&self) -> u32 {
        match self {
            ModelTokenizer::Native(s) => s.vocab.pad_id(),
            ModelTokenizer::External { .. } => 0,
        }
    }

    pub fn unk_id(&self) -> Option<u32> {
        match self {
            ModelTokenizer::Native(s) => Some(s.vocab.unk_id()),
            ModelTokenizer::External { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaggerModel {
    pub arch: Arch,
    pub hyper: Hyperparams,
    pub labels: LabelSet,
    pub tokenizer: ModelTokenizer,
    pub params: Params,
}

/// Initializes a tagger: embeddings, conv and dense weights uniform in
/// ±0.05, LSTM weights uniform in ±1/√h with forget bias 1, other biases 0.
pub fn build_model(
    arch: Arch,
    hyper: Hyperparams,
    tokenizer: ModelTokenizer,
    labels: LabelSet,
    seed: u64,
) -> Result<TaggerModel, TaggerError> {
    hyper.validate()?;
    if hyper.num_labels != labels.len() {
        return Err(TaggerError::InvalidHyper(format!(
            "num_labels {} but label set has {}",
            hyper.num_labels,
            labels.len()
        )));
    }
    let vocab = tokenizer.vocab_size();
    if vocab == 0 {
        return Err(TaggerError::InvalidHyper("empty vocab".into()));
    }
    let mut rng = SplitMix64::new(seed);
    let embedding = Embedding::init(vocab, hyper.embed_dim, &mut rng);
    let layer = match arch {
        Arch::Cnn => ArchLayer::Cnn(Conv1d::init(
            hyper.conv_kernel,
            hyper.embed_dim,
            hyper.conv_filters,
            &mut rng,
        )),
        Arch::Lstm => ArchLayer::Lstm(Lstm::init(hyper.embed_dim, hyper.lstm_hidden, &mut rng)),
        Arch::BiLstm => ArchLayer::BiLstm(BiLstm::init(hyper.embed_dim, hyper.bilstm_hidden, &mut rng)),
    };
    let dense = Dense::init(hyper.layer_width(arch), hyper.num_labels, &mut rng);
    Ok(TaggerModel {
        arch,
        hyper,
        labels,
        tokenizer,
        params: Params {
            embedding,
            layer,
            dense,
        },
    })
}

/// Exact number of trainable scalars.
pub fn count_params(model: &TaggerModel) -> usize {
    model.params.count()
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

impl TaggerModel {
    pub fn vocab_size(&self) -> usize {
        self.params.embedding.vocab()
    }

    pub fn logits(&self, ids: &[u32]) -> Result<Tensor, TaggerError> {
        Ok(self.params.forward(ids)?.0)
    }

    /// Mean cross-entropy of one sentence against subtoken targets, with its
    /// gradient for every parameter.
    pub fn loss_and_grad(&self, ids: &[u32], targets: &[usize]) -> Result<(f64, Params), TaggerError> {
        let (logits, cache) = self.params.forward(ids)?;
        let mask = alloc::vec![1u8; ids.len()];
        let (loss, grad_logits) = masked_softmax_ce(&logits, targets, &mask)?;
        let mut grads = self.params.zeros_like();
        self.params.backward(ids, &cache, &grad_logits, &mut grads)?;
        Ok((loss, grads))
    }

    /// Per-position label distribution.
    pub fn probabilities(&self, ids: &[u32]) -> Result<Tensor, TaggerError> {
        Ok(softmax_rows(&self.logits(ids)?))
    }

    /// Arg-max label index per subtoken; ties resolve to the lowest index.
    pub fn predict_subtokens(&self, ids: &[u32]) -> Result<Vec<usize>, TaggerError> {
        if ids.is_empty() {
            return Ok(Vec::new());
        }
        let logits = self.logits(ids)?;
        Ok((0..logits.rows()).map(|t| argmax(logits.row(t))).collect())
    }

    /// Word-level label indices for an encoded sentence.
    pub fn predict_encoded(
        &self,
        encoding: &SubwordEncoding,
        strategy: ClubbingStrategy,
    ) -> Result<Vec<usize>, TaggerError> {
        let sub = self.predict_subtokens(&encoding.ids)?;
        Ok(club_labels(&sub, encoding, strategy)?)
    }

    /// Fails with `LabelMismatch` unless every label in `labels` is known to
    /// the model.
    pub fn check_labels(&self, labels: &LabelSet) -> Result<(), TaggerError> {
        if labels.len() > self.labels.len() || !self.labels.is_superset_of(labels) {
            let unknown: Vec<&str> = labels
                .labels()
                .iter()
                .filter(|l| !self.labels.contains(l))
                .map(String::as_str)
                .collect();
            return Err(TaggerError::LabelMismatch(format!(
                "model has {} labels; unknown: {}",
                self.labels.len(),
                unknown.join(", ")
            )));
        }
        Ok(())
    }
}

/// Segments `words` with the model's own tokenizer, predicts every subtoken
/// and clubs the predictions back to one label per word.
pub fn predict_sentence<S: AsRef<str>>(
    model: &TaggerModel,
    words: &[S],
    strategy: ClubbingStrategy,
) -> Result<Vec<(String, String)>, TaggerError> {
    let ModelTokenizer::Native(segmenter) = &model.tokenizer else {
        return Err(TaggerError::NoNativeTokenizer);
    };
    let encoding = segmenter.segment(words);
    let labels = model.predict_encoded(&encoding, strategy)?;
    Ok(words
        .iter()
        .zip(labels)
        .map(|(w, l)| (String::from(w.as_ref()), String::from(model.labels.label(l))))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenizers::{Mode, Vocab};
    use alloc::vec;

    fn vocab(n: usize) -> Vocab {
        let mut tokens = vec![String::from("[PAD]"), String::from("[UNK]")];
        tokens.extend((2..n).map(|i| format!("w{i}")));
        Vocab::from_tokens(tokens, "[UNK]", "[PAD]", "##").unwrap()
    }

    fn labels(n: usize) -> LabelSet {
        LabelSet::from_labels((1..n).map(|i| format!("B-{i}")))
    }

    fn model(arch: Arch, v: usize, hyper: Hyperparams, seed: u64) -> TaggerModel {
        let tok = ModelTokenizer::Native(Segmenter::new(vocab(v), Mode::Word));
        build_model(arch, hyper, tok, labels(hyper.num_labels), seed).unwrap()
    }

    #[test]
    fn standard_counts() {
        let cnn = model(Arch::Cnn, 1000, Hyperparams::standard(8), 1);
        // 1000·300 + (3·300·512 + 512) + (512·8 + 8)
        assert_eq!(count_params(&cnn), 1000 * 300 + (3 * 300 * 512 + 512) + (512 * 8 + 8));
        assert_eq!(count_params(&cnn), 765_416);
        assert_eq!(cnn.params.dense.b.len(), 8);
        let lstm = model(Arch::Lstm, 1000, Hyperparams::standard(8), 1);
        // 300,000 + 4·(512·(300+512) + 512) + (512·8 + 8)
        assert_eq!(
            count_params(&lstm),
            300_000 + 4 * (512 * (300 + 512) + 512) + (512 * 8 + 8)
        );
        assert_eq!(count_params(&lstm), 1_969_128);
    }

    #[test]
    fn bilstm_width() {
        let hyper = Hyperparams {
            embed_dim: 4,
            bilstm_hidden: 512,
            ..Hyperparams::standard(3)
        };
        let m = model(Arch::BiLstm, 10, hyper, 0);
        assert_eq!(m.params.dense.d_in(), 1024);
        assert_eq!(hyper.layer_width(Arch::BiLstm), 1024);
    }

    #[test]
    fn seeded_init_is_reproducible() {
        let hyper = Hyperparams {
            embed_dim: 6,
            conv_filters: 5,
            lstm_hidden: 4,
            bilstm_hidden: 3,
            ..Hyperparams::standard(4)
        };
        for arch in Arch::ALL {
            assert_eq!(model(arch, 20, hyper, 9), model(arch, 20, hyper, 9));
            assert_ne!(model(arch, 20, hyper, 9).params, model(arch, 20, hyper, 10).params);
        }
    }

    #[test]
    fn invalid_hyper() {
        let tok = ModelTokenizer::Native(Segmenter::new(vocab(5), Mode::Word));
        let even = Hyperparams {
            conv_kernel: 4,
            ..Hyperparams::standard(2)
        };
        assert!(matches!(
            build_model(Arch::Cnn, even, tok.clone(), labels(2), 0),
            Err(TaggerError::InvalidHyper(_))
        ));
        assert!(matches!(
            build_model(Arch::Cnn, Hyperparams::standard(3), tok, labels(2), 0),
            Err(TaggerError::InvalidHyper(_))
        ));
    }

    #[test]
    fn identical_logits_predict_index_zero() {
        let hyper = Hyperparams {
            embed_dim: 3,
            conv_filters: 4,
            ..Hyperparams::standard(4)
        };
        let mut m = model(Arch::Cnn, 10, hyper, 2);
        m.params.dense.w.fill_zero();
        m.params.dense.b.fill_zero();
        let out = predict_sentence(&m, &["a", "w3", "b", "w4", "c"], ClubbingStrategy::First).unwrap();
        assert_eq!(out.len(), 5);
        assert!(out.iter().all(|(_, l)| l == "O"));
    }

    #[test]
    fn probabilities_sum_to_one() {
        let hyper = Hyperparams {
            embed_dim: 5,
            conv_filters: 4,
            lstm_hidden: 3,
            bilstm_hidden: 2,
            ..Hyperparams::standard(6)
        };
        for arch in Arch::ALL {
            let m = model(arch, 12, hyper, 4);
            let p = m.probabilities(&[1, 5, 7, 2, 11]).unwrap();
            for t in 0..p.rows() {
                assert!((p.row(t).iter().sum::<f64>() - 1.0).abs() < 1e-6);
            }
        }
    }
}
