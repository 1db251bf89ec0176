//! Token-level and entity-span precision/recall/F1 at the word level.
//!
//! Labels are opaque strings. `O` is the outside label; every average
//! below excludes it, while accuracy counts every token.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::alignment::{propagate_labels, ClubbingStrategy};
use crate::corpus::{LabelSet, LabeledCorpus, OUTSIDE};
use crate::taggers::{Dataset, ModelTokenizer, TaggerError, TaggerModel};
use crate::tokenizers::{fertility_from_encodings, FertilityStats, SubwordEncoding};

#[derive(Debug, Clone, PartialEq)]
pub enum MetricsError {
    LengthMismatch { expected: usize, found: usize },
    UnknownScheme(String),
    Tagger(TaggerError),
}

impl fmt::Display for MetricsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricsError::LengthMismatch { expected, found } => {
                write!(f, "prediction length {found} does not match gold length {expected}")
            }
            MetricsError::UnknownScheme(s) => write!(f, "unknown tag scheme {s:?} (expected bio or flat)"),
            MetricsError::Tagger(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for MetricsError {}

impl From<TaggerError> for MetricsError {
    fn from(e: TaggerError) -> Self {
        MetricsError::Tagger(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LabelCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl LabelCounts {
    /// Gold occurrences.
    pub fn support(&self) -> usize {
        self.tp + self.fn_
    }

    pub fn predicted(&self) -> usize {
        self.tp + self.fp
    }
}

/// Per-label counts over aligned prediction/gold sequences. Every label seen
/// on either side has an entry, `O` included.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    pub per_label: BTreeMap<String, LabelCounts>,
    pub total_tokens: usize,
    pub correct_tokens: usize,
}

impl ConfusionCounts {
    pub fn add<S: AsRef<str>>(&mut self, pred: &[S], gold: &[S]) -> Result<(), MetricsError> {
        if pred.len() != gold.len() {
            return Err(MetricsError::LengthMismatch {
                expected: gold.len(),
                found: pred.len(),
            });
        }
        for (p, g) in pred.iter().zip(gold) {
            let (p, g) = (p.as_ref(), g.as_ref());
            self.total_tokens += 1;
            if p == g {
                self.correct_tokens += 1;
                self.entry(g).tp += 1;
            } else {
                self.entry(p).fp += 1;
                self.entry(g).fn_ += 1;
            }
        }
        Ok(())
    }

    fn entry(&mut self, label: &str) -> &mut LabelCounts {
        if !self.per_label.contains_key(label) {
            self.per_label.insert(String::from(label), LabelCounts::default());
        }
        self.per_label.get_mut(label).expect("inserted above")
    }

    pub fn merge(&mut self, other: &ConfusionCounts) {
        for (label, c) in &other.per_label {
            let e = self.entry(label);
            e.tp += c.tp;
            e.fp += c.fp;
            e.fn_ += c.fn_;
        }
        self.total_tokens += other.total_tokens;
        self.correct_tokens += other.correct_tokens;
    }

    pub fn get(&self, label: &str) -> LabelCounts {
        self.per_label.get(label).copied().unwrap_or_default()
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.correct_tokens, self.total_tokens)
    }
}

pub fn token_confusion<S: AsRef<str>>(pred: &[S], gold: &[S]) -> Result<ConfusionCounts, MetricsError> {
    let mut counts = ConfusionCounts::default();
    counts.add(pred, gold)?;
    Ok(counts)
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Harmonic mean; 0 when both inputs are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        Self {
            precision,
            recall,
            f1: f1_score(precision, recall),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassMetrics {
    pub label: String,
    pub counts: LabelCounts,
    pub scores: Prf,
}

impl ClassMetrics {
    pub fn support(&self) -> usize {
        self.counts.support()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TokenMetrics {
    /// Non-`O` labels in label order.
    pub per_class: Vec<ClassMetrics>,
    /// Unweighted mean over non-`O` classes present in gold.
    pub macro_avg: Prf,
    /// Set when gold has no entity tokens; `macro_avg` is then all zeros.
    pub macro_undefined: bool,
    /// Pooled over non-`O` classes.
    pub micro_avg: Prf,
    pub accuracy: f64,
}

pub fn token_metrics(counts: &ConfusionCounts) -> TokenMetrics {
    let per_class: Vec<ClassMetrics> = counts
        .per_label
        .iter()
        .filter(|(label, _)| label.as_str() != OUTSIDE)
        .map(|(label, c)| ClassMetrics {
            label: label.clone(),
            counts: *c,
            scores: Prf::from_counts(c.tp, c.fp, c.fn_),
        })
        .collect();

    let in_gold: Vec<&ClassMetrics> = per_class.iter().filter(|c| c.support() > 0).collect();
    let macro_undefined = in_gold.is_empty();
    let macro_avg = if macro_undefined {
        Prf::default()
    } else {
        let n = in_gold.len() as f64;
        let mean = |f: fn(&Prf) -> f64| in_gold.iter().map(|c| f(&c.scores)).sum::<f64>() / n;
        Prf {
            precision: mean(|s| s.precision),
            recall: mean(|s| s.recall),
            f1: mean(|s| s.f1),
        }
    };

    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for c in &per_class {
        tp += c.counts.tp;
        fp += c.counts.fp;
        fn_ += c.counts.fn_;
    }
    TokenMetrics {
        per_class,
        macro_avg,
        macro_undefined,
        micro_avg: Prf::from_counts(tp, fp, fn_),
        accuracy: counts.accuracy(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// `B-X` opens a span, `I-X` continues it.
    Bio,
    /// Maximal runs of one non-`O` label.
    Flat,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Bio => "bio",
            Scheme::Flat => "flat",
        }
    }

    pub fn parse(s: &str) -> Result<Self, MetricsError> {
        match s.to_ascii_lowercase().as_str() {
            "bio" => Ok(Scheme::Bio),
            "flat" => Ok(Scheme::Flat),
            _ => Err(MetricsError::UnknownScheme(String::from(s))),
        }
    }
}

/// A half-open entity span `[start, end)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub class: String,
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(class: &str, start: usize, end: usize) -> Self {
        Self {
            class: String::from(class),
            start,
            end,
        }
    }
}

/// Decodes entity spans. Under BIO an `I-X` that does not continue an `X`
/// span opens a new one, and a label without a `B-`/`I-` prefix is read as
/// `B-<label>`.
pub fn decode_spans<S: AsRef<str>>(labels: &[S], scheme: Scheme) -> Vec<Span> {
    let mut spans: Vec<Span> = Vec::new();
    let mut open: Option<Span> = None;
    for (i, label) in labels.iter().enumerate() {
        let label = label.as_ref();
        if label == OUTSIDE {
            spans.extend(open.take());
            continue;
        }
        let (class, continues) = match scheme {
            Scheme::Flat => (label, true),
            Scheme::Bio => match (label.strip_prefix("B-"), label.strip_prefix("I-")) {
                (Some(c), _) => (c, false),
                (_, Some(c)) => (c, true),
                _ => (label, false),
            },
        };
        match &mut open {
            Some(span) if continues && span.class == class => span.end = i + 1,
            _ => {
                spans.extend(open.take());
                open = Some(Span::new(class, i, i + 1));
            }
        }
    }
    spans.extend(open);
    spans
}

/// Writes spans back to a label sequence of length `len`; uncovered
/// positions are `O`.
pub fn encode_spans(spans: &[Span], len: usize, scheme: Scheme) -> Vec<String> {
    let mut labels: Vec<String> = (0..len).map(|_| String::from(OUTSIDE)).collect();
    for span in spans {
        for i in span.start..span.end.min(len) {
            labels[i] = match scheme {
                Scheme::Flat => span.class.clone(),
                Scheme::Bio if i == span.start => format!("B-{}", span.class),
                Scheme::Bio => format!("I-{}", span.class),
            };
        }
    }
    labels
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SpanCounts {
    pub gold: usize,
    pub predicted: usize,
    pub correct: usize,
}

impl SpanCounts {
    pub fn add<S: AsRef<str>>(&mut self, pred: &[S], gold: &[S], scheme: Scheme) -> Result<(), MetricsError> {
        if pred.len() != gold.len() {
            return Err(MetricsError::LengthMismatch {
                expected: gold.len(),
                found: pred.len(),
            });
        }
        let gold_spans = decode_spans(gold, scheme);
        let pred_spans = decode_spans(pred, scheme);
        self.gold += gold_spans.len();
        self.predicted += pred_spans.len();
        self.correct += pred_spans.iter().filter(|s| gold_spans.contains(s)).count();
        Ok(())
    }

    /// Exact-match span scores.
    pub fn scores(&self) -> Prf {
        Prf::from_counts(self.correct, self.predicted - self.correct, self.gold - self.correct)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpanReport {
    pub scheme: Scheme,
    pub counts: SpanCounts,
    pub scores: Prf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub strategy: ClubbingStrategy,
    pub sentences: usize,
    pub counts: ConfusionCounts,
    pub token: TokenMetrics,
    pub spans: Option<SpanReport>,
    pub fertility: FertilityStats,
    /// Accuracy before clubbing, against word labels copied to subtokens.
    pub subtoken_accuracy: f64,
}

struct Accumulator {
    counts: ConfusionCounts,
    spans: Option<(Scheme, SpanCounts)>,
    sub_total: usize,
    sub_correct: usize,
    sentences: usize,
}

impl Accumulator {
    fn new(scheme: Option<Scheme>) -> Self {
        Self {
            counts: ConfusionCounts::default(),
            spans: scheme.map(|s| (s, SpanCounts::default())),
            sub_total: 0,
            sub_correct: 0,
            sentences: 0,
        }
    }

    fn add(
        &mut self,
        model: &TaggerModel,
        encoding: &SubwordEncoding,
        gold: &[&str],
        strategy: ClubbingStrategy,
    ) -> Result<(), MetricsError> {
        let gold_idx: Vec<usize> = gold
            .iter()
            .map(|g| model.labels.index_of(g).expect("labels checked before evaluation"))
            .collect();
        let sub_pred = model.predict_subtokens(&encoding.ids)?;
        let sub_gold = propagate_labels(&gold_idx, encoding).map_err(TaggerError::from)?;
        self.sub_total += sub_gold.len();
        self.sub_correct += sub_pred.iter().zip(&sub_gold).filter(|(p, g)| p == g).count();

        let word_pred = crate::alignment::club_labels(&sub_pred, encoding, strategy).map_err(TaggerError::from)?;
        let pred: Vec<&str> = word_pred.iter().map(|&l| model.labels.label(l)).collect();
        self.counts.add(&pred, gold)?;
        if let Some((scheme, spans)) = &mut self.spans {
            spans.add(&pred, gold, *scheme)?;
        }
        self.sentences += 1;
        Ok(())
    }

    fn finish<'a>(
        self,
        strategy: ClubbingStrategy,
        encodings: impl IntoIterator<Item = &'a SubwordEncoding>,
        unk: Option<u32>,
    ) -> EvalReport {
        EvalReport {
            strategy,
            sentences: self.sentences,
            token: token_metrics(&self.counts),
            counts: self.counts,
            spans: self.spans.map(|(scheme, counts)| SpanReport {
                scheme,
                counts,
                scores: counts.scores(),
            }),
            fertility: fertility_from_encodings(encodings, unk),
            subtoken_accuracy: ratio(self.sub_correct, self.sub_total),
        }
    }
}

/// Segments every sentence with the model's own tokenizer, predicts, clubs
/// subtoken predictions to words and scores them against the gold tags.
/// Fails with `LabelMismatch` when the corpus uses a label the model lacks.
pub fn evaluate(
    model: &TaggerModel,
    corpus: &LabeledCorpus,
    strategy: ClubbingStrategy,
    scheme: Option<Scheme>,
) -> Result<EvalReport, MetricsError> {
    let ModelTokenizer::Native(segmenter) = &model.tokenizer else {
        return Err(TaggerError::NoNativeTokenizer.into());
    };
    let encodings = segmenter.segment_corpus(corpus);
    evaluate_encoded(model, corpus, &encodings, strategy, scheme)
}

/// Like [`evaluate`] with segmentations supplied by the caller, one per
/// sentence.
pub fn evaluate_encoded(
    model: &TaggerModel,
    corpus: &LabeledCorpus,
    encodings: &[SubwordEncoding],
    strategy: ClubbingStrategy,
    scheme: Option<Scheme>,
) -> Result<EvalReport, MetricsError> {
    model.check_labels(&crate::corpus::build_label_set(corpus))?;
    crate::tokenizers::check_alignment_with(corpus, encodings).map_err(TaggerError::from)?;
    let mut acc = Accumulator::new(scheme);
    for (sentence, encoding) in corpus.iter().zip(encodings) {
        let gold: Vec<&str> = sentence.tags().iter().map(String::as_str).collect();
        acc.add(model, encoding, &gold, strategy)?;
    }
    Ok(acc.finish(strategy, encodings, model.tokenizer.unk_id()))
}

/// Scores an encoded dataset whose label indices refer to the model's own
/// label set.
pub fn evaluate_dataset(
    model: &TaggerModel,
    dataset: &Dataset,
    strategy: ClubbingStrategy,
    scheme: Option<Scheme>,
) -> Result<EvalReport, MetricsError> {
    let mut acc = Accumulator::new(scheme);
    for s in &dataset.sentences {
        let gold = word_label_names(&model.labels, &s.word_labels)?;
        acc.add(model, &s.encoding, &gold, strategy)?;
    }
    Ok(acc.finish(strategy, dataset.encodings(), model.tokenizer.unk_id()))
}

fn word_label_names<'a>(labels: &'a LabelSet, indices: &[usize]) -> Result<Vec<&'a str>, TaggerError> {
    indices
        .iter()
        .map(|&i| {
            if i < labels.len() {
                Ok(labels.label(i))
            } else {
                Err(TaggerError::LabelMismatch(format!(
                    "label index {i} outside the model's {} labels",
                    labels.len()
                )))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions() {
        let gold = ["B-NEL", "O", "B-NEP", "I-NEP"];
        let counts = token_confusion(&gold, &gold).unwrap();
        for c in counts.per_label.values() {
            assert_eq!((c.fp, c.fn_), (0, 0));
        }
        let m = token_metrics(&counts);
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(
            m.macro_avg,
            Prf {
                precision: 1.0,
                recall: 1.0,
                f1: 1.0
            }
        );
        assert_eq!(
            m.micro_avg,
            Prf {
                precision: 1.0,
                recall: 1.0,
                f1: 1.0
            }
        );
        assert!(!m.macro_undefined);
    }

    #[test]
    fn hand_count() {
        let counts = token_confusion(&["B-NEL", "O"], &["B-NEL", "B-NEL"]).unwrap();
        assert_eq!(counts.get("B-NEL"), LabelCounts { tp: 1, fp: 0, fn_: 1 });
        let m = token_metrics(&counts);
        let c = &m.per_class[0];
        assert_eq!(c.scores.precision, 1.0);
        assert_eq!(c.scores.recall, 0.5);
        assert!((c.scores.f1 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn all_outside_predictor() {
        let gold = ["B-NEL", "O", "O", "B-NEP", "O"];
        let pred = ["O"; 5];
        let m = token_metrics(&token_confusion(&pred, &gold).unwrap());
        assert_eq!(m.macro_avg.recall, 0.0);
        assert_eq!(m.macro_avg.f1, 0.0);
        assert_eq!(m.accuracy, 3.0 / 5.0);
    }

    #[test]
    fn no_gold_entities_flags_macro() {
        let m = token_metrics(&token_confusion(&["O", "B-NEL"], &["O", "O"]).unwrap());
        assert!(m.macro_undefined);
        assert_eq!(m.macro_avg, Prf::default());
    }

    #[test]
    fn length_mismatch() {
        assert_eq!(
            token_confusion(&["O"], &["O", "O"]),
            Err(MetricsError::LengthMismatch { expected: 2, found: 1 })
        );
    }

    #[test]
    fn micro_single_class_equals_class_f1() {
        let gold = ["X", "X", "O", "X", "O"];
        let pred = ["X", "O", "X", "X", "O"];
        let m = token_metrics(&token_confusion(&pred, &gold).unwrap());
        assert_eq!(m.per_class.len(), 1);
        assert_eq!(m.micro_avg, m.per_class[0].scores);
    }

    #[test]
    fn merge_matches_concatenation() {
        let mut a = token_confusion(&["X", "O"], &["X", "X"]).unwrap();
        let b = token_confusion(&["Y", "O", "X"], &["Y", "Y", "O"]).unwrap();
        a.merge(&b);
        let whole = token_confusion(&["X", "O", "Y", "O", "X"], &["X", "X", "Y", "Y", "O"]).unwrap();
        assert_eq!(a, whole);
    }

    #[test]
    fn bio_spans() {
        assert_eq!(
            decode_spans(&["B-NEL", "I-NEL", "O"], Scheme::Bio),
            [Span::new("NEL", 0, 2)]
        );
        assert_eq!(decode_spans(&["I-NEL"], Scheme::Bio), [Span::new("NEL", 0, 1)]);
        assert_eq!(
            decode_spans(&["B-NEL", "I-NEP", "B-NEL", "B-NEL"], Scheme::Bio),
            [
                Span::new("NEL", 0, 1),
                Span::new("NEP", 1, 2),
                Span::new("NEL", 2, 3),
                Span::new("NEL", 3, 4)
            ]
        );
    }

    #[test]
    fn flat_spans() {
        assert_eq!(
            decode_spans(&["NEL", "NEL", "NEP"], Scheme::Flat),
            [Span::new("NEL", 0, 2), Span::new("NEP", 2, 3)]
        );
    }

    #[test]
    fn bio_reencode_repairs_orphans() {
        let labels = ["I-NEL", "I-NEL", "O", "I-NEP", "B-NEP", "I-NEP"];
        let spans = decode_spans(&labels, Scheme::Bio);
        assert_eq!(
            encode_spans(&spans, labels.len(), Scheme::Bio),
            ["B-NEL", "I-NEL", "O", "B-NEP", "B-NEP", "I-NEP"]
        );
    }

    #[test]
    fn scheme_parse() {
        assert_eq!(Scheme::parse("BIO"), Ok(Scheme::Bio));
        assert_eq!(Scheme::parse("flat"), Ok(Scheme::Flat));
        assert_eq!(Scheme::parse("bioes"), Err(MetricsError::UnknownScheme("bioes".into())));
    }

    #[test]
    fn span_scores() {
        let mut c = SpanCounts::default();
        c.add(&["B-X", "I-X", "O", "B-Y"], &["B-X", "I-X", "O", "B-X"], Scheme::Bio)
            .unwrap();
        assert_eq!(
            c,
            SpanCounts {
                gold: 2,
                predicted: 2,
                correct: 1
            }
        );
        assert_eq!(c.scores().f1, 0.5);
    }
}
