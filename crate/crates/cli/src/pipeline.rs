//! Training and evaluation shared by the standalone commands and the
//! comparison harness, so a grid cell is exactly a `train` + `eval` run.

use std::path::{Path, PathBuf};
use std::time::Instant;

use hybridner_core::alignment::ClubbingStrategy;
use hybridner_core::corpus::{build_label_set, LabeledCorpus, Split};
use hybridner_core::metrics::{evaluate, evaluate_encoded, EvalReport, MetricsError, Scheme};
use hybridner_core::taggers::{
    build_model, count_params, train_with_clock, Arch, Dataset, ModelTokenizer, TaggerError, TaggerModel, TrainHistory,
};
use hybridner_core::tokenizers::{build_word_vocab, Mode, Segmenter, SubwordEncoding};
use serde::{Deserialize, Serialize};

use crate::config::{derive_seeds, ConfigSnapshot, RunConfig, TokenizerSpec};
use crate::error::{CliError, Result};
use crate::io;
use crate::report::{history_line, ReportJson};

pub const CHECKPOINT_FILE: &str = "model.ckpt";
pub const HISTORY_FILE: &str = "history.txt";
pub const RECORD_FILE: &str = "run.json";

/// Everything needed to reproduce one training run.
#[derive(Debug, Clone)]
pub struct TrainJob {
    pub name: String,
    pub tokenizer: TokenizerSpec,
    pub arch: Arch,
    pub train: PathBuf,
    pub validation: Option<PathBuf>,
    pub config: RunConfig,
    pub out_dir: PathBuf,
}

/// Persisted next to each checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub name: String,
    pub tokenizer: String,
    pub arch: String,
    pub seed: u64,
    pub init_seed: u64,
    pub shuffle_seed: u64,
    pub config: ConfigSnapshot,
    pub labels: Vec<String>,
    pub vocab_size: usize,
    pub param_count: usize,
    pub epochs_run: usize,
    pub best_epoch: Option<usize>,
    pub stopped_early: bool,
    pub train_seconds: f64,
    pub checkpoint: String,
    pub history: String,
    /// Which split `metrics` was computed on.
    pub metrics_split: Option<String>,
    pub metrics: Option<ReportJson>,
}

impl RunRecord {
    pub fn read(path: &Path) -> Result<Self> {
        let text = io::read_text(path)?;
        serde_json::from_str(&text).map_err(|e| CliError::file(path, e))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("plain data serializes");
        text.push('\n');
        io::write_atomic(path, text.as_bytes())
    }
}

pub struct TrainOutcome {
    pub model: TaggerModel,
    pub history: TrainHistory,
    pub record: RunRecord,
    pub warnings: Vec<String>,
}

fn max_id(encodings: &[SubwordEncoding]) -> Option<u32> {
    encodings.iter().flat_map(|e| e.ids.iter().copied()).max()
}

/// Builds the model tokenizer and the encoded training/validation splits.
fn prepare(
    job: &TrainJob,
    train: &LabeledCorpus,
    validation: Option<&LabeledCorpus>,
) -> Result<(ModelTokenizer, Vec<SubwordEncoding>, Option<Vec<SubwordEncoding>>)> {
    let native = |seg: Segmenter| {
        let tr = seg.segment_corpus(train);
        let va = validation.map(|v| seg.segment_corpus(v));
        (ModelTokenizer::Native(seg), tr, va)
    };
    Ok(match &job.tokenizer {
        TokenizerSpec::Word => native(Segmenter::new(build_word_vocab(train, 1), Mode::Word)),
        TokenizerSpec::Vocab { path, mode } => native(Segmenter::new(io::load_vocab(path, &job.config.vocab)?, *mode)),
        TokenizerSpec::External {
            train: tr_path,
            validation: va_path,
            test,
        } => {
            let tr = io::load_segmentation(tr_path)?;
            let va = match (validation, va_path) {
                (None, _) => None,
                (Some(_), Some(p)) => Some(io::load_segmentation(p)?),
                (Some(_), None) => {
                    return Err(CliError::input(
                        "a validation corpus was given but the external tokenizer has no validation segmentation",
                    ))
                }
            };
            // Ids seen in any listed file bound the embedding table.
            let bound = |encs: &[SubwordEncoding]| max_id(encs).map_or(0, |m| m as usize + 1);
            let mut size = job.config.external_vocab_size.unwrap_or(0).max(bound(&tr));
            match (&va, va_path) {
                (Some(v), _) => size = size.max(bound(v)),
                (None, Some(p)) => size = size.max(bound(&io::load_segmentation(p)?)),
                (None, None) => {}
            }
            if let Some(p) = test {
                size = size.max(bound(&io::load_segmentation(p)?));
            }
            (ModelTokenizer::External { vocab_size: size }, tr, va)
        }
    })
}

/// Trains one model and writes its checkpoint, history and run record into
/// `job.out_dir`.
pub fn run_training(job: &TrainJob) -> Result<TrainOutcome> {
    let train_corpus = io::read_conll(&job.train, Split::Train)?;
    let val_corpus = match &job.validation {
        Some(p) => Some(io::read_conll(p, Split::Validation)?),
        None => None,
    };
    let mut warnings = Vec::new();
    if val_corpus.is_none() {
        warnings.push(format!(
            "{}: no validation split given; early stopping disabled, final epoch kept",
            job.name
        ));
    }
    let (tokenizer, train_enc, val_enc) = prepare(job, &train_corpus, val_corpus.as_ref())?;

    let labels = build_label_set(&train_corpus);
    let train_set = Dataset::from_encodings(&train_corpus, train_enc, &labels).map_err(CliError::training)?;
    let val_set = match (&val_corpus, val_enc) {
        (Some(c), Some(e)) => Some(Dataset::from_encodings(c, e, &labels).map_err(|e| match e {
            TaggerError::LabelMismatch(why) => {
                CliError::training(format!("validation split uses a label absent from training: {why}"))
            }
            other => CliError::training(other),
        })?),
        _ => None,
    };

    let (init_seed, shuffle_seed) = derive_seeds(job.config.seed);
    let mut hyper = job.config.hyper;
    hyper.num_labels = labels.len();
    let mut model = build_model(job.arch, hyper, tokenizer, labels, init_seed).map_err(CliError::training)?;
    let mut train_cfg = job.config.train;
    train_cfg.seed = shuffle_seed;

    let start = Instant::now();
    let mut clock = || start.elapsed().as_secs_f64();
    let history = train_with_clock(&mut model, &train_set, val_set.as_ref(), &train_cfg, &mut clock)
        .map_err(CliError::training)?;
    let train_seconds = start.elapsed().as_secs_f64();

    let metrics = match &val_set {
        Some(v) => Some(ReportJson::from(
            &hybridner_core::metrics::evaluate_dataset(&model, v, train_cfg.strategy, job.config.scheme)
                .map_err(CliError::training)?,
        )),
        None => None,
    };

    let ckpt = job.out_dir.join(CHECKPOINT_FILE);
    let hist = job.out_dir.join(HISTORY_FILE);
    io::save_checkpoint(&ckpt, &model)?;
    let history_text: String = history.epochs.iter().map(history_line).collect();
    io::write_atomic(&hist, history_text.as_bytes())?;

    let record = RunRecord {
        name: job.name.clone(),
        tokenizer: job.tokenizer.describe(),
        arch: job.arch.name().to_string(),
        seed: job.config.seed,
        init_seed,
        shuffle_seed,
        config: job.config.snapshot(),
        labels: model.labels.labels().to_vec(),
        vocab_size: model.vocab_size(),
        param_count: count_params(&model),
        epochs_run: history.epochs.len(),
        best_epoch: history.best_epoch,
        stopped_early: history.stopped_early,
        train_seconds,
        checkpoint: ckpt.display().to_string(),
        history: hist.display().to_string(),
        metrics_split: metrics.as_ref().map(|_| "validation".to_string()),
        metrics,
    };
    record.write(&job.out_dir.join(RECORD_FILE))?;
    Ok(TrainOutcome {
        model,
        history,
        record,
        warnings,
    })
}

fn eval_error(e: MetricsError) -> CliError {
    CliError::evaluation(e)
}

/// Loads a checkpoint for evaluation: missing file is an input error, a
/// corrupt or incompatible one an evaluation error.
pub fn load_model(path: &Path) -> Result<TaggerModel> {
    io::load_checkpoint(path)?.map_err(|e| CliError::evaluation(format!("{}: {e}", path.display())))
}

/// Scores `model` on a CoNLL file, segmenting with the model's own
/// tokenizer or with `segmentation` when the model was trained on external
/// ids.
pub fn run_eval(
    model: &TaggerModel,
    test: &Path,
    segmentation: Option<&Path>,
    strategy: ClubbingStrategy,
    scheme: Option<Scheme>,
) -> Result<EvalReport> {
    let corpus = io::read_conll(test, Split::Test)?;
    match (segmentation, &model.tokenizer) {
        (Some(p), _) => {
            let encodings = io::load_segmentation(p)?;
            evaluate_encoded(model, &corpus, &encodings, strategy, scheme).map_err(eval_error)
        }
        (None, ModelTokenizer::External { .. }) => Err(CliError::evaluation(
            "model was trained on external segmentations; pass --segmentation for the test file",
        )),
        (None, ModelTokenizer::Native(_)) => evaluate(model, &corpus, strategy, scheme).map_err(eval_error),
    }
}
