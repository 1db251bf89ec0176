mod compare;
mod eval;
mod predict;
mod stats;
mod synth;
mod tokenize;
mod train;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hybridner_core::alignment::ClubbingStrategy;
use hybridner_core::tokenizers::Mode;

use crate::error::{CliError, Result};

pub use compare::run_compare;
pub use eval::run_eval_command;
pub use predict::run_predict;
pub use stats::run_stats;
pub use synth::run_synth;
pub use tokenize::run_tokenize;
pub use train::run_train;

#[derive(Debug, Parser)]
#[command(
    name = "hybridner",
    version,
    about = "Subword-aware CNN/LSTM/BiLSTM named entity taggers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment a corpus and report fertility statistics.
    Tokenize(TokenizeArgs),
    /// Train one tagger.
    Train(TrainArgs),
    /// Tag raw sentences with a trained model.
    Predict(PredictArgs),
    /// Score a trained model on a labeled file.
    Eval(EvalArgs),
    /// Train and evaluate every tokenizer × architecture pair of a grid.
    Compare(CompareArgs),
    /// Generate a synthetic suffix-inflection corpus and its vocab.
    Synth(SynthArgs),
    /// Print sentence, token and label counts of CoNLL files.
    Stats(StatsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Subword,
    Word,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Subword => Mode::Subword,
            ModeArg::Word => Mode::Word,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    First,
    Majority,
    /// Report both strategies.
    Both,
}

impl StrategyArg {
    pub fn strategies(self) -> Vec<ClubbingStrategy> {
        match self {
            StrategyArg::First => vec![ClubbingStrategy::First],
            StrategyArg::Majority => vec![ClubbingStrategy::Majority],
            StrategyArg::Both => vec![ClubbingStrategy::First, ClubbingStrategy::Majority],
        }
    }

    pub fn single(self) -> Result<ClubbingStrategy> {
        match self {
            StrategyArg::First => Ok(ClubbingStrategy::First),
            StrategyArg::Majority => Ok(ClubbingStrategy::Majority),
            StrategyArg::Both => Err(CliError::input("--strategy both is only accepted by eval")),
        }
    }
}

#[derive(Debug, Args)]
pub struct TokenizeArgs {
    /// CoNLL file to segment.
    pub input: PathBuf,
    /// Vocab file, one token per line. Word mode without a vocab uses the
    /// input's own words.
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "subword")]
    pub mode: ModeArg,
    /// Run config supplying special tokens and `max_word_chars`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Also write the segmentation as JSON lines.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub val: Option<PathBuf>,
    /// Vocab file; without it the word baseline vocab is built from the
    /// training split.
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Segmentation mode for `--vocab` (default subword).
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// External segmentations: `<train.jsonl>[,<val.jsonl>]`.
    #[arg(long, conflicts_with = "vocab")]
    pub segmentation: Option<String>,
    #[arg(long, default_value = "cnn")]
    pub arch: String,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory for model.ckpt, history.txt and run.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    /// Test segmentation for models trained on external ids.
    #[arg(long)]
    pub segmentation: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "first")]
    pub strategy: StrategyArg,
    /// Also score entity spans under this scheme (`bio` or `flat`).
    #[arg(long)]
    pub scheme: Option<String>,
    /// TSV report path. With `--strategy both` the strategy name is added
    /// before the extension.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// One whitespace-separated sentence per line; stdin when omitted.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "first")]
    pub strategy: StrategyArg,
    /// Write CoNLL output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Grid file.
    #[arg(long = "config", value_name = "GRID")]
    pub grid: PathBuf,
    /// Overrides the grid's `out` directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the grid seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Run cells on separate threads.
    #[arg(long)]
    pub parallel: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Generator config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory for train/validation/test .conll files and vocab.txt.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
}

/// Runs a parsed command; regular output goes to `out`, warnings to `err`.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Tokenize(a) => run_tokenize(&a, out),
        Command::Train(a) => run_train(&a, out, err),
        Command::Predict(a) => run_predict(&a, out),
        Command::Eval(a) => run_eval_command(&a, out),
        Command::Compare(a) => run_compare(&a, out, err),
        Command::Synth(a) => run_synth(&a, out),
        Command::Stats(a) => run_stats(&a, out),
    }
}

pub(crate) fn write_out(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::input(format!("writing output: {e}")))
}
