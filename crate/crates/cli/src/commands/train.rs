use std::io::Write;
use std::path::PathBuf;

use super::{write_out, TrainArgs};
use crate::config::{parse_arch, RunConfig, TokenizerSpec};
use crate::error::{CliError, Result};
use crate::pipeline::{run_training, TrainJob};

pub fn tokenizer_from_args(args: &TrainArgs) -> Result<TokenizerSpec> {
    if let Some(seg) = &args.segmentation {
        if args.mode.is_some() {
            return Err(CliError::input("--mode does not apply to --segmentation"));
        }
        let mut parts = seg.split(',').map(str::trim);
        let train = parts.next().filter(|p| !p.is_empty());
        let validation = parts.next().filter(|p| !p.is_empty()).map(PathBuf::from);
        if parts.next().is_some() || train.is_none() {
            return Err(CliError::input("--segmentation takes <train.jsonl>[,<val.jsonl>]"));
        }
        return Ok(TokenizerSpec::External {
            train: PathBuf::from(train.unwrap()),
            validation,
            test: None,
        });
    }
    match (&args.vocab, args.mode) {
        (Some(path), mode) => Ok(TokenizerSpec::Vocab {
            path: path.clone(),
            mode: mode.map_or(hybridner_core::tokenizers::Mode::Subword, Into::into),
        }),
        (None, None | Some(super::ModeArg::Word)) => Ok(TokenizerSpec::Word),
        (None, Some(super::ModeArg::Subword)) => Err(CliError::input("subword mode needs --vocab")),
    }
}

pub fn run_train(args: &TrainArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let arch = parse_arch(&args.arch).map_err(CliError::input)?;
    let mut config = match &args.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let tokenizer = tokenizer_from_args(args)?;
    let job = TrainJob {
        name: format!("{}-{}", tokenizer.default_name(), arch.name()),
        tokenizer,
        arch,
        train: args.train.clone(),
        validation: args.val.clone(),
        config,
        out_dir: args.out.clone(),
    };
    let outcome = run_training(&job)?;
    for w in &outcome.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    let r = &outcome.record;
    let mut text = format!(
        "trained {} ({} parameters) for {} epochs in {:.1}s\n",
        r.name, r.param_count, r.epochs_run, r.train_seconds
    );
    if let (Some(best), Some(m)) = (r.best_epoch, &r.metrics) {
        text.push_str(&format!(
            "best epoch {best}: validation macro-F1 {:.4}, accuracy {:.4}\n",
            m.macro_avg.f1, m.accuracy
        ));
    }
    text.push_str(&format!("checkpoint: {}\n", r.checkpoint));
    write_out(out, &text)
}
