use std::io::Write;
use std::path::{Path, PathBuf};

use hybridner_core::metrics::Scheme;

use super::{write_out, EvalArgs};
use crate::error::{CliError, Result};
use crate::io;
use crate::pipeline::{load_model, run_eval};
use crate::report::{eval_table, eval_tsv, ReportJson};

/// `report.tsv` becomes `report.<strategy>.tsv`.
fn with_strategy(path: &Path, strategy: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.{strategy}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{strategy}"),
    };
    path.with_file_name(name)
}

pub fn run_eval_command(args: &EvalArgs, out: &mut dyn Write) -> Result<()> {
    let scheme = match &args.scheme {
        Some(s) => Some(Scheme::parse(s).map_err(|e| CliError::input(e.to_string()))?),
        None => None,
    };
    let model = load_model(&args.model)?;
    let strategies = args.strategy.strategies();
    let mut text = String::new();
    for (i, strategy) in strategies.iter().enumerate() {
        let report = run_eval(&model, &args.test, args.segmentation.as_deref(), *strategy, scheme)?;
        let json = ReportJson::from(&report);
        if i > 0 {
            text.push('\n');
        }
        text.push_str(&eval_table(&json));
        if let Some(path) = &args.out {
            let path = if strategies.len() > 1 {
                with_strategy(path, strategy.name())
            } else {
                path.clone()
            };
            io::write_atomic(&path, eval_tsv(&json).as_bytes())?;
        }
    }
    write_out(out, &text)
}
