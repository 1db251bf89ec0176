use std::io::Write;
use std::path::{Path, PathBuf};

use super::{write_out, CompareArgs};
use crate::config::{Grid, TokenizerSpec};
use crate::error::{CliError, Result};
use crate::io;
use crate::pipeline::{run_eval, run_training, TrainJob, RECORD_FILE};
use crate::report::{comparison_markdown, comparison_tsv, eval_tsv, Cell, PrfAcc, ReportJson};

pub const EVAL_FILE: &str = "eval.tsv";
pub const MARKDOWN_FILE: &str = "comparison.md";
pub const MATRIX_FILE: &str = "comparison.tsv";

/// Trains one cell, scores it on the grid's test file and persists the
/// record with test metrics.
fn run_cell(grid: &Grid, job: &TrainJob) -> Result<(ReportJson, Vec<String>)> {
    let outcome = run_training(job)?;
    let segmentation = match &job.tokenizer {
        TokenizerSpec::External { test: Some(p), .. } => Some(p.as_path()),
        TokenizerSpec::External { test: None, .. } => {
            return Err(CliError::input(format!(
                "{}: external tokenizer has no test segmentation",
                job.name
            )))
        }
        _ => None,
    };
    let report = run_eval(
        &outcome.model,
        &grid.test,
        segmentation,
        job.config.train.strategy,
        job.config.scheme,
    )?;
    let json = ReportJson::from(&report);
    io::write_atomic(&job.out_dir.join(EVAL_FILE), eval_tsv(&json).as_bytes())?;
    let mut record = outcome.record;
    record.metrics_split = Some("test".into());
    record.metrics = Some(json.clone());
    record.write(&job.out_dir.join(RECORD_FILE))?;
    Ok((json, outcome.warnings))
}

fn out_dir(args: &CompareArgs, grid: &Grid) -> Result<PathBuf> {
    args.out
        .clone()
        .or_else(|| grid.out.clone())
        .ok_or_else(|| CliError::input("no output directory: set `out` in the grid file or pass --out"))
}

pub fn grid_jobs(grid: &Grid, out: &Path) -> Vec<TrainJob> {
    let mut jobs = Vec::new();
    for (name, spec) in &grid.tokenizers {
        for &arch in &grid.archs {
            let run = Grid::run_name(name, arch);
            jobs.push(TrainJob {
                out_dir: out.join(&run),
                name: run,
                tokenizer: spec.clone(),
                arch,
                train: grid.train.clone(),
                validation: grid.validation.clone(),
                config: grid.config.clone(),
            });
        }
    }
    jobs
}

pub fn run_compare(args: &CompareArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let mut grid = Grid::from_file(&args.grid)?;
    if let Some(seed) = args.seed {
        grid.config.seed = seed;
    }
    let dir = out_dir(args, &grid)?;
    let jobs = grid_jobs(&grid, &dir);

    let results: Vec<Result<(ReportJson, Vec<String>)>> = if args.parallel {
        std::thread::scope(|s| {
            let handles: Vec<_> = jobs.iter().map(|job| s.spawn(|| run_cell(&grid, job))).collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| Err(CliError::training("run panicked"))))
                .collect()
        })
    } else {
        jobs.iter().map(|job| run_cell(&grid, job)).collect()
    };

    let n_archs = grid.archs.len();
    let mut cells: Vec<Vec<Cell>> = vec![Vec::with_capacity(n_archs); grid.tokenizers.len()];
    let mut first_error = None;
    for (i, (job, result)) in jobs.iter().zip(results).enumerate() {
        let cell = match result {
            Ok((report, warnings)) => {
                for w in warnings {
                    let _ = writeln!(err, "warning: {w}");
                }
                Cell::Done(PrfAcc::from(&report))
            }
            Err(e) => {
                let _ = writeln!(err, "error: run {} failed: {e}", job.name);
                let msg = e.to_string();
                first_error.get_or_insert(e);
                Cell::Failed(msg)
            }
        };
        cells[i / n_archs].push(cell);
    }
    if cells.iter().flatten().all(|c| matches!(c, Cell::Failed(_))) {
        return Err(first_error.expect("a failed cell left an error"));
    }

    let rows: Vec<String> = grid.tokenizers.iter().map(|(n, _)| n.clone()).collect();
    let markdown = comparison_markdown(&rows, &grid.archs, &cells, grid.config.train.strategy.name());
    io::write_atomic(&dir.join(MARKDOWN_FILE), markdown.as_bytes())?;
    io::write_atomic(
        &dir.join(MATRIX_FILE),
        comparison_tsv(&rows, &grid.archs, &cells).as_bytes(),
    )?;
    write_out(out, &markdown)
}
