//! Renderings of evaluation results: JSON, TSV, plain text and the
//! tokenizer × architecture comparison table.

use std::fmt::Write as _;

use hybridner_core::metrics::{EvalReport, Prf};
use hybridner_core::taggers::{Arch, EpochRecord};
use serde::{Deserialize, Serialize};

pub const HEADLINE_NOTE: &str = "P/R/F1 are macro averages over non-O classes present in gold; \
accuracy counts every word including O";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrfJson {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl From<Prf> for PrfJson {
    fn from(p: Prf) -> Self {
        Self {
            precision: p.precision,
            recall: p.recall,
            f1: p.f1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassJson {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanJson {
    pub scheme: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub gold: usize,
    pub predicted: usize,
    pub correct: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FertilityJson {
    pub words: usize,
    pub subtokens: usize,
    pub fertility: f64,
    pub unk_word_rate: f64,
}

/// Serializable form of an [`EvalReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub strategy: String,
    pub sentences: usize,
    pub words: usize,
    pub per_class: Vec<ClassJson>,
    pub macro_avg: PrfJson,
    pub macro_undefined: bool,
    pub micro_avg: PrfJson,
    pub accuracy: f64,
    pub subtoken_accuracy: f64,
    pub spans: Option<SpanJson>,
    pub fertility: FertilityJson,
}

impl From<&EvalReport> for ReportJson {
    fn from(r: &EvalReport) -> Self {
        Self {
            strategy: r.strategy.name().to_string(),
            sentences: r.sentences,
            words: r.counts.total_tokens,
            per_class: r
                .token
                .per_class
                .iter()
                .map(|c| ClassJson {
                    label: c.label.clone(),
                    precision: c.scores.precision,
                    recall: c.scores.recall,
                    f1: c.scores.f1,
                    support: c.support(),
                    tp: c.counts.tp,
                    fp: c.counts.fp,
                    fn_: c.counts.fn_,
                })
                .collect(),
            macro_avg: r.token.macro_avg.into(),
            macro_undefined: r.token.macro_undefined,
            micro_avg: r.token.micro_avg.into(),
            accuracy: r.token.accuracy,
            subtoken_accuracy: r.subtoken_accuracy,
            spans: r.spans.as_ref().map(|s| SpanJson {
                scheme: s.scheme.name().to_string(),
                precision: s.scores.precision,
                recall: s.scores.recall,
                f1: s.scores.f1,
                gold: s.counts.gold,
                predicted: s.counts.predicted,
                correct: s.counts.correct,
            }),
            fertility: FertilityJson {
                words: r.fertility.words_total,
                subtokens: r.fertility.subtokens_total,
                fertility: r.fertility.fertility,
                unk_word_rate: r.fertility.unk_word_rate,
            },
        }
    }
}

/// Columns `class precision recall f1 support`, one row per non-O class, then
/// `macro`, `micro` and `accuracy` rows. The accuracy value sits in the
/// precision column; support there is the word count.
pub fn eval_tsv(r: &ReportJson) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# strategy: {}; {HEADLINE_NOTE}", r.strategy);
    out.push_str("class\tprecision\trecall\tf1\tsupport\n");
    let entity_support: usize = r.per_class.iter().map(|c| c.support).sum();
    for c in &r.per_class {
        let _ = writeln!(
            out,
            "{}\t{:.4}\t{:.4}\t{:.4}\t{}",
            c.label, c.precision, c.recall, c.f1, c.support
        );
    }
    for (name, p) in [("macro", r.macro_avg), ("micro", r.micro_avg)] {
        let _ = writeln!(
            out,
            "{name}\t{:.4}\t{:.4}\t{:.4}\t{entity_support}",
            p.precision, p.recall, p.f1
        );
    }
    let _ = writeln!(out, "accuracy\t{:.4}\t\t\t{}", r.accuracy, r.words);
    out
}

/// Aligned plain-text rendering for the terminal.
pub fn eval_table(r: &ReportJson) -> String {
    let width = r
        .per_class
        .iter()
        .map(|c| c.label.chars().count())
        .max()
        .unwrap_or(0)
        .max(8);
    let mut out = String::new();
    let _ = writeln!(out, "clubbing strategy: {}", r.strategy);
    let _ = writeln!(
        out,
        "{:<width$}  {:>9}  {:>9}  {:>9}  {:>8}",
        "class", "precision", "recall", "f1", "support"
    );
    for c in &r.per_class {
        let _ = writeln!(
            out,
            "{:<width$}  {:>9.4}  {:>9.4}  {:>9.4}  {:>8}",
            c.label, c.precision, c.recall, c.f1, c.support
        );
    }
    for (name, p) in [("macro", r.macro_avg), ("micro", r.micro_avg)] {
        let _ = writeln!(
            out,
            "{:<width$}  {:>9.4}  {:>9.4}  {:>9.4}",
            name, p.precision, p.recall, p.f1
        );
    }
    if r.macro_undefined {
        let _ = writeln!(out, "(no entity words in gold; macro average reported as 0)");
    }
    let _ = writeln!(out, "{:<width$}  {:>9.4}  ({} words)", "accuracy", r.accuracy, r.words);
    let _ = writeln!(out, "subtoken accuracy before clubbing: {:.4}", r.subtoken_accuracy);
    if let Some(s) = &r.spans {
        let _ = writeln!(
            out,
            "entity spans ({}): precision {:.4}  recall {:.4}  f1 {:.4}  (gold {}, predicted {}, correct {})",
            s.scheme, s.precision, s.recall, s.f1, s.gold, s.predicted, s.correct
        );
    }
    let _ = writeln!(
        out,
        "fertility {:.4} subtokens/word, unknown-word rate {:.4}",
        r.fertility.fertility, r.fertility.unk_word_rate
    );
    out
}

/// One line per epoch: `epoch=<n>\ttrain_loss=<x>\tval_macro_f1=<x|none>\ttruncated=<n>`.
/// Floats use the shortest representation that reads back exactly.
pub fn history_line(e: &EpochRecord) -> String {
    let val = e.val_macro_f1.map_or_else(|| "none".to_string(), |v| v.to_string());
    format!(
        "epoch={}\ttrain_loss={}\tval_macro_f1={}\ttruncated={}\n",
        e.epoch, e.train_loss, val, e.truncated_rows
    )
}

/// Outcome of one grid cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Done(PrfAcc),
    Failed(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrfAcc {
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
}

impl From<&ReportJson> for PrfAcc {
    fn from(r: &ReportJson) -> Self {
        Self {
            f1: r.macro_avg.f1,
            precision: r.macro_avg.precision,
            recall: r.macro_avg.recall,
            accuracy: r.accuracy,
        }
    }
}

fn pct(v: f64) -> String {
    format!("{:.2}", 100.0 * v)
}

/// Markdown table with one row per tokenizer and an `F1 | P | R | Acc` column
/// group per architecture; the best F1 of each architecture is bold.
pub fn comparison_markdown(rows: &[String], archs: &[Arch], cells: &[Vec<Cell>], strategy: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Values in percent. {HEADLINE_NOTE}. Clubbing strategy: {strategy}.\n"
    );
    out.push_str("| Tokenizer/Model |");
    for a in archs {
        for m in ["F1", "P", "R", "Acc"] {
            let _ = write!(out, " {} {m} |", a.display_name());
        }
    }
    out.push('\n');
    out.push_str("|---|");
    for _ in 0..archs.len() * 4 {
        out.push_str("---:|");
    }
    out.push('\n');
    let best: Vec<Option<f64>> = (0..archs.len())
        .map(|j| {
            cells
                .iter()
                .filter_map(|row| match &row[j] {
                    Cell::Done(m) => Some(m.f1),
                    Cell::Failed(_) => None,
                })
                .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
        })
        .collect();
    for (name, row) in rows.iter().zip(cells) {
        let _ = write!(out, "| {name} |");
        for (j, cell) in row.iter().enumerate() {
            match cell {
                Cell::Done(m) => {
                    let f1 = pct(m.f1);
                    if best[j] == Some(m.f1) {
                        let _ = write!(out, " **{f1}** |");
                    } else {
                        let _ = write!(out, " {f1} |");
                    }
                    let _ = write!(out, " {} | {} | {} |", pct(m.precision), pct(m.recall), pct(m.accuracy));
                }
                Cell::Failed(_) => out.push_str(" failed | failed | failed | failed |"),
            }
        }
        out.push('\n');
    }
    out
}

/// Long-form matrix: `tokenizer arch f1 precision recall accuracy status`.
pub fn comparison_tsv(rows: &[String], archs: &[Arch], cells: &[Vec<Cell>]) -> String {
    let mut out = String::from("tokenizer\tarch\tf1\tprecision\trecall\taccuracy\tstatus\n");
    for (name, row) in rows.iter().zip(cells) {
        for (arch, cell) in archs.iter().zip(row) {
            match cell {
                Cell::Done(m) => {
                    let _ = writeln!(
                        out,
                        "{name}\t{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\tok",
                        arch.name(),
                        m.f1,
                        m.precision,
                        m.recall,
                        m.accuracy
                    );
                }
                Cell::Failed(why) => {
                    let why = why.replace(['\t', '\n'], " ");
                    let _ = writeln!(out, "{name}\t{}\t\t\t\t\tfailed: {why}", arch.name());
                }
            }
        }
    }
    out
}
