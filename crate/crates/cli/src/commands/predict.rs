use std::io::{Read, Write};

use hybridner_core::taggers::predict_sentence;

use super::{write_out, PredictArgs};
use crate::error::{CliError, Result};
use crate::io;
use crate::pipeline::load_model;

/// Tags each non-blank input line and prints CoNLL `word\tlabel` rows with a
/// blank line after every sentence.
pub fn run_predict(args: &PredictArgs, out: &mut dyn Write) -> Result<()> {
    let strategy = args.strategy.single()?;
    let model = load_model(&args.model)?;
    let input = match &args.input {
        Some(p) => io::read_text(p)?,
        None => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| CliError::input(format!("reading stdin: {e}")))?;
            s
        }
    };
    let mut text = String::new();
    for line in input.lines() {
        let words: Vec<&str> = line.split_whitespace().collect();
        if words.is_empty() {
            continue;
        }
        let tagged = predict_sentence(&model, &words, strategy).map_err(CliError::evaluation)?;
        for (w, l) in tagged {
            text.push_str(&w);
            text.push('\t');
            text.push_str(&l);
            text.push('\n');
        }
        text.push('\n');
    }
    match &args.out {
        Some(p) => io::write_atomic(p, text.as_bytes()),
        None => write_out(out, &text),
    }
}
