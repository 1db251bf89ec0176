use std::fmt::Write as _;
use std::io::Write;

use hybridner_core::corpus::Split;
use hybridner_core::tokenizers::{build_word_vocab, fertility_from_encodings, Mode, Segmenter};

use super::{write_out, TokenizeArgs};
use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::io;

/// Prints one line of space-separated subtokens per sentence followed by
/// tab-separated summary statistics.
pub fn run_tokenize(args: &TokenizeArgs, out: &mut dyn Write) -> Result<()> {
    let config = match &args.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    let corpus = io::read_conll(&args.input, Split::Unsplit)?;
    let mode = Mode::from(args.mode);
    let vocab = match (&args.vocab, mode) {
        (Some(p), _) => io::load_vocab(p, &config.vocab)?,
        (None, Mode::Word) => build_word_vocab(&corpus, 1),
        (None, Mode::Subword) => return Err(CliError::input("subword mode needs --vocab")),
    };
    let unk = vocab.unk_id();
    let segmenter = Segmenter::new(vocab, mode);
    let encodings = segmenter.segment_corpus(&corpus);

    let mut text = String::new();
    for e in &encodings {
        text.push_str(&e.subtokens.join(" "));
        text.push('\n');
    }
    let stats = fertility_from_encodings(&encodings, Some(unk));
    let _ = writeln!(text, "\nmode\t{}", mode.name());
    let _ = writeln!(text, "sentences\t{}", encodings.len());
    let _ = writeln!(text, "words\t{}", stats.words_total);
    let _ = writeln!(text, "subtokens\t{}", stats.subtokens_total);
    let _ = writeln!(text, "fertility\t{:.4}", stats.fertility);
    let _ = writeln!(text, "unk_word_rate\t{:.4}", stats.unk_word_rate);
    for (len, count) in &stats.length_histogram {
        let _ = writeln!(text, "length\t{len}\t{count}");
    }
    write_out(out, &text)?;
    if let Some(p) = &args.out {
        io::write_segmentation(p, &encodings)?;
    }
    Ok(())
}
