use std::io::Write;

use hybridner_core::corpus::{generate_synthetic, synthetic_vocab, write_conll, SynthConfig};

use super::{write_out, SynthArgs};
use crate::config::synth_config_from_file;
use crate::error::{CliError, Result};
use crate::io;

pub fn run_synth(args: &SynthArgs, out: &mut dyn Write) -> Result<()> {
    let mut config = match &args.config {
        Some(p) => synth_config_from_file(p)?,
        None => SynthConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let splits = generate_synthetic(&config, config.seed).map_err(|e| CliError::input(e.to_string()))?;
    let files = [
        ("train.conll", write_conll(&splits.train)),
        ("validation.conll", write_conll(&splits.validation)),
        ("test.conll", write_conll(&splits.test)),
        ("vocab.txt", synthetic_vocab(&splits.lexicon).join("\n") + "\n"),
    ];
    let mut text = String::new();
    for (name, body) in &files {
        let path = args.out.join(name);
        io::write_atomic(&path, body.as_bytes())?;
        text.push_str(&format!("wrote {}\n", path.display()));
    }
    write_out(out, &text)
}
