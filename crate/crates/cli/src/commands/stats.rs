use std::fmt::Write as _;
use std::io::Write;

use hybridner_core::corpus::{corpus_stats, Split};

use super::{write_out, StatsArgs};
use crate::error::Result;
use crate::io;

pub fn run_stats(args: &StatsArgs, out: &mut dyn Write) -> Result<()> {
    let mut text = String::from("file\tsentences\ttokens\tentity_tokens\n");
    let mut labels = String::new();
    for path in &args.inputs {
        let stats = corpus_stats(&io::read_conll(path, Split::Unsplit)?);
        let name = path.display();
        let _ = writeln!(
            text,
            "{name}\t{}\t{}\t{}",
            stats.sentence_count, stats.token_count, stats.tag_count
        );
        for (label, count) in &stats.per_label_counts {
            let _ = writeln!(labels, "{name}\t{label}\t{count}");
        }
    }
    text.push_str("\nfile\tlabel\tcount\n");
    text.push_str(&labels);
    write_out(out, &text)
}
