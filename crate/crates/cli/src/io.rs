//! File access for the commands: every error names the offending path.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use hybridner_core::corpus::{parse_conll, LabeledCorpus, Split};
use hybridner_core::taggers::{decode_checkpoint, encode_checkpoint, TaggerError, TaggerModel};
use hybridner_core::tokenizers::{validate_external, SubwordEncoding, Vocab};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::file(path, e))
}

pub fn read_conll(path: &Path, split: Split) -> Result<LabeledCorpus> {
    let text = read_text(path)?;
    parse_conll(&text)
        .map(|c| c.with_split(split))
        .map_err(|e| CliError::file(path, e))
}

/// Special tokens and limits applied when loading a vocab file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabOptions {
    pub unk_token: String,
    pub pad_token: String,
    pub continuation_prefix: String,
    pub max_word_chars: usize,
}

impl Default for VocabOptions {
    fn default() -> Self {
        Self {
            unk_token: "[UNK]".into(),
            pad_token: "[PAD]".into(),
            continuation_prefix: "##".into(),
            max_word_chars: 100,
        }
    }
}

pub fn load_vocab(path: &Path, opts: &VocabOptions) -> Result<Vocab> {
    let text = read_text(path)?;
    Vocab::from_text(&text, &opts.unk_token, &opts.pad_token, &opts.continuation_prefix)
        .map(|v| v.with_max_word_chars(opts.max_word_chars))
        .map_err(|e| CliError::file(path, e))
}

/// One line of an external segmentation file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentationRecord {
    #[serde(default)]
    pub subtokens: Vec<String>,
    pub ids: Vec<u32>,
    pub word_ids: Vec<usize>,
}

impl From<SegmentationRecord> for SubwordEncoding {
    fn from(r: SegmentationRecord) -> Self {
        let subtokens = if r.subtokens.is_empty() {
            r.ids.iter().map(u32::to_string).collect()
        } else {
            r.subtokens
        };
        SubwordEncoding {
            subtokens,
            ids: r.ids,
            word_ids: r.word_ids,
        }
    }
}

impl From<&SubwordEncoding> for SegmentationRecord {
    fn from(e: &SubwordEncoding) -> Self {
        Self {
            subtokens: e.subtokens.clone(),
            ids: e.ids.clone(),
            word_ids: e.word_ids.clone(),
        }
    }
}

/// Reads JSON-lines segmentations, one record per sentence; blank lines are
/// skipped.
pub fn load_segmentation(path: &Path) -> Result<Vec<SubwordEncoding>> {
    let text = read_text(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: SegmentationRecord =
            serde_json::from_str(line).map_err(|e| CliError::input(format!("{}:{}: {e}", path.display(), i + 1)))?;
        out.push(rec.into());
    }
    validate_external(&out).map_err(|e| CliError::file(path, e))?;
    Ok(out)
}

pub fn write_segmentation(path: &Path, encodings: &[SubwordEncoding]) -> Result<()> {
    let mut text = String::new();
    for e in encodings {
        text.push_str(&serde_json::to_string(&SegmentationRecord::from(e)).expect("plain data serializes"));
        text.push('\n');
    }
    write_atomic(path, text.as_bytes())
}

/// Writes through a temporary sibling and renames it into place, so readers
/// never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(|e| CliError::file(&dir, e))?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = fs::remove_file(&tmp);
        CliError::file(path, e)
    })
}

pub fn save_checkpoint(path: &Path, model: &TaggerModel) -> Result<()> {
    write_atomic(path, &encode_checkpoint(model))
}

/// A missing file is an input error; undecodable bytes are reported as the
/// core error so the caller can pick the exit code.
pub fn load_checkpoint(path: &Path) -> Result<std::result::Result<TaggerModel, TaggerError>> {
    let bytes = fs::read(path).map_err(|e| CliError::file(path, e))?;
    Ok(decode_checkpoint(&bytes))
}
