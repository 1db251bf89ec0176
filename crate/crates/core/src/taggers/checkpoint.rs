//! Binary checkpoint format, little-endian throughout:
//!
//! ```text
//! magic "HNERCKPT" | u32 version
//! u8 arch | u64 × 6 hyperparameters
//! u32 label count | labels
//! u8 tokenizer kind
//!   0 native:   u8 mode | unk | pad | prefix | u64 max_word_chars | u32 n | tokens
//!   1 external: u64 vocab_size
//! u64 tokenizer fingerprint
//! u32 tensor count | per tensor: name | u32 ndims | u64 dims | f64 data
//! u64 FNV-1a checksum of every preceding byte
//! ```
//!
//! Strings are a u32 byte length followed by UTF-8. Weights are stored as
//! f64 so a save/load round trip is bit-exact.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{build_model, Arch, Hyperparams, ModelTokenizer, TaggerError, TaggerModel};
use crate::corpus::LabelSet;
use crate::tokenizers::{Fnv1a, Mode, Segmenter, Vocab};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"HNERCKPT";
pub const CHECKPOINT_VERSION: u32 = 1;

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn usize(&mut self, v: usize) {
        self.u64(v as u64);
    }
    fn str(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.0.extend_from_slice(s.as_bytes());
    }
}

pub fn encode_checkpoint(model: &TaggerModel) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(CHECKPOINT_MAGIC);
    w.u32(CHECKPOINT_VERSION);
    w.u8(model.arch.code());
    let h = &model.hyper;
    for v in [
        h.embed_dim,
        h.conv_filters,
        h.conv_kernel,
        h.lstm_hidden,
        h.bilstm_hidden,
        h.num_labels,
    ] {
        w.usize(v);
    }
    w.u32(model.labels.len() as u32);
    for l in model.labels.labels() {
        w.str(l);
    }
    match &model.tokenizer {
        ModelTokenizer::Native(seg) => {
            w.u8(0);
            w.u8(match seg.mode {
                Mode::Subword => 0,
                Mode::Word => 1,
            });
            let v = &seg.vocab;
            w.str(v.unk_token());
            w.str(v.pad_token());
            w.str(v.continuation_prefix());
            w.usize(v.max_word_chars());
            w.u32(v.len() as u32);
            for t in v.tokens() {
                w.str(t);
            }
        }
        ModelTokenizer::External { vocab_size } => {
            w.u8(1);
            w.usize(*vocab_size);
        }
    }
    w.u64(model.tokenizer.fingerprint());
    let named = model.params.named();
    w.u32(named.len() as u32);
    for (name, t) in named {
        w.str(name);
        w.u32(t.shape().len() as u32);
        for &d in t.shape() {
            w.usize(d);
        }
        for &x in t.data() {
            w.u64(x.to_bits());
        }
    }
    let mut h = Fnv1a::new();
    h.write(&w.0);
    let sum = h.finish();
    w.u64(sum);
    w.0
}

fn corrupt(why: impl Into<String>) -> TaggerError {
    TaggerError::CorruptCheckpoint(why.into())
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], TaggerError> {
        if self.buf.len() - self.pos < n {
            return Err(corrupt("unexpected end of data"));
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }
    fn u8(&mut self) -> Result<u8, TaggerError> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32, TaggerError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
    fn u64(&mut self) -> Result<u64, TaggerError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn usize(&mut self) -> Result<usize, TaggerError> {
        usize::try_from(self.u64()?).map_err(|_| corrupt("size does not fit this platform"))
    }
    fn str(&mut self) -> Result<String, TaggerError> {
        let n = self.u32()? as usize;
        let bytes = self.take(n)?;
        core::str::from_utf8(bytes)
            .map(String::from)
            .map_err(|_| corrupt("invalid UTF-8 string"))
    }
}

/// Parses a checkpoint. The checksum is verified before anything else, so
/// any flipped byte yields `CorruptCheckpoint`; a well-formed file from a
/// different format version yields `VersionMismatch`.
pub fn decode_checkpoint(bytes: &[u8]) -> Result<TaggerModel, TaggerError> {
    if bytes.len() < CHECKPOINT_MAGIC.len() + 4 + 8 {
        return Err(corrupt(format!("{} bytes is too short", bytes.len())));
    }
    let (body, tail) = bytes.split_at(bytes.len() - 8);
    let stored = u64::from_le_bytes(tail.try_into().expect("8 bytes"));
    let mut h = Fnv1a::new();
    h.write(body);
    if h.finish() != stored {
        return Err(corrupt("checksum mismatch"));
    }
    let mut r = Reader { buf: body, pos: 0 };
    if r.take(CHECKPOINT_MAGIC.len())? != CHECKPOINT_MAGIC {
        return Err(corrupt("bad magic bytes"));
    }
    let version = r.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(TaggerError::VersionMismatch {
            found: version,
            expected: CHECKPOINT_VERSION,
        });
    }
    let arch = Arch::from_code(r.u8()?).ok_or_else(|| corrupt("unknown architecture code"))?;
    let hyper = Hyperparams {
        embed_dim: r.usize()?,
        conv_filters: r.usize()?,
        conv_kernel: r.usize()?,
        lstm_hidden: r.usize()?,
        bilstm_hidden: r.usize()?,
        num_labels: r.usize()?,
    };
    let n_labels = r.u32()? as usize;
    let labels = (0..n_labels).map(|_| r.str()).collect::<Result<Vec<_>, _>>()?;
    let labels = LabelSet::from_ordered(labels).map_err(|e| corrupt(format!("{e}")))?;
    let tokenizer = match r.u8()? {
        0 => {
            let mode = match r.u8()? {
                0 => Mode::Subword,
                1 => Mode::Word,
                _ => return Err(corrupt("unknown tokenizer mode")),
            };
            let unk = r.str()?;
            let pad = r.str()?;
            let prefix = r.str()?;
            let max_chars = r.usize()?;
            let n = r.u32()? as usize;
            let tokens = (0..n).map(|_| r.str()).collect::<Result<Vec<_>, _>>()?;
            let vocab = Vocab::from_tokens(tokens, &unk, &pad, &prefix)
                .map_err(|e| corrupt(format!("{e}")))?
                .with_max_word_chars(max_chars);
            ModelTokenizer::Native(Segmenter::new(vocab, mode))
        }
        1 => ModelTokenizer::External { vocab_size: r.usize()? },
        _ => return Err(corrupt("unknown tokenizer kind")),
    };
    if r.u64()? != tokenizer.fingerprint() {
        return Err(corrupt("tokenizer fingerprint mismatch"));
    }
    let mut model = build_model(arch, hyper, tokenizer, labels, 0).map_err(|e| corrupt(format!("{e}")))?;

    let n_tensors = r.u32()? as usize;
    let expected: Vec<(&'static str, Vec<usize>)> = model
        .params
        .named()
        .into_iter()
        .map(|(n, t)| (n, t.shape().to_vec()))
        .collect();
    if n_tensors != expected.len() {
        return Err(corrupt(format!("{n_tensors} tensors, expected {}", expected.len())));
    }
    for ((name, shape), tensor) in expected.iter().zip(model.params.tensors_mut()) {
        let found = r.str()?;
        if found != *name {
            return Err(corrupt(format!("tensor {found:?} where {name:?} was expected")));
        }
        let ndims = r.u32()? as usize;
        let dims = (0..ndims).map(|_| r.usize()).collect::<Result<Vec<_>, _>>()?;
        if dims != *shape {
            return Err(corrupt(format!("tensor {name} has shape {dims:?}, expected {shape:?}")));
        }
        for x in tensor.data_mut() {
            *x = f64::from_bits(r.u64()?);
        }
    }
    if r.pos != body.len() {
        return Err(corrupt("trailing bytes after tensors"));
    }
    Ok(model)
}
