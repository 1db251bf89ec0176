//! Run, grid and generator settings read from flat key-value files.
//!
//! Run keys (all optional):
//!
//! | key | default |
//! |-----|---------|
//! | `seed` | 13 |
//! | `epochs`, `batch_size`, `max_len` | 20, 16, 128 |
//! | `learning_rate`, `rho`, `epsilon` | 0.001, 0.9, 1e-8 |
//! | `patience` (`none` disables) | 3 |
//! | `clip_norm` | none |
//! | `strategy` (`first`/`majority`) | first |
//! | `scheme` (`bio`/`flat`/`none`) | none |
//! | `embed_dim`, `conv_filters`, `conv_kernel` | 300, 512, 3 |
//! | `lstm_hidden`, `bilstm_hidden` | 512, 512 |
//! | `unk_token`, `pad_token`, `continuation_prefix`, `max_word_chars` | `[UNK]`, `[PAD]`, `##`, 100 |
//! | `external_vocab_size` | max id + 1 |

use std::path::{Path, PathBuf};

use hybridner_core::alignment::ClubbingStrategy;
use hybridner_core::corpus::SynthConfig;
use hybridner_core::metrics::Scheme;
use hybridner_core::rng::SplitMix64;
use hybridner_core::taggers::{Arch, Hyperparams, TrainConfig};
use hybridner_core::tokenizers::Mode;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::io::VocabOptions;
use crate::kv::KvFile;

pub const DEFAULT_SEED: u64 = 13;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub train: TrainConfig,
    /// `num_labels` is filled in from the training data.
    pub hyper: Hyperparams,
    pub vocab: VocabOptions,
    pub scheme: Option<Scheme>,
    pub external_vocab_size: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            train: TrainConfig::default(),
            hyper: Hyperparams::standard(0),
            vocab: VocabOptions::default(),
            scheme: None,
            external_vocab_size: None,
        }
    }
}

fn parse_strategy(s: &str) -> std::result::Result<ClubbingStrategy, String> {
    ClubbingStrategy::parse(s).ok_or_else(|| format!("unknown clubbing strategy {s:?} (first or majority)"))
}

pub fn parse_arch(s: &str) -> std::result::Result<Arch, String> {
    Arch::parse(s).ok_or_else(|| format!("unknown architecture {s:?} (cnn, lstm or bilstm)"))
}

fn parse_scheme(s: &str) -> std::result::Result<Option<Scheme>, String> {
    if s.eq_ignore_ascii_case("none") {
        Ok(None)
    } else {
        Scheme::parse(s).map(Some).map_err(|e| e.to_string())
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = crate::io::read_text(path)?;
        let mut kv = KvFile::parse(&text, &path.display().to_string())?;
        let mut cfg = Self::default();
        cfg.apply(&mut kv)?;
        kv.finish()?;
        cfg.validate().map_err(|e| CliError::file(path, e))?;
        Ok(cfg)
    }

    /// Checks sizes and optimizer settings; the label count is not known yet.
    pub fn validate(&self) -> std::result::Result<(), hybridner_core::taggers::TaggerError> {
        Hyperparams {
            num_labels: 1,
            ..self.hyper
        }
        .validate()?;
        self.train.validate()
    }

    /// Consumes every run key present in `kv`.
    pub fn apply(&mut self, kv: &mut KvFile) -> Result<()> {
        macro_rules! set {
            ($key:literal, $field:expr) => {
                if let Some(v) = kv.take_parsed($key)? {
                    $field = v;
                }
            };
        }
        set!("seed", self.seed);
        set!("epochs", self.train.epochs);
        set!("batch_size", self.train.batch_size);
        set!("max_len", self.train.max_len);
        set!("learning_rate", self.train.learning_rate);
        set!("rho", self.train.rho);
        set!("epsilon", self.train.epsilon);
        set!("embed_dim", self.hyper.embed_dim);
        set!("conv_filters", self.hyper.conv_filters);
        set!("conv_kernel", self.hyper.conv_kernel);
        set!("lstm_hidden", self.hyper.lstm_hidden);
        set!("bilstm_hidden", self.hyper.bilstm_hidden);
        set!("unk_token", self.vocab.unk_token);
        set!("pad_token", self.vocab.pad_token);
        set!("continuation_prefix", self.vocab.continuation_prefix);
        set!("max_word_chars", self.vocab.max_word_chars);
        if let Some(v) = kv.take_optional("patience")? {
            self.train.patience = v;
        }
        if let Some(v) = kv.take_optional("clip_norm")? {
            self.train.clip_norm = v;
        }
        if let Some(v) = kv.take_optional("external_vocab_size")? {
            self.external_vocab_size = v;
        }
        if let Some((line, v)) = kv.take("strategy") {
            self.train.strategy = parse_strategy(&v).map_err(|e| kv.error_at(line, e))?;
        }
        if let Some((line, v)) = kv.take("scheme") {
            self.scheme = parse_scheme(&v).map_err(|e| kv.error_at(line, e))?;
        }
        Ok(())
    }

    pub fn snapshot(&self) -> ConfigSnapshot {
        let t = &self.train;
        let h = &self.hyper;
        ConfigSnapshot {
            seed: self.seed,
            epochs: t.epochs,
            batch_size: t.batch_size,
            max_len: t.max_len,
            learning_rate: t.learning_rate,
            rho: t.rho,
            epsilon: t.epsilon,
            patience: t.patience,
            clip_norm: t.clip_norm,
            strategy: t.strategy.name().to_string(),
            scheme: self.scheme.map(|s| s.name().to_string()),
            embed_dim: h.embed_dim,
            conv_filters: h.conv_filters,
            conv_kernel: h.conv_kernel,
            lstm_hidden: h.lstm_hidden,
            bilstm_hidden: h.bilstm_hidden,
            vocab: self.vocab.clone(),
        }
    }
}

/// Serializable copy of a [`RunConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigSnapshot {
    pub seed: u64,
    pub epochs: usize,
    pub batch_size: usize,
    pub max_len: usize,
    pub learning_rate: f64,
    pub rho: f64,
    pub epsilon: f64,
    pub patience: Option<usize>,
    pub clip_norm: Option<f64>,
    pub strategy: String,
    pub scheme: Option<String>,
    pub embed_dim: usize,
    pub conv_filters: usize,
    pub conv_kernel: usize,
    pub lstm_hidden: usize,
    pub bilstm_hidden: usize,
    pub vocab: VocabOptions,
}

/// Seeds for parameter initialization and batch shuffling, both drawn from
/// the single run seed.
pub fn derive_seeds(seed: u64) -> (u64, u64) {
    let mut rng = SplitMix64::new(seed);
    (rng.next_u64(), rng.next_u64())
}

/// Where a run's token ids come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenizerSpec {
    /// Whole-word vocab built from the training split.
    Word,
    /// A vocab file segmented with `mode`.
    Vocab { path: PathBuf, mode: Mode },
    /// Pre-computed segmentations, one JSON-lines file per split.
    External {
        train: PathBuf,
        validation: Option<PathBuf>,
        test: Option<PathBuf>,
    },
}

impl TokenizerSpec {
    /// Parses `word`, `wordpiece:<vocab>`, `wordvocab:<vocab>` or
    /// `external:<train>[,<validation>[,<test>]]`. Relative paths resolve
    /// against `base`.
    pub fn parse(spec: &str, base: &Path) -> std::result::Result<Self, String> {
        let spec = spec.trim();
        let resolve = |p: &str| -> std::result::Result<PathBuf, String> {
            let p = p.trim();
            if p.is_empty() {
                Err(format!("missing path in tokenizer spec {spec:?}"))
            } else {
                Ok(base.join(p))
            }
        };
        if spec.eq_ignore_ascii_case("word") {
            return Ok(TokenizerSpec::Word);
        }
        match spec.split_once(':') {
            Some(("wordpiece", p)) => Ok(TokenizerSpec::Vocab {
                path: resolve(p)?,
                mode: Mode::Subword,
            }),
            Some(("wordvocab", p)) => Ok(TokenizerSpec::Vocab {
                path: resolve(p)?,
                mode: Mode::Word,
            }),
            Some(("external", rest)) => {
                let parts: Vec<&str> = rest.split(',').collect();
                if parts.len() > 3 {
                    return Err(format!("external spec takes at most three files: {spec:?}"));
                }
                let opt = |i: usize| -> std::result::Result<Option<PathBuf>, String> {
                    match parts.get(i).map(|s| s.trim()) {
                        None | Some("") => Ok(None),
                        Some(p) => resolve(p).map(Some),
                    }
                };
                Ok(TokenizerSpec::External {
                    train: resolve(parts[0])?,
                    validation: opt(1)?,
                    test: opt(2)?,
                })
            }
            _ => Err(format!(
                "unknown tokenizer spec {spec:?} (word, wordpiece:<vocab>, wordvocab:<vocab>, external:<files>)"
            )),
        }
    }

    /// Default row name: `word`, the vocab file stem, or `external-<stem>`.
    pub fn default_name(&self) -> String {
        let stem = |p: &Path| {
            p.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default()
        };
        match self {
            TokenizerSpec::Word => "word".into(),
            TokenizerSpec::Vocab { path, .. } => stem(path),
            TokenizerSpec::External { train, .. } => format!("external-{}", stem(train)),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            TokenizerSpec::Word => "word".into(),
            TokenizerSpec::Vocab { path, mode } => format!("{}:{}", mode_prefix(*mode), path.display()),
            TokenizerSpec::External {
                train,
                validation,
                test,
            } => {
                let s = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
                format!("external:{},{},{}", train.display(), s(validation), s(test))
            }
        }
    }
}

fn mode_prefix(mode: Mode) -> &'static str {
    match mode {
        Mode::Subword => "wordpiece",
        Mode::Word => "wordvocab",
    }
}

/// A tokenizer × architecture experiment.
///
/// Grid keys: `train`, `validation` (optional), `test`, `tokenizers`
/// (`;`-separated specs, each optionally `Name=spec`), `archs`
/// (comma-separated), `out` (optional), plus any run key.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub train: PathBuf,
    pub validation: Option<PathBuf>,
    pub test: PathBuf,
    pub tokenizers: Vec<(String, TokenizerSpec)>,
    pub archs: Vec<Arch>,
    pub out: Option<PathBuf>,
    pub config: RunConfig,
}

impl Grid {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = crate::io::read_text(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, &path.display().to_string(), base)
    }

    pub fn parse(text: &str, source: &str, base: &Path) -> Result<Self> {
        let mut kv = KvFile::parse(text, source)?;
        let need = |kv: &mut KvFile, key: &str| {
            kv.take_str(key)
                .filter(|v| !v.is_empty())
                .ok_or_else(|| CliError::input(format!("{source}: missing required key `{key}`")))
        };
        let train = base.join(need(&mut kv, "train")?);
        let test = base.join(need(&mut kv, "test")?);
        let validation = kv
            .take_str("validation")
            .filter(|v| !v.is_empty())
            .map(|v| base.join(v));
        let out = kv.take_str("out").filter(|v| !v.is_empty()).map(|v| base.join(v));

        let (tok_line, tok_value) = kv
            .take("tokenizers")
            .ok_or_else(|| CliError::input(format!("{source}: missing required key `tokenizers`")))?;
        let mut tokenizers = Vec::new();
        for item in tok_value.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let (name, spec) = match item.split_once('=') {
                Some((n, s)) => (Some(n.trim().to_string()), s),
                None => (None, item),
            };
            let spec = TokenizerSpec::parse(spec, base).map_err(|e| kv.error_at(tok_line, e))?;
            let name = name.unwrap_or_else(|| spec.default_name());
            if name.is_empty() || name.contains(char::is_whitespace) || name.contains('/') {
                return Err(kv.error_at(tok_line, format!("bad tokenizer name {name:?}")));
            }
            if tokenizers.iter().any(|(n, _)| *n == name) {
                return Err(kv.error_at(tok_line, format!("duplicate tokenizer name {name:?}")));
            }
            tokenizers.push((name, spec));
        }
        if tokenizers.is_empty() {
            return Err(kv.error_at(tok_line, "no tokenizers listed"));
        }

        let (arch_line, arch_value) = kv
            .take("archs")
            .ok_or_else(|| CliError::input(format!("{source}: missing required key `archs`")))?;
        let mut archs = Vec::new();
        for a in arch_value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let arch = parse_arch(a).map_err(|e| kv.error_at(arch_line, e))?;
            if archs.contains(&arch) {
                return Err(kv.error_at(arch_line, format!("duplicate architecture {a:?}")));
            }
            archs.push(arch);
        }
        if archs.is_empty() {
            return Err(kv.error_at(arch_line, "no architectures listed"));
        }

        let mut config = RunConfig::default();
        config.apply(&mut kv)?;
        kv.finish()?;
        config
            .validate()
            .map_err(|e| CliError::input(format!("{source}: {e}")))?;
        Ok(Self {
            train,
            validation,
            test,
            tokenizers,
            archs,
            out,
            config,
        })
    }

    pub fn run_name(tokenizer: &str, arch: Arch) -> String {
        format!("{tokenizer}-{}", arch.name())
    }
}

/// Reads generator keys: `classes` (comma list), `suffixes` (`|`-separated
/// groups of space-separated suffixes, one group per class),
/// `stems_per_class`, `n_train`, `n_validation`, `n_test`, `len_min`,
/// `len_max`, `oov_rate`, `entity_rate`, `seed`.
pub fn synth_config_from_file(path: &Path) -> Result<SynthConfig> {
    let text = crate::io::read_text(path)?;
    let mut kv = KvFile::parse(&text, &path.display().to_string())?;
    let mut cfg = SynthConfig::default();
    if let Some(v) = kv.take_str("classes") {
        cfg.classes = v
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
    }
    if let Some(v) = kv.take_str("suffixes") {
        cfg.suffixes = v
            .split('|')
            .map(|g| g.split_whitespace().map(str::to_string).collect())
            .collect();
    }
    macro_rules! set {
        ($key:literal, $field:expr) => {
            if let Some(v) = kv.take_parsed($key)? {
                $field = v;
            }
        };
    }
    set!("stems_per_class", cfg.stems_per_class);
    set!("n_train", cfg.n_train);
    set!("n_validation", cfg.n_validation);
    set!("n_test", cfg.n_test);
    set!("len_min", cfg.len_min);
    set!("len_max", cfg.len_max);
    set!("oov_rate", cfg.oov_rate);
    set!("entity_rate", cfg.entity_rate);
    set!("seed", cfg.seed);
    kv.finish()?;
    cfg.validate().map_err(|e| CliError::file(path, e))?;
    Ok(cfg)
}
