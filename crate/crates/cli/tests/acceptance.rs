//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Criterion 9 needs the real corpus and vocab and
//! runs only with `--ignored` or when its environment variables are set:
//!
//! - `HYBRIDNER_MAHANER_DIR`: directory with `train.conll`, `validation.conll`, `test.conll`
//! - `HYBRIDNER_MAHABERT_VOCAB`: the MahaBERT `vocab.txt`

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use clap::Parser;
use hybridner::pipeline::RunRecord;
use hybridner::{run, Cli};
use hybridner_core::alignment::{club_labels, propagate_labels, ClubbingStrategy};
use hybridner_core::corpus::{build_label_set, corpus_stats, parse_conll, SynthConfig};
use hybridner_core::metrics::{evaluate, token_confusion, token_metrics};
use hybridner_core::nn::gradcheck::{grad_check, GradTarget};
use hybridner_core::rng::SplitMix64;
use hybridner_core::taggers::{
    build_model, count_params, train, Arch, Dataset, Hyperparams, ModelTokenizer, TrainConfig,
};
use hybridner_core::tokenizers::{build_word_vocab, wordpiece_word, Mode, Segmenter, SubwordEncoding, Vocab};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_secs: u64) -> Result<(), String> {
    check(elapsed <= Duration::from_secs(limit_secs), || {
        format!("took {:.1}s, limit {limit_secs}s", elapsed.as_secs_f64())
    })
}

// ---------------------------------------------------------------- 1

fn random_encoding(rng: &mut SplitMix64) -> SubwordEncoding {
    let words = rng.range_inclusive(1, 30);
    let mut word_ids = Vec::new();
    for w in 0..words {
        let fertility = rng.range_inclusive(1, 5);
        word_ids.extend(std::iter::repeat_n(w, fertility));
    }
    SubwordEncoding {
        subtokens: word_ids.iter().map(|w| format!("p{w}")).collect(),
        ids: word_ids.iter().map(|&w| w as u32).collect(),
        word_ids,
    }
}

fn alignment_round_trip() -> Outcome {
    const LABELS: &[&str] = &["O", "B-NEL", "I-NEL", "B-NEP", "I-NEP", "B-NEO", "I-NEO", "B-ED"];
    let start = Instant::now();
    let mut rng = SplitMix64::new(1);
    for case in 0..1000 {
        let enc = random_encoding(&mut rng);
        let tags: Vec<&str> = (0..enc.word_count()).map(|_| LABELS[rng.below(LABELS.len())]).collect();
        let sub = propagate_labels(&tags, &enc).map_err(|e| e.to_string())?;
        for strategy in [ClubbingStrategy::First, ClubbingStrategy::Majority] {
            let back = club_labels(&sub, &enc, strategy).map_err(|e| e.to_string())?;
            check(back == tags, || {
                format!("case {case} {}: {back:?} != {tags:?}", strategy.name())
            })?;
        }
    }
    within(start.elapsed(), 5)?;
    Ok(format!(
        "1000 cases, both strategies, {:.2}s",
        start.elapsed().as_secs_f64()
    ))
}

// ---------------------------------------------------------------- 2

/// Longest match found by scanning the whole vocab at each position.
fn brute_force_wordpiece(word: &str, tokens: &[String], max_chars: usize) -> Vec<String> {
    let chars: Vec<char> = word.chars().collect();
    if chars.len() > max_chars {
        return vec!["[UNK]".into()];
    }
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < chars.len() {
        let mut best: Option<(usize, &String)> = None;
        for tok in tokens {
            let body: Vec<char> = match (pos, tok.strip_prefix("##")) {
                (0, _) => tok.chars().collect(),
                (_, Some(rest)) => rest.chars().collect(),
                (_, None) => continue,
            };
            let fits = !body.is_empty() && pos + body.len() <= chars.len() && chars[pos..pos + body.len()] == body[..];
            if fits && best.is_none_or(|(n, _)| body.len() > n) {
                best = Some((body.len(), tok));
            }
        }
        match best {
            Some((n, tok)) => {
                out.push(tok.clone());
                pos += n;
            }
            None => return vec!["[UNK]".into()],
        }
    }
    out
}

fn wordpiece_oracle() -> Outcome {
    const ALPHABET: &[char] = &['a', 'b', 'c', 'd', 'प', 'ु', 'ण', 'े'];
    let start = Instant::now();
    let mut rng = SplitMix64::new(2);
    let random_word = |rng: &mut SplitMix64, max: usize| -> String {
        (0..rng.range_inclusive(1, max))
            .map(|_| ALPHABET[rng.below(ALPHABET.len())])
            .collect()
    };
    let mut unk_cases = 0;
    for case in 0..10_000 {
        let mut tokens: Vec<String> = vec!["[PAD]".into(), "[UNK]".into()];
        let mut seen: BTreeSet<String> = tokens.iter().cloned().collect();
        // Most vocabularies cover every single character so that longest
        // match, not UNK fallback, decides the output.
        if rng.bernoulli(0.8) {
            for c in ALPHABET.iter().filter(|_| rng.bernoulli(0.9)) {
                for tok in [c.to_string(), format!("##{c}")] {
                    if seen.insert(tok.clone()) {
                        tokens.push(tok);
                    }
                }
            }
        }
        for _ in 0..rng.range_inclusive(0, 30) {
            let piece = random_word(&mut rng, 3);
            let tok = if rng.bernoulli(0.5) {
                format!("##{piece}")
            } else {
                piece
            };
            if seen.insert(tok.clone()) {
                tokens.push(tok);
            }
        }
        let max_chars = rng.range_inclusive(4, 12);
        let vocab = Vocab::from_tokens(tokens.clone(), "[UNK]", "[PAD]", "##")
            .map_err(|e| e.to_string())?
            .with_max_word_chars(max_chars);
        let word = random_word(&mut rng, 10);
        let got = wordpiece_word(&word, &vocab);
        let want = brute_force_wordpiece(&word, &tokens, max_chars);
        check(got == want, || {
            format!("case {case}: {word:?} gave {got:?}, oracle {want:?}")
        })?;
        unk_cases += usize::from(got == ["[UNK]"]);
    }

    let fixture: Vec<String> = [
        "[PAD]",
        "[UNK]",
        "un",
        "##aff",
        "##able",
        "pun",
        "##e",
        "पुणे",
        "##त",
        "मुंबई",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let vocab = Vocab::from_tokens(fixture, "[UNK]", "[PAD]", "##").map_err(|e| e.to_string())?;
    let hand: [(&str, &[&str]); 5] = [
        ("unaffable", &["un", "##aff", "##able"]),
        ("pune", &["pun", "##e"]),
        ("unx", &["[UNK]"]),
        ("पुणेत", &["पुणे", "##त"]),
        ("मुंबईत", &["मुंबई", "##त"]),
    ];
    for (word, want) in hand {
        let got = wordpiece_word(word, &vocab);
        check(got == want, || format!("fixture {word}: {got:?}"))?;
    }
    let long = "a".repeat(101);
    let vocab_a = Vocab::from_tokens(
        vec!["[PAD]".into(), "[UNK]".into(), "a".into(), "##a".into()],
        "[UNK]",
        "[PAD]",
        "##",
    )
    .map_err(|e| e.to_string())?;
    check(wordpiece_word(&long, &vocab_a) == ["[UNK]"], || {
        "101-char word was not UNK".into()
    })?;
    check(wordpiece_word(&"a".repeat(100), &vocab_a).len() == 100, || {
        "100-char word was UNK".into()
    })?;

    within(start.elapsed(), 30)?;
    Ok(format!(
        "10000 random cases ({unk_cases} UNK) + fixtures incl. Devanagari, {:.2}s",
        start.elapsed().as_secs_f64()
    ))
}

// ---------------------------------------------------------------- 3

fn gradient_checks() -> Outcome {
    let start = Instant::now();
    let cases = [
        (
            "embedding",
            GradTarget::Embedding {
                vocab: 9,
                dim: 5,
                len: 7,
            },
            1e-6,
        ),
        (
            "dense",
            GradTarget::Dense {
                len: 6,
                d_in: 5,
                d_out: 4,
            },
            1e-6,
        ),
        (
            "conv1d",
            GradTarget::Conv1d {
                len: 7,
                d_in: 4,
                d_out: 5,
                k: 3,
            },
            1e-5,
        ),
        ("lstm", GradTarget::Lstm { len: 6, d: 4, h: 5 }, 1e-4),
        ("bilstm", GradTarget::BiLstm { len: 6, d: 4, h: 4 }, 1e-4),
    ];
    let mut summary = Vec::new();
    for (name, target, tol) in cases {
        let mut worst: f64 = 0.0;
        for seed in 0..20 {
            let r = grad_check(target, 1000 + seed, 1e-5).map_err(|e| e.to_string())?;
            worst = worst.max(r.max_relative_error);
        }
        check(worst < tol, || format!("{name}: max rel err {worst:.3e} >= {tol:e}"))?;
        summary.push(format!("{name} {worst:.1e}"));
    }
    within(start.elapsed(), 60)?;
    Ok(format!("20 seeds each, max rel err: {}", summary.join(", ")))
}

// ---------------------------------------------------------------- 4

fn metric_oracle() -> Outcome {
    const LABELS: &[&str] = &["O", "B-NEL", "I-NEL", "B-NEP", "NEO", "B-ED"];
    let mut rng = SplitMix64::new(4);
    for case in 0..1000 {
        let n = rng.range_inclusive(1, 60);
        let pick = |rng: &mut SplitMix64| LABELS[rng.below(LABELS.len())];
        let gold: Vec<&str> = (0..n).map(|_| pick(&mut rng)).collect();
        let pred: Vec<&str> = (0..n).map(|_| pick(&mut rng)).collect();
        let m = token_metrics(&token_confusion(&pred, &gold).map_err(|e| e.to_string())?);

        let classes: BTreeSet<&str> = gold.iter().chain(&pred).copied().filter(|l| *l != "O").collect();
        let (mut tp_all, mut fp_all, mut fn_all, mut f1_sum, mut in_gold) = (0usize, 0usize, 0usize, 0.0f64, 0usize);
        let mut per_class = Vec::new();
        for c in &classes {
            let mut tp = 0;
            let mut fp = 0;
            let mut fn_ = 0;
            for i in 0..n {
                match (pred[i] == *c, gold[i] == *c) {
                    (true, true) => tp += 1,
                    (true, false) => fp += 1,
                    (false, true) => fn_ += 1,
                    (false, false) => {}
                }
            }
            let p = if tp + fp == 0 {
                0.0
            } else {
                tp as f64 / (tp + fp) as f64
            };
            let r = if tp + fn_ == 0 {
                0.0
            } else {
                tp as f64 / (tp + fn_) as f64
            };
            let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
            if tp + fn_ > 0 {
                f1_sum += f;
                in_gold += 1;
            }
            tp_all += tp;
            fp_all += fp;
            fn_all += fn_;
            per_class.push((c.to_string(), p, r, f, tp + fn_));
        }
        let macro_f1 = if in_gold == 0 { 0.0 } else { f1_sum / in_gold as f64 };
        let mp = if tp_all + fp_all == 0 {
            0.0
        } else {
            tp_all as f64 / (tp_all + fp_all) as f64
        };
        let mr = if tp_all + fn_all == 0 {
            0.0
        } else {
            tp_all as f64 / (tp_all + fn_all) as f64
        };
        let mf = if mp + mr == 0.0 { 0.0 } else { 2.0 * mp * mr / (mp + mr) };
        let acc = (0..n).filter(|&i| pred[i] == gold[i]).count() as f64 / n as f64;

        let got: Vec<(String, f64, f64, f64, usize)> = m
            .per_class
            .iter()
            .map(|c| {
                (
                    c.label.clone(),
                    c.scores.precision,
                    c.scores.recall,
                    c.scores.f1,
                    c.support(),
                )
            })
            .collect();
        check(got == per_class, || format!("case {case}: per-class differs"))?;
        check(m.macro_avg.f1 == macro_f1, || {
            format!("case {case}: macro {} vs {macro_f1}", m.macro_avg.f1)
        })?;
        check(
            m.micro_avg.precision == mp && m.micro_avg.recall == mr && m.micro_avg.f1 == mf,
            || format!("case {case}: micro differs"),
        )?;
        check(m.accuracy == acc, || {
            format!("case {case}: accuracy {} vs {acc}", m.accuracy)
        })?;
    }
    Ok("1000 random pairs, exact equality".into())
}

// ---------------------------------------------------------------- 5

const TOY: &str = "\
पुणे\tB-NEL\nयेथे\tO\nसभा\tO\nझाली\tO\n\n\
राम\tB-NEP\nपुण्याला\tB-NEL\nगेला\tO\n\n\
शिवसेना\tB-NEO\nपक्षाची\tO\nबैठक\tO\n\n\
मुंबईत\tB-NEL\nपाऊस\tO\n\n\
सचिन\tB-NEP\nतेंडुलकर\tI-NEP\nखेळला\tO\n\n\
काँग्रेस\tB-NEO\nआणि\tO\nभाजप\tB-NEO\n\n\
नागपूर\tB-NEL\nशहर\tO\nमोठे\tO\nआहे\tO\n\n\
सीता\tB-NEP\nघरी\tO\nआली\tO\n\n\
लता\tB-NEP\nमंगेशकर\tI-NEP\nगायल्या\tO\n\n\
नाशिक\tB-NEL\nजिल्हा\tO\n";

fn overfit() -> Outcome {
    let start = Instant::now();
    let corpus = parse_conll(TOY).map_err(|e| e.to_string())?;
    check(corpus.len() == 10, || {
        format!("toy corpus has {} sentences", corpus.len())
    })?;
    let labels = build_label_set(&corpus);
    let seg = Segmenter::new(build_word_vocab(&corpus, 1), Mode::Word);
    let data = Dataset::segment(&corpus, &seg, &labels).map_err(|e| e.to_string())?;
    let hyper = Hyperparams {
        embed_dim: 16,
        conv_filters: 32,
        conv_kernel: 3,
        lstm_hidden: 24,
        bilstm_hidden: 16,
        num_labels: labels.len(),
    };
    let mut summary = Vec::new();
    for (arch, budget) in [(Arch::Cnn, 50), (Arch::Lstm, 100), (Arch::BiLstm, 100)] {
        let mut model = build_model(arch, hyper, ModelTokenizer::Native(seg.clone()), labels.clone(), 7)
            .map_err(|e| e.to_string())?;
        // The training set doubles as validation so the first perfect epoch
        // is the one kept.
        let cfg = TrainConfig {
            epochs: budget,
            batch_size: 2,
            learning_rate: 1e-2,
            patience: None,
            seed: 3,
            ..TrainConfig::default()
        };
        let history = train(&mut model, &data, Some(&data), &cfg).map_err(|e| e.to_string())?;
        let first = history
            .epochs
            .iter()
            .find(|e| e.val_macro_f1 == Some(1.0))
            .map(|e| e.epoch);
        let report = evaluate(&model, &corpus, ClubbingStrategy::First, None).map_err(|e| e.to_string())?;
        check(report.token.accuracy == 1.0, || {
            format!(
                "{} reached accuracy {:.4} in {budget} epochs",
                arch.display_name(),
                report.token.accuracy
            )
        })?;
        summary.push(format!("{} epoch {}", arch.display_name(), first.unwrap_or(0)));
    }
    within(start.elapsed(), 120)?;
    Ok(format!(
        "100% word accuracy at {}; {:.1}s",
        summary.join(", "),
        start.elapsed().as_secs_f64()
    ))
}

// ---------------------------------------------------------------- 6

fn cli(args: &[&str]) -> Result<String, String> {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let parsed =
        Cli::try_parse_from(std::iter::once("hybridner").chain(args.iter().copied())).map_err(|e| e.to_string())?;
    run(parsed, &mut out, &mut err).map_err(|e| format!("{e}: {}", String::from_utf8_lossy(&err)))?;
    Ok(String::from_utf8(out).expect("utf-8 output"))
}

fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 path")
}

fn central_claim() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = dir.path();
    let synth = SynthConfig::default();
    check(synth.oov_rate >= 0.5, || format!("oov_rate {}", synth.oov_rate))?;
    cli(&["synth", "--out", p(&root.join("data"))])?;

    let train_words: BTreeSet<String> = parse_conll(&fs::read_to_string(root.join("data/train.conll")).unwrap())
        .map_err(|e| e.to_string())?
        .iter()
        .flat_map(|s| s.words().to_vec())
        .collect();
    let test = parse_conll(&fs::read_to_string(root.join("data/test.conll")).unwrap()).map_err(|e| e.to_string())?;
    let (mut entities, mut unseen) = (0, 0);
    for s in test.iter() {
        for (w, t) in s.words().iter().zip(s.tags()) {
            if t != "O" {
                entities += 1;
                unseen += usize::from(!train_words.contains(w));
            }
        }
    }

    fs::write(
        root.join("grid.txt"),
        "train = data/train.conll\nvalidation = data/validation.conll\ntest = data/test.conll\n\
         tokenizers = Word-Based=word; Subword=wordpiece:data/vocab.txt\narchs = cnn\nout = out\n\
         epochs = 20\nembed_dim = 64\nconv_filters = 128\n",
    )
    .map_err(|e| e.to_string())?;
    let table = cli(&["compare", "--config", p(&root.join("grid.txt"))])?;
    let matrix = fs::read_to_string(root.join("out/comparison.tsv")).map_err(|e| e.to_string())?;
    let f1 = |name: &str| -> Result<f64, String> {
        let row = matrix
            .lines()
            .find(|l| l.starts_with(&format!("{name}\t")))
            .ok_or(format!("no row {name}"))?;
        row.split('\t')
            .nth(2)
            .unwrap()
            .parse()
            .map_err(|_| format!("{name} failed: {row}"))
    };
    let (word, sub) = (f1("Word-Based")?, f1("Subword")?);
    let record = RunRecord::read(&root.join("out/Subword-cnn/run.json")).map_err(|e| e.to_string())?;
    check(record.epochs_run <= 20, || format!("{} epochs", record.epochs_run))?;
    check(sub >= 0.90, || format!("subword CNN macro-F1 {sub:.4} < 0.90\n{table}"))?;
    check(sub - word >= 0.10, || {
        format!("gap {:.4} < 0.10 (subword {sub:.4}, word {word:.4})", sub - word)
    })?;
    within(start.elapsed(), 300)?;
    Ok(format!(
        "test entity words unseen in training {:.0}%; macro-F1 subword {sub:.4} vs word {word:.4} (gap {:.4}); {:.1}s",
        100.0 * unseen as f64 / entities as f64,
        sub - word,
        start.elapsed().as_secs_f64()
    ))
}

// ---------------------------------------------------------------- 7

fn bin(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_hybridner"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    check(out.status.success(), || {
        format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr))
    })
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = dir.path();
    bin(&["synth", "--out", p(&root.join("data"))])?;
    fs::write(
        root.join("run.cfg"),
        "epochs = 4\nembed_dim = 32\nbilstm_hidden = 16\nseed = 21\n",
    )
    .unwrap();
    let mut runs: Vec<PathBuf> = Vec::new();
    for name in ["first", "second"] {
        let out = root.join(name);
        bin(&[
            "train",
            "--train",
            p(&root.join("data/train.conll")),
            "--val",
            p(&root.join("data/validation.conll")),
            "--vocab",
            p(&root.join("data/vocab.txt")),
            "--arch",
            "bilstm",
            "--config",
            p(&root.join("run.cfg")),
            "--out",
            p(&out),
        ])?;
        runs.push(out);
    }
    for f in ["history.txt", "model.ckpt"] {
        let a = fs::read(runs[0].join(f)).map_err(|e| e.to_string())?;
        let b = fs::read(runs[1].join(f)).map_err(|e| e.to_string())?;
        check(a == b, || format!("{f} differs between runs"))?;
    }
    Ok("history.txt and model.ckpt byte-identical across two train invocations".into())
}

// ---------------------------------------------------------------- 8

fn param_counts() -> Outcome {
    let labels = hybridner_core::LabelSet::from_labels(["B-NEL", "B-NEP", "B-NEO", "B-ED", "B-TM", "B-NUM", "B-MEA"]);
    check(labels.len() == 8, || format!("{} labels", labels.len()))?;
    let (v, d, k, f, h, l) = (1000, 300, 3, 512, 512, 8);
    let expected = [
        (Arch::Cnn, v * d + (k * d * f + f) + (f * l + l)),
        (Arch::Lstm, v * d + 4 * (h * (d + h) + h) + (h * l + l)),
        (Arch::BiLstm, v * d + 2 * 4 * (h * (d + h) + h) + (2 * h * l + l)),
    ];
    check(expected[0].1 == 765_416 && expected[1].1 == 1_969_128, || {
        "closed forms changed".into()
    })?;
    let mut summary = Vec::new();
    for (arch, want) in expected {
        let model = build_model(
            arch,
            Hyperparams::standard(8),
            ModelTokenizer::External { vocab_size: v },
            labels.clone(),
            0,
        )
        .map_err(|e| e.to_string())?;
        let got = count_params(&model);
        let from_shapes: usize = model
            .params
            .tensors()
            .iter()
            .map(|t| t.shape().iter().product::<usize>())
            .sum();
        check(got == want && from_shapes == want, || {
            format!(
                "{}: count {got}, shapes {from_shapes}, closed form {want}",
                arch.display_name()
            )
        })?;
        summary.push(format!("{} {got}", arch.display_name()));
    }
    Ok(format!("V=1000, d=300, 512 units, 8 labels: {}", summary.join(", ")))
}

// ---------------------------------------------------------------- 9

fn extended() -> Option<Outcome> {
    let (dir, vocab) = match (
        std::env::var_os("HYBRIDNER_MAHANER_DIR"),
        std::env::var_os("HYBRIDNER_MAHABERT_VOCAB"),
    ) {
        (Some(d), Some(v)) => (PathBuf::from(d), PathBuf::from(v)),
        _ => return None,
    };
    Some((|| {
        let expected = [
            ("train", 21_500, 26_502),
            ("test", 2_000, 2_424),
            ("validation", 1_500, 1_800),
        ];
        for (split, sentences, tags) in expected {
            let path = dir.join(format!("{split}.conll"));
            let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            let stats = corpus_stats(&parse_conll(&text).map_err(|e| e.to_string())?);
            check(stats.sentence_count == sentences && stats.tag_count == tags, || {
                format!(
                    "{split}: {}/{} vs {sentences}/{tags}",
                    stats.sentence_count, stats.tag_count
                )
            })?;
        }
        let out = tempfile::tempdir().map_err(|e| e.to_string())?;
        let grid = out.path().join("grid.txt");
        fs::write(
            &grid,
            format!(
                "train = {}\nvalidation = {}\ntest = {}\ntokenizers = Word-Based=word; MahaBERT=wordpiece:{}\narchs = cnn\n",
                p(&dir.join("train.conll")),
                p(&dir.join("validation.conll")),
                p(&dir.join("test.conll")),
                p(&vocab)
            ),
        )
        .map_err(|e| e.to_string())?;
        let table = cli(&["compare", "--config", p(&grid), "--out", p(&out.path().join("runs"))])?;
        let matrix = fs::read_to_string(out.path().join("runs/comparison.tsv")).map_err(|e| e.to_string())?;
        let f1 = |name: &str| -> Result<f64, String> {
            let row = matrix
                .lines()
                .find(|l| l.starts_with(&format!("{name}\t")))
                .ok_or(format!("no row {name}"))?;
            row.split('\t')
                .nth(2)
                .unwrap()
                .parse::<f64>()
                .map(|v| 100.0 * v)
                .map_err(|_| format!("{name}: {row}"))
        };
        let (word, maha) = (f1("Word-Based")?, f1("MahaBERT")?);
        check((maha - 82.1).abs() <= 3.0, || {
            format!("MahaBERT CNN F1 {maha:.2} not within 3.0 of 82.1\n{table}")
        })?;
        check(maha > word, || {
            format!("ordering not reproduced: MahaBERT {maha:.2} <= word {word:.2}")
        })?;
        Ok(format!(
            "split counts exact; CNN F1 MahaBERT {maha:.2} vs word {word:.2}"
        ))
    })())
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let include_extended = args.iter().any(|a| a == "--ignored" || a == "--include-ignored");
    // `cargo test -- --list` and similar discovery calls expect no work.
    if args.iter().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("alignment round trip", alignment_round_trip),
        ("wordpiece oracle equivalence", wordpiece_oracle),
        ("gradient checks", gradient_checks),
        ("metric oracle", metric_oracle),
        ("overfit sanity", overfit),
        ("subword beats word baseline on synthetic OOV corpus", central_claim),
        ("determinism", determinism),
        ("parameter counts", param_counts),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {} [{name}]: PASS ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} [{name}]: FAIL ({why})", i + 1);
            }
        }
    }
    let name = "extended corpus reproduction";
    match extended() {
        Some(Ok(detail)) => println!("criterion 9 [{name}]: PASS ({detail})"),
        Some(Err(why)) => {
            failed += 1;
            println!("criterion 9 [{name}]: FAIL ({why})");
        }
        None if include_extended => {
            failed += 1;
            println!("criterion 9 [{name}]: FAIL (set HYBRIDNER_MAHANER_DIR and HYBRIDNER_MAHABERT_VOCAB)");
        }
        None => {
            println!("criterion 9 [{name}]: SKIPPED (optional; set HYBRIDNER_MAHANER_DIR and HYBRIDNER_MAHABERT_VOCAB)")
        }
    }
    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
