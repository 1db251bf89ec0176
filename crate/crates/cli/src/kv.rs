//! Flat `key = value` files. A `#` standing alone (start of line, or between
//! whitespace and whitespace/end of line) starts a comment, so values such
//! as `##` survive. Blank lines are skipped and every key may appear once.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{CliError, Result};

fn strip_comment(line: &str) -> &str {
    let bytes = line.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        let before = i == 0 || bytes[i - 1].is_ascii_whitespace();
        let after = bytes.get(i + 1).is_none_or(|c| c.is_ascii_whitespace());
        if b == b'#' && before && (after || line[..i].trim().is_empty()) {
            return &line[..i];
        }
    }
    line
}

#[derive(Debug, Clone, Default)]
pub struct KvFile {
    source: String,
    entries: BTreeMap<String, (usize, String)>,
}

impl KvFile {
    /// `source` names the file in error messages.
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::input(format!("{source}:{line_no}: expected `key = value`")));
            };
            let key = key.trim().to_ascii_lowercase();
            if key.is_empty() {
                return Err(CliError::input(format!("{source}:{line_no}: empty key")));
            }
            if let Some((first, _)) = entries.insert(key.clone(), (line_no, value.trim().to_string())) {
                return Err(CliError::input(format!(
                    "{source}:{line_no}: duplicate key `{key}` (first set on line {first})"
                )));
            }
        }
        Ok(Self {
            source: source.to_string(),
            entries,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Removes and returns the raw value of `key`.
    pub fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.remove(key)
    }

    pub fn take_str(&mut self, key: &str) -> Option<String> {
        self.take(key).map(|(_, v)| v)
    }

    pub fn take_parsed<T: FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|e| CliError::input(format!("{}:{line}: bad value for `{key}`: {e}", self.source))),
        }
    }

    /// Like [`KvFile::take_parsed`] but `none` maps to `Some(None)`.
    pub fn take_optional<T: FromStr>(&mut self, key: &str) -> Result<Option<Option<T>>>
    where
        T::Err: std::fmt::Display,
    {
        match self.take(key) {
            None => Ok(None),
            Some((_, v)) if v.eq_ignore_ascii_case("none") => Ok(Some(None)),
            Some((line, v)) => v
                .parse()
                .map(|x| Some(Some(x)))
                .map_err(|e| CliError::input(format!("{}:{line}: bad value for `{key}`: {e}", self.source))),
        }
    }

    pub fn error_at(&self, line: usize, msg: impl std::fmt::Display) -> CliError {
        CliError::input(format!("{}:{line}: {msg}", self.source))
    }

    /// Fails on any key nobody consumed.
    pub fn finish(self) -> Result<()> {
        match self.entries.iter().next() {
            None => Ok(()),
            Some((key, (line, _))) => Err(CliError::input(format!("{}:{line}: unknown key `{key}`", self.source))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_consumes() {
        let mut kv = KvFile::parse("# run\nepochs = 5\n\nPatience=none  # off\nlr = 0.01\n", "cfg").unwrap();
        assert_eq!(kv.take_parsed::<usize>("epochs").unwrap(), Some(5));
        assert_eq!(kv.take_optional::<usize>("patience").unwrap(), Some(None));
        assert_eq!(kv.take_parsed::<f64>("missing").unwrap(), None);
        let err = kv.finish().unwrap_err();
        assert_eq!(err.to_string(), "cfg:5: unknown key `lr`");
    }

    #[test]
    fn rejects_malformed() {
        assert!(KvFile::parse("epochs 5", "c").is_err());
        assert!(KvFile::parse("a = 1\na = 2", "c")
            .unwrap_err()
            .to_string()
            .contains("duplicate"));
        let mut kv = KvFile::parse("epochs = five", "c").unwrap();
        assert!(kv
            .take_parsed::<usize>("epochs")
            .unwrap_err()
            .to_string()
            .starts_with("c:1:"));
    }

    #[test]
    fn hashes_inside_values_survive() {
        let mut kv = KvFile::parse(
            "#comment
continuation_prefix = ## # marker
unk = [UNK]#x
",
            "c",
        )
        .unwrap();
        assert_eq!(kv.take_str("continuation_prefix").as_deref(), Some("##"));
        assert_eq!(kv.take_str("unk").as_deref(), Some("[UNK]#x"));
    }
}
