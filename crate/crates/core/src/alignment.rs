//! Moving labels between words and their subtokens.
//!
//! Before training every subtoken receives a verbatim copy of its word's
//! label. After inference the per-subtoken predictions of a word are merged
//! ("clubbed") back into a single word label.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::tokenizers::SubwordEncoding;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlignError {
    LengthMismatch { expected: usize, found: usize },
}

impl fmt::Display for AlignError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlignError::LengthMismatch { expected, found } => {
                write!(f, "length mismatch: expected {expected} labels, found {found}")
            }
        }
    }
}

impl core::error::Error for AlignError {}

/// How subtoken predictions are merged into one word label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ClubbingStrategy {
    /// Label of the word's first subtoken.
    #[default]
    First,
    /// Most frequent label among the word's subtokens; ties go to the label
    /// that occurs earliest.
    Majority,
}

impl ClubbingStrategy {
    pub fn name(self) -> &'static str {
        match self {
            ClubbingStrategy::First => "first",
            ClubbingStrategy::Majority => "majority",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "first" => Some(ClubbingStrategy::First),
            "majority" => Some(ClubbingStrategy::Majority),
            _ => None,
        }
    }
}

/// `out[i] = tags[word_ids[i]]`.
pub fn propagate_labels<L: Clone>(tags: &[L], encoding: &SubwordEncoding) -> Result<Vec<L>, AlignError> {
    let words = encoding.word_count();
    if tags.len() != words {
        return Err(AlignError::LengthMismatch {
            expected: words,
            found: tags.len(),
        });
    }
    Ok(encoding.word_ids.iter().map(|&w| tags[w].clone()).collect())
}

pub fn club_labels<L: Clone + PartialEq>(
    subtoken_tags: &[L],
    encoding: &SubwordEncoding,
    strategy: ClubbingStrategy,
) -> Result<Vec<L>, AlignError> {
    if subtoken_tags.len() != encoding.word_ids.len() {
        return Err(AlignError::LengthMismatch {
            expected: encoding.word_ids.len(),
            found: subtoken_tags.len(),
        });
    }
    let clubbed = encoding
        .word_spans()
        .into_iter()
        .map(|span| {
            let group = &subtoken_tags[span];
            match strategy {
                ClubbingStrategy::First => group[0].clone(),
                ClubbingStrategy::Majority => majority(group).clone(),
            }
        })
        .collect();
    Ok(clubbed)
}

fn majority<L: PartialEq>(group: &[L]) -> &L {
    // Groups are a handful of subtokens; quadratic counting keeps `L` free of
    // Ord/Hash bounds.
    let mut best = &group[0];
    let mut best_count = 0usize;
    for (i, candidate) in group.iter().enumerate() {
        if group[..i].contains(candidate) {
            continue;
        }
        let count = group[i..].iter().filter(|l| *l == candidate).count();
        if count > best_count {
            best = candidate;
            best_count = count;
        }
    }
    best
}

/// One fixed-length row of a batch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaddedRow {
    pub ids: Vec<u32>,
    pub label_indices: Vec<usize>,
    pub mask: Vec<u8>,
    /// Real (unpadded) positions; the mask is 1 exactly on `0..kept`.
    pub kept: usize,
    /// Whole words that survived truncation.
    pub kept_words: usize,
    pub truncated: bool,
}

/// Right-pads or truncates one encoded sentence to `max_len`. Truncation
/// happens at a word boundary so no word keeps a partial subtoken group.
pub fn pad_truncate(
    encoding: &SubwordEncoding,
    label_indices: &[usize],
    max_len: usize,
    pad_id: u32,
    pad_label_index: usize,
) -> Result<PaddedRow, AlignError> {
    assert!(max_len >= 1, "max_len must be at least 1");
    if label_indices.len() != encoding.len() {
        return Err(AlignError::LengthMismatch {
            expected: encoding.len(),
            found: label_indices.len(),
        });
    }
    let (kept, kept_words) = if encoding.len() <= max_len {
        (encoding.len(), encoding.word_count())
    } else {
        // Cut before the word that straddles or starts at max_len.
        let straddling = encoding.word_ids[max_len];
        let cut = encoding.word_ids[..max_len]
            .iter()
            .position(|&w| w == straddling)
            .unwrap_or(max_len);
        (cut, straddling)
    };
    let mut ids = vec![pad_id; max_len];
    let mut labels = vec![pad_label_index; max_len];
    let mut mask = vec![0u8; max_len];
    ids[..kept].copy_from_slice(&encoding.ids[..kept]);
    labels[..kept].copy_from_slice(&label_indices[..kept]);
    mask[..kept].fill(1);
    Ok(PaddedRow {
        ids,
        label_indices: labels,
        mask,
        kept,
        kept_words,
        truncated: kept < encoding.len(),
    })
}

/// A batch of padded rows sharing one `max_len`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaddedBatch {
    pub max_len: usize,
    pub rows: Vec<PaddedRow>,
    /// Index of each row's sentence in the source dataset.
    pub sources: Vec<usize>,
}

impl PaddedBatch {
    pub fn real_positions(&self) -> usize {
        self.rows.iter().map(|r| r.kept).sum()
    }

    pub fn truncated_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.truncated).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::String;

    fn enc(word_ids: &[usize]) -> SubwordEncoding {
        SubwordEncoding {
            subtokens: vec![String::new(); word_ids.len()],
            ids: (0..word_ids.len() as u32).map(|i| i + 10).collect(),
            word_ids: word_ids.to_vec(),
        }
    }

    #[test]
    fn propagate_examples() {
        assert_eq!(
            propagate_labels(&["B-NEL", "O"], &enc(&[0, 0, 1])).unwrap(),
            ["B-NEL", "B-NEL", "O"]
        );
        assert_eq!(
            propagate_labels(&["a", "b", "c"], &enc(&[0, 1, 2])).unwrap(),
            ["a", "b", "c"]
        );
        let empty: [&str; 0] = [];
        assert!(propagate_labels(&empty, &enc(&[])).unwrap().is_empty());
        assert_eq!(
            propagate_labels(&["a"], &enc(&[0, 1])),
            Err(AlignError::LengthMismatch { expected: 2, found: 1 })
        );
    }

    #[test]
    fn club_examples() {
        let first = club_labels(&["B-NEL", "O", "O"], &enc(&[0, 0, 1]), ClubbingStrategy::First);
        assert_eq!(first.unwrap(), ["B-NEL", "O"]);
        let maj = club_labels(&["O", "B-NEL", "B-NEL"], &enc(&[0, 0, 0]), ClubbingStrategy::Majority);
        assert_eq!(maj.unwrap(), ["B-NEL"]);
        let tie = club_labels(&["B-NEL", "O"], &enc(&[0, 0]), ClubbingStrategy::Majority);
        assert_eq!(tie.unwrap(), ["B-NEL"]);
        let tie3 = club_labels(&["a", "b", "b", "a", "c"], &enc(&[0; 5]), ClubbingStrategy::Majority);
        assert_eq!(tie3.unwrap(), ["a"]);
        assert!(club_labels(&["a"], &enc(&[0, 0]), ClubbingStrategy::First).is_err());
    }

    #[test]
    fn pad_examples() {
        let row = pad_truncate(&enc(&[0, 1]), &[1, 2], 4, 0, 0).unwrap();
        assert_eq!(row.mask, [1, 1, 0, 0]);
        assert_eq!(row.ids, [10, 11, 0, 0]);
        assert!(!row.truncated);

        let row = pad_truncate(&enc(&[0, 1, 2, 3, 4]), &[0; 5], 5, 0, 0).unwrap();
        assert_eq!(row.mask, [1; 5]);
        assert_eq!(row.ids, [10, 11, 12, 13, 14]);

        // Word 3 occupies positions 3..6; max_len 4 drops it entirely.
        let row = pad_truncate(&enc(&[0, 1, 2, 3, 3, 3]), &[0; 6], 4, 0, 0).unwrap();
        assert_eq!(row.kept, 3);
        assert_eq!(row.kept_words, 3);
        assert_eq!(row.mask, [1, 1, 1, 0]);
        assert!(row.truncated);

        // Cut exactly at a word boundary.
        let row = pad_truncate(&enc(&[0, 0, 1, 2]), &[0; 4], 3, 0, 0).unwrap();
        assert_eq!((row.kept, row.kept_words), (3, 2));
    }
}
