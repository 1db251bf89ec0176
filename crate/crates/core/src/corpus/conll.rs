use alloc::string::String;
use alloc::vec::Vec;

use super::{CorpusError, LabeledCorpus, LabeledSentence, Split};

/// Parses two-column `word<TAB>tag` text; blank lines end sentences.
pub fn parse_conll(text: &str) -> Result<LabeledCorpus, CorpusError> {
    let mut sentences = Vec::new();
    let mut words = Vec::new();
    let mut tags = Vec::new();

    let mut flush = |words: &mut Vec<String>, tags: &mut Vec<String>, line_no: usize| {
        if words.is_empty() {
            return Ok(());
        }
        let sentence = LabeledSentence::new(core::mem::take(words), core::mem::take(tags))
            .map_err(|_| CorpusError::MalformedLine(line_no))?;
        sentences.push(sentence);
        Ok(())
    };

    for (i, raw) in text.split('\n').enumerate() {
        let line_no = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            flush(&mut words, &mut tags, line_no)?;
            continue;
        }
        let mut fields = line.split('\t');
        let (Some(word), Some(tag), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(CorpusError::MalformedLine(line_no));
        };
        if !super::is_valid_word(word) || !super::is_valid_word(tag) {
            return Err(CorpusError::MalformedLine(line_no));
        }
        words.push(String::from(word));
        tags.push(String::from(tag));
    }
    let last = text.split('\n').count();
    flush(&mut words, &mut tags, last)?;

    if sentences.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    Ok(LabeledCorpus::new(sentences, Split::Unsplit))
}

pub fn write_conll(corpus: &LabeledCorpus) -> String {
    let mut out = String::new();
    for sentence in corpus.iter() {
        for (w, t) in sentence.words().iter().zip(sentence.tags()) {
            out.push_str(w);
            out.push('\t');
            out.push_str(t);
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_one_sentence() {
        let corpus = parse_conll("a\tO\nb\tB-NEL\n\n").unwrap();
        assert_eq!(corpus.len(), 1);
        assert_eq!(corpus.sentences[0].words(), ["a", "b"]);
        assert_eq!(corpus.sentences[0].tags(), ["O", "B-NEL"]);
    }

    #[test]
    fn empty_input() {
        assert_eq!(parse_conll(""), Err(CorpusError::EmptyCorpus));
        assert_eq!(parse_conll("\n\n\n"), Err(CorpusError::EmptyCorpus));
    }

    #[test]
    fn space_separated_line() {
        assert_eq!(parse_conll("a b O\n"), Err(CorpusError::MalformedLine(1)));
        assert_eq!(parse_conll("a\tO\nb\tO\tx\n"), Err(CorpusError::MalformedLine(2)));
        assert_eq!(parse_conll("a\tO\n\n\tO\n"), Err(CorpusError::MalformedLine(3)));
    }

    #[test]
    fn no_trailing_blank_and_crlf() {
        let corpus = parse_conll("a\tO\r\nb\tO\r\n\r\nc\tB-X").unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(corpus.sentences[1].words(), ["c"]);
    }

    #[test]
    fn writes_one_sentence() {
        let corpus = LabeledCorpus::new(vec![LabeledSentence::from_pairs([("a", "O")]).unwrap()], Split::Unsplit);
        assert_eq!(write_conll(&corpus), "a\tO\n\n");
    }

    #[test]
    fn devanagari_round_trip() {
        let text = "पुणे\tB-NEL\nमध्ये\tO\n\n";
        let corpus = parse_conll(text).unwrap();
        assert_eq!(write_conll(&corpus), text);
    }
}
