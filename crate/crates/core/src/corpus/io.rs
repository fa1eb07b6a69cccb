use std::fs;
use std::io::{BufRead, Write};
use std::path::Path;

use super::Vocabulary;
use crate::error::{Error, Result};

/// A labeled document before tokenization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDocument {
    pub label: String,
    pub text: String,
}

/// Reads `label<TAB>text` lines. Blank lines are skipped.
pub fn read_tsv(path: &Path) -> Result<Vec<RawDocument>> {
    let text = fs::read_to_string(path)?;
    let mut docs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (label, body) = line.split_once('\t').ok_or_else(|| {
            Error::Parse(format!(
                "{}:{}: expected label<TAB>text",
                path.display(),
                lineno + 1
            ))
        })?;
        docs.push(RawDocument {
            label: label.to_string(),
            text: body.to_string(),
        });
    }
    Ok(docs)
}

/// Reads a directory holding one subdirectory per label, each containing
/// plain-text documents. Labels and files are visited in sorted order.
pub fn read_label_dirs(root: &Path) -> Result<Vec<RawDocument>> {
    let mut labels: Vec<_> = fs::read_dir(root)?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .filter(|e| e.path().is_dir())
        .collect();
    labels.sort_by_key(|e| e.file_name());
    let mut docs = Vec::new();
    for entry in labels {
        let label = entry.file_name().to_string_lossy().into_owned();
        let mut files: Vec<_> = fs::read_dir(entry.path())?
            .collect::<std::io::Result<Vec<_>>>()?
            .into_iter()
            .filter(|e| e.path().is_file())
            .collect();
        files.sort_by_key(|e| e.file_name());
        for file in files {
            docs.push(RawDocument {
                label: label.clone(),
                text: fs::read_to_string(file.path())?,
            });
        }
    }
    Ok(docs)
}

/// Dispatches on the path type: directories are read per label, files as TSV.
pub fn load_raw_corpus(path: &Path) -> Result<Vec<RawDocument>> {
    if path.is_dir() {
        read_label_dirs(path)
    } else {
        read_tsv(path)
    }
}

/// Writes `index<TAB>token` lines.
pub fn write_vocabulary<W: Write>(vocab: &Vocabulary, mut out: W) -> Result<()> {
    for (index, token) in vocab.iter() {
        writeln!(out, "{index}\t{token}")?;
    }
    Ok(())
}

pub fn read_vocabulary<R: BufRead>(input: R) -> Result<Vocabulary> {
    let mut tokens = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let bad = || Error::Parse(format!("vocabulary line {}: {line:?}", lineno + 1));
        let (index, token) = line.split_once('\t').ok_or_else(bad)?;
        let index: usize = index.parse().map_err(|_| bad())?;
        if index != tokens.len() + 1 {
            return Err(Error::Parse(format!(
                "vocabulary line {}: expected index {}, found {index}",
                lineno + 1,
                tokens.len() + 1
            )));
        }
        tokens.push(token.to_string());
    }
    Vocabulary::from_tokens(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::OOV_TOKEN;

    #[test]
    fn vocabulary_file_round_trip() {
        let v = Vocabulary::from_tokens(["a", "b", OOV_TOKEN]).unwrap();
        let mut buf = Vec::new();
        write_vocabulary(&v, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "1\ta\n2\tb\n3\t<oov>\n"
        );
        let back = read_vocabulary(buf.as_slice()).unwrap();
        assert_eq!(back, v);
        assert_eq!(back.oov_index(), Some(3));
    }

    #[test]
    fn vocabulary_file_rejects_gaps() {
        assert!(read_vocabulary("1\ta\n3\tb\n".as_bytes()).is_err());
        assert!(read_vocabulary("1 a\n".as_bytes()).is_err());
        assert!(matches!(
            read_vocabulary("".as_bytes()),
            Err(Error::EmptyVocabulary)
        ));
    }
}
