//! The textual word-embedding format: a `<count> <dim>` header followed by
//! one `<word> <f1> … <fdim>` line per vector, space separated.

use std::{
    collections::BTreeMap,
    fs::File,
    io::{BufRead, BufReader, BufWriter, Write},
    path::Path,
};

use sesa_core::{
    text::{assemble_embeddings, EmbeddingMatrix, WordVocab},
    SeededRng,
};

use crate::error::{Error, Result};

/// Parsed embedding file. An empty file yields no rows and no dimension.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmbeddingTable {
    pub dim: Option<usize>,
    pub rows: BTreeMap<String, Vec<f64>>,
}

pub fn parse_embeddings(reader: impl BufRead, path: &Path) -> Result<EmbeddingTable> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let header = loop {
        match lines.next() {
            None => return Ok(EmbeddingTable::default()),
            Some((n, line)) => {
                let line = line.map_err(Error::io(path))?;
                if !line.trim().is_empty() {
                    break (n, line);
                }
            }
        }
    };
    let (header_line, header) = header;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let parse_count = |s: &str| s.parse::<usize>().ok();
    let (count, dim) = match fields[..] {
        [c, d] => match (parse_count(c), parse_count(d)) {
            (Some(c), Some(d)) if d > 0 => (c, d),
            _ => return Err(Error::parse(path, header_line, "header must be `<count> <dim>` with dim > 0")),
        },
        _ => return Err(Error::parse(path, header_line, "header must be `<count> <dim>`")),
    };

    let mut rows = BTreeMap::new();
    let mut last_line = header_line;
    for (n, line) in lines {
        let line = line.map_err(Error::io(path))?;
        last_line = n;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(' ').filter(|s| !s.is_empty());
        let word = parts.next().expect("line is not blank");
        let values = parts
            .map(|s| match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::parse(path, n, format!("`{s}` is not a finite number"))),
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != dim {
            return Err(Error::parse(
                path,
                n,
                format!("expected {dim} values for `{word}`, found {}", values.len()),
            ));
        }
        if rows.insert(word.to_string(), values).is_some() {
            return Err(Error::parse(path, n, format!("duplicate word `{word}`")));
        }
    }
    if rows.len() != count {
        return Err(Error::parse(
            path,
            last_line,
            format!("header declares {count} vectors, file has {}", rows.len()),
        ));
    }
    Ok(EmbeddingTable { dim: Some(dim), rows })
}

pub fn read_embeddings(path: &Path) -> Result<EmbeddingTable> {
    let file = File::open(path).map_err(Error::io(path))?;
    parse_embeddings(BufReader::new(file), path)
}

/// Reads `path` and assembles an embedding matrix for `vocab`; returns it
/// with the number of vocabulary rows the file covered.
pub fn load_for_vocab(
    path: &Path,
    vocab: &WordVocab,
    d_emb: usize,
    rng: &mut SeededRng,
) -> Result<(EmbeddingMatrix, usize)> {
    let table = read_embeddings(path)?;
    if let Some(dim) = table.dim {
        if dim != d_emb {
            return Err(Error::parse(
                path,
                1,
                format!("vectors have dimension {dim}, the model expects {d_emb}"),
            ));
        }
    }
    Ok(assemble_embeddings(vocab, d_emb, &table.rows, rng)?)
}

/// Writes rows in order. Words must be non-empty and free of whitespace.
pub fn write_embeddings<'a>(
    mut out: impl Write,
    dim: usize,
    rows: impl ExactSizeIterator<Item = (&'a str, &'a [f64])>,
) -> std::io::Result<()> {
    writeln!(out, "{} {dim}", rows.len())?;
    for (word, values) in rows {
        if word.is_empty() || word.contains(char::is_whitespace) {
            return Err(std::io::Error::new(
                std::io::ErrorKind::InvalidInput,
                format!("word `{word}` is empty or contains whitespace"),
            ));
        }
        if values.len() != dim {
            return Err(std::io::Error::new(
                std::io::ErrorKind::InvalidInput,
                format!("`{word}` has {} values, expected {dim}", values.len()),
            ));
        }
        out.write_all(word.as_bytes())?;
        for v in values {
            write!(out, " {v}")?;
        }
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn save_embeddings<'a>(
    path: &Path,
    dim: usize,
    rows: impl ExactSizeIterator<Item = (&'a str, &'a [f64])>,
) -> Result<()> {
    let file = File::create(path).map_err(Error::io(path))?;
    write_embeddings(BufWriter::new(file), dim, rows).map_err(Error::io(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<EmbeddingTable> {
        parse_embeddings(text.as_bytes(), Path::new("e.txt"))
    }

    fn line_of(err: Error) -> usize {
        match err {
            Error::Parse { line, .. } => line,
            other => panic!("expected a parse error, got {other}"),
        }
    }

    #[test]
    fn parses_decimal_and_scientific() {
        let t = parse("2 3\nrust 0.5 -1 2e-3\ngo 1E2 0 -0.25\n").unwrap();
        assert_eq!(t.dim, Some(3));
        assert_eq!(t.rows["rust"], vec![0.5, -1.0, 0.002]);
        assert_eq!(t.rows["go"], vec![100.0, 0.0, -0.25]);
    }

    #[test]
    fn empty_file_has_no_rows() {
        assert_eq!(parse("").unwrap(), EmbeddingTable::default());
        assert_eq!(parse("\n\n").unwrap(), EmbeddingTable::default());
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(line_of(parse("2 x\n").unwrap_err()), 1);
        assert_eq!(line_of(parse("2 2\na 1 2\nb 1\n").unwrap_err()), 3);
        assert_eq!(line_of(parse("1 2\na 1 nan\n").unwrap_err()), 2);
        assert_eq!(line_of(parse("2 2\na 1 2\na 3 4\n").unwrap_err()), 3);
        assert_eq!(line_of(parse("3 2\na 1 2\nb 3 4\n").unwrap_err()), 3);
    }

    #[test]
    fn write_then_parse_is_exact() {
        let rows = [("x", vec![0.1, 1.0 / 3.0]), ("y", vec![-2.5e-300, 7.0])];
        let mut buf = Vec::new();
        write_embeddings(&mut buf, 2, rows.iter().map(|(w, v)| (*w, v.as_slice()))).unwrap();
        let t = parse(std::str::from_utf8(&buf).unwrap()).unwrap();
        for (w, v) in &rows {
            assert_eq!(&t.rows[*w], v);
        }
        assert!(write_embeddings(Vec::new(), 1, [("a b", &[1.0][..])].into_iter()).is_err());
    }

    #[test]
    fn vocab_coverage_and_dimension_check() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.txt");
        std::fs::write(&path, "2 2\nrust 1 0\nzig 0 1\n").unwrap();
        let vocab = WordVocab::from_tokens(["rust".to_string(), "go".to_string()]);
        let (m, coverage) = load_for_vocab(&path, &vocab, 2, &mut SeededRng::new(1)).unwrap();
        assert_eq!(coverage, 1);
        assert_eq!(m.0.row(vocab.id("rust") as usize), &[1.0, 0.0]);
        assert!(load_for_vocab(&path, &vocab, 3, &mut SeededRng::new(1)).is_err());
    }
}
