//! MatrixMarket coordinate files and the UCI bag-of-words triple format.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use dynsketch::SparseMatrix;

use crate::{HarnessError, Result};

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> HarnessError {
    HarnessError::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

/// Reads a MatrixMarket coordinate file (`%%MatrixMarket matrix coordinate
/// real general`, 1-based indices). Duplicate coordinates are summed.
pub fn load_matrix_market(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let header = header?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 || fields[0] != "%%MatrixMarket" {
        return Err(parse_err(
            path,
            1,
            "expected '%%MatrixMarket matrix coordinate real general' header",
        ));
    }
    if fields[1] != "matrix" || fields[2] != "coordinate" {
        return Err(parse_err(
            path,
            1,
            format!("unsupported object/format '{} {}'", fields[1], fields[2]),
        ));
    }
    if fields[3] != "real" && fields[3] != "integer" {
        return Err(parse_err(
            path,
            1,
            format!("unsupported field type '{}'", fields[3]),
        ));
    }
    if fields[4] != "general" {
        return Err(parse_err(
            path,
            1,
            format!("unsupported symmetry '{}'", fields[4]),
        ));
    }

    let mut dims: Option<(usize, usize, usize)> = None;
    let mut matrix: Option<SparseMatrix> = None;
    let mut seen = 0usize;
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        match dims {
            None => {
                if tokens.len() != 3 {
                    return Err(parse_err(path, lineno, "expected 'rows cols nnz'"));
                }
                let rows: usize = tokens[0]
                    .parse()
                    .map_err(|_| parse_err(path, lineno, "bad row count"))?;
                let cols: usize = tokens[1]
                    .parse()
                    .map_err(|_| parse_err(path, lineno, "bad column count"))?;
                let nnz: usize = tokens[2]
                    .parse()
                    .map_err(|_| parse_err(path, lineno, "bad nnz count"))?;
                dims = Some((rows, cols, nnz));
                matrix = Some(SparseMatrix::new(rows, cols));
            }
            Some((rows, cols, _)) => {
                if tokens.len() != 3 {
                    return Err(parse_err(path, lineno, "expected 'i j value'"));
                }
                let i: usize = tokens[0]
                    .parse()
                    .map_err(|_| parse_err(path, lineno, "bad row index"))?;
                let j: usize = tokens[1]
                    .parse()
                    .map_err(|_| parse_err(path, lineno, "bad column index"))?;
                let v: f64 = tokens[2]
                    .parse()
                    .map_err(|_| parse_err(path, lineno, "bad value"))?;
                if i < 1 || i > rows || j < 1 || j > cols {
                    return Err(parse_err(
                        path,
                        lineno,
                        format!("index ({i}, {j}) outside declared {rows}x{cols}"),
                    ));
                }
                let m = matrix.as_mut().unwrap();
                let old = m.get(i - 1, j - 1);
                m.set(i - 1, j - 1, old + v)
                    .map_err(|e| parse_err(path, lineno, e.to_string()))?;
                seen += 1;
            }
        }
    }
    match dims {
        None => Err(parse_err(path, 1, "missing size line")),
        Some((_, _, nnz)) => {
            if seen != nnz {
                return Err(parse_err(
                    path,
                    0,
                    format!("declared {nnz} entries but found {seen}"),
                ));
            }
            Ok(matrix.unwrap())
        }
    }
}

/// Writes the matrix as MatrixMarket coordinate real general, entries in
/// row-major order. Values print in shortest round-trip form, so a
/// write/load cycle reproduces them bit-exactly.
pub fn write_matrix_market(path: impl AsRef<Path>, m: &SparseMatrix) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", m.n_rows(), m.n_cols(), m.nnz())?;
    let mut entries: Vec<(usize, usize, f64)> = m.iter().collect();
    entries.sort_by_key(|&(i, j, _)| (i, j));
    for (i, j, v) in entries {
        writeln!(w, "{} {} {}", i + 1, j + 1, v)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the UCI bag-of-words format: three header lines (docs, words,
/// nnz) followed by `docID wordID count` triples. Produces the docs x words
/// count matrix.
pub fn load_bag_of_words(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path)?);
    let mut docs = 0usize;
    let mut words = 0usize;
    let mut declared = 0usize;
    let mut matrix: Option<SparseMatrix> = None;
    let mut header_seen = 0usize;
    let mut found = 0usize;
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if header_seen < 3 {
            let v: usize = trimmed
                .parse()
                .map_err(|_| parse_err(path, lineno, "expected integer header line"))?;
            match header_seen {
                0 => docs = v,
                1 => words = v,
                _ => declared = v,
            }
            header_seen += 1;
            if header_seen == 3 {
                matrix = Some(SparseMatrix::new(docs, words));
            }
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        if tokens.len() != 3 {
            return Err(parse_err(path, lineno, "expected 'docID wordID count'"));
        }
        let doc: usize = tokens[0]
            .parse()
            .map_err(|_| parse_err(path, lineno, "bad docID"))?;
        let word: usize = tokens[1]
            .parse()
            .map_err(|_| parse_err(path, lineno, "bad wordID"))?;
        let count: f64 = tokens[2]
            .parse()
            .map_err(|_| parse_err(path, lineno, "bad count"))?;
        if doc < 1 || doc > docs || word < 1 || word > words {
            return Err(parse_err(
                path,
                lineno,
                format!("triple ({doc}, {word}) outside {docs}x{words}"),
            ));
        }
        let m = matrix.as_mut().unwrap();
        let old = m.get(doc - 1, word - 1);
        m.set(doc - 1, word - 1, old + count)
            .map_err(|e| parse_err(path, lineno, e.to_string()))?;
        found += 1;
    }
    if matrix.is_none() {
        return Err(parse_err(path, 1, "missing header lines"));
    }
    if found != declared {
        return Err(parse_err(
            path,
            0,
            format!("declared {declared} triples but found {found}"),
        ));
    }
    Ok(matrix.unwrap())
}
