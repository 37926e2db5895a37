use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{BitMatrix, Reading, Shape, ShiftError, ShiftSystem, Word};
use crate::presentation::Tuple;

/// MatrixMarket coordinate pattern format, 1-based, row-major.
pub fn write_matrix_market(m: &BitMatrix) -> String {
    let mut out = String::from("%%MatrixMarket matrix coordinate pattern general\n");
    let _ = writeln!(out, "{} {} {}", m.size(), m.size(), m.count_ones());
    for (i, j) in m.entries() {
        let _ = writeln!(out, "{} {}", i + 1, j + 1);
    }
    out
}

pub fn read_matrix_market(text: &str) -> Result<BitMatrix, ShiftError> {
    let bad = |msg: &str| ShiftError::Malformed(format!("MatrixMarket: {msg}"));
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty input"))?;
    if !header.to_ascii_lowercase().starts_with("%%matrixmarket matrix coordinate pattern") {
        return Err(bad("expected a coordinate pattern header"));
    }
    let mut body = lines.map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('%'));
    let dims: Vec<usize> = body
        .next()
        .ok_or_else(|| bad("missing size line"))?
        .split_whitespace()
        .map(str::parse)
        .collect::<Result<_, _>>()
        .map_err(|_| bad("bad size line"))?;
    let [rows, cols, nnz] = dims[..] else {
        return Err(bad("size line needs three numbers"));
    };
    if rows != cols {
        return Err(bad("matrix is not square"));
    }
    let mut m = BitMatrix::zeros(rows);
    let mut seen = 0;
    for line in body {
        let ij: Vec<usize> =
            line.split_whitespace().map(str::parse).collect::<Result<_, _>>().map_err(|_| bad(line))?;
        match ij[..] {
            [i, j] if (1..=rows).contains(&i) && (1..=cols).contains(&j) => m.set(i - 1, j - 1, true),
            _ => return Err(bad(line)),
        }
        seen += 1;
    }
    if seen != nnz {
        return Err(bad(&format!("expected {nnz} entries, found {seen}")));
    }
    Ok(m)
}

/// Dense rows of `0`/`1` separated by commas.
pub fn write_csv(m: &BitMatrix) -> String {
    let mut out = String::with_capacity(2 * m.size() * m.size());
    for i in 0..m.size() {
        let row: Vec<&str> = (0..m.size()).map(|j| if m.get(i, j) { "1" } else { "0" }).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn read_csv(text: &str) -> Result<BitMatrix, ShiftError> {
    let rows = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split(',')
                .map(|c| match c.trim() {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    other => Err(ShiftError::Malformed(format!("CSV: entry {other:?} is not 0 or 1"))),
                })
                .collect()
        })
        .collect::<Result<Vec<Vec<bool>>, _>>()?;
    BitMatrix::from_rows(&rows).ok_or_else(|| ShiftError::Malformed("CSV: matrix is not square".into()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlphabetEntry {
    pub index: usize,
    pub tuple: Tuple,
}

/// Sidecar naming the alphabet indices used in words and matrices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlphabetJson {
    pub q: Option<usize>,
    pub reading: Option<Reading>,
    pub alphabet: Vec<AlphabetEntry>,
}

impl AlphabetJson {
    pub fn of(sys: &ShiftSystem) -> Self {
        AlphabetJson {
            q: sys.order(),
            reading: sys.reading(),
            alphabet: sys.alphabet().iter().enumerate().map(|(index, &tuple)| AlphabetEntry { index, tuple }).collect(),
        }
    }
}

/// Words as grids of alphabet indices, `grid[y][x]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordsJson {
    pub shape: Shape,
    pub alphabet: String,
    pub truncated: bool,
    pub words: Vec<Vec<Vec<usize>>>,
}

impl WordsJson {
    pub fn new(shape: Shape, alphabet: impl Into<String>, words: &[Word], truncated: bool) -> Self {
        WordsJson { shape, alphabet: alphabet.into(), truncated, words: words.iter().map(Word::grid).collect() }
    }

    pub fn to_words(&self) -> Result<Vec<Word>, ShiftError> {
        let [m1, m2] = self.shape;
        self.words
            .iter()
            .map(|g| {
                if g.len() != m2 + 1 || g.iter().any(|r| r.len() != m1 + 1) {
                    return Err(ShiftError::Malformed("word grid does not match its shape".into()));
                }
                Ok(Word { shape: self.shape, cells: g.concat() })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> BitMatrix {
        let mut m = BitMatrix::zeros(4);
        for (i, j) in [(0, 1), (1, 3), (3, 3), (2, 0)] {
            m.set(i, j, true);
        }
        m
    }

    #[test]
    fn matrix_market_round_trip() {
        let m = sample();
        let text = write_matrix_market(&m);
        assert!(text.starts_with("%%MatrixMarket matrix coordinate pattern general\n4 4 4\n1 2\n"));
        assert_eq!(read_matrix_market(&text).unwrap(), m);
    }

    #[test]
    fn matrix_market_rejects_bad_counts() {
        let text = "%%MatrixMarket matrix coordinate pattern general\n2 2 2\n1 1\n";
        assert!(read_matrix_market(text).is_err());
        let text = "%%MatrixMarket matrix coordinate pattern general\n2 2 1\n3 1\n";
        assert!(read_matrix_market(text).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let m = sample();
        let text = write_csv(&m);
        assert_eq!(text.lines().next(), Some("0,1,0,0"));
        assert_eq!(read_csv(&text).unwrap(), m);
        assert!(read_csv("0,1\n1\n").is_err());
    }

    #[test]
    fn words_json_round_trip() {
        let w = Word { shape: [1, 1], cells: vec![0, 1, 2, 3] };
        let json = WordsJson::new([1, 1], "alphabet.json", std::slice::from_ref(&w), false);
        assert_eq!(json.words, vec![vec![vec![0, 1], vec![2, 3]]]);
        assert_eq!(json.to_words().unwrap(), vec![w]);
    }
}
