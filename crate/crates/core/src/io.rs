//! Matrix files.
//!
//! Two formats are understood:
//!
//! * JSON: `{"dim": n, "entries": [[re, im], ...]}` with exactly `n²` pairs
//!   in row-major order. This is also the serde representation of
//!   [`ComplexMatrix`].
//! * Matrix Market: `matrix coordinate complex general` and
//!   `matrix array complex general` (array data is column-major). Real and
//!   integer fields are accepted on read and widened to complex.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg::{ComplexMatrix, C64};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    MatrixMarket,
}

impl Format {
    /// `.mtx` is Matrix Market; everything else is JSON.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("mtx") || e.eq_ignore_ascii_case("mm") => Self::MatrixMarket,
            _ => Self::Json,
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "matrix-market" | "mtx" | "mm" => Ok(Self::MatrixMarket),
            other => Err(Error::Parse(format!("unknown matrix format `{other}`"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    dim: usize,
    entries: Vec<[f64; 2]>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.dim();
        let entries = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| {
                let z = self.get(i, j);
                [z.re, z.im]
            })
            .collect();
        MatrixJson { dim: n, entries }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = MatrixJson::deserialize(d)?;
        from_json_parts(m).map_err(serde::de::Error::custom)
    }
}

fn from_json_parts(m: MatrixJson) -> Result<ComplexMatrix> {
    let n = m.dim;
    if m.entries.len() != n * n {
        return Err(Error::Parse(format!(
            "dimension {n} needs {} entries, found {}",
            n * n,
            m.entries.len()
        )));
    }
    ComplexMatrix::new(DMatrix::from_fn(n, n, |i, j| {
        let [re, im] = m.entries[i * n + j];
        C64::new(re, im)
    }))
}

pub fn parse_json(text: &str) -> Result<ComplexMatrix> {
    let m: MatrixJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    from_json_parts(m)
}

pub fn to_json(t: &ComplexMatrix) -> String {
    serde_json::to_string(t).expect("matrix serialization is infallible")
}

#[derive(Clone, Copy)]
enum Field {
    Real,
    Complex,
}

fn parse_num(tok: Option<&str>, line: usize) -> Result<f64> {
    let tok = tok.ok_or_else(|| Error::Parse(format!("line {line}: missing value")))?;
    tok.parse()
        .map_err(|_| Error::Parse(format!("line {line}: `{tok}` is not a number")))
}

fn parse_index(tok: Option<&str>, line: usize, n: usize) -> Result<usize> {
    let tok = tok.ok_or_else(|| Error::Parse(format!("line {line}: missing index")))?;
    let i: usize = tok
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: `{tok}` is not an index")))?;
    if i == 0 || i > n {
        return Err(Error::Parse(format!("line {line}: index {i} out of range 1..={n}")));
    }
    Ok(i - 1)
}

pub fn parse_matrix_market(text: &str) -> Result<ComplexMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse("empty Matrix Market file".into()))?;
    let head: Vec<String> = header.split_whitespace().map(|s| s.to_ascii_lowercase()).collect();
    if head.len() != 5 || head[0] != "%%matrixmarket" || head[1] != "matrix" {
        return Err(Error::Parse(format!("bad Matrix Market header `{header}`")));
    }
    let coordinate = match head[2].as_str() {
        "coordinate" => true,
        "array" => false,
        other => return Err(Error::Parse(format!("unsupported layout `{other}`"))),
    };
    let field = match head[3].as_str() {
        "complex" => Field::Complex,
        "real" | "integer" | "double" => Field::Real,
        other => return Err(Error::Parse(format!("unsupported field `{other}`"))),
    };
    if head[4] != "general" {
        return Err(Error::Parse(format!("unsupported symmetry `{}`", head[4])));
    }
    let mut body = lines.filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));
    let (size_line, size) = body
        .next()
        .ok_or_else(|| Error::Parse("missing size line".into()))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("line {size_line}: bad size `{t}`"))))
        .collect::<Result<_>>()?;
    let (rows, cols) = match dims.as_slice() {
        [r, c, _] if coordinate => (*r, *c),
        [r, c] if !coordinate => (*r, *c),
        _ => return Err(Error::Parse(format!("line {size_line}: bad size line `{size}`"))),
    };
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    let n = rows;
    let mut m = DMatrix::<C64>::zeros(n, n);
    let read_value = |toks: &mut std::str::SplitWhitespace<'_>, line: usize| -> Result<C64> {
        let re = parse_num(toks.next(), line)?;
        let im = match field {
            Field::Complex => parse_num(toks.next(), line)?,
            Field::Real => 0.0,
        };
        Ok(C64::new(re, im))
    };
    if coordinate {
        let nnz = dims[2];
        let mut count = 0;
        for (line, l) in body {
            let mut toks = l.split_whitespace();
            let i = parse_index(toks.next(), line, n)?;
            let j = parse_index(toks.next(), line, n)?;
            m[(i, j)] = read_value(&mut toks, line)?;
            count += 1;
        }
        if count != nnz {
            return Err(Error::Parse(format!("expected {nnz} entries, found {count}")));
        }
    } else {
        let mut count = 0;
        for (line, l) in body {
            if count >= n * n {
                return Err(Error::Parse(format!("line {line}: more than {} entries", n * n)));
            }
            let mut toks = l.split_whitespace();
            m[(count % n, count / n)] = read_value(&mut toks, line)?;
            count += 1;
        }
        if count != n * n {
            return Err(Error::Parse(format!("expected {} entries, found {count}", n * n)));
        }
    }
    ComplexMatrix::new(m)
}

/// Array layout, column-major, full precision.
pub fn to_matrix_market(t: &ComplexMatrix) -> String {
    let n = t.dim();
    let mut s = String::from("%%MatrixMarket matrix array complex general\n");
    writeln!(s, "{n} {n}").unwrap();
    for j in 0..n {
        for i in 0..n {
            let z = t.get(i, j);
            writeln!(s, "{:e} {:e}", z.re, z.im).unwrap();
        }
    }
    s
}

pub fn parse(text: &str, format: Format) -> Result<ComplexMatrix> {
    match format {
        Format::Json => parse_json(text),
        Format::MatrixMarket => parse_matrix_market(text),
    }
}

pub fn render(t: &ComplexMatrix, format: Format) -> String {
    match format {
        Format::Json => to_json(t),
        Format::MatrixMarket => to_matrix_market(t),
    }
}

/// Reads a matrix; the format defaults to the one implied by the extension.
pub fn read_matrix(path: &Path, format: Option<Format>) -> Result<ComplexMatrix> {
    let text = std::fs::read_to_string(path)?;
    parse(&text, format.unwrap_or_else(|| Format::from_path(path)))
}

/// Writes `contents` through a temporary file in the same directory and
/// renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    use std::io::Write;
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn write_matrix(path: &Path, t: &ComplexMatrix, format: Option<Format>) -> Result<()> {
    write_atomic(path, &render(t, format.unwrap_or_else(|| Format::from_path(path))))
}
