//! Matrix Market text files: `coordinate` files load as sparse matrices,
//! `array` files as dense ones. Field `real`, `integer` or `complex`;
//! symmetry `general`, `symmetric`, `skew-symmetric` or `hermitian`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use dropmor_core::linalg::SparseMatrix;
use dropmor_core::{CMatrix, Complex64, TermMatrix};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Storage {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    Skew,
    Hermitian,
}

impl Symmetry {
    fn mirror(self, v: Complex64) -> Complex64 {
        match self {
            Symmetry::General | Symmetry::Symmetric => v,
            Symmetry::Skew => -v,
            Symmetry::Hermitian => v.conj(),
        }
    }
}

pub fn read_matrix(path: &Path) -> Result<TermMatrix> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_matrix(&text, path)
}

pub fn write_matrix(path: &Path, m: &TermMatrix) -> Result<()> {
    fs::write(path, format_matrix(m)).map_err(|e| CliError::io(path, e))
}

/// Data lines with their 1-based line numbers, comments and blanks removed.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .skip(1)
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('%'))
}

fn parse_header(text: &str, path: &Path) -> Result<(Storage, Field, Symmetry)> {
    let first = text.lines().next().unwrap_or("");
    let bad = |msg: String| CliError::format(path, 1, msg);
    let words: Vec<String> = first.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(bad(format!("expected '%%MatrixMarket matrix <storage> <field> <symmetry>', found {first:?}")));
    }
    let storage = match words[2].as_str() {
        "coordinate" => Storage::Coordinate,
        "array" => Storage::Array,
        other => return Err(bad(format!("unsupported storage {other:?}"))),
    };
    let field = match words[3].as_str() {
        "real" | "integer" | "double" => Field::Real,
        "complex" => Field::Complex,
        other => return Err(bad(format!("unsupported field {other:?}"))),
    };
    let symmetry = match words[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::Skew,
        "hermitian" => Symmetry::Hermitian,
        other => return Err(bad(format!("unsupported symmetry {other:?}"))),
    };
    if symmetry == Symmetry::Hermitian && field != Field::Complex {
        return Err(bad("hermitian symmetry requires complex entries".into()));
    }
    Ok((storage, field, symmetry))
}

fn parse_usize(tok: &str, what: &str, path: &Path, line: usize) -> Result<usize> {
    tok.parse()
        .map_err(|_| CliError::format(path, line, format!("invalid {what} {tok:?}")))
}

fn parse_value<'a>(toks: &mut impl Iterator<Item = &'a str>, field: Field, path: &Path, line: usize) -> Result<Complex64> {
    let mut next = |part: &str| -> Result<f64> {
        let tok = toks
            .next()
            .ok_or_else(|| CliError::format(path, line, format!("missing {part} part")))?;
        let v: f64 = tok
            .parse()
            .map_err(|_| CliError::format(path, line, format!("invalid number {tok:?}")))?;
        if !v.is_finite() {
            return Err(CliError::format(path, line, format!("non-finite entry {tok:?}")));
        }
        Ok(v)
    };
    let re = next("real")?;
    let im = match field {
        Field::Real => 0.0,
        Field::Complex => next("imaginary")?,
    };
    Ok(Complex64::new(re, im))
}

pub fn parse_matrix(text: &str, path: &Path) -> Result<TermMatrix> {
    let (storage, field, symmetry) = parse_header(text, path)?;
    let mut lines = data_lines(text);
    let last_line = text.lines().count().max(1);
    let (size_line, size) = lines
        .next()
        .ok_or_else(|| CliError::format(path, last_line, "missing size line"))?;
    let dims: Vec<&str> = size.split_whitespace().collect();
    let want = if storage == Storage::Coordinate { 3 } else { 2 };
    if dims.len() != want {
        return Err(CliError::format(path, size_line, format!("size line needs {want} integers, found {size:?}")));
    }
    let rows = parse_usize(dims[0], "row count", path, size_line)?;
    let cols = parse_usize(dims[1], "column count", path, size_line)?;
    if symmetry != Symmetry::General && rows != cols {
        return Err(CliError::format(path, size_line, format!("{rows}x{cols} matrix cannot be symmetric")));
    }

    match storage {
        Storage::Coordinate => {
            let nnz = parse_usize(dims[2], "entry count", path, size_line)?;
            let mut triplets = Vec::with_capacity(nnz * if symmetry == Symmetry::General { 1 } else { 2 });
            let mut seen = 0;
            for (line, l) in lines {
                if seen == nnz {
                    return Err(CliError::format(path, line, format!("more than the declared {nnz} entries")));
                }
                let mut toks = l.split_whitespace();
                let i = parse_usize(toks.next().unwrap_or(""), "row index", path, line)?;
                let j = parse_usize(toks.next().unwrap_or(""), "column index", path, line)?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(CliError::format(
                        path,
                        line,
                        format!("entry ({i}, {j}) outside the declared {rows}x{cols} matrix"),
                    ));
                }
                let v = parse_value(&mut toks, field, path, line)?;
                if toks.next().is_some() {
                    return Err(CliError::format(path, line, "trailing tokens after entry"));
                }
                if symmetry != Symmetry::General && j > i {
                    return Err(CliError::format(path, line, "symmetric files store the lower triangle only"));
                }
                triplets.push((i - 1, j - 1, v));
                if symmetry != Symmetry::General && i != j {
                    triplets.push((j - 1, i - 1, symmetry.mirror(v)));
                }
                seen += 1;
            }
            if seen < nnz {
                return Err(CliError::format(path, last_line, format!("expected {nnz} entries, found {seen}")));
            }
            let m = SparseMatrix::from_triplets(rows, cols, &triplets)
                .map_err(|e| CliError::format(path, size_line, e.to_string()))?;
            Ok(TermMatrix::Sparse(m))
        }
        Storage::Array => {
            // column-major; symmetric files list the lower triangle column by column
            let slots: Vec<(usize, usize)> = (0..cols)
                .flat_map(|j| {
                    let start = match symmetry {
                        Symmetry::General => 0,
                        Symmetry::Skew => j + 1,
                        _ => j,
                    };
                    (start..rows).map(move |i| (i, j))
                })
                .collect();
            let mut m = CMatrix::zeros(rows, cols);
            let mut slot = slots.iter();
            let mut seen = 0;
            for (line, l) in lines {
                let &(i, j) = slot
                    .next()
                    .ok_or_else(|| CliError::format(path, line, format!("more than the {} expected values", slots.len())))?;
                let mut toks = l.split_whitespace();
                let v = parse_value(&mut toks, field, path, line)?;
                if toks.next().is_some() {
                    return Err(CliError::format(path, line, "trailing tokens after value"));
                }
                m[(i, j)] = v;
                if i != j && symmetry != Symmetry::General {
                    m[(j, i)] = symmetry.mirror(v);
                }
                seen += 1;
            }
            if seen < slots.len() {
                return Err(CliError::format(
                    path,
                    last_line,
                    format!("expected {} values, found {seen}", slots.len()),
                ));
            }
            Ok(TermMatrix::Dense(m))
        }
    }
}

fn push_value(out: &mut String, v: Complex64, complex: bool) {
    if complex {
        let _ = write!(out, "{:e} {:e}", v.re, v.im);
    } else {
        let _ = write!(out, "{:e}", v.re);
    }
}

/// General-symmetry text; real field when every imaginary part is `+0`.
pub fn format_matrix(m: &TermMatrix) -> String {
    let complex = match m {
        TermMatrix::Dense(d) => d.iter().any(|z| z.im.to_bits() != 0),
        TermMatrix::Sparse(s) => s.triplets().any(|(_, _, z)| z.im.to_bits() != 0),
    };
    let field = if complex { "complex" } else { "real" };
    let mut out = String::new();
    match m {
        TermMatrix::Sparse(s) => {
            let _ = writeln!(out, "%%MatrixMarket matrix coordinate {field} general");
            let _ = writeln!(out, "{} {} {}", s.nrows(), s.ncols(), s.nnz());
            for (i, j, v) in s.triplets() {
                let _ = write!(out, "{} {} ", i + 1, j + 1);
                push_value(&mut out, v, complex);
                out.push('\n');
            }
        }
        TermMatrix::Dense(d) => {
            let _ = writeln!(out, "%%MatrixMarket matrix array {field} general");
            let _ = writeln!(out, "{} {}", d.nrows(), d.ncols());
            for v in d.iter() {
                push_value(&mut out, *v, complex);
                out.push('\n');
            }
        }
    }
    out
}
