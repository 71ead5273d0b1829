//! Matrix Market import and export.
//!
//! Sparse matrices use the `coordinate` format (real or complex, general or
//! symmetric on input; general on output). Vectors use the `array` format
//! with one column. Values are written with 17 significant digits so every
//! f64 round-trips exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::sparse::{SparseMatrix, Values};

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_sparse(path: &Path, m: &SparseMatrix) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_sparse_to(&mut w, m)
}

pub fn write_sparse_to<W: Write>(w: &mut W, m: &SparseMatrix) -> Result<()> {
    let field = if m.is_real() { "real" } else { "complex" };
    writeln!(w, "%%MatrixMarket matrix coordinate {field} general")?;
    writeln!(w, "{} {} {}", m.nrows(), m.ncols(), m.nnz())?;
    let offsets = m.row_offsets();
    let cols = m.col_indices();
    for i in 0..m.nrows() {
        for k in offsets[i]..offsets[i + 1] {
            let j = cols[k];
            match m.values() {
                Values::Real(vals) => {
                    writeln!(w, "{} {} {}", i + 1, j + 1, fmt(vals[k]))?;
                }
                Values::Complex(vals) => {
                    writeln!(
                        w,
                        "{} {} {} {}",
                        i + 1,
                        j + 1,
                        fmt(vals[k].re),
                        fmt(vals[k].im)
                    )?;
                }
            }
        }
    }
    Ok(())
}

pub fn read_sparse(path: &Path) -> Result<SparseMatrix> {
    read_sparse_from(BufReader::new(File::open(path)?))
}

struct Header {
    complex: bool,
    symmetric: bool,
    coordinate: bool,
}

fn parse_header(line: &str) -> Result<Header> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    if tokens.len() < 4 || tokens[0] != "%%MatrixMarket" || tokens[1] != "matrix" {
        return Err(Error::Parse(
            "expected a %%MatrixMarket matrix header".into(),
        ));
    }
    let coordinate = match tokens[2] {
        "coordinate" => true,
        "array" => false,
        other => return Err(Error::Parse(format!("unsupported storage '{other}'"))),
    };
    let complex = match tokens[3] {
        "real" => false,
        "complex" => true,
        other => return Err(Error::Parse(format!("unsupported field '{other}'"))),
    };
    let symmetric = match tokens.get(4).copied().unwrap_or("general") {
        "general" => false,
        "symmetric" => true,
        other => return Err(Error::Parse(format!("unsupported symmetry '{other}'"))),
    };
    Ok(Header {
        complex,
        symmetric,
        coordinate,
    })
}

fn data_lines<R: BufRead>(r: R) -> impl Iterator<Item = std::io::Result<String>> {
    r.lines().filter(|l| match l {
        Ok(s) => {
            let t = s.trim();
            !t.is_empty() && !t.starts_with('%')
        }
        Err(_) => true,
    })
}

fn parse_f64(tok: &str) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| Error::Parse(format!("bad number '{tok}'")))
}

fn parse_usize(tok: &str) -> Result<usize> {
    tok.parse::<usize>()
        .map_err(|_| Error::Parse(format!("bad index '{tok}'")))
}

pub fn read_sparse_from<R: BufRead>(mut r: R) -> Result<SparseMatrix> {
    let mut first = String::new();
    r.read_line(&mut first)?;
    let header = parse_header(&first)?;
    if !header.coordinate {
        return Err(Error::Parse(
            "expected coordinate storage for a sparse matrix".into(),
        ));
    }
    let mut lines = data_lines(r);
    let size_line = lines
        .next()
        .ok_or_else(|| Error::Parse("missing size line".into()))??;
    let dims: Vec<&str> = size_line.split_whitespace().collect();
    if dims.len() != 3 {
        return Err(Error::Parse("size line must be 'rows cols nnz'".into()));
    }
    let nrows = parse_usize(dims[0])?;
    let ncols = parse_usize(dims[1])?;
    let nnz = parse_usize(dims[2])?;

    let mut real_trips: Vec<(usize, usize, f64)> = Vec::new();
    let mut cplx_trips: Vec<(usize, usize, C64)> = Vec::new();
    let mut seen = 0usize;
    for line in lines {
        let line = line?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        let want = if header.complex { 4 } else { 3 };
        if toks.len() != want {
            return Err(Error::Parse(format!("entry line '{line}' malformed")));
        }
        let i = parse_usize(toks[0])?;
        let j = parse_usize(toks[1])?;
        if i == 0 || j == 0 || i > nrows || j > ncols {
            return Err(Error::Parse(format!(
                "entry ({i}, {j}) outside declared {nrows}x{ncols}"
            )));
        }
        let (i, j) = (i - 1, j - 1);
        if header.complex {
            let v = C64::new(parse_f64(toks[2])?, parse_f64(toks[3])?);
            cplx_trips.push((i, j, v));
            if header.symmetric && i != j {
                cplx_trips.push((j, i, v));
            }
        } else {
            let v = parse_f64(toks[2])?;
            real_trips.push((i, j, v));
            if header.symmetric && i != j {
                real_trips.push((j, i, v));
            }
        }
        seen += 1;
    }
    if seen != nnz {
        return Err(Error::Parse(format!(
            "declared {nnz} entries but found {seen}"
        )));
    }
    if header.complex {
        SparseMatrix::from_complex_triplets(nrows, ncols, cplx_trips)
    } else {
        SparseMatrix::from_real_triplets(nrows, ncols, real_trips)
    }
}

pub fn write_vector(path: &Path, v: &[C64]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_vector_to(&mut w, v)
}

/// Writes a complex vector as a one-column dense array.
pub fn write_vector_to<W: Write>(w: &mut W, v: &[C64]) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix array complex general")?;
    writeln!(w, "{} 1", v.len())?;
    for x in v {
        writeln!(w, "{} {}", fmt(x.re), fmt(x.im))?;
    }
    Ok(())
}

pub fn read_vector(path: &Path) -> Result<Vec<C64>> {
    read_vector_from(BufReader::new(File::open(path)?))
}

pub fn read_vector_from<R: BufRead>(mut r: R) -> Result<Vec<C64>> {
    let mut first = String::new();
    r.read_line(&mut first)?;
    let header = parse_header(&first)?;
    if header.coordinate || header.symmetric {
        return Err(Error::Parse(
            "expected a general dense array for a vector".into(),
        ));
    }
    let mut lines = data_lines(r);
    let size_line = lines
        .next()
        .ok_or_else(|| Error::Parse("missing size line".into()))??;
    let dims: Vec<&str> = size_line.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(Error::Parse("array size line must be 'rows cols'".into()));
    }
    let nrows = parse_usize(dims[0])?;
    if parse_usize(dims[1])? != 1 {
        return Err(Error::Parse("vector arrays must have one column".into()));
    }
    let mut out = Vec::with_capacity(nrows);
    for line in lines {
        let line = line?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        let v = if header.complex {
            if toks.len() != 2 {
                return Err(Error::Parse(format!("array line '{line}' malformed")));
            }
            C64::new(parse_f64(toks[0])?, parse_f64(toks[1])?)
        } else {
            if toks.len() != 1 {
                return Err(Error::Parse(format!("array line '{line}' malformed")));
            }
            C64::new(parse_f64(toks[0])?, 0.0)
        };
        out.push(v);
    }
    if out.len() != nrows {
        return Err(Error::Parse(format!(
            "declared {nrows} array entries but found {}",
            out.len()
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn roundtrip(m: &SparseMatrix) -> SparseMatrix {
        let mut buf = Vec::new();
        write_sparse_to(&mut buf, m).unwrap();
        read_sparse_from(Cursor::new(buf)).unwrap()
    }

    #[test]
    fn real_roundtrip_is_bitwise_exact() {
        let m = SparseMatrix::from_real_triplets(
            3,
            4,
            vec![
                (0, 0, 1.0 / 3.0),
                (1, 2, -2.0e-15),
                (2, 3, std::f64::consts::PI),
                (2, 0, 6.02214076e23),
            ],
        )
        .unwrap();
        let back = roundtrip(&m);
        assert_eq!(m, back);
    }

    #[test]
    fn complex_roundtrip_is_bitwise_exact() {
        let m = SparseMatrix::from_complex_triplets(
            2,
            2,
            vec![
                (0, 0, c(1.0 / 7.0, -1.0e-308)),
                (0, 1, c(0.0, 1.0)),
                (1, 1, c(-9.999999999999999e99, std::f64::consts::E)),
            ],
        )
        .unwrap();
        let back = roundtrip(&m);
        assert_eq!(m, back);
    }

    #[test]
    fn vector_roundtrip_is_bitwise_exact() {
        let v = vec![c(0.1, -0.2), c(1.0 / 3.0, 0.0), c(0.0, -1.0e-17)];
        let mut buf = Vec::new();
        write_vector_to(&mut buf, &v).unwrap();
        let back = read_vector_from(Cursor::new(buf)).unwrap();
        assert_eq!(v, back);
    }

    #[test]
    fn symmetric_input_is_expanded() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n% comment\n2 2 2\n1 1 2.0\n2 1 -1.0\n";
        let m = read_sparse_from(Cursor::new(text)).unwrap();
        assert_eq!(m.get(0, 1), c(-1.0, 0.0));
        assert_eq!(m.get(1, 0), c(-1.0, 0.0));
        assert_eq!(m.nnz(), 3);
    }

    #[test]
    fn duplicate_file_entries_are_summed() {
        let text = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 2.0\n1 1 3.0\n";
        let m = read_sparse_from(Cursor::new(text)).unwrap();
        assert_eq!(m.get(0, 0), c(5.0, 0.0));
        assert_eq!(m.nnz(), 1);
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        for text in [
            "%%NotMatrixMarket matrix coordinate real general\n1 1 0\n",
            "%%MatrixMarket matrix coordinate rational general\n1 1 0\n",
            "%%MatrixMarket matrix coordinate real general\n1 1 1\n2 1 1.0\n",
            "%%MatrixMarket matrix coordinate real general\n1 1 2\n1 1 1.0\n",
            "%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1.0\n",
        ] {
            assert!(
                read_sparse_from(Cursor::new(text)).is_err(),
                "accepted: {text}"
            );
        }
    }
}
