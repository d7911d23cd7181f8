//! Matrix Market coordinate and array I/O.

use std::io::{BufRead, Write};

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::sparse::CsrMatrix;
use crate::scalar::Scalar;

/// Largest row or column count accepted by the reader.
pub const MAX_DIM: usize = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Field {
    Real,
    Complex,
    Integer,
    Pattern,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    Hermitian,
    SkewSymmetric,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn fmt_entry<T: Scalar>(v: T) -> String {
    if T::IS_COMPLEX {
        format!("{:.17e} {:.17e}", v.real(), v.imag())
    } else {
        format!("{:.17e}", v.real())
    }
}

/// Writes the lower triangle of a Hermitian (real symmetric) matrix.
pub fn write_hermitian<T: Scalar, W: Write>(w: &mut W, a: &CsrMatrix<T>) -> Result<()> {
    let kind = if T::IS_COMPLEX { "complex hermitian" } else { "real symmetric" };
    writeln!(w, "%%MatrixMarket matrix coordinate {kind}")?;
    let mut lower = Vec::new();
    for i in 0..a.nrows() {
        let (cols, vals) = a.row(i);
        for (j, v) in cols.iter().zip(vals) {
            if *j <= i {
                lower.push((i, *j, *v));
            }
        }
    }
    writeln!(w, "{} {} {}", a.nrows(), a.ncols(), lower.len())?;
    for (i, j, v) in lower {
        writeln!(w, "{} {} {}", i + 1, j + 1, fmt_entry(v))?;
    }
    Ok(())
}

/// Writes every stored entry in general coordinate format.
pub fn write_general<T: Scalar, W: Write>(w: &mut W, a: &CsrMatrix<T>) -> Result<()> {
    let field = if T::IS_COMPLEX { "complex" } else { "real" };
    writeln!(w, "%%MatrixMarket matrix coordinate {field} general")?;
    writeln!(w, "{} {} {}", a.nrows(), a.ncols(), a.nnz())?;
    for i in 0..a.nrows() {
        let (cols, vals) = a.row(i);
        for (j, v) in cols.iter().zip(vals) {
            writeln!(w, "{} {} {}", i + 1, j + 1, fmt_entry(*v))?;
        }
    }
    Ok(())
}

/// Writes a dense matrix in column-major array format.
pub fn write_dense<T: Scalar, W: Write>(w: &mut W, m: &Mat<T>) -> Result<()> {
    let field = if T::IS_COMPLEX { "complex" } else { "real" };
    writeln!(w, "%%MatrixMarket matrix array {field} general")?;
    writeln!(w, "{} {}", m.nrows(), m.ncols())?;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            writeln!(w, "{}", fmt_entry(m[(i, j)]))?;
        }
    }
    Ok(())
}

fn parse_usize(tok: Option<&str>, line: usize, what: &str) -> Result<usize> {
    tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?
        .parse::<usize>()
        .map_err(|_| parse_err(line, format!("bad {what}")))
}

fn parse_f64(tok: Option<&str>, line: usize) -> Result<f64> {
    let v = tok
        .ok_or_else(|| parse_err(line, "missing value"))?
        .parse::<f64>()
        .map_err(|_| parse_err(line, "bad value"))?;
    if !v.is_finite() {
        return Err(parse_err(line, "non-finite value"));
    }
    Ok(v)
}

fn parse_value<'a>(toks: &mut impl Iterator<Item = &'a str>, field: Field, line: usize) -> Result<Complex64> {
    Ok(match field {
        Field::Pattern => Complex64::new(1.0, 0.0),
        Field::Real | Field::Integer => Complex64::new(parse_f64(toks.next(), line)?, 0.0),
        Field::Complex => {
            let re = parse_f64(toks.next(), line)?;
            let im = parse_f64(toks.next(), line)?;
            Complex64::new(re, im)
        }
    })
}

fn convert<T: Scalar>(z: Complex64, line: usize) -> Result<T> {
    T::from_c64(z).ok_or_else(|| parse_err(line, "complex value in a real matrix"))
}

/// Reads a coordinate or array Matrix Market stream into CSR, expanding
/// symmetric, Hermitian and skew-symmetric storage.
pub fn read_matrix_market<T: Scalar, R: BufRead>(reader: R) -> Result<CsrMatrix<T>> {
    let mut lines = reader.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let header = header?;
    let lower = header.to_ascii_lowercase();
    let toks: Vec<&str> = lower.split_whitespace().collect();
    if toks.len() != 5 || toks[0] != "%%matrixmarket" || toks[1] != "matrix" {
        return Err(parse_err(1, "bad banner"));
    }
    let coordinate = match toks[2] {
        "coordinate" => true,
        "array" => false,
        other => return Err(parse_err(1, format!("unsupported format {other}"))),
    };
    let field = match toks[3] {
        "real" | "double" => Field::Real,
        "complex" => Field::Complex,
        "integer" => Field::Integer,
        "pattern" if coordinate => Field::Pattern,
        other => return Err(parse_err(1, format!("unsupported field {other}"))),
    };
    let symmetry = match toks[4] {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "hermitian" => Symmetry::Hermitian,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        other => return Err(parse_err(1, format!("unsupported symmetry {other}"))),
    };

    let mut data = lines.filter_map(|(idx, l)| match l {
        Ok(s) => {
            let t = s.trim();
            if t.is_empty() || t.starts_with('%') {
                None
            } else {
                Some(Ok((idx + 1, t.to_string())))
            }
        }
        Err(e) => Some(Err(Error::from(e))),
    });

    let (size_line, size) = data.next().ok_or_else(|| parse_err(2, "missing size line"))??;
    let mut st = size.split_whitespace();
    let nrows = parse_usize(st.next(), size_line, "row count")?;
    let ncols = parse_usize(st.next(), size_line, "column count")?;
    if nrows > MAX_DIM || ncols > MAX_DIM {
        return Err(parse_err(size_line, "dimension too large"));
    }
    if symmetry != Symmetry::General && nrows != ncols {
        return Err(parse_err(size_line, "symmetric storage needs a square matrix"));
    }

    let mut entries: Vec<(usize, usize, T)> = Vec::new();
    let push = |i: usize, j: usize, z: Complex64, line: usize, entries: &mut Vec<(usize, usize, T)>| -> Result<()> {
        entries.push((i, j, convert::<T>(z, line)?));
        if i != j {
            match symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => entries.push((j, i, convert::<T>(z, line)?)),
                Symmetry::Hermitian => entries.push((j, i, convert::<T>(z.conj(), line)?)),
                Symmetry::SkewSymmetric => entries.push((j, i, convert::<T>(-z, line)?)),
            }
        } else if symmetry == Symmetry::Hermitian && z.im != 0.0 {
            return Err(parse_err(line, "non-real diagonal in Hermitian matrix"));
        } else if symmetry == Symmetry::SkewSymmetric && z != Complex64::new(0.0, 0.0) {
            return Err(parse_err(line, "nonzero diagonal in skew-symmetric matrix"));
        }
        Ok(())
    };

    if coordinate {
        let nnz = parse_usize(st.next(), size_line, "entry count")?;
        if st.next().is_some() {
            return Err(parse_err(size_line, "trailing tokens on size line"));
        }
        entries.reserve(nnz.min(1 << 20));
        for _ in 0..nnz {
            let (line, text) = data.next().ok_or_else(|| parse_err(size_line, "fewer entries than declared"))??;
            let mut t = text.split_whitespace();
            let i = parse_usize(t.next(), line, "row index")?;
            let j = parse_usize(t.next(), line, "column index")?;
            if i == 0 || j == 0 || i > nrows || j > ncols {
                return Err(parse_err(line, "index out of range"));
            }
            let z = parse_value(&mut t, field, line)?;
            if t.next().is_some() {
                return Err(parse_err(line, "trailing tokens"));
            }
            if symmetry != Symmetry::General && j > i {
                return Err(parse_err(line, "entry above the diagonal in symmetric storage"));
            }
            push(i - 1, j - 1, z, line, &mut entries)?;
        }
    } else {
        if st.next().is_some() {
            return Err(parse_err(size_line, "trailing tokens on size line"));
        }
        for j in 0..ncols {
            let first = if symmetry == Symmetry::General { 0 } else { j };
            for i in first..nrows {
                let (line, text) = data.next().ok_or_else(|| parse_err(size_line, "fewer values than declared"))??;
                let mut t = text.split_whitespace();
                let z = parse_value(&mut t, field, line)?;
                if t.next().is_some() {
                    return Err(parse_err(line, "trailing tokens"));
                }
                if z != Complex64::new(0.0, 0.0) {
                    push(i, j, z, line, &mut entries)?;
                }
            }
        }
    }
    if let Some(extra) = data.next() {
        let (line, _) = extra?;
        return Err(parse_err(line, "more entries than declared"));
    }
    Ok(CsrMatrix::from_triplets(nrows, ncols, entries))
}

pub fn parse_matrix_market<T: Scalar>(text: &str) -> Result<CsrMatrix<T>> {
    read_matrix_market(text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_roundtrip_is_exact() {
        let a = CsrMatrix::from_triplets(
            3,
            3,
            vec![(0, 0, 2.0), (1, 0, -1.0 / 3.0), (0, 1, -1.0 / 3.0), (2, 2, std::f64::consts::PI)],
        );
        let mut buf = Vec::new();
        write_hermitian(&mut buf, &a).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("%%MatrixMarket matrix coordinate real symmetric"));
        let b: CsrMatrix<f64> = parse_matrix_market(&text).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn hermitian_roundtrip_is_exact() {
        let i = Complex64::new(0.1, 1.0 / 7.0);
        let a = CsrMatrix::from_triplets(
            2,
            2,
            vec![(0, 0, Complex64::new(1.0, 0.0)), (1, 0, i), (0, 1, i.conj()), (1, 1, Complex64::new(2.0, 0.0))],
        );
        let mut buf = Vec::new();
        write_hermitian(&mut buf, &a).unwrap();
        let b: CsrMatrix<Complex64> = read_matrix_market(buf.as_slice()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn general_pattern_and_array() {
        let text = "%%MatrixMarket matrix coordinate pattern general\n% c\n2 3 2\n1 3\n2 1\n";
        let m: CsrMatrix<f64> = parse_matrix_market(text).unwrap();
        assert_eq!(m.get(0, 2), 1.0);
        assert_eq!(m.get(1, 0), 1.0);
        let arr = "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n";
        let m: CsrMatrix<f64> = parse_matrix_market(arr).unwrap();
        assert_eq!(m.get(1, 0), 2.0);
        assert_eq!(m.get(0, 1), 3.0);
    }

    #[test]
    fn rejects_malformed() {
        for bad in [
            "",
            "%%MatrixMarket matrix coordinate real general\n",
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n",
            "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n",
            "%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n1 2 1.0\n",
            "%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1.0\n",
        ] {
            assert!(parse_matrix_market::<f64>(bad).is_err(), "{bad:?}");
        }
        let cx = "%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1.0 2.0\n";
        assert!(parse_matrix_market::<f64>(cx).is_err());
        assert!(parse_matrix_market::<Complex64>(cx).is_ok());
    }

    #[test]
    fn dense_array_writer() {
        let m = Mat::from_fn(2, 2, |i, j| (i + 2 * j) as f64);
        let mut buf = Vec::new();
        write_dense(&mut buf, &m).unwrap();
        let back: CsrMatrix<f64> = read_matrix_market(buf.as_slice()).unwrap();
        assert_eq!(back.to_dense(), m);
    }
}
