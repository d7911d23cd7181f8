use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::ResultRow;

/// First line of every results file.
pub const CSV_SCHEMA: &str = "# schema=1";

fn write_body<W: Write>(w: W, rows: &[ResultRow], header: bool) -> Result<()> {
    let mut wr = csv::WriterBuilder::new().has_headers(header).from_writer(w);
    for r in rows {
        wr.serialize(r).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

/// Writes rows to `w` with the schema line and header.
pub fn write_csv<W: Write>(mut w: W, rows: &[ResultRow]) -> Result<()> {
    writeln!(w, "{CSV_SCHEMA}")?;
    if rows.is_empty() {
        let mut wr = csv::Writer::from_writer(&mut w);
        wr.write_record(HEADER).map_err(csv_err)?;
        wr.flush()?;
        return Ok(());
    }
    write_body(w, rows, true)
}

pub(super) const HEADER: [&str; 26] = [
    "problem",
    "model",
    "dim",
    "n",
    "m",
    "l",
    "k",
    "p",
    "omega",
    "mu1",
    "mu2",
    "Lambda",
    "variant",
    "tol",
    "tol_A",
    "seed",
    "iterations",
    "converged",
    "relres",
    "cond_est",
    "coarse_dim",
    "M",
    "sum_li",
    "rel_error",
    "setup_seconds",
    "solve_seconds",
];

/// Appends rows to a results file, creating it with the schema line and
/// header when it is missing or empty.
pub fn write_rows(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let fresh = std::fs::metadata(path).map_or(true, |m| m.len() == 0);
    if !fresh {
        let mut first = String::new();
        BufReader::new(std::fs::File::open(path)?).read_line(&mut first)?;
        if first.trim_end() != CSV_SCHEMA {
            return Err(Error::Parse {
                line: 1,
                message: format!("{} does not start with {CSV_SCHEMA}", path.display()),
            });
        }
    }
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    if fresh {
        write_csv(file, rows)
    } else {
        write_body(file, rows, false)
    }
}

/// Reads a results file written by [`write_rows`].
pub fn read_rows<R: Read>(r: R) -> Result<Vec<ResultRow>> {
    let mut reader = BufReader::new(r);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    if first.trim_end() != CSV_SCHEMA {
        return Err(Error::Parse {
            line: 1,
            message: "missing schema line".into(),
        });
    }
    let mut rd = csv::Reader::from_reader(reader);
    let header: Vec<String> = rd.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    if header != HEADER {
        return Err(Error::Parse {
            line: 2,
            message: "unexpected header".into(),
        });
    }
    rd.deserialize().map(|r| r.map_err(csv_err)).collect()
}
