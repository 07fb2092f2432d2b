//! Line-delimited bank files.
//!
//! ```text
//! {"schema":1,"seed":3,"count":2}
//! {"id":0,"A":8,"L":4,"answer":[5,0,7,2],"beta":2.75}
//! {"id":1,"A":8,"L":4,"answer":[1,1,3,6],"beta":0.0}
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{Problem, ProblemBank, BANK_SCHEMA_VERSION};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    schema: u32,
    seed: u64,
    count: usize,
}

pub fn write_bank<W: Write>(bank: &ProblemBank, mut out: W) -> Result<()> {
    let header = Header {
        schema: bank.schema_version,
        seed: bank.bank_seed,
        count: bank.len(),
    };
    serde_json::to_writer(&mut out, &header).map_err(std::io::Error::from)?;
    out.write_all(b"\n")?;
    for p in &bank.problems {
        serde_json::to_writer(&mut out, p).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_bank(bank: &ProblemBank, path: impl AsRef<Path>) -> Result<()> {
    write_bank(bank, BufWriter::new(File::create(path)?))
}

pub fn load_bank(path: impl AsRef<Path>) -> Result<ProblemBank> {
    let path = path.as_ref();
    read_bank(BufReader::new(File::open(path)?), path)
}

/// Reads a bank; `origin` only labels error messages.
pub fn read_bank<R: BufRead>(reader: R, origin: &Path) -> Result<ProblemBank> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut lines = reader.lines().enumerate();

    let (_, first) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file, expected header".into()))?;
    let header: Header =
        serde_json::from_str(&first?).map_err(|e| parse_err(1, format!("bad header: {e}")))?;
    if header.schema != BANK_SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            expected: BANK_SCHEMA_VERSION,
            found: header.schema,
        });
    }

    let mut problems = Vec::with_capacity(header.count);
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let problem: Problem = serde_json::from_str(&line)
            .map_err(|e| parse_err(line_no, format!("bad record: {e}")))?;
        let invalid = |message: String| Error::Validation {
            path: origin.to_path_buf(),
            line: line_no,
            message,
        };
        problem.validate().map_err(invalid)?;
        if problem.id != problems.len() {
            return Err(invalid(format!(
                "expected id {}, found {}",
                problems.len(),
                problem.id
            )));
        }
        problems.push(problem);
    }
    if problems.len() != header.count {
        return Err(parse_err(
            problems.len() + 2,
            format!(
                "truncated bank: header declares {} problems, found {}",
                header.count,
                problems.len()
            ),
        ));
    }
    ProblemBank::new(problems, header.seed)
}
