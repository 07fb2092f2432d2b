//! Plain-text checkpoints of policy parameters and optimizer state.
//!
//! Line 1 is a JSON header with the schema version and dimensions, line 2 the
//! optimizer settings and step count. Each following line is a JSON array
//! `[section, name, value]` for one non-zero entry, where `section` is
//! `theta`, `m` or `v` and `name` identifies the weight, such as
//! `problem:12:3:5` or `constraint:parity:1`. Entries are written in flat
//! parameter order, so identical state gives byte-identical files.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grpo::{AdamWConfig, OptimizerState};
use crate::policy::{ParamIndex, PolicyParams, PolicyShape};
use crate::problem::Granularity;

pub const CHECKPOINT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    schema: u32,
    alphabet: usize,
    length: usize,
    problems: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OptimizerLine {
    optimizer: AdamWConfig,
    step: u64,
}

fn granularity_name(g: Granularity) -> &'static str {
    match g {
        Granularity::Parity => "parity",
        Granularity::Quartile => "quartile",
        Granularity::Exact => "exact",
    }
}

fn index_name(index: ParamIndex) -> String {
    match index {
        ParamIndex::Global { position, token } => format!("global:{position}:{token}"),
        ParamIndex::Problem {
            problem,
            position,
            token,
        } => format!("problem:{problem}:{position}:{token}"),
        ParamIndex::Constraint {
            granularity,
            consistent,
        } => format!(
            "constraint:{}:{}",
            granularity_name(granularity),
            consistent as u8
        ),
    }
}

fn parse_index(name: &str, shape: &PolicyShape) -> Option<ParamIndex> {
    let parts: Vec<&str> = name.split(':').collect();
    let num = |s: &str| s.parse::<usize>().ok();
    let index = match parts.as_slice() {
        ["global", t, v] => ParamIndex::Global {
            position: num(t)?,
            token: num(v)?,
        },
        ["problem", p, t, v] => ParamIndex::Problem {
            problem: num(p)?,
            position: num(t)?,
            token: num(v)?,
        },
        ["constraint", g, c] => ParamIndex::Constraint {
            granularity: *Granularity::ALL
                .iter()
                .find(|x| granularity_name(**x) == *g)?,
            consistent: match *c {
                "0" => false,
                "1" => true,
                _ => return None,
            },
        },
        _ => return None,
    };
    let in_range = match index {
        ParamIndex::Global { position, token } => position < shape.length && token < shape.alphabet,
        ParamIndex::Problem {
            problem,
            position,
            token,
        } => problem < shape.problems && position < shape.length && token < shape.alphabet,
        ParamIndex::Constraint { .. } => true,
    };
    in_range.then_some(index)
}

pub fn write_checkpoint<W: Write>(
    params: &PolicyParams,
    optimizer: &OptimizerState,
    mut out: W,
) -> Result<()> {
    let shape = params.shape();
    let header = Header {
        schema: CHECKPOINT_SCHEMA_VERSION,
        alphabet: shape.alphabet,
        length: shape.length,
        problems: shape.problems,
    };
    let json = |e: serde_json::Error| Error::Numeric(e.to_string());
    writeln!(out, "{}", serde_json::to_string(&header).map_err(json)?)?;
    let opt = OptimizerLine {
        optimizer: optimizer.config,
        step: optimizer.step,
    };
    writeln!(out, "{}", serde_json::to_string(&opt).map_err(json)?)?;
    for (section, values) in [
        ("theta", params.values()),
        ("m", &optimizer.m),
        ("v", &optimizer.v),
    ] {
        for (flat, &value) in values.iter().enumerate() {
            if value != 0.0 {
                let name = index_name(shape.unflat(flat));
                writeln!(
                    out,
                    "{}",
                    serde_json::to_string(&(section, name, value)).map_err(json)?
                )?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

pub fn save_checkpoint(
    params: &PolicyParams,
    optimizer: &OptimizerState,
    path: impl AsRef<Path>,
) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_checkpoint(params, optimizer, std::io::BufWriter::new(file))
}

pub fn read_checkpoint<R: BufRead>(
    reader: R,
    origin: &Path,
) -> Result<(PolicyParams, OptimizerState)> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut lines = reader.lines().enumerate();
    let mut next_line = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((i, l)) => Ok((i + 1, l?)),
            None => Err(parse_err(0, format!("missing {what} line"))),
        }
    };

    let (n, text) = next_line("header")?;
    let header: Header = serde_json::from_str(&text).map_err(|e| parse_err(n, e.to_string()))?;
    if header.schema != CHECKPOINT_SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            expected: CHECKPOINT_SCHEMA_VERSION,
            found: header.schema,
        });
    }
    let shape = PolicyShape {
        alphabet: header.alphabet,
        length: header.length,
        problems: header.problems,
    };
    let (n, text) = next_line("optimizer")?;
    let opt: OptimizerLine =
        serde_json::from_str(&text).map_err(|e| parse_err(n, e.to_string()))?;

    let mut theta = vec![0.0; shape.len()];
    let mut state = OptimizerState::new(opt.optimizer, shape.len());
    state.step = opt.step;
    for (i, line) in lines {
        let n = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (section, name, value): (String, String, f64) =
            serde_json::from_str(&line).map_err(|e| parse_err(n, e.to_string()))?;
        let index = parse_index(&name, &shape)
            .ok_or_else(|| parse_err(n, format!("bad parameter name '{name}'")))?;
        let target = match section.as_str() {
            "theta" => &mut theta,
            "m" => &mut state.m,
            "v" => &mut state.v,
            other => return Err(parse_err(n, format!("unknown section '{other}'"))),
        };
        target[shape.flat(index)] = value;
    }
    Ok((PolicyParams::from_values(shape, theta)?, state))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(PolicyParams, OptimizerState)> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    read_checkpoint(BufReader::new(file), path)
}
