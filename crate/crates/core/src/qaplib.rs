//! QAPLIB text formats: instances, best-known values and solution files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};

const BUILTIN_BKV: &str = include_str!("../data/bkv.csv");

/// A QAP instance: `n` facilities, an `n x n` flow matrix and an `n x n`
/// distance matrix, both stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QapInstance {
    name: String,
    n: usize,
    flow: Vec<i64>,
    dist: Vec<i64>,
}

impl QapInstance {
    pub fn new(name: impl Into<String>, n: usize, flow: Vec<i64>, dist: Vec<i64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("instance size must be >= 2, got {n}")));
        }
        if flow.len() != n * n || dist.len() != n * n {
            return Err(Error::InvalidParameter(format!(
                "matrices must be {n}x{n}, got {} and {} entries",
                flow.len(),
                dist.len()
            )));
        }
        Ok(Self {
            name: name.into(),
            n,
            flow,
            dist,
        })
    }

    /// Builds an instance from nested rows. Mostly handy in tests.
    pub fn from_rows(name: impl Into<String>, flow: &[Vec<i64>], dist: &[Vec<i64>]) -> Result<Self> {
        let n = flow.len();
        if flow.iter().chain(dist).any(|row| row.len() != n) || dist.len() != n {
            return Err(Error::InvalidParameter("matrices are not square of equal size".into()));
        }
        Self::new(name, n, flow.concat(), dist.concat())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn a(&self, i: usize, j: usize) -> i64 {
        self.flow[i * self.n + j]
    }

    #[inline]
    pub fn b(&self, u: usize, v: usize) -> i64 {
        self.dist[u * self.n + v]
    }

    pub fn flow(&self) -> &[i64] {
        &self.flow
    }

    pub fn dist(&self) -> &[i64] {
        &self.dist
    }

    /// Serializes the instance in QAPLIB layout (size, flow, distance).
    pub fn to_qaplib(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}\n", self.n);
        for m in [&self.flow, &self.dist] {
            for row in m.chunks(self.n) {
                let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                let _ = writeln!(out, "{}", line.join(" "));
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("empty input: expected the instance size")]
    Empty,
    #[error("byte {offset}: expected an integer, found {token:?}")]
    BadToken { offset: usize, token: String },
    #[error("byte {offset}: instance size must be at least 2, got {n}")]
    TooSmall { offset: usize, n: i64 },
    #[error("byte {offset}: expected {expected} matrix entries, found {found}")]
    Count {
        offset: usize,
        expected: usize,
        found: usize,
    },
}

fn tokens(text: &str) -> impl Iterator<Item = (usize, &str)> {
    let start = text.as_ptr() as usize;
    text.split_ascii_whitespace()
        .map(move |tok| (tok.as_ptr() as usize - start, tok))
}

fn int_token(offset: usize, tok: &str) -> Result<i64, ParseError> {
    tok.parse::<i64>().map_err(|_| ParseError::BadToken {
        offset,
        token: tok.to_string(),
    })
}

/// Parses a QAPLIB `.dat` file: `n` followed by the flow matrix and then the
/// distance matrix, `2 n^2` integers in any whitespace layout.
pub fn parse_instance(name: &str, text: &str) -> Result<QapInstance, ParseError> {
    let mut toks = tokens(text);
    let (off, tok) = toks.next().ok_or(ParseError::Empty)?;
    let n = int_token(off, tok)?;
    if n < 2 {
        return Err(ParseError::TooSmall { offset: off, n });
    }
    let n = n as usize;
    let expected = 2 * n * n;
    let mut values = Vec::with_capacity(expected);
    for (off, tok) in toks {
        if values.len() == expected {
            return Err(ParseError::Count {
                offset: off,
                expected,
                found: expected + 1 + tokens(&text[off..]).skip(1).count(),
            });
        }
        values.push(int_token(off, tok)?);
    }
    if values.len() < expected {
        return Err(ParseError::Count {
            offset: text.len(),
            expected,
            found: values.len(),
        });
    }
    let dist = values.split_off(n * n);
    Ok(QapInstance {
        name: name.to_string(),
        n,
        flow: values,
        dist,
    })
}

/// Reads and parses an instance file; the instance is named after the file stem.
pub fn read_instance(path: &Path) -> Result<QapInstance> {
    let text = std::fs::read_to_string(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(parse_instance(&name, &text)?)
}

/// Best-known objective values keyed by instance name.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BkvRegistry {
    values: BTreeMap<String, i64>,
}

#[derive(Deserialize)]
struct BkvRow {
    name: String,
    bkv: i64,
}

impl BkvRegistry {
    /// The registry shipped with the crate (the 21 hard QAPLIB instances).
    pub fn builtin() -> Self {
        Self::from_csv(BUILTIN_BKV).expect("bundled BKV table is well formed")
    }

    /// Parses a `name,bkv` CSV with a header row.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reg = Self::default();
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = rdr.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "name" || &headers[1] != "bkv" {
            return Err(Error::Format(format!("BKV file must have header `name,bkv`, got {headers:?}")));
        }
        for row in rdr.deserialize() {
            let row: BkvRow = row?;
            reg.insert(row.name, row.bkv)?;
        }
        Ok(reg)
    }

    pub fn insert(&mut self, name: impl Into<String>, bkv: i64) -> Result<()> {
        if bkv <= 0 {
            return Err(Error::NonPositiveBkv(bkv));
        }
        self.values.insert(name.into(), bkv);
        Ok(())
    }

    /// Adds (or overrides) entries from another registry.
    pub fn extend(&mut self, other: BkvRegistry) {
        self.values.extend(other.values);
    }

    pub fn lookup(&self, name: &str) -> Option<i64> {
        self.values.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, i64)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

pub fn lookup_bkv(registry: &BkvRegistry, name: &str) -> Option<i64> {
    registry.lookup(name)
}

/// Contents of a solution file. `pi` is 0-indexed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionFile {
    pub name: String,
    pub n: usize,
    pub value: i64,
    pub pi: Vec<usize>,
}

/// Renders `name n value` and the 1-indexed permutation on the next line.
pub fn write_solution(name: &str, value: i64, pi: &[usize]) -> String {
    let locs: Vec<String> = pi.iter().map(|&p| (p + 1).to_string()).collect();
    format!("{} {} {}\n{}\n", name, pi.len(), value, locs.join(" "))
}

pub fn parse_solution(text: &str) -> Result<SolutionFile> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let head = lines
        .next()
        .ok_or_else(|| Error::Format("solution file is empty".into()))?;
    let fields: Vec<&str> = head.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(Error::Format(format!("bad solution header {head:?}")));
    }
    let bad = |what: &str| Error::Format(format!("bad {what} in solution header {head:?}"));
    let n: usize = fields[1].parse().map_err(|_| bad("size"))?;
    let value: i64 = fields[2].parse().map_err(|_| bad("value"))?;
    let pi = lines
        .flat_map(str::split_whitespace)
        .map(|t| match t.parse::<usize>() {
            Ok(v) if (1..=n).contains(&v) => Ok(v - 1),
            _ => Err(Error::Format(format!("bad location {t:?}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    if pi.len() != n {
        return Err(Error::Format(format!("expected {n} locations, found {}", pi.len())));
    }
    crate::qap::check_permutation(&pi)?;
    Ok(SolutionFile {
        name: fields[0].to_string(),
        n,
        value,
        pi,
    })
}
