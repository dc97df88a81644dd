//! Set corpora: one set literal per line, `#` comments and blank lines ignored.
//!
//! Group sets use the usual literal (`p=13: 0,1,3`, `G=4x4: (0,0),(1,2)`);
//! integer sets are written `Z: 0,1,3`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::group::{parse_set_literal, GSet};

#[derive(Clone, Debug, PartialEq)]
pub enum CorpusEntry {
    Set { line: usize, set: GSet },
    Ints { line: usize, values: Vec<i64> },
}

impl CorpusEntry {
    pub fn line(&self) -> usize {
        match self {
            CorpusEntry::Set { line, .. } | CorpusEntry::Ints { line, .. } => *line,
        }
    }
}

fn parse_ints(body: &str) -> std::result::Result<Vec<i64>, String> {
    let mut v = body
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<i64>().map_err(|_| format!("not an integer: `{t}`")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if v.is_empty() {
        return Err("integer set is empty".into());
    }
    v.sort_unstable();
    v.dedup();
    Ok(v)
}

pub fn parse_corpus(text: &str) -> Result<Vec<CorpusEntry>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if let Some(body) = t.strip_prefix("Z:") {
            let values = parse_ints(body).map_err(|m| Error::parse_at(line, m))?;
            out.push(CorpusEntry::Ints { line, values });
        } else {
            let set = parse_set_literal(t).map_err(|e| Error::parse_at(line, e.to_string()))?;
            out.push(CorpusEntry::Set { line, set });
        }
    }
    Ok(out)
}

pub fn ingest_corpus(path: impl AsRef<Path>) -> Result<Vec<CorpusEntry>> {
    parse_corpus(&std::fs::read_to_string(path)?)
}
