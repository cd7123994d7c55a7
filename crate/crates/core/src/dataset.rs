//! Sequence datasets and the plain-text dataset file format.
//!
//! A dataset holds `N` cases. Each case is a history of `O` discrete states
//! (codes `1..=K_t` per position) followed by a response class (`1..=K`).
//! State code `0` is reserved for the pattern wildcard and never appears in
//! data.
//!
//! File format: one case per line, `O+1` space-separated positive integers
//! (history left to right, then the response). An optional header line
//! `# O=<int> K=<int>` declares the history length and response cardinality;
//! other `#` lines are comments. Case indices are 1-based in files and
//! reports, 0-based internally.

use crate::error::{Result, SeqError};
use std::fmt::Write as _;
use std::path::Path;

/// Immutable training or test data for a sequence prediction model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceDataset {
    /// Row-major `N x O` matrix of state codes, each in `1..=k_t[t]`.
    histories: Vec<u32>,
    /// Response class per case, in `1..=k`.
    responses: Vec<u32>,
    order: usize,
    k: u32,
    /// Per-position state cardinalities.
    k_t: Vec<u32>,
}

impl SequenceDataset {
    /// Builds a dataset from per-case rows of `order + 1` codes
    /// (history then response).
    ///
    /// Cardinalities are inferred as the maximum observed code per position
    /// unless `declared_k` pins the response cardinality (a file header or a
    /// training-set value that the test set must share).
    pub fn from_rows(rows: &[Vec<u32>], order: usize, declared_k: Option<u32>) -> Result<Self> {
        if order == 0 {
            return Err(SeqError::InvalidData("order must be at least 1".into()));
        }
        if rows.is_empty() {
            return Err(SeqError::InvalidData("no cases".into()));
        }
        let mut histories = Vec::with_capacity(rows.len() * order);
        let mut responses = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            if row.len() < order + 1 {
                return Err(SeqError::InvalidData(format!(
                    "case {} has {} fields, need at least {}",
                    i + 1,
                    row.len(),
                    order + 1
                )));
            }
            // Histories are the `order` states immediately preceding the
            // response, so wider rows are truncated from the left.
            let tail = &row[row.len() - (order + 1)..];
            if tail.contains(&0) {
                return Err(SeqError::InvalidData(format!(
                    "case {} contains state code 0 (codes are 1-based)",
                    i + 1
                )));
            }
            histories.extend_from_slice(&tail[..order]);
            responses.push(tail[order]);
        }
        let mut k_t = vec![0u32; order];
        for case in histories.chunks_exact(order) {
            for (t, &v) in case.iter().enumerate() {
                k_t[t] = k_t[t].max(v);
            }
        }
        let observed_k = responses.iter().copied().max().unwrap();
        let k = match declared_k {
            Some(k) => {
                if observed_k > k {
                    return Err(SeqError::InvalidData(format!(
                        "response code {observed_k} exceeds declared K={k}"
                    )));
                }
                k
            }
            None => observed_k.max(2),
        };
        if k < 2 {
            return Err(SeqError::InvalidData(
                "response cardinality must be >= 2".into(),
            ));
        }
        Ok(Self {
            histories,
            responses,
            order,
            k,
            k_t,
        })
    }

    pub fn n_cases(&self) -> usize {
        self.responses.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Response cardinality `K`.
    pub fn k(&self) -> u32 {
        self.k
    }

    /// State cardinality at history position `t` (1-based position).
    pub fn k_at(&self, position: usize) -> u32 {
        self.k_t[position - 1]
    }

    /// History of case `i` (0-based), length `O`, position 1 first.
    pub fn history(&self, i: usize) -> &[u32] {
        &self.histories[i * self.order..(i + 1) * self.order]
    }

    /// Response class of case `i` (0-based), 1-based code.
    pub fn response(&self, i: usize) -> u32 {
        self.responses[i]
    }

    pub fn responses(&self) -> &[u32] {
        &self.responses
    }

    /// Serializes to the dataset file format, with header.
    pub fn to_file_string(&self, provenance: &[String]) -> String {
        let mut out = String::new();
        for line in provenance {
            let _ = writeln!(out, "# {line}");
        }
        let _ = writeln!(out, "# O={} K={}", self.order, self.k);
        for i in 0..self.n_cases() {
            let mut first = true;
            for &v in self.history(i) {
                if !first {
                    out.push(' ');
                }
                let _ = write!(out, "{v}");
                first = false;
            }
            let _ = writeln!(out, " {}", self.response(i));
        }
        out
    }
}

/// Splits a single long state sequence into overlapping cases: case `i`
/// has history `sequence[i..i+order]` and response `sequence[i+order]`,
/// giving `len - order` cases in total.
pub fn windowize(sequence: &[u32], order: usize) -> Result<SequenceDataset> {
    if order == 0 {
        return Err(SeqError::InvalidArgument("order must be at least 1".into()));
    }
    if sequence.len() < order + 1 {
        return Err(SeqError::SequenceTooShort {
            len: sequence.len(),
            order,
        });
    }
    let rows: Vec<Vec<u32>> = (0..sequence.len() - order)
        .map(|i| sequence[i..=i + order].to_vec())
        .collect();
    SequenceDataset::from_rows(&rows, order, None)
}

/// Raw rows plus any header declarations found in a dataset file.
pub struct ParsedDataFile {
    pub rows: Vec<Vec<u32>>,
    pub header_order: Option<usize>,
    pub header_k: Option<u32>,
}

/// Parses the dataset file format from a string.
pub fn parse_data_str(content: &str, path: &str) -> Result<ParsedDataFile> {
    let mut rows = Vec::new();
    let mut header_order = None;
    let mut header_k = None;
    for (lineno, line) in content.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            for token in rest.split_whitespace() {
                if let Some(v) = token.strip_prefix("O=") {
                    header_order = v.parse::<usize>().ok();
                } else if let Some(v) = token.strip_prefix("K=") {
                    header_k = v.parse::<u32>().ok();
                }
            }
            continue;
        }
        let row: std::result::Result<Vec<u32>, _> =
            line.split_whitespace().map(|t| t.parse::<u32>()).collect();
        match row {
            Ok(r) => rows.push(r),
            Err(e) => {
                return Err(SeqError::Parse {
                    path: path.to_string(),
                    line: lineno + 1,
                    msg: e.to_string(),
                })
            }
        }
    }
    Ok(ParsedDataFile {
        rows,
        header_order,
        header_k,
    })
}

/// Reads a dataset file, taking the last `order + 1` columns of each row.
///
/// `order = None` uses the header declaration or the full row width.
pub fn read_data_file(
    path: &Path,
    order: Option<usize>,
    declared_k: Option<u32>,
) -> Result<SequenceDataset> {
    let content = std::fs::read_to_string(path)?;
    let parsed = parse_data_str(&content, &path.display().to_string())?;
    if parsed.rows.is_empty() {
        return Err(SeqError::InvalidData(format!(
            "{}: no cases",
            path.display()
        )));
    }
    let width = parsed.rows.iter().map(|r| r.len()).min().unwrap();
    let order = match order.or(parsed.header_order) {
        Some(o) => {
            if o + 1 > width {
                return Err(SeqError::InvalidData(format!(
                    "order {o} exceeds available history length {} in {}",
                    width - 1,
                    path.display()
                )));
            }
            o
        }
        None => width - 1,
    };
    SequenceDataset::from_rows(&parsed.rows, order, declared_k.or(parsed.header_k))
}
