//! Outcome-count transcripts of a protocol run and their line-oriented
//! text serialization.
//!
//! Format: header lines `#dims`, `#n`, `#seed`, `#drift`, then one line per
//! nonzero count, `aliceBasis bobBasis aliceOutcome bobOutcome count`.
//! Qubit bases are written as X/Y/Z, qutrit bases as MUB indices 1..4.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::Pauli;

/// Per-basis-pair outcome counts from a Monte-Carlo run. Basis and outcome
/// indices are zero-based internally; serialization uses the protocol-facing
/// labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    dims: (usize, usize),
    n_signals: u64,
    seed: u64,
    drift: String,
    counts: BTreeMap<(u8, u8, u8, u8), u64>,
}

impl Transcript {
    pub fn new(dims: (usize, usize), seed: u64, drift: impl Into<String>) -> Self {
        Self {
            dims,
            n_signals: 0,
            seed,
            drift: drift.into(),
            counts: BTreeMap::new(),
        }
    }

    /// Number of distinct measurement bases per party (3 for qubits,
    /// 4 for qutrits).
    pub fn n_bases(&self) -> usize {
        match self.dims.0 {
            2 => 3,
            d => d + 1,
        }
    }

    pub fn record(&mut self, alice_basis: u8, bob_basis: u8, alice_out: u8, bob_out: u8) {
        debug_assert!((alice_basis as usize) < self.n_bases());
        debug_assert!((bob_basis as usize) < self.n_bases());
        debug_assert!((alice_out as usize) < self.dims.0);
        debug_assert!((bob_out as usize) < self.dims.1);
        *self
            .counts
            .entry((alice_basis, bob_basis, alice_out, bob_out))
            .or_insert(0) += 1;
        self.n_signals += 1;
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn n_signals(&self) -> u64 {
        self.n_signals
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn drift_spec(&self) -> &str {
        &self.drift
    }

    pub fn count(&self, alice_basis: u8, bob_basis: u8, alice_out: u8, bob_out: u8) -> u64 {
        self.counts
            .get(&(alice_basis, bob_basis, alice_out, bob_out))
            .copied()
            .unwrap_or(0)
    }

    /// Total number of signals measured in the given basis pair.
    pub fn pair_total(&self, alice_basis: u8, bob_basis: u8) -> u64 {
        let (da, db) = self.dims;
        let mut total = 0;
        for ja in 0..da as u8 {
            for jb in 0..db as u8 {
                total += self.count(alice_basis, bob_basis, ja, jb);
            }
        }
        total
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(u8, u8, u8, u8), &u64)> {
        self.counts.iter()
    }

    fn basis_token(&self, basis: u8) -> String {
        if self.dims.0 == 2 {
            Pauli::ALL[basis as usize].label().to_string()
        } else {
            (basis + 1).to_string()
        }
    }

    fn parse_basis_token(dims: (usize, usize), token: &str, line: usize) -> Result<u8> {
        if dims.0 == 2 {
            Pauli::from_label(token)
                .map(|p| p.index() as u8)
                .ok_or_else(|| Error::TranscriptParse {
                    line,
                    reason: format!("unknown qubit basis `{token}`"),
                })
        } else {
            let idx: usize = token.parse().map_err(|_| Error::TranscriptParse {
                line,
                reason: format!("bad basis index `{token}`"),
            })?;
            if idx == 0 || idx > dims.0 + 1 {
                return Err(Error::TranscriptParse {
                    line,
                    reason: format!("basis index {idx} out of range"),
                });
            }
            Ok((idx - 1) as u8)
        }
    }

    /// Serializes to the line-oriented text format. Counts appear in sorted
    /// key order, so equal transcripts produce byte-identical text.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "#dims {} {}", self.dims.0, self.dims.1).unwrap();
        writeln!(out, "#n {}", self.n_signals).unwrap();
        writeln!(out, "#seed {}", self.seed).unwrap();
        writeln!(out, "#drift {}", self.drift).unwrap();
        for (&(a, b, ja, jb), &count) in &self.counts {
            writeln!(
                out,
                "{} {} {} {} {}",
                self.basis_token(a),
                self.basis_token(b),
                ja,
                jb,
                count
            )
            .unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut dims: Option<(usize, usize)> = None;
        let mut n: Option<u64> = None;
        let mut seed: Option<u64> = None;
        let mut drift: Option<String> = None;
        let mut counts = BTreeMap::new();

        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix('#') {
                let mut parts = rest.split_whitespace();
                match parts.next() {
                    Some("dims") => {
                        let da = Self::parse_header_num(parts.next(), line)?;
                        let db = Self::parse_header_num(parts.next(), line)?;
                        dims = Some((da as usize, db as usize));
                    }
                    Some("n") => n = Some(Self::parse_header_num(parts.next(), line)?),
                    Some("seed") => seed = Some(Self::parse_header_num(parts.next(), line)?),
                    Some("drift") => {
                        drift = Some(parts.collect::<Vec<_>>().join(" "));
                    }
                    other => {
                        return Err(Error::TranscriptParse {
                            line,
                            reason: format!("unknown header {other:?}"),
                        })
                    }
                }
                continue;
            }

            let d = dims.ok_or(Error::TranscriptParse {
                line,
                reason: "count line before #dims header".into(),
            })?;
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            if fields.len() != 5 {
                return Err(Error::TranscriptParse {
                    line,
                    reason: format!("expected 5 fields, got {}", fields.len()),
                });
            }
            let a = Self::parse_basis_token(d, fields[0], line)?;
            let b = Self::parse_basis_token(d, fields[1], line)?;
            let ja: u8 = fields[2].parse().map_err(|_| Error::TranscriptParse {
                line,
                reason: format!("bad outcome `{}`", fields[2]),
            })?;
            let jb: u8 = fields[3].parse().map_err(|_| Error::TranscriptParse {
                line,
                reason: format!("bad outcome `{}`", fields[3]),
            })?;
            if ja as usize >= d.0 || jb as usize >= d.1 {
                return Err(Error::TranscriptParse {
                    line,
                    reason: format!("outcome ({ja}, {jb}) out of range for dims {d:?}"),
                });
            }
            let count: u64 = fields[4].parse().map_err(|_| Error::TranscriptParse {
                line,
                reason: format!("bad count `{}`", fields[4]),
            })?;
            *counts.entry((a, b, ja, jb)).or_insert(0) += count;
        }

        let dims = dims.ok_or(Error::TranscriptParse {
            line: 0,
            reason: "missing #dims header".into(),
        })?;
        let n = n.ok_or(Error::TranscriptParse {
            line: 0,
            reason: "missing #n header".into(),
        })?;
        let total: u64 = counts.values().sum();
        if total != n {
            return Err(Error::TranscriptParse {
                line: 0,
                reason: format!("counts sum to {total} but #n says {n}"),
            });
        }
        Ok(Self {
            dims,
            n_signals: n,
            seed: seed.unwrap_or(0),
            drift: drift.unwrap_or_default(),
            counts,
        })
    }

    fn parse_header_num(field: Option<&str>, line: usize) -> Result<u64> {
        field
            .and_then(|f| f.parse().ok())
            .ok_or(Error::TranscriptParse {
                line,
                reason: "bad or missing header number".into(),
            })
    }
}
