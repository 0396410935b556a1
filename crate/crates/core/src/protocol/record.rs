//! Correlation records: the nine qubit correlators or the complex qutrit
//! expectation table, with optional statistical errors.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::Pauli;

/// One estimated (or exact) correlator. Exact records carry no standard
/// error; sampled records carry the binomial plug-in estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Correlator {
    /// Real value; for qutrit entries this is the real part of
    /// `complex_value` and is rarely what you want.
    pub value: f64,
    /// Full complex value (equal to `value` on the real axis for qubits).
    pub complex_value: Complex64,
    /// Standard error of the estimate; `None` for exact records.
    pub std_error: Option<f64>,
}

impl Correlator {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            complex_value: Complex64::new(value, 0.0),
            std_error: None,
        }
    }

    pub fn exact_complex(value: Complex64) -> Self {
        Self {
            value: value.re,
            complex_value: value,
            std_error: None,
        }
    }

    pub fn sampled(value: f64, std_error: f64) -> Self {
        Self {
            value,
            complex_value: Complex64::new(value, 0.0),
            std_error: Some(std_error),
        }
    }

    pub fn sampled_complex(value: Complex64, std_error: f64) -> Self {
        Self {
            value: value.re,
            complex_value: value,
            std_error: Some(std_error),
        }
    }
}

/// The 3x3 table of qubit correlators c_PQ = <P_A Q_B>, P, Q in {X, Y, Z}.
/// Cells are absent when a transcript contains no data for the pair.
#[derive(Debug, Clone, Default)]
pub struct QubitCorrelations {
    cells: [[Option<Correlator>; 3]; 3],
}

impl QubitCorrelations {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, alice: Pauli, bob: Pauli, correlator: Correlator) {
        debug_assert!(correlator.value.abs() <= 1.0 + 1e-9);
        self.cells[alice.index()][bob.index()] = Some(correlator);
    }

    pub fn get(&self, alice: Pauli, bob: Pauli) -> Option<&Correlator> {
        self.cells[alice.index()][bob.index()].as_ref()
    }

    pub fn require(&self, alice: Pauli, bob: Pauli) -> Result<&Correlator> {
        self.get(alice, bob).ok_or(Error::MissingCorrelator {
            alice: alice.label().to_string(),
            bob: bob.label().to_string(),
        })
    }
}

/// Complex qutrit expectation values e_ij keyed by signed Weyl indices
/// (Alice positive 1..4, Bob signed ±1..±4).
#[derive(Debug, Clone, Default)]
pub struct QutritCorrelations {
    cells: BTreeMap<(i8, i8), Correlator>,
}

impl QutritCorrelations {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, i: i8, j: i8, correlator: Correlator) {
        debug_assert!(correlator.complex_value.norm() <= 1.0 + 1e-9);
        self.cells.insert((i, j), correlator);
    }

    pub fn get(&self, i: i8, j: i8) -> Option<&Correlator> {
        self.cells.get(&(i, j))
    }

    pub fn require(&self, i: i8, j: i8) -> Result<&Correlator> {
        self.get(i, j).ok_or(Error::MissingCorrelator {
            alice: i.to_string(),
            bob: j.to_string(),
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(i8, i8), &Correlator)> {
        self.cells.iter()
    }
}

/// Either the qubit correlator table or the qutrit expectation table.
#[derive(Debug, Clone)]
pub enum CorrelationRecord {
    Qubit(QubitCorrelations),
    Qutrit(QutritCorrelations),
}

impl CorrelationRecord {
    pub fn as_qubit(&self) -> Result<&QubitCorrelations> {
        match self {
            CorrelationRecord::Qubit(c) => Ok(c),
            CorrelationRecord::Qutrit(_) => Err(Error::WrongRecordKind { expected: "qubit" }),
        }
    }

    pub fn as_qutrit(&self) -> Result<&QutritCorrelations> {
        match self {
            CorrelationRecord::Qutrit(c) => Ok(c),
            CorrelationRecord::Qubit(_) => Err(Error::WrongRecordKind { expected: "qutrit" }),
        }
    }
}
