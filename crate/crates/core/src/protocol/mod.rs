//! Protocol runs and estimation: random basis choices, outcome sampling
//! from the (possibly drifting, noisy) state, and estimation of the QBER
//! `Q` and the frame-invariant correlation sum `C` from exact expectations
//! or finite counts.

mod record;
mod sample;
mod transcript;

pub use record::{CorrelationRecord, Correlator, QubitCorrelations, QutritCorrelations};
pub use sample::{sample_qutrit_transcript, sample_transcript};
pub use transcript::Transcript;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{expectation, DensityMatrix, Observable, Pauli};
use crate::qutrit::omega_pow;

/// Per-party basis distribution: three probabilities (X, Y, Z) for qubits
/// or four (MUB 1..4) for qutrits. Parties choose independently, not
/// necessarily uniformly.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisChoice {
    alice: Vec<f64>,
    bob: Vec<f64>,
}

impl BasisChoice {
    pub fn new(alice: Vec<f64>, bob: Vec<f64>) -> Result<Self> {
        if alice.len() != bob.len() || !(alice.len() == 3 || alice.len() == 4) {
            return Err(Error::DimensionMismatch {
                expected: 3,
                got: alice.len().max(bob.len()),
            });
        }
        for probs in [&alice, &bob] {
            let sum: f64 = probs.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::OutOfRange {
                    name: "basis probability sum",
                    value: sum,
                    min: 1.0,
                    max: 1.0,
                });
            }
            if let Some(&bad) = probs.iter().find(|&&p| p < 0.0) {
                return Err(Error::OutOfRange {
                    name: "basis probability",
                    value: bad,
                    min: 0.0,
                    max: 1.0,
                });
            }
        }
        Ok(Self { alice, bob })
    }

    pub fn uniform_qubit() -> Self {
        let third = 1.0 / 3.0;
        Self {
            alice: vec![third; 3],
            bob: vec![third; 3],
        }
    }

    pub fn uniform_qutrit() -> Self {
        Self {
            alice: vec![0.25; 4],
            bob: vec![0.25; 4],
        }
    }

    /// Both parties always measure the given qubit bases.
    pub fn fixed_qubit(alice: Pauli, bob: Pauli) -> Self {
        let mut a = vec![0.0; 3];
        let mut b = vec![0.0; 3];
        a[alice.index()] = 1.0;
        b[bob.index()] = 1.0;
        Self { alice: a, bob: b }
    }

    pub fn n_bases(&self) -> usize {
        self.alice.len()
    }

    /// Draws (alice, bob) basis indices; alice first, from the same stream.
    pub(crate) fn draw(&self, rng: &mut impl Rng) -> (usize, usize) {
        (pick(&self.alice, rng), pick(&self.bob, rng))
    }
}

fn pick(probs: &[f64], rng: &mut impl Rng) -> usize {
    let mut u: f64 = rng.gen();
    for (idx, &p) in probs.iter().enumerate() {
        u -= p;
        if u <= 0.0 {
            return idx;
        }
    }
    probs.len() - 1
}

/// Exact correlators of a two-qubit or two-qutrit state, computed by trace.
pub fn exact_correlations(rho: &DensityMatrix) -> Result<CorrelationRecord> {
    match rho.dims() {
        (2, 2) => {
            let mut cells = QubitCorrelations::new();
            for a in Pauli::ALL {
                for b in Pauli::ALL {
                    let obs = Observable::joint_pauli(a, b);
                    cells.set(a, b, Correlator::exact(expectation(rho, &obs)?));
                }
            }
            Ok(CorrelationRecord::Qubit(cells))
        }
        (3, 3) => crate::qutrit::expectation_table(rho),
        _ => Err(Error::DimensionMismatch {
            expected: 4,
            got: rho.matrix().dim(),
        }),
    }
}

/// Basis pairs that the Q and C estimators need, in the order missing data
/// is reported.
const REQUIRED_QUBIT_PAIRS: [(Pauli, Pauli); 5] = [
    (Pauli::X, Pauli::X),
    (Pauli::X, Pauli::Y),
    (Pauli::Y, Pauli::X),
    (Pauli::Y, Pauli::Y),
    (Pauli::Z, Pauli::Z),
];

/// Estimates correlators from finite counts, with binomial plug-in standard
/// errors. Fails with an explicit insufficient-data error naming the first
/// basis pair that the Q/C estimators need but the transcript lacks.
pub fn estimate_correlations(t: &Transcript) -> Result<CorrelationRecord> {
    match t.dims() {
        (2, 2) => estimate_qubit(t),
        (3, 3) => estimate_qutrit(t),
        _ => Err(Error::DimensionMismatch {
            expected: 4,
            got: t.dims().0 * t.dims().1,
        }),
    }
}

fn estimate_qubit(t: &Transcript) -> Result<CorrelationRecord> {
    for (a, b) in REQUIRED_QUBIT_PAIRS {
        if t.pair_total(a.index() as u8, b.index() as u8) == 0 {
            return Err(Error::InsufficientData {
                alice: a.label().to_string(),
                bob: b.label().to_string(),
            });
        }
    }
    let mut cells = QubitCorrelations::new();
    for a in Pauli::ALL {
        for b in Pauli::ALL {
            let (ai, bi) = (a.index() as u8, b.index() as u8);
            let total = t.pair_total(ai, bi);
            if total == 0 {
                continue;
            }
            let same = t.count(ai, bi, 0, 0) + t.count(ai, bi, 1, 1);
            let diff = total - same;
            let c = (same as f64 - diff as f64) / total as f64;
            let se = ((1.0 - c * c).max(0.0) / total as f64).sqrt();
            cells.set(a, b, Correlator::sampled(c, se));
        }
    }
    Ok(CorrelationRecord::Qubit(cells))
}

fn estimate_qutrit(t: &Transcript) -> Result<CorrelationRecord> {
    // C_3 needs every pair of non-computational bases (MUB indices 2..4).
    for a in 1..4u8 {
        for b in 1..4u8 {
            if t.pair_total(a, b) == 0 {
                return Err(Error::InsufficientData {
                    alice: (a + 1).to_string(),
                    bob: (b + 1).to_string(),
                });
            }
        }
    }
    let mut cells = QutritCorrelations::new();
    for a in 0..4u8 {
        for b in 0..4u8 {
            let total = t.pair_total(a, b);
            if total == 0 {
                continue;
            }
            // Outcome k in MUB basis m corresponds to eigenvalue omega^k of
            // tau_m, so the plug-in estimators are empirical characteristic
            // sums of the outcome labels.
            let mut e_pos = Complex64::new(0.0, 0.0);
            let mut e_neg = Complex64::new(0.0, 0.0);
            for ja in 0..3u8 {
                for jb in 0..3u8 {
                    let w = t.count(a, b, ja, jb) as f64;
                    if w == 0.0 {
                        continue;
                    }
                    e_pos += omega_pow(i32::from(ja) + i32::from(jb)) * w;
                    e_neg += omega_pow(i32::from(ja) - i32::from(jb)) * w;
                }
            }
            e_pos /= total as f64;
            e_neg /= total as f64;
            let (i, j) = (a as i8 + 1, b as i8 + 1);
            let se_pos = ((1.0 - e_pos.norm_sqr()).max(0.0) / total as f64).sqrt();
            let se_neg = ((1.0 - e_neg.norm_sqr()).max(0.0) / total as f64).sqrt();
            cells.set(i, j, Correlator::sampled_complex(e_pos, se_pos));
            cells.set(i, -j, Correlator::sampled_complex(e_neg, se_neg));
        }
    }
    Ok(CorrelationRecord::Qutrit(cells))
}

/// The QBER Q = (1 - <Z_A Z_B>)/2.
pub fn qber(record: &CorrelationRecord) -> Result<f64> {
    Ok(qber_estimate(record)?.value)
}

/// Q with its propagated standard error.
pub fn qber_estimate(record: &CorrelationRecord) -> Result<Correlator> {
    let cells = record.as_qubit()?;
    let zz = cells.require(Pauli::Z, Pauli::Z)?;
    let value = (1.0 - zz.value) / 2.0;
    Ok(Correlator {
        value,
        complex_value: Complex64::new(value, 0.0),
        std_error: zz.std_error.map(|e| e / 2.0),
    })
}

/// Correlator pairs entering C.
const C_PAIRS: [(Pauli, Pauli); 4] = [
    (Pauli::X, Pauli::X),
    (Pauli::X, Pauli::Y),
    (Pauli::Y, Pauli::X),
    (Pauli::Y, Pauli::Y),
];

/// The frame-invariant correlation sum
/// C = <X_A X_B>^2 + <X_A Y_B>^2 + <Y_A X_B>^2 + <Y_A Y_B>^2.
pub fn frame_invariant_c(record: &CorrelationRecord) -> Result<f64> {
    Ok(frame_invariant_c_estimate(record)?.value)
}

/// C with its propagated standard error.
pub fn frame_invariant_c_estimate(record: &CorrelationRecord) -> Result<Correlator> {
    let cells = record.as_qubit()?;
    let mut sum = 0.0;
    let mut var = 0.0;
    let mut any_error = false;
    for (a, b) in C_PAIRS {
        let cell = cells.require(a, b)?;
        sum += cell.value * cell.value;
        if let Some(se) = cell.std_error {
            any_error = true;
            var += (2.0 * cell.value * se).powi(2);
        }
    }
    Ok(Correlator {
        value: sum,
        complex_value: Complex64::new(sum, 0.0),
        std_error: if any_error { Some(var.sqrt()) } else { None },
    })
}
