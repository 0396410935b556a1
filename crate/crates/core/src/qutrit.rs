//! The d = 3 generalization of the protocol: Weyl clock/shift operators,
//! the four mutually unbiased bases they generate, the maximally entangled
//! qutrit pair, complex expectation tables e_ij, and the phase-invariant
//! correlation sum C_3.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{expectation_complex, tensor_product, ComplexMatrix, DensityMatrix};
use crate::protocol::{CorrelationRecord, Correlator, QutritCorrelations};

/// Primitive third root of unity, omega = e^{2 pi i / 3}.
pub fn omega() -> Complex64 {
    omega_pow(1)
}

/// omega^k for any signed power.
pub fn omega_pow(k: i32) -> Complex64 {
    Complex64::from_polar(
        1.0,
        2.0 * std::f64::consts::PI * f64::from(k.rem_euclid(3)) / 3.0,
    )
}

/// The clock operator Z_3 = diag(1, omega, omega^2).
pub fn clock() -> ComplexMatrix {
    ComplexMatrix::diagonal(&[Complex64::new(1.0, 0.0), omega_pow(1), omega_pow(2)])
}

/// The shift operator X_3 mapping |k> to |k+1 mod 3>.
pub fn shift() -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(3);
    for k in 0..3 {
        m.set((k + 1) % 3, k, Complex64::new(1.0, 0.0));
    }
    m
}

/// The eight Weyl operators indexed by {±1, ±2, ±3, ±4}: tau_1 = Z_3
/// (computational), tau_2 = X_3, tau_3 = X_3 Z_3, tau_4 = X_3 Z_3^2, and
/// tau_{-k} = tau_k^dagger (same eigenvectors, two eigenvalues swapped).
#[derive(Debug, Clone)]
pub struct WeylSet {
    positive: [ComplexMatrix; 4],
}

impl WeylSet {
    pub fn new() -> Self {
        let z = clock();
        let x = shift();
        let xz = x.matmul(&z);
        let xzz = x.matmul(&z).matmul(&z);
        Self {
            positive: [z, x, xz, xzz],
        }
    }

    /// Builds a set with the non-computational generators relabeled by a
    /// permutation of {2, 3, 4}; C_3 is invariant under any such relabeling.
    pub fn with_permutation(perm: [usize; 3]) -> Self {
        let base = Self::new();
        let mut positive = base.positive.clone();
        for (slot, &src) in perm.iter().enumerate() {
            assert!((2..=4).contains(&src), "permutation must map {{2,3,4}}");
            positive[slot + 1] = base.positive[src - 1].clone();
        }
        Self { positive }
    }

    /// The operator for a signed index in {±1, ±2, ±3, ±4}.
    pub fn op(&self, index: i8) -> ComplexMatrix {
        assert!(
            (1..=4).contains(&index.unsigned_abs()),
            "Weyl index out of range"
        );
        let base = &self.positive[(index.unsigned_abs() - 1) as usize];
        if index > 0 {
            base.clone()
        } else {
            base.adjoint()
        }
    }
}

impl Default for WeylSet {
    fn default() -> Self {
        Self::new()
    }
}

/// The four mutually unbiased bases of the qutrit, as unitaries whose k-th
/// column is the eigenvector of tau_b with eigenvalue omega^k.
#[derive(Debug, Clone)]
pub struct MubFamily {
    bases: [ComplexMatrix; 4],
}

impl MubFamily {
    pub fn new() -> Self {
        let s = 1.0 / 3.0_f64.sqrt();
        // Eigenbasis of the shift operator: column k = (1, w^-k, w^-2k)/sqrt(3).
        let mut fourier = ComplexMatrix::zeros(3);
        for k in 0..3i32 {
            for j in 0..3i32 {
                fourier.set(j as usize, k as usize, omega_pow(-j * k) * s);
            }
        }
        // Eigenbases of X Z and X Z^2 differ by a diagonal phase on mode 2.
        let d3 = ComplexMatrix::diagonal(&[
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            omega_pow(1),
        ]);
        let d4 = ComplexMatrix::diagonal(&[
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            omega_pow(2),
        ]);
        Self {
            bases: [
                ComplexMatrix::identity(3),
                fourier.clone(),
                d3.matmul(&fourier),
                d4.matmul(&fourier),
            ],
        }
    }

    /// Basis for MUB index 1..=4 (1 = computational).
    pub fn basis(&self, index: usize) -> &ComplexMatrix {
        assert!((1..=4).contains(&index), "MUB index out of range");
        &self.bases[index - 1]
    }

    /// Rank-1 projector onto outcome `k` (eigenvalue omega^k) of basis `index`.
    pub fn projector(&self, index: usize, k: usize) -> ComplexMatrix {
        ComplexMatrix::outer(&self.basis(index).column(k))
    }
}

impl Default for MubFamily {
    fn default() -> Self {
        Self::new()
    }
}

/// The maximally entangled qutrit pair (|00> + |11> + |22>)/sqrt(3).
pub fn qutrit_bell() -> DensityMatrix {
    let mut amps = vec![Complex64::new(0.0, 0.0); 9];
    let a = 1.0 / 3.0_f64.sqrt();
    for k in 0..3 {
        amps[k * 3 + k] = Complex64::new(a, 0.0);
    }
    DensityMatrix::from_pure((3, 3), &amps).expect("qutrit Bell state is valid")
}

/// Isotropic mixture p * Bell + (1 - p) * I/9.
pub fn isotropic_state(p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange {
            name: "p",
            value: p,
            min: 0.0,
            max: 1.0,
        });
    }
    let bell = qutrit_bell();
    let m = bell
        .matrix()
        .scale_re(p)
        .add(&ComplexMatrix::identity(9).scale_re((1.0 - p) / 9.0));
    DensityMatrix::new((3, 3), m)
}

/// Diagonal phase drift diag(1, e^{i phi1}, e^{i phi2}) on Bob's qutrit;
/// the computational-basis statistics and C_3 are impervious to it.
pub fn phase_drift_unitary(phi1: f64, phi2: f64) -> ComplexMatrix {
    ComplexMatrix::diagonal(&[
        Complex64::new(1.0, 0.0),
        Complex64::from_polar(1.0, phi1),
        Complex64::from_polar(1.0, phi2),
    ])
}

/// Applies the phase drift to Bob's subsystem by conjugation.
pub fn rotate_bob_phases(rho: &DensityMatrix, phi1: f64, phi2: f64) -> DensityMatrix {
    let u = phase_drift_unitary(phi1, phi2);
    let full = tensor_product(&ComplexMatrix::identity(3), &u);
    DensityMatrix::new(rho.dims(), rho.matrix().conjugate_by(&full))
        .expect("unitary conjugation preserves state validity")
}

/// How the relative computational-basis phases behave during a qutrit run.
///
/// `C_3` is invariant under phases that are fixed during the run, however
/// unknown; phases that change from signal to signal smear the estimated
/// expectation table, just as a varying beta smears the qubit correlators.
#[derive(Debug, Clone, PartialEq)]
pub enum PhaseDrift {
    /// No drift: both phases zero for every signal.
    None,
    /// Fixed known phases, constant over the run.
    Fixed { phi1: f64, phi2: f64 },
    /// Fixed-but-unknown phases, drawn uniformly once per run from the run
    /// seed. The protocol's operating regime: sampled C_3 matches the
    /// drift-free value within statistical error.
    RandomFixed,
    /// Fresh uniform phases for every signal; smears C_3 toward zero.
    Jitter,
}

impl fmt::Display for PhaseDrift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhaseDrift::None => write!(f, "none"),
            PhaseDrift::Fixed { phi1, phi2 } => write!(f, "fixed:{phi1}:{phi2}"),
            PhaseDrift::RandomFixed => write!(f, "random"),
            PhaseDrift::Jitter => write!(f, "jitter"),
        }
    }
}

impl FromStr for PhaseDrift {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| -> std::result::Result<f64, String> {
            t.parse::<f64>()
                .map_err(|_| format!("bad number `{t}` in phase-drift spec"))
        };
        match parts.as_slice() {
            ["none"] => Ok(PhaseDrift::None),
            ["fixed", a, b] => Ok(PhaseDrift::Fixed {
                phi1: num(a)?,
                phi2: num(b)?,
            }),
            ["random"] => Ok(PhaseDrift::RandomFixed),
            ["jitter"] => Ok(PhaseDrift::Jitter),
            _ => Err(format!(
                "unrecognized phase-drift spec `{s}` (expected none, fixed:PHI1:PHI2, random or jitter)"
            )),
        }
    }
}

/// Index ranges of the C_3 double sum.
const C3_ALICE: [i8; 3] = [2, 3, 4];
const C3_BOB: [i8; 6] = [2, 3, 4, -2, -3, -4];

/// Exact complex expectation table e_ij = Tr(tau_i ⊗ tau_j . rho) for
/// Alice indices 1..4 and signed Bob indices ±1..±4.
pub fn expectation_table(rho: &DensityMatrix) -> Result<CorrelationRecord> {
    expectation_table_with(&WeylSet::new(), rho)
}

/// Same as [`expectation_table`] but against a caller-supplied Weyl set
/// (used to check invariance of C_3 under index relabeling).
pub fn expectation_table_with(weyl: &WeylSet, rho: &DensityMatrix) -> Result<CorrelationRecord> {
    if rho.dims() != (3, 3) {
        return Err(Error::DimensionMismatch {
            expected: 9,
            got: rho.matrix().dim(),
        });
    }
    let mut table = QutritCorrelations::new();
    for i in 1..=4i8 {
        for j in [1, 2, 3, 4, -1, -2, -3, -4i8] {
            let op = tensor_product(&weyl.op(i), &weyl.op(j));
            let value = expectation_complex(rho, &op)?;
            table.set(i, j, Correlator::exact_complex(value));
        }
    }
    Ok(CorrelationRecord::Qutrit(table))
}

/// The phase-invariant correlation sum
/// C_3 = sum_{i=2..4} sum_{j=2..4} |e_ij|^2 + sum_{i=2..4} sum_{j=-2..-4} |e_ij|^2.
pub fn frame_invariant_c3(record: &CorrelationRecord) -> Result<f64> {
    Ok(frame_invariant_c3_estimate(record)?.value)
}

/// C_3 together with its propagated standard error (when the record carries
/// statistical errors).
pub fn frame_invariant_c3_estimate(record: &CorrelationRecord) -> Result<Correlator> {
    let table = match record {
        CorrelationRecord::Qutrit(t) => t,
        CorrelationRecord::Qubit(_) => return Err(Error::WrongRecordKind { expected: "qutrit" }),
    };
    let mut sum = 0.0;
    let mut var = 0.0;
    let mut any_error = false;
    for &i in &C3_ALICE {
        for &j in &C3_BOB {
            let cell = table.get(i, j).ok_or(Error::MissingCorrelator {
                alice: i.to_string(),
                bob: j.to_string(),
            })?;
            let modulus = cell.complex_value.norm();
            sum += modulus * modulus;
            if let Some(se) = cell.std_error {
                any_error = true;
                var += (2.0 * modulus * se).powi(2);
            }
        }
    }
    Ok(Correlator {
        value: sum,
        complex_value: Complex64::new(sum, 0.0),
        std_error: if any_error { Some(var.sqrt()) } else { None },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DEFAULT_TOL;

    #[test]
    fn weyl_operators_are_unitary_traceless_order_three() {
        let weyl = WeylSet::new();
        for k in [1, 2, 3, 4, -1, -2, -3, -4i8] {
            let t = weyl.op(k);
            assert!(t.is_unitary(DEFAULT_TOL), "tau_{k} not unitary");
            assert!(t.trace().norm() < DEFAULT_TOL, "tau_{k} not traceless");
            let cube = t.matmul(&t).matmul(&t);
            assert!(
                cube.approx_eq(&ComplexMatrix::identity(3), 1e-12),
                "tau_{k}^3 != I"
            );
        }
    }

    #[test]
    fn negative_indices_are_conjugate_transpose_twins() {
        let weyl = WeylSet::new();
        let mubs = MubFamily::new();
        for k in 1..=4i8 {
            assert!(weyl.op(-k).approx_eq(&weyl.op(k).adjoint(), 0.0));
            // Same eigenvectors, eigenvalues conjugated (two of three permuted).
            for col in 0..3 {
                let v = mubs.basis(k as usize).column(col);
                let tv = weyl.op(-k).apply(&v);
                let lambda = omega_pow(-(col as i32));
                for i in 0..3 {
                    assert!((tv[i] - v[i] * lambda).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn mub_columns_are_eigenvectors_with_sorted_eigenvalues() {
        let weyl = WeylSet::new();
        let mubs = MubFamily::new();
        for b in 1..=4 {
            let basis = mubs.basis(b);
            assert!(basis.is_unitary(DEFAULT_TOL));
            for k in 0..3 {
                let v = basis.column(k);
                let tv = weyl.op(b as i8).apply(&v);
                let lambda = omega_pow(k as i32);
                for i in 0..3 {
                    assert!(
                        (tv[i] - v[i] * lambda).norm() < 1e-12,
                        "basis {b} column {k} is not the omega^{k} eigenvector"
                    );
                }
            }
        }
    }

    #[test]
    fn mub_family_is_mutually_unbiased() {
        let mubs = MubFamily::new();
        for a in 1..=4 {
            for b in 1..=4 {
                if a == b {
                    continue;
                }
                for i in 0..3 {
                    for j in 0..3 {
                        let u = mubs.basis(a).column(i);
                        let v = mubs.basis(b).column(j);
                        let overlap: Complex64 = u.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                        assert!(
                            (overlap.norm_sqr() - 1.0 / 3.0).abs() < 1e-12,
                            "bases {a},{b} overlap {}",
                            overlap.norm_sqr()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn qutrit_bell_is_pure_and_computationally_correlated() {
        let rho = qutrit_bell();
        assert!((rho.matrix().trace().re - 1.0).abs() < DEFAULT_TOL);
        assert!((rho.purity() - 1.0).abs() < DEFAULT_TOL);
        // Only 00, 11, 22 carry probability, each 1/3.
        for a in 0..3 {
            for b in 0..3 {
                let p = rho.matrix().get(a * 3 + b, a * 3 + b).re;
                let expected = if a == b { 1.0 / 3.0 } else { 0.0 };
                assert!((p - expected).abs() < DEFAULT_TOL);
            }
        }
    }

    #[test]
    fn bell_expectation_matches_transpose_trace_oracle() {
        // For the Bell state, <A ⊗ B> = Tr(A . B^T) / 3.
        let weyl = WeylSet::new();
        let rho = qutrit_bell();
        let table = match expectation_table(&rho).unwrap() {
            CorrelationRecord::Qutrit(t) => t,
            _ => unreachable!(),
        };
        for i in 1..=4i8 {
            for j in [1, 2, 3, 4, -1, -2, -3, -4i8] {
                let oracle =
                    weyl.op(i).matmul(&weyl.op(j).transpose()).trace() / Complex64::new(3.0, 0.0);
                let got = table.get(i, j).unwrap().complex_value;
                assert!((got - oracle).norm() < 1e-12, "e_({i},{j}) mismatch");
            }
        }
        // <Z_3 ⊗ Z_3^dagger> = 1 on the Bell state.
        assert!(
            (table.get(1, -1).unwrap().complex_value - Complex64::new(1.0, 0.0)).norm() < 1e-12
        );
    }

    #[test]
    fn maximally_mixed_table_vanishes() {
        let rho =
            DensityMatrix::new((3, 3), ComplexMatrix::identity(9).scale_re(1.0 / 9.0)).unwrap();
        let record = expectation_table(&rho).unwrap();
        let table = match &record {
            CorrelationRecord::Qutrit(t) => t,
            _ => unreachable!(),
        };
        for i in 1..=4i8 {
            for j in [1, 2, 3, 4, -1, -2, -3, -4i8] {
                assert!(table.get(i, j).unwrap().complex_value.norm() < 1e-12);
            }
        }
        assert!(frame_invariant_c3(&record).unwrap().abs() < 1e-12);
    }

    #[test]
    fn product_state_kills_shift_rows() {
        // |0><0| ⊗ |0><0|: X_3 has zero diagonal, so e_2j = 0 for all j.
        let mut amps = vec![Complex64::new(0.0, 0.0); 9];
        amps[0] = Complex64::new(1.0, 0.0);
        let rho = DensityMatrix::from_pure((3, 3), &amps).unwrap();
        let record = expectation_table(&rho).unwrap();
        let table = match &record {
            CorrelationRecord::Qutrit(t) => t,
            _ => unreachable!(),
        };
        for j in [1, 2, 3, 4, -1, -2, -3, -4i8] {
            assert!(table.get(2, j).unwrap().complex_value.norm() < 1e-12);
        }
    }

    #[test]
    fn c3_reaches_three_on_bell_state() {
        let record = expectation_table(&qutrit_bell()).unwrap();
        let c3 = frame_invariant_c3(&record).unwrap();
        assert!((c3 - 3.0).abs() < 1e-12);
    }

    #[test]
    fn c3_isotropic_scaling() {
        // e_ij is linear in rho, so C_3(p Bell + (1-p) I/9) = 3 p^2.
        for p in [0.0, 0.3, 0.8, 1.0] {
            let rho = isotropic_state(p).unwrap();
            let c3 = frame_invariant_c3(&expectation_table(&rho).unwrap()).unwrap();
            assert!((c3 - 3.0 * p * p).abs() < 1e-12, "p={p}: c3={c3}");
        }
        assert!(isotropic_state(1.2).is_err());
    }

    #[test]
    fn c3_invariant_under_index_relabeling() {
        let rho = isotropic_state(0.7).unwrap();
        let reference = frame_invariant_c3(&expectation_table(&rho).unwrap()).unwrap();
        for perm in [[3, 4, 2], [4, 2, 3], [2, 4, 3], [3, 2, 4], [4, 3, 2]] {
            let weyl = WeylSet::with_permutation(perm);
            let c3 = frame_invariant_c3(&expectation_table_with(&weyl, &rho).unwrap()).unwrap();
            assert!((c3 - reference).abs() < 1e-12);
        }
    }

    #[test]
    fn phase_drift_preserves_computational_distribution_and_c3() {
        let rho = qutrit_bell();
        let drifted = rotate_bob_phases(&rho, 1.3, -2.1);
        for a in 0..3 {
            for b in 0..3 {
                let p0 = rho.matrix().get(a * 3 + b, a * 3 + b).re;
                let p1 = drifted.matrix().get(a * 3 + b, a * 3 + b).re;
                assert!((p0 - p1).abs() < 1e-12);
            }
        }
        let c3_ref = frame_invariant_c3(&expectation_table(&rho).unwrap()).unwrap();
        let c3_drift = frame_invariant_c3(&expectation_table(&drifted).unwrap()).unwrap();
        assert!((c3_ref - c3_drift).abs() < 1e-12);

        assert!(phase_drift_unitary(0.0, 0.0).approx_eq(&ComplexMatrix::identity(3), DEFAULT_TOL));
    }

    #[test]
    fn measurement_setting_counts() {
        // (d+1)^2 = 16 joint settings; the C_3 estimator reads 9 of the 15
        // non-key settings (both parties away from the computational basis).
        let settings: Vec<(usize, usize)> =
            (1..=4).flat_map(|a| (1..=4).map(move |b| (a, b))).collect();
        assert_eq!(settings.len(), 16);
        let non_key: Vec<_> = settings
            .iter()
            .filter(|&&(a, b)| !(a == 1 && b == 1))
            .collect();
        assert_eq!(non_key.len(), 15);
        let needed: Vec<(usize, usize)> =
            (2..=4).flat_map(|a| (2..=4).map(move |b| (a, b))).collect();
        assert_eq!(needed.len(), 9);
        assert!(needed.iter().all(|p| non_key.contains(&p)));
    }

    #[test]
    fn phase_drift_spec_round_trips() {
        for s in ["none", "fixed:0.4:1.1", "random", "jitter"] {
            let d: PhaseDrift = s.parse().unwrap();
            let again: PhaseDrift = d.to_string().parse().unwrap();
            assert_eq!(d, again);
        }
        assert!("wobble".parse::<PhaseDrift>().is_err());
    }
}
