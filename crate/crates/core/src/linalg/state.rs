//! Density matrices, observables and the standard two-qubit constructions.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::matrix::{hermitian_eigen, tensor_product, ComplexMatrix, DEFAULT_TOL, EIGEN_TOL};
use crate::error::{Error, Result};

/// The three Pauli directions used by the qubit protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn label(self) -> &'static str {
        match self {
            Pauli::X => "X",
            Pauli::Y => "Y",
            Pauli::Z => "Z",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "X" | "x" => Some(Pauli::X),
            "Y" | "y" => Some(Pauli::Y),
            "Z" | "z" => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Pauli::X => 0,
            Pauli::Y => 1,
            Pauli::Z => 2,
        }
    }
}

/// The 2x2 Pauli matrix for a direction.
pub fn pauli(p: Pauli) -> ComplexMatrix {
    let c = Complex64::new;
    match p {
        Pauli::X => {
            ComplexMatrix::from_vec(2, vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
        }
        Pauli::Y => {
            ComplexMatrix::from_vec(2, vec![c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
        }
        Pauli::Z => {
            ComplexMatrix::from_vec(2, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
        }
    }
}

/// Hermitian operator with a human-readable tag.
#[derive(Debug, Clone)]
pub struct Observable {
    matrix: ComplexMatrix,
    label: String,
}

impl Observable {
    pub fn new(label: impl Into<String>, matrix: ComplexMatrix) -> Result<Self> {
        let residual = matrix.hermiticity_residual();
        if residual > DEFAULT_TOL {
            return Err(Error::NotHermitian { residual });
        }
        Ok(Self {
            matrix,
            label: label.into(),
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Joint observable P_A ⊗ Q_B for a qubit basis pair.
    pub fn joint_pauli(a: Pauli, b: Pauli) -> Self {
        let m = tensor_product(&pauli(a), &pauli(b));
        Self {
            matrix: m,
            label: format!("{}_A{}_B", a.label(), b.label()),
        }
    }
}

/// Trace-1 positive-semidefinite operator on a bipartite d_A x d_B space.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    dims: (usize, usize),
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity before wrapping.
    pub fn new(dims: (usize, usize), matrix: ComplexMatrix) -> Result<Self> {
        let expected = dims.0 * dims.1;
        if matrix.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: matrix.dim(),
            });
        }
        let residual = matrix.hermiticity_residual();
        if residual > DEFAULT_TOL {
            return Err(Error::NotHermitian { residual });
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > DEFAULT_TOL || trace.im.abs() > DEFAULT_TOL {
            return Err(Error::NotNormalized { trace: trace.re });
        }
        let (eigvals, _) = hermitian_eigen(&matrix)?;
        let min = eigvals.first().copied().unwrap_or(0.0);
        if min < -EIGEN_TOL {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
        Ok(Self { dims, matrix })
    }

    /// Pure state |psi><psi| from a normalized amplitude vector.
    pub fn from_pure(dims: (usize, usize), amplitudes: &[Complex64]) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        let v: Vec<Complex64> = amplitudes.iter().map(|a| a / norm.sqrt()).collect();
        Self::new(dims, ComplexMatrix::outer(&v))
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn dim_a(&self) -> usize {
        self.dims.0
    }

    pub fn dim_b(&self) -> usize {
        self.dims.1
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn purity(&self) -> f64 {
        self.matrix.matmul(&self.matrix).trace().re
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigen(&self.matrix)
            .expect("validated Hermitian")
            .0
    }

    /// Partial trace over subsystem A, leaving a d_B x d_B matrix.
    pub fn trace_out_a(&self) -> ComplexMatrix {
        partial_trace_a(&self.matrix, self.dims)
    }

    /// Partial trace over subsystem B, leaving a d_A x d_A matrix.
    pub fn trace_out_b(&self) -> ComplexMatrix {
        partial_trace_b(&self.matrix, self.dims)
    }
}

/// A random full-rank mixed state, G G^dagger / Tr(G G^dagger) with G drawn
/// from the complex Ginibre ensemble. Positive by construction.
pub fn random_density_matrix(dims: (usize, usize), rng: &mut impl Rng) -> DensityMatrix {
    let n = dims.0 * dims.1;
    let mut g = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            g.set(i, j, Complex64::new(re, im));
        }
    }
    let gram = g.matmul(&g.adjoint());
    let trace = gram.trace().re;
    DensityMatrix::new(dims, gram.scale_re(1.0 / trace)).expect("Ginibre state is valid")
}

/// Partial trace over the left (A) factor of a bipartite operator.
pub fn partial_trace_a(m: &ComplexMatrix, (da, db): (usize, usize)) -> ComplexMatrix {
    assert_eq!(m.dim(), da * db);
    let mut out = ComplexMatrix::zeros(db);
    for j in 0..db {
        for l in 0..db {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..da {
                acc += m.get(i * db + j, i * db + l);
            }
            out.set(j, l, acc);
        }
    }
    out
}

/// Partial trace over the right (B) factor of a bipartite operator.
pub fn partial_trace_b(m: &ComplexMatrix, (da, db): (usize, usize)) -> ComplexMatrix {
    assert_eq!(m.dim(), da * db);
    let mut out = ComplexMatrix::zeros(da);
    for i in 0..da {
        for k in 0..da {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..db {
                acc += m.get(i * db + j, k * db + j);
            }
            out.set(i, k, acc);
        }
    }
    out
}

/// Amplitudes of the four Bell vectors in the computational basis,
/// index 1..=4 mapping to Phi+, Phi-, Psi+, Psi-.
pub(crate) fn bell_vector(k: usize) -> Result<Vec<Complex64>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let c = Complex64::new;
    let z = c(0.0, 0.0);
    match k {
        1 => Ok(vec![c(s, 0.0), z, z, c(s, 0.0)]),
        2 => Ok(vec![c(s, 0.0), z, z, c(-s, 0.0)]),
        3 => Ok(vec![z, c(s, 0.0), c(s, 0.0), z]),
        4 => Ok(vec![z, c(s, 0.0), c(-s, 0.0), z]),
        _ => Err(Error::BellIndexOutOfRange { index: k }),
    }
}

/// Pure Bell-state density matrix; the ideal protocol source is k = 1 (Phi+).
pub fn bell_state(k: usize) -> Result<DensityMatrix> {
    let v = bell_vector(k)?;
    DensityMatrix::from_pure((2, 2), &v)
}

/// Werner state p|Phi+><Phi+| + (1-p) I/4 with p = 1 - 2q, so that the QBER
/// of the result is exactly `q`.
pub fn werner_state(q: f64) -> Result<DensityMatrix> {
    if !(0.0..=0.5).contains(&q) {
        return Err(Error::OutOfRange {
            name: "q",
            value: q,
            min: 0.0,
            max: 0.5,
        });
    }
    let p = 1.0 - 2.0 * q;
    let phi = bell_state(1)?;
    let mixed = ComplexMatrix::identity(4).scale_re(0.25);
    let m = phi.matrix().scale_re(p).add(&mixed.scale_re(1.0 - p));
    DensityMatrix::new((2, 2), m)
}

/// Real expectation value Tr(obs . rho) of a Hermitian observable.
///
/// The imaginary part of the trace is numerical noise for Hermitian
/// operators; it is checked to be below 1e-10 and discarded.
pub fn expectation(rho: &DensityMatrix, obs: &Observable) -> Result<f64> {
    let value = expectation_complex(rho, obs.matrix())?;
    debug_assert!(
        value.im.abs() < 1e-10,
        "Hermitian expectation has imaginary part"
    );
    Ok(value.re)
}

/// Full complex expectation Tr(op . rho), for non-Hermitian operators such
/// as the qutrit Weyl matrices.
pub fn expectation_complex(rho: &DensityMatrix, op: &ComplexMatrix) -> Result<Complex64> {
    let n = rho.matrix().dim();
    if op.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: op.dim(),
        });
    }
    // Tr(op . rho) without forming the product matrix.
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += op.get(i, j) * rho.matrix().get(j, i);
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_phi_plus_has_half_corners() {
        let rho = bell_state(1).unwrap();
        let m = rho.matrix();
        for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            assert!((m.get(i, j) - Complex64::new(0.5, 0.0)).norm() < DEFAULT_TOL);
        }
        assert!(m.get(1, 1).norm() < DEFAULT_TOL);
        assert!(m.get(2, 2).norm() < DEFAULT_TOL);
    }

    #[test]
    fn bell_states_are_pure_orthogonal_and_normalized() {
        let states: Vec<_> = (1..=4).map(|k| bell_state(k).unwrap()).collect();
        for (i, a) in states.iter().enumerate() {
            assert!((a.matrix().trace().re - 1.0).abs() < DEFAULT_TOL);
            assert!((a.purity() - 1.0).abs() < DEFAULT_TOL);
            for (j, b) in states.iter().enumerate() {
                let overlap = a.matrix().matmul(b.matrix()).trace().re;
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((overlap - expected).abs() < DEFAULT_TOL);
            }
        }
    }

    #[test]
    fn bell_index_out_of_range_rejected() {
        assert!(matches!(
            bell_state(0),
            Err(Error::BellIndexOutOfRange { .. })
        ));
        assert!(matches!(
            bell_state(5),
            Err(Error::BellIndexOutOfRange { .. })
        ));
    }

    #[test]
    fn singlet_is_z_anticorrelated() {
        let rho = bell_state(4).unwrap();
        let zz = Observable::joint_pauli(Pauli::Z, Pauli::Z);
        let v = expectation(&rho, &zz).unwrap();
        assert!((v + 1.0).abs() < DEFAULT_TOL);
    }

    #[test]
    fn phi_plus_z_parity() {
        let rho = bell_state(1).unwrap();
        let zz = Observable::joint_pauli(Pauli::Z, Pauli::Z);
        assert!((expectation(&rho, &zz).unwrap() - 1.0).abs() < DEFAULT_TOL);
    }

    #[test]
    fn maximally_mixed_kills_traceless_observables() {
        let rho = DensityMatrix::new((2, 2), ComplexMatrix::identity(4).scale_re(0.25)).unwrap();
        for a in Pauli::ALL {
            for b in Pauli::ALL {
                let obs = Observable::joint_pauli(a, b);
                assert!(expectation(&rho, &obs).unwrap().abs() < DEFAULT_TOL);
            }
        }
    }

    #[test]
    fn werner_expectation_oracle() {
        // Explicit 4x4 trace of (X⊗X) against 0.9 |Phi+><Phi+| + 0.1 I/4,
        // built here independently of werner_state.
        let p = 0.9;
        let phi = bell_state(1).unwrap();
        let manual = phi
            .matrix()
            .scale_re(p)
            .add(&ComplexMatrix::identity(4).scale_re((1.0 - p) * 0.25));
        let xx = Observable::joint_pauli(Pauli::X, Pauli::X);
        let mut tr = Complex64::new(0.0, 0.0);
        for i in 0..4 {
            for j in 0..4 {
                tr += xx.matrix().get(i, j) * manual.get(j, i);
            }
        }
        assert!((tr.re - 0.9).abs() < DEFAULT_TOL);

        // werner_state(q = 0.05) carries p = 0.9 and must agree.
        let w = werner_state(0.05).unwrap();
        assert!((expectation(&w, &xx).unwrap() - 0.9).abs() < DEFAULT_TOL);
    }

    #[test]
    fn werner_edges_and_zz() {
        let w0 = werner_state(0.0).unwrap();
        assert!(w0
            .matrix()
            .approx_eq(bell_state(1).unwrap().matrix(), DEFAULT_TOL));

        let w_half = werner_state(0.5).unwrap();
        assert!(w_half
            .matrix()
            .approx_eq(&ComplexMatrix::identity(4).scale_re(0.25), DEFAULT_TOL));

        let w = werner_state(0.05).unwrap();
        let zz = Observable::joint_pauli(Pauli::Z, Pauli::Z);
        assert!((expectation(&w, &zz).unwrap() - 0.9).abs() < DEFAULT_TOL);

        assert!(werner_state(0.6).is_err());
        assert!(werner_state(-0.01).is_err());
    }

    #[test]
    fn werner_spectrum_matches_closed_form() {
        // Eigenvalues {(1+3p)/4, (1-p)/4 x3} for mixing weight p.
        let q = 0.12;
        let p = 1.0 - 2.0 * q;
        let w = werner_state(q).unwrap();
        let eig = w.eigenvalues();
        assert!((eig[3] - (1.0 + 3.0 * p) / 4.0).abs() < 1e-10);
        for k in 0..3 {
            assert!((eig[k] - (1.0 - p) / 4.0).abs() < 1e-10);
        }
    }

    #[test]
    fn expectation_is_linear_in_observable() {
        let w = werner_state(0.2).unwrap();
        let xx = Observable::joint_pauli(Pauli::X, Pauli::X);
        let yy = Observable::joint_pauli(Pauli::Y, Pauli::Y);
        let combo = Observable::new(
            "combo",
            xx.matrix().scale_re(0.3).add(&yy.matrix().scale_re(-1.2)),
        )
        .unwrap();
        let direct = expectation(&w, &combo).unwrap();
        let linear = 0.3 * expectation(&w, &xx).unwrap() - 1.2 * expectation(&w, &yy).unwrap();
        assert!((direct - linear).abs() < DEFAULT_TOL);
    }

    #[test]
    fn expectation_rejects_dimension_mismatch() {
        let rho = bell_state(1).unwrap();
        let small = Observable::new("Z", pauli(Pauli::Z)).unwrap();
        assert!(matches!(
            expectation(&rho, &small),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn density_matrix_validation_rejects_bad_inputs() {
        // Non-unit trace.
        let m = ComplexMatrix::identity(4);
        assert!(matches!(
            DensityMatrix::new((2, 2), m),
            Err(Error::NotNormalized { .. })
        ));
        // Negative eigenvalue: diag(0.75, 0.75, -0.25, -0.25).
        let neg = ComplexMatrix::diagonal(&[
            Complex64::new(0.75, 0.0),
            Complex64::new(0.75, 0.0),
            Complex64::new(-0.25, 0.0),
            Complex64::new(-0.25, 0.0),
        ]);
        assert!(matches!(
            DensityMatrix::new((2, 2), neg),
            Err(Error::NotPositive { .. })
        ));
    }

    #[test]
    fn partial_traces_of_bell_are_maximally_mixed() {
        let rho = bell_state(1).unwrap();
        let ra = rho.trace_out_b();
        let rb = rho.trace_out_a();
        let half = ComplexMatrix::identity(2).scale_re(0.5);
        assert!(ra.approx_eq(&half, DEFAULT_TOL));
        assert!(rb.approx_eq(&half, DEFAULT_TOL));
    }
}
