//! Linear-optical measurement circuits for the qutrit protocol and their
//! verification: directional-coupler unitaries, the qutrit Hadamard chip,
//! the 3-to-6-mode state splitter, and the composed four-branch
//! random-projection device as a POVM.
//!
//! Everything is modeled in first quantization: one photon traverses the
//! device, so the mode unitary fully determines its statistics.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, ComplexMatrix};
use crate::qutrit::MubFamily;

/// A verified n-mode linear-optical unitary.
#[derive(Debug, Clone)]
pub struct ModeUnitary {
    matrix: ComplexMatrix,
}

impl ModeUnitary {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let residual = matrix.unitarity_residual();
        if residual > 1e-12 {
            return Err(Error::NotUnitary { residual });
        }
        Ok(Self { matrix })
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Output amplitudes for a single-photon input amplitude vector.
    pub fn apply(&self, amplitudes: &[Complex64]) -> Vec<Complex64> {
        self.matrix.apply(amplitudes)
    }
}

/// The three directional couplers of the qutrit Hadamard chip.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplerKind {
    /// (sigma_z + sigma_x)/sqrt(2) on modes (1, 2).
    Dc2,
    /// (sigma_z + sqrt(2) sigma_x)/sqrt(3) on modes (0, 1).
    Dc3,
    /// (sigma_z + sigma_y)/sqrt(2) on modes (1, 2).
    Dc4,
}

/// Raw 3-mode matrix of a coupler; `dc3_coefficient` overrides the 1/sqrt(3)
/// prefactor of DC3 (used for fault injection -- anything else breaks
/// unitarity and the Hadamard property).
pub fn coupler_matrix(kind: CouplerKind, dc3_coefficient: Option<f64>) -> ComplexMatrix {
    let c = Complex64::new;
    match kind {
        CouplerKind::Dc2 => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let block = ComplexMatrix::from_real(2, &[s, s, s, -s]);
            ComplexMatrix::embed(&block, 3, &[1, 2])
        }
        CouplerKind::Dc3 => {
            let w = dc3_coefficient.unwrap_or(1.0 / 3.0_f64.sqrt());
            let r2 = 2.0_f64.sqrt();
            let block = ComplexMatrix::from_real(2, &[w, w * r2, w * r2, -w]);
            ComplexMatrix::embed(&block, 3, &[0, 1])
        }
        CouplerKind::Dc4 => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let block =
                ComplexMatrix::from_vec(2, vec![c(s, 0.0), c(0.0, -s), c(0.0, s), c(-s, 0.0)]);
            ComplexMatrix::embed(&block, 3, &[1, 2])
        }
    }
}

/// The verified coupler unitary.
pub fn coupler(kind: CouplerKind) -> ModeUnitary {
    ModeUnitary::new(coupler_matrix(kind, None)).expect("standard couplers are unitary")
}

/// The chip product DC4 . DC3 . DC2 as a raw matrix (DC2 is traversed
/// first on the optical path).
pub fn hadamard_product(
    dc2: &ComplexMatrix,
    dc3: &ComplexMatrix,
    dc4: &ComplexMatrix,
) -> ComplexMatrix {
    dc4.matmul(dc3).matmul(dc2)
}

/// Residuals of the complex-Hadamard property for a 3-mode candidate:
/// (unitarity residual, worst deviation of |entry|^2 from 1/3).
pub fn hadamard_residuals(candidate: &ComplexMatrix) -> (f64, f64) {
    let unitarity = candidate.unitarity_residual();
    let mut modulus: f64 = 0.0;
    for i in 0..candidate.dim() {
        for j in 0..candidate.dim() {
            modulus = modulus.max((candidate.get(i, j).norm_sqr() - 1.0 / 3.0).abs());
        }
    }
    (unitarity, modulus)
}

/// The qutrit Hadamard chip DC4 . DC3 . DC2: a flat-modulus unitary whose
/// column basis is unbiased with respect to the computational basis.
pub fn hadamard_chip() -> ModeUnitary {
    let m = hadamard_product(
        &coupler_matrix(CouplerKind::Dc2, None),
        &coupler_matrix(CouplerKind::Dc3, None),
        &coupler_matrix(CouplerKind::Dc4, None),
    );
    ModeUnitary::new(m).expect("coupler product is unitary")
}

/// Hadamard chip preceded by phase shifters on two of the three input
/// modes. Output-side phases would only re-phase detector amplitudes, so
/// the layer sits on the input side, where it genuinely rotates the
/// measured basis. Entry moduli are unchanged.
pub fn hadamard_variant(phases: [f64; 2], placement: [usize; 2]) -> ModeUnitary {
    assert!(placement[0] < 3 && placement[1] < 3 && placement[0] != placement[1]);
    let mut diag = [Complex64::new(1.0, 0.0); 3];
    diag[placement[0]] = Complex64::from_polar(1.0, phases[0]);
    diag[placement[1]] = Complex64::from_polar(1.0, phases[1]);
    let layer = ComplexMatrix::diagonal(&diag);
    let m = hadamard_chip().matrix().matmul(&layer);
    ModeUnitary::new(m).expect("phase layer preserves unitarity")
}

/// The basis a chip measures: column k of U^dagger is the state projected
/// onto by detector k behind the chip.
pub fn measured_basis(chip: &ModeUnitary) -> ComplexMatrix {
    chip.matrix().adjoint()
}

/// Distance of two orthonormal bases up to column phases and permutation:
/// 3 - sum_k max_j |<measured_j | target_k>|^2, zero iff each target column
/// is some measured column up to phase. Also returns, per measured column,
/// the index of the best-matching target column.
pub fn basis_distance(measured: &ComplexMatrix, target: &ComplexMatrix) -> (f64, [usize; 3]) {
    let overlap = |u: &[Complex64], v: &[Complex64]| -> f64 {
        u.iter()
            .zip(v)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            .norm_sqr()
    };
    let mut distance = 3.0;
    for k in 0..3 {
        let target_col = target.column(k);
        let best = (0..3)
            .map(|j| overlap(&measured.column(j), &target_col))
            .fold(f64::NEG_INFINITY, f64::max);
        distance -= best;
    }
    let mut outcome_map = [0usize; 3];
    for (j, slot) in outcome_map.iter_mut().enumerate() {
        let col = measured.column(j);
        *slot = (0..3)
            .max_by(|&a, &b| {
                overlap(&col, &target.column(a))
                    .partial_cmp(&overlap(&col, &target.column(b)))
                    .unwrap()
            })
            .unwrap();
    }
    (distance, outcome_map)
}

/// Phases and placement realizing one MUB as a Hadamard variant, found by
/// searching the third-root-of-unity phase grid.
#[derive(Debug, Clone)]
pub struct VariantAssignment {
    /// MUB index in 2..=4.
    pub mub_index: usize,
    pub phases: [f64; 2],
    pub placement: [usize; 2],
    /// Basis distance at the optimum; ~0 when the search succeeded.
    pub distance: f64,
    /// outcome_map[detector] = eigenvalue index of the measured MUB vector.
    pub outcome_map: [usize; 3],
}

/// Searches phases in {0, 2pi/3, 4pi/3}^2 over the mode-pair placements for
/// the variants realizing the eigenbases of tau_2, tau_3, tau_4.
pub fn find_mub_variants() -> Vec<VariantAssignment> {
    let mubs = MubFamily::new();
    let third = 2.0 * std::f64::consts::PI / 3.0;
    let placements = [[1, 2], [0, 1], [0, 2]];
    (2..=4)
        .map(|mub_index| {
            let target = mubs.basis(mub_index);
            let mut best: Option<VariantAssignment> = None;
            for placement in placements {
                for i in 0..3 {
                    for j in 0..3 {
                        let phases = [third * i as f64, third * j as f64];
                        let chip = hadamard_variant(phases, placement);
                        let (distance, outcome_map) =
                            basis_distance(&measured_basis(&chip), target);
                        if best.as_ref().is_none_or(|b| distance < b.distance) {
                            best = Some(VariantAssignment {
                                mub_index,
                                phases,
                                placement,
                                distance,
                                outcome_map,
                            });
                        }
                    }
                }
            }
            best.expect("search space is nonempty")
        })
        .collect()
}

/// Two-mode crossing realized by a Mach-Zehnder interferometer with its
/// internal phase set so the photon exits the opposite path; the external
/// phase convention is fixed to make the block the real swap.
fn mz_swap(dim: usize, modes: [usize; 2]) -> ComplexMatrix {
    let block = ComplexMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]);
    ComplexMatrix::embed(&block, dim, &[modes[0], modes[1]])
}

/// The 3-input/6-output state splitter of reflectivity `r`: a qutrit
/// amplitude vector psi on input modes (0, 1, 2) leaves as sqrt(r) psi on
/// output modes (0, 1, 2) and sqrt(1-r) psi on output modes (3, 4, 5).
///
/// Layout: the inputs are routed to interleave with three empty guides,
/// each (signal, empty) pair passes one directional coupler of
/// reflectivity r, and three MZ crossings sort transmitted and reflected
/// triples back together.
pub fn state_splitter(r: f64) -> Result<ModeUnitary> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::OutOfRange {
            name: "r",
            value: r,
            min: 0.0,
            max: 1.0,
        });
    }
    // Input router: logical (0,1,2,3,4,5) -> physical (0,2,4,1,3,5).
    let route = [0usize, 2, 4, 1, 3, 5];
    let mut router = ComplexMatrix::zeros(6);
    for (logical, &physical) in route.iter().enumerate() {
        router.set(physical, logical, Complex64::new(1.0, 0.0));
    }

    let t = r.sqrt();
    let s = (1.0 - r).sqrt();
    let dc = ComplexMatrix::from_real(2, &[t, s, s, -t]);
    let mut coupler_layer = ComplexMatrix::identity(6);
    for k in 0..3 {
        coupler_layer = ComplexMatrix::embed(&dc, 6, &[2 * k, 2 * k + 1]).matmul(&coupler_layer);
    }

    // Sort (t0 r0 t1 r1 t2 r2) -> (t0 t1 t2 r0 r1 r2).
    let sort = mz_swap(6, [2, 3])
        .matmul(&mz_swap(6, [3, 4]))
        .matmul(&mz_swap(6, [1, 2]));

    ModeUnitary::new(sort.matmul(&coupler_layer).matmul(&router))
}

/// One POVM element with its outcome labels.
#[derive(Debug, Clone)]
pub struct PovmElement {
    /// MUB index 1..=4 (1 = computational).
    pub basis: usize,
    /// Outcome index 0..=2 (eigenvalue omega^outcome of tau_basis).
    pub outcome: usize,
    pub matrix: ComplexMatrix,
}

/// A measurement as a list of positive elements summing to identity.
#[derive(Debug, Clone)]
pub struct Povm {
    elements: Vec<PovmElement>,
}

impl Povm {
    pub fn new(elements: Vec<PovmElement>) -> Result<Self> {
        assert!(!elements.is_empty());
        let dim = elements[0].matrix.dim();
        let mut sum = ComplexMatrix::zeros(dim);
        for e in &elements {
            let (vals, _) = hermitian_eigen(&e.matrix)?;
            let min = vals.first().copied().unwrap_or(0.0);
            if min < -1e-10 {
                return Err(Error::NotPositive {
                    min_eigenvalue: min,
                });
            }
            sum = sum.add(&e.matrix);
        }
        let residual = sum.max_abs_diff(&ComplexMatrix::identity(dim));
        if residual > 1e-10 {
            return Err(Error::NotTracePreserving { residual });
        }
        Ok(Self { elements })
    }

    pub fn elements(&self) -> &[PovmElement] {
        &self.elements
    }

    /// Completeness residual max |sum E - I|.
    pub fn completeness_residual(&self) -> f64 {
        let dim = self.elements[0].matrix.dim();
        let mut sum = ComplexMatrix::zeros(dim);
        for e in &self.elements {
            sum = sum.add(&e.matrix);
        }
        sum.max_abs_diff(&ComplexMatrix::identity(dim))
    }

    /// Probability of landing in each MUB branch, summed over outcomes.
    pub fn branch_probabilities(&self) -> [f64; 4] {
        let mut probs = [0.0; 4];
        for e in &self.elements {
            // Each rank-1 element p|v><v| has trace p; one branch holds
            // three of them.
            probs[e.basis - 1] += e.matrix.trace().re / 3.0;
        }
        probs
    }
}

/// Builds the four-branch random-projection device from three splitter
/// reflectivities: a cascade of three splitters creates four probabilistic
/// copies on twelve modes; the first copy is detected in the computational
/// basis and the other three pass Hadamard variants for the MUBs 2..4.
///
/// Branch probabilities: p_1 = r1 r2 (computational), p_2 = (1-r1) r3,
/// p_3 = r1 (1-r2), p_4 = (1-r1)(1-r3); equal reflectivities 1/2 give
/// p_b = 1/4 each.
pub fn measurement_device(split_probs: [f64; 3]) -> Result<Povm> {
    let [r1, r2, r3] = split_probs;
    let s1 = state_splitter(r1)?;
    let s2 = state_splitter(r2)?;
    let s3 = state_splitter(r3)?;

    // Twelve modes in four triples T0..T3. S1 splits T0 into (T0, T1),
    // S2 splits T0 into (T0, T2), S3 splits T1 into (T1, T3).
    let embed6 = |u: &ModeUnitary, modes: [usize; 6]| -> ComplexMatrix {
        ComplexMatrix::embed(u.matrix(), 12, &modes)
    };
    let stage1 = embed6(&s1, [0, 1, 2, 3, 4, 5]);
    let stage2 = embed6(&s2, [0, 1, 2, 6, 7, 8]);
    let stage3 = embed6(&s3, [3, 4, 5, 9, 10, 11]);

    let variants = find_mub_variants();
    let mut chips = ComplexMatrix::identity(12);
    let mut outcome_maps = [[0usize, 1, 2]; 4];
    for (slot, assignment) in variants.iter().enumerate() {
        let triple = 3 * (slot + 1);
        let chip = hadamard_variant(assignment.phases, assignment.placement);
        chips = ComplexMatrix::embed(chip.matrix(), 12, &[triple, triple + 1, triple + 2])
            .matmul(&chips);
        outcome_maps[slot + 1] = assignment.outcome_map;
    }

    let device = chips.matmul(&stage3).matmul(&stage2).matmul(&stage1);

    let mut elements = Vec::with_capacity(12);
    for branch in 0..4 {
        for detector in 0..3 {
            let mode = 3 * branch + detector;
            // E = t^dagger t with t the 1x3 transfer row into this detector.
            let row: Vec<Complex64> = (0..3).map(|j| device.get(mode, j).conj()).collect();
            elements.push(PovmElement {
                basis: branch + 1,
                outcome: outcome_maps[branch][detector],
                matrix: ComplexMatrix::outer(&row),
            });
        }
    }
    Povm::new(elements)
}
