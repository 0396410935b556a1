//! Monte-Carlo sampling of protocol runs.
//!
//! Each signal draws its bases and its joint outcome from ChaCha streams
//! indexed by the signal number, so transcripts are reproducible and
//! independent of any internal batching. Frame drift enters as a diagonal
//! phase twist on Bob's projectors, never as state mutation.

use num_complex::Complex64;
use rand::Rng;

use crate::channel::FrameDriftModel;
use crate::error::{Error, Result};
use crate::linalg::{partial_trace_a, tensor_product, ComplexMatrix, DensityMatrix};
use crate::qutrit::{MubFamily, PhaseDrift};
use crate::rng::{derive_seed, signal_stream, StreamKind};

/// Label for deriving the run-level phase seed from the master seed.
const SEED_LABEL_RUN_PHASES: u64 = 0x7068_6173;

use super::transcript::Transcript;
use super::BasisChoice;

/// Qubit eigenvector for basis index (0 = X, 1 = Y, 2 = Z) and outcome
/// (0 = eigenvalue +1, 1 = eigenvalue -1).
fn qubit_eigenvector(basis: usize, outcome: usize) -> Vec<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let c = Complex64::new;
    match (basis, outcome) {
        (0, 0) => vec![c(s, 0.0), c(s, 0.0)],
        (0, 1) => vec![c(s, 0.0), c(-s, 0.0)],
        (1, 0) => vec![c(s, 0.0), c(0.0, s)],
        (1, 1) => vec![c(s, 0.0), c(0.0, -s)],
        (2, 0) => vec![c(1.0, 0.0), c(0.0, 0.0)],
        (2, 1) => vec![c(0.0, 0.0), c(1.0, 0.0)],
        _ => unreachable!("qubit basis/outcome out of range"),
    }
}

/// Born weight Tr(V^dag proj V . cond) for the diagonal drift unitary
/// V = diag(e^{i theta_0}, ..): sum_jk e^{i(theta_k - theta_j)} proj_jk cond_kj.
fn phase_twisted_born(proj: &ComplexMatrix, cond: &ComplexMatrix, phases: &[f64]) -> f64 {
    let d = proj.dim();
    debug_assert_eq!(phases.len(), d);
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..d {
        for k in 0..d {
            let twist = Complex64::from_polar(1.0, phases[k] - phases[j]);
            acc += twist * proj.get(j, k) * cond.get(k, j);
        }
    }
    acc.re
}

/// Alice-conditional operators M_{a,ja} = Tr_A[(proj ⊗ I) rho]; the joint
/// outcome distribution is then Tr(proj_B' . M) per Bob projector.
fn alice_conditionals(
    rho: &DensityMatrix,
    projectors: &[Vec<ComplexMatrix>],
) -> Vec<Vec<ComplexMatrix>> {
    let (da, db) = rho.dims();
    let id_b = ComplexMatrix::identity(db);
    projectors
        .iter()
        .map(|outcomes| {
            outcomes
                .iter()
                .map(|p| {
                    let lifted = tensor_product(p, &id_b);
                    partial_trace_a(&lifted.matmul(rho.matrix()), (da, db))
                })
                .collect()
        })
        .collect()
}

fn draw_joint_outcome(rng: &mut impl Rng, probs: &[f64]) -> usize {
    let total: f64 = probs.iter().sum();
    let mut u: f64 = rng.gen::<f64>() * total;
    for (idx, &p) in probs.iter().enumerate() {
        u -= p;
        if u <= 0.0 {
            return idx;
        }
    }
    probs.len() - 1
}

/// Runs `n` signals of the qubit protocol against a source state, drawing
/// bases from `bases`, with Bob's frame rotated per-signal by the drift
/// model. Deterministic given `seed`.
pub fn sample_transcript(
    rho_source: &DensityMatrix,
    n: u64,
    bases: &BasisChoice,
    drift: &FrameDriftModel,
    seed: u64,
) -> Result<Transcript> {
    if rho_source.dims() != (2, 2) {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: rho_source.matrix().dim(),
        });
    }
    if bases.n_bases() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: bases.n_bases(),
        });
    }
    assert!(n >= 1, "need at least one signal");

    let projectors: Vec<Vec<ComplexMatrix>> = (0..3)
        .map(|basis| {
            (0..2)
                .map(|outcome| ComplexMatrix::outer(&qubit_eigenvector(basis, outcome)))
                .collect()
        })
        .collect();
    let conditionals = alice_conditionals(rho_source, &projectors);
    let betas = drift.beta_sequence(n);

    let mut transcript = Transcript::new((2, 2), seed, drift.to_string());
    let mut probs = [0.0f64; 4];
    for i in 0..n {
        let mut basis_rng = signal_stream(seed, i, StreamKind::BasisChoice);
        let (a, b) = bases.draw(&mut basis_rng);
        let beta = betas[i as usize];
        let phases = [beta / 2.0, -beta / 2.0];
        for ja in 0..2 {
            for jb in 0..2 {
                probs[ja * 2 + jb] =
                    phase_twisted_born(&projectors[b][jb], &conditionals[a][ja], &phases).max(0.0);
            }
        }
        let mut outcome_rng = signal_stream(seed, i, StreamKind::Outcome);
        let cell = draw_joint_outcome(&mut outcome_rng, &probs);
        transcript.record(a as u8, b as u8, (cell / 2) as u8, (cell % 2) as u8);
    }
    Ok(transcript)
}

/// Runs `n` signals of the qutrit protocol with projections onto the four
/// MUBs and a computational-phase drift on Bob's side.
pub fn sample_qutrit_transcript(
    rho_source: &DensityMatrix,
    n: u64,
    bases: &BasisChoice,
    drift: &PhaseDrift,
    seed: u64,
) -> Result<Transcript> {
    if rho_source.dims() != (3, 3) {
        return Err(Error::DimensionMismatch {
            expected: 9,
            got: rho_source.matrix().dim(),
        });
    }
    if bases.n_bases() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: bases.n_bases(),
        });
    }
    assert!(n >= 1, "need at least one signal");

    let mubs = MubFamily::new();
    let projectors: Vec<Vec<ComplexMatrix>> = (1..=4)
        .map(|basis| (0..3).map(|k| mubs.projector(basis, k)).collect())
        .collect();
    let conditionals = alice_conditionals(rho_source, &projectors);

    let tau = 2.0 * std::f64::consts::PI;
    // Fixed-but-unknown phases are drawn once per run from the seed.
    let run_phases = {
        let mut rng = signal_stream(
            derive_seed(seed, SEED_LABEL_RUN_PHASES),
            0,
            StreamKind::PhaseDrift,
        );
        (rng.gen::<f64>() * tau, rng.gen::<f64>() * tau)
    };

    let mut transcript = Transcript::new((3, 3), seed, drift.to_string());
    let mut probs = [0.0f64; 9];
    for i in 0..n {
        let mut basis_rng = signal_stream(seed, i, StreamKind::BasisChoice);
        let (a, b) = bases.draw(&mut basis_rng);
        let (phi1, phi2) = match *drift {
            PhaseDrift::None => (0.0, 0.0),
            PhaseDrift::Fixed { phi1, phi2 } => (phi1, phi2),
            PhaseDrift::RandomFixed => run_phases,
            PhaseDrift::Jitter => {
                let mut phase_rng = signal_stream(seed, i, StreamKind::PhaseDrift);
                (phase_rng.gen::<f64>() * tau, phase_rng.gen::<f64>() * tau)
            }
        };
        let phases = [0.0, phi1, phi2];
        for ja in 0..3 {
            for jb in 0..3 {
                probs[ja * 3 + jb] =
                    phase_twisted_born(&projectors[b][jb], &conditionals[a][ja], &phases).max(0.0);
            }
        }
        let mut outcome_rng = signal_stream(seed, i, StreamKind::Outcome);
        let cell = draw_joint_outcome(&mut outcome_rng, &probs);
        transcript.record(a as u8, b as u8, (cell / 3) as u8, (cell % 3) as u8);
    }
    Ok(transcript)
}
