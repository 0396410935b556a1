//! The quantum channel between the source and Bob: reference-frame rotation
//! (static or drifting), depolarizing noise, and arbitrary Kraus-operator
//! attacks.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{tensor_product, ComplexMatrix, DensityMatrix};

/// How the relative frame angle beta evolves with the signal index.
///
/// `beta_at(n)` is a pure function of the model and `n`; the random walk is
/// seeded, so repeated evaluation returns the same angle.
#[derive(Debug, Clone, PartialEq)]
pub enum FrameDriftModel {
    /// Fixed angle for every signal.
    Constant { beta0: f64 },
    /// beta0 + rate * n (steady rotation, e.g. a spinning satellite).
    LinearRamp { beta0: f64, rate: f64 },
    /// Gaussian random walk with per-signal step standard deviation `rate`.
    RandomWalk { beta0: f64, rate: f64, seed: u64 },
}

impl FrameDriftModel {
    pub fn constant(beta0: f64) -> Self {
        FrameDriftModel::Constant { beta0 }
    }

    /// The angle at signal index `n`.
    ///
    /// For the random walk this recomputes the partial sum of seeded steps,
    /// which costs O(n); samplers that need the whole trajectory should use
    /// [`FrameDriftModel::beta_sequence`] instead.
    pub fn beta_at(&self, n: u64) -> f64 {
        match *self {
            FrameDriftModel::Constant { beta0 } => beta0,
            FrameDriftModel::LinearRamp { beta0, rate } => beta0 + rate * n as f64,
            FrameDriftModel::RandomWalk { beta0, rate, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut beta = beta0;
                for _ in 0..n {
                    let step: f64 = rng.sample(StandardNormal);
                    beta += rate * step;
                }
                beta
            }
        }
    }

    /// The angles for signals 0..n as one pass over the drift trajectory.
    pub fn beta_sequence(&self, n: u64) -> Vec<f64> {
        match *self {
            FrameDriftModel::Constant { beta0 } => vec![beta0; n as usize],
            FrameDriftModel::LinearRamp { beta0, rate } => {
                (0..n).map(|i| beta0 + rate * i as f64).collect()
            }
            FrameDriftModel::RandomWalk { beta0, rate, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut beta = beta0;
                let mut out = Vec::with_capacity(n as usize);
                for _ in 0..n {
                    out.push(beta);
                    let step: f64 = rng.sample(StandardNormal);
                    beta += rate * step;
                }
                out
            }
        }
    }

    /// True when every signal sees the same angle.
    pub fn is_static(&self) -> bool {
        match *self {
            FrameDriftModel::Constant { .. } => true,
            FrameDriftModel::LinearRamp { rate, .. } => rate == 0.0,
            FrameDriftModel::RandomWalk { rate, .. } => rate == 0.0,
        }
    }
}

impl fmt::Display for FrameDriftModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FrameDriftModel::Constant { beta0 } => write!(f, "constant:{beta0}"),
            FrameDriftModel::LinearRamp { beta0, rate } => write!(f, "ramp:{beta0}:{rate}"),
            FrameDriftModel::RandomWalk { beta0, rate, seed } => {
                write!(f, "walk:{beta0}:{rate}:{seed}")
            }
        }
    }
}

impl FromStr for FrameDriftModel {
    type Err = String;

    /// Parses the CLI grammar `constant:B`, `ramp:B:RATE`, `walk:B:RATE:SEED`.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| -> std::result::Result<f64, String> {
            t.parse::<f64>()
                .map_err(|_| format!("bad number `{t}` in drift spec"))
        };
        match parts.as_slice() {
            ["constant", b] => Ok(FrameDriftModel::Constant { beta0: num(b)? }),
            ["ramp", b, r] => Ok(FrameDriftModel::LinearRamp {
                beta0: num(b)?,
                rate: num(r)?,
            }),
            ["walk", b, r, seed] => Ok(FrameDriftModel::RandomWalk {
                beta0: num(b)?,
                rate: num(r)?,
                seed: seed
                    .parse::<u64>()
                    .map_err(|_| format!("bad seed `{seed}` in drift spec"))?,
            }),
            _ => Err(format!(
                "unrecognized drift spec `{s}` (expected constant:B, ramp:B:RATE or walk:B:RATE:SEED)"
            )),
        }
    }
}

/// The 2x2 rotation about Z realizing the frame relation between Bob's and
/// Alice's transverse axes: U(beta)^dagger X U(beta) = cos(beta) X + sin(beta) Y
/// and U(beta)^dagger Y U(beta) = cos(beta) Y - sin(beta) X, with Z untouched.
///
/// Concretely U(beta) = diag(e^{i beta/2}, e^{-i beta/2}); the conjugation
/// identities, not the sign convention, are the pinned contract (they are
/// asserted in tests over a dense angle grid).
pub fn frame_rotation_unitary(beta: f64) -> ComplexMatrix {
    let half = beta / 2.0;
    ComplexMatrix::diagonal(&[
        Complex64::from_polar(1.0, half),
        Complex64::from_polar(1.0, -half),
    ])
}

/// Rotates Bob's subsystem: rho -> (I ⊗ U(beta)) rho (I ⊗ U(beta))^dagger.
pub fn rotate_bob(rho: &DensityMatrix, beta: f64) -> DensityMatrix {
    let u = frame_rotation_unitary(beta);
    let full = tensor_product(&ComplexMatrix::identity(rho.dim_a()), &u);
    let m = rho.matrix().conjugate_by(&full);
    DensityMatrix::new(rho.dims(), m).expect("unitary conjugation preserves state validity")
}

/// A completely positive trace-preserving map given by Kraus operators.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    operators: Vec<ComplexMatrix>,
}

/// Which subsystem a channel acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
    Both,
}

impl KrausChannel {
    /// Checks trace preservation (sum K^dagger K = I) before wrapping.
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        assert!(
            !operators.is_empty(),
            "Kraus channel needs at least one operator"
        );
        let dim = operators[0].dim();
        for op in &operators {
            if op.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: op.dim(),
                });
            }
        }
        let mut sum = ComplexMatrix::zeros(dim);
        for op in &operators {
            sum = sum.add(&op.adjoint().matmul(op));
        }
        let residual = sum.max_abs_diff(&ComplexMatrix::identity(dim));
        if residual > 1e-10 {
            return Err(Error::NotTracePreserving { residual });
        }
        Ok(Self { operators })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            operators: vec![ComplexMatrix::identity(dim)],
        }
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn dim(&self) -> usize {
        self.operators[0].dim()
    }
}

/// Applies a Kraus channel to one or both subsystems of a bipartite state.
pub fn apply_channel(
    rho: &DensityMatrix,
    channel: &KrausChannel,
    subsystem: Subsystem,
) -> Result<DensityMatrix> {
    let (da, db) = rho.dims();
    match subsystem {
        Subsystem::A => {
            if channel.dim() != da {
                return Err(Error::DimensionMismatch {
                    expected: da,
                    got: channel.dim(),
                });
            }
        }
        Subsystem::B => {
            if channel.dim() != db {
                return Err(Error::DimensionMismatch {
                    expected: db,
                    got: channel.dim(),
                });
            }
        }
        Subsystem::Both => {
            if channel.dim() != da || channel.dim() != db {
                return Err(Error::DimensionMismatch {
                    expected: da.max(db),
                    got: channel.dim(),
                });
            }
        }
    }

    let lift = |k: &ComplexMatrix, side: Subsystem| -> ComplexMatrix {
        match side {
            Subsystem::A => tensor_product(k, &ComplexMatrix::identity(db)),
            Subsystem::B => tensor_product(&ComplexMatrix::identity(da), k),
            Subsystem::Both => unreachable!(),
        }
    };

    let apply_side = |m: &ComplexMatrix, side: Subsystem| -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(m.dim());
        for k in channel.operators() {
            let lifted = lift(k, side);
            out = out.add(&m.conjugate_by(&lifted));
        }
        out
    };

    let m = match subsystem {
        Subsystem::A => apply_side(rho.matrix(), Subsystem::A),
        Subsystem::B => apply_side(rho.matrix(), Subsystem::B),
        Subsystem::Both => {
            let after_a = apply_side(rho.matrix(), Subsystem::A);
            apply_side(&after_a, Subsystem::B)
        }
    };
    DensityMatrix::new((da, db), m)
}

/// Single-qubit depolarizing channel with Kraus set
/// {sqrt(1-3p/4) I, sqrt(p/4) X, sqrt(p/4) Y, sqrt(p/4) Z}.
pub fn depolarizing_channel(p: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange {
            name: "p",
            value: p,
            min: 0.0,
            max: 1.0,
        });
    }
    use crate::linalg::{pauli, Pauli};
    let w_id = (1.0 - 3.0 * p / 4.0).sqrt();
    let w_pauli = (p / 4.0).sqrt();
    let ops = vec![
        ComplexMatrix::identity(2).scale_re(w_id),
        pauli(Pauli::X).scale_re(w_pauli),
        pauli(Pauli::Y).scale_re(w_pauli),
        pauli(Pauli::Z).scale_re(w_pauli),
    ];
    KrausChannel::new(ops)
}
