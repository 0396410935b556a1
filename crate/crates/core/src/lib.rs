//! Reference-frame-independent QKD simulation library.
//!
//! The crate covers the full pipeline of the entanglement-based protocol in
//! which Alice and Bob share a fixed Z direction while the complementary
//! X/Y axes are related by an unknown, possibly drifting angle:
//!
//! * [`linalg`] — exact complex linear algebra, density matrices, Bell and
//!   Werner states.
//! * [`channel`] — frame-drift models, Kraus channels, depolarizing noise.
//! * [`protocol`] — Monte-Carlo protocol runs, transcripts, and estimation
//!   of the QBER `Q` and the frame-invariant correlation sum `C`.
//! * [`security`] — twirling to Bell-diagonal form, the lambda spectrum,
//!   Eve's information `I_E(Q, C)` and the secret key rate.
//! * [`qutrit`] — the d = 3 generalization: Weyl operators, mutually
//!   unbiased bases, and the invariant `C_3`.
//! * [`photonic`] — linear-optical realizations of the qutrit measurements
//!   and their verification as a POVM.

pub mod channel;
pub mod error;
pub mod linalg;
pub mod photonic;
pub mod protocol;
pub mod qutrit;
pub mod rng;
pub mod security;

pub use error::{Error, Result};
