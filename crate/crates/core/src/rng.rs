//! Seed derivation and per-signal random streams.
//!
//! All randomness in a run flows from one master seed. Components derive
//! their own seeds with [`derive_seed`], and the Monte-Carlo sampler opens
//! two independent ChaCha streams per signal (one for basis draws, one for
//! outcome draws), indexed by signal number. Results are therefore
//! independent of any internal batching or parallel partitioning.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; decorrelates nearby (seed, label) pairs.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministically derives a component seed from a master seed and a
/// component label.
pub fn derive_seed(master: u64, label: u64) -> u64 {
    splitmix64(master ^ splitmix64(label))
}

/// Stream roles within a single signal.
#[derive(Debug, Clone, Copy)]
pub enum StreamKind {
    BasisChoice,
    Outcome,
    PhaseDrift,
}

/// A ChaCha generator pinned to (seed, signal index, role). Two calls with
/// the same arguments always yield the same stream.
pub fn signal_stream(seed: u64, signal: u64, kind: StreamKind) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stream = match kind {
        StreamKind::BasisChoice => 3 * signal,
        StreamKind::Outcome => 3 * signal + 1,
        StreamKind::PhaseDrift => 3 * signal + 2,
    };
    rng.set_stream(stream);
    rng
}
