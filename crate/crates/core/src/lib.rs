//! Loss-tolerant quantum strong coin flipping.
//!
//! The crate builds the qubit encodings and check sets used by the protocol,
//! simulates honest and adversarial executions over a lossy channel, and
//! evaluates the cheating-probability bounds together with the optimal
//! encoding parameter.
//!
//! * [`qmath`]: density operators, trace distance, fidelity, Helstrom bound.
//! * [`states`]: the λ-parameterized encodings, mixed commitments and check sets.
//! * [`engine`]: protocol state machines, adversaries and the purification oracle.
//! * [`analysis`]: closed-form bounds, minimax optimization, k-fold sweep and
//!   the numeric refinement of the cheating-Alice bound.
//! * [`cli`]: argument parsing, report formatting and the verification suite.

pub mod analysis;
pub mod cli;
pub mod engine;
pub mod error;
pub mod optim;
pub mod qmath;
pub mod states;

pub use error::{Error, Result};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used for every stochastic routine in the crate.
pub type SimRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Independent stream for one trial, so any trial can be replayed from
/// `(seed, index)` alone.
pub fn trial_rng(seed: u64, index: u64) -> SimRng {
    let mut rng = SimRng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
