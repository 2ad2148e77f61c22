//! Contextual linear bandits with per-arm ridge estimates.
//!
//! The main policy is [`EpsGreedy`]: a warm-up of `p` rounds, then
//! exploration with probability `p/t` and greedy play otherwise. Each arm
//! keeps an online ridge estimate regularized by `1/√n`. [`ContextualUcb`]
//! is a small optimistic policy that searches over subsets of past samples
//! for the narrowest confidence width.
//!
//! [`calibration`] turns estimates of the problem constants into a choice of
//! `p`, and [`harness`] runs replicated experiments and writes regret curves.

pub mod calibration;
pub mod environment;
pub mod error;
pub mod estimator;
pub mod linalg;
pub mod harness;
pub mod policy;

pub use error::{Error, Result};
pub use estimator::{ArmState, Estimate};
pub use linalg::{SymMat, Vector};
pub use policy::{Action, Arm, ContextualUcb, EpsGreedy, EpsGreedyConfig, Mode, Policy, UcbConfig, UniformPolicy};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic generator for `(seed, stream)`. Independent streams of the
/// same seed drive contexts, policy coins and parameter draws separately.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
