//! Deterministic random-stream derivation.
//!
//! Every stochastic task (a replication, an arm, a side, a meta-replication)
//! owns a stream derived from the master seed and a structured label path.
//! Streams never depend on scheduling, so results are identical for any
//! number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// The generator used for every simulation stream.
pub type SimRng = ChaCha8Rng;

/// One component of a stream label path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Label {
    Name(String),
    Index(u64),
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label::Name(s.to_string())
    }
}

impl From<String> for Label {
    fn from(s: String) -> Self {
        Label::Name(s)
    }
}

impl From<u64> for Label {
    fn from(i: u64) -> Self {
        Label::Index(i)
    }
}

impl From<usize> for Label {
    fn from(i: usize) -> Self {
        Label::Index(i as u64)
    }
}

fn digest(master_seed: u64, labels: &[Label]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"ama-stream/v1");
    h.update(master_seed.to_le_bytes());
    for label in labels {
        match label {
            Label::Name(s) => {
                h.update([0u8]);
                h.update((s.len() as u64).to_le_bytes());
                h.update(s.as_bytes());
            }
            Label::Index(i) => {
                h.update([1u8]);
                h.update(i.to_le_bytes());
            }
        }
    }
    let out = h.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&out);
    seed
}

/// Derive an independent stream from `(master_seed, labels...)`.
pub fn derive_stream(master_seed: u64, labels: &[Label]) -> SimRng {
    SimRng::from_seed(digest(master_seed, labels))
}

/// Derive a child master seed, used to give sub-experiments their own seed space.
pub fn derive_seed(master_seed: u64, labels: &[Label]) -> u64 {
    let d = digest(master_seed, labels);
    u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
}

/// Shorthand for building label paths: `labels!["rep", r, "arm", 1usize]`.
#[macro_export]
macro_rules! labels {
    ($($l:expr),* $(,)?) => {
        [$($crate::rng::Label::from($l)),*]
    };
}
