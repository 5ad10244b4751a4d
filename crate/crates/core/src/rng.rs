//! Labelled random streams derived from a single master seed.
//!
//! Every stochastic source (UE placement, malfunctions, exploration, network
//! init, replay sampling) draws from its own stream so toggling one of them
//! leaves the others untouched.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub mod stream {
    pub const WORLD: &str = "world";
    pub const MALFUNCTION: &str = "malfunction";
    pub const POLICY_INIT: &str = "policy-init";
    pub const EXPLORATION: &str = "exploration";
    pub const REPLAY: &str = "replay";
    pub const EVAL: &str = "eval";
}

// splitmix64 finalizer
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn label_hash(label: &str) -> u64 {
    // FNV-1a
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Seed for the stream `label` under `master`, further split by `index`
/// (episode number, worker id, ...).
pub fn derive_seed(master: u64, label: &str, index: u64) -> u64 {
    mix(mix(master ^ label_hash(label)) ^ mix(index.wrapping_add(1)))
}

pub fn stream_rng(master: u64, label: &str, index: u64) -> SimRng {
    SimRng::seed_from_u64(derive_seed(master, label, index))
}
