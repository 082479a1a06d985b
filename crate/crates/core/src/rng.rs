//! Counter-based random substreams.
//!
//! Every stochastic quantity in a run is drawn from a stream addressed by a
//! path of integers below a single master seed, e.g. `(codebook, message)` or
//! `(trial, index)`. A stream's content depends only on its address, never on
//! which worker thread evaluates it or in which order, so parallel runs are
//! bit-identical to sequential ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random stream type used throughout the crate.
pub type Stream = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A node in the seed hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedTree {
    key: u64,
}

impl SeedTree {
    pub fn new(master: u64) -> Self {
        SeedTree { key: splitmix64(master) }
    }

    /// Derive an independent sub-tree for a labelled purpose.
    pub fn child(&self, label: u64) -> SeedTree {
        SeedTree {
            key: splitmix64(self.key ^ splitmix64(label.wrapping_add(0x632b_e59b_d9b4_e019))),
        }
    }

    /// The `index`-th stream of this node. Distinct indices select disjoint
    /// ChaCha streams under the same key.
    pub fn stream(&self, index: u64) -> Stream {
        let mut rng = ChaCha8Rng::seed_from_u64(self.key);
        rng.set_stream(index);
        rng
    }
}

/// Labels used to separate the top-level purposes of one run.
pub mod label {
    pub const GENERATOR: u64 = 1;
    pub const CODEBOOK: u64 = 2;
    pub const TRIALS: u64 = 3;
    pub const ENSEMBLE: u64 = 4;
    pub const MC: u64 = 5;
    pub const CHECK: u64 = 6;
}
