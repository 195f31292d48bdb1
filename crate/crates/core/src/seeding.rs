//! Derivation of independent random streams from a single master seed.
//!
//! Every component that consumes randomness (environment noise and resets,
//! exploration, evaluation, probes) owns its own ChaCha stream. The stream seed
//! is `splitmix64(master ^ tag ^ splitmix64(index))`, so adding a new consumer
//! never shifts the draws seen by an existing one.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    Env,
    Policy,
    Dropout,
    Eval,
    Probe,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::Env => 0x454e_5600_0000_0001,
            Stream::Policy => 0x504f_4c00_0000_0002,
            Stream::Dropout => 0x4452_4f00_0000_0003,
            Stream::Eval => 0x4556_4100_0000_0004,
            Stream::Probe => 0x5052_4f00_0000_0005,
        }
    }
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, stream: Stream, index: u64) -> u64 {
    splitmix64(master ^ stream.tag() ^ splitmix64(index))
}

pub fn stream(master: u64, stream: Stream, index: u64) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(master, stream, index))
}
