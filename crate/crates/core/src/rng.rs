//! Counter-based random streams.
//!
//! Every random draw is taken from a ChaCha stream selected by
//! `(seed, realization, role)`, so each matrix of each realization is
//! reproducible on its own regardless of evaluation order or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// What a random stream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stream {
    Placement,
    BsRis,
    Direct(usize),
    RisUser(usize),
    Phases,
}

impl Stream {
    fn code(self) -> u64 {
        match self {
            Stream::Placement => 0,
            Stream::BsRis => 1,
            Stream::Phases => 2,
            Stream::Direct(k) => 16 + 2 * k as u64,
            Stream::RisUser(k) => 17 + 2 * k as u64,
        }
    }
}

/// Seed of one realization. Bit-identical inputs give bit-identical streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RealizationSeed {
    pub master: u64,
    pub realization: u64,
}

impl RealizationSeed {
    pub fn new(master: u64, realization: u64) -> Self {
        RealizationSeed { master, realization }
    }

    pub fn rng(&self, stream: Stream) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.master);
        rng.set_stream(self.realization.wrapping_mul(1 << 24) ^ stream.code());
        rng
    }

    /// Compact per-realization identifier, used for reporting.
    pub fn id(&self) -> u64 {
        splitmix64(self.master ^ splitmix64(self.realization))
    }
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
