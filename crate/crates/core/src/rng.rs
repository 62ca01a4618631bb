//! Seeded random streams.
//!
//! Every random draw in the crate comes from a ChaCha20 generator keyed by a
//! 64-bit seed. Uniform integers on arbitrary ranges are obtained by
//! rejection. The cover source and the hidden-bit source share one seed but
//! read from different ChaCha streams; Δ draws and padding bits get their own
//! seeds so that a trace can be replayed one stream at a time.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

pub type StegoRng = ChaCha20Rng;

pub const COVER_STREAM: u64 = 0;
pub const HIDDEN_STREAM: u64 = 1;
pub const BOUND_STREAM: u64 = 2;

pub fn seeded(seed: u64) -> StegoRng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn seeded_stream(seed: u64, stream: u64) -> StegoRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Seeds {
    /// Cover symbols and simulated hidden bits.
    pub source: u64,
    pub delta: u64,
    pub padding: u64,
}

impl Seeds {
    pub fn new(source: u64, delta: u64, padding: u64) -> Self {
        Seeds { source, delta, padding }
    }

    /// Three distinct seeds derived from one number.
    pub fn from_base(base: u64) -> Self {
        Seeds {
            source: base,
            delta: base ^ 0x9e37_79b9_7f4a_7c15,
            padding: base ^ 0xc2b2_ae3d_27d4_eb4f,
        }
    }

    pub fn cover_rng(&self) -> StegoRng {
        seeded_stream(self.source, COVER_STREAM)
    }

    pub fn hidden_rng(&self) -> StegoRng {
        seeded_stream(self.source, HIDDEN_STREAM)
    }

    /// Monte-Carlo estimates that must not disturb the cover stream.
    pub fn bound_rng(&self) -> StegoRng {
        seeded_stream(self.source, BOUND_STREAM)
    }

    pub fn delta_rng(&self) -> StegoRng {
        seeded(self.delta)
    }

    pub fn padding_rng(&self) -> StegoRng {
        seeded(self.padding)
    }
}
