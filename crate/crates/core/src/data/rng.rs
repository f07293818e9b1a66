use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// A reproducible random stream: one per replication.
///
/// Streams with the same seed but different ids are independent ChaCha
/// streams over the same key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// A derived stream for a sub-task (e.g. a split inside a replication).
    pub fn child(&self, tag: u64) -> RngStream {
        RngStream {
            seed: self.seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15),
            stream_id: self.stream_id,
        }
    }
}
