use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Counter-addressed Bernoulli source: the draw for iteration `k` depends
/// only on `(seed, stream, k)`, never on how many draws came before it.
#[derive(Clone, Debug)]
pub struct CoinStream {
    rng: ChaCha8Rng,
}

impl CoinStream {
    pub const COMMUNICATION: u64 = 0x636f_6d6d;

    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, Self::COMMUNICATION)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        CoinStream { rng }
    }

    /// Uniform draw in `[0, 1)` for iteration `k`.
    pub fn uniform(&mut self, k: u64) -> f64 {
        // One u64 consumes two 32-bit words of the keystream.
        self.rng.set_word_pos(2 * k as u128);
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// `true` with probability `p`.
    pub fn coin(&mut self, k: u64, p: f64) -> bool {
        self.uniform(k) < p
    }
}
