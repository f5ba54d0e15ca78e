//! Counter-based random streams.
//!
//! Every random draw in a simulation is addressed by `(seed, purpose, index)`.
//! The seed and purpose form the ChaCha key; the index selects the 64-bit
//! stream, so path `i` sees the same numbers whichever thread simulates it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for; distinct purposes never share key material.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum StreamPurpose {
    Path = 1,
    Evaluation = 2,
    Search = 3,
    Parameters = 4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamKey {
    seed: u64,
    purpose: StreamPurpose,
}

impl StreamKey {
    pub fn new(seed: u64, purpose: StreamPurpose) -> Self {
        Self { seed, purpose }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent generator for stream `index` under this key.
    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        let mut state = self.seed ^ (self.purpose as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93);
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(index);
        rng
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
