//! Reproducible per-path random streams.
//!
//! Every path gets a ChaCha8 key derived from `(master_seed, path key)`;
//! the four independent sources of randomness a trajectory needs live on
//! separate ChaCha stream ids of that key, so reusing one of them (e.g. the
//! birth clocks in a coupling) never shifts the others.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    /// Unit exponentials driving the joint jump clock.
    JumpClock = 0,
    /// Uniforms deciding birth versus death at a jump.
    Thinning = 1,
    /// Unit exponentials for the birth-only clocks of the split construction.
    BirthClock = 2,
    /// The single exponential death clock of the split construction.
    DeathClock = 3,
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash of an Ulam-Harris label, stable across platforms and runs.
pub fn label_key(label: &[u32]) -> u64 {
    let mut h = 0xA076_1D64_78BD_642F_u64 ^ label.len() as u64;
    for &part in label {
        h = splitmix64(h ^ u64::from(part));
    }
    h
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathStreams {
    key: [u8; 32],
    master: u64,
    path: u64,
}

impl PathStreams {
    pub fn new(master_seed: u64, path: u64) -> Self {
        let mut state = splitmix64(master_seed) ^ splitmix64(path.wrapping_mul(0xD1B5_4A32_D192_ED03));
        let mut key = [0u8; 32];
        for chunk in key.chunks_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        PathStreams { key, master: master_seed, path }
    }

    /// Reproducibility token `master:path`.
    pub fn token(&self) -> String {
        format!("{}:{}", self.master, self.path)
    }

    pub fn for_label(master_seed: u64, label: &[u32]) -> Self {
        Self::new(master_seed ^ 0x5EED_F00D_1ABE_1000, label_key(label))
    }

    pub fn stream(&self, which: Stream) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(which as u64);
        rng
    }
}

/// Seed of the `index`-th independent sub-experiment of a master seed.
pub fn child_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master_seed ^ 0x243F_6A88_85A3_08D3).wrapping_add(index))
}
