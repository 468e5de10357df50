//! Keyed random streams. Every trial or candidate draws from its own generator
//! derived from `(master seed, stream, index)`, so results do not depend on how
//! work is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const STREAM_FEC_SEARCH: u64 = 1;
pub const STREAM_VQ_SEARCH: u64 = 2;
pub const STREAM_FER: u64 = 3;
pub const STREAM_DISTORTION: u64 = 4;
pub const STREAM_END_TO_END: u64 = 5;
pub const STREAM_DESIGN: u64 = 6;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A 64-bit child seed; distinct keys give unrelated seeds.
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    let mut s = master;
    let a = splitmix64(&mut s);
    let mut s = a ^ stream.wrapping_mul(0xD1B5_4A32_D192_ED03);
    let b = splitmix64(&mut s);
    let mut s = b ^ index.wrapping_mul(0x8CB9_2BA7_2F3D_8DD7);
    splitmix64(&mut s)
}

pub fn stream_rng(master: u64, stream: u64, index: u64) -> ChaCha8Rng {
    let mut s = derive_seed(master, stream, index);
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut s).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}
