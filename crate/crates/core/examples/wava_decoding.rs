//! Decodes noisy codewords with the wrap-around Viterbi decoder and compares
//! against exhaustive nearest-codeword search.

use nested_tbcc::sim::{bsc_sample, random_bits};
use nested_tbcc::wava::{exhaustive_decode, wava_decode};
use nested_tbcc::{build_trellis, BitMatrix, EncoderSpec, Result, TailbitingCode, WavaConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<()> {
    let spec = EncoderSpec::feedforward(BitMatrix::from_rows(&[[1, 0, 1], [1, 1, 1]])?)?;
    let code = TailbitingCode::unfrozen(spec, 12)?;
    let trellis = build_trellis(&code);
    let cfg = WavaConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);

    let (mut agree, mut converged, trials) = (0, 0, 2000);
    for _ in 0..trials {
        let msg = random_bits(code.dimension(), &mut rng);
        let received = code.encode(&msg)?.xor(&bsc_sample(code.length(), 0.08, &mut rng)?)?;
        let w = wava_decode(&trellis, &received, &cfg)?;
        let ml = exhaustive_decode(&code, &received)?;
        agree += usize::from(w.distance == ml.distance);
        converged += usize::from(w.converged);
    }
    println!("WAVA (V = {}) matched the nearest-codeword distance in {agree}/{trials} blocks", cfg.max_iterations);
    println!("stopped on a tailbiting survivor in {converged}/{trials} blocks");
    Ok(())
}
