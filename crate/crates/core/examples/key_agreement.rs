//! Enrollment and reconstruction with a designed pair, including a chosen key.

use nested_tbcc::design::{design_nested, CalibrationConfig, NestedDesignConfig};
use nested_tbcc::key_agreement::{enroll, enroll_chosen, reconstruct, reconstruct_chosen};
use nested_tbcc::sim::{bsc_sample, random_bits};
use nested_tbcc::{BitVector, Result, WavaConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<()> {
    let p_a = 0.0149;
    let mut cfg = NestedDesignConfig::new(p_a, 1e-2, 16, 3, 4, 5, 50);
    cfg.calibration = CalibrationConfig { max_trials: 20_000, target_errors: 50, steps: 8 };
    cfg.distortion_blocks = 500;
    let pair = design_nested(&cfg)?.pair;
    let mut rng = ChaCha8Rng::seed_from_u64(3);

    let x = random_bits(pair.block_length(), &mut rng);
    let rec = enroll(&pair, &x)?;
    println!("x      {x}\nkey    {}\nhelper {}\ndistortion {}", rec.secret_key, rec.helper_data, rec.distortion);

    let y = x.xor(&bsc_sample(pair.block_length(), p_a, &mut rng)?)?;
    println!("y differs from x in {} positions", y.hamming_distance(&x)?);
    let key = reconstruct(&pair, &y, &rec.helper_data)?;
    println!("reconstructed {key} ({})", if key == rec.secret_key { "match" } else { "mismatch" });

    let chosen: BitVector = "1111000011110000".parse()?;
    let cs = enroll_chosen(&pair, &x, &chosen, &WavaConfig::default())?;
    let back = reconstruct_chosen(&pair, &y, &cs.helper_data, &cs.pad, &WavaConfig::default())?;
    println!("chosen key {chosen} -> {back}");
    Ok(())
}
