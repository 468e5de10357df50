//! Builds a small two-input tailbiting code, encodes a message and prints the
//! full weight spectrum next to a brute-force histogram.

use nested_tbcc::spectrum::weight_enumerator;
use nested_tbcc::{BitMatrix, BitVector, EncoderSpec, FreezingSchedule, Result, TailbitingCode};

fn main() -> Result<()> {
    // m = 3, n = 3, k = 2
    let spec = EncoderSpec::new(
        BitMatrix::from_rows(&[[1], [0], [1]])?,
        BitMatrix::from_rows(&[[1, 0, 1], [1, 1, 1], [0, 1, 1]])?,
        BitMatrix::from_rows(&[[1], [0], [1]])?,
    )?;
    let schedule = FreezingSchedule::none(6, 2).with_frozen(1, &[0, 3])?;
    let code = TailbitingCode::new(spec, schedule)?;
    println!("N = {}, K = {}, rate = {}", code.length(), code.dimension(), code.effective_rate());

    let message: BitVector = "1011001101".parse()?;
    let (word, states) = code.encode_with_states(&message)?;
    println!("message  {message}\ncodeword {word}\nstates   {states:?}");

    let spectrum = weight_enumerator(&code, code.length())?;
    let mut brute = vec![0u64; code.length() + 1];
    for w in code.codewords()? {
        brute[w.weight()] += 1;
    }
    println!("d  A_d  brute");
    for (d, count) in brute.iter().enumerate().filter(|(_, &c)| c > 0) {
        println!("{d:<2} {:<4} {count}", spectrum.coefficient(d));
    }
    Ok(())
}
