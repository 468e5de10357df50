//! Free distance and multiplicity of a few rate-1/2 feedforward encoders,
//! given by their observation-matrix rows, plus a catastrophic one.

use nested_tbcc::spectrum::free_distance;
use nested_tbcc::{BitMatrix, EncoderSpec, Result};

fn main() -> Result<()> {
    let codes: [Vec<Vec<u8>>; 4] = [
        vec![vec![1, 1], vec![0, 1]],
        vec![vec![1, 0], vec![1, 1]],
        vec![vec![1, 1, 1], vec![1, 0, 1]],
        // both outputs share the factor (1 + D): all-ones input gives zero output forever
        vec![vec![1, 1], vec![1, 1]],
    ];
    for rows in codes {
        let r = free_distance(&EncoderSpec::feedforward(BitMatrix::from_rows(&rows)?)?);
        let mult = if r.catastrophic { "unbounded".to_string() } else { r.a_free.to_string() };
        println!("{:<20} d_free = {}, A_free = {mult}", format!("{rows:?}"), r.d_free);
    }
    Ok(())
}
