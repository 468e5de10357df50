//! Union bound on block error probability from a truncated spectrum and the
//! crossover probability where it meets a target.

use nested_tbcc::bounds::{solve_crossover, union_bound_pb};
use nested_tbcc::spectrum::weight_enumerator;
use nested_tbcc::{BitMatrix, EncoderSpec, Result, TailbitingCode};

fn main() -> Result<()> {
    let spec = EncoderSpec::feedforward(BitMatrix::from_rows(&[[1, 0, 1, 1], [1, 1, 0, 1], [1, 1, 1, 1]])?)?;
    let code = TailbitingCode::unfrozen(spec, 32)?;
    let spectrum = weight_enumerator(&code, 48)?;
    println!("spectrum head: {:?}", spectrum.head(5));
    for p in [0.01, 0.02, 0.05, 0.08] {
        println!("p = {p:<5} P_B <= {:.4e}", union_bound_pb(&spectrum, p)?.value);
    }
    for target in [1e-2, 1e-3, 1e-6] {
        println!("P_B = {target:e} reached up to p_c = {:.5}", solve_crossover(&spectrum, target)?);
    }
    Ok(())
}
