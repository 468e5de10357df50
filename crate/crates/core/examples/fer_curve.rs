//! Simulated block error rate against the union bound, with ML and WAVA
//! decoding, written as CSV.

use nested_tbcc::bounds::union_bound_pb;
use nested_tbcc::io::fmt_sig;
use nested_tbcc::sim::{simulate_fer_with, FerDecoder, StopRule};
use nested_tbcc::spectrum::weight_enumerator;
use nested_tbcc::{BitMatrix, EncoderSpec, Result, TailbitingCode, WavaConfig};

fn main() -> Result<()> {
    let spec = EncoderSpec::feedforward(BitMatrix::from_rows(&[[1, 0, 1, 1], [1, 1, 0, 1], [1, 1, 1, 1]])?)?;
    let code = TailbitingCode::unfrozen(spec, 20)?;
    let spectrum = weight_enumerator(&code, code.length())?;
    let stop = StopRule::new(200_000, 100);
    println!("p,union_bound,wava,wava_hw,ml,ml_hw");
    for p in [0.02, 0.04, 0.06, 0.08, 0.1] {
        let wava = simulate_fer_with(&code, p, FerDecoder::Wava(WavaConfig::default()), &stop, 1)?;
        let ml = simulate_fer_with(&code, p, FerDecoder::MaximumLikelihood, &stop, 1)?;
        println!(
            "{p},{},{},{},{},{}",
            fmt_sig(union_bound_pb(&spectrum, p)?.value),
            fmt_sig(wava.estimate),
            fmt_sig(wava.halfwidth),
            fmt_sig(ml.estimate),
            fmt_sig(ml.halfwidth)
        );
    }
    Ok(())
}
