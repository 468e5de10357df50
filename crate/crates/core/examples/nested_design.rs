//! Runs the full nested design for a small block and prints the stages.

use nested_tbcc::design::{design_nested, CalibrationConfig, NestedDesignConfig};
use nested_tbcc::io::CodeFile;
use nested_tbcc::Result;

fn main() -> Result<()> {
    let mut cfg = NestedDesignConfig::new(0.0149, 1e-2, 32, 3, 6, 7, 100);
    cfg.calibration = CalibrationConfig { max_trials: 50_000, target_errors: 50, steps: 10 };
    cfg.distortion_blocks = 1000;
    let d = design_nested(&cfg)?;

    println!("union-bound p_c {:.5}, simulated p_c {:.5}", d.fec.p_c, d.calibration.p_c);
    println!("distortion budget {:.5}", d.budget);
    for s in &d.stages {
        println!("k = {}: d_free {}, q = {:.5} +- {:.5}", s.inputs, s.free_distance.d_free, s.distortion.estimate, s.distortion.halfwidth);
    }
    for f in &d.freezing {
        println!("freeze {:>2}: q = {:.5} {}", f.frozen, f.distortion.estimate, if f.within_budget { "ok" } else { "over" });
    }
    println!("K_fec = {}, K_vq = {}, helper bits = {}", d.pair.k_fec(), d.pair.k_vq(), d.pair.helper_len());
    println!("{}", CodeFile::from_pair(&d.pair).to_json()?);
    Ok(())
}
