//! Random search for a rate-1/3 error-correction code, then an extension by
//! one quantizer input ranked by free distance.

use nested_tbcc::design::{search_fec, search_vq_extension, FecSearchConfig, VqSearchConfig};
use nested_tbcc::Result;

fn main() -> Result<()> {
    let fec = search_fec(&FecSearchConfig { n: 3, m: 6, k_fec: 32, target_pb: 1e-3, w_max: 200, seed: 1, d_max: None })?;
    let degenerate = fec.log.iter().filter(|c| c.p_c.is_none()).count();
    println!("best of 200 (candidate {}): p_c = {:.5}, {degenerate} degenerate", fec.index, fec.p_c);
    println!("observation matrix rows: {:?}", fec.observation.to_rows());
    if fec.truncation_sensitive {
        println!("crossover moves with d_max: {:.5} -> {:.5}", fec.p_c, fec.p_c_recheck);
    }

    let parent = fec.code(32)?.spec().clone();
    let vq = search_vq_extension(&VqSearchConfig { parent, k_vq: 2, w_max: 200, seed: 2, injective_at: Some(32) })?;
    println!("extension {}: d_free = {}, A_free = {}", vq.index, vq.report.d_free, vq.report.a_free);
    Ok(())
}
