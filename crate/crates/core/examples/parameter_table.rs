//! Recomputes the derived columns of the bundled reference table and prints
//! them beside the printed values.

use nested_tbcc::report::{fixtures_dir, load_reference_rows, EvaluationRow};
use nested_tbcc::Result;

fn main() -> Result<()> {
    let rows = load_reference_rows(&fixtures_dir().join("table2_reference.csv"))?;
    println!("{}", EvaluationRow::csv_header());
    for r in &rows {
        let row = r.recompute()?;
        println!("{}", row.csv_line());
        println!(
            "  printed: R_w {} helper {} ratio {} complexity {} / {}",
            r.r_w, r.helper_bits, r.ratio, r.complexity_fec_log2, r.complexity_vq_log2
        );
    }
    Ok(())
}
