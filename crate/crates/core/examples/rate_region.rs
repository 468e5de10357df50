//! Region boundary for a noise level, with the bundled reference points
//! overlaid, as long-format CSV on stdout.

use nested_tbcc::report::{default_fixtures, fixture_overlay, overlay_csv, region_series, uniform_grid};
use nested_tbcc::Result;

fn main() -> Result<()> {
    let mut points = region_series(0.0149, &uniform_grid(51), &[384, 1024])?;
    points.extend(fixture_overlay(&default_fixtures())?.into_iter().filter(|p| p.series.starts_with("table2")));
    print!("{}", overlay_csv(&points));
    Ok(())
}
