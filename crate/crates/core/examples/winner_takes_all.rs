//! Two disjoint signal blocks. The GLRT reports a single region: one block
//! when the gap between them is costly enough, the span of both otherwise.
//! The binary search starts from the whole grid and only moves edges
//! inwards, so it keeps both blocks whenever they sit in opposite halves.
//!
//! cargo run --example winner_takes_all

use specdet::{binary_detect, exhaustive_detect, likelihood, PowerGrid, Region, ThresholdTable};

fn blocks(n: usize, width: usize, starts: [usize; 2], gamma: f64) -> PowerGrid {
    let mut x = vec![1.0; n];
    for a in starts {
        x[a..a + width].iter_mut().for_each(|v| *v = 1.0 + gamma);
    }
    PowerGrid::line(x).unwrap()
}

fn main() -> specdet::Result<()> {
    let n = 1024;
    let table = ThresholdTable::calibrate(1e-6, n, [])?;
    for (width, starts) in [(32, [224, 768]), (128, [0, 896]), (32, [100, 140])] {
        let g = blocks(n, width, starts, 10.0);
        let one = Region::interval(starts[0], starts[0] + width);
        let span = Region::interval(starts[0], starts[1] + width);
        println!("blocks of {width} at {starts:?}: J(one) {:.1}, J(span) {:.1}", likelihood(&g, &one)?, likelihood(&g, &span)?);
        println!("  exhaustive {}", exhaustive_detect(&g, &table)?.region);
        println!("  binary     {}", binary_detect(&g, &table)?.region);
    }
    Ok(())
}
