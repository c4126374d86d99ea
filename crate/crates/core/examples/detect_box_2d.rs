//! A rectangle in a 128 x 128 time-frequency grid. The exhaustive search
//! visits every one of the ~6.8e7 rectangles, so it takes a few seconds.
//!
//! cargo run --release --example detect_box_2d

use std::time::Instant;

use specdet::sim::{gen_trial, TrialConfig};
use specdet::{binary_detect, exhaustive_detect, iou, Region, Shape, ThresholdTable};

fn main() -> specdet::Result<()> {
    let shape = Shape::Plane(128, 128);
    let truth = Region::rect(40, 56, 70, 102);
    let grid = gen_trial(&TrialConfig::signal(shape, truth, 0.0, 3))?;
    let table = ThresholdTable::calibrate(1e-6, shape.len(), [])?;

    let t = Instant::now();
    let b = binary_detect(&grid, &table)?;
    println!("binary     {} IoU {:.3} in {:?}", b.region, iou(&b.region, &truth), t.elapsed());

    let t = Instant::now();
    let e = exhaustive_detect(&grid, &table)?;
    println!("exhaustive {} IoU {:.3} in {:?}", e.region, iou(&e.region, &truth), t.elapsed());
    Ok(())
}
