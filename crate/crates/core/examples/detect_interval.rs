//! One noisy 1-D measurement, both GLRT detectors.
//!
//! cargo run --example detect_interval [snr_db] [seed]

use specdet::sim::{gen_trial, TrialConfig};
use specdet::{binary_detect, exhaustive_detect, iou, Region, Shape, ThresholdTable};

fn main() -> specdet::Result<()> {
    let mut args = std::env::args().skip(1);
    let snr_db: f64 = args.next().map_or(3.0, |s| s.parse().expect("snr_db"));
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));

    let shape = Shape::Line(1024);
    let truth = Region::interval(300, 364);
    let grid = gen_trial(&TrialConfig::signal(shape, truth, snr_db, seed))?;
    let table = ThresholdTable::calibrate(1e-6, shape.len(), [])?;

    println!("truth {truth} at {snr_db} dB");
    for (name, d) in [
        ("exhaustive", exhaustive_detect(&grid, &table)?),
        ("binary", binary_detect(&grid, &table)?),
    ] {
        if d.decided {
            println!(
                "{name:>10}: {} snr_hat {:.2} dB, J = {:.2}, IoU {:.3}",
                d.region,
                d.snr_hat.db(),
                d.score,
                iou(&d.region, &truth)
            );
        } else {
            println!("{name:>10}: nothing");
        }
    }
    Ok(())
}
