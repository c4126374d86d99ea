//! Estimated noise power instead of a known one: MD rate and IoU error as
//! the reference sample grows.
//!
//! cargo run --release --example noise_calibration [amplitude]

use specdet::sim::{Cell, NoiseNormalization, Sweep};
use specdet::{DetectorKind, Shape};

fn main() -> specdet::Result<()> {
    let normalization = match std::env::args().nth(1).as_deref() {
        Some("amplitude") => NoiseNormalization::Amplitude,
        _ => NoiseNormalization::Power,
    };
    let sweep = Sweep {
        normalization,
        ..Sweep::new(500, 1e-6, 0)
    };
    let shape = Shape::Line(1024);
    let mut cells = Vec::new();
    for snr in [3.0, 6.0, 10.0] {
        let base = Cell::signal(DetectorKind::Binary, shape, 64, snr);
        cells.extend([64, 256, 1024].map(|k| base.with_noise_ref(k)));
        cells.push(base);
    }
    println!("{:<18} {:>6} {:>8} {:>10}", "detector", "snr", "md", "iou err");
    for r in sweep.run(&cells)?.records {
        println!(
            "{:<18} {:>6.1} {:>8.4} {:>10.4}",
            r.detector,
            r.snr_db.unwrap_or(f64::NAN),
            r.md_rate,
            r.iou_error_rate.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
