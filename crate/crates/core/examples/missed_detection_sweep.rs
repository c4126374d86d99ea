//! MD rate and IoU against SNR for the three detectors, written as CSV.
//! A smaller version of `specdet sweep --preset paper1d`.
//!
//! cargo run --release --example missed_detection_sweep > md.csv

use specdet::sim::{Cell, Sweep};
use specdet::{DetectorKind, Shape};

fn main() -> specdet::Result<()> {
    let shape = Shape::Line(1024);
    let mut cells = Vec::new();
    for size in [16, 64, 256] {
        for snr in [-3.0, 0.0, 3.0, 6.0, 9.0] {
            for d in [DetectorKind::Exhaustive, DetectorKind::Binary, DetectorKind::Oracle] {
                cells.push(Cell::signal(d, shape, size, snr));
            }
        }
    }
    let sweep = Sweep::new(200, 1e-6, 0);
    let res = sweep.run_with_progress(&cells, |done, total, r| eprintln!("{done}/{total} {} {:?} dB", r.detector, r.snr_db))?;
    res.write_csv(std::io::stdout().lock())
}
