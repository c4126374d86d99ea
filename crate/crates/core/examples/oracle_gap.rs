//! SNR at which each detector's MD rate crosses one half, for three signal
//! sizes. The oracle knows the support; the two GLRTs do not.
//!
//! cargo run --release --example oracle_gap

use specdet::sim::{Cell, Sweep};
use specdet::{DetectorKind, Shape};

fn crossing(snrs: &[f64], md: &[f64]) -> Option<f64> {
    (1..snrs.len()).find(|&i| md[i - 1] >= 0.5 && md[i] < 0.5).map(|i| {
        let f = (md[i - 1] - 0.5) / (md[i - 1] - md[i]);
        snrs[i - 1] + f * (snrs[i] - snrs[i - 1])
    })
}

fn main() -> specdet::Result<()> {
    let shape = Shape::Line(1024);
    let snrs: Vec<f64> = (-12..=10).map(f64::from).collect();
    let detectors = [DetectorKind::Oracle, DetectorKind::Exhaustive, DetectorKind::Binary];
    let sweep = Sweep::new(300, 1e-2, 0);

    println!("{:>5} {:>10} {:>10} {:>10}", "ell", "oracle", "exhaustive", "binary");
    for size in [16, 64, 256] {
        let cells: Vec<Cell> = detectors
            .iter()
            .flat_map(|&d| snrs.iter().map(move |&s| Cell::signal(d, shape, size, s)))
            .collect();
        let res = sweep.run(&cells)?;
        print!("{size:>5}");
        for chunk in res.records.chunks(snrs.len()) {
            let md: Vec<f64> = chunk.iter().map(|r| r.md_rate).collect();
            match crossing(&snrs, &md) {
                Some(x) => print!(" {x:>8.2}dB"),
                None => print!(" {:>10}", "-"),
            }
        }
        println!();
    }
    Ok(())
}
