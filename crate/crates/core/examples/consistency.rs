//! Mean IoU of the refined region as the grid grows, the support staying a
//! fixed fraction [N/4, N/2) of it.
//!
//! cargo run --release --example consistency [snr_db]

use specdet::sim::consistency_probe;

fn main() -> specdet::Result<()> {
    let snr_db: f64 = std::env::args().nth(1).map_or(10.0, |s| s.parse().expect("snr_db"));
    let sizes: Vec<usize> = (8..=14).map(|k| 1 << k).collect();
    for (n, iou) in consistency_probe(snr_db, 0.25, 0.5, &sizes, 500, 0)? {
        println!("N = {n:>6}  mean IoU {iou:.4}");
    }
    Ok(())
}
