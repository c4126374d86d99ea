//! Counted operations per detector and phase on one trial per shape.
//!
//! cargo run --release --example flop_count

use specdet::sim::{gen_trial, random_placement, TrialConfig};
use specdet::{count_flops, DetectorKind, Shape, ThresholdTable};

fn main() -> specdet::Result<()> {
    for shape in [Shape::Line(256), Shape::Line(1024), Shape::Line(4096), Shape::Plane(64, 64), Shape::Plane(128, 128)] {
        let table = ThresholdTable::calibrate(1e-6, shape.len(), [])?;
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0);
        let region = random_placement(shape, shape.side() / 16, &mut rng)?;
        let grid = gen_trial(&TrialConfig::signal(shape, region, 10.0, 0))?;

        let b = count_flops(DetectorKind::Binary, &grid, &table)?;
        let e = count_flops(DetectorKind::Exhaustive, &grid, &table)?;
        println!(
            "{:>8}: binary {:>7} (search {}, refine {})  exhaustive {:.3e}",
            shape.to_string(),
            b.total(),
            b.dyadic_search,
            b.refine,
            e.total() as f64
        );
    }
    Ok(())
}
