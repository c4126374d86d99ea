use crate::error::Result;
use crate::flops::Tally;
use crate::glrt::{phi_unchecked, snr_mle, Detection};
use crate::grid::{PowerGrid, Region, Shape};
use crate::thresholds::ThresholdTable;

use super::check_table;

/// Exhaustive GLRT: every interval (or box) is tested against its
/// cardinality's threshold; among those that pass, the one with the
/// largest `J` is returned.
///
/// Ties go to the lexicographically smallest boundary tuple, `(a, b)` on a
/// line and `(a1, a2, b1, b2)` on a plane. `O(N²)` region evaluations.
pub fn exhaustive_detect(grid: &PowerGrid, table: &ThresholdTable) -> Result<Detection> {
    check_table(grid, table)?;
    exhaustive_counted(grid, table, &mut ())
}

struct Best {
    score: f64,
    mean: f64,
    region: Region,
}

fn finish(best: Option<Best>) -> Detection {
    match best {
        Some(b) => Detection {
            decided: true,
            region: b.region,
            snr_hat: snr_mle(b.mean),
            score: b.score,
        },
        None => Detection::none(),
    }
}

pub(crate) fn exhaustive_counted<T: Tally>(
    grid: &PowerGrid,
    table: &ThresholdTable,
    tally: &mut T,
) -> Result<Detection> {
    match grid.shape() {
        Shape::Line(n) => {
            let u = table.dense_u(1..=n)?;
            Ok(finish(scan_line(grid, n, &u, tally)))
        }
        Shape::Plane(rows, cols) => {
            let mut areas: Vec<usize> = (1..=rows)
                .flat_map(|h| (1..=cols).map(move |w| h * w))
                .collect();
            areas.sort_unstable();
            areas.dedup();
            let u = table.dense_u(areas)?;
            Ok(finish(scan_plane(grid, rows, cols, &u, tally)))
        }
    }
}

#[inline]
fn consider<T: Tally>(
    best: &mut Option<Best>,
    sum: f64,
    ell: usize,
    u: f64,
    region: impl FnOnce() -> Region,
    tally: &mut T,
) {
    let mean = sum / ell as f64;
    let clamped = mean.max(1.0);
    tally.tick(3); // divide, clamp, threshold compare
    if clamped >= u {
        let score = ell as f64 * phi_unchecked(clamped);
        tally.tick(5); // phi (2 sub, ln), scale, compare with best
        if best.as_ref().is_none_or(|b| score > b.score) {
            *best = Some(Best {
                score,
                mean,
                region: region(),
            });
        }
    }
}

fn scan_line<T: Tally>(grid: &PowerGrid, n: usize, u: &[f64], tally: &mut T) -> Option<Best> {
    let mut best = None;
    for a in 0..n {
        for b in a + 1..=n {
            let ell = b - a;
            let sum = grid.interval_sum(a, b);
            tally.tick(1);
            consider(&mut best, sum, ell, u[ell], || Region::interval(a, b), tally);
        }
    }
    best
}

fn scan_plane<T: Tally>(
    grid: &PowerGrid,
    rows: usize,
    cols: usize,
    u: &[f64],
    tally: &mut T,
) -> Option<Best> {
    let mut best = None;
    for a1 in 0..rows {
        for a2 in 0..cols {
            for b1 in a1 + 1..=rows {
                let h = b1 - a1;
                for b2 in a2 + 1..=cols {
                    let ell = h * (b2 - a2);
                    let sum = grid.rect_sum(a1, b1, a2, b2);
                    tally.tick(3);
                    consider(&mut best, sum, ell, u[ell], || Region::rect(a1, b1, a2, b2), tally);
                }
            }
        }
    }
    best
}
